//! Fractal dimensions of closed subsets of finitely branching tree path
//! spaces.
//!
//! A closed subset of the path space of a finitely branching rooted tree `T`
//! is the path space of a unique leafless subtree `S`; its lower and upper
//! box dimensions are the liminf/limsup of `log s_n / log t_n`, where `s_n`
//! and `t_n` count the level-`n` nodes. When `S` is level-wise uniformly
//! branching (every node of a level has the same number of successors), the
//! Hausdorff dimension equals the lower box dimension and the packing
//! dimension equals the upper box dimension; the crate certifies the
//! covering half of that argument by normalizing arbitrary prefix-free
//! covers to single-level covers of no larger cost, and cross-checks it
//! against a brute-force minimal-cover search.
//!
//! Profinite groups presented as inverse systems of finite groups get the
//! same treatment through their canonical path-space trees: a closed
//! subgroup projects to a level-wise uniform subtree whose level counts are
//! the subgroup orders, so its dimensions are liminf/limsup of
//! `log |U_n| / log |L_n|`.
//!
//! Module map:
//! - [`tree`]: tree truncations, level counts, ultrametric, uniform measure
//! - [`cover`]: prefix-free covers, r-costs, cover normalization, oracle
//! - [`dimension`]: ratio sequences, box estimates, exact limits, reports
//! - [`profinite`]: inverse systems, subgroup chains, group dimension reports
//! - [`families`]: the canonical example trees and density set specs
//! - [`spec_io`]: spec-file parsing and text/JSON/CSV report rendering
//! - [`prec`]: fixed-point big-integer logarithms

pub mod cover;
pub mod dimension;
pub mod families;
pub mod prec;
pub mod profinite;
pub mod spec_io;
pub mod tree;

pub use cover::{
    brute_force_min_cover, covers_space, full_level_cover, is_prefix_free, min_level_cost,
    normalize_cover, r_cost, Cover, CoverError, CostValue, Exponent, NormalizationTrace,
};
pub use dimension::{
    box_estimates, dimension_report, exact_box_limits, local_upper_box_check, ratio_sequence,
    Certification, DimensionBound, DimensionError, DimensionReport, ReportOptions,
};
pub use families::{
    example_alternating_blocks, example_countable_tree, FamilyError, SetSpec,
};
pub use profinite::{
    density_subgroup_report, density_subgroup_spec, group_dimension_report, subgroup_projections,
    subgroup_to_subtree, system_to_tree, FiniteGroup, Generator, GroupError, InverseSystem,
    SubgroupChain,
};
pub use spec_io::{SpecError, SystemSpec, TreeSpec};
pub use tree::{BranchingProfile, Node, Symbol, TreeError, TreeTruncation, Uniformity};
