//! Specification files and report rendering.
//!
//! Trees, inverse systems, generator lists, and covers are described by small
//! JSON documents with a `kind` discriminator; reports render to structured
//! text, JSON, and CSV (columns `n,s_n,t_n,ratio`). All emitters are
//! deterministic: identical inputs produce byte-identical output, and numeric
//! fields round-trip at full stored precision (shortest-round-trip floats).

use crate::cover::{Cover, CoverError, CostValue, NormalizationCase, NormalizationTrace};
use crate::dimension::{Certification, DimensionBound, DimensionReport};
use crate::families::{self, FamilyError, SetSpec};
use crate::profinite::{FiniteGroup, Generator, GroupDimensionReport, GroupError, InverseSystem};
use crate::tree::{BranchingProfile, Node, Symbol, TreeError, TreeTruncation};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("malformed spec: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unknown predicate id {0:?} (known: countable)")]
    UnknownPredicate(String),
    #[error("unknown family {0:?} (known: alternating-blocks, countable, full-binary)")]
    UnknownFamily(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Cover(#[from] CoverError),
}

/// Tree specification document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TreeSpec {
    /// Level-wise uniform tree from a branching profile.
    Profile {
        profile: BranchingProfile,
        depth: usize,
    },
    /// Explicit prefix-closed node list (symbol sequences).
    Nodes { nodes: Vec<Vec<Symbol>>, depth: usize },
    /// Named membership predicate over an ambient profile.
    Predicate {
        predicate_id: String,
        depth: usize,
    },
    /// Named example family.
    Family { name: String, depth: usize },
}

impl TreeSpec {
    pub fn depth(&self) -> usize {
        match self {
            TreeSpec::Profile { depth, .. }
            | TreeSpec::Nodes { depth, .. }
            | TreeSpec::Predicate { depth, .. }
            | TreeSpec::Family { depth, .. } => *depth,
        }
    }

    /// Builds the tree. `ambient` enforces branching >= 2 everywhere.
    pub fn build(&self, ambient: bool) -> Result<TreeTruncation, SpecError> {
        match self {
            TreeSpec::Profile { profile, depth } => {
                Ok(TreeTruncation::from_profile(profile, *depth, ambient)?)
            }
            TreeSpec::Nodes { nodes, depth } => {
                let nodes: Vec<Node> = nodes.iter().map(|s| Node::from_symbols(s)).collect();
                Ok(TreeTruncation::from_nodes(&nodes, *depth, ambient)?)
            }
            TreeSpec::Predicate {
                predicate_id,
                depth,
            } => match predicate_id.as_str() {
                "countable" => Ok(families::example_countable_tree(*depth)?),
                other => Err(SpecError::UnknownPredicate(other.to_string())),
            },
            TreeSpec::Family { name, depth } => build_family(name, *depth),
        }
    }
}

/// Builds a named example family at the given depth.
pub fn build_family(name: &str, depth: usize) -> Result<TreeTruncation, SpecError> {
    match name {
        "alternating-blocks" => Ok(families::example_alternating_blocks(depth)?),
        "countable" => Ok(families::example_countable_tree(depth)?),
        "full-binary" => Ok(TreeTruncation::from_profile(
            &BranchingProfile::Constant { branch: 2 },
            depth,
            true,
        )?),
        other => Err(SpecError::UnknownFamily(other.to_string())),
    }
}

/// Canonical ambient tree of a family: full binary for all shipped families.
pub fn family_ambient(name: &str, depth: usize) -> Result<TreeTruncation, SpecError> {
    match name {
        "alternating-blocks" | "countable" | "full-binary" => Ok(TreeTruncation::from_profile(
            &BranchingProfile::Constant { branch: 2 },
            depth,
            true,
        )?),
        other => Err(SpecError::UnknownFamily(other.to_string())),
    }
}

/// Inverse-system specification document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SystemSpec {
    /// Abelian tower: `L_n` is the product of the first `n` moduli.
    AbelianProduct { moduli: Vec<u64> },
    /// Explicit levels (cayley tables or abelian products) with element maps.
    CayleyTower {
        levels: Vec<FiniteGroup>,
        maps: Vec<Vec<u32>>,
    },
    /// `L_n = Z/base^n`.
    CyclicTower { base: u64, depth: usize },
}

impl SystemSpec {
    pub fn build(&self) -> InverseSystem {
        match self {
            SystemSpec::AbelianProduct { moduli } => InverseSystem::AbelianTower {
                moduli: moduli.clone(),
            },
            SystemSpec::CayleyTower { levels, maps } => InverseSystem::Explicit {
                levels: levels.clone(),
                maps: maps.clone(),
            },
            SystemSpec::CyclicTower { base, depth } => InverseSystem::CyclicTower {
                base: *base,
                depth: *depth,
            },
        }
    }
}

/// Generator list document: either element indices, coordinate tuples, or a
/// density set spec expanded to basis generators for the C2 tower.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    Elements { generators: Vec<Generator> },
    DensitySet { set: SetSpec },
}

pub fn parse_tree_spec(text: &str) -> Result<TreeSpec, SpecError> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_system_spec(text: &str) -> Result<SystemSpec, SpecError> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_generator_spec(text: &str) -> Result<GeneratorSpec, SpecError> {
    Ok(serde_json::from_str(text)?)
}

/// Parses a cover file: a JSON list of symbol sequences.
pub fn parse_cover(text: &str) -> Result<Cover, SpecError> {
    let lists: Vec<Vec<Symbol>> = serde_json::from_str(text)?;
    let nodes = lists.iter().map(|s| Node::from_symbols(s)).collect();
    Ok(Cover::new(nodes)?)
}

/// Serializes a cover as its canonical sorted symbol-sequence list.
pub fn cover_to_json(f: &Cover) -> String {
    serde_json::to_string(&crate::cover::cover_to_sorted_lists(f)).expect("serializable")
}

fn fmt_cost(c: &CostValue) -> String {
    match &c.exact {
        Some(e) => format!("{} (= {})", e, c.value()),
        None => format!("{}", c.value()),
    }
}

fn fmt_bound(b: &DimensionBound) -> String {
    match b {
        DimensionBound::EqualTo { value } => format!("= {value}"),
        DimensionBound::AtMost { value } => format!("<= {value}"),
    }
}

/// Structured-text rendering of a dimension report.
pub fn render_report_text(rep: &DimensionReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "depth: {}", rep.depth);
    let _ = writeln!(
        out,
        "tail window: [{}, {}] (fraction {})",
        rep.estimates.window_start, rep.estimates.window_end, rep.estimates.tail_fraction
    );
    let _ = writeln!(out, "lower box estimate: {}", rep.estimates.lower);
    let _ = writeln!(out, "upper box estimate: {}", rep.estimates.upper);
    if let Some(lim) = &rep.exact_limits {
        let _ = writeln!(out, "exact lower limit:  {}", lim.lower);
        let _ = writeln!(out, "exact upper limit:  {}", lim.upper);
        if let (Some(l), Some(u)) = (&lim.lower_exact, &lim.upper_exact) {
            let _ = writeln!(out, "exact rationals:    {} , {}", l, u);
        }
        let _ = writeln!(out, "derivation: {}", lim.derivation);
    }
    let cert = match rep.certification {
        Certification::UniformEquality => {
            "uniform-equality (level-wise uniform: Hausdorff = lower box, packing = upper box)"
        }
        Certification::InequalityOnly => {
            "inequality-only (non-uniform: only upper bounds certified)"
        }
    };
    let _ = writeln!(out, "certification: {cert}");
    let _ = writeln!(out, "hausdorff: {}", fmt_bound(&rep.hausdorff));
    let _ = writeln!(out, "packing:   {}", fmt_bound(&rep.packing));
    out
}

/// CSV rendering: header plus one row per level.
pub fn render_report_csv(rep: &DimensionReport) -> String {
    let mut out = String::from("n,s_n,t_n,ratio\n");
    for row in &rep.rows {
        let _ = writeln!(out, "{},{},{},{}", row.n, row.s_n, row.t_n, row.ratio);
    }
    out
}

pub fn render_report_json(rep: &DimensionReport) -> String {
    serde_json::to_string_pretty(rep).expect("serializable")
}

/// Text rendering of a group dimension report: order columns followed by the
/// underlying dimension report.
pub fn render_group_report_text(rep: &GroupDimensionReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n |U_n| |L_n|");
    for (n, (u, l)) in rep
        .subgroup_orders
        .iter()
        .zip(&rep.level_orders)
        .enumerate()
    {
        let _ = writeln!(out, "{n} {u} {l}");
    }
    out.push_str(&render_report_text(&rep.report));
    out
}

pub fn render_group_report_json(rep: &GroupDimensionReport) -> String {
    serde_json::to_string_pretty(rep).expect("serializable")
}

/// Step-by-step text rendering of a normalization trace.
pub fn render_trace_text(trace: &NormalizationTrace) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "initial cost: {}", fmt_cost(&trace.initial_cost));
    for (i, step) in trace.steps.iter().enumerate() {
        let case = match step.case {
            NormalizationCase::Terminal => "terminal",
            NormalizationCase::Replaced => "replaced",
        };
        let _ = writeln!(
            out,
            "step {i}: k={} sigma={} v(sigma)={} case={} cost {} -> {}",
            step.k,
            step.sigma,
            fmt_cost(&step.v_sigma),
            case,
            fmt_cost(&step.cost_before),
            fmt_cost(&step.cost_after),
        );
    }
    let _ = writeln!(out, "final level: {}", trace.final_level);
    let _ = writeln!(
        out,
        "final bound s_k t_k^-r: {} (<= initial cost)",
        fmt_cost(&trace.final_bound)
    );
    out
}

pub fn render_trace_json(trace: &NormalizationTrace) -> String {
    serde_json::to_string_pretty(trace).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimension::{dimension_report, ReportOptions};

    #[test]
    fn tree_spec_round_trip() {
        let spec = TreeSpec::Profile {
            profile: BranchingProfile::Constant { branch: 2 },
            depth: 4,
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back = parse_tree_spec(&json).unwrap();
        let t = back.build(true).unwrap();
        assert_eq!(t.depth(), 4);
        // Canonical field names in kebab-case with a kind tag.
        assert!(json.contains("\"kind\":\"profile\""));
    }

    #[test]
    fn tree_spec_parses_literal_json() {
        let t = parse_tree_spec(
            r#"{"kind":"profile","profile":{"kind":"block-schedule","base":4,"values":[1,2]},"depth":16}"#,
        )
        .unwrap()
        .build(false)
        .unwrap();
        assert_eq!(
            t.level_count(16).unwrap(),
            &(num_bigint::BigUint::from(1u32) << 12)
        );
        let t = parse_tree_spec(r#"{"kind":"predicate","predicate_id":"countable","depth":4}"#)
            .unwrap()
            .build(false)
            .unwrap();
        assert_eq!(t.depth(), 4);
        assert!(parse_tree_spec(r#"{"kind":"predicate","predicate_id":"x","depth":4}"#)
            .unwrap()
            .build(false)
            .is_err());
    }

    #[test]
    fn nodes_spec_builds() {
        let t = parse_tree_spec(r#"{"kind":"nodes","nodes":[[],[0],[1],[0,0],[1,0],[1,1]],"depth":2}"#)
            .unwrap()
            .build(false)
            .unwrap();
        assert_eq!(
            t.level_count(2).unwrap(),
            &num_bigint::BigUint::from(3u32)
        );
    }

    #[test]
    fn system_spec_builds() {
        let sys = parse_system_spec(r#"{"kind":"abelian-product","moduli":[2,2,2]}"#)
            .unwrap()
            .build();
        assert_eq!(sys.depth(), 3);
        let sys = parse_system_spec(r#"{"kind":"cyclic-tower","base":2,"depth":5}"#)
            .unwrap()
            .build();
        assert_eq!(sys.depth(), 5);
    }

    #[test]
    fn cover_round_trip() {
        let f = parse_cover("[[0],[1,0],[1,1]]").unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(cover_to_json(&f), "[[0],[1,0],[1,1]]");
        assert!(parse_cover("[[0],[0,1]]").is_err());
    }

    #[test]
    fn csv_shape_and_determinism() {
        let t = TreeTruncation::from_profile(&BranchingProfile::Constant { branch: 2 }, 6, true)
            .unwrap();
        let rep = dimension_report(&t, &t, &ReportOptions::default()).unwrap();
        let a = render_report_csv(&rep);
        let b = render_report_csv(&rep);
        assert_eq!(a, b);
        let mut lines = a.lines();
        assert_eq!(lines.next().unwrap(), "n,s_n,t_n,ratio");
        assert_eq!(lines.next().unwrap(), "1,2,2,1");
        assert_eq!(a.lines().count(), 7);
    }

    #[test]
    fn json_round_trips_floats() {
        let t = TreeTruncation::from_profile(&BranchingProfile::Constant { branch: 3 }, 5, true)
            .unwrap();
        let s = TreeTruncation::from_profile(&BranchingProfile::Constant { branch: 2 }, 5, false)
            .unwrap();
        let rep = dimension_report(&s, &t, &ReportOptions::default()).unwrap();
        let json = render_report_json(&rep);
        let back: DimensionReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.estimates.lower.to_bits(), rep.estimates.lower.to_bits());
        assert_eq!(back.rows.last().unwrap().ratio.to_bits(), rep.rows.last().unwrap().ratio.to_bits());
    }
}
