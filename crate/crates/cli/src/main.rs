//! `pathdim`: compute and certify fractal dimensions of closed subsets of
//! finitely branching tree path spaces.
//!
//! Exit codes: 0 success, 1 verification failure, 2 validation error,
//! 3 precondition failure (non-uniform tree where uniformity is required),
//! 4 enumeration budget exceeded.

use clap::{Args, Parser, Subcommand, ValueEnum};
use pathdim::cover::{self, CoverError};
use pathdim::dimension::ReportOptions;
use pathdim::profinite::{self, GroupError};
use pathdim::spec_io::{self, GeneratorSpec, SpecError, SystemSpec, TreeSpec};
use pathdim::tree::{TreeError, TreeTruncation};
use pathdim::Exponent;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pathdim", version, about = "Fractal dimensions of tree path spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct TreeArgs {
    /// Tree spec file for the subtree S.
    #[arg(long)]
    s: Option<String>,
    /// Tree spec file for the ambient tree T (defaults to S's spec built as
    /// ambient when omitted).
    #[arg(long)]
    t: Option<String>,
    /// Named family (alternating-blocks, countable, full-binary); its ambient
    /// tree is the full binary tree.
    #[arg(long, conflicts_with = "s")]
    family: Option<String>,
    /// Depth override (required with --family).
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    /// Tail fraction of levels used for the liminf/limsup window.
    #[arg(long, default_value_t = 0.5)]
    tail_fraction: f64,
    /// Fractional bits for big-integer logarithms (minimum 64).
    #[arg(long, default_value_t = 128)]
    precision: u32,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Cap on per-level rows in reports.
    #[arg(long, default_value_t = 4096)]
    max_rows: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Dimension report for S inside T.
    Dims {
        #[command(flatten)]
        tree: TreeArgs,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Run cover normalization on a cover file and print the trace.
    Normalize {
        #[command(flatten)]
        tree: TreeArgs,
        /// Cover file: JSON list of symbol sequences.
        #[arg(long)]
        cover: String,
        /// Cost exponent r >= 0.
        #[arg(long)]
        r: f64,
        /// Minimum node length n for the normalization.
        #[arg(long, default_value_t = 0)]
        min_length: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compare the brute-force minimal cover against the best level cover
    /// over an r-grid.
    OracleVerify {
        #[command(flatten)]
        tree: TreeArgs,
        /// Exponents to verify (defaults to 0, 0.25, 0.5, 0.75, 1, 1.5, 2).
        #[arg(long, value_delimiter = ',')]
        r: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        min_length: usize,
        /// Maximum cover-node depth (defaults to the tree depth).
        #[arg(long)]
        max_depth: Option<usize>,
        /// Budget on explored configurations.
        #[arg(long, default_value_t = 1 << 20)]
        budget: u64,
    },
    /// Dimension report for a closed subgroup of an inverse-limit group.
    GroupDims {
        /// System spec file.
        #[arg(long)]
        system: String,
        /// Generator spec file (element list or density set).
        #[arg(long)]
        generators: String,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Emit the tree spec file of a named family.
    GenFamily {
        #[arg(long)]
        name: String,
        #[arg(long)]
        depth: usize,
    },
}

enum CliError {
    Validation(String),
    Precondition(String),
    Budget(String),
    Verification(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Budget(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m)
            | CliError::Precondition(m)
            | CliError::Budget(m)
            | CliError::Verification(m) => m,
        }
    }
}

fn classify_tree(e: TreeError) -> CliError {
    match e {
        TreeError::NodeBudgetExceeded(_) | TreeError::EnumerationTooLarge { .. } => {
            CliError::Budget(e.to_string())
        }
        other => CliError::Validation(other.to_string()),
    }
}

impl From<TreeError> for CliError {
    fn from(e: TreeError) -> Self {
        classify_tree(e)
    }
}

impl From<CoverError> for CliError {
    fn from(e: CoverError) -> Self {
        match e {
            CoverError::NonUniform { .. } => CliError::Precondition(format!(
                "{e}; cover normalization requires a level-wise uniformly branching tree"
            )),
            CoverError::BudgetExceeded(_) => CliError::Budget(e.to_string()),
            CoverError::Tree(t) => classify_tree(t),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        match e {
            SpecError::Tree(t) => classify_tree(t),
            SpecError::Cover(c) => c.into(),
            SpecError::Group(g) => g.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> Self {
        match e {
            GroupError::Tree(t) => classify_tree(t),
            GroupError::OrderTooLarge(..) => CliError::Budget(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<pathdim::DimensionError> for CliError {
    fn from(e: pathdim::DimensionError) -> Self {
        match e {
            pathdim::DimensionError::NonUniform => CliError::Precondition(e.to_string()),
            pathdim::DimensionError::Tree(t) => classify_tree(t),
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn read_file(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {path}: {e}")))
}

fn spec_with_depth(spec: TreeSpec, depth: Option<usize>) -> TreeSpec {
    let Some(d) = depth else { return spec };
    match spec {
        TreeSpec::Profile { profile, .. } => TreeSpec::Profile { profile, depth: d },
        TreeSpec::Nodes { nodes, .. } => TreeSpec::Nodes { nodes, depth: d },
        TreeSpec::Predicate { predicate_id, .. } => TreeSpec::Predicate {
            predicate_id,
            depth: d,
        },
        TreeSpec::Family { name, .. } => TreeSpec::Family { name, depth: d },
    }
}

/// Builds (S, T) from the tree arguments.
fn build_pair(args: &TreeArgs) -> Result<(TreeTruncation, TreeTruncation), CliError> {
    if let Some(family) = &args.family {
        let depth = args.depth.ok_or_else(|| {
            CliError::Validation("--family requires --depth".to_string())
        })?;
        let s = spec_io::build_family(family, depth)?;
        let t = spec_io::family_ambient(family, depth)?;
        return Ok((s, t));
    }
    let s_path = args
        .s
        .as_ref()
        .ok_or_else(|| CliError::Validation("one of --s or --family is required".to_string()))?;
    let s_spec = spec_with_depth(spec_io::parse_tree_spec(&read_file(s_path)?)?, args.depth);
    match &args.t {
        Some(t_path) => {
            let t_spec =
                spec_with_depth(spec_io::parse_tree_spec(&read_file(t_path)?)?, args.depth);
            Ok((s_spec.build(false)?, t_spec.build(true)?))
        }
        None => Ok((s_spec.build(true)?.clone(), s_spec.build(true)?)),
    }
}

fn report_options(args: &ReportArgs) -> Result<ReportOptions, CliError> {
    if args.precision < 64 {
        return Err(CliError::Validation(format!(
            "precision {} below the minimum 64",
            args.precision
        )));
    }
    Ok(ReportOptions {
        tail_fraction: args.tail_fraction,
        precision_bits: args.precision,
        max_rows: args.max_rows,
    })
}

fn exponent(r: f64) -> Result<Exponent, CliError> {
    Ok(Exponent::new(r)?)
}

const DEFAULT_R_GRID: [f64; 7] = [0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0];

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Dims { tree, report } => {
            let (s, t) = build_pair(&tree)?;
            let opts = report_options(&report)?;
            let rep = pathdim::dimension_report(&s, &t, &opts)?;
            let out = match report.format {
                Format::Text => spec_io::render_report_text(&rep),
                Format::Json => spec_io::render_report_json(&rep),
                Format::Csv => spec_io::render_report_csv(&rep),
            };
            print!("{out}");
            Ok(())
        }
        Command::Normalize {
            tree,
            cover,
            r,
            min_length,
            format,
        } => {
            let (s, t) = build_pair(&tree)?;
            let f = spec_io::parse_cover(&read_file(&cover)?)?;
            let trace = cover::normalize_cover(&f, &s, &t, exponent(r)?, min_length)?;
            let out = match format {
                Format::Text => spec_io::render_trace_text(&trace),
                Format::Json => spec_io::render_trace_json(&trace),
                Format::Csv => {
                    return Err(CliError::Validation(
                        "normalize has no CSV rendering; use text or json".to_string(),
                    ))
                }
            };
            print!("{out}");
            Ok(())
        }
        Command::OracleVerify {
            tree,
            r,
            min_length,
            max_depth,
            budget,
        } => {
            if budget < 1 {
                return Err(CliError::Validation("budget must be >= 1".to_string()));
            }
            let (s, t) = build_pair(&tree)?;
            let max_depth = max_depth.unwrap_or_else(|| s.depth());
            let grid: Vec<f64> = if r.is_empty() {
                DEFAULT_R_GRID.to_vec()
            } else {
                r
            };
            let uniform = s.is_levelwise_uniform().is_uniform();
            let mut all_equal = true;
            let mut any_strict = false;
            for &rv in &grid {
                let e = exponent(rv)?;
                let (_, brute) =
                    cover::brute_force_min_cover(&s, &t, e, min_length, max_depth, budget)?;
                let (k, level) = cover::min_level_cost(&s, &t, e, min_length)?;
                let equal = cover::costs_close(&brute, &level, 1e-9);
                let strict = brute.lt_by_margin(&level, 1e-9 * level.value().abs().max(1e-300));
                all_equal &= equal;
                any_strict |= strict;
                let verdict = if equal {
                    "equal"
                } else if strict {
                    "brute-force strictly cheaper"
                } else {
                    "mismatch"
                };
                println!(
                    "r={rv}: brute={} best-level(k={k})={} -> {verdict}",
                    brute.value(),
                    level.value()
                );
            }
            if uniform {
                if all_equal {
                    println!("verdict: pass (uniform tree, oracle matches best level everywhere)");
                    Ok(())
                } else {
                    Err(CliError::Verification(
                        "uniform tree but brute-force cost deviates from the best level cover"
                            .to_string(),
                    ))
                }
            } else if any_strict {
                println!(
                    "verdict: pass (non-uniform tree, strict improvement over every level found)"
                );
                Ok(())
            } else {
                Err(CliError::Verification(
                    "non-uniform tree but no strict improvement over level covers was found"
                        .to_string(),
                ))
            }
        }
        Command::GroupDims {
            system,
            generators,
            report,
        } => {
            let opts = report_options(&report)?;
            let sys_spec: SystemSpec = spec_io::parse_system_spec(&read_file(&system)?)?;
            let sys = sys_spec.build();
            sys.validate()?;
            let gen_spec = spec_io::parse_generator_spec(&read_file(&generators)?)?;
            let rep = match gen_spec {
                GeneratorSpec::DensitySet { set } => {
                    match &sys {
                        // C2 tower: closed-form coordinate-subgroup path that
                        // scales to arbitrary depth.
                        pathdim::InverseSystem::AbelianTower { moduli }
                            if moduli.iter().all(|&m| m == 2) =>
                        {
                            profinite::density_subgroup_report(&set, moduli.len(), &opts)?
                        }
                        _ => {
                            return Err(CliError::Validation(
                                "density-set generators require the all-2 abelian tower"
                                    .to_string(),
                            ))
                        }
                    }
                }
                GeneratorSpec::Elements { generators } => {
                    profinite::group_dimension_report(&sys, &generators, &opts)?
                }
            };
            let out = match report.format {
                Format::Text => spec_io::render_group_report_text(&rep),
                Format::Json => spec_io::render_group_report_json(&rep),
                Format::Csv => spec_io::render_report_csv(&rep.report),
            };
            print!("{out}");
            Ok(())
        }
        Command::GenFamily { name, depth } => {
            let spec = match name.as_str() {
                "alternating-blocks" => TreeSpec::Profile {
                    profile: pathdim::BranchingProfile::BlockSchedule {
                        base: 4,
                        scale: 1,
                        values: vec![1, 2],
                    },
                    depth,
                },
                "countable" => TreeSpec::Predicate {
                    predicate_id: "countable".to_string(),
                    depth,
                },
                "full-binary" => TreeSpec::Profile {
                    profile: pathdim::BranchingProfile::Constant { branch: 2 },
                    depth,
                },
                other => {
                    return Err(CliError::Validation(format!(
                        "unknown family {other:?} (known: alternating-blocks, countable, full-binary)"
                    )))
                }
            };
            // Confirm the emitted spec file actually builds.
            spec.build(false)?;
            println!(
                "{}",
                serde_json::to_string(&spec)
                    .map_err(|e| CliError::Validation(e.to_string()))?
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
