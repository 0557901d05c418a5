//! Box-dimension ratio sequences, tail-window estimates, symbolic exact
//! limits for recognized profiles, and certified dimension reports.
//!
//! On a truncation the box dimensions are represented by the ratio sequence
//! `log s_n / log t_n`; liminf/limsup are reported as inf/sup over a tail
//! window, with exact limits attached when both trees come from symbolic
//! profiles. For level-wise uniformly branching `S` the Hausdorff and
//! packing dimensions are certified equal to the lower and upper box
//! dimensions; otherwise only the upper bounds are emitted.

use crate::prec;
use crate::tree::{BranchingProfile, Node, TreeError, TreeTruncation};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DimensionError {
    #[error("S is not a subtree of T")]
    NotSubtree,
    #[error("depth {0} too small (need >= {1})")]
    DepthTooSmall(usize, usize),
    #[error("tail fraction {0} must lie in (0,1)")]
    BadTailFraction(f64),
    #[error("S is not level-wise uniformly branching")]
    NonUniform,
    #[error("ambient tree T has a single node at level {0}; ratios log s_n / log t_n need t_n >= 2")]
    AmbientLevelTrivial(usize),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// `log s_n / log t_n` for `1 <= n <= depth` (the n = 0 ratio is undefined
/// since `t_0 = 1`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioSequence {
    /// values[i] is the ratio at n = i + 1.
    pub values: Vec<f64>,
    pub depth: usize,
}

impl RatioSequence {
    pub fn at(&self, n: usize) -> f64 {
        self.values[n - 1]
    }
}

/// Computes the ratio sequence of `S` inside `T` with the given log
/// precision (fractional bits).
pub fn ratio_sequence(
    s: &TreeTruncation,
    t: &TreeTruncation,
    precision_bits: u32,
) -> Result<RatioSequence, DimensionError> {
    if !s.is_subtree_of(t) {
        return Err(DimensionError::NotSubtree);
    }
    let depth = s.depth().min(t.depth());
    if depth < 1 {
        return Err(DimensionError::DepthTooSmall(depth, 1));
    }
    let mut values = Vec::with_capacity(depth);
    for n in 1..=depth {
        if t.level_count(n)?.is_one() {
            return Err(DimensionError::AmbientLevelTrivial(n));
        }
        let ls = prec::log2_big(s.level_count(n)?, precision_bits);
        let lt = prec::log2_big(t.level_count(n)?, precision_bits);
        values.push(prec::rational_to_f64(&(ls / lt)));
    }
    Ok(RatioSequence { values, depth })
}

/// Inf and sup of the ratio sequence over the tail window
/// `[ceil((1 - tail_fraction) * depth), depth]`. These are finite-depth
/// estimates of liminf/limsup, not the limits themselves.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BoxEstimates {
    pub lower: f64,
    pub upper: f64,
    pub window_start: usize,
    pub window_end: usize,
    pub tail_fraction: f64,
}

pub fn box_estimates(
    seq: &RatioSequence,
    tail_fraction: f64,
) -> Result<BoxEstimates, DimensionError> {
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(DimensionError::BadTailFraction(tail_fraction));
    }
    if seq.depth < 2 {
        return Err(DimensionError::DepthTooSmall(seq.depth, 2));
    }
    let start = (((1.0 - tail_fraction) * seq.depth as f64).ceil() as usize).max(1);
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for n in start..=seq.depth {
        let v = seq.at(n);
        lower = lower.min(v);
        upper = upper.max(v);
    }
    Ok(BoxEstimates {
        lower,
        upper,
        window_start: start,
        window_end: seq.depth,
        tail_fraction,
    })
}

/// Exact liminf/limsup of the ratio, derived symbolically from profiles.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExactLimits {
    pub lower: f64,
    pub upper: f64,
    /// Exact rationals when the branching values are commensurable powers
    /// of a common base.
    pub lower_exact: Option<BigRational>,
    pub upper_exact: Option<BigRational>,
    /// Human-readable derivation for audit.
    pub derivation: String,
}

/// Smallest integer base `β >= 2` such that every value is a power of `β`,
/// together with the exponents. Values equal to 1 get exponent 0.
fn common_power_base(values: &[u64]) -> Option<(u64, Vec<u64>)> {
    let mut base: Option<u64> = None;
    for &v in values {
        if v <= 1 {
            continue;
        }
        // Smallest b with v = b^k: factor v's minimal "root".
        let mut b = v;
        for k in (2..=63u32).rev() {
            let root = (v as f64).powf(1.0 / k as f64).round() as u64;
            for cand in [root.saturating_sub(1), root, root + 1] {
                if cand >= 2 && cand.checked_pow(k) == Some(v) {
                    b = cand;
                    break;
                }
            }
            if b != v {
                break;
            }
        }
        base = Some(match base {
            None => b,
            Some(prev) if prev == b => b,
            Some(prev) => {
                // Both must be powers of a common base; since both are
                // minimal roots, they must be equal.
                if prev != b {
                    return None;
                }
                b
            }
        });
    }
    let base = base?;
    let mut exps = Vec::with_capacity(values.len());
    for &v in values {
        if v == 1 {
            exps.push(0);
            continue;
        }
        let mut e = 0u64;
        let mut acc = 1u64;
        while acc < v {
            acc = acc.checked_mul(base)?;
            e += 1;
        }
        if acc != v {
            return None;
        }
        exps.push(e);
    }
    Some((base, exps))
}

fn mean_log2(values: &[u64]) -> f64 {
    values.iter().map(|&v| (v as f64).log2()).sum::<f64>() / values.len() as f64
}

/// Asymptotic per-level log2 rate of a profile, if it has one (constant or
/// eventually periodic).
fn linear_rate(profile: &BranchingProfile) -> Option<(f64, Vec<u64>)> {
    match profile {
        BranchingProfile::Constant { branch } => Some(((*branch as f64).log2(), vec![*branch])),
        BranchingProfile::EventuallyPeriodic { period, .. } => {
            Some((mean_log2(period), period.clone()))
        }
        _ => None,
    }
}

/// Symbolic liminf/limsup of `log s_n / log t_n` for recognized profile
/// pairs: both eventually periodic (single limit), or `S` a geometric block
/// schedule over a `T` with a linear log rate.
pub fn exact_box_limits(
    profile_s: &BranchingProfile,
    profile_t: &BranchingProfile,
) -> Option<ExactLimits> {
    let (t_rate, t_values) = linear_rate(profile_t)?;
    if t_rate <= 0.0 {
        return None;
    }
    match profile_s {
        BranchingProfile::Constant { .. } | BranchingProfile::EventuallyPeriodic { .. } => {
            let (s_rate, s_values) = linear_rate(profile_s)?;
            let limit = s_rate / t_rate;
            // Exact when all values are powers of a common base.
            let mut all: Vec<u64> = s_values.clone();
            all.extend_from_slice(&t_values);
            let exact = common_power_base(&all).map(|(_, _)| {
                let (_, s_exps) = common_power_base_with(&s_values, &all);
                let (_, t_exps) = common_power_base_with(&t_values, &all);
                let num: BigInt = s_exps.iter().map(|&e| BigInt::from(e)).sum::<BigInt>()
                    * BigInt::from(t_values.len() as u64);
                let den: BigInt = t_exps.iter().map(|&e| BigInt::from(e)).sum::<BigInt>()
                    * BigInt::from(s_values.len() as u64);
                BigRational::new(num, den)
            });
            let limit = exact
                .as_ref()
                .map(prec::rational_to_f64)
                .unwrap_or(limit);
            Some(ExactLimits {
                lower: limit,
                upper: limit,
                lower_exact: exact.clone(),
                upper_exact: exact,
                derivation: format!(
                    "periodic profiles: limit = mean(log b_S) / mean(log b_T) = {limit}"
                ),
            })
        }
        BranchingProfile::BlockSchedule { base, scale, values } => {
            let g = *base as f64;
            let len = values.len();
            // u_i: per-level slope of log2 s within a block of value v_i,
            // normalized by the ambient rate.
            let u: Vec<f64> = values
                .iter()
                .map(|&v| (v as f64).log2() / t_rate)
                .collect();
            // Limit of the ratio at the end of blocks with index ≡ j (mod len):
            // r_j = (1 - 1/g) * Σ_{i<len} u_{(j-i) mod len} g^{-i} / (1 - g^{-len}).
            let mut boundary = Vec::with_capacity(len);
            for j in 0..len {
                let mut sum = 0.0;
                let mut w = 1.0;
                for i in 0..len {
                    let idx = (j + len - (i % len)) % len;
                    sum += u[idx] * w;
                    w /= g;
                }
                let r_j = (1.0 - 1.0 / g) * sum / (1.0 - g.powi(-(len as i32)));
                boundary.push(r_j);
            }
            let lower = boundary.iter().cloned().fold(f64::INFINITY, f64::min);
            let upper = boundary.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            // Exact rational path when every branching value is a power of a
            // common base shared with T's values.
            let mut all: Vec<u64> = values.clone();
            all.extend_from_slice(&t_values);
            let mut lower_exact = None;
            let mut upper_exact = None;
            if let Some((_, exps)) = common_power_base(&all) {
                let s_exps = &exps[..len];
                let t_exps = &exps[len..];
                let t_mean = BigRational::new(
                    s_exps_sum(t_exps),
                    BigInt::from(t_values.len() as u64),
                );
                if !t_mean.is_zero() {
                    let gq = BigRational::from_integer(BigInt::from(*base));
                    let glen = gq.pow(len as i32);
                    let front = (BigRational::one() - gq.clone().recip())
                        / (BigRational::one() - glen.recip());
                    let mut bounds: Vec<BigRational> = Vec::with_capacity(len);
                    for j in 0..len {
                        let mut sum = BigRational::zero();
                        let mut w = BigRational::one();
                        for i in 0..len {
                            let idx = (j + len - (i % len)) % len;
                            let u_exact =
                                BigRational::from_integer(BigInt::from(s_exps[idx])) / &t_mean;
                            sum += u_exact * &w;
                            w /= &gq;
                        }
                        bounds.push(front.clone() * sum);
                    }
                    lower_exact = bounds.iter().min().cloned();
                    upper_exact = bounds.iter().max().cloned();
                }
            }
            let lower = lower_exact
                .as_ref()
                .map(prec::rational_to_f64)
                .unwrap_or(lower);
            let upper = upper_exact
                .as_ref()
                .map(prec::rational_to_f64)
                .unwrap_or(upper);
            Some(ExactLimits {
                lower,
                upper,
                lower_exact,
                upper_exact,
                derivation: format!(
                    "geometric block schedule (base {base}, scale {scale}, values {values:?}): \
                     block-boundary limits r_j = (1-1/g)·Σ_i u_(j-i) g^-i / (1-g^-L) with \
                     u_i = log b_i / rate(T); liminf = min_j r_j = {lower}, \
                     limsup = max_j r_j = {upper}"
                ),
            })
        }
        BranchingProfile::Explicit { .. } => None,
    }
}

fn s_exps_sum(exps: &[u64]) -> BigInt {
    exps.iter().map(|&e| BigInt::from(e)).sum()
}

/// Exponents of `values` relative to the common base of `all`.
fn common_power_base_with(values: &[u64], all: &[u64]) -> (u64, Vec<u64>) {
    let (base, _) = common_power_base(all).expect("caller checked");
    let mut exps = Vec::with_capacity(values.len());
    for &v in values {
        let mut e = 0u64;
        let mut acc = 1u64;
        while acc < v {
            acc *= base;
            e += 1;
        }
        exps.push(e);
    }
    (base, exps)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certification {
    /// `S` is level-wise uniformly branching: Hausdorff = lower box and
    /// packing = upper box.
    UniformEquality,
    /// Only the general upper bounds hold: Hausdorff <= lower box,
    /// packing <= upper box.
    InequalityOnly,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DimensionBound {
    EqualTo { value: f64 },
    AtMost { value: f64 },
}

impl DimensionBound {
    pub fn value(&self) -> f64 {
        match self {
            DimensionBound::EqualTo { value } | DimensionBound::AtMost { value } => *value,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DimensionReport {
    pub depth: usize,
    pub estimates: BoxEstimates,
    pub exact_limits: Option<ExactLimits>,
    pub certification: Certification,
    pub hausdorff: DimensionBound,
    pub packing: DimensionBound,
    /// (n, s_n, t_n, ratio) rows for CSV / plotting handoff.
    pub rows: Vec<ReportRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: usize,
    pub s_n: String,
    pub t_n: String,
    pub ratio: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct ReportOptions {
    pub tail_fraction: f64,
    pub precision_bits: u32,
    /// Cap on the number of per-level rows included in the report
    /// (the deepest levels are kept).
    pub max_rows: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            tail_fraction: 0.5,
            precision_bits: prec::DEFAULT_PRECISION_BITS,
            max_rows: 4096,
        }
    }
}

/// Assembles the full dimension report for `S` inside `T`.
pub fn dimension_report(
    s: &TreeTruncation,
    t: &TreeTruncation,
    options: &ReportOptions,
) -> Result<DimensionReport, DimensionError> {
    let seq = ratio_sequence(s, t, options.precision_bits)?;
    let estimates = box_estimates(&seq, options.tail_fraction)?;
    let exact_limits = match (s.profile(), t.profile()) {
        (Some(ps), Some(pt)) => exact_box_limits(ps, pt),
        _ => None,
    };
    let uniform = s.is_levelwise_uniform().is_uniform();
    let certification = if uniform {
        Certification::UniformEquality
    } else {
        Certification::InequalityOnly
    };
    let (hausdorff, packing) = if uniform {
        (
            DimensionBound::EqualTo {
                value: estimates.lower,
            },
            DimensionBound::EqualTo {
                value: estimates.upper,
            },
        )
    } else {
        (
            DimensionBound::AtMost {
                value: estimates.lower,
            },
            DimensionBound::AtMost {
                value: estimates.upper,
            },
        )
    };
    let first_row = if seq.depth > options.max_rows {
        seq.depth - options.max_rows + 1
    } else {
        1
    };
    let mut rows = Vec::new();
    for n in first_row..=seq.depth {
        rows.push(ReportRow {
            n,
            s_n: s.level_count(n)?.to_string(),
            t_n: t.level_count(n)?.to_string(),
            ratio: seq.at(n),
        });
    }
    Ok(DimensionReport {
        depth: seq.depth,
        estimates,
        exact_limits,
        certification,
        hausdorff,
        packing,
        rows,
    })
}

/// Finite-depth shadow of the local upper-box invariance used in the packing
/// argument: below any node σ of a uniform `S`, the level-n count is
/// `s_n / s_r`, so the locally computed tail sup must agree with the one
/// predicted from the global counts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalBoxCheck {
    pub sigma: Node,
    /// Ratio log(local level count)/log t_n for n > |σ|, computed from the
    /// subtree below σ.
    pub local_values: Vec<f64>,
    /// Same quantity predicted from the global counts as log(s_n/s_r)/log t_n.
    pub predicted_values: Vec<f64>,
    pub local_tail_sup: f64,
    pub predicted_tail_sup: f64,
    pub agreement: bool,
}

pub const LOCAL_BOX_TOLERANCE: f64 = 1e-6;

pub fn local_upper_box_check(
    s: &TreeTruncation,
    t: &TreeTruncation,
    sigma: &Node,
    options: &ReportOptions,
) -> Result<LocalBoxCheck, DimensionError> {
    if !s.is_levelwise_uniform().is_uniform() {
        return Err(DimensionError::NonUniform);
    }
    if !s.is_member(sigma) {
        return Err(TreeError::NotAMember(sigma.clone()).into());
    }
    let r = sigma.level();
    let depth = s.depth().min(t.depth());
    if r >= depth {
        return Err(DimensionError::DepthTooSmall(depth, r + 1));
    }
    let s_r = s.level_count(r)?.clone();
    let mut local_values = Vec::new();
    let mut predicted_values = Vec::new();
    for n in (r + 1)..=depth {
        let lt = prec::log2_big(t.level_count(n)?, options.precision_bits);
        // Local: count descendants of σ at level n directly.
        let local_count = s.descendant_count(sigma, n)?;
        let ll = prec::log2_big(&local_count, options.precision_bits);
        local_values.push(prec::rational_to_f64(&(ll / lt.clone())));
        // Predicted from global counts: s_n / s_r.
        let quotient: BigUint = s.level_count(n)? / &s_r;
        let lp = prec::log2_big(&quotient.max(BigUint::one()), options.precision_bits);
        predicted_values.push(prec::rational_to_f64(&(lp / lt)));
    }
    let window = (((1.0 - options.tail_fraction) * local_values.len() as f64).ceil() as usize)
        .min(local_values.len().saturating_sub(1));
    let sup = |v: &[f64]| {
        v[window..]
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let local_tail_sup = sup(&local_values);
    let predicted_tail_sup = sup(&predicted_values);
    let agreement = (local_tail_sup - predicted_tail_sup).abs() <= LOCAL_BOX_TOLERANCE;
    Ok(LocalBoxCheck {
        sigma: sigma.clone(),
        local_values,
        predicted_values,
        local_tail_sup,
        predicted_tail_sup,
        agreement,
    })
}
