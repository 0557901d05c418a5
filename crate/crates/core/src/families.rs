//! Canonical example trees and set specifications used across tests and the
//! CLI: the alternating-block uniform tree, the countable non-uniform tree,
//! constant-ratio fixture pairs, and density set specs for subgroup
//! constructions.

use crate::dimension::ExactLimits;
use crate::prec;
use crate::tree::{block_index, BranchingProfile, Symbol, TreeError, TreeTruncation};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("depth {0} too small for this family (need >= {1})")]
    DepthTooSmall(usize, usize),
    #[error("branching {0} exceeds ambient branching {1}")]
    BranchTooLarge(u64, u64),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// The alternating-block subtree of the full binary tree: levels in
/// even-index blocks `[4^k, 4^{k+1})` branch once, odd-index blocks branch
/// twice; level 0 is assigned to block 0.
pub fn alternating_blocks_profile() -> BranchingProfile {
    BranchingProfile::BlockSchedule {
        base: 4,
        scale: 1,
        values: vec![1, 2],
    }
}

pub fn example_alternating_blocks(depth: usize) -> Result<TreeTruncation, FamilyError> {
    if depth < 4 {
        return Err(FamilyError::DepthTooSmall(depth, 4));
    }
    Ok(TreeTruncation::from_profile(
        &alternating_blocks_profile(),
        depth,
        false,
    )?)
}

/// Membership predicate for the countable tree: with
/// `k = min{i : i = |σ| ∨ σ_i = 1}`, every position `r` with
/// `2k <= r < |σ|` must hold a zero.
pub fn countable_member(symbols: &[Symbol]) -> bool {
    let k = symbols
        .iter()
        .position(|&s| s == 1)
        .unwrap_or(symbols.len());
    symbols.iter().skip(2 * k).all(|&s| s == 0)
}

/// The countable subtree of the full binary tree whose path space has box
/// dimension 1/2 but Hausdorff and packing dimension 0. Built by predicate
/// enumeration; `|S_n|` stays within a constant factor of `2^{n/2}`.
pub fn example_countable_tree(depth: usize) -> Result<TreeTruncation, FamilyError> {
    if depth < 2 {
        return Err(FamilyError::DepthTooSmall(depth, 2));
    }
    Ok(TreeTruncation::from_predicate(
        &BranchingProfile::Constant { branch: 2 },
        depth,
        &|symbols| countable_member(symbols),
        crate::tree::DEFAULT_NODE_BUDGET,
    )?)
}

/// Uniform trees with constant branching `b_s <= b_t`, `S` embedded in `T`
/// by symbol inclusion.
pub fn constant_ratio_pair(
    b_s: u64,
    b_t: u64,
    depth: usize,
) -> Result<(TreeTruncation, TreeTruncation), FamilyError> {
    if b_s > b_t {
        return Err(FamilyError::BranchTooLarge(b_s, b_t));
    }
    let s = TreeTruncation::from_profile(&BranchingProfile::Constant { branch: b_s }, depth, false)?;
    let t = TreeTruncation::from_profile(&BranchingProfile::Constant { branch: b_t }, depth, true)?;
    Ok((s, t))
}

/// A subset of ℕ with decidable membership and computable lower/upper
/// density, used to carve coordinate subgroups out of the C2 tower.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetSpec {
    EventuallyPeriodic {
        #[serde(default)]
        preperiod: Vec<bool>,
        period: Vec<bool>,
    },
    /// Membership on block `k` (spanning `[scale*base^k, scale*base^{k+1})`)
    /// is `pattern[k mod pattern.len()]`; indices below `scale` follow
    /// block 0.
    GeometricBlock {
        base: u64,
        #[serde(default = "default_scale")]
        scale: u64,
        pattern: Vec<bool>,
    },
}

fn default_scale() -> u64 {
    1
}

/// Exact lower/upper densities with the derivation used to obtain them.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Densities {
    pub lower: BigRational,
    pub upper: BigRational,
    pub derivation: String,
}

impl SetSpec {
    pub fn contains(&self, n: u64) -> bool {
        match self {
            SetSpec::EventuallyPeriodic { preperiod, period } => {
                if (n as usize) < preperiod.len() {
                    preperiod[n as usize]
                } else {
                    period[(n as usize - preperiod.len()) % period.len()]
                }
            }
            SetSpec::GeometricBlock { base, scale, pattern } => {
                let k = block_index(n, *base, *scale);
                pattern[(k as usize) % pattern.len()]
            }
        }
    }

    /// `|R ∩ [0, n)|`.
    pub fn count_below(&self, n: u64) -> u64 {
        (0..n).filter(|&i| self.contains(i)).count() as u64
    }

    /// Exact lower and upper natural densities.
    pub fn densities(&self) -> Densities {
        match self {
            SetSpec::EventuallyPeriodic { period, .. } => {
                let ones = period.iter().filter(|&&b| b).count();
                let d = BigRational::new(BigInt::from(ones), BigInt::from(period.len()));
                Densities {
                    lower: d.clone(),
                    upper: d,
                    derivation: format!(
                        "eventually periodic: density = ones/period = {ones}/{}",
                        period.len()
                    ),
                }
            }
            SetSpec::GeometricBlock { base, scale, pattern } => {
                // Same block-boundary analysis as for branching schedules,
                // with indicator slopes u_i ∈ {0, 1}: the density swings
                // between the limits taken at ends of blocks of each residue
                // class mod the pattern length.
                let len = pattern.len();
                let gq = BigRational::from_integer(BigInt::from(*base));
                let front = (BigRational::one() - gq.clone().recip())
                    / (BigRational::one() - gq.pow(len as i32).recip());
                let mut bounds = Vec::with_capacity(len);
                for j in 0..len {
                    let mut sum = BigRational::zero();
                    let mut w = BigRational::one();
                    for i in 0..len {
                        let idx = (j + len - (i % len)) % len;
                        if pattern[idx] {
                            sum += &w;
                        }
                        w /= &gq;
                    }
                    bounds.push(front.clone() * sum);
                }
                let lower = bounds.iter().min().cloned().expect("nonempty pattern");
                let upper = bounds.iter().max().cloned().expect("nonempty pattern");
                Densities {
                    derivation: format!(
                        "geometric blocks (base {base}, scale {scale}, pattern {pattern:?}): \
                         boundary densities {:?}; lower = {lower}, upper = {upper}",
                        bounds
                            .iter()
                            .map(prec::rational_to_f64)
                            .collect::<Vec<_>>()
                    ),
                    lower,
                    upper,
                }
            }
        }
    }
}

/// The set of levels on which the alternating-block tree branches twice:
/// odd-index blocks of the base-4 schedule.
pub fn alternating_blocks_set() -> SetSpec {
    SetSpec::GeometricBlock {
        base: 4,
        scale: 1,
        pattern: vec![false, true],
    }
}

/// Exact limits the alternating-block tree should reach inside the full
/// binary tree, derived from its density set.
pub fn alternating_blocks_limits() -> ExactLimits {
    let d = alternating_blocks_set().densities();
    ExactLimits {
        lower: prec::rational_to_f64(&d.lower),
        upper: prec::rational_to_f64(&d.upper),
        lower_exact: Some(d.lower),
        upper_exact: Some(d.upper),
        derivation: d.derivation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    #[test]
    fn alternating_blocks_level_counts() {
        let t = example_alternating_blocks(64).unwrap();
        // Levels [1,4) lie in block 0 (single branching), as does level 0 by
        // convention, so s_4 = 1; block 1 = [4,16) doubles 12 times.
        assert_eq!(t.level_count(4).unwrap(), &BigUint::from(1u32));
        assert_eq!(t.level_count(16).unwrap(), &(BigUint::from(1u32) << 12));
        assert_eq!(t.level_count(64).unwrap(), &(BigUint::from(1u32) << 12));
        assert!(t.is_levelwise_uniform().is_uniform());
        let binary = TreeTruncation::from_profile(
            &BranchingProfile::Constant { branch: 2 },
            64,
            true,
        )
        .unwrap();
        assert!(t.is_subtree_of(&binary));
    }

    #[test]
    fn countable_tree_counts_and_envelope() {
        let t = example_countable_tree(12).unwrap();
        let counts = t.level_counts(12).unwrap();
        // Hand enumeration: s = [1,1,2,3,5,7,11,15,23,31,47,63,95].
        let expected: Vec<u32> = vec![1, 1, 2, 3, 5, 7, 11, 15, 23, 31, 47, 63, 95];
        for (n, e) in expected.iter().enumerate() {
            assert_eq!(counts[n], BigUint::from(*e), "level {n}");
        }
        // Growth envelope at n >= 2: 2^{n/2} <= s_n <= 2^{n/2 + 2}.
        for n in 2..=12usize {
            let lower = BigUint::from(1u32) << (n / 2);
            let upper = BigUint::from(1u32) << (n / 2 + n % 2 + 1);
            assert!(counts[n] >= lower, "level {n}");
            assert!(counts[n] <= upper, "level {n}");
        }
        assert!(!t.is_levelwise_uniform().is_uniform());
    }

    #[test]
    fn countable_tree_spine_always_member() {
        for n in 1..=16 {
            assert!(countable_member(&vec![0; n]));
        }
        // First disagreement in successor counts shows up at level 2:
        // 00 has children 000 and 001; 01 only 010.
        let t = example_countable_tree(4).unwrap();
        match t.is_levelwise_uniform() {
            crate::tree::Uniformity::NonUniform { level, .. } => assert_eq!(*level, 2),
            other => panic!("expected non-uniform: {other:?}"),
        }
    }

    #[test]
    fn constant_pair_embeds() {
        let (s, t) = constant_ratio_pair(2, 4, 5).unwrap();
        assert!(s.is_subtree_of(&t));
        assert!(constant_ratio_pair(3, 2, 4).is_err());
        let (s, t) = constant_ratio_pair(1, 2, 4).unwrap();
        assert!(s.is_subtree_of(&t));
        assert_eq!(s.level_count(4).unwrap(), &BigUint::from(1u32));
    }

    #[test]
    fn periodic_density() {
        let r = SetSpec::EventuallyPeriodic {
            preperiod: vec![],
            period: vec![true, false, false],
        };
        let d = r.densities();
        assert_eq!(d.lower, BigRational::new(BigInt::from(1), BigInt::from(3)));
        assert_eq!(d.upper, d.lower);
        assert_eq!(r.count_below(9), 3);
    }

    #[test]
    fn full_set_density_one() {
        let r = SetSpec::EventuallyPeriodic {
            preperiod: vec![],
            period: vec![true],
        };
        let d = r.densities();
        assert_eq!(d.lower, BigRational::one());
        assert_eq!(d.upper, BigRational::one());
    }

    #[test]
    fn alternating_set_densities() {
        let d = alternating_blocks_set().densities();
        assert_eq!(d.lower, BigRational::new(BigInt::from(1), BigInt::from(5)));
        assert_eq!(d.upper, BigRational::new(BigInt::from(4), BigInt::from(5)));
        // Counts match the branching schedule of the alternating-block tree.
        let spec = alternating_blocks_set();
        assert_eq!(spec.count_below(16), 12);
        assert_eq!(spec.count_below(64), 12);
        assert_eq!(spec.count_below(256), 204);
    }
}
