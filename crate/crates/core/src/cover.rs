//! Prefix-free covers of `[S]`, their r-costs, the cover-normalization
//! procedure, and a brute-force minimal-cost cover oracle.
//!
//! A cover is a finite prefix-free set of member nodes whose cylinders cover
//! every depth-`D` member of `S`. Costs are carried in the log domain (sums
//! of terms `t_{|ρ|}^{-r}` are computed with scaled compensated summation),
//! with an exact big-rational companion whenever `r` is an integer.

use crate::prec;
use crate::tree::{Node, Symbol, TreeError, TreeTruncation};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// Relative tolerance for cost comparisons on the floating path.
pub const COST_REL_TOL: f64 = 1e-9;

/// Default budget for the brute-force oracle, counted in explored
/// node-configurations of the cut lattice.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum CoverError {
    #[error("cover is not prefix-free: {0} is a prefix of {1}")]
    NotPrefixFree(Node, Node),
    #[error("cover node {0} is not a member of S")]
    NodeNotInTree(Node),
    #[error("cover does not cover the level-{0} members of S")]
    NotCovering(usize),
    #[error("cover node {node} has length {len}, below the required minimum {min}")]
    NodeTooShort { node: Node, len: usize, min: usize },
    #[error("negative exponent r = {0}")]
    NegativeExponent(f64),
    #[error("S is not level-wise uniformly branching (witness at level {level}: {a} has {ca} successors, {b} has {cb})")]
    NonUniform {
        level: usize,
        a: Node,
        b: Node,
        ca: u64,
        cb: u64,
    },
    #[error("enumeration budget {0} exceeded")]
    BudgetExceeded(u64),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Sum of terms `t_{|ρ|}^{-r}` in the log domain, with an exact rational
/// companion when `r` is a nonnegative integer.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CostValue {
    /// Natural log of the cost.
    pub ln: f64,
    /// Exact value, present when `r` is an integer.
    pub exact: Option<BigRational>,
}

impl CostValue {
    pub fn value(&self) -> f64 {
        match &self.exact {
            Some(e) => prec::rational_to_f64(e),
            None => self.ln.exp(),
        }
    }

    /// `self <= other` within the relative comparison tolerance
    /// (exact when both sides carry rationals).
    pub fn le_with_tol(&self, other: &CostValue) -> bool {
        if let (Some(a), Some(b)) = (&self.exact, &other.exact) {
            return a <= b;
        }
        self.ln <= other.ln + COST_REL_TOL
    }

    /// Strictly less than `other` by at least `margin` (linear domain,
    /// relative to `other`).
    pub fn lt_by_margin(&self, other: &CostValue, margin: f64) -> bool {
        self.value() < other.value() - margin
    }
}

/// Exponent `r >= 0`; integer exponents get an exact arithmetic path.
#[derive(Clone, Copy, Debug)]
pub struct Exponent {
    pub r: f64,
    as_integer: Option<u32>,
}

impl Exponent {
    pub fn new(r: f64) -> Result<Self, CoverError> {
        if !(r >= 0.0) {
            return Err(CoverError::NegativeExponent(r));
        }
        let as_integer = if r.fract() == 0.0 && r <= u32::MAX as f64 {
            Some(r as u32)
        } else {
            None
        };
        Ok(Exponent { r, as_integer })
    }

    pub fn is_integer(&self) -> bool {
        self.as_integer.is_some()
    }
}

/// A finite prefix-free set of nodes, interpreted as a cover of `[S]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cover {
    /// Sorted (level, then lexicographic) node list.
    nodes: Vec<Node>,
}

impl Cover {
    /// Builds a cover, verifying prefix-freeness.
    pub fn new(mut nodes: Vec<Node>) -> Result<Self, CoverError> {
        nodes.sort();
        nodes.dedup();
        // In sorted (lexicographic-by-symbols) order a prefix immediately
        // precedes its extensions, but symbols are compared numerically, so
        // check each adjacent pair and also scan: a prefix sorts before any
        // extension, though not necessarily adjacent once siblings intervene.
        // The sorted order does place every extension of p after p and before
        // the next node that is not an extension, so adjacency suffices.
        for w in nodes.windows(2) {
            if w[0].is_proper_prefix_of(&w[1]) {
                return Err(CoverError::NotPrefixFree(w[0].clone(), w[1].clone()));
            }
        }
        Ok(Cover { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn min_length(&self) -> Option<usize> {
        self.nodes.iter().map(Node::level).min()
    }

    pub fn max_length(&self) -> Option<usize> {
        self.nodes.iter().map(Node::level).max()
    }
}

/// True iff no proper-prefix pair exists in `nodes`.
pub fn is_prefix_free(nodes: &[Node]) -> bool {
    Cover::new(nodes.to_vec()).is_ok()
}

/// True iff every level-`depth` member of `S` extends some node of `F`.
///
/// All nodes of `F` must be members of `S` with length at most `depth`.
pub fn covers_space(f: &Cover, s: &TreeTruncation, depth: usize) -> Result<bool, CoverError> {
    for node in f.nodes() {
        if !s.is_member(node) {
            return Err(CoverError::NodeNotInTree(node.clone()));
        }
        if node.level() > depth {
            return Err(TreeError::DepthOutOfRange {
                requested: node.level(),
                depth,
            }
            .into());
        }
    }
    // Count covered leaves: prefix-freeness makes cylinder leaf sets disjoint.
    let mut covered = BigUint::zero();
    for node in f.nodes() {
        covered += s.descendant_count(node, depth)?;
    }
    Ok(&covered == s.level_count(depth)?)
}

fn ln_level_size(t: &TreeTruncation, level: usize) -> Result<f64, CoverError> {
    Ok(prec::ln_f64(
        t.level_count(level)?,
        prec::DEFAULT_PRECISION_BITS,
    ))
}

/// Sums terms given by their ln values with scaled Kahan summation;
/// returns the ln of the sum.
fn ln_sum(terms: &[f64]) -> f64 {
    if terms.is_empty() {
        return f64::NEG_INFINITY;
    }
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &t in terms {
        let x = (t - max).exp();
        let y = x - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    max + sum.ln()
}

fn cost_of_lengths(
    lengths: &[usize],
    t: &TreeTruncation,
    r: Exponent,
) -> Result<CostValue, CoverError> {
    let mut terms = Vec::with_capacity(lengths.len());
    for &len in lengths {
        terms.push(-r.r * ln_level_size(t, len)?);
    }
    let ln = ln_sum(&terms);
    let exact = match r.as_integer {
        Some(ri) => {
            let mut total = BigRational::zero();
            for &len in lengths {
                let t_len = t.level_count(len)?.clone();
                total += BigRational::new(BigInt::one(), BigInt::from(t_len.pow(ri)));
            }
            Some(total)
        }
        None => None,
    };
    Ok(CostValue { ln, exact })
}

/// The r-cost `V_r(F) = Σ_{ρ∈F} t_{|ρ|}^{-r}`.
pub fn r_cost(f: &Cover, t: &TreeTruncation, r: Exponent) -> Result<CostValue, CoverError> {
    let lengths: Vec<usize> = f.nodes().iter().map(Node::level).collect();
    cost_of_lengths(&lengths, t, r)
}

/// Cost of the single-level cover `S_k`: `s_k * t_k^{-r}`.
pub fn level_cost(
    s: &TreeTruncation,
    t: &TreeTruncation,
    r: Exponent,
    k: usize,
) -> Result<CostValue, CoverError> {
    let ln_s = prec::ln_f64(s.level_count(k)?, prec::DEFAULT_PRECISION_BITS);
    let ln_t = ln_level_size(t, k)?;
    let ln = ln_s - r.r * ln_t;
    let exact = match r.as_integer {
        Some(ri) => {
            let t_k = t.level_count(k)?.clone();
            Some(BigRational::new(
                BigInt::from(s.level_count(k)?.clone()),
                BigInt::from(t_k.pow(ri)),
            ))
        }
        None => None,
    };
    Ok(CostValue { ln, exact })
}

/// Argmin and min of `s_k t_k^{-r}` over `n <= k <= depth`; ties broken to
/// the smallest `k` (decided exactly where the rational path exists).
pub fn min_level_cost(
    s: &TreeTruncation,
    t: &TreeTruncation,
    r: Exponent,
    n: usize,
) -> Result<(usize, CostValue), CoverError> {
    let depth = s.depth().min(t.depth());
    if n > depth {
        return Err(TreeError::DepthOutOfRange {
            requested: n,
            depth,
        }
        .into());
    }
    let mut best: Option<(usize, CostValue)> = None;
    for k in n..=depth {
        let c = level_cost(s, t, r, k)?;
        let better = match &best {
            None => true,
            Some((_, bc)) => match (&c.exact, &bc.exact) {
                (Some(a), Some(b)) => a < b,
                _ => c.ln < bc.ln - COST_REL_TOL,
            },
        };
        if better {
            best = Some((k, c));
        }
    }
    Ok(best.expect("n <= depth"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationCase {
    /// The minimizing node was already in the cover; the process halts.
    Terminal,
    /// The cover was rebuilt by transplanting the suffixes below the
    /// minimizing node to every level-k node.
    Replaced,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalizationStep {
    pub k: usize,
    pub sigma: Node,
    pub v_sigma: CostValue,
    pub case: NormalizationCase,
    pub cost_before: CostValue,
    pub cost_after: CostValue,
}

/// Full trace of the cover-normalization procedure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalizationTrace {
    pub initial_cost: CostValue,
    pub steps: Vec<NormalizationStep>,
    /// Level of the full-level cover the process terminates at.
    pub final_level: usize,
    /// `s_k t_k^{-r}` at the final level; at most the initial cost.
    pub final_bound: CostValue,
}

/// Runs the iterative cover normalization on a prefix-free cover `F` of a
/// level-wise uniformly branching `S`, with minimum node length `n`.
///
/// Each step finds the least node length `k`, the level-`k` node `σ`
/// minimizing the cost of the part of `F` above it (ties to the
/// lexicographically least), and either terminates (`σ ∈ F`) or transplants
/// `σ`'s suffixes onto every level-`k` node. The trace records every step;
/// the final full-level cover's cost bounds the initial cost from below.
pub fn normalize_cover(
    f: &Cover,
    s: &TreeTruncation,
    t: &TreeTruncation,
    r: Exponent,
    n: usize,
) -> Result<NormalizationTrace, CoverError> {
    match s.is_levelwise_uniform() {
        crate::tree::Uniformity::Uniform => {}
        crate::tree::Uniformity::NonUniform {
            level,
            witness,
            counts,
        } => {
            return Err(CoverError::NonUniform {
                level: *level,
                a: witness.0.clone(),
                b: witness.1.clone(),
                ca: counts.0,
                cb: counts.1,
            });
        }
        crate::tree::Uniformity::Unknown => {
            return Err(CoverError::NonUniform {
                level: 0,
                a: Node::root(),
                b: Node::root(),
                ca: 0,
                cb: 0,
            });
        }
    }
    for node in f.nodes() {
        if node.level() < n {
            return Err(CoverError::NodeTooShort {
                node: node.clone(),
                len: node.level(),
                min: n,
            });
        }
    }
    let depth = s.depth();
    if !covers_space(f, s, depth)? {
        return Err(CoverError::NotCovering(depth));
    }

    let initial_cost = r_cost(f, t, r)?;
    let mut current = f.clone();
    let mut steps = Vec::new();
    loop {
        let cost_before = r_cost(&current, t, r)?;
        let k = current.min_length().expect("cover nonempty");
        let level_k = s.enumerate_level(k, crate::tree::DEFAULT_NODE_BUDGET)?;
        // v(σ) = V_r{ρ ∈ F : ρ ⪰ σ}; minimize, ties to lexicographic least.
        let mut best: Option<(Node, CostValue)> = None;
        for sigma in &level_k {
            let lengths: Vec<usize> = current
                .nodes()
                .iter()
                .filter(|rho| sigma.is_prefix_of(rho))
                .map(|rho| rho.level())
                .collect();
            if lengths.is_empty() {
                continue;
            }
            let v = cost_of_lengths(&lengths, t, r)?;
            let better = match &best {
                None => true,
                Some((_, bv)) => match (&v.exact, &bv.exact) {
                    (Some(a), Some(b)) => a < b,
                    _ => v.ln < bv.ln - COST_REL_TOL,
                },
            };
            if better {
                best = Some((sigma.clone(), v));
            }
        }
        let (sigma, v_sigma) = best.expect("cover of a nonempty space is nonempty");
        let in_cover = current.nodes().binary_search(&sigma).is_ok();
        if in_cover {
            let bound = level_cost(s, t, r, k)?;
            steps.push(NormalizationStep {
                k,
                sigma,
                v_sigma,
                case: NormalizationCase::Terminal,
                cost_before: cost_before.clone(),
                cost_after: cost_before.clone(),
            });
            debug_assert!(bound.le_with_tol(&initial_cost));
            return Ok(NormalizationTrace {
                initial_cost,
                steps,
                final_level: k,
                final_bound: bound,
            });
        }
        // Case (b): F' = { ητ : η ∈ S_k ∧ στ ∈ F }.
        let suffixes: Vec<Vec<Symbol>> = current
            .nodes()
            .iter()
            .filter(|rho| sigma.is_prefix_of(rho))
            .map(|rho| rho.symbols()[k..].to_vec())
            .collect();
        let mut next_nodes = Vec::with_capacity(level_k.len() * suffixes.len());
        for eta in &level_k {
            for tau in &suffixes {
                let mut sym = eta.symbols().to_vec();
                sym.extend_from_slice(tau);
                let node = Node::from_symbols(&sym);
                // Uniformity is what guarantees membership here.
                debug_assert!(s.is_member(&node));
                next_nodes.push(node);
            }
        }
        let next = Cover::new(next_nodes)?;
        debug_assert!(covers_space(&next, s, depth)?);
        debug_assert!(next.max_length() <= current.max_length());
        let cost_after = r_cost(&next, t, r)?;
        debug_assert!(cost_after.le_with_tol(&cost_before));
        steps.push(NormalizationStep {
            k,
            sigma,
            v_sigma,
            case: NormalizationCase::Replaced,
            cost_before,
            cost_after,
        });
        current = next;
    }
}

struct OracleCtx<'a> {
    s: &'a TreeTruncation,
    t: &'a TreeTruncation,
    r: Exponent,
    min_len: usize,
    max_depth: usize,
    budget: u64,
    visited: u64,
}

#[derive(Clone)]
struct OracleValue {
    ln: f64,
    exact: Option<BigRational>,
    /// True when taking the node itself is the canonical minimizer.
    take: bool,
}

impl<'a> OracleCtx<'a> {
    /// Minimal cost of a prefix-free cover of the subtree below `node`,
    /// using nodes of length in `[min_len, max_depth]`. Canonical tie-break:
    /// taking the node itself wins over delegating to its successors.
    fn solve(&mut self, node: &Node) -> Result<OracleValue, CoverError> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(CoverError::BudgetExceeded(self.budget));
        }
        let level = node.level();
        let here = if level >= self.min_len {
            Some(-self.r.r * ln_level_size(self.t, level)?)
        } else {
            None
        };
        let here_exact = match (here, self.r.as_integer) {
            (Some(_), Some(ri)) => {
                let t_l = self.t.level_count(level)?.clone();
                Some(BigRational::new(BigInt::one(), BigInt::from(t_l.pow(ri))))
            }
            _ => None,
        };
        if level == self.max_depth {
            let ln = here.ok_or(CoverError::NodeTooShort {
                node: node.clone(),
                len: level,
                min: self.min_len,
            })?;
            return Ok(OracleValue {
                ln,
                exact: here_exact,
                take: true,
            });
        }
        let mut child_terms = Vec::new();
        let mut child_exact = self.r.as_integer.map(|_| BigRational::zero());
        for child in self.s.successors(node)? {
            let v = self.solve(&child)?;
            child_terms.push(v.ln);
            if let (Some(acc), Some(e)) = (&mut child_exact, &v.exact) {
                *acc += e;
            }
        }
        let delegate = OracleValue {
            ln: ln_sum(&child_terms),
            exact: child_exact,
            take: false,
        };
        match here {
            None => Ok(delegate),
            Some(h) => {
                // Canonical order: "take" precedes "delegate", so ties go to take.
                let choose_take = match (&here_exact, &delegate.exact) {
                    (Some(a), Some(b)) => a <= b,
                    _ => h <= delegate.ln,
                };
                if choose_take {
                    Ok(OracleValue {
                        ln: h,
                        exact: here_exact,
                        take: true,
                    })
                } else {
                    Ok(delegate)
                }
            }
        }
    }

    fn reconstruct(&mut self, node: &Node, out: &mut Vec<Node>) -> Result<(), CoverError> {
        let v = self.solve(node)?;
        if v.take {
            out.push(node.clone());
        } else {
            for child in self.s.successors(node)? {
                self.reconstruct(&child, out)?;
            }
        }
        Ok(())
    }
}

/// Exhaustive minimal-cost search over all prefix-free covering node sets of
/// `S` with node lengths in `[n, max_depth]`.
///
/// Every such cover is a cut of the truncated tree, so the search walks the
/// cut lattice (each node is either in the cover or delegated to all of its
/// successors) depth-first with memo-free exact recursion, counting visited
/// configurations against `budget`. Results are truncation-relative: covers
/// may not use nodes beyond `max_depth`.
pub fn brute_force_min_cover(
    s: &TreeTruncation,
    t: &TreeTruncation,
    r: Exponent,
    n: usize,
    max_depth: usize,
    budget: u64,
) -> Result<(Cover, CostValue), CoverError> {
    if max_depth > s.depth() {
        return Err(TreeError::DepthOutOfRange {
            requested: max_depth,
            depth: s.depth(),
        }
        .into());
    }
    let mut ctx = OracleCtx {
        s,
        t,
        r,
        min_len: n,
        max_depth,
        budget,
        visited: 0,
    };
    let root = Node::root();
    let value = ctx.solve(&root)?;
    let mut nodes = Vec::new();
    ctx.budget = u64::MAX; // reconstruction revisits already-counted nodes
    ctx.reconstruct(&root, &mut nodes)?;
    let cover = Cover::new(nodes)?;
    debug_assert!(covers_space(&cover, s, max_depth)?);
    Ok((
        cover,
        CostValue {
            ln: value.ln,
            exact: value.exact,
        },
    ))
}

/// Deterministic set of nodes forming the full level `k` of `S`.
pub fn full_level_cover(s: &TreeTruncation, k: usize) -> Result<Cover, CoverError> {
    let nodes = s.enumerate_level(k, crate::tree::DEFAULT_NODE_BUDGET)?;
    Ok(Cover::new(nodes)?)
}

/// Serialization form of a cover: a sorted list of symbol sequences.
pub fn cover_to_sorted_lists(f: &Cover) -> Vec<Vec<Symbol>> {
    let set: BTreeSet<Vec<Symbol>> = f.nodes().iter().map(|n| n.symbols().to_vec()).collect();
    set.into_iter().collect()
}

/// Compares two single terms `t_j^{-r}` vs `t_k^{-r}` exactly via the
/// underlying integers (monotone in t for r > 0).
pub fn term_le(t: &TreeTruncation, j: usize, k: usize, r: Exponent) -> Result<bool, CoverError> {
    if r.r == 0.0 {
        return Ok(true);
    }
    Ok(t.level_count(j)? >= t.level_count(k)?)
}

/// Exact equality check helper for tests with rational expectations.
pub fn exact_cost(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Relative closeness of two cost values in the linear domain.
pub fn costs_close(a: &CostValue, b: &CostValue, rel: f64) -> bool {
    if let (Some(x), Some(y)) = (&a.exact, &b.exact) {
        if x == y {
            return true;
        }
        let diff = (x - y).abs();
        let scale = y.abs().max(x.abs());
        if scale.is_zero() {
            return diff.is_zero();
        }
        return prec::rational_to_f64(&(diff / scale)) <= rel;
    }
    (a.ln - b.ln).abs() <= rel || {
        let (x, y) = (a.value(), b.value());
        (x - y).abs() <= rel * x.abs().max(y.abs()).max(f64::MIN_POSITIVE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::BranchingProfile;

    fn binary(depth: usize) -> TreeTruncation {
        TreeTruncation::from_profile(&BranchingProfile::Constant { branch: 2 }, depth, true)
            .unwrap()
    }

    fn node(sym: &[u32]) -> Node {
        Node::from_symbols(sym)
    }

    #[test]
    fn prefix_free_checks() {
        assert!(is_prefix_free(&[node(&[0]), node(&[1, 0]), node(&[1, 1])]));
        assert!(!is_prefix_free(&[node(&[0]), node(&[0, 1])]));
        assert!(is_prefix_free(&[]));
    }

    #[test]
    fn covering_checks() {
        let t = binary(2);
        let full = full_level_cover(&t, 1).unwrap();
        assert!(covers_space(&full, &t, 2).unwrap());
        let half = Cover::new(vec![node(&[0])]).unwrap();
        assert!(!covers_space(&half, &t, 2).unwrap());
        let mixed = Cover::new(vec![node(&[0, 0]), node(&[0, 1]), node(&[1])]).unwrap();
        assert!(covers_space(&mixed, &t, 2).unwrap());
    }

    #[test]
    fn r_cost_examples() {
        let t = binary(3);
        let root = Cover::new(vec![Node::root()]).unwrap();
        for r in [0.0, 0.5, 1.0, 2.0] {
            let c = r_cost(&root, &t, Exponent::new(r).unwrap()).unwrap();
            assert!((c.value() - 1.0).abs() < 1e-12, "r={r}");
        }
        let s1 = full_level_cover(&t, 1).unwrap();
        let c = r_cost(&s1, &t, Exponent::new(1.0).unwrap()).unwrap();
        assert_eq!(c.exact.as_ref().unwrap(), &exact_cost(1, 1));
        let mixed = Cover::new(vec![node(&[0, 0]), node(&[0, 1]), node(&[1])]).unwrap();
        let c = r_cost(&mixed, &t, Exponent::new(2.0).unwrap()).unwrap();
        assert_eq!(c.exact.as_ref().unwrap(), &exact_cost(3, 8));
        assert!((c.value() - 0.375).abs() < 1e-12);
    }

    #[test]
    fn negative_r_rejected() {
        assert!(Exponent::new(-0.5).is_err());
    }

    #[test]
    fn normalize_case_a_immediately() {
        // F = {0, 10, 11}, r=1, n=1: v(0) = 1/2 = v(1), tie to σ=0, case (a).
        let t = binary(2);
        let f = Cover::new(vec![node(&[0]), node(&[1, 0]), node(&[1, 1])]).unwrap();
        let trace = normalize_cover(&f, &t, &t, Exponent::new(1.0).unwrap(), 1).unwrap();
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.steps[0].k, 1);
        assert_eq!(trace.steps[0].sigma, node(&[0]));
        assert_eq!(trace.steps[0].case, NormalizationCase::Terminal);
        assert_eq!(trace.final_level, 1);
        assert_eq!(trace.final_bound.exact.as_ref().unwrap(), &exact_cost(1, 1));
        assert_eq!(trace.initial_cost.exact.as_ref().unwrap(), &exact_cost(1, 1));
    }

    #[test]
    fn normalize_case_b_then_a() {
        // F = {00, 01, 1}, r=2, n=1: v(0)=2/16 < v(1)=1/4, σ=0 ∉ F, case (b)
        // gives F' = S_2 with cost 1/4; then case (a) at level 2.
        let t = binary(2);
        let f = Cover::new(vec![node(&[0, 0]), node(&[0, 1]), node(&[1])]).unwrap();
        let trace = normalize_cover(&f, &t, &t, Exponent::new(2.0).unwrap(), 1).unwrap();
        assert_eq!(trace.steps.len(), 2);
        assert_eq!(trace.steps[0].k, 1);
        assert_eq!(trace.steps[0].sigma, node(&[0]));
        assert_eq!(trace.steps[0].case, NormalizationCase::Replaced);
        assert_eq!(
            trace.steps[0].v_sigma.exact.as_ref().unwrap(),
            &exact_cost(2, 16)
        );
        assert_eq!(
            trace.steps[0].cost_after.exact.as_ref().unwrap(),
            &exact_cost(1, 4)
        );
        assert_eq!(trace.steps[1].case, NormalizationCase::Terminal);
        assert_eq!(trace.final_level, 2);
        assert_eq!(trace.final_bound.exact.as_ref().unwrap(), &exact_cost(4, 16));
        assert_eq!(trace.initial_cost.exact.as_ref().unwrap(), &exact_cost(3, 8));
    }

    #[test]
    fn normalize_full_level_terminates_immediately() {
        let t = binary(3);
        let f = full_level_cover(&t, 2).unwrap();
        let trace = normalize_cover(&f, &t, &t, Exponent::new(0.5).unwrap(), 1).unwrap();
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.steps[0].case, NormalizationCase::Terminal);
        assert_eq!(trace.final_level, 2);
    }

    #[test]
    fn normalize_rejects_nonuniform() {
        let s = crate::families::example_countable_tree(4).unwrap();
        let t = binary(4);
        let f = full_level_cover(&s, 2).unwrap();
        let err = normalize_cover(&f, &s, &t, Exponent::new(1.0).unwrap(), 1);
        assert!(matches!(err, Err(CoverError::NonUniform { .. })));
    }

    #[test]
    fn min_level_cost_examples() {
        let t = binary(4);
        let (k, c) = min_level_cost(&t, &t, Exponent::new(1.0).unwrap(), 0).unwrap();
        assert_eq!(k, 0);
        assert_eq!(c.exact.as_ref().unwrap(), &exact_cost(1, 1));
        let (k, c) = min_level_cost(&t, &t, Exponent::new(0.5).unwrap(), 0).unwrap();
        assert_eq!(k, 0);
        assert!((c.value() - 1.0).abs() < 1e-12);
        // Single path inside binary: cost 2^{-k/2}, min at depth.
        let s =
            TreeTruncation::from_profile(&BranchingProfile::Constant { branch: 1 }, 4, false)
                .unwrap();
        let (k, c) = min_level_cost(&s, &t, Exponent::new(0.5).unwrap(), 0).unwrap();
        assert_eq!(k, 4);
        assert!((c.value() - 2f64.powf(-2.0)).abs() < 1e-12);
    }

    #[test]
    fn brute_force_matches_levels_on_uniform() {
        let t = binary(2);
        let (cover, c) =
            brute_force_min_cover(&t, &t, Exponent::new(1.0).unwrap(), 0, 2, 1 << 20).unwrap();
        assert!((c.value() - 1.0).abs() < 1e-12);
        // Canonical minimizer at r=1 with ties-to-take: the root alone.
        assert_eq!(cover.nodes(), &[Node::root()]);
        let (_, c) =
            brute_force_min_cover(&t, &t, Exponent::new(2.0).unwrap(), 1, 2, 1 << 20).unwrap();
        assert_eq!(c.exact.as_ref().unwrap(), &exact_cost(4, 16));
    }

    #[test]
    fn brute_force_budget() {
        let t = TreeTruncation::from_profile(&BranchingProfile::Constant { branch: 3 }, 4, true)
            .unwrap();
        let err = brute_force_min_cover(&t, &t, Exponent::new(1.0).unwrap(), 0, 4, 1);
        assert!(matches!(err, Err(CoverError::BudgetExceeded(1))));
    }

    #[test]
    fn cost_positive() {
        let t = binary(3);
        for r in [0.0, 0.25, 1.0, 2.0] {
            let f = Cover::new(vec![node(&[0, 0, 1])]).unwrap();
            let c = r_cost(&f, &t, Exponent::new(r).unwrap()).unwrap();
            assert!(c.value() > 0.0);
        }
    }
}
