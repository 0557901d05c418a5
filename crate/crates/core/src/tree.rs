//! Finitely branching rooted trees, truncated at a finite depth.
//!
//! A `TreeTruncation` is the universe for every computation in this crate:
//! it represents the first `depth` levels of a leafless subtree of ℕ*,
//! together with exact big-integer level counts, the path-space ultrametric
//! and the uniform measure. Two backends are provided: a symbolic
//! branching-profile backend for level-wise uniform trees (which can be very
//! deep, since only counts are materialized) and an explicit per-level node
//! store for trees given by node lists or membership predicates.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

pub type Symbol = u32;

/// Default cap on the number of nodes materialized by predicate enumeration
/// or level listing.
pub const DEFAULT_NODE_BUDGET: usize = 1 << 24;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("node list is not prefix-closed: missing prefix of {0}")]
    NotPrefixClosed(Node),
    #[error("ambient branching < 2 at level {level} (count {count})")]
    AmbientBranchingTooSmall { level: usize, count: u64 },
    #[error("branching count 0 at level {0}")]
    ZeroBranching(usize),
    #[error("node {0} at level below depth has no successor")]
    LeafAboveDepth(Node),
    #[error("level {requested} out of range (depth {depth})")]
    DepthOutOfRange { requested: usize, depth: usize },
    #[error("node {0} is not a member of the tree")]
    NotAMember(Node),
    #[error("nodes have unequal lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("level {level} has {count} members, beyond the enumeration limit {limit}")]
    EnumerationTooLarge {
        level: usize,
        count: BigUint,
        limit: usize,
    },
    #[error("node budget {0} exceeded while enumerating tree")]
    NodeBudgetExceeded(usize),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("tree is empty after pruning leaves")]
    EmptyAfterPruning,
    #[error("depth must be at least 1")]
    ZeroDepth,
}

/// A node of a subtree of ℕ*: a finite sequence of symbols. Its level is its
/// length; the root is the empty sequence.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Node(pub Vec<Symbol>);

impl Node {
    pub fn root() -> Self {
        Node(Vec::new())
    }

    pub fn from_symbols(symbols: &[Symbol]) -> Self {
        Node(symbols.to_vec())
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn child(&self, symbol: Symbol) -> Node {
        let mut v = self.0.clone();
        v.push(symbol);
        Node(v)
    }

    pub fn parent(&self) -> Option<Node> {
        if self.0.is_empty() {
            None
        } else {
            Some(Node(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// True iff `self` is a (not necessarily proper) prefix of `other`.
    pub fn is_prefix_of(&self, other: &Node) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn is_proper_prefix_of(&self, other: &Node) -> bool {
        other.0.len() > self.0.len() && other.0[..self.0.len()] == self.0[..]
    }
}

impl fmt::Debug for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Node({})", self)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

/// Level-indexed branching counts in symbolic form. `branch_at(n)` is the
/// number of successors of every level-`n` node of a tree built from the
/// profile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BranchingProfile {
    Constant {
        branch: u64,
    },
    EventuallyPeriodic {
        #[serde(default)]
        preperiod: Vec<u64>,
        period: Vec<u64>,
    },
    /// Block `k` spans levels `[scale * base^k, scale * base^{k+1})`; the
    /// branching value for block `k` is `values[k mod values.len()]`.
    /// Levels below `scale` are assigned to block 0.
    BlockSchedule {
        base: u64,
        #[serde(default = "default_scale")]
        scale: u64,
        values: Vec<u64>,
    },
    Explicit {
        counts: Vec<u64>,
    },
}

fn default_scale() -> u64 {
    1
}

impl BranchingProfile {
    pub fn branch_at(&self, level: usize) -> u64 {
        match self {
            BranchingProfile::Constant { branch } => *branch,
            BranchingProfile::EventuallyPeriodic { preperiod, period } => {
                if level < preperiod.len() {
                    preperiod[level]
                } else {
                    period[(level - preperiod.len()) % period.len()]
                }
            }
            BranchingProfile::BlockSchedule { base, scale, values } => {
                let k = block_index(level as u64, *base, *scale);
                values[(k as usize) % values.len()]
            }
            BranchingProfile::Explicit { counts } => counts[level],
        }
    }

    /// Checks internal consistency and the branching lower bound
    /// (`>= 2` for ambient trees, `>= 1` otherwise) on levels `0..depth`.
    pub fn validate(&self, depth: usize, ambient: bool) -> Result<(), TreeError> {
        match self {
            BranchingProfile::EventuallyPeriodic { period, .. } if period.is_empty() => {
                return Err(TreeError::InvalidProfile("empty period".into()));
            }
            BranchingProfile::BlockSchedule { base, scale, values } => {
                if *base < 2 {
                    return Err(TreeError::InvalidProfile("block base must be >= 2".into()));
                }
                if *scale == 0 {
                    return Err(TreeError::InvalidProfile("block scale must be >= 1".into()));
                }
                if values.is_empty() {
                    return Err(TreeError::InvalidProfile("empty block values".into()));
                }
            }
            BranchingProfile::Explicit { counts } => {
                if counts.len() < depth {
                    return Err(TreeError::InvalidProfile(format!(
                        "explicit profile has {} counts, depth is {}",
                        counts.len(),
                        depth
                    )));
                }
            }
            _ => {}
        }
        let min = if ambient { 2 } else { 1 };
        for level in 0..depth {
            let b = self.branch_at(level);
            if b == 0 {
                return Err(TreeError::ZeroBranching(level));
            }
            if b < min {
                return Err(TreeError::AmbientBranchingTooSmall { level, count: b });
            }
        }
        Ok(())
    }
}

/// Block index of a level in a geometric block schedule: the largest `k`
/// with `scale * base^k <= level`, with levels below `scale` in block 0.
pub fn block_index(level: u64, base: u64, scale: u64) -> u64 {
    if level < scale {
        return 0;
    }
    let mut k = 0u64;
    let mut bound = scale;
    // Find largest k with scale*base^k <= level.
    loop {
        match bound.checked_mul(base) {
            Some(next) if next <= level => {
                bound = next;
                k += 1;
            }
            _ => return k,
        }
    }
}

/// Tri-state result of the level-wise uniform branching check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Uniformity {
    Uniform,
    /// Two same-level nodes with differing successor counts.
    NonUniform {
        level: usize,
        witness: (Node, Node),
        counts: (u64, u64),
    },
    Unknown,
}

impl Uniformity {
    pub fn is_uniform(&self) -> bool {
        matches!(self, Uniformity::Uniform)
    }
}

#[derive(Clone, Debug)]
struct ExplicitNode {
    parent: u32,
    symbol: Symbol,
}

/// Per-level node store; within each level nodes are sorted by
/// (parent index, symbol), so the children of a node are contiguous.
#[derive(Clone, Debug, Default)]
struct ExplicitLevels {
    levels: Vec<Vec<ExplicitNode>>,
}

impl ExplicitLevels {
    fn children_range(&self, level: usize, parent: u32) -> std::ops::Range<usize> {
        let next = match self.levels.get(level + 1) {
            Some(v) => v,
            None => return 0..0,
        };
        let start = next.partition_point(|n| n.parent < parent);
        let end = next.partition_point(|n| n.parent <= parent);
        start..end
    }

    /// Index of `node` within its level, walking down from the root.
    fn node_index(&self, node: &Node) -> Option<u32> {
        let mut idx: u32 = 0;
        for (level, &sym) in node.symbols().iter().enumerate() {
            let range = self.children_range(level, idx);
            let next = &self.levels[level + 1];
            let pos = next[range.clone()]
                .binary_search_by(|n| n.symbol.cmp(&sym))
                .ok()?;
            idx = (range.start + pos) as u32;
        }
        Some(idx)
    }

    fn path_of(&self, level: usize, idx: u32) -> Node {
        let mut symbols = vec![0; level];
        let mut cur = idx;
        for l in (1..=level).rev() {
            let n = &self.levels[l][cur as usize];
            symbols[l - 1] = n.symbol;
            cur = n.parent;
        }
        Node(symbols)
    }
}

#[derive(Clone, Debug)]
enum TreeRepr {
    Profile(BranchingProfile),
    Explicit(ExplicitLevels),
}

/// A finite-depth truncation of a leafless subtree of ℕ*.
///
/// Immutable after construction; all operations are pure.
#[derive(Clone, Debug)]
pub struct TreeTruncation {
    depth: usize,
    repr: TreeRepr,
    level_counts: Vec<BigUint>,
    uniformity: Uniformity,
}

impl TreeTruncation {
    /// Builds a level-wise uniformly branching tree from a profile.
    /// `ambient` requires every branching count to be at least 2.
    pub fn from_profile(
        profile: &BranchingProfile,
        depth: usize,
        ambient: bool,
    ) -> Result<Self, TreeError> {
        if depth == 0 {
            return Err(TreeError::ZeroDepth);
        }
        profile.validate(depth, ambient)?;
        let mut counts = Vec::with_capacity(depth + 1);
        counts.push(BigUint::one());
        for level in 0..depth {
            let next = counts[level].clone() * BigUint::from(profile.branch_at(level));
            counts.push(next);
        }
        Ok(TreeTruncation {
            depth,
            repr: TreeRepr::Profile(profile.clone()),
            level_counts: counts,
            uniformity: Uniformity::Uniform,
        })
    }

    /// Builds a tree from an explicit node list. The list must be
    /// prefix-closed, contain the root, and have no leaves above `depth`.
    pub fn from_nodes(nodes: &[Node], depth: usize, ambient: bool) -> Result<Self, TreeError> {
        if depth == 0 {
            return Err(TreeError::ZeroDepth);
        }
        let mut by_level: Vec<Vec<&Node>> = vec![Vec::new(); depth + 1];
        for node in nodes {
            if node.level() > depth {
                return Err(TreeError::DepthOutOfRange {
                    requested: node.level(),
                    depth,
                });
            }
            by_level[node.level()].push(node);
        }
        if by_level[0].is_empty() {
            return Err(TreeError::NotPrefixClosed(Node::root()));
        }
        let mut levels = ExplicitLevels {
            levels: vec![vec![ExplicitNode { parent: 0, symbol: 0 }]],
        };
        let mut prev_index: HashMap<Vec<Symbol>, u32> = HashMap::new();
        prev_index.insert(Vec::new(), 0);
        for level in 1..=depth {
            let mut entries: Vec<(u32, Symbol, Vec<Symbol>)> = Vec::new();
            let mut seen: HashMap<Vec<Symbol>, ()> = HashMap::new();
            for node in &by_level[level] {
                if seen.insert(node.0.clone(), ()).is_some() {
                    continue;
                }
                let parent_key = &node.0[..level - 1];
                let parent = *prev_index
                    .get(parent_key)
                    .ok_or_else(|| TreeError::NotPrefixClosed((*node).clone()))?;
                entries.push((parent, node.0[level - 1], node.0.clone()));
            }
            entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
            let mut next_index = HashMap::new();
            let mut stored = Vec::with_capacity(entries.len());
            for (i, (parent, symbol, key)) in entries.into_iter().enumerate() {
                next_index.insert(key, i as u32);
                stored.push(ExplicitNode { parent, symbol });
            }
            levels.levels.push(stored);
            prev_index = next_index;
        }
        Self::from_levels(levels, depth, ambient, false)
    }

    /// Builds a tree by enumerating the members of `ambient_profile`'s full
    /// tree that satisfy `pred`, level by level. Nodes without surviving
    /// descendants at `depth` are pruned so that the truncation is leafless.
    pub fn from_predicate(
        ambient_profile: &BranchingProfile,
        depth: usize,
        pred: &dyn Fn(&[Symbol]) -> bool,
        node_budget: usize,
    ) -> Result<Self, TreeError> {
        if depth == 0 {
            return Err(TreeError::ZeroDepth);
        }
        ambient_profile.validate(depth, true)?;
        let mut levels = ExplicitLevels {
            levels: vec![vec![ExplicitNode { parent: 0, symbol: 0 }]],
        };
        for _ in 0..depth {
            levels.levels.push(Vec::new());
        }
        let mut total = 1usize;
        let mut prefix: Vec<Symbol> = Vec::new();
        build_predicate_rec(
            &mut levels,
            ambient_profile,
            depth,
            pred,
            node_budget,
            &mut prefix,
            0,
            &mut total,
        )?;
        prune_leaves(&mut levels, depth)?;
        Self::from_levels(levels, depth, false, false)
    }

    fn from_levels(
        levels: ExplicitLevels,
        depth: usize,
        ambient: bool,
        allow_leaves: bool,
    ) -> Result<Self, TreeError> {
        // Leaf check and uniformity in one pass.
        let mut uniformity = Uniformity::Uniform;
        for level in 0..depth {
            let count_here = levels.levels[level].len();
            if count_here == 0 {
                return Err(TreeError::EmptyAfterPruning);
            }
            let mut first: Option<(u32, u64)> = None;
            for idx in 0..count_here {
                let succ = levels.children_range(level, idx as u32).len() as u64;
                if succ == 0 && !allow_leaves {
                    return Err(TreeError::LeafAboveDepth(levels.path_of(level, idx as u32)));
                }
                if ambient && succ < 2 {
                    return Err(TreeError::AmbientBranchingTooSmall {
                        level,
                        count: succ,
                    });
                }
                match first {
                    None => first = Some((idx as u32, succ)),
                    Some((fidx, fsucc)) => {
                        if succ != fsucc && uniformity.is_uniform() {
                            uniformity = Uniformity::NonUniform {
                                level,
                                witness: (
                                    levels.path_of(level, fidx),
                                    levels.path_of(level, idx as u32),
                                ),
                                counts: (fsucc, succ),
                            };
                        }
                    }
                }
            }
        }
        let level_counts = levels
            .levels
            .iter()
            .map(|l| BigUint::from(l.len()))
            .collect();
        Ok(TreeTruncation {
            depth,
            repr: TreeRepr::Explicit(levels),
            level_counts,
            uniformity,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn profile(&self) -> Option<&BranchingProfile> {
        match &self.repr {
            TreeRepr::Profile(p) => Some(p),
            TreeRepr::Explicit(_) => None,
        }
    }

    /// Exact count of level-`n` members.
    pub fn level_count(&self, n: usize) -> Result<&BigUint, TreeError> {
        self.level_counts.get(n).ok_or(TreeError::DepthOutOfRange {
            requested: n,
            depth: self.depth,
        })
    }

    /// `s_0..s_{up_to}`, exact big integers.
    pub fn level_counts(&self, up_to: usize) -> Result<&[BigUint], TreeError> {
        if up_to > self.depth {
            return Err(TreeError::DepthOutOfRange {
                requested: up_to,
                depth: self.depth,
            });
        }
        Ok(&self.level_counts[..=up_to])
    }

    pub fn is_member(&self, node: &Node) -> bool {
        if node.level() > self.depth {
            return false;
        }
        match &self.repr {
            TreeRepr::Profile(p) => node
                .symbols()
                .iter()
                .enumerate()
                .all(|(i, &s)| (s as u64) < p.branch_at(i)),
            TreeRepr::Explicit(l) => l.node_index(node).is_some(),
        }
    }

    /// Number of member successors of a member node below depth.
    pub fn successor_count(&self, node: &Node) -> Result<u64, TreeError> {
        if !self.is_member(node) {
            return Err(TreeError::NotAMember(node.clone()));
        }
        if node.level() >= self.depth {
            return Err(TreeError::DepthOutOfRange {
                requested: node.level() + 1,
                depth: self.depth,
            });
        }
        match &self.repr {
            TreeRepr::Profile(p) => Ok(p.branch_at(node.level())),
            TreeRepr::Explicit(l) => {
                let idx = l.node_index(node).expect("checked membership");
                Ok(l.children_range(node.level(), idx).len() as u64)
            }
        }
    }

    /// Member successors of a node, in symbol order.
    pub fn successors(&self, node: &Node) -> Result<Vec<Node>, TreeError> {
        if !self.is_member(node) {
            return Err(TreeError::NotAMember(node.clone()));
        }
        if node.level() >= self.depth {
            return Err(TreeError::DepthOutOfRange {
                requested: node.level() + 1,
                depth: self.depth,
            });
        }
        match &self.repr {
            TreeRepr::Profile(p) => {
                let b = p.branch_at(node.level());
                Ok((0..b).map(|s| node.child(s as Symbol)).collect())
            }
            TreeRepr::Explicit(l) => {
                let idx = l.node_index(node).expect("checked membership");
                let range = l.children_range(node.level(), idx);
                Ok(l.levels[node.level() + 1][range]
                    .iter()
                    .map(|n| node.child(n.symbol))
                    .collect())
            }
        }
    }

    /// Materializes all members of level `n` (symbol-lexicographic order).
    /// Fails if the level is larger than `limit`.
    pub fn enumerate_level(&self, n: usize, limit: usize) -> Result<Vec<Node>, TreeError> {
        let count = self.level_count(n)?.clone();
        if count > BigUint::from(limit) {
            return Err(TreeError::EnumerationTooLarge {
                level: n,
                count,
                limit,
            });
        }
        match &self.repr {
            TreeRepr::Profile(p) => {
                let mut out = Vec::new();
                let mut cur = vec![0 as Symbol; n];
                loop {
                    out.push(Node(cur.clone()));
                    // Mixed-radix increment over per-level branching.
                    let mut i = n;
                    loop {
                        if i == 0 {
                            return Ok(out);
                        }
                        i -= 1;
                        cur[i] += 1;
                        if (cur[i] as u64) < p.branch_at(i) {
                            break;
                        }
                        cur[i] = 0;
                    }
                }
            }
            TreeRepr::Explicit(l) => Ok((0..l.levels[n].len())
                .map(|i| l.path_of(n, i as u32))
                .collect()),
        }
    }

    /// Path-space distance between the cylinders of two same-length members:
    /// `1/t_n` for the least disagreement index `n`, or a flagged value when
    /// the prefixes coincide.
    pub fn distance(&self, a: &Node, b: &Node) -> Result<Distance, TreeError> {
        if a.level() != b.level() {
            return Err(TreeError::LengthMismatch(a.level(), b.level()));
        }
        for node in [a, b] {
            if !self.is_member(node) {
                return Err(TreeError::NotAMember(node.clone()));
            }
        }
        for (n, (x, y)) in a.symbols().iter().zip(b.symbols()).enumerate() {
            if x != y {
                let t_n = self.level_count(n)?;
                return Ok(Distance::Value(BigRational::new(
                    BigInt::one(),
                    BigInt::from(t_n.clone()),
                )));
            }
        }
        Ok(Distance::IndistinguishableAtDepth)
    }

    /// Uniform measure of the cylinder `[σ] ∩ [S]`: the product of `1/k`
    /// over the successor counts along the path from the root.
    pub fn node_measure(&self, node: &Node) -> Result<BigRational, TreeError> {
        if !self.is_member(node) {
            return Err(TreeError::NotAMember(node.clone()));
        }
        let mut denom = BigUint::one();
        let mut prefix = Node::root();
        for &sym in node.symbols() {
            denom *= BigUint::from(self.successor_count(&prefix)?);
            prefix = prefix.child(sym);
        }
        Ok(BigRational::new(BigInt::one(), BigInt::from(denom)))
    }

    /// Whether every node of a given level has the same number of successors,
    /// with a witness pair on failure.
    pub fn is_levelwise_uniform(&self) -> &Uniformity {
        &self.uniformity
    }

    /// Branching count at a level of a uniform tree.
    pub fn uniform_branch_at(&self, level: usize) -> Result<u64, TreeError> {
        match &self.repr {
            TreeRepr::Profile(p) => Ok(p.branch_at(level)),
            TreeRepr::Explicit(l) => {
                if level >= self.depth {
                    return Err(TreeError::DepthOutOfRange {
                        requested: level,
                        depth: self.depth,
                    });
                }
                Ok(l.children_range(level, 0).len() as u64)
            }
        }
    }

    /// True iff every member of `self` is a member of `other`
    /// (up to `self`'s depth).
    pub fn is_subtree_of(&self, other: &TreeTruncation) -> bool {
        if self.depth > other.depth {
            return false;
        }
        match (&self.repr, &other.repr) {
            (TreeRepr::Profile(ps), TreeRepr::Profile(pt)) => {
                // Canonical symbol embedding: level symbols 0..b.
                (0..self.depth).all(|l| ps.branch_at(l) <= pt.branch_at(l))
            }
            (TreeRepr::Explicit(ls), TreeRepr::Profile(pt)) => {
                ls.levels.iter().enumerate().skip(1).all(|(level, nodes)| {
                    nodes
                        .iter()
                        .all(|n| (n.symbol as u64) < pt.branch_at(level - 1))
                })
            }
            (TreeRepr::Explicit(ls), TreeRepr::Explicit(lt)) => {
                // Map node indices of self into other level by level.
                let mut map: Vec<u32> = vec![0];
                for level in 1..=self.depth {
                    let mut next = Vec::with_capacity(ls.levels[level].len());
                    for n in &ls.levels[level] {
                        let t_parent = map[n.parent as usize];
                        let range = lt.children_range(level - 1, t_parent);
                        let slice = &lt.levels[level][range.clone()];
                        match slice.binary_search_by(|c| c.symbol.cmp(&n.symbol)) {
                            Ok(pos) => next.push((range.start + pos) as u32),
                            Err(_) => return false,
                        }
                    }
                    map = next;
                }
                true
            }
            (TreeRepr::Profile(ps), TreeRepr::Explicit(_)) => {
                // Rare direction; check by enumerating self level by level.
                for level in 1..=self.depth {
                    let members = match self.enumerate_level(level, DEFAULT_NODE_BUDGET) {
                        Ok(m) => m,
                        Err(_) => return false,
                    };
                    if !members.iter().all(|m| other.is_member(m)) {
                        return false;
                    }
                    let _ = ps;
                }
                true
            }
        }
    }

    /// Number of level-`n` descendants of a member node, exact.
    pub fn descendant_count(&self, node: &Node, n: usize) -> Result<BigUint, TreeError> {
        if !self.is_member(node) {
            return Err(TreeError::NotAMember(node.clone()));
        }
        if n < node.level() || n > self.depth {
            return Err(TreeError::DepthOutOfRange {
                requested: n,
                depth: self.depth,
            });
        }
        match &self.repr {
            TreeRepr::Profile(p) => {
                let mut c = BigUint::one();
                for level in node.level()..n {
                    c *= BigUint::from(p.branch_at(level));
                }
                Ok(c)
            }
            TreeRepr::Explicit(l) => {
                let idx = l.node_index(node).expect("checked membership");
                let mut frontier = vec![idx];
                for level in node.level()..n {
                    let mut next = Vec::new();
                    for parent in frontier {
                        let range = l.children_range(level, parent);
                        next.extend(range.map(|i| i as u32));
                    }
                    frontier = next;
                }
                Ok(BigUint::from(frontier.len()))
            }
        }
    }
}

/// Distance between two member nodes viewed as path prefixes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Distance {
    /// The prefixes agree; paths through them may coincide, so no positive
    /// distance can be certified at this depth.
    IndistinguishableAtDepth,
    Value(BigRational),
}

impl Distance {
    pub fn value(&self) -> BigRational {
        match self {
            Distance::IndistinguishableAtDepth => BigRational::zero(),
            Distance::Value(v) => v.clone(),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn build_predicate_rec(
    levels: &mut ExplicitLevels,
    profile: &BranchingProfile,
    depth: usize,
    pred: &dyn Fn(&[Symbol]) -> bool,
    budget: usize,
    prefix: &mut Vec<Symbol>,
    parent_idx: u32,
    total: &mut usize,
) -> Result<(), TreeError> {
    let level = prefix.len();
    if level == depth {
        return Ok(());
    }
    for sym in 0..profile.branch_at(level) {
        prefix.push(sym as Symbol);
        if pred(prefix) {
            *total += 1;
            if *total > budget {
                return Err(TreeError::NodeBudgetExceeded(budget));
            }
            let idx = levels.levels[level + 1].len() as u32;
            levels.levels[level + 1].push(ExplicitNode {
                parent: parent_idx,
                symbol: sym as Symbol,
            });
            build_predicate_rec(levels, profile, depth, pred, budget, prefix, idx, total)?;
        }
        prefix.pop();
    }
    Ok(())
}

/// Removes nodes with no descendant at `depth`, reindexing parents.
fn prune_leaves(levels: &mut ExplicitLevels, depth: usize) -> Result<(), TreeError> {
    let mut keep: Vec<Vec<bool>> = levels.levels.iter().map(|l| vec![false; l.len()]).collect();
    for k in keep[depth].iter_mut() {
        *k = true;
    }
    for level in (1..=depth).rev() {
        for (i, node) in levels.levels[level].iter().enumerate() {
            if keep[level][i] {
                keep[level - 1][node.parent as usize] = true;
            }
        }
    }
    if !keep[0][0] {
        return Err(TreeError::EmptyAfterPruning);
    }
    let mut remap: Vec<Vec<u32>> = Vec::with_capacity(depth + 1);
    for level in 0..=depth {
        let mut map = vec![u32::MAX; levels.levels[level].len()];
        let mut next = 0u32;
        let old = std::mem::take(&mut levels.levels[level]);
        let mut new_nodes = Vec::new();
        for (i, node) in old.into_iter().enumerate() {
            if keep[level][i] {
                map[i] = next;
                next += 1;
                let parent = if level == 0 {
                    0
                } else {
                    remap[level - 1][node.parent as usize]
                };
                new_nodes.push(ExplicitNode {
                    parent,
                    symbol: node.symbol,
                });
            }
        }
        levels.levels[level] = new_nodes;
        remap.push(map);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn constant_profile_counts() {
        let t = TreeTruncation::from_profile(&BranchingProfile::Constant { branch: 2 }, 3, true)
            .unwrap();
        assert_eq!(t.level_counts(3).unwrap(), &[big(1), big(2), big(4), big(8)]);
        assert!(t.is_levelwise_uniform().is_uniform());
    }

    #[test]
    fn periodic_profile_counts() {
        let p = BranchingProfile::EventuallyPeriodic {
            preperiod: vec![],
            period: vec![2, 3],
        };
        let t = TreeTruncation::from_profile(&p, 4, true).unwrap();
        assert_eq!(
            t.level_counts(4).unwrap(),
            &[big(1), big(2), big(6), big(12), big(36)]
        );
    }

    #[test]
    fn ambient_rejects_single_branching() {
        let err = TreeTruncation::from_profile(&BranchingProfile::Constant { branch: 1 }, 2, true);
        assert!(matches!(
            err,
            Err(TreeError::AmbientBranchingTooSmall { .. })
        ));
        // Allowed as a (non-ambient) subtree.
        assert!(
            TreeTruncation::from_profile(&BranchingProfile::Constant { branch: 1 }, 2, false)
                .is_ok()
        );
    }

    #[test]
    fn explicit_single_path_ambient_rejected() {
        // {ε, 0, 00} claimed as an ambient tree: branching 1 at the root.
        let nodes = vec![
            Node::root(),
            Node::from_symbols(&[0]),
            Node::from_symbols(&[0, 0]),
        ];
        let err = TreeTruncation::from_nodes(&nodes, 2, true);
        assert!(matches!(
            err,
            Err(TreeError::AmbientBranchingTooSmall { .. })
        ));
        assert!(TreeTruncation::from_nodes(&nodes, 2, false).is_ok());
    }

    #[test]
    fn explicit_valid_tree() {
        let nodes: Vec<Node> = [
            vec![],
            vec![0],
            vec![1],
            vec![0, 0],
            vec![1, 0],
            vec![1, 1],
        ]
        .iter()
        .map(|v| Node(v.iter().map(|&x| x as Symbol).collect()))
        .collect();
        let t = TreeTruncation::from_nodes(&nodes, 2, false).unwrap();
        assert_eq!(t.level_counts(2).unwrap(), &[big(1), big(2), big(3)]);
        match t.is_levelwise_uniform() {
            Uniformity::NonUniform { level, counts, .. } => {
                assert_eq!(*level, 1);
                assert_eq!(*counts, (1, 2));
            }
            other => panic!("expected non-uniform, got {other:?}"),
        }
    }

    #[test]
    fn non_prefix_closed_rejected() {
        let nodes = vec![Node::root(), Node::from_symbols(&[1, 0])];
        assert!(matches!(
            TreeTruncation::from_nodes(&nodes, 2, false),
            Err(TreeError::NotPrefixClosed(_))
        ));
    }

    #[test]
    fn leaf_above_depth_rejected() {
        let nodes = vec![
            Node::root(),
            Node::from_symbols(&[0]),
            Node::from_symbols(&[1]),
            Node::from_symbols(&[0, 0]),
        ];
        assert!(matches!(
            TreeTruncation::from_nodes(&nodes, 2, false),
            Err(TreeError::LeafAboveDepth(_))
        ));
    }

    #[test]
    fn distance_binary_tree() {
        let t = TreeTruncation::from_profile(&BranchingProfile::Constant { branch: 2 }, 3, true)
            .unwrap();
        let d = t
            .distance(&Node::from_symbols(&[0, 0]), &Node::from_symbols(&[0, 1]))
            .unwrap();
        assert_eq!(d.value(), BigRational::from_u64(1).unwrap() / BigInt::from(2));
        let d = t
            .distance(&Node::from_symbols(&[0]), &Node::from_symbols(&[1]))
            .unwrap();
        assert_eq!(d.value(), BigRational::from_u64(1).unwrap());
        let d = t
            .distance(&Node::from_symbols(&[0]), &Node::from_symbols(&[0]))
            .unwrap();
        assert_eq!(d, Distance::IndistinguishableAtDepth);
        assert!(t
            .distance(&Node::from_symbols(&[0]), &Node::from_symbols(&[0, 1]))
            .is_err());
    }

    #[test]
    fn node_measure_uniform() {
        let t = TreeTruncation::from_profile(&BranchingProfile::Constant { branch: 2 }, 3, true)
            .unwrap();
        let m = t.node_measure(&Node::from_symbols(&[0, 1, 1])).unwrap();
        assert_eq!(m, BigRational::new(BigInt::one(), BigInt::from(8)));
        let p = BranchingProfile::EventuallyPeriodic {
            preperiod: vec![],
            period: vec![2, 3],
        };
        let t = TreeTruncation::from_profile(&p, 2, true).unwrap();
        let m = t.node_measure(&Node::from_symbols(&[1, 2])).unwrap();
        assert_eq!(m, BigRational::new(BigInt::one(), BigInt::from(6)));
    }

    #[test]
    fn subtree_checks() {
        let t2 = TreeTruncation::from_profile(&BranchingProfile::Constant { branch: 2 }, 3, true)
            .unwrap();
        let t4 = TreeTruncation::from_profile(&BranchingProfile::Constant { branch: 4 }, 3, true)
            .unwrap();
        assert!(t2.is_subtree_of(&t4));
        assert!(!t4.is_subtree_of(&t2));
        assert!(t2.is_subtree_of(&t2));
        // explicit with symbol 2 inside binary
        let nodes = vec![
            Node::root(),
            Node::from_symbols(&[0]),
            Node::from_symbols(&[2]),
        ];
        let s = TreeTruncation::from_nodes(&nodes, 1, false).unwrap();
        assert!(!s.is_subtree_of(&t2));
        assert!(s.is_subtree_of(&t4));
    }

    #[test]
    fn block_schedule_indexing() {
        // base 4, scale 1: block 0 = [0,4), block 1 = [4,16), block 2 = [16,64)
        assert_eq!(block_index(0, 4, 1), 0);
        assert_eq!(block_index(3, 4, 1), 0);
        assert_eq!(block_index(4, 4, 1), 1);
        assert_eq!(block_index(15, 4, 1), 1);
        assert_eq!(block_index(16, 4, 1), 2);
        assert_eq!(block_index(63, 4, 1), 2);
        assert_eq!(block_index(64, 4, 1), 3);
    }

    #[test]
    fn measure_additivity_exact() {
        // Sum of child measures equals the parent measure, on a mixed tree.
        let nodes: Vec<Node> = [
            vec![],
            vec![0],
            vec![1],
            vec![0, 0],
            vec![0, 1],
            vec![1, 2],
        ]
        .iter()
        .map(|v| Node(v.iter().map(|&x| x as Symbol).collect()))
        .collect();
        let t = TreeTruncation::from_nodes(&nodes, 2, false).unwrap();
        for level in 0..t.depth() {
            for node in t.enumerate_level(level, 1000).unwrap() {
                let sum: BigRational = t
                    .successors(&node)
                    .unwrap()
                    .iter()
                    .map(|c| t.node_measure(c).unwrap())
                    .sum();
                assert_eq!(sum, t.node_measure(&node).unwrap());
            }
        }
    }
}
