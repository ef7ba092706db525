//! Partial tree covers without Steiner points.
//!
//! A partial tree is indexed by `k = partition · C(m, 2) + pair`, where the
//! partition is a major strip partition (a net direction θ plus a shift) and
//! the pair is two minor strips `S1 < S2` of direction θ^⊥. Inside each major
//! strip, the points of `S1` (side A) and `S2` (side B) get a strategy tree;
//! everything else in the strip hangs off it in a score-sorted tree, and the
//! strip units are joined by a balanced binary tree in strip order, so every
//! partial tree spans its vertex set.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{
    direction_net, dist, dot, grid_shift_offsets, lex_cmp, norm, orthonormal_complement, DirectionNet, PointSet,
};
use crate::tree_model::{CoverTree, Location, TreeNode};
use crate::{Error, Result};

/// How the tree inside one major strip is shaped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StripTreeStrategy {
    /// Star at the highest-score point of A (unbounded degree).
    Star,
    /// Score-sorted balanced binary trees under a*.
    BalancedScore,
    /// Dyadic tries splitting every hyperplane axis at once.
    DyadicKary,
    /// Dyadic tries splitting one hyperplane axis per depth.
    DyadicBinary,
}

impl StripTreeStrategy {
    pub const ALL: [StripTreeStrategy; 4] = [
        StripTreeStrategy::Star,
        StripTreeStrategy::BalancedScore,
        StripTreeStrategy::DyadicKary,
        StripTreeStrategy::DyadicBinary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StripTreeStrategy::Star => "star",
            StripTreeStrategy::BalancedScore => "balanced-score",
            StripTreeStrategy::DyadicKary => "dyadic-kary",
            StripTreeStrategy::DyadicBinary => "dyadic-binary",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }

    /// Node degree cap of a strip-pair tree, if bounded.
    pub fn strip_degree_cap(self, dim: usize) -> Option<usize> {
        match self {
            StripTreeStrategy::Star => None,
            StripTreeStrategy::BalancedScore | StripTreeStrategy::DyadicBinary => Some(3),
            StripTreeStrategy::DyadicKary => Some((1usize << (dim.max(2) - 1)) + 2),
        }
    }

    /// Node degree cap of a whole partial tree (strip trees joined).
    pub fn partial_degree_cap(self, dim: usize) -> Option<usize> {
        match self {
            StripTreeStrategy::Star => None,
            StripTreeStrategy::BalancedScore | StripTreeStrategy::DyadicBinary => Some(5),
            StripTreeStrategy::DyadicKary => Some(((1usize << (dim.max(2) - 1)) + 2).max(5)),
        }
    }
}

/// The major and minor strip partitions for one scale Δ.
#[derive(Clone, Debug, PartialEq)]
pub struct StripFamily {
    pub dim: usize,
    pub eps: f64,
    pub mu: f64,
    pub delta: f64,
    pub net: DirectionNet,
    /// Strip width εΔ/(2μ).
    pub major_width: f64,
    /// Side of the hyperplane cubes (equals the width in the plane).
    pub cell_side: f64,
    /// Major partition shifts for each direction.
    pub shifts: Vec<f64>,
    /// Minor strip width (plane, line) or minor cube side (d ≥ 3).
    pub minor_side: f64,
    pub minor_per_axis: u64,
    /// Number of minor strips m.
    pub minor_count: u128,
}

/// Decoded partial index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartialIndex {
    pub direction: u128,
    pub shift: usize,
    pub s1: u128,
    pub s2: u128,
}

/// Where minor strip indices start counting.
#[derive(Clone, Copy, Debug)]
pub enum Anchor<'a> {
    /// A cube given by its minimum corner and side.
    Cube { corner: &'a [f64], side: f64 },
    /// The points themselves.
    Points(&'a PointSet),
}

/// How widely to search for witness partitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Search {
    /// Directions adjacent to the pair's direction.
    Nearby,
    /// Every direction that could possibly co-strip the pair (plane and
    /// line); a wider neighborhood in higher dimension.
    Exhaustive,
}

/// A partial index under which two points are co-stripped and minor-separated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Witness {
    pub k: u128,
    /// Length of the pair vector's component orthogonal to θ.
    pub offset: f64,
}

pub(crate) fn choose2(m: u128) -> u128 {
    m * m.saturating_sub(1) / 2
}

impl StripFamily {
    pub fn new(dim: usize, eps: f64, mu: f64, delta: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::EpsOutOfRange { eps, max: 1.0 });
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidDelta(delta));
        }
        let d = dim as f64;
        let major_width = eps * delta / (2.0 * mu);
        let (net, cell_side, shifts, minor_side, per_axis, axes) = match dim {
            0 => return Err(Error::DimensionMismatch { expected: 1, found: 0 }),
            1 => (DirectionNet::Line, major_width, vec![0.0], delta / (2.0 * mu), libm::ceil(2.0 * mu) as u64 + 1, 1),
            2 => (
                direction_net(2, eps / (4.0 * mu))?,
                major_width,
                vec![0.0, eps * delta / (4.0 * mu)],
                delta / (2.0 * mu),
                libm::ceil(2.0 * mu) as u64 + 1,
                1,
            ),
            _ => {
                let side = eps * delta / (2.0 * mu * d);
                (
                    direction_net(dim, eps / (10.0 * mu * d * d))?,
                    side,
                    grid_shift_offsets(dim - 1, side),
                    delta / (2.0 * mu * d),
                    libm::ceil(2.0 * mu * d) as u64 + 1,
                    dim - 1,
                )
            }
        };
        Ok(StripFamily {
            dim,
            eps,
            mu,
            delta,
            net,
            major_width,
            cell_side,
            shifts,
            minor_side,
            minor_per_axis: per_axis,
            minor_count: (per_axis as u128).pow(axes as u32),
        })
    }

    /// |ξ|: directions times shifts.
    pub fn partition_count(&self) -> u128 {
        self.net.len() * self.shifts.len() as u128
    }

    pub fn pair_count(&self) -> u128 {
        choose2(self.minor_count)
    }

    /// Number of partial trees τ.
    pub fn tau(&self) -> u128 {
        self.partition_count() * self.pair_count()
    }

    pub fn decode(&self, k: u128) -> Result<PartialIndex> {
        if k >= self.tau() {
            return Err(Error::IndexOutOfRange { what: "partial tree" });
        }
        let pairs = self.pair_count();
        let (p, pair) = (k / pairs, k % pairs);
        let shifts = self.shifts.len() as u128;
        let m = self.minor_count;
        // largest s1 with prefix(s1) <= pair, prefix(s) = s·m − s(s+1)/2
        let prefix = |s: u128| s * m - s * (s + 1) / 2;
        let (mut lo, mut hi) = (0u128, m - 1);
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if prefix(mid) <= pair {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s1 = if prefix(hi) <= pair && hi < m - 1 { hi } else { lo };
        let s2 = pair - prefix(s1) + s1 + 1;
        Ok(PartialIndex { direction: p / shifts, shift: (p % shifts) as usize, s1, s2 })
    }

    pub fn encode(&self, idx: PartialIndex) -> u128 {
        let m = self.minor_count;
        let (s1, s2) = if idx.s1 < idx.s2 { (idx.s1, idx.s2) } else { (idx.s2, idx.s1) };
        let pair = s1 * m - s1 * (s1 + 1) / 2 + (s2 - s1 - 1);
        (idx.direction * self.shifts.len() as u128 + idx.shift as u128) * self.pair_count() + pair
    }

    /// The coordinate frame of one major partition.
    pub fn frame(&self, direction: u128, shift: usize, anchor: Anchor<'_>) -> Frame {
        let theta = self.net.get(direction).vector;
        let complement = orthonormal_complement(&theta);
        let (major_axes, minor_axes) = match self.dim {
            1 => (Vec::new(), vec![theta.clone()]),
            2 => (complement, vec![theta.clone()]),
            _ => {
                let mut minor = vec![theta.clone()];
                minor.extend(complement[1..].iter().cloned());
                (complement, minor)
            }
        };
        let minor_anchor = minor_axes
            .iter()
            .map(|e| match anchor {
                Anchor::Cube { corner, side } => dot(corner, e) + side * e.iter().map(|&c| c.min(0.0)).sum::<f64>(),
                Anchor::Points(ps) => ps.iter().map(|p| dot(p, e)).fold(f64::INFINITY, f64::min),
            })
            .collect();
        let root_side = if self.dim <= 2 { self.cell_side } else { 2.0 * self.cell_side };
        Frame {
            theta,
            major_axes,
            major_shift: self.shifts[shift],
            cell_side: self.cell_side,
            root_side,
            minor_axes,
            minor_anchor,
            minor_side: self.minor_side,
            minor_per_axis: self.minor_per_axis,
        }
    }

    /// Partial indices under which `a` and `b` share a major strip and lie in
    /// different minor strips, ordered by the orthogonal offset.
    pub fn witnesses(&self, a: &[f64], b: &[f64], anchor: Anchor<'_>, search: Search) -> Vec<Witness> {
        let v: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
        let len = norm(&v);
        if !(len > 0.0) {
            return Vec::new();
        }
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let mut dirs: Vec<u128> = Vec::new();
        for target in [&v, &neg] {
            let base = self.net.nearest(target);
            let radius = match (self.dim, search) {
                (1, _) => 0,
                (2, Search::Nearby) => 2,
                (2, Search::Exhaustive) => {
                    let step = self.eps / (4.0 * self.mu);
                    let window = libm::asin((self.major_width / len).min(1.0));
                    (libm::ceil(window / step) as u32) + 2
                }
                (_, Search::Nearby) => 1,
                (_, Search::Exhaustive) => 2,
            };
            for c in self.net.neighbors(base, radius) {
                if !dirs.contains(&c) {
                    dirs.push(c);
                }
            }
        }
        let mut out = Vec::new();
        for dir in dirs {
            for shift in 0..self.shifts.len() {
                let f = self.frame(dir, shift, anchor);
                if f.major_key(a) != f.major_key(b) {
                    continue;
                }
                let (ma, mb) = (f.minor_index(a), f.minor_index(b));
                if ma == mb {
                    continue;
                }
                let along = dot(&v, &f.theta);
                let offset = libm::sqrt((len * len - along * along).max(0.0));
                let k = self.encode(PartialIndex { direction: dir, shift, s1: ma, s2: mb });
                out.push(Witness { k, offset });
            }
        }
        out.sort_by(|x, y| x.offset.total_cmp(&y.offset).then(x.k.cmp(&y.k)));
        out
    }
}

/// Coordinates of one major partition: strip keys, in-strip positions for
/// the dyadic tries, scores and minor strip indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub theta: Vec<f64>,
    pub major_axes: Vec<Vec<f64>>,
    pub major_shift: f64,
    pub cell_side: f64,
    /// Side of the root interval of the dyadic tries.
    pub root_side: f64,
    pub minor_axes: Vec<Vec<f64>>,
    pub minor_anchor: Vec<f64>,
    pub minor_side: f64,
    pub minor_per_axis: u64,
}

impl Frame {
    pub fn score(&self, x: &[f64]) -> f64 {
        dot(x, &self.theta)
    }

    pub fn major_key(&self, x: &[f64]) -> Vec<i64> {
        self.major_axes.iter().map(|u| libm::floor((dot(x, u) - self.major_shift) / self.cell_side) as i64).collect()
    }

    /// Offsets from the strip's lower sides, in `[0, cell_side)`.
    pub fn in_strip(&self, x: &[f64]) -> Vec<f64> {
        self.major_axes
            .iter()
            .map(|u| {
                let t = (dot(x, u) - self.major_shift) / self.cell_side;
                (t - libm::floor(t)) * self.cell_side
            })
            .collect()
    }

    /// Linear minor index, the θ axis most significant.
    pub fn minor_index(&self, x: &[f64]) -> u128 {
        let top = self.minor_per_axis as f64 - 1.0;
        let mut lin = 0u128;
        for (e, anchor) in self.minor_axes.iter().zip(&self.minor_anchor) {
            let i = libm::floor((dot(x, e) - anchor) / self.minor_side).clamp(0.0, top) as u128;
            lin = lin * self.minor_per_axis as u128 + i;
        }
        lin
    }
}

struct Placed {
    id: u32,
    score: f64,
    key: Vec<i64>,
    pos: Vec<f64>,
    minor: u128,
}

fn place(frame: &Frame, id: u32, x: &[f64]) -> Placed {
    Placed { id, score: frame.score(x), key: frame.major_key(x), pos: frame.in_strip(x), minor: frame.minor_index(x) }
}

/// Score-sorted tree over `items` (already in insertion order); the first
/// item is the root. Returns the root.
fn score_tree(
    items: &[usize],
    placed: &[Placed],
    frame: &Frame,
    strategy: StripTreeStrategy,
    edges: &mut Vec<(u32, u32)>,
) -> Option<usize> {
    let (&root, rest) = items.split_first()?;
    let axes = frame.major_axes.len();
    match strategy {
        StripTreeStrategy::Star => {
            for &x in rest {
                edges.push((placed[x].id, placed[root].id));
            }
        }
        StripTreeStrategy::BalancedScore => heap(items, placed, edges),
        StripTreeStrategy::DyadicBinary | StripTreeStrategy::DyadicKary if axes == 0 => heap(items, placed, edges),
        StripTreeStrategy::DyadicBinary | StripTreeStrategy::DyadicKary => {
            let binary = strategy == StripTreeStrategy::DyadicBinary;
            let fanout = if binary { 2 } else { 1usize << axes };
            struct TrieNode {
                item: usize,
                lo: Vec<f64>,
                hi: Vec<f64>,
                depth: usize,
                slots: Vec<Option<usize>>,
            }
            let mut trie = vec![TrieNode {
                item: root,
                lo: vec![0.0; axes],
                hi: vec![frame.root_side; axes],
                depth: 0,
                slots: vec![None; fanout],
            }];
            for &x in rest {
                let pos = &placed[x].pos;
                let mut at = 0usize;
                loop {
                    let node = &trie[at];
                    let mut lo = node.lo.clone();
                    let mut hi = node.hi.clone();
                    let slot = if binary {
                        let axis = node.depth % axes;
                        let mid = (lo[axis] + hi[axis]) / 2.0;
                        if pos[axis] >= mid {
                            lo[axis] = mid;
                            1
                        } else {
                            hi[axis] = mid;
                            0
                        }
                    } else {
                        let mut s = 0;
                        for axis in 0..axes {
                            let mid = (lo[axis] + hi[axis]) / 2.0;
                            if pos[axis] >= mid {
                                lo[axis] = mid;
                                s |= 1 << axis;
                            } else {
                                hi[axis] = mid;
                            }
                        }
                        s
                    };
                    match node.slots[slot] {
                        Some(next) => at = next,
                        None => {
                            let depth = node.depth + 1;
                            let id = trie.len();
                            trie[at].slots[slot] = Some(id);
                            edges.push((placed[x].id, placed[trie[at].item].id));
                            trie.push(TrieNode { item: x, lo, hi, depth, slots: vec![None; fanout] });
                            break;
                        }
                    }
                }
            }
        }
    }
    Some(root)
}

/// Balanced binary layout: item `i` hangs under item `(i - 1) / 2`.
fn heap(items: &[usize], placed: &[Placed], edges: &mut Vec<(u32, u32)>) {
    for i in 1..items.len() {
        edges.push((placed[items[i]].id, placed[items[(i - 1) / 2]].id));
    }
}

/// Tree on A ∪ B rooted at a* = argmax score over A. Returns a* and the node
/// under which further strip points may hang.
fn pair_tree(
    a_sorted: &[usize],
    b_sorted: &[usize],
    placed: &[Placed],
    frame: &Frame,
    strategy: StripTreeStrategy,
    edges: &mut Vec<(u32, u32)>,
) -> (usize, usize) {
    let a_star = a_sorted[0];
    if strategy == StripTreeStrategy::Star {
        for &x in a_sorted[1..].iter().chain(b_sorted) {
            edges.push((placed[x].id, placed[a_star].id));
        }
        return (a_star, a_star);
    }
    if let Some(ta) = score_tree(&a_sorted[1..], placed, frame, strategy, edges) {
        edges.push((placed[ta].id, placed[a_star].id));
    }
    let tb = score_tree(b_sorted, placed, frame, strategy, edges).expect("B is nonempty");
    edges.push((placed[tb].id, placed[a_star].id));
    (a_star, tb)
}

fn by_score_desc(placed: &[Placed]) -> impl Fn(&usize, &usize) -> core::cmp::Ordering + '_ {
    move |&x, &y| placed[y].score.total_cmp(&placed[x].score).then(placed[x].id.cmp(&placed[y].id))
}

fn by_score_asc(placed: &[Placed]) -> impl Fn(&usize, &usize) -> core::cmp::Ordering + '_ {
    move |&x, &y| placed[x].score.total_cmp(&placed[y].score).then(placed[x].id.cmp(&placed[y].id))
}

/// Edges of the partial tree for minor pair (`s1`, `s2`) on `vertices`.
/// The result spans all vertices.
pub fn partial_tree_edges(
    frame: &Frame,
    vertices: &[(u32, &[f64])],
    s1: u128,
    s2: u128,
    strategy: StripTreeStrategy,
) -> Vec<(u32, u32)> {
    let placed: Vec<Placed> = vertices.iter().map(|&(id, x)| place(frame, id, x)).collect();
    let mut order: Vec<usize> = (0..placed.len()).collect();
    order.sort_by(|&x, &y| placed[x].key.cmp(&placed[y].key).then(placed[x].id.cmp(&placed[y].id)));
    let mut edges = Vec::with_capacity(vertices.len());
    let mut unit_roots = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && placed[order[end]].key == placed[order[start]].key {
            end += 1;
        }
        let strip = &order[start..end];
        let mut a: Vec<usize> = strip.iter().copied().filter(|&x| placed[x].minor == s1).collect();
        let mut b: Vec<usize> = strip.iter().copied().filter(|&x| placed[x].minor == s2).collect();
        let root = if !a.is_empty() && !b.is_empty() {
            a.sort_by(by_score_desc(&placed));
            b.sort_by(by_score_asc(&placed));
            let (a_star, attach) = pair_tree(&a, &b, &placed, frame, strategy, &mut edges);
            let mut rest: Vec<usize> =
                strip.iter().copied().filter(|&x| placed[x].minor != s1 && placed[x].minor != s2).collect();
            rest.sort_by(by_score_desc(&placed));
            if let Some(r) = score_tree(&rest, &placed, frame, strategy, &mut edges) {
                edges.push((placed[r].id, placed[attach].id));
            }
            a_star
        } else {
            let mut all = strip.to_vec();
            all.sort_by(by_score_desc(&placed));
            score_tree(&all, &placed, frame, strategy, &mut edges).expect("strip is nonempty")
        };
        unit_roots.push(root);
        start = end;
    }
    heap(&unit_roots, &placed, &mut edges);
    edges
}

/// Strategy tree on A ∪ B inside one strip, as a standalone tree over the
/// given point ids. A must be nonempty.
pub fn build_strip_pair_tree(
    points: &PointSet,
    a: &[u32],
    b: &[u32],
    frame: &Frame,
    strategy: StripTreeStrategy,
) -> Result<CoverTree> {
    if a.is_empty() {
        return Err(Error::EmptySide);
    }
    let ids: Vec<u32> = a.iter().chain(b).copied().collect();
    let placed: Vec<Placed> = ids.iter().map(|&p| place(frame, p, points.get(p as usize))).collect();
    let mut ai: Vec<usize> = (0..a.len()).collect();
    let mut bi: Vec<usize> = (a.len()..ids.len()).collect();
    ai.sort_by(by_score_desc(&placed));
    bi.sort_by(by_score_asc(&placed));
    let mut edges = Vec::new();
    let root = if bi.is_empty() {
        score_tree(&ai, &placed, frame, strategy, &mut edges).expect("A nonempty")
    } else {
        pair_tree(&ai, &bi, &placed, frame, strategy, &mut edges).0
    };
    Ok(tree_from_edges(points, &ids, placed[root].id, &edges))
}

/// A tree whose node `i` is point `ids[i]`.
pub(crate) fn tree_from_edges(points: &PointSet, ids: &[u32], root: u32, edges: &[(u32, u32)]) -> CoverTree {
    let mut slot = alloc::collections::BTreeMap::new();
    for (i, &p) in ids.iter().enumerate() {
        slot.insert(p, i as u32);
    }
    let mut t = CoverTree {
        nodes: ids.iter().map(|&p| TreeNode { loc: Location::Point(p), level: i32::MIN }).collect(),
        edges: Vec::with_capacity(edges.len()),
        root: slot[&root],
    };
    for &(u, v) in edges {
        t.push_edge(points, slot[&u], slot[&v]);
    }
    t
}

/// A (μ,Δ)-partial cover of a point set of diameter at most Δ. Trees are
/// produced on demand from their index.
#[derive(Clone, Debug)]
pub struct NonSteinerPartialCover {
    pub family: StripFamily,
    pub points: PointSet,
    pub strategy: StripTreeStrategy,
    /// Lexicographically smallest point; every tree is rooted there.
    pub root: u32,
}

/// Partial cover of `x` at scale `delta` (μ = 10·d·√d).
pub fn partial_cover_nonsteiner(
    x: &PointSet,
    delta: f64,
    eps: f64,
    strategy: StripTreeStrategy,
) -> Result<NonSteinerPartialCover> {
    NonSteinerPartialCover::new(x, delta, eps, crate::quadtree::mu_for(x.dim()), strategy)
}

impl NonSteinerPartialCover {
    pub fn new(x: &PointSet, delta: f64, eps: f64, mu: f64, strategy: StripTreeStrategy) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyInput);
        }
        let diameter = x.diameter();
        if diameter > delta * (1.0 + 1e-12) {
            return Err(Error::DiameterExceedsDelta { diameter, delta });
        }
        let family = StripFamily::new(x.dim(), eps, mu, delta)?;
        let mut root = 0u32;
        for i in 1..x.len() as u32 {
            if lex_cmp(x.get(i as usize), x.get(root as usize)).is_lt() {
                root = i;
            }
        }
        Ok(NonSteinerPartialCover { family, points: x.clone(), strategy, root })
    }

    pub fn len(&self) -> u128 {
        self.family.tau()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tree(&self, k: u128) -> Result<CoverTree> {
        let idx = self.family.decode(k)?;
        let frame = self.family.frame(idx.direction, idx.shift, Anchor::Points(&self.points));
        let verts: Vec<(u32, &[f64])> = self.points.iter().enumerate().map(|(i, p)| (i as u32, p)).collect();
        let edges = partial_tree_edges(&frame, &verts, idx.s1, idx.s2, self.strategy);
        let ids: Vec<u32> = (0..self.points.len() as u32).collect();
        Ok(tree_from_edges(&self.points, &ids, self.root, &edges))
    }

    /// Candidate witness trees for a pair of point ids.
    pub fn witnesses(&self, a: u32, b: u32, search: Search) -> Vec<Witness> {
        self.family.witnesses(
            self.points.get(a as usize),
            self.points.get(b as usize),
            Anchor::Points(&self.points),
            search,
        )
    }

    /// Best stretch over the witness candidates of a pair, with its index.
    pub fn best_witness(&self, a: u32, b: u32, search: Search) -> Option<(u128, f64)> {
        let d = dist(self.points.get(a as usize), self.points.get(b as usize));
        let mut best: Option<(u128, f64)> = None;
        for w in self.witnesses(a, b, search) {
            let t = self.tree(w.k).ok()?;
            let s = t.tree_distance(a, b).ok()? / d;
            if best.map_or(true, |(_, b)| s < b) {
                best = Some((w.k, s));
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Direction;

    #[test]
    fn pair_index_round_trip() {
        let f = StripFamily::new(2, 0.1, 28.28, 1.0).unwrap();
        let m = f.minor_count;
        assert_eq!(m, 58);
        let mut k = 0u128;
        for s1 in 0..m {
            for s2 in s1 + 1..m {
                let idx = f.decode(k).unwrap();
                assert_eq!((idx.s1, idx.s2, idx.direction, idx.shift), (s1, s2, 0, 0));
                assert_eq!(f.encode(idx), k);
                k += 1;
            }
        }
        let last = f.tau() - 1;
        let idx = f.decode(last).unwrap();
        assert_eq!(f.encode(idx), last);
        assert!(f.decode(f.tau()).is_err());
    }

    #[test]
    fn plane_family_size() {
        let mu = 20.0 * 2f64.sqrt();
        let f = StripFamily::new(2, 0.1, mu, 1.0).unwrap();
        let dirs = libm::ceil(8.0 * core::f64::consts::PI * mu / 0.1) as u128;
        assert_eq!(f.partition_count(), 2 * dirs);
        assert!((f.major_width - 0.1 / (2.0 * mu)).abs() < 1e-15);
        assert!((f.minor_side - 1.0 / (2.0 * mu)).abs() < 1e-15);
    }

    #[test]
    fn single_edge_star() {
        let pts = PointSet::new(2, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let f = StripFamily::new(2, 0.1, 28.28, 2.0).unwrap();
        let frame = f.frame(0, 0, Anchor::Points(&pts));
        assert_eq!(frame.theta, Direction::new(vec![1.0, 0.0]).unwrap().vector);
        let t = build_strip_pair_tree(&pts, &[0], &[1], &frame, StripTreeStrategy::Star).unwrap();
        assert_eq!(t.edges.len(), 1);
        assert_eq!(t.tree_distance(0, 1).unwrap(), 1.0);
        assert!(build_strip_pair_tree(&pts, &[], &[1], &frame, StripTreeStrategy::Star).is_err());
    }

    #[test]
    fn star_center_is_best_score() {
        let pts = PointSet::new(2, vec![0.0, 0.0, 0.2, 0.001, 0.1, -0.001, 1.0, 0.0, 1.2, 0.0]).unwrap();
        let f = StripFamily::new(2, 0.1, 28.28, 2.0).unwrap();
        let frame = f.frame(0, 0, Anchor::Points(&pts));
        let t = build_strip_pair_tree(&pts, &[0, 1, 2], &[3, 4], &frame, StripTreeStrategy::Star).unwrap();
        let deg = t.node_degrees();
        // a* is point 1 (highest x among A), node index 1
        assert_eq!(deg[1], 4);
        assert!(deg.iter().enumerate().all(|(i, &g)| i == 1 || g == 1));
    }

    #[test]
    fn identical_points_never_witnessed() {
        let f = StripFamily::new(2, 0.1, 28.28, 1.0).unwrap();
        let pts = PointSet::new(2, vec![0.2, 0.2]).unwrap();
        assert!(f.witnesses(&[0.2, 0.2], &[0.2, 0.2], Anchor::Points(&pts), Search::Exhaustive).is_empty());
    }
}
