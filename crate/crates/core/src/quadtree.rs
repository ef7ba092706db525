//! Shifted compressed quadtrees over the input and their contracted views,
//! one per (shift, congruence class of levels).
//!
//! A cell at level `w` is a half-open cube of side `2^w` with integer
//! coordinates `floor(y / 2^w)` of the shifted, translated coordinates `y`.
//! Compressed nodes are keyed by their *split level*: the smallest level at
//! which all of the node's points share a cell. Its children are the groups
//! one level below.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{common_level, dist, lex_cmp, PointSet};
use crate::partial_nonsteiner::StripTreeStrategy;
use crate::tree_model::Mode;
use crate::{Error, Result};

/// Largest accepted user-facing ε (exclusive).
pub const EPS_MAX: f64 = 0.2;
/// Largest accepted internal ε (exclusive).
pub const EPS_INTERNAL_MAX: f64 = 1.0 / 20.0;

/// Parameters shared by every stage of the construction.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverParams {
    pub dim: usize,
    /// User-facing stretch parameter.
    pub eps: f64,
    /// Scaling constant: the construction runs at `eps / scale`.
    pub scale: f64,
    pub eps_internal: f64,
    /// Farness ratio 10·d·√d.
    pub mu: f64,
    /// Per-level tree diameter factor.
    pub gamma: f64,
    /// Levels per congruence class step.
    pub ell: u32,
    /// Number of shifts minus one, 2⌈d/2⌉.
    pub shifts_minus_one: usize,
    pub mode: Mode,
    pub strategy: StripTreeStrategy,
}

impl CoverParams {
    /// Parameters with the library's calibrated scaling constant.
    pub fn new(dim: usize, eps: f64, mode: Mode, strategy: StripTreeStrategy) -> Result<Self> {
        Self::with_scale(dim, eps, mode, strategy, crate::assembly::calibrated_scale(mode, strategy, dim))
    }

    pub fn with_scale(dim: usize, eps: f64, mode: Mode, strategy: StripTreeStrategy, scale: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if !(eps > 0.0 && eps < EPS_MAX) {
            return Err(Error::EpsOutOfRange { eps, max: EPS_MAX });
        }
        let eps_internal = eps / scale;
        if !(eps_internal > 0.0 && eps_internal < EPS_INTERNAL_MAX) {
            return Err(Error::InternalEpsOutOfRange { eps_internal });
        }
        let d = dim as f64;
        let mu = mu_for(dim);
        let gamma = match mode {
            Mode::NonSteiner => nonsteiner_gamma(dim, eps_internal),
            Mode::Steiner => steiner_gamma(dim),
        };
        let ell = libm::ceil(libm::log2(gamma * d * libm::sqrt(d) / eps_internal)).max(1.0) as u32;
        Ok(CoverParams {
            dim,
            eps,
            scale,
            eps_internal,
            mu,
            gamma,
            ell,
            shifts_minus_one: 2 * dim.div_ceil(2),
            mode,
            strategy,
        })
    }

    pub fn shift_count(&self) -> usize {
        self.shifts_minus_one + 1
    }

    /// Diameter of a level-`w` cell, √d·2^w.
    pub fn cell_diameter(&self, level: i32) -> f64 {
        libm::sqrt(self.dim as f64) * libm::ldexp(1.0, level)
    }
}

/// μ = 10·d·√d.
pub fn mu_for(dim: usize) -> f64 {
    let d = dim as f64;
    10.0 * d * libm::sqrt(d)
}

/// Diameter factor of a non-Steiner partial tree: 2·log2(4μd/ε).
pub fn nonsteiner_gamma(dim: usize, eps_internal: f64) -> f64 {
    2.0 * libm::log2(4.0 * mu_for(dim) * dim as f64 / eps_internal)
}

/// Diameter factor of a Steiner star: its center lies in the side-Δ cube, so
/// every leaf is within √d·Δ; at least 3 as in the plane.
pub fn steiner_gamma(dim: usize) -> f64 {
    (2.0 * libm::sqrt(dim as f64)).max(3.0)
}

/// Marks the parent level of a root.
pub const TOP: i32 = i32::MAX;
/// Level stored on leaf nodes.
pub const LEAF: i32 = i32::MIN;
const NONE: u32 = u32::MAX;

/// A node of a compressed quadtree. Points of the node are
/// `order[lo..hi]` of the owning tree.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadNode {
    /// Split level (`LEAF` for single points).
    pub level: i32,
    pub lo: u32,
    pub hi: u32,
    pub parent: u32,
    pub children: Vec<u32>,
    /// Lexicographically smallest point of the node.
    pub min_lex: u32,
}

impl QuadNode {
    pub fn is_leaf(&self) -> bool {
        self.level == LEAF
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.hi == self.lo
    }
}

/// One compressed quadtree over shifted coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressedQuadtree {
    /// Translation added to every (already min-normalized) coordinate.
    pub shift: f64,
    pub nodes: Vec<QuadNode>,
    pub order: Vec<u32>,
    /// Leaf node of every point.
    pub leaf: Vec<u32>,
    pub root: u32,
}

impl CompressedQuadtree {
    fn build(points: &PointSet, origin: &[f64], shift: f64) -> Self {
        let n = points.len();
        let d = points.dim();
        let shifted: Vec<f64> =
            points.iter().flat_map(|p| p.iter().zip(origin).map(move |(c, o)| (c - o) + shift)).collect();
        let y = |p: u32, a: usize| shifted[p as usize * d + a];
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut nodes: Vec<QuadNode> = Vec::with_capacity(2 * n);
        let mut leaf = vec![NONE; n];
        nodes.push(QuadNode { level: LEAF, lo: 0, hi: n as u32, parent: NONE, children: Vec::new(), min_lex: 0 });
        let mut stack = vec![0u32];
        let mut keyed: Vec<(u32, u32)> = Vec::new();
        let mut counts: Vec<u32> = Vec::new();
        let mut ranges: Vec<(u32, u32)> = Vec::new();
        while let Some(id) = stack.pop() {
            let (lo, hi) = (nodes[id as usize].lo as usize, nodes[id as usize].hi as usize);
            if hi - lo == 1 {
                leaf[order[lo] as usize] = id;
                continue;
            }
            // split level: the coarsest axis decides
            let mut level = i32::MIN;
            for a in 0..d {
                let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
                for &p in &order[lo..hi] {
                    mn = mn.min(y(p, a));
                    mx = mx.max(y(p, a));
                }
                if mn != mx {
                    level = level.max(common_level(mn, mx));
                }
            }
            debug_assert!(level != i32::MIN, "coincident points survive deduplication");
            nodes[id as usize].level = level;
            let below = level - 1;
            keyed.clear();
            keyed.extend(order[lo..hi].iter().map(|&p| {
                let mut key = 0u32;
                for a in 0..d {
                    let bit = (libm::floor(libm::ldexp(y(p, a), -below)) as i64).rem_euclid(2) as u32;
                    key |= bit << a;
                }
                (key, p)
            }));
            // The range is sorted by id, so a stable split by key gives (key, id) order.
            ranges.clear();
            if d <= 8 {
                counts.clear();
                counts.resize(1 << d, 0);
                for &(k, _) in &keyed {
                    counts[k as usize] += 1;
                }
                let mut next = lo as u32;
                for c in counts.iter_mut() {
                    (*c, next) = (next, next + *c);
                }
                for &(k, p) in &keyed {
                    order[counts[k as usize] as usize] = p;
                    counts[k as usize] += 1;
                }
                // counts now hold bucket ends
                let mut start = lo as u32;
                for &end in &counts {
                    if end > start {
                        ranges.push((start, end));
                        start = end;
                    }
                }
            } else {
                keyed.sort_unstable();
                for (slot, &(_, p)) in order[lo..hi].iter_mut().zip(&keyed) {
                    *slot = p;
                }
                let mut start = 0;
                for i in 1..=keyed.len() {
                    if i == keyed.len() || keyed[i].0 != keyed[start].0 {
                        ranges.push(((lo + start) as u32, (lo + i) as u32));
                        start = i;
                    }
                }
            }
            for &(start, end) in &ranges {
                let cid = nodes.len() as u32;
                nodes.push(QuadNode { level: LEAF, lo: start, hi: end, parent: id, children: Vec::new(), min_lex: 0 });
                nodes[id as usize].children.push(cid);
                stack.push(cid);
            }
        }
        // min-lex representative, children before parents
        for id in (0..nodes.len()).rev() {
            let node = &nodes[id];
            let best = if node.children.is_empty() {
                order[node.lo as usize]
            } else {
                let mut best = nodes[node.children[0] as usize].min_lex;
                for &c in &node.children[1..] {
                    let cand = nodes[c as usize].min_lex;
                    if lex_cmp(points.get(cand as usize), points.get(best as usize)).then(cand.cmp(&best)).is_lt() {
                        best = cand;
                    }
                }
                best
            };
            nodes[id].min_lex = best;
        }
        CompressedQuadtree { shift, nodes, order, leaf, root: 0 }
    }

    pub fn points_of(&self, node: u32) -> &[u32] {
        let n = &self.nodes[node as usize];
        &self.order[n.lo as usize..n.hi as usize]
    }

    /// Split level of the parent (`TOP` for the root).
    pub fn parent_level(&self, node: u32) -> i32 {
        match self.nodes[node as usize].parent {
            NONE => TOP,
            p => self.nodes[p as usize].level,
        }
    }

    /// Every internal node has at least two children and every point one leaf.
    pub fn is_compressed(&self) -> bool {
        self.nodes.iter().all(|n| n.is_leaf() || n.children.len() >= 2)
    }
}

/// Child of a contracted cell: a smaller nontrivial cell or a single point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViewChild {
    Cell(u32),
    Point(u32),
}

/// A nontrivial cell of a contracted view (it has at least two groups one
/// class step below).
#[derive(Clone, Debug, PartialEq)]
pub struct ViewCell {
    /// Compressed node with the same point set.
    pub node: u32,
    pub level: i32,
    pub parent: Option<u32>,
    pub children: Vec<ViewChild>,
    pub depth: u32,
    /// Integer cell coordinates at `level`.
    pub index: Vec<i64>,
}

/// The contracted quadtree for shift `shift` and class `class`: only levels
/// `w ≡ class (mod ℓ)` survive, and cells with a single group one step below
/// are passed through.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractedView {
    pub shift: usize,
    pub class: u32,
    /// Parents precede children.
    pub cells: Vec<ViewCell>,
    /// Lowest cell holding each point as a direct child (`u32::MAX` when the
    /// view has no cells, i.e. a single point).
    pub point_cell: Vec<u32>,
}

impl ContractedView {
    pub fn root(&self) -> Option<u32> {
        (!self.cells.is_empty()).then_some(0)
    }

    /// Lowest cell containing both points; for `x == y` the lowest cell
    /// containing `x`. `None` only when the view has no cells.
    pub fn lca_cell(&self, x: u32, y: u32) -> Option<u32> {
        let (mut a, mut b) = (*self.point_cell.get(x as usize)?, *self.point_cell.get(y as usize)?);
        if a == NONE || b == NONE {
            return None;
        }
        while self.cells[a as usize].depth > self.cells[b as usize].depth {
            a = self.cells[a as usize].parent?;
        }
        while self.cells[b as usize].depth > self.cells[a as usize].depth {
            b = self.cells[b as usize].parent?;
        }
        while a != b {
            a = self.cells[a as usize].parent?;
            b = self.cells[b as usize].parent?;
        }
        Some(a)
    }

    /// The child of `cell` whose subtree holds point `x`.
    pub fn child_toward(&self, cell: u32, x: u32) -> Option<ViewChild> {
        let mut c = self.point_cell[x as usize];
        if c == cell {
            return Some(ViewChild::Point(x));
        }
        loop {
            let p = self.cells[c as usize].parent?;
            if p == cell {
                return Some(ViewChild::Cell(c));
            }
            c = p;
        }
    }

    /// Ancestors of the point's lowest cell, bottom-up.
    pub fn chain(&self, x: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let mut c = self.point_cell[x as usize];
        if c == NONE {
            return out;
        }
        loop {
            out.push(c);
            match self.cells[c as usize].parent {
                Some(p) => c = p,
                None => return out,
            }
        }
    }
}

/// Result of collapsing duplicates: canonical points plus the map from every
/// input id to its canonical id.
#[derive(Clone, Debug, PartialEq)]
pub struct Dedup {
    pub points: PointSet,
    pub canonical: Vec<u32>,
    /// Input id of each canonical point.
    pub original: Vec<u32>,
}

/// The D+1 shifted compressed quadtrees and their ℓ·(D+1) contracted views.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedQuadtreeFamily {
    pub params: CoverParams,
    pub dedup: Dedup,
    /// Per-axis minimum of the input; cells are computed on `x - origin + ν`.
    pub origin: Vec<f64>,
    /// Largest per-axis extent of the input.
    pub extent: f64,
    pub shifts: Vec<f64>,
    pub trees: Vec<CompressedQuadtree>,
    /// Indexed `shift * ℓ + class`.
    pub views: Vec<ContractedView>,
}

impl ShiftedQuadtreeFamily {
    pub fn build(x: &PointSet, params: &CoverParams) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyInput);
        }
        if x.dim() != params.dim {
            return Err(Error::DimensionMismatch { expected: params.dim, found: x.dim() });
        }
        let (lo, hi) = x.bounding_box();
        let extent = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
        let count = params.shift_count();
        // The shift guarantee needs the shift unit to be commensurate with the
        // dyadic grid: use the smallest power of two strictly above the extent.
        let span = dyadic_span(extent);
        let shifts: Vec<f64> = (0..count).map(|i| i as f64 * span / count as f64).collect();
        let dedup = dedup(x, &lo, &shifts);
        let trees: Vec<CompressedQuadtree> =
            shifts.iter().map(|&s| CompressedQuadtree::build(&dedup.points, &lo, s)).collect();
        let mut views = Vec::with_capacity(count * params.ell as usize);
        for (i, t) in trees.iter().enumerate() {
            for j in 0..params.ell {
                views.push(contract_tree(t, &dedup.points, &lo, i, j, params.ell));
            }
        }
        Ok(ShiftedQuadtreeFamily { params: params.clone(), dedup, origin: lo, extent, shifts, trees, views })
    }

    pub fn points(&self) -> &PointSet {
        &self.dedup.points
    }

    pub fn view(&self, shift: usize, class: u32) -> &ContractedView {
        &self.views[shift * self.params.ell as usize + class as usize]
    }

    /// Shifted coordinate of a canonical point along an axis.
    pub fn shifted(&self, shift: usize, p: &[f64], axis: usize) -> f64 {
        (p[axis] - self.origin[axis]) + self.shifts[shift]
    }

    /// Minimum corner of a view cell in input coordinates.
    pub fn cell_corner(&self, shift: usize, cell: &ViewCell) -> Vec<f64> {
        let side = libm::ldexp(1.0, cell.level);
        cell.index.iter().zip(&self.origin).map(|(&i, o)| i as f64 * side - self.shifts[shift] + o).collect()
    }

    /// Side of the smallest cell (over all shifts) containing both points.
    pub fn smallest_common_side(&self, a: u32, b: u32) -> f64 {
        let pts = self.points();
        let (pa, pb) = (pts.get(a as usize), pts.get(b as usize));
        let mut best = f64::INFINITY;
        for s in 0..self.shifts.len() {
            let mut level = i32::MIN;
            for axis in 0..pts.dim() {
                let (ya, yb) = (self.shifted(s, pa, axis), self.shifted(s, pb, axis));
                if ya != yb {
                    level = level.max(common_level(ya, yb));
                }
            }
            best = best.min(libm::ldexp(1.0, level));
        }
        best
    }
}

/// Smallest power of two strictly greater than `extent` (1 for a single point).
pub fn dyadic_span(extent: f64) -> f64 {
    if !(extent > 0.0) {
        return 1.0;
    }
    let mut e = libm::ceil(libm::log2(extent)) as i32;
    while libm::ldexp(1.0, e) <= extent {
        e += 1;
    }
    while e > i32::MIN + 1 && libm::ldexp(1.0, e - 1) > extent {
        e -= 1;
    }
    libm::ldexp(1.0, e)
}

/// Collapse points that coincide exactly, or after any of the shift
/// translations (a difference below one ulp of the extent).
pub fn dedup(x: &PointSet, origin: &[f64], shifts: &[f64]) -> Dedup {
    let n = x.len();
    let d = x.dim();
    let mut uf: Vec<u32> = (0..n as u32).collect();
    fn find(uf: &mut [u32], mut a: u32) -> u32 {
        while uf[a as usize] != a {
            uf[a as usize] = uf[uf[a as usize] as usize];
            a = uf[a as usize];
        }
        a
    }
    let mut keyed: Vec<(Vec<f64>, u32)> = Vec::with_capacity(n);
    for s in core::iter::once(None).chain(shifts.iter().map(Some)) {
        keyed.clear();
        for (i, p) in x.iter().enumerate() {
            let k: Vec<f64> = match s {
                None => p.to_vec(),
                Some(&s) => (0..d).map(|a| (p[a] - origin[a]) + s).collect(),
            };
            keyed.push((k, i as u32));
        }
        keyed.sort_by(|a, b| lex_cmp(&a.0, &b.0).then(a.1.cmp(&b.1)));
        for w in keyed.windows(2) {
            if w[0].0 == w[1].0 {
                let (ra, rb) = (find(&mut uf, w[0].1), find(&mut uf, w[1].1));
                if ra != rb {
                    let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                    uf[hi as usize] = lo;
                }
            }
        }
    }
    let mut canonical = vec![0u32; n];
    let mut original = Vec::new();
    let mut coords = Vec::new();
    let mut slot = vec![NONE; n];
    for i in 0..n as u32 {
        let r = find(&mut uf, i);
        if slot[r as usize] == NONE {
            slot[r as usize] = original.len() as u32;
            original.push(r);
            coords.extend_from_slice(x.get(r as usize));
        }
        canonical[i as usize] = slot[r as usize];
    }
    Dedup { points: PointSet::new(d, coords).expect("finite input"), canonical, original }
}

/// Level of node `v`'s cell in class `j`, and whether it is nontrivial there.
pub fn class_level(split: i32, parent_split: i32, class: u32, ell: u32) -> (i32, bool) {
    let w = split + (class as i32 - split).rem_euclid(ell as i32);
    (w, w < parent_split)
}

fn contract_tree(
    t: &CompressedQuadtree,
    points: &PointSet,
    origin: &[f64],
    shift: usize,
    class: u32,
    ell: u32,
) -> ContractedView {
    let n = points.len();
    let mut view = ContractedView { shift, class, cells: Vec::new(), point_cell: vec![NONE; n] };
    // (compressed node, enclosing view cell)
    let mut stack: Vec<(u32, u32)> = vec![(t.root, NONE)];
    while let Some((v, enclosing)) = stack.pop() {
        let node = &t.nodes[v as usize];
        if node.is_leaf() {
            let p = t.order[node.lo as usize];
            view.point_cell[p as usize] = enclosing;
            if enclosing != NONE {
                view.cells[enclosing as usize].children.push(ViewChild::Point(p));
            }
            continue;
        }
        let (w, nontrivial) = class_level(node.level, t.parent_level(v), class, ell);
        let mut next = enclosing;
        if nontrivial {
            let id = view.cells.len() as u32;
            let rep = points.get(node.min_lex as usize);
            let index =
                rep.iter().zip(origin).map(|(c, o)| libm::floor(libm::ldexp((c - o) + t.shift, -w)) as i64).collect();
            let depth = if enclosing == NONE { 0 } else { view.cells[enclosing as usize].depth + 1 };
            view.cells.push(ViewCell {
                node: v,
                level: w,
                parent: (enclosing != NONE).then_some(enclosing),
                children: Vec::new(),
                depth,
                index,
            });
            if enclosing != NONE {
                view.cells[enclosing as usize].children.push(ViewChild::Cell(id));
            }
            next = id;
        }
        for &c in node.children.iter().rev() {
            stack.push((c, next));
        }
    }
    view
}

/// Minimum over shifts of the smallest common cell side, divided by the
/// distance (the shifted-quadtree guarantee says at most 4⌈d/2⌉+2).
pub fn common_cell_ratio(f: &ShiftedQuadtreeFamily, a: u32, b: u32) -> f64 {
    let pts = f.points();
    f.smallest_common_side(a, b) / dist(pts.get(a as usize), pts.get(b as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(d: usize) -> CoverParams {
        CoverParams::new(d, 0.1, Mode::NonSteiner, StripTreeStrategy::DyadicBinary).unwrap()
    }

    #[test]
    fn class_level_hand_trace() {
        // a compressed path at split levels 5, 7, 9 with ℓ = 2, class 1: each
        // node's class level is its split level and all stay nontrivial
        assert_eq!(class_level(5, 7, 1, 2), (5, true));
        assert_eq!(class_level(7, 9, 1, 2), (7, true));
        assert_eq!(class_level(9, TOP, 1, 2), (9, true));
        // with ℓ = 1 every split level survives
        for s in -4..4 {
            assert_eq!(class_level(s, s + 1, 0, 1), (s, true));
        }
    }

    #[test]
    fn single_point_family() {
        let x = PointSet::new(2, vec![0.3, 0.7]).unwrap();
        let f = ShiftedQuadtreeFamily::build(&x, &params(2)).unwrap();
        assert_eq!(f.trees.len(), 3);
        for t in &f.trees {
            assert_eq!(t.nodes.len(), 1);
            assert!(t.nodes[0].is_leaf());
        }
        assert!(f.views.iter().all(|v| v.cells.is_empty()));
    }

    #[test]
    fn duplicates_collapse() {
        let x = PointSet::new(1, vec![0.5, 0.25, 0.5, 0.75]).unwrap();
        let f = ShiftedQuadtreeFamily::build(&x, &params(1)).unwrap();
        assert_eq!(f.points().len(), 3);
        assert_eq!(f.dedup.canonical, vec![0, 1, 0, 2]);
    }

    #[test]
    fn one_dimensional_example() {
        let x = PointSet::new(1, vec![0.30, 0.42]).unwrap();
        let f = ShiftedQuadtreeFamily::build(&x, &params(1)).unwrap();
        assert_eq!(f.shifts.len(), 3);
        assert!(f.smallest_common_side(0, 1) <= 0.72);
    }

    #[test]
    fn empty_input_rejected() {
        let x = PointSet::new(2, vec![]).unwrap();
        assert_eq!(ShiftedQuadtreeFamily::build(&x, &params(2)).unwrap_err(), Error::EmptyInput);
    }

    #[test]
    fn eps_validation() {
        assert!(CoverParams::new(2, 0.5, Mode::NonSteiner, StripTreeStrategy::DyadicBinary).is_err());
        assert!(CoverParams::new(2, 0.0, Mode::NonSteiner, StripTreeStrategy::DyadicBinary).is_err());
        let p = params(2);
        assert_eq!(p.shifts_minus_one, 2);
        assert!((p.mu - 20.0 * 2f64.sqrt()).abs() < 1e-12);
    }
}
