//! Hierarchical assembly of the full cover from per-cell partial covers.
//!
//! The cover is implicit: tree `(i, j, k)` is assembled on demand by walking
//! the contracted view `(i, j)` bottom-up and, at every cell, joining the
//! representatives exported by its children with partial tree `k` of that
//! cell. The cell then exports its own representative.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{dist, lex_cmp, PointSet};
use crate::partial_nonsteiner::{partial_tree_edges, Anchor, Search, StripFamily, StripTreeStrategy};
use crate::partial_steiner::SlabFamily;
use crate::quadtree::{CoverParams, ShiftedQuadtreeFamily, ViewChild};
use crate::tree_model::{CoverTree, Edge, ExplicitCover, Location, Mode, TreeId, TreeNode};
use crate::{Error, Result};

/// The scaling constant C (the construction runs at ε/C).
///
/// 4 is the smallest value that keeps the internal ε below 1/20 for every
/// accepted user ε. `tests/calibration.rs` checks that it leaves a margin
/// (measured stretch at most 1 + ε/2) on random instances in every mode.
pub fn calibrated_scale(mode: Mode, strategy: StripTreeStrategy, dim: usize) -> f64 {
    let _ = (mode, strategy, dim);
    4.0
}

/// Whether to run global degree reduction after assembly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegreeReduction {
    None,
    Global,
}

impl DegreeReduction {
    pub fn name(self) -> &'static str {
        match self {
            DegreeReduction::None => "none",
            DegreeReduction::Global => "global",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(DegreeReduction::None),
            "global" => Some(DegreeReduction::Global),
            _ => None,
        }
    }
}

/// Deterministic representative choice: the lexicographically smallest
/// location, ties by id.
pub fn select_representative(candidates: &[(u32, &[f64])]) -> Result<u32> {
    candidates.iter().min_by(|a, b| lex_cmp(a.1, b.1).then(a.0.cmp(&b.0))).map(|c| c.0).ok_or(Error::EmptyCandidates)
}

/// Join finished pieces with a partial tree on their roots, identifying each
/// partial-tree node with the piece root at the same location.
pub fn merge_level(points: &PointSet, pieces: &[CoverTree], partial: &CoverTree) -> Result<CoverTree> {
    let roots: Vec<&Location> = pieces.iter().map(|t| &t.nodes[t.root as usize].loc).collect();
    if partial.nodes.len() != roots.len() {
        return Err(Error::NotATree("partial tree vertices differ from the piece roots".into()));
    }
    let mut out = CoverTree { nodes: Vec::new(), edges: Vec::new(), root: 0 };
    let mut root_slot = Vec::with_capacity(pieces.len());
    for t in pieces {
        let base = out.nodes.len() as u32;
        out.nodes.extend(t.nodes.iter().cloned());
        out.edges.extend(t.edges.iter().map(|e| Edge { u: e.u + base, v: e.v + base, w: e.w }));
        root_slot.push(base + t.root);
    }
    let mut map = vec![u32::MAX; partial.nodes.len()];
    for (i, n) in partial.nodes.iter().enumerate() {
        let hit =
            roots.iter().position(|r| **r == n.loc).ok_or(Error::NotATree("vertex is not a piece root".into()))?;
        if map.contains(&(hit as u32)) {
            return Err(Error::NotATree("two vertices share a piece root".into()));
        }
        map[i] = hit as u32;
    }
    for e in &partial.edges {
        let (u, v) = (root_slot[map[e.u as usize] as usize], root_slot[map[e.v as usize] as usize]);
        out.push_edge(points, u, v);
    }
    out.root = root_slot[map[partial.root as usize] as usize];
    Ok(out)
}

/// A materialized tree over the canonical points, with the bookkeeping the
/// audits and degree reduction need.
#[derive(Clone, Debug)]
pub struct AssembledTree {
    pub id: TreeId,
    /// Node `p` is canonical point `p`; Steiner nodes follow.
    pub tree: CoverTree,
    /// Per view cell: edges `[start, end)` form the cell's piece.
    pub pieces: Vec<(u32, u32)>,
    /// Per view cell: node exported upward.
    pub representative: Vec<u32>,
    pub levels: Vec<i32>,
}

/// A view in which a pair is separated at its lowest common cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FarView {
    pub shift: usize,
    pub class: u32,
    pub cell: u32,
    pub level: i32,
    /// Representatives of the children holding the two points.
    pub a_rep: u32,
    pub b_rep: u32,
    /// Representative distance over the cell diameter.
    pub score: f64,
}

/// The implicit cover: every tree is a pure function of its id.
#[derive(Clone, Debug)]
pub struct ImplicitCover {
    pub params: CoverParams,
    pub input: PointSet,
    pub family: ShiftedQuadtreeFamily,
    /// Partial trees per cell.
    pub tau: u128,
}

/// Partial trees per cell for the given parameters.
pub fn partial_count(params: &CoverParams) -> Result<u128> {
    Ok(match params.mode {
        Mode::NonSteiner => StripFamily::new(params.dim, params.eps_internal, params.mu, 1.0)?.tau(),
        Mode::Steiner => SlabFamily::new(&vec![0.0; params.dim], 1.0, params.eps_internal, params.mu)?.tau(),
    })
}

/// Build the implicit cover of `x`.
pub fn build_tree_cover(x: &PointSet, params: &CoverParams) -> Result<ImplicitCover> {
    ImplicitCover::build(x, params)
}

impl ImplicitCover {
    pub fn build(x: &PointSet, params: &CoverParams) -> Result<Self> {
        let family = ShiftedQuadtreeFamily::build(x, params)?;
        Ok(ImplicitCover { params: params.clone(), input: x.clone(), tau: partial_count(params)?, family })
    }

    /// (D+1)·ℓ·τ.
    pub fn tree_count(&self) -> u128 {
        self.params.shift_count() as u128 * self.params.ell as u128 * self.tau
    }

    pub fn id_at(&self, index: u128) -> Result<TreeId> {
        if index >= self.tree_count() {
            return Err(Error::IndexOutOfRange { what: "tree" });
        }
        let view = index / self.tau;
        let ell = self.params.ell as u128;
        Ok(TreeId { shift: (view / ell) as u32, class: (view % ell) as u32, k: index % self.tau })
    }

    pub fn index_of(&self, id: TreeId) -> u128 {
        (id.shift as u128 * self.params.ell as u128 + id.class as u128) * self.tau + id.k
    }

    fn check(&self, id: TreeId) -> Result<()> {
        if id.shift as usize >= self.params.shift_count() || id.class >= self.params.ell || id.k >= self.tau {
            return Err(Error::IndexOutOfRange { what: "tree" });
        }
        Ok(())
    }

    pub fn points(&self) -> &PointSet {
        self.family.points()
    }

    /// Strip family of a cell at `level`.
    pub fn strip_family(&self, level: i32) -> Result<StripFamily> {
        StripFamily::new(self.params.dim, self.params.eps_internal, self.params.mu, self.params.cell_diameter(level))
    }

    /// Slab family of a cell with the given corner and level.
    pub fn slab_family(&self, corner: &[f64], level: i32) -> Result<SlabFamily> {
        SlabFamily::new(corner, libm::ldexp(1.0, level), self.params.eps_internal, self.params.mu)
    }

    /// Assemble tree `id` over the canonical points.
    pub fn assemble(&self, id: TreeId) -> Result<AssembledTree> {
        self.check(id)?;
        let pts = self.points();
        let n = pts.len();
        let view = self.family.view(id.shift as usize, id.class);
        let ell = self.params.ell as i32;
        let mut tree = CoverTree {
            nodes: (0..n as u32).map(|p| TreeNode { loc: Location::Point(p), level: i32::MIN }).collect(),
            edges: Vec::with_capacity(n + view.cells.len()),
            root: 0,
        };
        let cells = view.cells.len();
        let mut pieces = vec![(0u32, 0u32); cells];
        let mut representative = vec![0u32; cells];
        let mut levels = Vec::with_capacity(cells);
        // Steiner centers and their locations, per cell
        let mut center_loc: Vec<Vec<f64>> = vec![Vec::new(); cells];
        for c in (0..cells).rev() {
            let cell = &view.cells[c];
            let w = cell.level;
            let start = cell
                .children
                .iter()
                .filter_map(|ch| match ch {
                    ViewChild::Cell(s) => Some(pieces[*s as usize].0),
                    ViewChild::Point(_) => None,
                })
                .min()
                .unwrap_or(tree.edges.len() as u32)
                .min(tree.edges.len() as u32);
            let corner = self.family.cell_corner(id.shift as usize, cell);
            match self.params.mode {
                Mode::NonSteiner => {
                    let verts: Vec<(u32, &[f64])> = cell
                        .children
                        .iter()
                        .map(|ch| {
                            let p = match *ch {
                                ViewChild::Cell(s) => representative[s as usize],
                                ViewChild::Point(p) => p,
                            };
                            (p, pts.get(p as usize))
                        })
                        .collect();
                    let rep = select_representative(&verts)?;
                    let fam = self.strip_family(w)?;
                    let idx = fam.decode(id.k)?;
                    let frame = fam.frame(
                        idx.direction,
                        idx.shift,
                        Anchor::Cube { corner: &corner, side: libm::ldexp(1.0, w) },
                    );
                    for (u, v) in partial_tree_edges(&frame, &verts, idx.s1, idx.s2, self.params.strategy) {
                        tree.push_edge(pts, u, v);
                    }
                    for &(p, _) in &verts {
                        let lvl = if p == rep { w } else { w - ell };
                        let slot = &mut tree.nodes[p as usize].level;
                        *slot = (*slot).max(lvl);
                    }
                    representative[c] = rep;
                }
                Mode::Steiner => {
                    let slabs = self.slab_family(&corner, w)?;
                    let center = slabs.center(slabs.decode(id.k)?);
                    let node = tree.nodes.len() as u32;
                    tree.nodes.push(TreeNode { loc: Location::Steiner(center.clone()), level: w });
                    for ch in &cell.children {
                        let (child, at): (u32, &[f64]) = match *ch {
                            ViewChild::Cell(s) => (representative[s as usize], &center_loc[s as usize]),
                            ViewChild::Point(p) => {
                                tree.nodes[p as usize].level = w - ell;
                                (p, pts.get(p as usize))
                            }
                        };
                        let weight = dist(&center, at);
                        tree.edges.push(Edge { u: node, v: child, w: weight });
                    }
                    center_loc[c] = center;
                    representative[c] = node;
                }
            }
            pieces[c] = (start, tree.edges.len() as u32);
            levels.push(w);
        }
        levels.reverse();
        tree.root = if cells == 0 { 0 } else { representative[0] };
        Ok(AssembledTree { id, tree, pieces, representative, levels })
    }

    /// Tree `id` over the input ids, optionally degree-reduced. Duplicates of
    /// a canonical point hang off it as leaves.
    pub fn tree(&self, id: TreeId, reduction: DegreeReduction) -> Result<CoverTree> {
        let assembled = self.assemble(id)?;
        let tree = match (reduction, self.params.mode) {
            (DegreeReduction::Global, Mode::NonSteiner) => {
                crate::degree_reduction::reduce_assembled(&assembled, self.points(), self.params.ell)?.tree
            }
            _ => assembled.tree,
        };
        Ok(self.expand_duplicates(tree))
    }

    /// Rewrite canonical ids to input ids and attach duplicates.
    pub fn expand_duplicates(&self, mut tree: CoverTree) -> CoverTree {
        let dd = &self.family.dedup;
        let mut node_of = vec![u32::MAX; dd.original.len()];
        for (i, node) in tree.nodes.iter_mut().enumerate() {
            if let Location::Point(p) = node.loc {
                node_of[p as usize] = i as u32;
                node.loc = Location::Point(dd.original[p as usize]);
            }
        }
        for (input, &c) in dd.canonical.iter().enumerate() {
            if dd.original[c as usize] as usize != input && node_of[c as usize] != u32::MAX {
                let anchor = node_of[c as usize];
                let node = tree.nodes.len() as u32;
                let level = tree.nodes[anchor as usize].level;
                tree.nodes.push(TreeNode { loc: Location::Point(input as u32), level });
                tree.push_edge(&self.input, anchor, node);
            }
        }
        tree
    }

    /// Views in which the pair's lowest common cell sees the two child
    /// representatives as far, best (largest distance over cell diameter)
    /// first.
    pub fn far_views(&self, a: u32, b: u32) -> Vec<FarView> {
        let pts = self.points();
        let mut out = Vec::new();
        for shift in 0..self.params.shift_count() {
            for class in 0..self.params.ell {
                let view = self.family.view(shift, class);
                let Some(cell) = view.lca_cell(a, b) else { continue };
                let rep = |x: u32| match view.child_toward(cell, x) {
                    Some(ViewChild::Cell(c)) => {
                        self.family.trees[shift].nodes[view.cells[c as usize].node as usize].min_lex
                    }
                    _ => x,
                };
                let (ra, rb) = (rep(a), rep(b));
                let level = view.cells[cell as usize].level;
                let diameter = self.params.cell_diameter(level);
                let gap = dist(pts.get(ra as usize), pts.get(rb as usize));
                if gap >= diameter / self.params.mu {
                    out.push(FarView { shift, class, cell, level, a_rep: ra, b_rep: rb, score: gap / diameter });
                }
            }
        }
        out.sort_by(|x, y| y.score.total_cmp(&x.score).then((x.shift, x.class).cmp(&(y.shift, y.class))));
        out
    }

    /// Candidate witness trees of a far view, best first, at most `cap`.
    pub fn view_witnesses(&self, fv: &FarView, search: Search, cap: usize) -> Result<Vec<TreeId>> {
        let pts = self.points();
        let view = self.family.view(fv.shift, fv.class);
        let cell = &view.cells[fv.cell as usize];
        let corner = self.family.cell_corner(fv.shift, cell);
        let (a, b) = (pts.get(fv.a_rep as usize), pts.get(fv.b_rep as usize));
        let ks: Vec<u128> = match self.params.mode {
            Mode::NonSteiner => {
                let fam = self.strip_family(fv.level)?;
                let anchor = Anchor::Cube { corner: &corner, side: libm::ldexp(1.0, fv.level) };
                fam.witnesses(a, b, anchor, search).into_iter().map(|w| w.k).collect()
            }
            Mode::Steiner => self.slab_family(&corner, fv.level)?.witnesses(a, b).into_iter().map(|w| w.0).collect(),
        };
        Ok(ks.into_iter().take(cap).map(|k| TreeId { shift: fv.shift as u32, class: fv.class, k }).collect())
    }

    /// Every tree, when there are at most `limit` of them.
    pub fn explicit(&self, reduction: DegreeReduction, limit: u128) -> Result<ExplicitCover> {
        let count = self.tree_count();
        if count > limit {
            return Err(Error::IndexOutOfRange { what: "explicit cover size" });
        }
        let mut trees = Vec::with_capacity(count as usize);
        for index in 0..count {
            let id = self.id_at(index)?;
            trees.push((id, self.tree(id, reduction)?));
        }
        Ok(ExplicitCover { dim: self.params.dim, eps: self.params.eps, mode: self.params.mode, trees })
    }
}

/// Diameter of every assembled piece, with its level.
pub fn piece_diameters(t: &AssembledTree) -> Vec<(i32, f64)> {
    let nodes = t.tree.nodes.len();
    let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); nodes];
    let mut dist_to = vec![f64::NAN; nodes];
    let mut out = Vec::with_capacity(t.pieces.len());
    for (c, &(start, end)) in t.pieces.iter().enumerate() {
        let edges = &t.tree.edges[start as usize..end as usize];
        let mut touched = Vec::new();
        for e in edges {
            for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                if adj[a as usize].is_empty() {
                    touched.push(a);
                }
                adj[a as usize].push((b, e.w));
            }
        }
        let sweep = |from: u32, dist_to: &mut Vec<f64>| -> (u32, f64) {
            let mut stack = vec![from];
            dist_to[from as usize] = 0.0;
            let mut far = (from, 0.0);
            let mut seen = vec![from];
            while let Some(u) = stack.pop() {
                let du = dist_to[u as usize];
                if du > far.1 {
                    far = (u, du);
                }
                for &(v, w) in &adj[u as usize] {
                    if dist_to[v as usize].is_nan() {
                        dist_to[v as usize] = du + w;
                        seen.push(v);
                        stack.push(v);
                    }
                }
            }
            for v in seen {
                dist_to[v as usize] = f64::NAN;
            }
            far
        };
        let diameter = if edges.is_empty() {
            0.0
        } else {
            let (a, _) = sweep(t.representative[c], &mut dist_to);
            sweep(a, &mut dist_to).1
        };
        out.push((t.levels[c], diameter));
        for a in touched {
            adj[a as usize].clear();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn representative_is_lex_smallest() {
        let a = [1.0, 0.0];
        let b = [0.0, 1.0];
        assert_eq!(select_representative(&[(0, &a), (1, &b)]).unwrap(), 1);
        assert_eq!(select_representative(&[(1, &b), (0, &a)]).unwrap(), 1);
        assert_eq!(select_representative(&[(4, &a)]).unwrap(), 4);
        assert!(select_representative(&[]).is_err());
    }

    #[test]
    fn merge_two_pieces() {
        let pts = PointSet::new(1, vec![0.0, 1.0, 5.0, 6.0]).unwrap();
        let mut left = CoverTree::single(0);
        left.nodes.push(TreeNode { loc: Location::Point(1), level: 0 });
        left.push_edge(&pts, 0, 1);
        let mut right = CoverTree::single(2);
        right.nodes.push(TreeNode { loc: Location::Point(3), level: 0 });
        right.push_edge(&pts, 0, 1);
        let mut partial = CoverTree::single(2);
        partial.nodes.push(TreeNode { loc: Location::Point(0), level: 0 });
        partial.push_edge(&pts, 0, 1);
        let merged = merge_level(&pts, &[left, right], &partial).unwrap();
        assert_eq!((merged.nodes.len(), merged.edges.len()), (4, 3));
        assert!(merged.audit(&pts).is_tree());
        assert_eq!(merged.tree_distance(1, 3).unwrap(), 7.0);
    }

    #[test]
    fn single_point_cover() {
        let pts = PointSet::new(2, vec![0.5, 0.5]).unwrap();
        let params = CoverParams::new(2, 0.1, Mode::NonSteiner, StripTreeStrategy::DyadicBinary).unwrap();
        let cover = build_tree_cover(&pts, &params).unwrap();
        assert_eq!(cover.tree_count(), 3 * params.ell as u128 * cover.tau);
        let t = cover.tree(cover.id_at(cover.tree_count() - 1).unwrap(), DegreeReduction::Global).unwrap();
        assert_eq!((t.nodes.len(), t.edges.len()), (1, 0));
    }
}
