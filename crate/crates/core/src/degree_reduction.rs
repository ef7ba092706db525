//! Global degree reduction of an assembled tree.
//!
//! Edges are oriented from the endpoint with the lower top level to the one
//! with the higher top level (ties toward the root). The arcs entering a
//! point `u` are grouped by level; every group above the lowest is
//! re-targeted from `u` to the nearest tail of the previous group, so each
//! point keeps at most one group of in-arcs of its own plus one borrowed
//! group per out-arc.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::assembly::AssembledTree;
use crate::geometry::{dist, PointSet};
use crate::tree_model::{CoverTree, Edge, Location};
use crate::{Error, Result};

/// A directed edge with the level of the cell that created it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub from: u32,
    pub to: u32,
    pub level: i32,
}

/// A tree with every edge oriented.
#[derive(Clone, Debug, PartialEq)]
pub struct OrientedTree {
    pub arcs: Vec<Arc>,
    /// Top level of each node (`TreeNode::level`).
    pub top_level: Vec<i32>,
    /// `in_sets[u][level]`: tails of level-`level` arcs into `u`.
    pub in_sets: Vec<BTreeMap<i32, Vec<u32>>>,
}

impl OrientedTree {
    /// Largest out-degree of any node.
    pub fn alpha(&self) -> usize {
        let mut out = vec![0usize; self.top_level.len()];
        for a in &self.arcs {
            out[a.from as usize] += 1;
        }
        out.into_iter().max().unwrap_or(0)
    }

    /// Largest in-set at a single level.
    pub fn beta(&self) -> usize {
        self.in_sets.iter().flat_map(|m| m.values().map(Vec::len)).max().unwrap_or(0)
    }
}

/// Orient `t`; an arc's level is its tail's top level plus `ell`, the level
/// of the cell where the tail stopped being a representative.
pub fn orient(t: &CoverTree, ell: u32) -> Result<OrientedTree> {
    let n = t.nodes.len();
    if n > 1 && t.nodes.iter().any(|x| x.level == i32::MIN) {
        return Err(Error::MissingLevels);
    }
    let metric = t.metric()?;
    let top_level: Vec<i32> = t.nodes.iter().map(|x| x.level).collect();
    let mut arcs = Vec::with_capacity(t.edges.len());
    let mut in_sets = vec![BTreeMap::new(); n];
    for e in &t.edges {
        let (lu, lv) = (top_level[e.u as usize], top_level[e.v as usize]);
        let (from, to) = if lu != lv {
            if lu < lv {
                (e.u, e.v)
            } else {
                (e.v, e.u)
            }
        } else if metric.parent(e.u) == Some(e.v) {
            (e.u, e.v)
        } else {
            (e.v, e.u)
        };
        let level = top_level[from as usize].saturating_add(ell as i32);
        arcs.push(Arc { from, to, level });
        in_sets[to as usize].entry(level).or_insert_with(Vec::new).push(from);
    }
    Ok(OrientedTree { arcs, top_level, in_sets })
}

/// Result of a reduction with the measured orientation parameters.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub tree: CoverTree,
    pub alpha: usize,
    pub beta: usize,
    /// Replaced arcs as (tail, old head, new head).
    pub replaced: Vec<(u32, u32, u32)>,
}

/// Re-target high-level in-arcs. Node locations must be metric points.
pub fn reduce(t: &CoverTree, oriented: &OrientedTree, points: &PointSet) -> Result<Reduced> {
    let loc = |v: u32| -> Result<&[f64]> {
        match &t.nodes[v as usize].loc {
            Location::Point(p) => Ok(points.get(*p as usize)),
            Location::Steiner(_) => Err(Error::NotATree("degree reduction needs metric points".into())),
        }
    };
    // (head, level) -> new head
    let mut target: BTreeMap<(u32, i32), u32> = BTreeMap::new();
    for (u, sets) in oriented.in_sets.iter().enumerate() {
        let u = u as u32;
        let levels: Vec<&i32> = sets.keys().collect();
        for pair in levels.windows(2) {
            let below = &sets[pair[0]];
            let pu = loc(u)?;
            let mut best = below[0];
            let mut best_d = dist(pu, loc(best)?);
            for &w in &below[1..] {
                let d = dist(pu, loc(w)?);
                if d < best_d || (d == best_d && w < best) {
                    best = w;
                    best_d = d;
                }
            }
            target.insert((u, *pair[1]), best);
        }
    }
    let mut edges = Vec::with_capacity(oriented.arcs.len());
    let mut replaced = Vec::new();
    for a in &oriented.arcs {
        let head = match target.get(&(a.to, a.level)) {
            Some(&w) => {
                replaced.push((a.from, a.to, w));
                w
            }
            None => a.to,
        };
        edges.push(Edge { u: a.from, v: head, w: dist(loc(a.from)?, loc(head)?) });
    }
    let tree = CoverTree { nodes: t.nodes.clone(), edges, root: t.root };
    let report = tree.audit(points);
    if !report.is_tree() {
        return Err(Error::NotATree("degree reduction broke the tree".into()));
    }
    Ok(Reduced { tree, alpha: oriented.alpha(), beta: oriented.beta(), replaced })
}

/// Orient and reduce an assembled non-Steiner tree.
pub fn reduce_assembled(t: &AssembledTree, points: &PointSet, ell: u32) -> Result<Reduced> {
    let oriented = orient(&t.tree, ell)?;
    reduce(&t.tree, &oriented, points)
}

/// Largest ratio, over replaced arcs, of the new tree distance between the
/// arc's endpoints to their Euclidean distance.
pub fn replacement_stretch(r: &Reduced, points: &PointSet) -> Result<f64> {
    let metric = r.tree.metric()?;
    let mut worst: f64 = 1.0;
    for &(v, u, _) in &r.replaced {
        let (Location::Point(a), Location::Point(b)) = (&r.tree.nodes[v as usize].loc, &r.tree.nodes[u as usize].loc)
        else {
            continue;
        };
        let d = dist(points.get(*a as usize), points.get(*b as usize));
        if d > 0.0 {
            worst = worst.max(metric.node_distance(v, u) / d);
        }
    }
    Ok(worst)
}
