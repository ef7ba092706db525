//! Partial tree covers with Steiner points: each tree is a star centered at
//! one net point on the middle hyperplane of one axis slab.

use alloc::vec::Vec;

use crate::geometry::{dist, PointSet};
use crate::tree_model::{CoverTree, Edge, Location, TreeNode};
use crate::{Error, Result};

/// Axis slabs of a cube and the Steiner nets on their middle hyperplanes.
#[derive(Clone, Debug, PartialEq)]
pub struct SlabFamily {
    pub dim: usize,
    pub corner: Vec<f64>,
    pub side: f64,
    /// Slabs per axis, ⌈3√d·μ⌉.
    pub slabs_per_axis: u64,
    pub thickness: f64,
    /// Net points per hyperplane axis, ⌈2μ/√ε⌉.
    pub net_per_axis: u64,
    pub spacing: f64,
}

/// Decoded Steiner tree index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlabIndex {
    pub axis: usize,
    pub slab: u64,
    pub net: u128,
}

impl SlabFamily {
    /// Slabs of the cube with minimum corner `corner` and side `side`.
    pub fn new(corner: &[f64], side: f64, eps: f64, mu: f64) -> Result<Self> {
        if !(side > 0.0) || !side.is_finite() {
            return Err(Error::InvalidDelta(side));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::EpsOutOfRange { eps, max: 1.0 });
        }
        let dim = corner.len();
        let slabs = libm::ceil(3.0 * libm::sqrt(dim as f64) * mu) as u64;
        let net = libm::ceil(2.0 * mu / libm::sqrt(eps)) as u64;
        Ok(SlabFamily {
            dim,
            corner: corner.to_vec(),
            side,
            slabs_per_axis: slabs,
            thickness: side / slabs as f64,
            net_per_axis: net,
            spacing: side / net as f64,
        })
    }

    pub fn net_size(&self) -> u128 {
        (self.net_per_axis as u128).pow(self.dim as u32 - 1)
    }

    /// Number of trees, d · slabs · k^(d−1).
    pub fn tau(&self) -> u128 {
        self.dim as u128 * self.slabs_per_axis as u128 * self.net_size()
    }

    pub fn decode(&self, k: u128) -> Result<SlabIndex> {
        if k >= self.tau() {
            return Err(Error::IndexOutOfRange { what: "steiner tree" });
        }
        let net = self.net_size();
        let s = k / net;
        Ok(SlabIndex {
            axis: (s / self.slabs_per_axis as u128) as usize,
            slab: (s % self.slabs_per_axis as u128) as u64,
            net: k % net,
        })
    }

    pub fn encode(&self, idx: SlabIndex) -> u128 {
        (idx.axis as u128 * self.slabs_per_axis as u128 + idx.slab as u128) * self.net_size() + idx.net
    }

    /// Coordinate of a slab's middle hyperplane.
    pub fn midplane(&self, axis: usize, slab: u64) -> f64 {
        self.corner[axis] + (slab as f64 + 0.5) * self.thickness
    }

    /// Location of a Steiner center.
    pub fn center(&self, idx: SlabIndex) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim);
        let mut rest = idx.net;
        let k = self.net_per_axis as u128;
        // hyperplane axes in increasing order, first one most significant
        let mut digits = Vec::with_capacity(self.dim.saturating_sub(1));
        for _ in 1..self.dim {
            digits.push((rest % k) as f64);
            rest /= k;
        }
        digits.reverse();
        let mut next = digits.into_iter();
        for a in 0..self.dim {
            if a == idx.axis {
                out.push(self.midplane(idx.axis, idx.slab));
            } else {
                let i = next.next().expect("one digit per hyperplane axis");
                out.push(self.corner[a] + (i + 0.5) * self.spacing);
            }
        }
        out
    }

    /// Whether some slab midplane strictly separates `a` and `b`.
    pub fn separates(&self, a: &[f64], b: &[f64]) -> bool {
        (0..self.dim).any(|axis| self.separating_slabs(a, b, axis).next().is_some())
    }

    fn separating_slabs(&self, a: &[f64], b: &[f64], axis: usize) -> impl Iterator<Item = u64> + '_ {
        let (lo, hi) = if a[axis] <= b[axis] { (a[axis], b[axis]) } else { (b[axis], a[axis]) };
        let first = libm::ceil((lo - self.corner[axis]) / self.thickness - 0.5).max(0.0) as u64;
        (first..self.slabs_per_axis).take_while(move |&s| self.midplane(axis, s) < hi).filter(move |&s| {
            let m = self.midplane(axis, s);
            lo < m && m < hi
        })
    }

    /// Candidate Steiner trees for a pair: for every separating midplane, the
    /// net point nearest the segment crossing. Ordered by ‖as‖ + ‖sb‖.
    pub fn witnesses(&self, a: &[f64], b: &[f64]) -> Vec<(u128, f64)> {
        let k = self.net_per_axis as u128;
        let mut out = Vec::new();
        for axis in 0..self.dim {
            let slabs: Vec<u64> = self.separating_slabs(a, b, axis).collect();
            for slab in slabs {
                let m = self.midplane(axis, slab);
                let t = (m - a[axis]) / (b[axis] - a[axis]);
                let mut net = 0u128;
                for c in 0..self.dim {
                    if c == axis {
                        continue;
                    }
                    let x = a[c] + t * (b[c] - a[c]);
                    let i = libm::floor((x - self.corner[c]) / self.spacing).clamp(0.0, (k - 1) as f64) as u128;
                    net = net * k + i;
                }
                let idx = SlabIndex { axis, slab, net };
                let s = self.center(idx);
                out.push((self.encode(idx), dist(a, &s) + dist(&s, b)));
            }
        }
        out.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
        out
    }
}

/// Slab family over the cube `[corner, corner + Δ]^d`.
pub fn build_slabs(corner: &[f64], delta: f64, eps: f64, mu: f64) -> Result<SlabFamily> {
    SlabFamily::new(corner, delta, eps, mu)
}

/// A Steiner (μ,Δ)-partial cover of a point set of diameter at most Δ,
/// anchored at the bounding box's minimum corner.
#[derive(Clone, Debug)]
pub struct SteinerPartialCover {
    pub slabs: SlabFamily,
    pub points: PointSet,
}

/// Partial cover of `x` at scale `delta` (μ = 10·d·√d).
pub fn partial_cover_steiner(x: &PointSet, delta: f64, eps: f64) -> Result<SteinerPartialCover> {
    SteinerPartialCover::new(x, delta, eps, crate::quadtree::mu_for(x.dim()))
}

impl SteinerPartialCover {
    pub fn new(x: &PointSet, delta: f64, eps: f64, mu: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyInput);
        }
        let diameter = x.diameter();
        if diameter > delta * (1.0 + 1e-12) {
            return Err(Error::DiameterExceedsDelta { diameter, delta });
        }
        let (lo, _) = x.bounding_box();
        Ok(SteinerPartialCover { slabs: SlabFamily::new(&lo, delta, eps, mu)?, points: x.clone() })
    }

    pub fn len(&self) -> u128 {
        self.slabs.tau()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Star centered at the Steiner point of tree `k` (node 0), one leaf per
    /// point (node `1 + id`).
    pub fn tree(&self, k: u128) -> Result<CoverTree> {
        let idx = self.slabs.decode(k)?;
        let center = self.slabs.center(idx);
        let mut nodes = Vec::with_capacity(self.points.len() + 1);
        nodes.push(TreeNode { loc: Location::Steiner(center.clone()), level: i32::MIN });
        let mut edges = Vec::with_capacity(self.points.len());
        for (i, p) in self.points.iter().enumerate() {
            nodes.push(TreeNode { loc: Location::Point(i as u32), level: i32::MIN });
            edges.push(Edge { u: 0, v: i as u32 + 1, w: dist(&center, p) });
        }
        Ok(CoverTree { nodes, edges, root: 0 })
    }

    pub fn witnesses(&self, a: u32, b: u32) -> Vec<(u128, f64)> {
        self.slabs.witnesses(self.points.get(a as usize), self.points.get(b as usize))
    }
}
