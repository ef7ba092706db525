//! Points, distances, projections, direction nets and the grid/strip
//! partitions every other module consumes.
//!
//! Cells and strips are half-open: a coordinate exactly on a boundary belongs
//! to the higher index. All index computations go through `floor`, so two
//! calls on the same input always agree.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::{Error, Result};

/// A point of R^d.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate { point: 0 });
        }
        Ok(Point { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Indexed points of one dimension, stored flat.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    /// `coords` holds `n * dim` values, point after point.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch { expected: dim, found: coords.len() % dim });
        }
        if let Some(bad) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate { point: bad / dim });
        }
        Ok(PointSet { dim, coords })
    }

    pub fn from_points(points: &[Point]) -> Result<Self> {
        let dim = points.first().map(Point::dim).ok_or(Error::EmptyInput)?;
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
            }
            coords.extend_from_slice(&p.coords);
        }
        PointSet::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn point(&self, i: usize) -> Point {
        Point { coords: self.get(i).to_vec() }
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn raw(&self) -> &[f64] {
        &self.coords
    }

    /// Largest pairwise distance, by brute force.
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for a in 0..n {
            for b in a + 1..n {
                best = best.max(dist(self.get(a), self.get(b)));
            }
        }
        best
    }

    /// Per-axis minimum and maximum.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.iter() {
            for a in 0..self.dim {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        (lo, hi)
    }
}

/// Euclidean distance with a dimension check.
pub fn distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), found: q.len() });
    }
    Ok(dist(p, q))
}

/// Euclidean distance; callers guarantee equal lengths.
#[inline]
pub fn dist(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    libm::sqrt(dist2(p, q))
}

#[inline]
pub fn dist2(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[inline]
pub fn dot(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    p.iter().zip(q).map(|(a, b)| a * b).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    libm::sqrt(dot(v, v))
}

/// Inner product of a point with a direction.
pub fn score(p: &[f64], theta: &Direction) -> Result<f64> {
    if p.len() != theta.dim() {
        return Err(Error::DimensionMismatch { expected: theta.dim(), found: p.len() });
    }
    Ok(dot(p, &theta.vector))
}

/// Lexicographic order on coordinates (total order on floats).
pub fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// A unit vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction {
    pub vector: Vec<f64>,
}

impl Direction {
    /// Normalizes `v`; `None` for the zero vector.
    pub fn new(v: Vec<f64>) -> Option<Self> {
        let n = norm(&v);
        if !(n > 0.0) || !n.is_finite() {
            return None;
        }
        Some(Direction { vector: v.into_iter().map(|x| x / n).collect() })
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    /// Angle in radians to another direction.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        libm::acos(dot(&self.vector, &other.vector).clamp(-1.0, 1.0))
    }
}

/// A deterministic set of directions such that every unit vector is within
/// the construction angle of some member. Members are generated on demand.
#[derive(Clone, Debug, PartialEq)]
pub enum DirectionNet {
    /// The two unit vectors of the line.
    Line,
    /// `count` equally spaced angles `i * step`.
    Circle { count: u128, step: f64 },
    /// Grid points on the 2d facets of [-1, 1]^d, `g` per axis, projected to
    /// the sphere. Index = facet * g^(d-1) + facet-local grid index.
    Cube { dim: usize, g: u64 },
}

/// Build the direction net for dimension `d` and angular resolution `angle`.
pub fn direction_net(d: usize, angle: f64) -> Result<DirectionNet> {
    if !(angle > 0.0 && angle < 1.0) {
        return Err(Error::AngleOutOfRange(angle));
    }
    match d {
        0 => Err(Error::DimensionMismatch { expected: 1, found: 0 }),
        1 => Ok(DirectionNet::Line),
        2 => {
            let count = libm::ceil(2.0 * core::f64::consts::PI / angle) as u128;
            Ok(DirectionNet::Circle { count, step: angle })
        }
        _ => {
            let h = angle / libm::sqrt(d as f64);
            let g = libm::ceil(2.0 / h) as u64 + 1;
            Ok(DirectionNet::Cube { dim: d, g })
        }
    }
}

impl DirectionNet {
    pub fn dim(&self) -> usize {
        match self {
            DirectionNet::Line => 1,
            DirectionNet::Circle { .. } => 2,
            DirectionNet::Cube { dim, .. } => *dim,
        }
    }

    pub fn len(&self) -> u128 {
        match self {
            DirectionNet::Line => 2,
            DirectionNet::Circle { count, .. } => *count,
            DirectionNet::Cube { dim, g } => 2 * (*dim as u128) * (*g as u128).pow(*dim as u32 - 1),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `i`-th member; `i < len()`.
    pub fn get(&self, i: u128) -> Direction {
        match self {
            DirectionNet::Line => Direction { vector: vec![if i == 0 { 1.0 } else { -1.0 }] },
            DirectionNet::Circle { step, .. } => {
                let a = (i as f64) * step;
                Direction { vector: vec![libm::cos(a), libm::sin(a)] }
            }
            DirectionNet::Cube { dim, g } => {
                let (dim, g) = (*dim, *g as u128);
                let per_facet = g.pow(dim as u32 - 1);
                let facet = (i / per_facet) as usize;
                let mut rem = i % per_facet;
                let axis = facet / 2;
                let sign = if facet % 2 == 0 { 1.0 } else { -1.0 };
                let spacing = 2.0 / ((g - 1) as f64);
                let mut v = vec![0.0; dim];
                for (a, slot) in v.iter_mut().enumerate() {
                    if a == axis {
                        *slot = sign;
                    } else {
                        *slot = -1.0 + ((rem % g) as f64) * spacing;
                        rem /= g;
                    }
                }
                Direction::new(v).expect("facet points are nonzero")
            }
        }
    }

    /// Index of a member close to `v` (the nearest for the line and circle;
    /// the rounded facet grid point for the cube, which is within the
    /// coverage angle).
    pub fn nearest(&self, v: &[f64]) -> u128 {
        match self {
            DirectionNet::Line => {
                if v[0] >= 0.0 {
                    0
                } else {
                    1
                }
            }
            DirectionNet::Circle { count, step } => {
                let mut a = libm::atan2(v[1], v[0]);
                if a < 0.0 {
                    a += 2.0 * core::f64::consts::PI;
                }
                let base = (libm::round(a / step) as u128) % count;
                let mut best = base;
                let mut best_dot = f64::NEG_INFINITY;
                for c in [base, (base + 1) % count, (base + count - 1) % count] {
                    let dv = dot(&self.get(c).vector, v);
                    if dv > best_dot || (dv == best_dot && c < best) {
                        best = c;
                        best_dot = dv;
                    }
                }
                best
            }
            DirectionNet::Cube { dim, g } => {
                let (dim, g) = (*dim, *g);
                let mut axis = 0;
                for a in 1..dim {
                    if libm::fabs(v[a]) > libm::fabs(v[axis]) {
                        axis = a;
                    }
                }
                let sign_idx = if v[axis] >= 0.0 { 0 } else { 1 };
                let scale = 1.0 / libm::fabs(v[axis]);
                let mut digits = Vec::with_capacity(dim - 1);
                for (a, &c) in v.iter().enumerate() {
                    if a == axis {
                        continue;
                    }
                    let t = libm::round((c * scale + 1.0) * ((g - 1) as f64) / 2.0);
                    digits.push(t.clamp(0.0, (g - 1) as f64) as u128);
                }
                self.encode_cube(2 * axis + sign_idx, &digits)
            }
        }
    }

    fn encode_cube(&self, facet: usize, digits: &[u128]) -> u128 {
        let (dim, g) = match self {
            DirectionNet::Cube { dim, g } => (*dim, *g as u128),
            _ => unreachable!(),
        };
        let mut idx = 0u128;
        for &dg in digits.iter().rev() {
            idx = idx * g + dg;
        }
        facet as u128 * g.pow(dim as u32 - 1) + idx
    }

    /// Members whose index differs from `i` by at most `radius` steps
    /// (circularly on the circle, per facet-grid coordinate on the cube),
    /// including `i` itself.
    pub fn neighbors(&self, i: u128, radius: u32) -> Vec<u128> {
        match self {
            DirectionNet::Line => vec![i],
            DirectionNet::Circle { count, .. } => {
                let r = (radius as u128).min(count / 2);
                let mut out = Vec::new();
                for off in 0..=2 * r {
                    let c = (i + count + off - r) % count;
                    if !out.contains(&c) {
                        out.push(c);
                    }
                }
                out
            }
            DirectionNet::Cube { dim, g } => {
                let (dim, g) = (*dim, *g as u128);
                let per_facet = g.pow(dim as u32 - 1);
                let facet = (i / per_facet) as usize;
                let mut rem = i % per_facet;
                let mut digits = Vec::with_capacity(dim - 1);
                for _ in 0..dim - 1 {
                    digits.push(rem % g);
                    rem /= g;
                }
                let r = radius as i128;
                let mut out = Vec::new();
                let span = (2 * r + 1) as usize;
                let combos = span.pow(dim as u32 - 1);
                for c in 0..combos {
                    let mut cc = c;
                    let mut nd = Vec::with_capacity(dim - 1);
                    let mut ok = true;
                    for &dg in &digits {
                        let off = (cc % span) as i128 - r;
                        cc /= span;
                        let v = dg as i128 + off;
                        if v < 0 || v >= g as i128 {
                            ok = false;
                            break;
                        }
                        nd.push(v as u128);
                    }
                    if ok {
                        out.push(self.encode_cube(facet, &nd));
                    }
                }
                out
            }
        }
    }
}

/// A partition of R^d into half-open axis-aligned hypercubes.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPartition {
    pub side: f64,
    pub shift: Vec<f64>,
}

impl GridPartition {
    pub fn cell(&self, p: &[f64]) -> Vec<i64> {
        p.iter().zip(&self.shift).map(|(c, s)| libm::floor((c - s) / self.side) as i64).collect()
    }
}

/// `2⌈d/2⌉ + 1` shifted grids of side `(4⌈d/2⌉+2)Δ`; any two points within
/// Δ share a cell in at least one of them.
pub fn shifted_grid_family(d: usize, delta: f64) -> Result<Vec<GridPartition>> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidDelta(delta));
    }
    let half = d.div_ceil(2);
    let side = (4 * half + 2) as f64 * delta;
    let count = 2 * half + 1;
    Ok((0..count).map(|i| GridPartition { side, shift: vec![i as f64 * side / count as f64; d] }).collect())
}

/// Shift offsets used by [`shifted_grid_family`] for cube side `side` in
/// dimension `d`, as multiples applied to every axis.
pub fn grid_shift_offsets(d: usize, side: f64) -> Vec<f64> {
    let count = 2 * d.div_ceil(2) + 1;
    (0..count).map(|i| i as f64 * side / count as f64).collect()
}

/// An orthonormal basis of the hyperplane orthogonal to `theta`.
///
/// In the plane this is the single vector `(-θy, θx)`. In higher dimension
/// the axes least aligned with θ are orthogonalized first.
pub fn orthonormal_complement(theta: &[f64]) -> Vec<Vec<f64>> {
    let d = theta.len();
    match d {
        1 => Vec::new(),
        2 => vec![vec![-theta[1], theta[0]]],
        _ => {
            let mut axes: Vec<usize> = (0..d).collect();
            axes.sort_by(|&a, &b| libm::fabs(theta[a]).total_cmp(&libm::fabs(theta[b])).then(a.cmp(&b)));
            let mut basis: Vec<Vec<f64>> = vec![theta.to_vec()];
            for a in axes {
                if basis.len() == d {
                    break;
                }
                let mut v = vec![0.0; d];
                v[a] = 1.0;
                for b in &basis {
                    let c = dot(&v, b);
                    for (x, y) in v.iter_mut().zip(b) {
                        *x -= c * y;
                    }
                }
                let n = norm(&v);
                if n > 1e-6 {
                    basis.push(v.into_iter().map(|x| x / n).collect());
                }
            }
            basis.remove(0);
            basis
        }
    }
}

/// Strips of direction θ: in the plane, bands of width `width` along θ; in
/// higher dimension, prisms over a hypercube grid of side `cell_side` on the
/// hyperplane orthogonal to θ.
#[derive(Clone, Debug, PartialEq)]
pub struct StripPartition {
    pub theta: Direction,
    pub width: f64,
    pub cell_side: f64,
    pub shift: f64,
    pub basis: Vec<Vec<f64>>,
}

impl StripPartition {
    /// Plane strips (`cell_side == width`) or, for d ≥ 3, prisms whose
    /// spine-to-boundary distance is at most `width / 2`, i.e. hyperplane
    /// cubes of side `width / d`.
    pub fn new(theta: Direction, width: f64, shift: f64) -> Self {
        let d = theta.dim();
        let basis = orthonormal_complement(&theta.vector);
        let cell_side = if d <= 2 { width } else { width / d as f64 };
        StripPartition { theta, width, cell_side, shift, basis }
    }

    /// Index tuple of the strip containing `p` (empty for d = 1, where there
    /// is a single strip).
    pub fn strip_index(&self, p: &[f64]) -> Vec<i64> {
        self.basis.iter().map(|u| libm::floor((dot(p, u) - self.shift) / self.cell_side) as i64).collect()
    }
}

/// Smallest quadtree-style level `w` such that both values share a
/// half-open dyadic cell `floor(x / 2^w)`. Values must differ.
pub fn common_level(a: f64, b: f64) -> i32 {
    debug_assert!(a != b);
    let spread = libm::fabs(a - b);
    let mut w = libm::ilogb(spread);
    while libm::floor(libm::ldexp(a, -w)) != libm::floor(libm::ldexp(b, -w)) {
        w += 1;
    }
    while libm::floor(libm::ldexp(a, -(w - 1))) == libm::floor(libm::ldexp(b, -(w - 1))) {
        w -= 1;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_basics() {
        assert_eq!(distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(distance(&[1.5, -2.0], &[1.5, -2.0]).unwrap(), 0.0);
        assert!(distance(&[0.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn score_basics() {
        let t = Direction::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(score(&[2.0, 0.0], &t).unwrap(), 2.0);
        let t = Direction::new(vec![0.6, 0.8]).unwrap();
        let p = [0.3, -1.2];
        let q = [0.3 + 2.5 * 0.6, -1.2 + 2.5 * 0.8];
        assert!((score(&q, &t).unwrap() - score(&p, &t).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn plane_net_matches_explicit_family() {
        let (eps, mu) = (0.1, 10.0 * 2.0 * libm::sqrt(2.0));
        let angle = eps / (4.0 * mu);
        let net = direction_net(2, angle).unwrap();
        assert_eq!(net.len(), libm::ceil(8.0 * core::f64::consts::PI * mu / eps) as u128);
        for i in [0u128, 1, 17, net.len() - 1] {
            let v = net.get(i);
            let a = i as f64 * angle;
            assert!((v.vector[0] - libm::cos(a)).abs() < 1e-15);
            assert!((v.vector[1] - libm::sin(a)).abs() < 1e-15);
        }
    }

    #[test]
    fn line_net() {
        let net = direction_net(1, 0.3).unwrap();
        assert_eq!(net.len(), 2);
        assert_eq!(net.get(0).vector, vec![1.0]);
        assert_eq!(net.get(1).vector, vec![-1.0]);
        assert!(direction_net(2, 1.5).is_err());
    }

    #[test]
    fn strip_index_examples() {
        let s = StripPartition::new(Direction::new(vec![0.0, 1.0]).unwrap(), 1.0, 0.0);
        // basis is (-1, 0) for θ = (0, 1); use θ = (1, 0) for the hand case.
        let s2 = StripPartition::new(Direction::new(vec![1.0, 0.0]).unwrap(), 1.0, 0.0);
        assert_eq!(s2.strip_index(&[5.0, 3.2]), vec![3]);
        // boundary goes to the higher strip
        assert_eq!(s2.strip_index(&[0.0, 2.0]), vec![2]);
        assert_eq!(s.strip_index(&[-2.0, 9.0]), vec![2]);
    }

    #[test]
    fn grid_family_one_dimensional_example() {
        let fam = shifted_grid_family(1, 1.0).unwrap();
        assert_eq!(fam.len(), 3);
        assert!(fam.iter().any(|g| g.cell(&[0.9]) == g.cell(&[1.7])));
    }

    #[test]
    fn complement_is_orthonormal() {
        let t = Direction::new(vec![0.3, -0.5, 0.8, 0.1]).unwrap();
        let b = orthonormal_complement(&t.vector);
        assert_eq!(b.len(), 3);
        for (i, u) in b.iter().enumerate() {
            assert!(dot(u, &t.vector).abs() < 1e-12);
            assert!((norm(u) - 1.0).abs() < 1e-12);
            for w in &b[i + 1..] {
                assert!(dot(u, w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn common_level_examples() {
        assert_eq!(common_level(0.3, 0.42), -2); // both in [0.25, 0.5)
        assert_eq!(common_level(0.49, 0.51), 0);
        assert_eq!(common_level(5.0, 6.0), 2); // [4, 8)
    }
}
