//! Brute-force oracles and audits.
//!
//! [`stretch_oracle`] is exact over an explicit list of trees. The full cover
//! is far too large to enumerate at practical ε, so [`implicit_stretch`]
//! assembles only candidate witness trees per pair and reports, per pair, the
//! best stretch among them: an upper bound on the true cover stretch.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::assembly::{piece_diameters, DegreeReduction, ImplicitCover};
use crate::geometry::{dist, PointSet};
use crate::partial_nonsteiner::Search;
use crate::tree_model::{CoverTree, ExplicitCover, TreeId, TreeMetric};
use crate::{Error, Result};

/// Exact stretch of an explicit cover.
#[derive(Clone, Debug, PartialEq)]
pub struct StretchReport {
    pub max_stretch: f64,
    pub witness_pair: Option<(u32, u32)>,
    /// Per pair `(a, b)` with `a < b`: index of the best tree and its stretch.
    pub per_pair_best: BTreeMap<(u32, u32), (usize, f64)>,
}

/// Max over pairs of the min over trees of tree distance over distance.
/// Pairs at distance zero are skipped.
pub fn stretch_oracle(points: &PointSet, trees: &[CoverTree]) -> Result<StretchReport> {
    pair_stretch(points, trees, &all_pairs(points.len()))
}

/// [`stretch_oracle`] restricted to the given pairs.
pub fn pair_stretch(points: &PointSet, trees: &[CoverTree], pairs: &[(u32, u32)]) -> Result<StretchReport> {
    let metrics: Vec<TreeMetric> = trees.iter().map(|t| t.metric()).collect::<Result<_>>()?;
    let mut report = StretchReport { max_stretch: 1.0, witness_pair: None, per_pair_best: BTreeMap::new() };
    for &(a, b) in pairs {
        let (a, b) = (a.min(b), a.max(b));
        let d = dist(points.get(a as usize), points.get(b as usize));
        if d == 0.0 {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (i, m) in metrics.iter().enumerate() {
            if m.copies(a).is_empty() || m.copies(b).is_empty() {
                continue;
            }
            let s = m.point_distance(a, b)? / d;
            if best.map_or(true, |(_, x)| s < x) {
                best = Some((i, s));
            }
        }
        let best = best.ok_or(Error::UncoveredPair { a, b })?;
        if best.1 > report.max_stretch || report.witness_pair.is_none() {
            report.max_stretch = report.max_stretch.max(best.1);
            report.witness_pair = Some((a, b));
        }
        report.per_pair_best.insert((a, b), best);
    }
    Ok(report)
}

/// Exact oracle over an explicit cover.
pub fn cover_stretch(points: &PointSet, cover: &ExplicitCover) -> Result<StretchReport> {
    let trees: Vec<CoverTree> = cover.trees.iter().map(|(_, t)| t.clone()).collect();
    stretch_oracle(points, &trees)
}

/// Pairs at distance in `[Δ/μ, Δ]`.
pub fn far_pairs(points: &PointSet, mu: f64, delta: f64) -> Vec<(u32, u32)> {
    let n = points.len() as u32;
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let d = dist(points.get(a as usize), points.get(b as usize));
            if d >= delta / mu && d <= delta {
                out.push((a, b));
            }
        }
    }
    out
}

/// Outcome of [`partial_oracle`].
#[derive(Clone, Debug, PartialEq)]
pub enum PartialVerdict {
    Pass { far_pairs: usize },
    Fail { pair: (u32, u32), best_stretch: f64 },
}

/// Every far pair must have a tree with stretch at most `1 + eps`.
pub fn partial_oracle(points: &PointSet, trees: &[CoverTree], mu: f64, delta: f64, eps: f64) -> Result<PartialVerdict> {
    let pairs = far_pairs(points, mu, delta);
    let metrics: Vec<TreeMetric> = trees.iter().map(|t| t.metric()).collect::<Result<_>>()?;
    for &(a, b) in &pairs {
        let d = dist(points.get(a as usize), points.get(b as usize));
        let mut best = f64::INFINITY;
        for m in &metrics {
            if !m.copies(a).is_empty() && !m.copies(b).is_empty() {
                best = best.min(m.point_distance(a, b)? / d);
            }
        }
        if best > 1.0 + eps {
            return Ok(PartialVerdict::Fail { pair: (a, b), best_stretch: best });
        }
    }
    Ok(PartialVerdict::Pass { far_pairs: pairs.len() })
}

/// Per-pair upper bound from [`implicit_stretch`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairBound {
    /// Input ids.
    pub a: u32,
    pub b: u32,
    pub stretch: f64,
    pub tree: Option<TreeId>,
}

/// Result of [`implicit_stretch`].
#[derive(Clone, Debug, PartialEq)]
pub struct ImplicitReport {
    /// Max over pairs of the best stretch found: an upper bound on the
    /// cover's stretch for these pairs.
    pub max_stretch: f64,
    pub worst: Option<PairBound>,
    pub pairs: Vec<PairBound>,
    pub trees_assembled: usize,
}

/// Search schedule: each round retries pairs still above the target with
/// more views and more candidates per view.
const ROUNDS: [(usize, usize, Search); 3] =
    [(1, 1, Search::Nearby), (3, 4, Search::Nearby), (usize::MAX, 64, Search::Exhaustive)];

/// Upper-bound stretch oracle over selected input pairs of an implicit cover.
///
/// `threads` is used only with the `std` feature.
pub fn implicit_stretch(
    cover: &ImplicitCover,
    reduction: DegreeReduction,
    pairs: &[(u32, u32)],
    target: f64,
    threads: usize,
) -> Result<ImplicitReport> {
    let dd = &cover.family.dedup;
    let pts = cover.points();
    // canonical pairs, distinct points only
    let mut canon: Vec<(u32, u32, f64)> = Vec::new();
    let mut slot: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    let mut out: Vec<PairBound> = Vec::with_capacity(pairs.len());
    for &(a, b) in pairs {
        let (ca, cb) = (dd.canonical[a as usize], dd.canonical[b as usize]);
        let d = dist(cover.input.get(a as usize), cover.input.get(b as usize));
        out.push(PairBound { a, b, stretch: if d == 0.0 { 1.0 } else { f64::INFINITY }, tree: None });
        if ca != cb && d > 0.0 {
            let key = (ca.min(cb), ca.max(cb));
            if let alloc::collections::btree_map::Entry::Vacant(v) = slot.entry(key) {
                v.insert(canon.len());
                canon.push((key.0, key.1, dist(pts.get(key.0 as usize), pts.get(key.1 as usize))));
            }
        }
    }
    let mut best: Vec<(f64, Option<TreeId>)> = vec![(f64::INFINITY, None); canon.len()];
    let mut tried: Vec<Vec<TreeId>> = vec![Vec::new(); canon.len()];
    let views: Vec<_> = canon.iter().map(|&(a, b, _)| cover.far_views(a, b)).collect();
    let mut assembled = 0usize;
    for (view_cap, cand_cap, search) in ROUNDS {
        let mut wanted: BTreeMap<TreeId, Vec<usize>> = BTreeMap::new();
        for (i, fvs) in views.iter().enumerate() {
            if best[i].0 <= target {
                continue;
            }
            for fv in fvs.iter().take(view_cap) {
                for id in cover.view_witnesses(fv, search, cand_cap)? {
                    if !tried[i].contains(&id) {
                        tried[i].push(id);
                        wanted.entry(id).or_default().push(i);
                    }
                }
            }
        }
        if wanted.is_empty() {
            continue;
        }
        let jobs: Vec<(TreeId, Vec<usize>)> = wanted.into_iter().collect();
        assembled += jobs.len();
        let results = evaluate_jobs(cover, reduction, &canon, &jobs, threads)?;
        for (id, hits) in jobs.iter().map(|j| j.0).zip(results) {
            for (i, s) in hits {
                if s < best[i].0 {
                    best[i] = (s, Some(id));
                }
            }
        }
    }
    for p in out.iter_mut() {
        let (ca, cb) = (dd.canonical[p.a as usize], dd.canonical[p.b as usize]);
        if let Some(&i) = slot.get(&(ca.min(cb), ca.max(cb))) {
            // duplicates hang off their canonical point: add the leaf edges
            let d_in = dist(cover.input.get(p.a as usize), cover.input.get(p.b as usize));
            let extra = dist(cover.input.get(p.a as usize), pts.get(ca as usize))
                + dist(cover.input.get(p.b as usize), pts.get(cb as usize));
            p.stretch = (best[i].0 * canon[i].2 + extra) / d_in;
            p.tree = best[i].1;
        }
    }
    let worst = out.iter().copied().max_by(|x, y| x.stretch.total_cmp(&y.stretch).then(y.a.cmp(&x.a)));
    Ok(ImplicitReport {
        max_stretch: worst.map_or(1.0, |w| w.stretch.max(1.0)),
        worst,
        pairs: out,
        trees_assembled: assembled,
    })
}

type Hits = Vec<(usize, f64)>;

fn evaluate_job(
    cover: &ImplicitCover,
    reduction: DegreeReduction,
    canon: &[(u32, u32, f64)],
    id: TreeId,
    who: &[usize],
) -> Result<Hits> {
    let t = canonical_tree(cover, id, reduction)?;
    let m = t.metric()?;
    who.iter().map(|&i| Ok((i, m.node_distance(canon[i].0, canon[i].1) / canon[i].2))).collect()
}

/// Tree over canonical ids (node `p` is canonical point `p`).
pub fn canonical_tree(cover: &ImplicitCover, id: TreeId, reduction: DegreeReduction) -> Result<CoverTree> {
    let assembled = cover.assemble(id)?;
    Ok(match (reduction, cover.params.mode) {
        (DegreeReduction::Global, crate::tree_model::Mode::NonSteiner) => {
            crate::degree_reduction::reduce_assembled(&assembled, cover.points(), cover.params.ell)?.tree
        }
        _ => assembled.tree,
    })
}

#[cfg(feature = "std")]
fn evaluate_jobs(
    cover: &ImplicitCover,
    reduction: DegreeReduction,
    canon: &[(u32, u32, f64)],
    jobs: &[(TreeId, Vec<usize>)],
    threads: usize,
) -> Result<Vec<Hits>> {
    let threads = threads.max(1).min(jobs.len().max(1));
    if threads == 1 {
        return jobs.iter().map(|(id, who)| evaluate_job(cover, reduction, canon, *id, who)).collect();
    }
    let chunk = jobs.len().div_ceil(threads);
    let parts: Vec<Result<Vec<Hits>>> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || part.iter().map(|(id, who)| evaluate_job(cover, reduction, canon, *id, who)).collect())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(jobs.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

#[cfg(not(feature = "std"))]
fn evaluate_jobs(
    cover: &ImplicitCover,
    reduction: DegreeReduction,
    canon: &[(u32, u32, f64)],
    jobs: &[(TreeId, Vec<usize>)],
    _threads: usize,
) -> Result<Vec<Hits>> {
    jobs.iter().map(|(id, who)| evaluate_job(cover, reduction, canon, *id, who)).collect()
}

/// All unordered input pairs.
pub fn all_pairs(n: usize) -> Vec<(u32, u32)> {
    let n = n as u32;
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

/// Pieces whose diameter exceeds 2γΔ_w, and the worst ratio to that bound.
pub fn piece_audit(cover: &ImplicitCover, id: TreeId) -> Result<(usize, f64)> {
    let t = cover.assemble(id)?;
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for (level, diameter) in piece_diameters(&t) {
        let bound = 2.0 * cover.params.gamma * cover.params.cell_diameter(level);
        let r = diameter / bound;
        worst = worst.max(r);
        if r > 1.0 + 1e-12 {
            violations += 1;
        }
    }
    Ok((violations, worst))
}

/// One row of the benchmark CSV.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub build_ms: f64,
    pub trees: u128,
    pub max_point_degree: usize,
    pub max_stretch: f64,
}

pub const BENCH_HEADER: &str = "n,build_ms,trees,max_point_degree,max_stretch";

impl BenchRow {
    pub fn csv(&self) -> alloc::string::String {
        alloc::format!(
            "{},{:.3},{},{},{:.6}",
            self.n,
            self.build_ms,
            self.trees,
            self.max_point_degree,
            self.max_stretch
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_model::{Location, TreeNode};

    fn path_tree(points: &PointSet, order: &[u32]) -> CoverTree {
        let mut t = CoverTree {
            nodes: order.iter().map(|&p| TreeNode { loc: Location::Point(p), level: 0 }).collect(),
            edges: Vec::new(),
            root: 0,
        };
        for i in 1..order.len() as u32 {
            t.push_edge(points, i - 1, i);
        }
        t
    }

    #[test]
    fn collinear_path_is_exact() {
        let pts = PointSet::new(1, vec![0.0, 1.0, 3.0]).unwrap();
        let r = stretch_oracle(&pts, &[path_tree(&pts, &[0, 1, 2])]).unwrap();
        assert_eq!(r.max_stretch, 1.0);
    }

    #[test]
    fn detour_doubles() {
        let pts = PointSet::new(1, vec![0.0, 1.0, 0.5]).unwrap();
        // 0 -> 2 -> 1 is exact, 0 -> 1 -> 2 detours for (0, 2): 1.5 / 0.5 = 3
        let r = stretch_oracle(&pts, &[path_tree(&pts, &[0, 1, 2])]).unwrap();
        assert!((r.max_stretch - 3.0).abs() < 1e-12);
        assert_eq!(r.witness_pair, Some((0, 2)));
        let r = stretch_oracle(&pts, &[path_tree(&pts, &[0, 1, 2]), path_tree(&pts, &[0, 2, 1])]).unwrap();
        assert_eq!(r.max_stretch, 1.0);
    }

    #[test]
    fn two_tree_fixture_is_exact() {
        let pts = PointSet::new(2, vec![0.0, 0.0, 3.0, 0.0, 0.0, 4.0]).unwrap();
        let a = path_tree(&pts, &[1, 0, 2]);
        let b = path_tree(&pts, &[0, 1, 2]);
        let r = stretch_oracle(&pts, &[a, b]).unwrap();
        // (1,2) costs 7 through point 0 in a, but b has the direct edge
        assert_eq!(r.per_pair_best[&(1, 2)], (1, 1.0));
        // (0,2): a gives 4 exact
        assert_eq!(r.per_pair_best[&(0, 2)], (0, 1.0));
        assert!((r.max_stretch - 1.0).abs() < 1e-12);
    }

    #[test]
    fn missing_pair_is_an_error() {
        let pts = PointSet::new(1, vec![0.0, 1.0, 2.0]).unwrap();
        assert!(stretch_oracle(&pts, &[path_tree(&pts, &[0, 1])]).is_err());
    }

    #[test]
    fn no_far_pairs_pass() {
        let pts = PointSet::new(1, vec![0.0, 0.001]).unwrap();
        assert_eq!(partial_oracle(&pts, &[], 10.0, 1.0, 0.1).unwrap(), PartialVerdict::Pass { far_pairs: 0 });
    }
}
