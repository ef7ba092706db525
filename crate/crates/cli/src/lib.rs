//! File formats and command implementations behind the `treecover` binary.
//!
//! Commands return their text output (or a [`Failure`] carrying the exit
//! code) so tests can drive them without spawning processes.

pub mod labels;
pub mod points;

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treecover_core::assembly::{DegreeReduction, ImplicitCover};
use treecover_core::geometry::PointSet;
use treecover_core::partial_nonsteiner::StripTreeStrategy;
use treecover_core::quadtree::CoverParams;
use treecover_core::routing::{build_labels, decode_tree_id, route_in, routed_tree, RoutedTree};
use treecover_core::tree_model::{ExplicitCover, Mode, TreeId};
use treecover_core::verify::{implicit_stretch, pair_stretch, BenchRow, ImplicitReport};

use crate::labels::{write_bundle, SizeTable};

/// Absolute slack on stretch comparisons (float noise in tree distances).
pub const STRETCH_SLACK: f64 = 1e-9;
/// Above this many points the default pair set is a seeded sample.
pub const EXHAUSTIVE_LIMIT: usize = 300;
/// Size of the default sample.
pub const DEFAULT_SAMPLE: usize = 2000;

/// A command failure and its process exit code: 2 for invalid input, 1 when
/// a check ran and failed.
#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    pub fn check(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<treecover_core::Error> for Failure {
    fn from(e: treecover_core::Error) -> Self {
        Failure::invalid(e.to_string())
    }
}

/// `all` or `sample:<m>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairSpec {
    All,
    Sample(usize),
}

impl FromStr for PairSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "all" {
            return Ok(PairSpec::All);
        }
        match s.strip_prefix("sample:").map(str::parse::<usize>) {
            Some(Ok(m)) if m > 0 => Ok(PairSpec::Sample(m)),
            _ => Err(format!("expected `all` or `sample:<m>` with m > 0, got {s:?}")),
        }
    }
}

/// Unordered pairs `a < b`, sorted. `None` means all pairs up to
/// [`EXHAUSTIVE_LIMIT`] points and a [`DEFAULT_SAMPLE`] sample above.
pub fn select_pairs(n: usize, spec: Option<PairSpec>, seed: u64) -> Vec<(u32, u32)> {
    let total = n * n.saturating_sub(1) / 2;
    let spec = spec.unwrap_or(if n <= EXHAUSTIVE_LIMIT { PairSpec::All } else { PairSpec::Sample(DEFAULT_SAMPLE) });
    let row_start = |a: usize| a * (2 * n - a - 1) / 2;
    let decode = |idx: usize| {
        // largest a with row_start(a) <= idx
        let (mut lo, mut hi) = (0usize, n - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if row_start(mid) <= idx {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo as u32, (lo + 1 + idx - row_start(lo)) as u32)
    };
    match spec {
        PairSpec::Sample(m) if m < total => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = rand::seq::index::sample(&mut rng, total, m).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(decode).collect()
        }
        _ => (0..total).map(decode).collect(),
    }
}

/// Ordered pairs `s != t` for routing: all, or a seeded sample.
pub fn select_ordered_pairs(n: usize, spec: Option<PairSpec>, seed: u64) -> Vec<(u32, u32)> {
    let total = n * n.saturating_sub(1);
    let spec = spec.unwrap_or(if n <= EXHAUSTIVE_LIMIT { PairSpec::All } else { PairSpec::Sample(DEFAULT_SAMPLE) });
    let decode = |idx: usize| {
        let a = idx / (n - 1);
        let b = idx % (n - 1);
        (a as u32, (b + (b >= a) as usize) as u32)
    };
    match spec {
        PairSpec::Sample(m) if m < total => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = rand::seq::index::sample(&mut rng, total, m).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(decode).collect()
        }
        _ => (0..total).map(decode).collect(),
    }
}

/// Worker threads: `TREECOVER_THREADS` if set, else the available cores.
pub fn threads() -> usize {
    std::env::var("TREECOVER_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Construction settings shared by the commands.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub eps: f64,
    pub mode: Mode,
    pub strategy: StripTreeStrategy,
    pub reduction: DegreeReduction,
    pub seed: u64,
    pub pairs: Option<PairSpec>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            eps: 0.1,
            mode: Mode::NonSteiner,
            strategy: StripTreeStrategy::DyadicBinary,
            reduction: DegreeReduction::Global,
            seed: 0,
            pairs: None,
        }
    }
}

impl Settings {
    pub fn params(&self, dim: usize) -> Result<CoverParams, Failure> {
        Ok(CoverParams::new(dim, self.eps, self.mode, self.strategy)?)
    }

    pub fn cover(&self, points: &PointSet) -> Result<ImplicitCover, Failure> {
        Ok(ImplicitCover::build(points, &self.params(points.dim())?)?)
    }
}

/// The implicit cover, the stretch report over the selected pairs and the
/// sub-cover made of each pair's best tree.
pub struct BuildOutput {
    pub cover: ImplicitCover,
    pub report: ImplicitReport,
    pub witnesses: ExplicitCover,
    pub max_point_degree: usize,
    pub pairs: usize,
}

impl BuildOutput {
    pub fn summary(&self) -> String {
        format!(
            "trees={} written={} max_point_degree={} max_stretch={:.9} pairs={}",
            self.cover.tree_count(),
            self.witnesses.trees.len(),
            self.max_point_degree,
            self.report.max_stretch,
            self.pairs
        )
    }
}

pub fn build(points: &PointSet, s: &Settings) -> Result<BuildOutput, Failure> {
    let cover = s.cover(points)?;
    let pairs = select_pairs(points.len(), s.pairs, s.seed);
    let report = implicit_stretch(&cover, s.reduction, &pairs, 1.0 + s.eps, threads())?;
    let ids: BTreeSet<TreeId> = report.pairs.iter().filter_map(|p| p.tree).collect();
    let mut trees = Vec::with_capacity(ids.len());
    let mut max_point_degree = 0;
    for id in ids {
        let t = cover.tree(id, s.reduction)?;
        max_point_degree = max_point_degree.max(t.audit(points).max_point_degree);
        trees.push((id, t));
    }
    let witnesses = ExplicitCover { dim: points.dim(), eps: s.eps, mode: s.mode, trees };
    Ok(BuildOutput { cover, report, witnesses, max_point_degree, pairs: pairs.len() })
}

/// Exact check of an explicit cover over the selected pairs.
pub fn verify_explicit(points: &PointSet, cover: &ExplicitCover, s: &Settings) -> Result<String, Failure> {
    if cover.dim != points.dim() {
        return Err(Failure::invalid(format!("cover has d={} but the points have d={}", cover.dim, points.dim())));
    }
    let trees: Vec<_> = cover.trees.iter().map(|(_, t)| t.clone()).collect();
    let pairs = select_pairs(points.len(), s.pairs, s.seed);
    let report = match pair_stretch(points, &trees, &pairs) {
        Err(treecover_core::Error::UncoveredPair { a, b }) => {
            return Err(Failure::check(format!("FAIL pair ({a}, {b}) is not covered by any tree")));
        }
        other => other?,
    };
    let target = 1.0 + cover.eps;
    let (a, b) = report.witness_pair.unwrap_or((0, 0));
    if report.max_stretch > target + STRETCH_SLACK {
        return Err(Failure::check(format!("FAIL pair ({a}, {b}) stretch {:.9} > {:.9}", report.max_stretch, target)));
    }
    Ok(format!(
        "PASS max_stretch={:.9} pairs={} worst=({a}, {b}) trees={}",
        report.max_stretch,
        pairs.len(),
        trees.len()
    ))
}

/// Upper-bound check of the implicit cover over the selected pairs.
pub fn verify_implicit(points: &PointSet, s: &Settings) -> Result<String, Failure> {
    let cover = s.cover(points)?;
    let pairs = select_pairs(points.len(), s.pairs, s.seed);
    let report = implicit_stretch(&cover, s.reduction, &pairs, 1.0 + s.eps, threads())?;
    let target = 1.0 + s.eps;
    let worst = report.worst.map_or((0, 0), |w| (w.a, w.b));
    if report.max_stretch > target + STRETCH_SLACK {
        return Err(Failure::check(format!(
            "FAIL pair ({}, {}) stretch {:.9} > {:.9}",
            worst.0, worst.1, report.max_stretch, target
        )));
    }
    Ok(format!(
        "PASS max_stretch={:.9} pairs={} worst=({}, {}) trees={} assembled={}",
        report.max_stretch,
        pairs.len(),
        worst.0,
        worst.1,
        cover.tree_count(),
        report.trees_assembled
    ))
}

/// Trees examined by `stats` on an implicit cover.
pub const STATS_SAMPLE: usize = 16;

/// Parameters, tree count and degree/diameter of a seeded sample of trees.
pub fn stats_implicit(points: &PointSet, s: &Settings) -> Result<String, Failure> {
    let cover = s.cover(points)?;
    let p = &cover.params;
    let count = cover.tree_count();
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut out = String::new();
    out.push_str(&format!(
        "d={} n={} eps={} eps_internal={} mu={:.6} ell={} shifts={} tau={} trees={}\n",
        p.dim,
        points.len(),
        p.eps,
        p.eps_internal,
        p.mu,
        p.ell,
        p.shift_count(),
        cover.tau,
        count
    ));
    out.push_str("shift class index                                     nodes max_point_degree diameter\n");
    let mut max_degree = 0;
    let mut max_diameter: f64 = 0.0;
    for _ in 0..STATS_SAMPLE.min(count.try_into().unwrap_or(usize::MAX)) {
        let id = cover.id_at(rng.gen_range(0..count))?;
        let t = cover.tree(id, s.reduction)?;
        let a = t.audit(points);
        max_degree = max_degree.max(a.max_point_degree);
        max_diameter = max_diameter.max(a.diameter);
        out.push_str(&format!(
            "{:>5} {:>5} {:>41} {:>5} {:>16} {:.6}\n",
            id.shift,
            id.class,
            id.k,
            t.nodes.len(),
            a.max_point_degree,
            a.diameter
        ));
    }
    out.push_str(&format!("sampled max_point_degree={max_degree} max_diameter={max_diameter:.6}\n"));
    Ok(out)
}

/// Degree and diameter table of an explicit cover.
pub fn stats_explicit(points: &PointSet, cover: &ExplicitCover) -> String {
    let mut out = format!("d={} eps={} mode={} trees={}\n", cover.dim, cover.eps, cover.mode.name(), cover.trees.len());
    out.push_str("shift class index                                     nodes max_point_degree diameter\n");
    let mut max_degree = 0;
    for (id, t) in &cover.trees {
        let a = t.audit(points);
        max_degree = max_degree.max(a.max_point_degree);
        out.push_str(&format!(
            "{:>5} {:>5} {:>41} {:>5} {:>16} {:.6}\n",
            id.shift,
            id.class,
            id.k,
            t.nodes.len(),
            a.max_point_degree,
            a.diameter
        ));
    }
    out.push_str(&format!("max_point_degree={max_degree}\n"));
    out
}

/// Outcome of the routing simulation.
pub struct RouteOutput {
    pub routes: usize,
    pub undecoded: usize,
    pub max_ratio: f64,
    pub worst: Option<(u32, u32)>,
    pub table: SizeTable,
    pub bundle: String,
}

impl RouteOutput {
    pub fn summary(&self) -> String {
        let (a, b) = self.worst.unwrap_or((0, 0));
        format!(
            "routes={} undecoded={} max_ratio={:.9} worst=({a}, {b})\n{}",
            self.routes,
            self.undecoded,
            self.max_ratio,
            self.table.render()
        )
    }
}

/// Label every point, then route the selected ordered pairs.
pub fn route(points: &PointSet, s: &Settings) -> Result<RouteOutput, Failure> {
    if s.mode != Mode::NonSteiner {
        return Err(Failure::invalid("routing needs --mode nonsteiner"));
    }
    let cover = s.cover(points)?;
    let bundle = build_labels(&cover)?;
    let (text, table) = write_bundle(&bundle);
    let pairs = select_ordered_pairs(points.len(), s.pairs, s.seed);
    let mut cache: HashMap<TreeId, RoutedTree> = HashMap::new();
    let (mut undecoded, mut max_ratio, mut worst) = (0, 1.0f64, None);
    for &(a, b) in &pairs {
        if points.get(a as usize) == points.get(b as usize) {
            continue;
        }
        let Some((id, _)) = decode_tree_id(&bundle.info, &bundle.labels[a as usize], &bundle.labels[b as usize])?
        else {
            undecoded += 1;
            continue;
        };
        let routed = match cache.entry(id) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => e.insert(routed_tree(&cover, id, s.reduction, s.seed)?),
        };
        let out = route_in(points, routed, id, a, b)?;
        if out.ratio > max_ratio || worst.is_none() {
            max_ratio = max_ratio.max(out.ratio);
            worst = Some((a, b));
        }
    }
    Ok(RouteOutput { routes: pairs.len(), undecoded, max_ratio, worst, table, bundle: text })
}

/// Median wall-clock build time of `runs` builds per size (after one warm-up), plus the tree
/// count, the largest point degree and the stretch over a pair sample.
pub fn bench(dim: usize, sizes: &[usize], s: &Settings, runs: usize) -> Result<Vec<BenchRow>, Failure> {
    let params = s.params(dim)?;
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        if n == 0 {
            return Err(Failure::invalid("bench sizes must be positive"));
        }
        let pts = points::uniform_points(dim, n, s.seed ^ n as u64);
        // untimed warm-up so the first run does not pay for cold caches
        ImplicitCover::build(&pts, &params)?;
        let mut times = Vec::with_capacity(runs.max(1));
        let mut cover = None;
        for _ in 0..runs.max(1) {
            let t0 = Instant::now();
            let c = ImplicitCover::build(&pts, &params)?;
            times.push(t0.elapsed().as_secs_f64() * 1e3);
            cover = Some(c);
        }
        times.sort_by(f64::total_cmp);
        let cover = cover.expect("at least one run");
        let spec = s.pairs.or(Some(PairSpec::Sample(200)));
        let pairs = select_pairs(n, spec, s.seed);
        let report = implicit_stretch(&cover, s.reduction, &pairs, 1.0 + s.eps, threads())?;
        let ids: BTreeSet<TreeId> = report.pairs.iter().filter_map(|p| p.tree).collect();
        let mut max_point_degree = 0;
        for id in ids {
            max_point_degree = max_point_degree.max(cover.tree(id, s.reduction)?.audit(&pts).max_point_degree);
        }
        rows.push(BenchRow {
            n,
            build_ms: times[times.len() / 2],
            trees: cover.tree_count(),
            max_point_degree,
            max_stretch: report.max_stretch,
        });
    }
    Ok(rows)
}
