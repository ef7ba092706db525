//! Compact routing over the cover.
//!
//! Every point carries one label with, for each contracted view, its DFS
//! timestamp and one record per apex cell (a cell on its root path where the
//! path continues into a light child). Two labels identify their lowest
//! common cell in every view; the child representatives stored at that cell
//! pick a far view and a witness tree. Routing then follows interval tables
//! of that tree.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{DegreeReduction, ImplicitCover};
use crate::geometry::{dist, PointSet};
use crate::partial_nonsteiner::{Anchor, Search, StripFamily};
use crate::partial_steiner::SlabFamily;
use crate::quadtree::{ContractedView, ViewChild};
use crate::tree_model::{CoverTree, Location, Mode, TreeId};
use crate::{Error, Result};

/// Per-coordinate offset from a cell corner in units of Δ/(4μd).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FarLabel {
    pub cells: Vec<i64>,
}

/// Far label of `x` relative to `corner` at scale `delta`.
pub fn far_label(x: &[f64], corner: &[f64], mu: f64, delta: f64) -> FarLabel {
    let unit = far_unit(x.len(), mu, delta);
    FarLabel { cells: x.iter().zip(corner).map(|(a, c)| libm::floor((a - c) / unit) as i64).collect() }
}

fn far_unit(dim: usize, mu: f64, delta: f64) -> f64 {
    delta / (4.0 * mu * dim as f64)
}

/// Outcome of [`far_decide`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FarDecision {
    /// The distance is at least Δ/(4μ).
    Far,
    /// The distance is below Δ/μ.
    NotFar,
}

/// Distance estimated from two far labels.
pub fn far_estimate(a: &FarLabel, b: &FarLabel, mu: f64, delta: f64) -> f64 {
    let unit = far_unit(a.cells.len(), mu, delta);
    let s: f64 = a
        .cells
        .iter()
        .zip(&b.cells)
        .map(|(x, y)| {
            let g = (x - y) as f64 * unit;
            g * g
        })
        .sum();
    libm::sqrt(s)
}

/// Far if the estimate reaches Δ/(2μ). Each coordinate is off by less than
/// one unit, so the estimate is within Δ/(4μ) of the truth.
pub fn far_decide(a: &FarLabel, b: &FarLabel, mu: f64, delta: f64) -> Result<FarDecision> {
    if a.cells.len() != b.cells.len() {
        return Err(Error::DimensionMismatch { expected: a.cells.len(), found: b.cells.len() });
    }
    Ok(if far_estimate(a, b, mu, delta) >= delta / (2.0 * mu) { FarDecision::Far } else { FarDecision::NotFar })
}

/// A child representative as seen from one cell: its coordinates (strip
/// indices are recomputed from them) and its far label.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialCoverLabel {
    pub coords: Vec<f64>,
    pub far: FarLabel,
}

/// One apex cell of a point in one view.
#[derive(Clone, Debug, PartialEq)]
pub struct ApexRecord {
    /// DFS interval of the cell.
    pub pre: u32,
    pub post: u32,
    pub depth: u32,
    pub level: i32,
    /// Index of the child toward the point.
    pub child: u32,
    /// Index of the heavy child.
    pub heavy: u32,
    pub rep: PartialCoverLabel,
    pub heavy_rep: PartialCoverLabel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ViewLabel {
    pub timestamp: u32,
    pub apices: Vec<ApexRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointLabel {
    pub point: u32,
    pub build: u64,
    /// Indexed `shift * ℓ + class`.
    pub views: Vec<ViewLabel>,
}

/// What a decoder needs besides the two labels.
#[derive(Clone, Debug, PartialEq)]
pub struct BuildInfo {
    pub dim: usize,
    pub mode: Mode,
    pub eps_internal: f64,
    pub mu: f64,
    pub ell: u32,
    pub origin: Vec<f64>,
    pub shifts: Vec<f64>,
    pub fingerprint: u64,
}

impl BuildInfo {
    pub fn of(cover: &ImplicitCover) -> Self {
        let p = &cover.params;
        let f = &cover.family;
        let mut h = Fnv::new();
        for x in [p.eps, p.scale, p.eps_internal, p.mu, p.gamma] {
            h.u64(x.to_bits());
        }
        h.u64(p.dim as u64);
        h.u64(p.ell as u64);
        h.u64(p.mode as u64);
        h.u64(p.strategy as u64);
        h.u64(cover.input.len() as u64);
        for x in f.origin.iter().chain(&f.shifts).chain(cover.input.raw()) {
            h.u64(x.to_bits());
        }
        BuildInfo {
            dim: p.dim,
            mode: p.mode,
            eps_internal: p.eps_internal,
            mu: p.mu,
            ell: p.ell,
            origin: f.origin.clone(),
            shifts: f.shifts.clone(),
            fingerprint: h.0,
        }
    }

    /// Minimum corner of the level-`level` cell of shift `shift` holding `x`.
    pub fn cell_corner(&self, shift: usize, level: i32, x: &[f64]) -> Vec<f64> {
        let side = libm::ldexp(1.0, level);
        x.iter()
            .zip(&self.origin)
            .map(|(c, o)| {
                let i = libm::floor(libm::ldexp((c - o) + self.shifts[shift], -level));
                i * side - self.shifts[shift] + o
            })
            .collect()
    }

    pub fn cell_diameter(&self, level: i32) -> f64 {
        libm::sqrt(self.dim as f64) * libm::ldexp(1.0, level)
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
    fn u64(&mut self, x: u64) {
        for b in x.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }
}

/// Labels of every input point.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelBundle {
    pub info: BuildInfo,
    pub labels: Vec<PointLabel>,
}

fn view_child_rep(cover: &ImplicitCover, shift: usize, view: &ContractedView, child: ViewChild) -> u32 {
    match child {
        ViewChild::Point(p) => p,
        ViewChild::Cell(c) => cover.family.trees[shift].nodes[view.cells[c as usize].node as usize].min_lex,
    }
}

/// Build the label of every input point.
pub fn build_labels(cover: &ImplicitCover) -> Result<LabelBundle> {
    let info = BuildInfo::of(cover);
    let pts = cover.points();
    let n = pts.len();
    let ell = cover.params.ell;
    let mut canon_labels: Vec<PointLabel> =
        (0..n as u32).map(|p| PointLabel { point: p, build: info.fingerprint, views: Vec::new() }).collect();
    for shift in 0..cover.params.shift_count() {
        for class in 0..ell {
            let view = cover.family.view(shift, class);
            let cells = view.cells.len();
            // point counts and DFS intervals
            let mut weight = vec![0u32; cells];
            for c in (0..cells).rev() {
                weight[c] = view.cells[c]
                    .children
                    .iter()
                    .map(|ch| match *ch {
                        ViewChild::Cell(s) => weight[s as usize],
                        ViewChild::Point(_) => 1,
                    })
                    .sum();
            }
            let heavy: Vec<u32> = view
                .cells
                .iter()
                .map(|cell| {
                    let mut best = (0u32, 0u32);
                    for (i, ch) in cell.children.iter().enumerate() {
                        let w = match *ch {
                            ViewChild::Cell(s) => weight[s as usize],
                            ViewChild::Point(_) => 1,
                        };
                        if w > best.1 {
                            best = (i as u32, w);
                        }
                    }
                    best.0
                })
                .collect();
            let mut pre = vec![0u32; cells];
            let mut post = vec![0u32; cells];
            let mut stamp = vec![0u32; n];
            let mut clock = 0u32;
            if cells > 0 {
                // iterative preorder: (cell, next child index)
                let mut stack: Vec<(u32, usize)> = vec![(0, 0)];
                pre[0] = 0;
                clock = 1;
                while let Some(&mut (c, ref mut next)) = stack.last_mut() {
                    let children = &view.cells[c as usize].children;
                    if *next == children.len() {
                        post[c as usize] = clock - 1;
                        stack.pop();
                        continue;
                    }
                    let ch = children[*next];
                    *next += 1;
                    match ch {
                        ViewChild::Point(p) => {
                            stamp[p as usize] = clock;
                            clock += 1;
                        }
                        ViewChild::Cell(s) => {
                            pre[s as usize] = clock;
                            clock += 1;
                            stack.push((s, 0));
                        }
                    }
                }
            }
            let _ = clock;
            for (p, label) in canon_labels.iter_mut().enumerate() {
                let mut apices = Vec::new();
                let mut below = ViewChild::Point(p as u32);
                for c in view.chain(p as u32) {
                    let cell = &view.cells[c as usize];
                    let child = cell.children.iter().position(|&x| x == below).expect("child on the path") as u32;
                    if child != heavy[c as usize] {
                        let diameter = cover.params.cell_diameter(cell.level);
                        let corner = cover.family.cell_corner(shift, cell);
                        let pcl = |q: u32| {
                            let x = pts.get(q as usize);
                            PartialCoverLabel { coords: x.to_vec(), far: far_label(x, &corner, info.mu, diameter) }
                        };
                        apices.push(ApexRecord {
                            pre: pre[c as usize],
                            post: post[c as usize],
                            depth: cell.depth,
                            level: cell.level,
                            child,
                            heavy: heavy[c as usize],
                            rep: pcl(view_child_rep(cover, shift, view, below)),
                            heavy_rep: pcl(view_child_rep(
                                cover,
                                shift,
                                view,
                                cell.children[heavy[c as usize] as usize],
                            )),
                        });
                    }
                    below = ViewChild::Cell(c);
                }
                apices.reverse();
                label.views.push(ViewLabel { timestamp: stamp[p], apices });
            }
        }
    }
    let dd = &cover.family.dedup;
    let labels = dd
        .canonical
        .iter()
        .enumerate()
        .map(|(input, &c)| {
            let mut l = canon_labels[c as usize].clone();
            l.point = input as u32;
            l
        })
        .collect();
    Ok(LabelBundle { info, labels })
}

/// A view chosen by the decoder.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodedView {
    pub shift: usize,
    pub class: u32,
    pub level: i32,
    /// Whether both labels hold an apex at the common cell.
    pub both_apex: bool,
    pub estimate: f64,
}

/// Lowest common cell of two labels in one view: its record from the
/// label that has it as an apex, and the other label's record if it has one.
fn common_apex<'a>(x: &'a ViewLabel, y: &'a ViewLabel) -> Option<(&'a ApexRecord, Option<&'a ApexRecord>, bool)> {
    let holds = |r: &ApexRecord| r.pre <= x.timestamp.min(y.timestamp) && x.timestamp.max(y.timestamp) <= r.post;
    let bx = x.apices.iter().filter(|r| holds(r)).max_by_key(|r| r.depth);
    let by = y.apices.iter().filter(|r| holds(r)).max_by_key(|r| r.depth);
    match (bx, by) {
        (Some(a), Some(b)) if a.pre == b.pre => Some((a, Some(b), true)),
        (Some(a), Some(b)) => Some(if a.depth > b.depth { (a, None, true) } else { (b, None, false) }),
        (Some(a), None) => Some((a, None, true)),
        (None, Some(b)) => Some((b, None, false)),
        (None, None) => None,
    }
}

/// Tree for the pair, or `None` for identical labels.
pub fn decode_tree_id(info: &BuildInfo, x: &PointLabel, y: &PointLabel) -> Result<Option<(TreeId, DecodedView)>> {
    if x.build != info.fingerprint || y.build != info.fingerprint || x.views.len() != y.views.len() {
        return Err(Error::BuildMismatch);
    }
    let ell = info.ell as usize;
    let mut best: Option<(f64, usize, &PartialCoverLabel, &PartialCoverLabel, i32, bool)> = None;
    for (v, (lx, ly)) in x.views.iter().zip(&y.views).enumerate() {
        if lx.timestamp == ly.timestamp {
            continue;
        }
        let Some((rec, other, from_x)) = common_apex(lx, ly) else { continue };
        // Case 1: both apex; Case 2: the other side is the heavy child.
        let (a, b) = match other {
            Some(o) => (&rec.rep, &o.rep),
            None => (&rec.rep, &rec.heavy_rep),
        };
        let (a, b) = if from_x { (a, b) } else { (b, a) };
        let diameter = info.cell_diameter(rec.level);
        if far_decide(&a.far, &b.far, info.mu, diameter)? != FarDecision::Far {
            continue;
        }
        let score = far_estimate(&a.far, &b.far, info.mu, diameter) / diameter;
        if best.map_or(true, |bst| score > bst.0) {
            best = Some((score, v, a, b, rec.level, other.is_some()));
        }
    }
    let Some((score, v, a, b, level, both)) = best else { return Ok(None) };
    let (shift, class) = (v / ell, (v % ell) as u32);
    let corner = info.cell_corner(shift, level, &a.coords);
    let k = match info.mode {
        Mode::NonSteiner => {
            let fam = StripFamily::new(info.dim, info.eps_internal, info.mu, info.cell_diameter(level))?;
            let anchor = Anchor::Cube { corner: &corner, side: libm::ldexp(1.0, level) };
            let mut w = fam.witnesses(&a.coords, &b.coords, anchor, Search::Nearby);
            if w.is_empty() {
                w = fam.witnesses(&a.coords, &b.coords, anchor, Search::Exhaustive);
            }
            w.first().map(|w| w.k)
        }
        Mode::Steiner => SlabFamily::new(&corner, libm::ldexp(1.0, level), info.eps_internal, info.mu)?
            .witnesses(&a.coords, &b.coords)
            .first()
            .map(|w| w.0),
    };
    Ok(k.map(|k| {
        (
            TreeId { shift: shift as u32, class, k },
            DecodedView { shift, class, level, both_apex: both, estimate: score },
        )
    }))
}

/// Interval routing state of one node.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalTable {
    pub l: u32,
    pub h: u32,
    pub parent_port: Option<u32>,
    /// (port, l, h) per child.
    pub children: Vec<(u32, u32, u32)>,
}

/// Tables, node labels (DFS timestamps) and the port wiring of one tree.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalRouting {
    pub tables: Vec<IntervalTable>,
    pub labels: Vec<u32>,
    /// `ports[u][p]` is the neighbor behind port `p` of `u`.
    pub ports: Vec<Vec<u32>>,
}

/// Ports of every node as a seeded permutation of its neighbors.
pub fn seeded_ports(t: &CoverTree, seed: u64) -> Vec<Vec<u32>> {
    let mut ports: Vec<Vec<u32>> = vec![Vec::new(); t.nodes.len()];
    for e in &t.edges {
        ports[e.u as usize].push(e.v);
        ports[e.v as usize].push(e.u);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in ports.iter_mut() {
        p.sort_unstable();
        for i in (1..p.len()).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            p.swap(i, j);
        }
    }
    ports
}

/// DFS-interval routing on `t` with the given port wiring.
pub fn build_interval_routing(t: &CoverTree, ports: Vec<Vec<u32>>) -> Result<IntervalRouting> {
    let n = t.nodes.len();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for e in &t.edges {
        adj[e.u as usize].push(e.v);
        adj[e.v as usize].push(e.u);
    }
    if ports.len() != n {
        return Err(Error::InvalidPorts { node: n.min(ports.len()) });
    }
    for (u, p) in ports.iter().enumerate() {
        let mut a = adj[u].clone();
        let mut b = p.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(Error::InvalidPorts { node: u });
        }
    }
    let mut l = vec![0u32; n];
    let mut h = vec![0u32; n];
    // preorder along the port order
    let mut stack: Vec<(u32, usize)> = vec![(t.root, 0)];
    let mut parent = vec![u32::MAX; n];
    let mut clock = 1u32;
    l[t.root as usize] = 0;
    while let Some(&mut (u, ref mut next)) = stack.last_mut() {
        if *next == ports[u as usize].len() {
            h[u as usize] = clock - 1;
            stack.pop();
            continue;
        }
        let v = ports[u as usize][*next];
        *next += 1;
        if v == parent[u as usize] {
            continue;
        }
        parent[v as usize] = u;
        l[v as usize] = clock;
        clock += 1;
        stack.push((v, 0));
    }
    if clock as usize != n {
        return Err(Error::NotATree("tree is not connected".into()));
    }
    let tables = (0..n)
        .map(|u| {
            let mut t = IntervalTable { l: l[u], h: h[u], parent_port: None, children: Vec::new() };
            for (port, &v) in ports[u].iter().enumerate() {
                if v == parent[u] {
                    t.parent_port = Some(port as u32);
                } else {
                    t.children.push((port as u32, l[v as usize], h[v as usize]));
                }
            }
            t
        })
        .collect();
    Ok(IntervalRouting { tables, labels: l, ports })
}

/// Port toward the node with timestamp `dest`, or `None` on arrival.
pub fn route_step(table: &IntervalTable, dest: u32) -> Result<Option<u32>> {
    if dest == table.l {
        return Ok(None);
    }
    if let Some(&(port, _, _)) = table.children.iter().find(|&&(_, l, h)| l <= dest && dest <= h) {
        return Ok(Some(port));
    }
    if dest >= table.l && dest <= table.h {
        return Err(Error::IndexOutOfRange { what: "destination label" });
    }
    table.parent_port.map(Some).ok_or(Error::IndexOutOfRange { what: "destination label" })
}

/// Node path from `from` to the node labelled `dest`.
pub fn route(r: &IntervalRouting, from: u32, dest: u32) -> Result<Vec<u32>> {
    let mut path = vec![from];
    let mut at = from;
    while let Some(port) = route_step(&r.tables[at as usize], dest)? {
        at = r.ports[at as usize][port as usize];
        path.push(at);
        if path.len() > r.tables.len() {
            return Err(Error::NotATree("routing loop".into()));
        }
    }
    Ok(path)
}

/// Outcome of one simulated packet.
#[derive(Clone, Debug, PartialEq)]
pub struct RouteOutcome {
    pub tree: TreeId,
    /// Input point ids along the path (node path mapped to points).
    pub path: Vec<u32>,
    pub weight: f64,
    pub ratio: f64,
}

/// A decoded tree prepared for routing.
#[derive(Clone, Debug)]
pub struct RoutedTree {
    pub tree: CoverTree,
    pub routing: IntervalRouting,
    /// Node of each input point.
    pub node_of: Vec<u32>,
}

/// Assemble tree `id` with its interval tables.
pub fn routed_tree(cover: &ImplicitCover, id: TreeId, reduction: DegreeReduction, seed: u64) -> Result<RoutedTree> {
    if cover.params.mode != Mode::NonSteiner {
        return Err(Error::Unsupported("routing needs a non-Steiner cover"));
    }
    let tree = cover.tree(id, reduction)?;
    let salt = cover.index_of(id);
    let ports = seeded_ports(&tree, seed ^ (salt as u64) ^ ((salt >> 64) as u64).rotate_left(17));
    let routing = build_interval_routing(&tree, ports)?;
    let mut node_of = vec![u32::MAX; cover.input.len()];
    for (i, nd) in tree.nodes.iter().enumerate() {
        if let Location::Point(p) = nd.loc {
            node_of[p as usize] = i as u32;
        }
    }
    Ok(RoutedTree { tree, routing, node_of })
}

/// Route one packet from `s` to `t`: decode the tree from the two labels,
/// put (tree id, l_t) in the header and follow the tables.
pub fn simulate_route(
    cover: &ImplicitCover,
    bundle: &LabelBundle,
    s: u32,
    t: u32,
    reduction: DegreeReduction,
    seed: u64,
) -> Result<Option<RouteOutcome>> {
    let Some((id, _)) = decode_tree_id(&bundle.info, &bundle.labels[s as usize], &bundle.labels[t as usize])? else {
        return Ok(None);
    };
    let rt = routed_tree(cover, id, reduction, seed)?;
    Ok(Some(route_in(&cover.input, &rt, id, s, t)?))
}

/// Route inside an already prepared tree.
pub fn route_in(points: &PointSet, rt: &RoutedTree, id: TreeId, s: u32, t: u32) -> Result<RouteOutcome> {
    let (ns, nt) = (rt.node_of[s as usize], rt.node_of[t as usize]);
    if ns == u32::MAX || nt == u32::MAX {
        return Err(Error::UnknownPoint(if ns == u32::MAX { s } else { t } as usize));
    }
    let header = rt.routing.labels[nt as usize];
    let nodes = route(&rt.routing, ns, header)?;
    let mut weight = 0.0;
    for w in nodes.windows(2) {
        weight += dist(rt.tree.location(points, w[0]), rt.tree.location(points, w[1]));
    }
    let path = nodes
        .iter()
        .map(|&v| match rt.tree.nodes[v as usize].loc {
            Location::Point(p) => p,
            Location::Steiner(_) => u32::MAX,
        })
        .collect();
    let d = dist(points.get(s as usize), points.get(t as usize));
    Ok(RouteOutcome { tree: id, path, weight, ratio: if d > 0.0 { weight / d } else { 1.0 } })
}

/// Bit counts of one serialized label, by layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LabelBits {
    /// Timestamps, intervals, depths, levels and child indices.
    pub apex: usize,
    /// Representative coordinates.
    pub partial: usize,
    pub far: usize,
    /// Header (point id, build fingerprint, counts).
    pub header: usize,
}

impl LabelBits {
    pub fn total(&self) -> usize {
        self.apex + self.partial + self.far + self.header
    }
}

fn put_varint(out: &mut Vec<u8>, mut x: u64) -> usize {
    let start = out.len();
    loop {
        let b = (x & 0x7f) as u8;
        x >>= 7;
        if x == 0 {
            out.push(b);
            break;
        }
        out.push(b | 0x80);
    }
    8 * (out.len() - start)
}

fn zigzag(x: i64) -> u64 {
    ((x << 1) ^ (x >> 63)) as u64
}

fn unzigzag(x: u64) -> i64 {
    ((x >> 1) as i64) ^ -((x & 1) as i64)
}

fn put_pcl(out: &mut Vec<u8>, l: &PartialCoverLabel, bits: &mut LabelBits) {
    for c in &l.coords {
        out.extend_from_slice(&c.to_le_bytes());
        bits.partial += 64;
    }
    for &c in &l.far.cells {
        bits.far += put_varint(out, zigzag(c));
    }
}

/// Compact byte encoding of a label and its per-layer bit counts.
pub fn encode_label(l: &PointLabel) -> (Vec<u8>, LabelBits) {
    let mut out = Vec::new();
    let mut bits = LabelBits::default();
    bits.header += put_varint(&mut out, l.point as u64);
    out.extend_from_slice(&l.build.to_le_bytes());
    bits.header += 64;
    bits.header += put_varint(&mut out, l.views.len() as u64);
    for v in &l.views {
        bits.apex += put_varint(&mut out, v.timestamp as u64);
        bits.apex += put_varint(&mut out, v.apices.len() as u64);
        for a in &v.apices {
            for x in
                [a.pre as u64, a.post as u64, a.depth as u64, zigzag(a.level as i64), a.child as u64, a.heavy as u64]
            {
                bits.apex += put_varint(&mut out, x);
            }
            put_pcl(&mut out, &a.rep, &mut bits);
            put_pcl(&mut out, &a.heavy_rep, &mut bits);
        }
    }
    (out, bits)
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn varint(&mut self) -> Result<u64> {
        let mut x = 0u64;
        let mut shift = 0;
        loop {
            let b = *self.bytes.get(self.at).ok_or(Error::IndexOutOfRange { what: "label byte" })?;
            self.at += 1;
            if shift >= 64 {
                return Err(Error::IndexOutOfRange { what: "label varint" });
            }
            x |= ((b & 0x7f) as u64) << shift;
            if b & 0x80 == 0 {
                return Ok(x);
            }
            shift += 7;
        }
    }

    fn u32(&mut self) -> Result<u32> {
        u32::try_from(self.varint()?).map_err(|_| Error::IndexOutOfRange { what: "label field" })
    }

    fn fixed(&mut self) -> Result<[u8; 8]> {
        let s = self.bytes.get(self.at..self.at + 8).ok_or(Error::IndexOutOfRange { what: "label byte" })?;
        self.at += 8;
        Ok(s.try_into().expect("eight bytes"))
    }

    fn pcl(&mut self, dim: usize) -> Result<PartialCoverLabel> {
        let coords = (0..dim).map(|_| Ok(f64::from_le_bytes(self.fixed()?))).collect::<Result<Vec<_>>>()?;
        let cells = (0..dim).map(|_| Ok(unzigzag(self.varint()?))).collect::<Result<Vec<_>>>()?;
        Ok(PartialCoverLabel { coords, far: FarLabel { cells } })
    }
}

/// Inverse of [`encode_label`].
pub fn decode_label(bytes: &[u8], dim: usize) -> Result<PointLabel> {
    let mut r = Reader { bytes, at: 0 };
    let point = r.u32()?;
    let build = u64::from_le_bytes(r.fixed()?);
    let views = r.varint()? as usize;
    let mut out = PointLabel { point, build, views: Vec::with_capacity(views.min(1 << 16)) };
    for _ in 0..views {
        let timestamp = r.u32()?;
        let count = r.varint()? as usize;
        let mut apices = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let pre = r.u32()?;
            let post = r.u32()?;
            let depth = r.u32()?;
            let level = unzigzag(r.varint()?) as i32;
            let child = r.u32()?;
            let heavy = r.u32()?;
            let rep = r.pcl(dim)?;
            let heavy_rep = r.pcl(dim)?;
            apices.push(ApexRecord { pre, post, depth, level, child, heavy, rep, heavy_rep });
        }
        out.views.push(ViewLabel { timestamp, apices });
    }
    if r.at != bytes.len() {
        return Err(Error::IndexOutOfRange { what: "trailing label bytes" });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_model::TreeNode;

    fn path3() -> (PointSet, CoverTree) {
        let pts = PointSet::new(1, vec![0.0, 1.0, 2.0]).unwrap();
        let mut t = CoverTree {
            nodes: (0..3).map(|p| TreeNode { loc: Location::Point(p), level: 0 }).collect(),
            edges: Vec::new(),
            root: 0,
        };
        t.push_edge(&pts, 0, 1);
        t.push_edge(&pts, 1, 2);
        (pts, t)
    }

    #[test]
    fn path_routes_hop_by_hop() {
        let (_, t) = path3();
        let r = build_interval_routing(&t, seeded_ports(&t, 7)).unwrap();
        assert_eq!(route(&r, 0, r.labels[2]).unwrap(), vec![0, 1, 2]);
        assert_eq!(route(&r, 2, r.labels[0]).unwrap(), vec![2, 1, 0]);
        assert_eq!(route(&r, 1, r.labels[1]).unwrap(), vec![1]);
    }

    #[test]
    fn bad_ports_rejected() {
        let (_, t) = path3();
        let ports = vec![vec![1], vec![0, 0], vec![1]];
        assert_eq!(build_interval_routing(&t, ports).unwrap_err(), Error::InvalidPorts { node: 1 });
    }

    #[test]
    fn far_decide_examples() {
        let mu = 28.28;
        let a = far_label(&[0.3, 0.3], &[0.0, 0.0], mu, 1.0);
        assert_eq!(far_decide(&a, &a, mu, 1.0).unwrap(), FarDecision::NotFar);
        let b = far_label(&[0.3 + 1.0 / 2f64.sqrt(), 0.3 + 1.0 / 2f64.sqrt()], &[0.0, 0.0], mu, 1.0);
        assert_eq!(far_decide(&a, &b, mu, 1.0).unwrap(), FarDecision::Far);
    }

    #[test]
    fn varints_round_trip() {
        for x in [0i64, 1, -1, 63, -64, 1 << 40, i64::MIN, i64::MAX] {
            assert_eq!(unzigzag(zigzag(x)), x);
        }
        let mut v = Vec::new();
        put_varint(&mut v, u64::MAX);
        assert_eq!(Reader { bytes: &v, at: 0 }.varint().unwrap(), u64::MAX);
    }
}
