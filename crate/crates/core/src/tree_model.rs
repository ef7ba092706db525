//! Weighted trees over point references (optionally Steiner locations), tree
//! metric queries and structural audits.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::geometry::{dist, PointSet};
use crate::{Error, Result};

/// Construction mode of a cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    NonSteiner,
    Steiner,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::NonSteiner => "nonsteiner",
            Mode::Steiner => "steiner",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "nonsteiner" => Some(Mode::NonSteiner),
            "steiner" => Some(Mode::Steiner),
            _ => None,
        }
    }
}

/// Index of a tree in the cover: shift, congruence class and partial index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeId {
    pub shift: u32,
    pub class: u32,
    pub k: u128,
}

/// Where a tree node sits.
#[derive(Clone, Debug, PartialEq)]
pub enum Location {
    Point(u32),
    Steiner(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    pub loc: Location,
    /// Quadtree level at which the node was created (highest level at which
    /// the point acts as a vertex). `i32::MIN` when unknown.
    pub level: i32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub w: f64,
}

/// A weighted tree. Node ids are indices into `nodes`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverTree {
    pub nodes: Vec<TreeNode>,
    pub edges: Vec<Edge>,
    pub root: u32,
}

/// Cover held as an explicit list of trees (the partial covers in tests, or a
/// `.tc` file).
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitCover {
    pub dim: usize,
    pub eps: f64,
    pub mode: Mode,
    pub trees: Vec<(TreeId, CoverTree)>,
}

impl CoverTree {
    pub fn single(point: u32) -> Self {
        CoverTree { nodes: vec![TreeNode { loc: Location::Point(point), level: i32::MIN }], edges: Vec::new(), root: 0 }
    }

    /// Coordinates of a node.
    pub fn location<'a>(&'a self, points: &'a PointSet, node: u32) -> &'a [f64] {
        match &self.nodes[node as usize].loc {
            Location::Point(p) => points.get(*p as usize),
            Location::Steiner(c) => c,
        }
    }

    /// Adds an edge weighted by the Euclidean distance of its endpoints.
    pub fn push_edge(&mut self, points: &PointSet, u: u32, v: u32) {
        let w = dist(self.location(points, u), self.location(points, v));
        self.edges.push(Edge { u, v, w });
    }

    pub fn node_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.nodes.len()];
        for e in &self.edges {
            deg[e.u as usize] += 1;
            deg[e.v as usize] += 1;
        }
        deg
    }

    /// Degree of every point id, summed over all nodes that copy it.
    pub fn point_degrees(&self) -> BTreeMap<u32, usize> {
        let deg = self.node_degrees();
        let mut out = BTreeMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if let Location::Point(p) = n.loc {
                *out.entry(p).or_insert(0) += deg[i];
            }
        }
        out
    }

    /// Point ids present in the tree.
    pub fn point_ids(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self
            .nodes
            .iter()
            .filter_map(|n| match n.loc {
                Location::Point(p) => Some(p),
                Location::Steiner(_) => None,
            })
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn metric(&self) -> Result<TreeMetric> {
        TreeMetric::new(self)
    }

    /// Tree distance between two point ids (minimum over copies).
    pub fn tree_distance(&self, a: u32, b: u32) -> Result<f64> {
        self.metric()?.point_distance(a, b)
    }

    pub fn audit(&self, points: &PointSet) -> AuditReport {
        audit(self, points)
    }
}

/// Rooted view of a tree answering distance queries in O(log n).
#[derive(Clone, Debug)]
pub struct TreeMetric {
    parent: Vec<u32>,
    depth: Vec<u32>,
    from_root: Vec<f64>,
    up: Vec<Vec<u32>>,
    copies: BTreeMap<u32, Vec<u32>>,
    /// Adjacency lists (neighbor, weight).
    pub adj: Vec<Vec<(u32, f64)>>,
    /// Nodes in BFS order from the root.
    pub order: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl TreeMetric {
    pub fn new(t: &CoverTree) -> Result<Self> {
        let n = t.nodes.len();
        if n == 0 {
            return Err(Error::NotATree("no nodes".into()));
        }
        if t.edges.len() + 1 != n {
            return Err(Error::NotATree(format!("{} nodes but {} edges", n, t.edges.len())));
        }
        let mut adj = vec![Vec::new(); n];
        for e in &t.edges {
            if e.u as usize >= n || e.v as usize >= n {
                return Err(Error::NotATree("edge endpoint out of range".into()));
            }
            adj[e.u as usize].push((e.v, e.w));
            adj[e.v as usize].push((e.u, e.w));
        }
        let mut parent = vec![NONE; n];
        let mut depth = vec![0u32; n];
        let mut from_root = vec![0.0; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let root = t.root as usize;
        seen[root] = true;
        order.push(root as u32);
        let mut head = 0;
        while head < order.len() {
            let u = order[head] as usize;
            head += 1;
            for &(v, w) in &adj[u] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    parent[v as usize] = u as u32;
                    depth[v as usize] = depth[u] + 1;
                    from_root[v as usize] = from_root[u] + w;
                    order.push(v);
                }
            }
        }
        if order.len() != n {
            return Err(Error::NotATree(format!("disconnected: {} of {} nodes reachable", order.len(), n)));
        }
        let mut up = vec![parent.iter().map(|&p| if p == NONE { root as u32 } else { p }).collect::<Vec<_>>()];
        let levels = (usize::BITS - n.leading_zeros()) as usize;
        for l in 1..levels.max(1) {
            let prev = &up[l - 1];
            let next = prev.iter().map(|&p| prev[p as usize]).collect();
            up.push(next);
        }
        let mut copies: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (i, node) in t.nodes.iter().enumerate() {
            if let Location::Point(p) = node.loc {
                copies.entry(p).or_default().push(i as u32);
            }
        }
        Ok(TreeMetric { parent, depth, from_root, up, copies, adj, order })
    }

    pub fn parent(&self, v: u32) -> Option<u32> {
        let p = self.parent[v as usize];
        (p != NONE).then_some(p)
    }

    pub fn depth(&self, v: u32) -> u32 {
        self.depth[v as usize]
    }

    pub fn lca(&self, mut a: u32, mut b: u32) -> u32 {
        if self.depth[a as usize] < self.depth[b as usize] {
            core::mem::swap(&mut a, &mut b);
        }
        let mut diff = self.depth[a as usize] - self.depth[b as usize];
        let mut l = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                a = self.up[l][a as usize];
            }
            diff >>= 1;
            l += 1;
        }
        if a == b {
            return a;
        }
        for l in (0..self.up.len()).rev() {
            let (x, y) = (self.up[l][a as usize], self.up[l][b as usize]);
            if x != y {
                a = x;
                b = y;
            }
        }
        self.parent[a as usize]
    }

    pub fn node_distance(&self, a: u32, b: u32) -> f64 {
        let c = self.lca(a, b);
        self.from_root[a as usize] + self.from_root[b as usize] - 2.0 * self.from_root[c as usize]
    }

    /// Nodes copying a point id.
    pub fn copies(&self, p: u32) -> &[u32] {
        self.copies.get(&p).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Minimum over copies of both points.
    pub fn point_distance(&self, a: u32, b: u32) -> Result<f64> {
        let ca = self.copies.get(&a).ok_or(Error::UnknownPoint(a as usize))?;
        let cb = self.copies.get(&b).ok_or(Error::UnknownPoint(b as usize))?;
        let mut best = f64::INFINITY;
        for &x in ca {
            for &y in cb {
                best = best.min(self.node_distance(x, y));
            }
        }
        Ok(best)
    }

    /// Node path between two nodes, inclusive.
    pub fn path(&self, a: u32, b: u32) -> Vec<u32> {
        let c = self.lca(a, b);
        let mut left = Vec::new();
        let mut x = a;
        while x != c {
            left.push(x);
            x = self.parent[x as usize];
        }
        left.push(c);
        let mut right = Vec::new();
        let mut y = b;
        while y != c {
            right.push(y);
            y = self.parent[y as usize];
        }
        left.extend(right.into_iter().rev());
        left
    }
}

/// Outcome of [`audit`].
#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub acyclic: bool,
    pub connected: bool,
    pub max_node_degree: usize,
    pub max_point_degree: usize,
    pub diameter: f64,
    pub weights_exact: bool,
}

impl AuditReport {
    pub fn is_tree(&self) -> bool {
        self.acyclic && self.connected
    }
}

/// Structural audit: tree shape, degrees, diameter and edge weights.
pub fn audit(t: &CoverTree, points: &PointSet) -> AuditReport {
    let n = t.nodes.len();
    // union-find detects cycles independent of the root
    let mut uf: Vec<u32> = (0..n as u32).collect();
    fn find(uf: &mut [u32], mut x: u32) -> u32 {
        while uf[x as usize] != x {
            uf[x as usize] = uf[uf[x as usize] as usize];
            x = uf[x as usize];
        }
        x
    }
    let mut acyclic = true;
    let mut components = n;
    for e in &t.edges {
        let (a, b) = (find(&mut uf, e.u), find(&mut uf, e.v));
        if a == b {
            acyclic = false;
        } else {
            uf[a as usize] = b;
            components -= 1;
        }
    }
    let connected = components <= 1;
    let deg = t.node_degrees();
    let max_node_degree = deg.iter().copied().max().unwrap_or(0);
    let max_point_degree = t.point_degrees().values().copied().max().unwrap_or(0);
    let weights_exact = t.edges.iter().all(|e| {
        let d = dist(t.location(points, e.u), t.location(points, e.v));
        (e.w - d).abs() <= 1e-9 * d.max(f64::MIN_POSITIVE) || (e.w == d)
    });
    let diameter = if acyclic && connected { tree_diameter(t) } else { f64::INFINITY };
    AuditReport { acyclic, connected, max_node_degree, max_point_degree, diameter, weights_exact }
}

/// Weighted diameter by two sweeps.
pub fn tree_diameter(t: &CoverTree) -> f64 {
    let n = t.nodes.len();
    if n <= 1 {
        return 0.0;
    }
    let mut adj = vec![Vec::new(); n];
    for e in &t.edges {
        adj[e.u as usize].push((e.v, e.w));
        adj[e.v as usize].push((e.u, e.w));
    }
    let far = |s: usize| -> (usize, f64) {
        let mut dist = vec![f64::NAN; n];
        dist[s] = 0.0;
        let mut stack = vec![s];
        let mut best = (s, 0.0);
        while let Some(u) = stack.pop() {
            if dist[u] > best.1 {
                best = (u, dist[u]);
            }
            for &(v, w) in &adj[u] {
                if dist[v as usize].is_nan() {
                    dist[v as usize] = dist[u] + w;
                    stack.push(v as usize);
                }
            }
        }
        best
    };
    let (a, _) = far(t.root as usize);
    far(a).1
}

/// Writes `cover` in the `.tc` text format. Floats use 17 significant digits
/// so every value parses back bit for bit. Node lines carry a trailing
/// `L <level>` when the level is known.
pub fn serialize(cover: &ExplicitCover) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "TREECOVER v1 d={} eps={:.16e} mode={} trees={}",
        cover.dim,
        cover.eps,
        cover.mode.name(),
        cover.trees.len()
    );
    for (id, t) in &cover.trees {
        let _ = writeln!(out, "T {} {} {} root={}", id.shift, id.class, id.k, t.root);
        for (i, node) in t.nodes.iter().enumerate() {
            let _ = write!(out, "N {i}");
            match &node.loc {
                Location::Point(p) => {
                    let _ = write!(out, " P {p}");
                }
                Location::Steiner(c) => {
                    out.push_str(" S");
                    for x in c {
                        let _ = write!(out, " {x:.16e}");
                    }
                }
            }
            if node.level != i32::MIN {
                let _ = write!(out, " L {}", node.level);
            }
            out.push('\n');
        }
        for e in &t.edges {
            let _ = writeln!(out, "E {} {} {:.16e}", e.u, e.v, e.w);
        }
    }
    out
}

struct Cursor<'a> {
    line: usize,
    tokens: Vec<&'a str>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: String) -> Error {
        Error::Parse { line: self.line, token: self.pos + 1, msg }
    }

    fn next(&mut self, what: &str) -> Result<&'a str> {
        let t = self.tokens.get(self.pos).copied().ok_or_else(|| self.err(format!("expected {what}")))?;
        self.pos += 1;
        Ok(t)
    }

    fn num<T: core::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let t = self.next(what)?;
        t.parse().map_err(|_| {
            self.pos -= 1;
            self.err(format!("bad {what} {t:?}"))
        })
    }

    fn keyed<T: core::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let t = self.next(key)?;
        let v = t.strip_prefix(key).and_then(|r| r.strip_prefix('=')).ok_or_else(|| {
            self.pos -= 1;
            self.err(format!("expected {key}=..."))
        })?;
        v.parse().map_err(|_| {
            self.pos -= 1;
            self.err(format!("bad {key} {v:?}"))
        })
    }

    fn word(&mut self, w: &str) -> Result<()> {
        if self.next(w)? != w {
            self.pos -= 1;
            return Err(self.err(format!("expected {w:?}")));
        }
        Ok(())
    }

    fn done(&self) -> Result<()> {
        if self.pos < self.tokens.len() {
            return Err(self.err(format!("unexpected {:?}", self.tokens[self.pos])));
        }
        Ok(())
    }
}

/// Parses the `.tc` text format. Every tree must be a tree over its listed
/// nodes; errors name the line and the 1-based token.
pub fn deserialize(text: &str) -> Result<ExplicitCover> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| Cursor { line: i + 1, tokens: l.split_whitespace().collect(), pos: 0 })
        .filter(|c| !c.tokens.is_empty());
    let mut head = lines.next().ok_or(Error::Parse { line: 1, token: 1, msg: "empty stream".into() })?;
    head.word("TREECOVER")?;
    head.word("v1")?;
    let dim: usize = head.keyed("d")?;
    let eps: f64 = head.keyed("eps")?;
    let mode_name: String = head.keyed("mode")?;
    let mode = Mode::parse(&mode_name).ok_or_else(|| {
        head.pos -= 1;
        head.err(format!("unknown mode {mode_name:?}"))
    })?;
    let count: usize = head.keyed("trees")?;
    head.done()?;
    if dim == 0 {
        return Err(Error::Parse { line: head.line, token: 3, msg: "d must be positive".into() });
    }
    let mut trees: Vec<(TreeId, CoverTree)> = Vec::with_capacity(count.min(1 << 16));
    let mut last_line = head.line;
    for mut c in lines {
        last_line = c.line;
        match c.next("record")? {
            "T" => {
                let id = TreeId { shift: c.num("shift")?, class: c.num("class")?, k: c.num("index")? };
                let root = c.keyed("root")?;
                c.done()?;
                trees.push((id, CoverTree { nodes: Vec::new(), edges: Vec::new(), root }));
            }
            "N" => {
                let (_, t) = trees.last_mut().ok_or_else(|| c.err("node before any tree".into()))?;
                let id: usize = c.num("node id")?;
                if id != t.nodes.len() {
                    c.pos -= 1;
                    return Err(c.err(format!("node id {id} out of order, expected {}", t.nodes.len())));
                }
                let loc = match c.next("P or S")? {
                    "P" => Location::Point(c.num("point id")?),
                    "S" => {
                        let mut xs = Vec::with_capacity(dim);
                        for _ in 0..dim {
                            xs.push(c.num::<f64>("coordinate")?);
                        }
                        Location::Steiner(xs)
                    }
                    other => {
                        c.pos -= 1;
                        return Err(c.err(format!("expected P or S, found {other:?}")));
                    }
                };
                let level = if c.pos < c.tokens.len() {
                    c.word("L")?;
                    c.num("level")?
                } else {
                    i32::MIN
                };
                c.done()?;
                t.nodes.push(TreeNode { loc, level });
            }
            "E" => {
                let (_, t) = trees.last_mut().ok_or_else(|| c.err("edge before any tree".into()))?;
                let e = Edge { u: c.num("endpoint")?, v: c.num("endpoint")?, w: c.num("weight")? };
                c.done()?;
                t.edges.push(e);
            }
            other => {
                c.pos -= 1;
                return Err(c.err(format!("unknown record {other:?}")));
            }
        }
    }
    if trees.len() != count {
        return Err(Error::Parse {
            line: last_line,
            token: 1,
            msg: format!("header announces {count} trees, found {}", trees.len()),
        });
    }
    for (id, t) in &trees {
        let bad = |msg: String| Error::Parse { line: last_line, token: 1, msg };
        let n = t.nodes.len();
        if n == 0 || t.root as usize >= n {
            return Err(bad(format!("tree {} {} {}: root outside its nodes", id.shift, id.class, id.k)));
        }
        if t.edges.iter().any(|e| e.u as usize >= n || e.v as usize >= n) {
            return Err(bad(format!("tree {} {} {}: edge endpoint outside its nodes", id.shift, id.class, id.k)));
        }
        if t.edges.len() + 1 != n || t.metric().is_err() {
            return Err(bad(format!("tree {} {} {}: edges do not form a tree", id.shift, id.class, id.k)));
        }
    }
    Ok(ExplicitCover { dim, eps, mode, trees })
}
