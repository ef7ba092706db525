mod common;

use proptest::prelude::*;
use rand::Rng;
use treecover_core::geometry::PointSet;
use treecover_core::tree_model::{deserialize, serialize, CoverTree, ExplicitCover, Location, Mode, TreeId, TreeNode};

/// Random tree on `n` points: node i > 0 hangs off a random earlier node.
fn random_tree(points: &PointSet, seed: u64) -> CoverTree {
    let n = points.len() as u32;
    let mut r = common::rng(seed);
    let mut t = CoverTree {
        nodes: (0..n).map(|p| TreeNode { loc: Location::Point(p), level: r.gen_range(-5..5) }).collect(),
        edges: Vec::new(),
        root: 0,
    };
    for v in 1..n {
        let u = r.gen_range(0..v);
        t.push_edge(points, u, v);
    }
    t
}

/// Shortest path by plain relaxation over the edge list.
fn bellman_ford(t: &CoverTree, from: u32) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; t.nodes.len()];
    d[from as usize] = 0.0;
    for _ in 0..t.nodes.len() {
        for e in &t.edges {
            let (u, v) = (e.u as usize, e.v as usize);
            if d[u] + e.w < d[v] {
                d[v] = d[u] + e.w;
            }
            if d[v] + e.w < d[u] {
                d[u] = d[v] + e.w;
            }
        }
    }
    d
}

#[test]
fn tree_distance_matches_graph_search() {
    for seed in 0..10 {
        let x = common::uniform(2, 40, 1.0, seed);
        let t = random_tree(&x, seed + 100);
        let m = t.metric().unwrap();
        for a in 0..40u32 {
            let oracle = bellman_ford(&t, a);
            for b in 0..40u32 {
                assert!((m.node_distance(a, b) - oracle[b as usize]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn star_distance_runs_through_the_center() {
    let x = PointSet::new(2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 2.0]).unwrap();
    let mut t = CoverTree::single(0);
    for p in [1, 2] {
        t.nodes.push(TreeNode { loc: Location::Point(p), level: i32::MIN });
        t.push_edge(&x, 0, p);
    }
    assert_eq!(t.tree_distance(1, 2).unwrap(), 3.0);
    assert_eq!(t.tree_distance(2, 2).unwrap(), 0.0);
}

#[test]
fn empty_cover_round_trips() {
    let c = ExplicitCover { dim: 3, eps: 0.05, mode: Mode::NonSteiner, trees: Vec::new() };
    assert_eq!(deserialize(&serialize(&c)).unwrap(), c);
}

#[test]
fn single_edge_round_trips_bit_exactly() {
    let x = PointSet::new(2, vec![0.1, 0.2, 0.7, 1.0 / 3.0]).unwrap();
    let mut t = CoverTree::single(0);
    t.nodes.push(TreeNode { loc: Location::Point(1), level: i32::MIN });
    t.push_edge(&x, 0, 1);
    let c = ExplicitCover {
        dim: 2,
        eps: 0.1,
        mode: Mode::NonSteiner,
        trees: vec![(TreeId { shift: 0, class: 0, k: 9 }, t)],
    };
    let back = deserialize(&serialize(&c)).unwrap();
    assert_eq!(back.trees[0].1.edges[0].w.to_bits(), c.trees[0].1.edges[0].w.to_bits());
    assert_eq!(back, c);
}

#[test]
fn random_cover_reserializes_identically() {
    let x = common::uniform(3, 50, 10.0, 5);
    let mut trees = Vec::new();
    for k in 0..6u64 {
        let mut t = random_tree(&x, k);
        if k % 2 == 1 {
            // a Steiner hub hanging off the root
            t.nodes.push(TreeNode { loc: Location::Steiner(vec![1.0 / 7.0, 2.5, -3.0e-7]), level: i32::MIN });
            t.edges.push(treecover_core::tree_model::Edge { u: 0, v: 50, w: std::f64::consts::PI });
        }
        trees.push((TreeId { shift: k as u32 % 3, class: k as u32, k: (k as u128) << 90 }, t));
    }
    let c = ExplicitCover { dim: 3, eps: 0.04, mode: Mode::Steiner, trees };
    let text = serialize(&c);
    let back = deserialize(&text).unwrap();
    assert_eq!(back, c);
    assert_eq!(serialize(&back), text);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn audits_accept_random_trees(n in 1usize..60, seed in 0u64..1000) {
        let x = common::uniform(2, n, 1.0, seed);
        let t = random_tree(&x, seed);
        let a = t.audit(&x);
        prop_assert!(a.is_tree() && a.weights_exact);
        prop_assert_eq!(t.node_degrees().iter().sum::<usize>(), 2 * (n - 1));
    }

    #[test]
    fn a_dropped_edge_disconnects(n in 3usize..40, seed in 0u64..1000, drop in 0usize..1000) {
        let x = common::uniform(2, n, 1.0, seed);
        let mut t = random_tree(&x, seed);
        t.edges.remove(drop % (n - 1));
        prop_assert!(!t.audit(&x).connected);
        prop_assert!(t.metric().is_err());
    }
}
