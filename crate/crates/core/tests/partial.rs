mod common;

use rand::Rng;
use treecover_core::geometry::{dist, PointSet};
use treecover_core::partial_nonsteiner::{
    build_strip_pair_tree, partial_cover_nonsteiner, Anchor, Search, StripFamily, StripTreeStrategy,
};
use treecover_core::partial_steiner::{partial_cover_steiner, SlabFamily};
use treecover_core::quadtree::mu_for;
use treecover_core::verify::{far_pairs, partial_oracle, PartialVerdict};

#[test]
fn plane_family_has_two_partitions_per_direction() {
    let mu = mu_for(2);
    for eps in [0.1, 0.05, 0.025] {
        let f = StripFamily::new(2, eps, mu, 1.0).unwrap();
        assert_eq!(f.partition_count(), 2 * (8.0 * std::f64::consts::PI * mu / eps).ceil() as u128);
    }
}

#[test]
fn nonsteiner_count_scales_linearly() {
    let mu = mu_for(2);
    let a = StripFamily::new(2, 0.1, mu, 1.0).unwrap().tau() as f64;
    let b = StripFamily::new(2, 0.05, mu, 1.0).unwrap().tau() as f64;
    assert!((1.7..=2.3).contains(&(b / a)), "ratio {}", b / a);
}

#[test]
fn steiner_count_scales_with_the_square_root() {
    let mu = mu_for(2);
    let a = SlabFamily::new(&[0.0, 0.0], 1.0, 0.16, mu).unwrap().tau() as f64;
    let b = SlabFamily::new(&[0.0, 0.0], 1.0, 0.04, mu).unwrap().tau() as f64;
    assert!((1.6..=2.4).contains(&(b / a)), "ratio {}", b / a);
}

#[test]
fn far_pairs_have_strip_witnesses() {
    let mu = mu_for(2);
    let f = StripFamily::new(2, 0.025, mu, 1.0).unwrap();
    let cube = [0.0, 0.0];
    let mut r = common::rng(31);
    let mut checked = 0;
    while checked < 1000 {
        let a = [r.gen::<f64>() * 0.7, r.gen::<f64>() * 0.7];
        let b = [r.gen::<f64>() * 0.7, r.gen::<f64>() * 0.7];
        let d = dist(&a, &b);
        if d < 1.0 / mu || d > 1.0 {
            continue;
        }
        let anchor = Anchor::Cube { corner: &cube, side: 0.7 };
        assert!(!f.witnesses(&a, &b, anchor, Search::Exhaustive).is_empty(), "{a:?} {b:?}");
        checked += 1;
    }
    let pts = PointSet::new(2, vec![0.3, 0.3]).unwrap();
    assert!(f.witnesses(&[0.3, 0.3], &[0.3, 0.3], Anchor::Points(&pts), Search::Exhaustive).is_empty());
}

#[test]
fn dyadic_binary_strip_tree_is_sparse_and_short() {
    let mu = mu_for(2);
    let eps = 0.025;
    let f = StripFamily::new(2, eps, mu, 1.0).unwrap();
    let mut r = common::rng(32);
    let width = f.major_width;
    for trial in 0..20 {
        // 30 points per side of a horizontal strip, sides far apart along θ = (1, 0)
        let mut coords = Vec::new();
        for side in 0..2 {
            for _ in 0..30 {
                let x = if side == 0 { r.gen::<f64>() * 0.3 } else { 0.7 + r.gen::<f64>() * 0.3 };
                coords.extend([x, 0.5 + r.gen::<f64>() * width * 0.99]);
            }
        }
        let pts = PointSet::new(2, coords).unwrap();
        let frame = f.frame(0, 0, Anchor::Cube { corner: &[0.0, 0.5 - 1e-12], side: 1.0 });
        let a: Vec<u32> = (0..30).collect();
        let b: Vec<u32> = (30..60).collect();
        let t = build_strip_pair_tree(&pts, &a, &b, &frame, StripTreeStrategy::DyadicBinary).unwrap();
        let audit = t.audit(&pts);
        assert!(audit.is_tree() && audit.max_node_degree <= 5, "trial {trial}");
        let m = t.metric().unwrap();
        for &p in &a {
            for &q in &b {
                let s = m.point_distance(p, q).unwrap() / dist(pts.get(p as usize), pts.get(q as usize));
                assert!(s <= 1.0 + eps, "trial {trial} pair ({p},{q}) stretch {s}");
            }
        }
    }
}

#[test]
fn two_far_points_have_a_short_tree() {
    let x = PointSet::new(2, vec![0.1, 0.1, 0.1 + 0.3, 0.1 + 0.4]).unwrap();
    let c = partial_cover_nonsteiner(&x, 1.0, 0.025, StripTreeStrategy::DyadicBinary).unwrap();
    let (_, s) = c.best_witness(0, 1, Search::Exhaustive).unwrap();
    assert!(s <= 1.025);
    // a pair that is not far still gets valid trees
    let y = PointSet::new(2, vec![0.0, 0.0, 1e-4, 0.0]).unwrap();
    let c = partial_cover_nonsteiner(&y, 1.0, 0.025, StripTreeStrategy::Star).unwrap();
    assert!(c.tree(12345).unwrap().audit(&y).is_tree());
}

#[test]
fn partial_oracle_passes_on_random_cells() {
    let mu = mu_for(2);
    for seed in 0..5u64 {
        let x = common::uniform(2, 12, 0.7, 40 + seed);
        let c = partial_cover_nonsteiner(&x, 1.0, 0.025, StripTreeStrategy::DyadicBinary).unwrap();
        let mut ks: Vec<u128> = Vec::new();
        for (a, b) in far_pairs(&x, mu, 1.0) {
            ks.extend(c.witnesses(a, b, Search::Exhaustive).iter().map(|w| w.k));
        }
        ks.sort_unstable();
        ks.dedup();
        let trees: Vec<_> = ks.iter().map(|&k| c.tree(k).unwrap()).collect();
        assert!(matches!(partial_oracle(&x, &trees, mu, 1.0, 0.025).unwrap(), PartialVerdict::Pass { .. }));
        // dropping every tree of one pair yields a named counterexample
        let (a, b) = far_pairs(&x, mu, 1.0)[0];
        let theirs: Vec<u128> = c.witnesses(a, b, Search::Exhaustive).iter().map(|w| w.k).collect();
        let kept: Vec<_> = ks.iter().filter(|k| !theirs.contains(k)).map(|&k| c.tree(k).unwrap()).collect();
        if let PartialVerdict::Fail { pair, .. } = partial_oracle(&x, &kept, mu, 1.0, 0.025).unwrap() {
            assert!(pair.0 < pair.1);
        }
    }
}

#[test]
fn slabs_separate_far_pairs_in_space() {
    let mu = mu_for(3);
    let f = SlabFamily::new(&[0.0, 0.0, 0.0], 1.0, 0.025, mu).unwrap();
    let mut r = common::rng(33);
    let mut checked = 0;
    while checked < 1000 {
        let a: Vec<f64> = (0..3).map(|_| r.gen::<f64>() * 0.577).collect();
        let b: Vec<f64> = (0..3).map(|_| r.gen::<f64>() * 0.577).collect();
        let d = dist(&a, &b);
        if d < 1.0 / mu {
            continue;
        }
        assert!(f.separates(&a, &b));
        let (_, len) = f.witnesses(&a, &b)[0];
        assert!(len <= (1.0 + 0.025) * d + 1e-12);
        checked += 1;
    }
    assert!(!f.separates(&[0.2, 0.2, 0.2], &[0.2, 0.2, 0.2]));
}

#[test]
fn steiner_stars_stay_within_the_diameter_bound() {
    for d in 2..=3usize {
        let x = common::uniform(d, 25, 1.0 / (d as f64).sqrt(), 50 + d as u64);
        let c = partial_cover_steiner(&x, 1.0, 0.025).unwrap();
        let bound = if d == 2 { 3.0 } else { 2.0 * (d as f64).sqrt() };
        let mut r = common::rng(51);
        for _ in 0..200 {
            let t = c.tree(r.gen_range(0..c.len())).unwrap();
            assert!(t.audit(&x).diameter <= bound);
        }
    }
    let one = PointSet::new(2, vec![0.5, 0.5]).unwrap();
    let c = partial_cover_steiner(&one, 1.0, 0.025).unwrap();
    assert_eq!(c.tree(0).unwrap().edges.len(), 1);
}
