mod common;

use proptest::prelude::*;
use rand::Rng;
use treecover_core::geometry::{
    direction_net, dist, dot, score, shifted_grid_family, Direction, DirectionNet, StripPartition,
};

/// Distance through a compensated sum, as an independent oracle.
fn kahan_dist(p: &[f64], q: &[f64]) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for (a, b) in p.iter().zip(q) {
        let y = (a - b) * (a - b) - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum.sqrt()
}

#[test]
fn pythagorean_and_identity() {
    assert_eq!(dist(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
    assert_eq!(dist(&[1.5, -2.0], &[1.5, -2.0]), 0.0);
}

#[test]
fn random_three_dimensional_distances_match_oracle() {
    let mut r = common::rng(1);
    for _ in 0..1000 {
        let p: Vec<f64> = (0..3).map(|_| r.gen_range(-1e3..1e3)).collect();
        let q: Vec<f64> = (0..3).map(|_| r.gen_range(-1e3..1e3)).collect();
        let (a, b) = (dist(&p, &q), kahan_dist(&p, &q));
        assert!((a - b).abs() <= 1e-12 * b.max(1.0));
    }
}

#[test]
fn score_examples() {
    let x = Direction::new(vec![1.0, 0.0]).unwrap();
    assert_eq!(score(&[2.0, 0.0], &x).unwrap(), 2.0);
    let mut r = common::rng(2);
    for _ in 0..50 {
        let theta = Direction::new(common::unit_vector(&mut r, 3)).unwrap();
        let p: Vec<f64> = (0..3).map(|_| r.gen_range(-5.0..5.0)).collect();
        let brute: f64 = p.iter().zip(&theta.vector).map(|(a, b)| a * b).sum();
        assert!((score(&p, &theta).unwrap() - brute).abs() < 1e-12);
        let alpha = r.gen_range(-3.0..3.0);
        let moved: Vec<f64> = p.iter().zip(&theta.vector).map(|(a, t)| a + alpha * t).collect();
        assert!((score(&moved, &theta).unwrap() - score(&p, &theta).unwrap() - alpha).abs() < 1e-12);
    }
}

#[test]
fn plane_net_matches_the_angle_family() {
    let mu = 20.0 * 2f64.sqrt();
    let eps = 0.1;
    let angle = eps / (4.0 * mu);
    let net = direction_net(2, angle).unwrap();
    assert_eq!(net.len(), (8.0 * std::f64::consts::PI * mu / eps).ceil() as u128);
    for i in [0u128, 1, 17, net.len() - 1] {
        let v = net.get(i).vector;
        let a = i as f64 * angle;
        assert!((v[0] - a.cos()).abs() < 1e-15 && (v[1] - a.sin()).abs() < 1e-15);
    }
    assert_eq!(direction_net(1, 0.5).unwrap(), DirectionNet::Line);
}

#[test]
fn space_net_covers_random_directions() {
    let net = direction_net(3, 0.1).unwrap();
    let mut r = common::rng(3);
    for _ in 0..10_000 {
        let v = common::unit_vector(&mut r, 3);
        let best = net.get(net.nearest(&v));
        assert!(dot(&v, &best.vector).clamp(-1.0, 1.0).acos() <= 0.1, "{v:?}");
    }
}

#[test]
fn grid_family_coverage() {
    let fam = shifted_grid_family(1, 1.0).unwrap();
    assert!(fam.iter().any(|g| g.cell(&[0.9]) == g.cell(&[1.7])));
    let fam = shifted_grid_family(2, 1.0).unwrap();
    let mut r = common::rng(4);
    for _ in 0..1000 {
        let p = [r.gen_range(-50.0..50.0), r.gen_range(-50.0..50.0)];
        let v = common::unit_vector(&mut r, 2);
        let len = r.gen_range(0.0..1.0);
        let q = [p[0] + len * v[0], p[1] + len * v[1]];
        assert!(fam.iter().any(|g| g.cell(&p) == g.cell(&q)), "{p:?} {q:?}");
    }
}

#[test]
fn strip_conventions() {
    let s = StripPartition::new(Direction::new(vec![1.0, 0.0]).unwrap(), 1.0, 0.0);
    // the strip index runs along the normal (0, 1)
    assert_eq!(s.strip_index(&[5.0, 3.2]), vec![3]);
    // boundaries belong to the upper strip
    assert_eq!(s.strip_index(&[0.0, 2.0]), vec![2]);
    assert_eq!(s.strip_index(&[0.0, 3.0])[0] - s.strip_index(&[0.0, 2.0])[0], 1);
}

proptest! {
    #[test]
    fn distance_is_a_metric(p in prop::collection::vec(-1e6f64..1e6, 3), q in prop::collection::vec(-1e6f64..1e6, 3), z in prop::collection::vec(-1e6f64..1e6, 3)) {
        prop_assert_eq!(dist(&p, &q), dist(&q, &p));
        prop_assert!(dist(&p, &z) <= dist(&p, &q) + dist(&q, &z) + 1e-6);
    }

    #[test]
    fn a_point_has_one_cell_per_partition(x in -1e3f64..1e3, y in -1e3f64..1e3) {
        for g in shifted_grid_family(2, 0.7).unwrap() {
            let c = g.cell(&[x, y]);
            for (axis, &i) in c.iter().enumerate() {
                let lo = g.shift[axis] + i as f64 * g.side;
                let v = [x, y][axis];
                prop_assert!(lo <= v + 1e-9 && v < lo + g.side + 1e-9);
            }
        }
    }
}
