mod common;

use proptest::prelude::*;
use rand::Rng;
use treecover_core::geometry::PointSet;
use treecover_core::partial_nonsteiner::StripTreeStrategy;
use treecover_core::quadtree::{common_cell_ratio, dyadic_span, CoverParams, ShiftedQuadtreeFamily, ViewChild};
use treecover_core::tree_model::Mode;

fn family(x: &PointSet) -> ShiftedQuadtreeFamily {
    let p = CoverParams::new(x.dim(), 0.1, Mode::NonSteiner, StripTreeStrategy::DyadicBinary).unwrap();
    ShiftedQuadtreeFamily::build(x, &p).unwrap()
}

#[test]
fn shifted_cell_bound_holds_on_random_pairs() {
    for d in 1..=3usize {
        let bound = (4 * d.div_ceil(2) + 2) as f64;
        // extents that are and are not powers of two
        for (seed, side) in [(10u64, 1.0), (11, 0.37), (12, 3.1), (13, 1000.0)] {
            let x = common::uniform(d, 80, side, seed + d as u64 * 100);
            let f = family(&x);
            let mut r = common::rng(seed);
            let n = f.points().len() as u32;
            for _ in 0..1000 {
                let (a, b) = (r.gen_range(0..n), r.gen_range(0..n));
                if a == b {
                    continue;
                }
                let ratio = common_cell_ratio(&f, a, b);
                assert!(ratio <= bound, "d={d} side={side} pair ({a},{b}) ratio {ratio}");
            }
        }
    }
}

#[test]
fn shifts_use_a_dyadic_unit() {
    // extent 0.75: shifting by multiples of 0.25 keeps 0.499 and 0.5 apart
    // at every fine level (ratio 500); the dyadic unit 1 gives about 2
    let x = PointSet::new(1, vec![0.0, 0.499, 0.5, 0.75]).unwrap();
    let f = family(&x);
    assert_eq!(f.shifts, vec![0.0, 1.0 / 3.0, 2.0 / 3.0]);
    assert!(common_cell_ratio(&f, 1, 2) <= 6.0);
}

#[test]
fn hand_example_one_dimension() {
    let x = PointSet::new(1, vec![0.30, 0.42]).unwrap();
    let f = family(&x);
    assert_eq!(f.trees.len(), 3);
    assert!(f.smallest_common_side(0, 1) <= 0.72);
}

#[test]
fn dyadic_span_is_strictly_above() {
    assert_eq!(dyadic_span(1.0), 2.0);
    assert_eq!(dyadic_span(0.75), 1.0);
    assert_eq!(dyadic_span(0.0), 1.0);
    assert_eq!(dyadic_span(1000.0), 1024.0);
}

#[test]
fn trees_are_compressed_and_complete() {
    let x = common::uniform(2, 200, 1.0, 21);
    let f = family(&x);
    for t in &f.trees {
        assert!(t.is_compressed());
        let mut seen = vec![false; x.len()];
        for (p, &leaf) in t.leaf.iter().enumerate() {
            assert_eq!(t.points_of(leaf), &[p as u32]);
            seen[p] = true;
        }
        assert!(seen.into_iter().all(|s| s));
    }
}

/// Every internal node's points share one cell at its split level and fall
/// into distinct cells one level below, one cell per child.
fn assert_cells_nest(f: &ShiftedQuadtreeFamily) {
    let pts = f.points();
    for t in &f.trees {
        let cell = |p: u32, level: i32| -> Vec<i64> {
            (0..pts.dim())
                .map(|a| (((pts.get(p as usize)[a] - f.origin[a]) + t.shift) / 2f64.powi(level)).floor() as i64)
                .collect()
        };
        for node in t.nodes.iter().filter(|n| !n.is_leaf()) {
            let members = &t.order[node.lo as usize..node.hi as usize];
            assert!(members.iter().all(|&p| cell(p, node.level) == cell(members[0], node.level)));
            let mut seen = Vec::new();
            for &c in &node.children {
                let child = &t.nodes[c as usize];
                let ids = &t.order[child.lo as usize..child.hi as usize];
                let key = cell(ids[0], node.level - 1);
                assert!(ids.iter().all(|&p| cell(p, node.level - 1) == key));
                assert!(!seen.contains(&key));
                seen.push(key);
            }
        }
    }
}

#[test]
fn cells_nest_in_low_and_high_dimension() {
    // d = 9 exceeds the bucket split and takes the sorting path
    for (d, seed) in [(2, 24), (3, 25), (9, 26)] {
        let f = family(&common::uniform(d, 150, 1.0, seed));
        assert_cells_nest(&f);
        assert!(f.trees.iter().all(|t| t.is_compressed()));
    }
}

#[test]
fn view_lca_matches_brute_force_chains() {
    let x = common::uniform(2, 60, 1.0, 22);
    let f = family(&x);
    let mut r = common::rng(23);
    for view in f.views.iter().step_by(5) {
        for _ in 0..200 {
            let (a, b, c) = (r.gen_range(0..60u32), r.gen_range(0..60u32), r.gen_range(0..60u32));
            let (ca, cb) = (view.chain(a), view.chain(b));
            let brute = ca.iter().find(|cell| cb.contains(cell)).copied();
            assert_eq!(view.lca_cell(a, b), brute);
            // lca(a, c) is an ancestor of lca(a, b) whenever b lies under lca(a, c)
            if let (Some(ab), Some(ac)) = (view.lca_cell(a, b), view.lca_cell(a, c)) {
                if view.chain(b).contains(&ac) {
                    assert!(view.chain(a).iter().position(|&z| z == ab) <= view.chain(a).iter().position(|&z| z == ac));
                }
            }
            // child_toward is a child of the lca holding the point
            if a != b {
                let l = view.lca_cell(a, b).unwrap();
                match view.child_toward(l, a).unwrap() {
                    ViewChild::Point(p) => assert_eq!(p, a),
                    ViewChild::Cell(c) => assert!(ca.contains(&c) && view.cells[c as usize].parent == Some(l)),
                }
            }
        }
    }
}

#[test]
fn view_levels_follow_the_class() {
    let x = common::uniform(2, 100, 1.0, 24);
    let f = family(&x);
    let ell = f.params.ell as i32;
    for view in &f.views {
        for cell in &view.cells {
            assert_eq!(cell.level.rem_euclid(ell), view.class as i32);
            if let Some(p) = cell.parent {
                assert!(view.cells[p as usize].level >= cell.level + ell);
            }
            assert!(cell.children.len() >= 2);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_point_hangs_off_one_cell(coords in prop::collection::vec(0.0f64..10.0, 2..40)) {
        let n = coords.len() / 2;
        prop_assume!(n >= 1);
        let x = PointSet::new(2, coords[..2 * n].to_vec()).unwrap();
        let f = family(&x);
        for view in &f.views {
            let mut hits = vec![0usize; f.points().len()];
            for cell in &view.cells {
                for ch in &cell.children {
                    if let ViewChild::Point(p) = ch {
                        hits[*p as usize] += 1;
                    }
                }
            }
            if !view.cells.is_empty() {
                prop_assert!(hits.iter().all(|&h| h == 1));
            }
        }
    }
}
