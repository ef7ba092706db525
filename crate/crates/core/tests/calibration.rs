//! The internal scale must leave room: measured stretch stays within half
//! the user's budget.
mod common;

use treecover_core::assembly::{DegreeReduction, ImplicitCover};
use treecover_core::partial_nonsteiner::StripTreeStrategy;
use treecover_core::quadtree::CoverParams;
use treecover_core::tree_model::Mode;
use treecover_core::verify::{all_pairs, implicit_stretch};

#[test]
fn stretch_uses_at_most_half_the_budget() {
    for d in 1..=3 {
        for mode in [Mode::NonSteiner, Mode::Steiner] {
            for (eps, seed) in [(0.1, 100), (0.19, 101)] {
                let x = common::uniform(d, 60, 1.0, seed + d as u64);
                let p = CoverParams::new(d, eps, mode, StripTreeStrategy::DyadicBinary).unwrap();
                let c = ImplicitCover::build(&x, &p).unwrap();
                let red = if mode == Mode::NonSteiner { DegreeReduction::Global } else { DegreeReduction::None };
                let target = 1.0 + eps / 2.0;
                let r = implicit_stretch(&c, red, &all_pairs(60), target, 2).unwrap();
                assert!(r.max_stretch <= target, "d={d} {mode:?} eps={eps}: {} ({:?})", r.max_stretch, r.worst);
            }
        }
    }
}
