//! Euclidean tree covers with (1+ε) stretch, bounded metric-point degree and a
//! compact routing scheme built on top of the cover.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line and
//! timing live in the companion `treecover` crate.
//!
//! The cover is *implicit*: [`assembly::ImplicitCover`] stores the shifted
//! quadtrees and their contracted views, and any tree of the cover is
//! materialized from its index `(shift, class, partial index)` on demand. The
//! index space is far too large to enumerate for realistic ε (billions of
//! trees at ε = 0.1 in the plane).

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod assembly;
pub mod degree_reduction;
pub mod geometry;
pub mod partial_nonsteiner;
pub mod partial_steiner;
pub mod quadtree;
pub mod routing;
pub mod tree_model;
pub mod verify;

mod error;

pub use error::Error;

/// Result alias used across the crate.
pub type Result<T> = core::result::Result<T, Error>;
