//! Exact metric toolkit for graphs whose distances are countable ordinals.
//!
//! Finite descriptions ("gadgets": branches, segments, rays, endless paths,
//! ladders) denote transfinite graphs; path lengths follow run-absorption
//! semantics over Cantor normal forms. On top of that the crate computes
//! exact distances, geodesic witnesses, symbolic distances to infinite node
//! families, eccentricities with radius/diameter/center/periphery, rank
//! sections, block decompositions, and the cycle-free tree reduction.

pub mod error;
pub mod ordinal;
pub mod length;
pub mod graph;
pub mod geodesic;
pub mod eccentricity;
pub mod sections;
pub mod blocks;
pub mod tree;
pub mod gen;

pub use error::{Error, Result};
pub use ordinal::{family_sup, rank_sup, AffineFamilyBranch, Exp, Ordinal, Rank};
