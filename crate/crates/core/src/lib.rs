//! Construction and verification of quantum CSS product codes.
//!
//! The crate builds hypergraph, lifted and balanced product codes from
//! classical inputs, checks their structural properties (commutation, logical
//! counts, distances, covering maps, free actions) and assigns every qubit and
//! check a coordinate so the codes can be drawn.

pub mod classical;
pub mod css;
pub mod formats;
pub mod gf2;
pub mod graph;
pub mod group_ring;
pub mod layout;
pub mod product;
