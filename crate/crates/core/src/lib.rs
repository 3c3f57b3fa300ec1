//! Kähler-Einstein potentials on disk bundles, Fefferman ambient tensors and
//! CR obstruction functions, all computed from truncated Taylor jets.

pub mod jets;
pub mod charts;
pub mod curvature;
pub mod ke_ode;
pub mod monge_ampere;
pub mod fefferman;
pub mod obstruction;
pub mod cli;
