//! Exact cut & project model sets and their finite-scale pattern analysis.

pub mod cli;
pub mod cps;
pub mod defaults;
pub mod dynamics;
pub mod exact;
pub mod internal;
pub mod patterns;
pub mod plot;
pub mod presets;
