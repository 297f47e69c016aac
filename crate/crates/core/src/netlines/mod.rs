//! Constructive growth of one-hidden-layer threshold networks.

mod appendix;
mod growth;
mod network;

pub use appendix::{appendix_output_update, appendix_unit, fallback_step, fallback_step_within, AppendixUnit, FallbackRoute, FallbackStep};
pub use growth::{train_netlines, Growth, GrowthConfig, GrowthTrace};
pub use network::{InternalRepresentation, NetLinesNetwork};
