//! Configuration, seeded experiment drivers, CSV/JSON emission and the CLI.

pub mod cli;
pub mod config;
pub mod heatmap;
pub mod io;
pub mod pipeline;
pub mod sweep;

pub use config::{parse_grid, ExperimentConfig};
pub use heatmap::{cascade_heatmap, Heatmap, HeatmapRow};
pub use pipeline::{baseline_run, simulate_run, BaselineReport, RunMode, RunSummary};
pub use sweep::{crossings, noise_sweep, SweepRow};
