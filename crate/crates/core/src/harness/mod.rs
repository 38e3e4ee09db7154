//! Monte-Carlo experiments: configuration, drops, sweeps and result files.

pub mod config;
pub mod drop;
pub mod results;
pub mod scenario;

pub use config::{ScenarioConfig, Sweep, SweepVar};
pub use drop::{drop_seed, run_drop, DropContext, DropRecord, Stages};
pub use results::{write_results, write_svg_plots, Metric, ResultRow, ResultTable};
pub use scenario::{configure, layer_config, run_scenario, ScenarioKind};
