//! Configuration, batch sweeps over a wavenumber grid, CSV/JSON export and
//! SVG plots.

mod config;
mod export;
mod plot;
mod run;

pub use config::{
    parse_config, sha256_hex, BranchSelection, ConfigError, Outputs, RunConfig, Tolerances,
};
pub use export::{columns, row_cells, to_csv, to_json, Cell, SWEEP_SCHEMA_VERSION};
pub use plot::{emit_plots, render_boundedness, render_dispersion};
pub use run::{run_sweep, BranchCells, SweepError, SweepResult, SweepRow};
