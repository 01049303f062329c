//! Configuration, sweeps and figure regeneration on top of the solvers.

pub mod config;
pub mod figure;
pub mod sweep;

pub use config::{
    parse_config, Axis, GridConfig, Observable, RunConfig, SolverConfig, SteadyResult, SweepConfig,
    SweepSpec,
};
pub use figure::{reproduce_figure, FigureId, FigureSpec, Manifest};
pub use sweep::{run_sweep, SweepRow, SweepTable};
