//! Experiment harness: configs, runs, traces, summaries and plots.

pub mod cli;
mod config;
mod plot;
mod runner;
mod summary;
mod trace;

pub use config::{
    BuiltProblem, ExperimentConfig, ProblemSpec, RunSpec, DEFAULT_ETA_GRID, DEFAULT_WEIGHT_DECAY,
};
pub use plot::{emit_plot, render_svg, PlotKind, PlotOptions};
pub use runner::{
    plan_jobs, run_experiment, run_single, run_traces, sample_key, write_traces, RunJob,
    LEMMA2_RUN_TOLERANCE,
};
pub use summary::{
    grid_select, least_squares_slope, render_table, summarize, GridChoice, SelectionMetric, Summary,
};
pub use trace::{state_snapshot, write_index, RunTrace, TraceRow, TRACE_COLUMNS};
