//! Scenario ingestion, the closed loop, metrics, batches and figures.

pub mod batch;
pub mod controller;
pub mod episode;
pub mod log;
pub mod metrics;
pub mod plot;
pub mod scenario;

pub use batch::{load_scenario_dir, run_batch, BatchResult, BatchRow, SummaryRow};
pub use controller::{Algorithm, ControllerConfig, CycleOutput, EroasPlanner, Planner};
pub use episode::{run_episode, run_episode_with, Dumps};
pub use log::{LogRecord, TrajectoryLog};
pub use metrics::{compute_metrics, CycleTimes, Metrics, Outcome};
pub use plot::emit_plots;
pub use scenario::{ClutterSpec, Scenario, Start};
