//! Anticipatory scheduling of segmented video downloads.
//!
//! Given per-slot capacity forecasts for each user, the schedulers decide in
//! which slot every segment is downloaded and at which quality, trading
//! playback stalls against quality and buffer occupancy. Around them sit a
//! cellular channel model that produces forecasts, an HLS playlist toolkit
//! that turns a schedule into player instructions, and an experiment
//! harness.

pub mod channel;
pub mod error;
pub mod experiment;
pub mod hls;
pub mod io;
pub mod kv;
pub mod metrics;
pub mod model;
pub mod schedulers;

pub use error::{FormatError, ModelError};
pub use metrics::{
    buffer_timeline, compute_metrics, lateness, objective_value, validate_schedule, MetricsReport, Violation,
};
pub use model::{ObjectiveWeights, Placement, QualityLadder, QualityLevel, Scenario, Schedule, UserSchedule};
pub use schedulers::{run_scheduler, ExactError, SchedulerKind, SchedulerOptions};
