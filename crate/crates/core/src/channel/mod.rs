//! Anticipated per-slot capacities from a simple cellular radio model.

mod allocation;
mod radio;
mod scenario;

pub use allocation::allocate_proportional_fair;
pub use radio::{path_loss_db, shannon_rate_mbps, uncapped_rate_mbps, RadioParams};
pub use scenario::{build_scenario, parse_channel_config, BuiltScenario, ScenarioConfig, SAMPLES_PER_SLOT};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("distance must be positive, got {0} km")]
    NonPositiveDistance(f64),
    #[error("invalid channel configuration: {0}")]
    Config(String),
}
