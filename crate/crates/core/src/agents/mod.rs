//! Policy/value networks and PPO training for the placement agents.

pub mod checkpoint;
pub mod dist;
pub mod gae;
pub mod nn;
pub mod ppo;
pub mod train;

pub use checkpoint::Checkpoint;
pub use nn::{ConvSpec, PolicyNet, PolicySpec, ValueNet};
pub use ppo::TrainConfig;
pub use train::{act, train, ActMode, Episode, EpisodeSummary, TrainOutcome, Trainer, UpdateReport};
