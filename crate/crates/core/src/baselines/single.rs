//! Single-agent weighted-sum RL: one PPO agent sees every mask and is
//! rewarded with a fixed blend of the wirelength and thermal rewards.

use std::sync::Arc;

use crate::agents::{train, TrainConfig, TrainOutcome};
use crate::env::EnvMode;
use crate::error::Result;
use crate::model::BenchmarkConfig;

pub const WIRE_WEIGHT: f64 = 0.7;
pub const THERMAL_WEIGHT: f64 = 0.3;

pub fn single_agent_mode() -> EnvMode {
    EnvMode::SingleAgent {
        wire_weight: WIRE_WEIGHT,
        thermal_weight: THERMAL_WEIGHT,
        zero_thermal_channels: false,
    }
}

pub fn single_agent_rl(config: Arc<BenchmarkConfig>, tc: TrainConfig) -> Result<TrainOutcome> {
    train(config, tc, single_agent_mode())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{ActMode, ConvSpec, Trainer};
    use crate::env::AgentRole;
    use crate::testutil::toy_config;

    #[test]
    fn default_weights() {
        assert_eq!(single_agent_mode(), EnvMode::single_default());
        assert_eq!((WIRE_WEIGHT, THERMAL_WEIGHT), (0.7, 0.3));
    }

    #[test]
    fn pure_wire_weights_reproduce_wire_reward() {
        let cfg = Arc::new(toy_config(
            6,
            1.0,
            &[(2.0, 2.0, 120.0), (1.0, 2.0, 90.0), (1.0, 1.0, 20.0)],
            &[&[0, 1, 2], &[1, 2]],
        ));
        let mode = EnvMode::SingleAgent {
            wire_weight: 1.0,
            thermal_weight: 0.0,
            zero_thermal_channels: true,
        };
        let tc = TrainConfig {
            hidden: vec![ConvSpec::new(2, 3, 1)],
            ..Default::default()
        };
        let mut t = Trainer::new(cfg, tc, mode).unwrap();
        for ep in t.evaluate(5, ActMode::Sample, 1).unwrap() {
            for s in &ep.trace {
                assert_eq!(s.agent, AgentRole::Single);
                assert!((s.raw_reward - s.raw_wire_reward).abs() < 1e-9);
            }
        }
    }
}
