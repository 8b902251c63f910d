//! Rollout collection and the multi-agent PPO training loop.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::{AgentParams, Checkpoint};
use super::dist::MaskedCategorical;
use super::gae::{gae, normalize};
use super::nn::{PolicyNet, PolicySpec, ValueNet};
use super::ppo::{Learner, LossStats, Sample, TrainConfig};
use crate::env::{AgentRole, EnvMode, Observation, PlacementEnv, StepRecord};
use crate::error::{Error, Result};
use crate::grid::{Layout, PlacementState};
use crate::model::BenchmarkConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActMode {
    Sample,
    Greedy,
}

/// Picks an action for `obs`; the result is always feasible.
pub fn act(policy: &PolicyNet<f32>, obs: &Observation, mode: ActMode, rng: &mut ChaCha8Rng) -> Result<(usize, f32)> {
    let logits = policy.forward(&obs.data).logits;
    let dist = MaskedCategorical::new(&logits, &obs.feasible).ok_or_else(|| Error::PlacementDeadlock {
        chiplet: obs.chiplet.to_string(),
        step: obs.step_index,
    })?;
    let action = match mode {
        ActMode::Sample => dist.sample(rng),
        ActMode::Greedy => dist.greedy(),
    };
    Ok((action, dist.log_prob(action)))
}

/// Per-episode outcome. Raw returns are split by the role that acted; the
/// single agent contributes to both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub update: usize,
    pub episode: usize,
    pub wl: f64,
    pub temp: f64,
    pub raw_wire_return: f64,
    pub raw_thermal_return: f64,
    pub reward_return: f64,
    pub deadlock: bool,
}

#[derive(Debug, Clone)]
pub struct Episode {
    pub summary: EpisodeSummary,
    pub trace: Vec<StepRecord>,
    pub state: PlacementState,
    /// (agent index, sample, normalized reward, value estimate)
    samples: Vec<(usize, Sample<f32>, f64, f64)>,
}

impl Episode {
    pub fn layout(&self, config: &BenchmarkConfig) -> Option<Layout> {
        (!self.summary.deadlock).then(|| Layout::from_state(&self.state, config))
    }
}

fn play_episode(
    env: &mut PlacementEnv,
    learners: &[Learner],
    roles: &[AgentRole],
    mode: ActMode,
    deadlock_penalty: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Episode> {
    let mut obs = Some(env.reset(0)?);
    let mut trace = Vec::new();
    let mut samples = Vec::new();
    let (mut raw_wire, mut raw_thermal, mut reward_sum) = (0.0, 0.0, 0.0);
    let mut deadlock = false;
    while let Some(o) = obs.take() {
        let agent = roles.iter().position(|&r| r == o.role).expect("role has a learner");
        let learner = &learners[agent];
        let (action, log_prob) = act(&learner.policy, &o, mode, rng)?;
        let value = learner.value.value(o.step_index) as f64;
        let r = env.step(action)?;
        trace.push(StepRecord::from_result(o.step_index, env.config(), &r));
        if matches!(r.role, AgentRole::Wire | AgentRole::Single) {
            raw_wire += -r.raw_wl_delta;
        }
        if matches!(r.role, AgentRole::Thermal | AgentRole::Single) {
            raw_thermal += -r.raw_temp_delta;
        }
        let mut reward = r.reward;
        if r.deadlock {
            reward += deadlock_penalty;
            deadlock = true;
        }
        reward_sum += reward;
        samples.push((
            agent,
            Sample {
                step: o.step_index,
                obs: o.data,
                feasible: o.feasible,
                action,
                old_log_prob: log_prob,
                advantage: 0.0,
                ret: 0.0,
            },
            reward,
            value,
        ));
        obs = r.observation;
    }
    Ok(Episode {
        summary: EpisodeSummary {
            update: 0,
            episode: 0,
            wl: env.wirelength(),
            temp: env.hotspot(),
            raw_wire_return: raw_wire,
            raw_thermal_return: raw_thermal,
            reward_return: reward_sum,
            deadlock,
        },
        trace,
        state: env.state().clone(),
        samples,
    })
}

/// One row of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateReport {
    pub update: usize,
    pub losses: BTreeMap<AgentRole, LossStats>,
    pub mean_wl: f64,
    pub mean_temp: f64,
    pub mean_raw_wire_return: f64,
    pub mean_raw_thermal_return: f64,
    pub mean_reward_return: f64,
    pub deadlocks: usize,
    pub episodes: Vec<EpisodeSummary>,
}

pub struct Trainer {
    config: Arc<BenchmarkConfig>,
    tc: TrainConfig,
    mode: EnvMode,
    learners: Vec<Learner>,
    env: PlacementEnv,
    rng: ChaCha8Rng,
    updates_done: usize,
}

impl Trainer {
    pub fn new(config: Arc<BenchmarkConfig>, tc: TrainConfig, mode: EnvMode) -> Result<Self> {
        tc.validate()?;
        let env = PlacementEnv::new(config.clone(), mode)?;
        let mut rng = ChaCha8Rng::seed_from_u64(tc.seed);
        let learners = mode
            .roles()
            .iter()
            .map(|&role| {
                let spec = PolicySpec {
                    in_channels: role.channel_count(),
                    grid_n: config.grid_n,
                    hidden: tc.hidden.clone(),
                };
                Learner::new(
                    PolicyNet::new(spec, &mut rng),
                    ValueNet::new(config.chiplets.len()),
                    &tc,
                )
            })
            .collect();
        Ok(Trainer {
            config,
            tc,
            mode,
            learners,
            env,
            rng,
            updates_done: 0,
        })
    }

    /// Rebuilds the policies from a checkpoint. Optimizer state starts
    /// fresh, so the result is meant for evaluation.
    pub fn from_checkpoint(config: Arc<BenchmarkConfig>, tc: TrainConfig, mode: EnvMode, ckpt: &Checkpoint) -> Result<Self> {
        let mut t = Trainer::new(config, tc, mode)?;
        if ckpt.agents.len() != t.learners.len() {
            return Err(Error::config("checkpoint", "agent count does not match the mode"));
        }
        for (learner, (role, a)) in t.learners.iter_mut().zip(mode.roles().iter().zip(&ckpt.agents)) {
            if a.role != *role {
                return Err(Error::config("checkpoint", format!("expected {role} agent, found {}", a.role)));
            }
            let policy = PolicyNet::from_params(a.spec.clone(), a.policy.clone())
                .ok_or_else(|| Error::config("checkpoint", "policy parameter count mismatch"))?;
            let value = ValueNet::from_params(a.value_steps, a.value.clone())
                .ok_or_else(|| Error::config("checkpoint", "value parameter count mismatch"))?;
            *learner = Learner::new(policy, value, &t.tc);
        }
        t.updates_done = ckpt.update;
        Ok(t)
    }

    pub fn config(&self) -> &BenchmarkConfig {
        &self.config
    }

    pub fn train_config(&self) -> &TrainConfig {
        &self.tc
    }

    pub fn mode(&self) -> EnvMode {
        self.mode
    }

    pub fn updates_done(&self) -> usize {
        self.updates_done
    }

    pub fn learners(&self) -> &[Learner] {
        &self.learners
    }

    /// Plays one episode with the training RNG.
    pub fn rollout(&mut self, mode: ActMode) -> Result<Episode> {
        play_episode(
            &mut self.env,
            &self.learners,
            self.mode.roles(),
            mode,
            self.tc.deadlock_penalty,
            &mut self.rng,
        )
    }

    /// Plays `episodes` evaluation episodes on a private RNG so that
    /// evaluation never perturbs the training stream.
    pub fn evaluate(&mut self, episodes: usize, mode: ActMode, seed: u64) -> Result<Vec<Episode>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..episodes)
            .map(|i| {
                let mut ep = play_episode(
                    &mut self.env,
                    &self.learners,
                    self.mode.roles(),
                    mode,
                    self.tc.deadlock_penalty,
                    &mut rng,
                )?;
                ep.summary.update = self.updates_done;
                ep.summary.episode = i;
                Ok(ep)
            })
            .collect()
    }

    /// Collects one batch of episodes and runs a PPO update per agent.
    pub fn update(&mut self) -> Result<UpdateReport> {
        let roles = self.mode.roles();
        let mut per_agent: Vec<Vec<Sample<f32>>> = vec![Vec::new(); roles.len()];
        let mut summaries = Vec::with_capacity(self.tc.episodes_per_batch);
        for e in 0..self.tc.episodes_per_batch {
            let mut ep = self.rollout(ActMode::Sample)?;
            ep.summary.update = self.updates_done;
            ep.summary.episode = e;
            for (agent, bucket) in per_agent.iter_mut().enumerate() {
                let mine: Vec<&(usize, Sample<f32>, f64, f64)> = ep.samples.iter().filter(|s| s.0 == agent).collect();
                let rewards: Vec<f64> = mine.iter().map(|s| s.2).collect();
                let values: Vec<f64> = mine.iter().map(|s| s.3).collect();
                let (adv, ret) = gae(&rewards, &values, self.tc.gamma, self.tc.gae_lambda);
                for ((_, s, _, _), (a, r)) in mine.into_iter().zip(adv.into_iter().zip(ret)) {
                    let mut s = s.clone();
                    s.advantage = a as f32;
                    s.ret = r as f32;
                    bucket.push(s);
                }
            }
            summaries.push(ep.summary);
        }

        let mut losses = BTreeMap::new();
        for (agent, samples) in per_agent.iter_mut().enumerate() {
            let mut adv: Vec<f64> = samples.iter().map(|s| s.advantage as f64).collect();
            normalize(&mut adv);
            for (s, a) in samples.iter_mut().zip(adv) {
                s.advantage = a as f32;
            }
            let stats = self.learners[agent].update(samples, &self.tc, &mut self.rng)?;
            losses.insert(roles[agent], stats);
        }

        let n = summaries.len() as f64;
        let mean = |f: fn(&EpisodeSummary) -> f64| summaries.iter().map(f).sum::<f64>() / n;
        let report = UpdateReport {
            update: self.updates_done,
            losses,
            mean_wl: mean(|s| s.wl),
            mean_temp: mean(|s| s.temp),
            mean_raw_wire_return: mean(|s| s.raw_wire_return),
            mean_raw_thermal_return: mean(|s| s.raw_thermal_return),
            mean_reward_return: mean(|s| s.reward_return),
            deadlocks: summaries.iter().filter(|s| s.deadlock).count(),
            episodes: summaries,
        };
        self.updates_done += 1;
        Ok(report)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            update: self.updates_done,
            mode: self.mode,
            train_digest: self.tc.digest(),
            agents: self
                .learners
                .iter()
                .zip(self.mode.roles())
                .map(|(l, &role)| AgentParams {
                    role,
                    spec: l.policy.spec().clone(),
                    value_steps: l.value.steps(),
                    policy: l.policy.params().to_vec(),
                    value: l.value.params().to_vec(),
                })
                .collect(),
        }
    }

    /// Runs the remaining updates. `on_update` sees each report and, on
    /// checkpoint updates, the checkpoint taken after it.
    pub fn run(&mut self, mut on_update: impl FnMut(&UpdateReport, Option<&Checkpoint>) -> Result<()>) -> Result<()> {
        while self.updates_done < self.tc.total_updates {
            let report = self.update()?;
            let last = self.updates_done == self.tc.total_updates;
            let ckpt = (last || self.updates_done.is_multiple_of(self.tc.checkpoint_interval)).then(|| self.checkpoint());
            on_update(&report, ckpt.as_ref())?;
        }
        Ok(())
    }
}

/// Result of [`train`].
pub struct TrainOutcome {
    pub log: Vec<UpdateReport>,
    pub checkpoints: Vec<Checkpoint>,
    pub trainer: Trainer,
}

/// Trains both navigator agents (or the single agent, per `mode`) for
/// `tc.total_updates` updates.
pub fn train(config: Arc<BenchmarkConfig>, tc: TrainConfig, mode: EnvMode) -> Result<TrainOutcome> {
    let mut trainer = Trainer::new(config, tc, mode)?;
    let mut log = Vec::new();
    let mut checkpoints = Vec::new();
    trainer.run(|r, c| {
        log.push(r.clone());
        if let Some(c) = c {
            checkpoints.push(c.clone());
        }
        Ok(())
    })?;
    Ok(TrainOutcome {
        log,
        checkpoints,
        trainer,
    })
}
