//! Clipped-surrogate PPO loss with analytic gradients, Adam, and the
//! per-agent update loop.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::dist::MaskedCategorical;
use super::nn::{cast, ConvSpec, PolicyNet, Scalar, ValueNet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Step size for the value function, which is a lookup table and
    /// tolerates a much larger rate than the policy.
    pub value_learning_rate: f64,
    pub clip_ratio: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub entropy_coef: f64,
    pub epochs: usize,
    /// Samples per gradient step, counted per agent.
    pub minibatch_size: usize,
    pub episodes_per_batch: usize,
    pub total_updates: usize,
    pub seed: u64,
    pub max_grad_norm: f64,
    pub hidden: Vec<ConvSpec>,
    /// Updates between checkpoints; the final update is always saved.
    pub checkpoint_interval: usize,
    /// Added to the normalized reward of the last step of an episode that
    /// ended with no legal cell for the next chiplet.
    pub deadlock_penalty: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 3e-4,
            value_learning_rate: 1e-2,
            clip_ratio: 0.2,
            gamma: 0.99,
            gae_lambda: 0.95,
            entropy_coef: 0.01,
            epochs: 4,
            minibatch_size: 64,
            episodes_per_batch: 16,
            total_updates: 200,
            seed: 0,
            max_grad_norm: 0.5,
            hidden: vec![ConvSpec::new(8, 3, 1), ConvSpec::new(8, 3, 2)],
            checkpoint_interval: 50,
            deadlock_penalty: -1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| {
            Err(Error::config(format!("train.{field}"), msg.to_string()))
        };
        if !(self.clip_ratio > 0.0 && self.clip_ratio < 1.0) {
            return bad("clip_ratio", "must lie in (0, 1)");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma", "must lie in (0, 1]");
        }
        if !(self.gae_lambda > 0.0 && self.gae_lambda <= 1.0) {
            return bad("gae_lambda", "must lie in (0, 1]");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate", "must be positive");
        }
        if !(self.value_learning_rate > 0.0 && self.value_learning_rate.is_finite()) {
            return bad("value_learning_rate", "must be positive");
        }
        if !(self.entropy_coef >= 0.0 && self.entropy_coef.is_finite()) {
            return bad("entropy_coef", "must be non-negative");
        }
        if !(self.max_grad_norm > 0.0) {
            return bad("max_grad_norm", "must be positive");
        }
        if self.epochs == 0 || self.minibatch_size == 0 || self.episodes_per_batch == 0 {
            return bad("epochs", "epochs, minibatch_size and episodes_per_batch must be positive");
        }
        if self.checkpoint_interval == 0 {
            return bad("checkpoint_interval", "must be positive");
        }
        for (i, h) in self.hidden.iter().enumerate() {
            if h.out_channels == 0 || h.kernel % 2 == 0 || h.dilation == 0 {
                return bad(&format!("hidden[{i}]"), "needs out_channels > 0, an odd kernel and dilation > 0");
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("train config serializes");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }
}

/// One decision of one agent, ready for the loss.
#[derive(Debug, Clone)]
pub struct Sample<F> {
    pub obs: Vec<F>,
    pub feasible: Vec<bool>,
    pub step: usize,
    pub action: usize,
    pub old_log_prob: F,
    pub advantage: F,
    pub ret: F,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
}

/// Mean over `batch` of `−min(ρA, clip(ρ)A) − c·H`; adds its gradient with
/// respect to the policy parameters into `grad`.
pub fn policy_loss_and_grad<F: Scalar>(
    net: &PolicyNet<F>,
    batch: &[&Sample<F>],
    clip_ratio: f64,
    entropy_coef: f64,
    grad: &mut [F],
) -> Result<LossStats> {
    let inv_n: F = cast(1.0 / batch.len() as f64);
    let eps: F = cast(clip_ratio);
    let c_ent: F = cast(entropy_coef);
    let mut stats = LossStats::default();
    let mut d_logits = vec![F::zero(); net.spec().output_len()];
    for s in batch {
        let cache = net.forward(&s.obs);
        let dist = MaskedCategorical::new(&cache.logits, &s.feasible)
            .ok_or_else(|| Error::MaskedActionViolation(format!("sample at step {} has no feasible action", s.step)))?;
        let lp = dist.log_prob(s.action);
        if !lp.is_finite() {
            return Err(Error::NonFinite(format!("log-prob of action {} at step {}", s.action, s.step)));
        }
        let ratio = (lp - s.old_log_prob).exp();
        let a = s.advantage;
        let clipped = ratio.max(F::one() - eps).min(F::one() + eps);
        let unclipped_term = ratio * a;
        let clipped_term = clipped * a;
        let entropy = dist.entropy();
        // Gradient of −min(ρA, clip(ρ)A) w.r.t. log p(a): −ρA unless the
        // clipped branch is both selected and flat.
        let active = unclipped_term <= clipped_term || clipped == ratio;
        let g_lp = if active { -ratio * a } else { F::zero() };
        let surrogate = unclipped_term.min(clipped_term);

        d_logits.iter_mut().for_each(|v| *v = F::zero());
        dist.add_log_prob_grad(s.action, g_lp * inv_n, &mut d_logits);
        dist.add_entropy_grad(-c_ent * inv_n, &mut d_logits);
        net.backward(&s.obs, &cache, &d_logits, grad);

        stats.policy_loss += (-surrogate - c_ent * entropy).to_f64().unwrap();
        stats.entropy += entropy.to_f64().unwrap();
        stats.approx_kl += (s.old_log_prob - lp).to_f64().unwrap();
        if clipped != ratio {
            stats.clip_fraction += 1.0;
        }
    }
    let n = batch.len() as f64;
    stats.policy_loss /= n;
    stats.entropy /= n;
    stats.approx_kl /= n;
    stats.clip_fraction /= n;
    if !stats.policy_loss.is_finite() {
        return Err(Error::NonFinite("policy loss".into()));
    }
    Ok(stats)
}

/// Mean of `½(V(k) − R)²`; adds its gradient into `grad`.
pub fn value_loss_and_grad<F: Scalar>(net: &ValueNet<F>, batch: &[&Sample<F>], grad: &mut [F]) -> f64 {
    let inv_n: F = cast(1.0 / batch.len() as f64);
    let half: F = cast(0.5);
    let mut loss = F::zero();
    for s in batch {
        let err = net.value(s.step) - s.ret;
        loss += half * err * err;
        net.backward(s.step, err * inv_n, grad);
    }
    (loss * inv_n).to_f64().unwrap()
}

/// Scales `grad` so its L2 norm is at most `max_norm`; returns the norm
/// before scaling.
pub fn clip_grad_norm(grad: &mut [f32], max_norm: f64) -> Result<f64> {
    let norm = grad.iter().map(|&g| (g as f64).powi(2)).sum::<f64>().sqrt();
    if !norm.is_finite() {
        return Err(Error::NonFinite(format!("gradient norm {norm}")));
    }
    if norm > max_norm {
        let s = (max_norm / norm) as f32;
        grad.iter_mut().for_each(|g| *g *= s);
    }
    Ok(norm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f32>,
    v: Vec<f32>,
    t: u64,
}

impl Adam {
    pub fn new(len: usize, lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f32], grad: &[f32]) {
        assert_eq!(params.len(), self.m.len(), "adam parameter length");
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.t as i32);
        let c2 = 1.0 - b2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grad[i] as f64;
            let m = b1 * self.m[i] as f64 + (1.0 - b1) * g;
            let v = b2 * self.v[i] as f64 + (1.0 - b2) * g * g;
            self.m[i] = m as f32;
            self.v[i] = v as f32;
            let step = self.lr * (m / c1) / ((v / c2).sqrt() + self.eps);
            params[i] -= step as f32;
        }
    }
}

/// One agent's networks and optimizers.
#[derive(Debug, Clone)]
pub struct Learner {
    pub policy: PolicyNet<f32>,
    pub value: ValueNet<f32>,
    pub policy_opt: Adam,
    pub value_opt: Adam,
}

impl Learner {
    pub fn new(policy: PolicyNet<f32>, value: ValueNet<f32>, tc: &TrainConfig) -> Self {
        let policy_opt = Adam::new(policy.param_count(), tc.learning_rate);
        let value_opt = Adam::new(value.params().len(), tc.value_learning_rate);
        Learner {
            policy,
            value,
            policy_opt,
            value_opt,
        }
    }

    /// Runs `tc.epochs` passes of shuffled minibatch updates over this
    /// agent's samples. Advantages are expected to be normalized already.
    pub fn update(&mut self, samples: &[Sample<f32>], tc: &TrainConfig, rng: &mut impl Rng) -> Result<LossStats> {
        let mut total = LossStats::default();
        if samples.is_empty() {
            return Ok(total);
        }
        let mut order: Vec<usize> = (0..samples.len()).collect();
        let mut batches = 0usize;
        for _ in 0..tc.epochs {
            order.shuffle(rng);
            for chunk in order.chunks(tc.minibatch_size) {
                let batch: Vec<&Sample<f32>> = chunk.iter().map(|&i| &samples[i]).collect();
                let mut pg = vec![0.0f32; self.policy.param_count()];
                let stats = policy_loss_and_grad(&self.policy, &batch, tc.clip_ratio, tc.entropy_coef, &mut pg)?;
                clip_grad_norm(&mut pg, tc.max_grad_norm)?;
                self.policy_opt.step(self.policy.params_mut(), &pg);

                let mut vg = vec![0.0f32; self.value.params().len()];
                let value_loss = value_loss_and_grad(&self.value, &batch, &mut vg);
                if !value_loss.is_finite() {
                    return Err(Error::NonFinite("value loss".into()));
                }
                clip_grad_norm(&mut vg, tc.max_grad_norm)?;
                self.value_opt.step(self.value.params_mut(), &vg);

                total.policy_loss += stats.policy_loss;
                total.entropy += stats.entropy;
                total.clip_fraction += stats.clip_fraction;
                total.approx_kl += stats.approx_kl;
                total.value_loss += value_loss;
                batches += 1;
            }
        }
        let b = batches as f64;
        total.policy_loss /= b;
        total.value_loss /= b;
        total.entropy /= b;
        total.clip_fraction /= b;
        total.approx_kl /= b;
        Ok(total)
    }
}
