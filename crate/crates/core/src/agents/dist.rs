//! Categorical distribution over the 2N² actions with infeasible entries
//! masked to −∞.

use rand::Rng;

use super::nn::Scalar;

#[derive(Debug, Clone)]
pub struct MaskedCategorical<F> {
    /// Log-probabilities; −∞ on masked actions.
    log_probs: Vec<F>,
    feasible: Vec<usize>,
}

impl<F: Scalar> MaskedCategorical<F> {
    /// `None` when no action is feasible.
    pub fn new(logits: &[F], feasible: &[bool]) -> Option<Self> {
        assert_eq!(logits.len(), feasible.len(), "mask length");
        let idx: Vec<usize> = (0..logits.len()).filter(|&i| feasible[i]).collect();
        if idx.is_empty() {
            return None;
        }
        let max = idx.iter().map(|&i| logits[i]).fold(F::neg_infinity(), F::max);
        let lse = max + idx.iter().map(|&i| (logits[i] - max).exp()).sum::<F>().ln();
        let mut log_probs = vec![F::neg_infinity(); logits.len()];
        for &i in &idx {
            log_probs[i] = logits[i] - lse;
        }
        Some(MaskedCategorical {
            log_probs,
            feasible: idx,
        })
    }

    pub fn log_prob(&self, action: usize) -> F {
        self.log_probs[action]
    }

    pub fn prob(&self, action: usize) -> F {
        self.log_probs[action].exp()
    }

    pub fn log_probs(&self) -> &[F] {
        &self.log_probs
    }

    pub fn feasible(&self) -> &[usize] {
        &self.feasible
    }

    pub fn entropy(&self) -> F {
        -self
            .feasible
            .iter()
            .map(|&i| {
                let lp = self.log_probs[i];
                lp.exp() * lp
            })
            .sum::<F>()
    }

    /// Inverse-CDF sample using one uniform draw.
    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for &i in &self.feasible {
            acc += self.log_probs[i].exp().to_f64().unwrap();
            if u < acc {
                return i;
            }
        }
        *self.feasible.last().unwrap()
    }

    /// Highest-probability feasible action; lowest index on ties.
    pub fn greedy(&self) -> usize {
        let mut best = self.feasible[0];
        for &i in &self.feasible[1..] {
            if self.log_probs[i] > self.log_probs[best] {
                best = i;
            }
        }
        best
    }

    /// `∂ log p(action) / ∂ logits`, scaled by `scale`, added into `out`.
    pub fn add_log_prob_grad(&self, action: usize, scale: F, out: &mut [F]) {
        for &i in &self.feasible {
            out[i] += -scale * self.log_probs[i].exp();
        }
        out[action] += scale;
    }

    /// `∂ H / ∂ logits`, scaled by `scale`, added into `out`.
    pub fn add_entropy_grad(&self, scale: F, out: &mut [F]) {
        let h = self.entropy();
        for &i in &self.feasible {
            let lp = self.log_probs[i];
            out[i] += -scale * lp.exp() * (lp + h);
        }
    }
}
