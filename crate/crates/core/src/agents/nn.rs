//! Small convolutional policy and step-indexed value function with
//! hand-written backward passes. Generic over the float type so training
//! runs in `f32` while gradient checks run in `f64`.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub trait Scalar: Float + FromPrimitive + ToPrimitive + AddAssign + Sum + Debug + Send + Sync + 'static {}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub(crate) fn cast<F: Scalar>(v: f64) -> F {
    F::from_f64(v).expect("representable")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvSpec {
    pub out_channels: usize,
    pub kernel: usize,
    pub dilation: usize,
}

impl ConvSpec {
    pub fn new(out_channels: usize, kernel: usize, dilation: usize) -> Self {
        ConvSpec {
            out_channels,
            kernel,
            dilation,
        }
    }
}

/// Conv stack: `hidden` tanh layers with "same" padding, then a 1x1 head
/// over the last features concatenated with the raw input masks, producing
/// one R0 and one R90 logit per cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub in_channels: usize,
    pub grid_n: usize,
    pub hidden: Vec<ConvSpec>,
}

impl PolicySpec {
    pub fn output_len(&self) -> usize {
        2 * self.grid_n * self.grid_n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Slot {
    in_c: usize,
    out_c: usize,
    kernel: usize,
    dilation: usize,
    w_off: usize,
    b_off: usize,
}

impl Slot {
    fn w_len(&self) -> usize {
        self.out_c * self.in_c * self.kernel * self.kernel
    }
}

fn plan(spec: &PolicySpec) -> (Vec<Slot>, usize) {
    let mut slots = Vec::new();
    let mut off = 0;
    let mut in_c = spec.in_channels;
    let push = |in_c: usize, out_c: usize, kernel: usize, dilation: usize, off: &mut usize| {
        let w_len = out_c * in_c * kernel * kernel;
        let s = Slot {
            in_c,
            out_c,
            kernel,
            dilation,
            w_off: *off,
            b_off: *off + w_len,
        };
        *off += w_len + out_c;
        s
    };
    for h in &spec.hidden {
        slots.push(push(in_c, h.out_channels, h.kernel, h.dilation, &mut off));
        in_c = h.out_channels;
    }
    slots.push(push(in_c + spec.in_channels, 2, 1, 1, &mut off));
    (slots, off)
}

/// `out[o] = b[o] + Σ_i w[o,i] ⋆ input[i]` with zero padding.
#[allow(clippy::too_many_arguments)]
fn conv_forward<F: Scalar>(input: &[F], n: usize, slot: &Slot, params: &[F], out: &mut [F]) {
    let n2 = n * n;
    let k = slot.kernel;
    let half = (k / 2) as isize;
    let w = &params[slot.w_off..slot.w_off + slot.w_len()];
    let b = &params[slot.b_off..slot.b_off + slot.out_c];
    for o in 0..slot.out_c {
        let dst = &mut out[o * n2..(o + 1) * n2];
        dst.iter_mut().for_each(|v| *v = b[o]);
        for i in 0..slot.in_c {
            let src = &input[i * n2..(i + 1) * n2];
            for ky in 0..k {
                let dy = (ky as isize - half) * slot.dilation as isize;
                for kx in 0..k {
                    let dx = (kx as isize - half) * slot.dilation as isize;
                    let wv = w[((o * slot.in_c + i) * k + ky) * k + kx];
                    let (x0, x1) = valid_range(n, dx);
                    if x0 >= x1 {
                        continue;
                    }
                    for y in valid_rows(n, dy) {
                        let sy = (y as isize + dy) as usize;
                        let d = &mut dst[y * n + x0..y * n + x1];
                        let s = &src[sy * n + (x0 as isize + dx) as usize..sy * n + (x1 as isize + dx) as usize];
                        for (dv, &sv) in d.iter_mut().zip(s) {
                            *dv += wv * sv;
                        }
                    }
                }
            }
        }
    }
}

/// Accumulates weight/bias gradients and, when `d_input` is given, the
/// input gradient.
fn conv_backward<F: Scalar>(
    input: &[F],
    n: usize,
    slot: &Slot,
    params: &[F],
    d_out: &[F],
    grad: &mut [F],
    mut d_input: Option<&mut [F]>,
) {
    let n2 = n * n;
    let k = slot.kernel;
    let half = (k / 2) as isize;
    for o in 0..slot.out_c {
        let g = &d_out[o * n2..(o + 1) * n2];
        grad[slot.b_off + o] += g.iter().copied().sum::<F>();
        for i in 0..slot.in_c {
            let src = &input[i * n2..(i + 1) * n2];
            for ky in 0..k {
                let dy = (ky as isize - half) * slot.dilation as isize;
                for kx in 0..k {
                    let dx = (kx as isize - half) * slot.dilation as isize;
                    let widx = ((o * slot.in_c + i) * k + ky) * k + kx;
                    let wv = params[slot.w_off + widx];
                    let (x0, x1) = valid_range(n, dx);
                    if x0 >= x1 {
                        continue;
                    }
                    let mut acc = F::zero();
                    for y in valid_rows(n, dy) {
                        let sy = (y as isize + dy) as usize;
                        let sx0 = (x0 as isize + dx) as usize;
                        let gd = &g[y * n + x0..y * n + x1];
                        let s = &src[sy * n + sx0..sy * n + sx0 + (x1 - x0)];
                        for (&gv, &sv) in gd.iter().zip(s) {
                            acc += gv * sv;
                        }
                        if let Some(di) = d_input.as_deref_mut() {
                            let dst = &mut di[i * n2 + sy * n + sx0..i * n2 + sy * n + sx0 + (x1 - x0)];
                            for (dv, &gv) in dst.iter_mut().zip(gd) {
                                *dv += wv * gv;
                            }
                        }
                    }
                    grad[slot.w_off + widx] += acc;
                }
            }
        }
    }
}

/// Output columns `x` for which `x + dx` stays inside the grid.
fn valid_range(n: usize, dx: isize) -> (usize, usize) {
    let lo = (-dx).max(0) as usize;
    let hi = (n as isize - dx).min(n as isize).max(0) as usize;
    (lo.min(n), hi)
}

fn valid_rows(n: usize, dy: isize) -> std::ops::Range<usize> {
    let (lo, hi) = valid_range(n, dy);
    lo..hi.max(lo)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyNet<F> {
    spec: PolicySpec,
    slots: Vec<Slot>,
    params: Vec<F>,
}

/// Activations kept from a forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct PolicyCache<F> {
    /// Post-tanh output of each hidden layer.
    hidden: Vec<Vec<F>>,
    /// Head input: last hidden features followed by the raw input.
    head_in: Vec<F>,
    pub logits: Vec<F>,
}

impl<F: Scalar> PolicyNet<F> {
    /// Xavier-uniform hidden weights; the head starts near zero so the
    /// initial policy is close to uniform over legal actions.
    pub fn new(spec: PolicySpec, rng: &mut impl Rng) -> Self {
        let (slots, len) = plan(&spec);
        let mut params = vec![F::zero(); len];
        let last = slots.len() - 1;
        for (li, s) in slots.iter().enumerate() {
            let fan_in = (s.in_c * s.kernel * s.kernel) as f64;
            let fan_out = (s.out_c * s.kernel * s.kernel) as f64;
            let mut bound = (6.0 / (fan_in + fan_out)).sqrt();
            if li == last {
                bound *= 0.01;
            }
            for w in &mut params[s.w_off..s.w_off + s.w_len()] {
                *w = cast(rng.gen_range(-bound..bound));
            }
        }
        PolicyNet { spec, slots, params }
    }

    pub fn from_params(spec: PolicySpec, params: Vec<F>) -> Option<Self> {
        let (slots, len) = plan(&spec);
        (params.len() == len).then_some(PolicyNet { spec, slots, params })
    }

    pub fn spec(&self) -> &PolicySpec {
        &self.spec
    }

    pub fn params(&self) -> &[F] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [F] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn forward(&self, input: &[F]) -> PolicyCache<F> {
        let n = self.spec.grid_n;
        let n2 = n * n;
        assert_eq!(input.len(), self.spec.in_channels * n2, "input shape");
        let mut hidden = Vec::with_capacity(self.slots.len() - 1);
        let mut cur: &[F] = input;
        for s in &self.slots[..self.slots.len() - 1] {
            let mut out = vec![F::zero(); s.out_c * n2];
            conv_forward(cur, n, s, &self.params, &mut out);
            out.iter_mut().for_each(|v| *v = v.tanh());
            hidden.push(out);
            cur = hidden.last().unwrap();
        }
        let mut head_in = Vec::with_capacity(cur.len() + input.len());
        head_in.extend_from_slice(cur);
        head_in.extend_from_slice(input);
        let head = self.slots.last().unwrap();
        let mut logits = vec![F::zero(); 2 * n2];
        conv_forward(&head_in, n, head, &self.params, &mut logits);
        PolicyCache {
            hidden,
            head_in,
            logits,
        }
    }

    /// Adds `∂loss/∂params` to `grad` given `∂loss/∂logits`.
    pub fn backward(&self, input: &[F], cache: &PolicyCache<F>, d_logits: &[F], grad: &mut [F]) {
        let n = self.spec.grid_n;
        let n2 = n * n;
        let head = self.slots.last().unwrap();
        let n_hidden = self.slots.len() - 1;
        let mut d_head_in = vec![F::zero(); cache.head_in.len()];
        conv_backward(
            &cache.head_in,
            n,
            head,
            &self.params,
            d_logits,
            grad,
            (n_hidden > 0).then_some(&mut d_head_in[..]),
        );
        if n_hidden == 0 {
            return;
        }
        // Gradient w.r.t. the last hidden activations is the leading part of
        // the head input gradient.
        let mut delta: Vec<F> = d_head_in[..self.slots[n_hidden - 1].out_c * n2].to_vec();
        for li in (0..n_hidden).rev() {
            let act = &cache.hidden[li];
            for (d, &a) in delta.iter_mut().zip(act) {
                *d = *d * (F::one() - a * a);
            }
            let layer_in: &[F] = if li == 0 { input } else { &cache.hidden[li - 1] };
            let mut d_in = if li > 0 {
                Some(vec![F::zero(); layer_in.len()])
            } else {
                None
            };
            conv_backward(layer_in, n, &self.slots[li], &self.params, &delta, grad, d_in.as_deref_mut());
            if let Some(d) = d_in {
                delta = d;
            }
        }
    }

    pub fn cast<G: Scalar>(&self) -> PolicyNet<G> {
        PolicyNet {
            spec: self.spec.clone(),
            slots: self.slots.clone(),
            params: self.params.iter().map(|v| cast(v.to_f64().unwrap())).collect(),
        }
    }
}

/// `V(k) = w_k + b` over a one-hot step index.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueNet<F> {
    steps: usize,
    params: Vec<F>,
}

impl<F: Scalar> ValueNet<F> {
    pub fn new(steps: usize) -> Self {
        ValueNet {
            steps,
            params: vec![F::zero(); steps + 1],
        }
    }

    pub fn from_params(steps: usize, params: Vec<F>) -> Option<Self> {
        (params.len() == steps + 1).then_some(ValueNet { steps, params })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn params(&self) -> &[F] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [F] {
        &mut self.params
    }

    pub fn value(&self, step: usize) -> F {
        self.params[step.min(self.steps - 1)] + self.params[self.steps]
    }

    pub fn backward(&self, step: usize, d_value: F, grad: &mut [F]) {
        grad[step.min(self.steps - 1)] += d_value;
        grad[self.steps] += d_value;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec() -> PolicySpec {
        PolicySpec {
            in_channels: 3,
            grid_n: 5,
            hidden: vec![ConvSpec::new(3, 3, 1), ConvSpec::new(2, 3, 2)],
        }
    }

    #[test]
    fn output_size_is_two_per_cell() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = PolicyNet::<f32>::new(spec(), &mut rng);
        let input = vec![0.5f32; 3 * 25];
        assert_eq!(net.forward(&input).logits.len(), 50);
    }

    #[test]
    fn forward_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = PolicyNet::<f64>::new(spec(), &mut rng);
        let input: Vec<f64> = (0..75).map(|i| (i as f64 * 0.37).sin()).collect();
        assert_eq!(net.forward(&input).logits, net.forward(&input).logits);
    }

    #[test]
    fn conv_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let spec = PolicySpec {
            in_channels: 2,
            grid_n: 6,
            hidden: vec![ConvSpec::new(3, 3, 2)],
        };
        let net = PolicyNet::<f64>::new(spec, &mut rng);
        let input: Vec<f64> = (0..72).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let cache = net.forward(&input);
        let s = net.slots[0];
        let n = 6isize;
        for o in 0..3 {
            for y in 0..n {
                for x in 0..n {
                    let mut acc = net.params[s.b_off + o];
                    for i in 0..2 {
                        for ky in 0..3isize {
                            for kx in 0..3isize {
                                let (sy, sx) = (y + (ky - 1) * 2, x + (kx - 1) * 2);
                                if (0..n).contains(&sy) && (0..n).contains(&sx) {
                                    let w = net.params[s.w_off + ((o * 2 + i) * 3 + ky as usize) * 3 + kx as usize];
                                    acc += w * input[i * 36 + (sy * n + sx) as usize];
                                }
                            }
                        }
                    }
                    let got = cache.hidden[0][o * 36 + (y * n + x) as usize];
                    assert!((got - acc.tanh()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut net = PolicyNet::<f64>::new(spec(), &mut rng);
        // Larger head weights so every layer carries signal.
        for v in net.params_mut() {
            *v *= 3.0;
        }
        let input: Vec<f64> = (0..75).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let coeff: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let loss = |net: &PolicyNet<f64>| -> f64 {
            net.forward(&input).logits.iter().zip(&coeff).map(|(l, c)| l * c).sum()
        };
        let cache = net.forward(&input);
        let mut grad = vec![0.0; net.param_count()];
        net.backward(&input, &cache, &coeff, &mut grad);
        let h = 1e-6;
        for i in 0..net.param_count() {
            let mut plus = net.clone();
            plus.params[i] += h;
            let mut minus = net.clone();
            minus.params[i] -= h;
            let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
            assert!((fd - grad[i]).abs() <= 1e-6 * (1.0 + fd.abs()), "param {i}: {fd} vs {}", grad[i]);
        }
    }

    #[test]
    fn value_depends_only_on_step() {
        let mut v = ValueNet::<f64>::new(4);
        v.params_mut().copy_from_slice(&[1.0, 2.0, 3.0, 4.0, 0.5]);
        assert_eq!(v.value(2), 3.5);
        let mut g = vec![0.0; 5];
        v.backward(1, 2.0, &mut g);
        assert_eq!(g, [0.0, 2.0, 0.0, 0.0, 2.0]);
    }
}
