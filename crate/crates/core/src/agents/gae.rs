//! Generalized advantage estimation over one agent's step subsequence.

/// Returns `(advantages, returns)` for a single agent's steps within one
/// episode. The step after the last one is terminal, so it bootstraps 0.
pub fn gae(rewards: &[f64], values: &[f64], gamma: f64, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(rewards.len(), values.len(), "rewards/values length");
    let n = rewards.len();
    let mut adv = vec![0.0; n];
    let mut next_adv = 0.0;
    let mut next_value = 0.0;
    for k in (0..n).rev() {
        let delta = rewards[k] + gamma * next_value - values[k];
        next_adv = delta + gamma * lambda * next_adv;
        adv[k] = next_adv;
        next_value = values[k];
    }
    let ret = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, ret)
}

/// Rescales to zero mean and unit standard deviation in place. A constant
/// input becomes all zeros.
pub fn normalize(xs: &mut [f64]) {
    if xs.is_empty() {
        return;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    for x in xs {
        *x = (*x - mean) / (sd + 1e-8);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undiscounted_is_reward_to_go_minus_value() {
        let r = [0.5, -1.0, 2.0, 0.25];
        let v = [0.1, 0.7, -0.3, 1.2];
        let (adv, ret) = gae(&r, &v, 1.0, 1.0);
        for k in 0..4 {
            let togo: f64 = r[k..].iter().sum();
            assert!((adv[k] - (togo - v[k])).abs() < 1e-12);
            assert!((ret[k] - togo).abs() < 1e-12);
        }
    }

    #[test]
    fn single_step() {
        let (adv, _) = gae(&[0.8], &[0.3], 0.99, 0.95);
        assert!((adv[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn three_step_hand_recursion() {
        let (g, l) = (0.9, 0.5);
        let r = [1.0, 0.0, 2.0];
        let v = [0.5, 1.0, 1.5];
        let d2 = 2.0 - 1.5;
        let d1 = 0.0 + 0.9 * 1.5 - 1.0;
        let d0 = 1.0 + 0.9 * 1.0 - 0.5;
        let a2 = d2;
        let a1 = d1 + g * l * a2;
        let a0 = d0 + g * l * a1;
        let (adv, ret) = gae(&r, &v, g, l);
        assert!((adv[0] - a0).abs() < 1e-12);
        assert!((adv[1] - a1).abs() < 1e-12);
        assert!((adv[2] - a2).abs() < 1e-12);
        assert!((a0 - 1.65875).abs() < 1e-12);
        assert!((ret[1] - (a1 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn normalize_constant_is_zero() {
        let mut xs = [0.0; 5];
        normalize(&mut xs);
        assert!(xs.iter().all(|&x| x == 0.0));
        let mut ys = [1.0, 2.0, 3.0];
        normalize(&mut ys);
        assert!(ys.iter().sum::<f64>().abs() < 1e-12);
    }
}
