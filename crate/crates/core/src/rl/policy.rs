//! Policy and value networks: two-layer tanh MLPs small enough for explicit
//! closed-form backprop.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numtheory::CandidatePool;

pub const POLICY_INPUTS: usize = 3;
pub const VALUE_INPUTS: usize = 2;

/// Candidate scorer: logit(x) = W2 . tanh(W1 x + b1) + b2 + eta * omega,
/// where omega is the candidate's normalized multiplicative order (the first
/// feature channel) and eta is a fixed, non-learned prior coefficient.
#[derive(Debug, Clone, Serialize)]
pub struct PolicyParams {
    pub hidden: usize,
    /// hidden x 3, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
    pub eta: f64,
}

impl PolicyParams {
    pub fn zeros(hidden: usize, eta: f64) -> Self {
        assert!(hidden >= 1, "hidden width must be positive");
        assert!(eta >= 0.0, "prior coefficient must be non-negative");
        Self {
            hidden,
            w1: vec![0.0; hidden * POLICY_INPUTS],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
            eta,
        }
    }

    /// Uniform init scaled by fan-in; biases start at zero.
    pub fn init<R: Rng>(hidden: usize, eta: f64, rng: &mut R) -> Self {
        let mut params = Self::zeros(hidden, eta);
        let r1 = (1.0 / POLICY_INPUTS as f64).sqrt();
        for w in &mut params.w1 {
            *w = rng.gen_range(-r1..r1);
        }
        let r2 = (1.0 / hidden as f64).sqrt();
        for w in &mut params.w2 {
            *w = rng.gen_range(-r2..r2);
        }
        params
    }

    /// tanh(W1 x + b1) written into `out` (length `hidden`).
    pub(crate) fn hidden_activations(&self, x: &[f64; POLICY_INPUTS], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.hidden);
        for (r, slot) in out.iter_mut().enumerate() {
            let row = &self.w1[r * POLICY_INPUTS..(r + 1) * POLICY_INPUTS];
            *slot = (row[0] * x[0] + row[1] * x[1] + row[2] * x[2] + self.b1[r]).tanh();
        }
    }

    /// Single-candidate logit; the prior term uses x[0] = omega.
    pub fn logit(&self, x: &[f64; POLICY_INPUTS]) -> f64 {
        let mut h = vec![0.0; self.hidden];
        self.hidden_activations(x, &mut h);
        let mut s = self.b2 + self.eta * x[0];
        for r in 0..self.hidden {
            s += self.w2[r] * h[r];
        }
        s
    }

    /// Logits for every candidate row.
    pub fn logits(&self, features: &[[f64; POLICY_INPUTS]]) -> Vec<f64> {
        features.iter().map(|x| self.logit(x)).collect()
    }

    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }
}

/// State-value net over [running omega, running propagation score].
#[derive(Debug, Clone, Serialize)]
pub struct ValueParams {
    pub hidden: usize,
    /// hidden x 2, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl ValueParams {
    pub fn zeros(hidden: usize) -> Self {
        assert!(hidden >= 1, "hidden width must be positive");
        Self {
            hidden,
            w1: vec![0.0; hidden * VALUE_INPUTS],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
        }
    }

    pub fn init<R: Rng>(hidden: usize, rng: &mut R) -> Self {
        let mut params = Self::zeros(hidden);
        let r1 = (1.0 / VALUE_INPUTS as f64).sqrt();
        for w in &mut params.w1 {
            *w = rng.gen_range(-r1..r1);
        }
        let r2 = (1.0 / hidden as f64).sqrt();
        for w in &mut params.w2 {
            *w = rng.gen_range(-r2..r2);
        }
        params
    }

    pub(crate) fn hidden_activations(&self, x: &[f64; VALUE_INPUTS], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.hidden);
        for (r, slot) in out.iter_mut().enumerate() {
            let row = &self.w1[r * VALUE_INPUTS..(r + 1) * VALUE_INPUTS];
            *slot = (row[0] * x[0] + row[1] * x[1] + self.b1[r]).tanh();
        }
    }

    pub fn value(&self, x: &[f64; VALUE_INPUTS]) -> f64 {
        let mut h = vec![0.0; self.hidden];
        self.hidden_activations(x, &mut h);
        let mut v = self.b2;
        for r in 0..self.hidden {
            v += self.w2[r] * h[r];
        }
        v
    }
}

/// Per-candidate feature rows at decision step `t` (1-based) of `budget`:
/// [normalized order, 0-based pool position / pool size, t / budget].
pub fn step_features(
    pool: &CandidatePool,
    t: usize,
    budget: usize,
) -> Vec<[f64; POLICY_INPUTS]> {
    assert!(t >= 1 && t <= budget, "step {t} outside 1..={budget}");
    let size = pool.len() as f64;
    let progress = t as f64 / budget as f64;
    pool.normalized_orders()
        .iter()
        .enumerate()
        .map(|(i, &omega)| [omega, i as f64 / size, progress])
        .collect()
}

/// Softmax over unmasked entries, stabilized by max-subtraction. Masked
/// entries get probability exactly 0.
pub fn masked_softmax(logits: &[f64], masked: &[bool]) -> Result<Vec<f64>> {
    assert_eq!(logits.len(), masked.len());
    let mut max = f64::NEG_INFINITY;
    for i in 0..logits.len() {
        if !masked[i] && logits[i] > max {
            max = logits[i];
        }
    }
    if max == f64::NEG_INFINITY {
        return Err(Error::AllMasked);
    }
    let mut probs = vec![0.0; logits.len()];
    let mut total = 0.0;
    for i in 0..logits.len() {
        if !masked[i] {
            let e = (logits[i] - max).exp();
            probs[i] = e;
            total += e;
        }
    }
    for p in &mut probs {
        *p /= total;
    }
    Ok(probs)
}

/// log pi(action) under the masked softmax, computed in log space.
pub fn masked_log_prob(logits: &[f64], masked: &[bool], action: usize) -> Result<f64> {
    assert!(!masked[action], "log-prob of a masked action");
    let mut max = f64::NEG_INFINITY;
    for i in 0..logits.len() {
        if !masked[i] && logits[i] > max {
            max = logits[i];
        }
    }
    if max == f64::NEG_INFINITY {
        return Err(Error::AllMasked);
    }
    let mut total = 0.0;
    for i in 0..logits.len() {
        if !masked[i] {
            total += (logits[i] - max).exp();
        }
    }
    Ok(logits[action] - max - total.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::{CandidatePool, PoolMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_reduce_to_prior() {
        let pool = CandidatePool::build(7, &PoolMode::AllCoprime).unwrap();
        let feats = step_features(&pool, 1, 2);
        let policy = PolicyParams::zeros(4, 1.0);
        let logits = policy.logits(&feats);
        for (i, &l) in logits.iter().enumerate() {
            assert!((l - pool.normalized_orders()[i]).abs() < 1e-15);
        }
        let flat = PolicyParams::zeros(4, 0.0);
        let logits = flat.logits(&feats);
        assert!(logits.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn logits_match_straight_line_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let policy = PolicyParams::init(8, 2.0, &mut rng);
        let x = [0.37, 0.5, 1.0];
        let mut expect = policy.b2 + policy.eta * x[0];
        for r in 0..policy.hidden {
            let mut pre = policy.b1[r];
            for c in 0..POLICY_INPUTS {
                pre += policy.w1[r * POLICY_INPUTS + c] * x[c];
            }
            expect += policy.w2[r] * pre.tanh();
        }
        assert!((policy.logit(&x) - expect).abs() < 1e-12);
    }

    #[test]
    fn step_feature_rows() {
        let pool = CandidatePool::build(7, &PoolMode::AllCoprime).unwrap();
        let feats = step_features(&pool, 2, 2);
        assert_eq!(feats.len(), 3);
        assert_eq!(feats[0][1], 0.0);
        assert!(feats.iter().all(|row| row[2] == 1.0));
        assert_eq!(feats[1][1], 1.0 / 3.0);
        let first = step_features(&pool, 1, 2);
        assert!(first.iter().all(|row| row[2] == 0.5));
    }

    #[test]
    fn softmax_uniform_and_hand_case() {
        let p = masked_softmax(&[2.0, 2.0, 2.0], &[false, false, false]).unwrap();
        for &x in &p {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
        let p = masked_softmax(&[0.0, 3f64.ln()], &[false, false]).unwrap();
        assert!((p[0] - 0.25).abs() < 1e-12);
        assert!((p[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn softmax_masking() {
        let p = masked_softmax(&[5.0, 100.0, 5.0], &[false, true, false]).unwrap();
        assert_eq!(p[1], 0.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(masked_softmax(&[1.0, 2.0], &[true, true]).is_err());
    }

    #[test]
    fn softmax_survives_extreme_logits() {
        let p = masked_softmax(&[1000.0, 999.0], &[false, false]).unwrap();
        assert!(p[0] > p[1]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_prob_matches_softmax() {
        let logits = [0.3, -1.2, 2.0, 0.0];
        let masked = [false, true, false, false];
        let probs = masked_softmax(&logits, &masked).unwrap();
        for a in [0usize, 2, 3] {
            let lp = masked_log_prob(&logits, &masked, a).unwrap();
            assert!((lp.exp() - probs[a]).abs() < 1e-12);
        }
    }

    #[test]
    fn prior_coefficient_raises_max_order_probability() {
        let pool = CandidatePool::build(31, &PoolMode::AllCoprime).unwrap();
        let feats = step_features(&pool, 1, 2);
        let masked = vec![false; pool.len()];
        let argmax = pool
            .normalized_orders()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let mut last = 0.0;
        for eta in [0.0, 1.0, 2.0, 4.0, 8.0] {
            let policy = PolicyParams::zeros(4, eta);
            let probs = masked_softmax(&policy.logits(&feats), &masked).unwrap();
            assert!(
                probs[argmax] > last,
                "eta={eta} did not raise max-order probability"
            );
            last = probs[argmax];
        }
    }
}
