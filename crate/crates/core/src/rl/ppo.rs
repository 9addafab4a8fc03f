//! Clipped-surrogate policy updates with explicit closed-form backprop
//! through the two-layer nets and the masked softmax. No autodiff.

use crate::error::{Error, Result};
use crate::numtheory::CandidatePool;
use crate::rl::policy::{
    masked_log_prob, masked_softmax, step_features, PolicyParams, ValueParams, POLICY_INPUTS,
    VALUE_INPUTS,
};
use crate::rl::trace::EpisodeTrace;

/// Gradient of an objective with respect to every learned policy parameter.
/// The prior coefficient eta is fixed by config, not learned.
#[derive(Debug, Clone)]
pub struct PolicyGrad {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl PolicyGrad {
    fn zeros(hidden: usize) -> Self {
        Self {
            w1: vec![0.0; hidden * POLICY_INPUTS],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for g in self
            .w1
            .iter_mut()
            .chain(self.b1.iter_mut())
            .chain(self.w2.iter_mut())
        {
            *g *= factor;
        }
        self.b2 *= factor;
    }
}

#[derive(Debug, Clone)]
pub struct ValueGrad {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl ValueGrad {
    fn zeros(hidden: usize) -> Self {
        Self {
            w1: vec![0.0; hidden * VALUE_INPUTS],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
        }
    }
}

/// Per-step features, hidden activations, and logits, precomputed once per
/// epoch. Features depend only on (pool, step, budget), never on the trace,
/// so every trace shares them; only the masks differ.
struct EpochForward {
    features: Vec<Vec<[f64; POLICY_INPUTS]>>,
    /// hidden[t][i * H + r] = tanh activation r for candidate i at step t+1.
    hidden: Vec<Vec<f64>>,
    logits: Vec<Vec<f64>>,
}

impl EpochForward {
    fn compute(policy: &PolicyParams, pool: &CandidatePool, budget: usize) -> Self {
        let size = pool.len();
        let h = policy.hidden;
        let mut features = Vec::with_capacity(budget);
        let mut hidden = Vec::with_capacity(budget);
        let mut logits = Vec::with_capacity(budget);
        for t in 1..=budget {
            let feats = step_features(pool, t, budget);
            let mut acts = vec![0.0; size * h];
            let mut logit_row = vec![0.0; size];
            for (i, x) in feats.iter().enumerate() {
                let slot = &mut acts[i * h..(i + 1) * h];
                policy.hidden_activations(x, slot);
                let mut s = policy.b2 + policy.eta * x[0];
                for r in 0..h {
                    s += policy.w2[r] * slot[r];
                }
                logit_row[i] = s;
            }
            features.push(feats);
            hidden.push(acts);
            logits.push(logit_row);
        }
        Self {
            features,
            hidden,
            logits,
        }
    }
}

/// Aggregate diagnostics of one surrogate evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SurrogateStats {
    pub objective: f64,
    /// Fraction of samples where the clip bound was the active branch.
    pub clip_fraction: f64,
    pub mean_ratio: f64,
}

/// Mean surrogate objective over all steps of all traces, and its gradient.
///
/// `clip` = None evaluates the plain importance-weighted objective
/// mean(ratio * advantage); Some(eps) applies the PPO pessimistic clip
/// min(ratio * A, clamp(ratio, 1-eps, 1+eps) * A). An entropy bonus weighted
/// by `entropy_coef` is added when positive.
pub fn policy_surrogate(
    policy: &PolicyParams,
    pool: &CandidatePool,
    traces: &[EpisodeTrace],
    advantages: &[Vec<f64>],
    clip: Option<f64>,
    entropy_coef: f64,
) -> Result<(PolicyGrad, SurrogateStats)> {
    assert_eq!(traces.len(), advantages.len());
    assert!(!traces.is_empty(), "surrogate needs at least one trace");
    let budget = traces[0].steps.len();
    let size = pool.len();
    let h = policy.hidden;
    let forward = EpochForward::compute(policy, pool, budget);

    let mut grad = PolicyGrad::zeros(h);
    let mut objective = 0.0;
    let mut ratio_sum = 0.0;
    let mut clipped = 0usize;
    let mut samples = 0usize;

    for (trace, adv) in traces.iter().zip(advantages) {
        assert_eq!(trace.steps.len(), budget, "uneven episode lengths");
        let mut masked = vec![false; size];
        for (j, step) in trace.steps.iter().enumerate() {
            let logits = &forward.logits[j];
            let probs = masked_softmax(logits, &masked)?;
            let action = step.action;
            let log_prob_new = masked_log_prob(logits, &masked, action)?;
            let ratio = (log_prob_new - step.log_prob).exp();
            let advantage = adv[j];
            let unclipped = ratio * advantage;

            // The pessimistic min passes gradient only through the branch
            // that attains it; a strictly smaller clipped branch is constant
            // in the parameters, so its gradient is zero.
            let (term, pass) = match clip {
                None => (unclipped, true),
                Some(eps) => {
                    let bounded = ratio.clamp(1.0 - eps, 1.0 + eps) * advantage;
                    if bounded < unclipped {
                        clipped += 1;
                        (bounded, false)
                    } else {
                        (unclipped, true)
                    }
                }
            };
            objective += term;
            ratio_sum += ratio;
            samples += 1;
            let coef = if pass { ratio * advantage } else { 0.0 };

            let entropy = if entropy_coef > 0.0 {
                let mut e = 0.0;
                for &p in probs.iter() {
                    if p > 0.0 {
                        e -= p * p.ln();
                    }
                }
                objective += entropy_coef * e;
                e
            } else {
                0.0
            };

            for i in 0..size {
                if masked[i] {
                    continue;
                }
                let p = probs[i];
                let indicator = if i == action { 1.0 } else { 0.0 };
                let mut g_logit = coef * (indicator - p);
                if entropy_coef > 0.0 && p > 0.0 {
                    g_logit += entropy_coef * (-p * (p.ln() + entropy));
                }
                if g_logit == 0.0 {
                    continue;
                }
                let acts = &forward.hidden[j][i * h..(i + 1) * h];
                let x = &forward.features[j][i];
                grad.b2 += g_logit;
                for r in 0..h {
                    let a = acts[r];
                    grad.w2[r] += g_logit * a;
                    let upstream = g_logit * policy.w2[r] * (1.0 - a * a);
                    grad.b1[r] += upstream;
                    for c in 0..POLICY_INPUTS {
                        grad.w1[r * POLICY_INPUTS + c] += upstream * x[c];
                    }
                }
            }
            masked[action] = true;
        }
    }

    let inv = 1.0 / samples as f64;
    objective *= inv;
    grad.scale(inv);
    Ok((
        grad,
        SurrogateStats {
            objective,
            clip_fraction: clipped as f64 * inv,
            mean_ratio: ratio_sum * inv,
        },
    ))
}

/// Pre-action state of step `j`: running metrics of the previous step, or
/// the empty-set origin [0, 0] at the first step.
fn state_input(trace: &EpisodeTrace, j: usize) -> [f64; VALUE_INPUTS] {
    if j == 0 {
        [0.0, 0.0]
    } else {
        let prev = &trace.steps[j - 1];
        [prev.order_avg, prev.score]
    }
}

/// Mean squared error of the value net against returns-to-go, with gradient.
pub fn value_mse(
    value: &ValueParams,
    traces: &[EpisodeTrace],
    returns: &[Vec<f64>],
) -> (f64, ValueGrad) {
    assert_eq!(traces.len(), returns.len());
    let h = value.hidden;
    let mut grad = ValueGrad::zeros(h);
    let mut loss = 0.0;
    let mut samples = 0usize;
    let mut acts = vec![0.0; h];
    for (trace, rets) in traces.iter().zip(returns) {
        for j in 0..trace.steps.len() {
            let x = state_input(trace, j);
            value.hidden_activations(&x, &mut acts);
            let mut v = value.b2;
            for r in 0..h {
                v += value.w2[r] * acts[r];
            }
            let residual = v - rets[j];
            loss += residual * residual;
            samples += 1;
            let upstream = 2.0 * residual;
            grad.b2 += upstream;
            for r in 0..h {
                let a = acts[r];
                grad.w2[r] += upstream * a;
                let pre = upstream * value.w2[r] * (1.0 - a * a);
                grad.b1[r] += pre;
                for c in 0..VALUE_INPUTS {
                    grad.w1[r * VALUE_INPUTS + c] += pre * x[c];
                }
            }
        }
    }
    let inv = 1.0 / samples as f64;
    loss *= inv;
    for g in grad
        .w1
        .iter_mut()
        .chain(grad.b1.iter_mut())
        .chain(grad.w2.iter_mut())
    {
        *g *= inv;
    }
    grad.b2 *= inv;
    (loss, grad)
}

/// Adam over one parameter segment, minimizing.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(len: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }

    /// One descent step along `grad` (the gradient of a loss to minimize).
    pub fn apply(&mut self, params: &mut [f64], grad: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grad.len(), self.m.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Adam buffers for all four segments of one two-layer net.
pub struct NetOptimizer {
    w1: Adam,
    b1: Adam,
    w2: Adam,
    b2: Adam,
}

impl NetOptimizer {
    pub fn for_policy(policy: &PolicyParams, lr: f64) -> Self {
        Self {
            w1: Adam::new(policy.w1.len(), lr),
            b1: Adam::new(policy.b1.len(), lr),
            w2: Adam::new(policy.w2.len(), lr),
            b2: Adam::new(1, lr),
        }
    }

    pub fn for_value(value: &ValueParams, lr: f64) -> Self {
        Self {
            w1: Adam::new(value.w1.len(), lr),
            b1: Adam::new(value.b1.len(), lr),
            w2: Adam::new(value.w2.len(), lr),
            b2: Adam::new(1, lr),
        }
    }

    fn step_policy(&mut self, policy: &mut PolicyParams, descent: &PolicyGrad) {
        self.w1.apply(&mut policy.w1, &descent.w1);
        self.b1.apply(&mut policy.b1, &descent.b1);
        self.w2.apply(&mut policy.w2, &descent.w2);
        let mut b2 = [policy.b2];
        self.b2.apply(&mut b2, &[descent.b2]);
        policy.b2 = b2[0];
    }

    fn step_value(&mut self, value: &mut ValueParams, descent: &ValueGrad) {
        self.w1.apply(&mut value.w1, &descent.w1);
        self.b1.apply(&mut value.b1, &descent.b1);
        self.w2.apply(&mut value.w2, &descent.w2);
        let mut b2 = [value.b2];
        self.b2.apply(&mut b2, &[descent.b2]);
        value.b2 = b2[0];
    }
}

#[derive(Debug, Clone, Copy)]
pub struct UpdateDiagnostics {
    pub policy_objective: f64,
    pub value_loss: f64,
    pub clip_fraction: f64,
    pub mean_ratio: f64,
}

/// Runs `epochs` alternating policy/value updates over one batch of traces.
/// Advantages are expected already normalized. Aborts on a non-finite
/// objective or loss.
#[allow(clippy::too_many_arguments)]
pub fn ppo_update(
    policy: &mut PolicyParams,
    value: &mut ValueParams,
    pool: &CandidatePool,
    traces: &[EpisodeTrace],
    advantages: &[Vec<f64>],
    returns: &[Vec<f64>],
    clip_ratio: f64,
    entropy_coef: f64,
    epochs: usize,
    policy_opt: &mut NetOptimizer,
    value_opt: &mut NetOptimizer,
) -> Result<UpdateDiagnostics> {
    if traces.is_empty() {
        return Err(Error::Config("ppo update needs a non-empty batch".into()));
    }
    let mut last = UpdateDiagnostics {
        policy_objective: 0.0,
        value_loss: 0.0,
        clip_fraction: 0.0,
        mean_ratio: 1.0,
    };
    for epoch in 0..epochs {
        let (mut grad, stats) =
            policy_surrogate(policy, pool, traces, advantages, Some(clip_ratio), entropy_coef)?;
        if !stats.objective.is_finite() {
            return Err(Error::NonFiniteLoss(format!(
                "policy objective {} at epoch {epoch}",
                stats.objective
            )));
        }
        // The surrogate is maximized; Adam minimizes, so descend along the
        // negated gradient.
        grad.scale(-1.0);
        policy_opt.step_policy(policy, &grad);

        let (loss, vgrad) = value_mse(value, traces, returns);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss(format!(
                "value loss {loss} at epoch {epoch}"
            )));
        }
        value_opt.step_value(value, &vgrad);

        last = UpdateDiagnostics {
            policy_objective: stats.objective,
            value_loss: loss,
            clip_fraction: stats.clip_fraction,
            mean_ratio: stats.mean_ratio,
        };
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::{MetricsCache, ScoreCache};
    use crate::numtheory::{CandidatePool, PoolMode};
    use crate::rl::trace::{compute_gae, rollout_episode, RolloutContext};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_batch(
        pool: &CandidatePool,
        budget: usize,
        episodes: usize,
        seed: u64,
    ) -> (PolicyParams, ValueParams, Vec<EpisodeTrace>) {
        let metrics = MetricsCache::default();
        let scores = ScoreCache::default();
        let ctx = RolloutContext {
            pool,
            metrics: &metrics,
            scores: &scores,
            order_weight: 1.0,
            score_weight: 1.0,
            budget,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let policy = PolicyParams::init(8, 2.0, &mut rng);
        let value = ValueParams::init(8, &mut rng);
        let traces = (0..episodes)
            .map(|_| rollout_episode(&policy, &value, &ctx, &mut rng).unwrap())
            .collect();
        (policy, value, traces)
    }

    #[test]
    fn fresh_batch_surrogate_is_mean_advantage() {
        let pool = CandidatePool::build(31, &PoolMode::AllCoprime).unwrap();
        let (policy, _, traces) = sample_batch(&pool, 2, 16, 3);
        let advantages: Vec<Vec<f64>> = traces
            .iter()
            .map(|t| compute_gae(t, 1.0, 0.95).0)
            .collect();
        let (_, stats) =
            policy_surrogate(&policy, &pool, &traces, &advantages, Some(0.2), 0.0).unwrap();
        let mean: f64 = advantages.iter().flatten().sum::<f64>()
            / advantages.iter().map(Vec::len).sum::<usize>() as f64;
        assert!((stats.objective - mean).abs() < 1e-12);
        assert!((stats.mean_ratio - 1.0).abs() < 1e-12);
        assert_eq!(stats.clip_fraction, 0.0);
    }

    #[test]
    fn zero_advantages_leave_policy_unchanged() {
        let pool = CandidatePool::build(31, &PoolMode::AllCoprime).unwrap();
        let (mut policy, mut value, traces) = sample_batch(&pool, 2, 8, 4);
        let advantages: Vec<Vec<f64>> = traces.iter().map(|t| vec![0.0; t.steps.len()]).collect();
        let returns: Vec<Vec<f64>> = traces
            .iter()
            .map(|t| compute_gae(t, 1.0, 0.95).1)
            .collect();
        let before = policy.clone();
        let mut popt = NetOptimizer::for_policy(&policy, 3e-3);
        let mut vopt = NetOptimizer::for_value(&value, 3e-3);
        ppo_update(
            &mut policy,
            &mut value,
            &pool,
            &traces,
            &advantages,
            &returns,
            0.2,
            0.0,
            3,
            &mut popt,
            &mut vopt,
        )
        .unwrap();
        assert_eq!(policy.w1, before.w1);
        assert_eq!(policy.b1, before.b1);
        assert_eq!(policy.w2, before.w2);
        assert_eq!(policy.b2, before.b2);
    }

    #[test]
    fn value_update_reduces_value_loss() {
        let pool = CandidatePool::build(47, &PoolMode::AllCoprime).unwrap();
        let (policy, mut value, traces) = sample_batch(&pool, 2, 32, 5);
        let mut advantages = Vec::new();
        let mut returns = Vec::new();
        for t in &traces {
            let (a, r) = compute_gae(t, 1.0, 0.95);
            advantages.push(a);
            returns.push(r);
        }
        let (before, _) = value_mse(&value, &traces, &returns);
        let mut policy = policy;
        let mut popt = NetOptimizer::for_policy(&policy, 3e-3);
        let mut vopt = NetOptimizer::for_value(&value, 1e-2);
        for _ in 0..20 {
            ppo_update(
                &mut policy,
                &mut value,
                &pool,
                &traces,
                &advantages,
                &returns,
                0.2,
                0.0,
                4,
                &mut popt,
                &mut vopt,
            )
            .unwrap();
        }
        let (after, _) = value_mse(&value, &traces, &returns);
        assert!(
            after < before,
            "value loss did not drop: {before} -> {after}"
        );
    }

    #[test]
    fn clipping_engages_after_updates() {
        // After several aggressive policy steps the ratios drift from 1 and
        // the clip branch must fire on some samples.
        let pool = CandidatePool::build(64, &PoolMode::AllCoprime).unwrap();
        let (mut policy, mut value, traces) = sample_batch(&pool, 3, 32, 6);
        let mut advantages = Vec::new();
        let mut returns = Vec::new();
        for t in &traces {
            let (a, r) = compute_gae(t, 1.0, 0.95);
            advantages.push(a);
            returns.push(r);
        }
        let mut popt = NetOptimizer::for_policy(&policy, 5e-2);
        let mut vopt = NetOptimizer::for_value(&value, 5e-2);
        let mut saw_clip = false;
        for _ in 0..10 {
            let diag = ppo_update(
                &mut policy,
                &mut value,
                &pool,
                &traces,
                &advantages,
                &returns,
                0.05,
                0.0,
                4,
                &mut popt,
                &mut vopt,
            )
            .unwrap();
            if diag.clip_fraction > 0.0 {
                saw_clip = true;
            }
        }
        assert!(saw_clip);
    }

    #[test]
    fn adam_moves_against_gradient() {
        let mut adam = Adam::new(2, 0.1);
        let mut params = vec![1.0, -1.0];
        adam.apply(&mut params, &[0.5, -0.5]);
        assert!(params[0] < 1.0);
        assert!(params[1] > -1.0);
    }
}
