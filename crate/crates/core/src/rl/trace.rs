//! Episode rollout (sequential generator selection without replacement) and
//! generalized advantage estimation.

use rand::Rng;

use crate::cache::{MetricsCache, ScoreCache};
use crate::error::{Error, Result};
use crate::graph::{Diameter, GeneratorSet};
use crate::numtheory::CandidatePool;
use crate::rl::policy::{masked_log_prob, masked_softmax, step_features, PolicyParams, ValueParams};

/// One decision step of an episode.
#[derive(Debug, Clone)]
pub struct StepRecord {
    /// Pool index of the chosen candidate.
    pub action: usize,
    pub log_prob: f64,
    pub reward: f64,
    /// Value estimate of the state this action was taken from.
    pub value: f64,
    /// Running mean normalized order after this step.
    pub order_avg: f64,
    /// Propagation score of the partial set after this step.
    pub score: f64,
}

/// Complete episode: exactly `budget` distinct actions plus final metrics.
#[derive(Debug, Clone)]
pub struct EpisodeTrace {
    pub steps: Vec<StepRecord>,
    pub set: GeneratorSet,
    pub diameter: Diameter,
    pub avg_path_length: f64,
    /// Diameter fed into the reward: the modulus stands in as a finite
    /// penalty when the final set is disconnected.
    pub penalized_diameter: f64,
    pub total_return: f64,
}

/// Everything a rollout needs besides the networks and RNG.
pub struct RolloutContext<'a> {
    pub pool: &'a CandidatePool,
    pub metrics: &'a MetricsCache,
    pub scores: &'a ScoreCache,
    /// Weight on the running-order shaping term.
    pub order_weight: f64,
    /// Weight on the propagation-score shaping term.
    pub score_weight: f64,
    pub budget: usize,
}

fn sample_index<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let draw: f64 = rng.gen();
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
            cum += p;
            if draw < cum {
                return i;
            }
        }
    }
    // Rounding can leave cum slightly below 1; fall back to the last
    // candidate that had any mass.
    last_positive
}

/// Runs one episode: `budget` sequential masked-softmax selections, shaped
/// rewards from the running order average and propagation score deltas, and
/// a final reward term of minus the (penalized) diameter.
pub fn rollout_episode<R: Rng>(
    policy: &PolicyParams,
    value: &ValueParams,
    ctx: &RolloutContext<'_>,
    rng: &mut R,
) -> Result<EpisodeTrace> {
    let pool = ctx.pool;
    let size = pool.len();
    if size < ctx.budget {
        return Err(Error::PoolTooSmall {
            pool: size,
            budget: ctx.budget,
        });
    }
    if ctx.budget == 0 {
        return Err(Error::Config("episode budget must be at least 1".into()));
    }

    let n = pool.modulus();
    let mut masked = vec![false; size];
    let mut chosen: Vec<u32> = Vec::with_capacity(ctx.budget);
    let mut steps = Vec::with_capacity(ctx.budget);
    let mut order_sum = 0.0;
    let mut prev_order_avg = 0.0;
    let mut prev_score = 0.0;
    let mut total_return = 0.0;
    let mut final_metrics = None;

    for t in 1..=ctx.budget {
        let features = step_features(pool, t, ctx.budget);
        let logits = policy.logits(&features);
        let probs = masked_softmax(&logits, &masked)?;
        let action = sample_index(&probs, rng);
        let log_prob = masked_log_prob(&logits, &masked, action)?;
        let value_est = value.value(&[prev_order_avg, prev_score]);

        masked[action] = true;
        chosen.push(pool.candidates()[action]);
        order_sum += pool.normalized_orders()[action];
        let order_avg = order_sum / t as f64;

        let partial = GeneratorSet::new(n, &chosen)?;
        let score = ctx.scores.get_or_compute(&partial);

        let mut reward = ctx.order_weight * (order_avg - prev_order_avg)
            + ctx.score_weight * (score - prev_score);
        if t == ctx.budget {
            let metrics = ctx.metrics.get_or_compute(&partial);
            let penalized = match metrics.diameter {
                Diameter::Finite(d) => f64::from(d),
                Diameter::Infinite => f64::from(n),
            };
            reward -= penalized;
            final_metrics = Some((partial.clone(), metrics, penalized));
        }
        total_return += reward;

        steps.push(StepRecord {
            action,
            log_prob,
            reward,
            value: value_est,
            order_avg,
            score,
        });
        prev_order_avg = order_avg;
        prev_score = score;
    }

    let (set, metrics, penalized_diameter) = final_metrics.expect("budget >= 1 sets metrics");
    Ok(EpisodeTrace {
        steps,
        set,
        diameter: metrics.diameter,
        avg_path_length: metrics.avg_path_length,
        penalized_diameter,
        total_return,
    })
}

/// GAE over one episode: deltas d_t = r_t + gamma v_{t+1} - v_t with the
/// terminal value pinned to 0, advantages A_t = d_t + gamma lambda A_{t+1},
/// and value targets R_t = A_t + v_t.
pub fn compute_gae(trace: &EpisodeTrace, discount: f64, gae_lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let k = trace.steps.len();
    let mut advantages = vec![0.0; k];
    let mut returns = vec![0.0; k];
    let mut next_adv = 0.0;
    let mut next_value = 0.0;
    for t in (0..k).rev() {
        let step = &trace.steps[t];
        let delta = step.reward + discount * next_value - step.value;
        next_adv = delta + discount * gae_lambda * next_adv;
        advantages[t] = next_adv;
        returns[t] = next_adv + step.value;
        next_value = step.value;
    }
    (advantages, returns)
}
