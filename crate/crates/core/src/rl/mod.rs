//! Policy-gradient search over generator sets: batched episode rollouts,
//! GAE, PPO updates, and best-so-far tracking by (diameter, path length).

pub mod policy;
pub mod ppo;
pub mod trace;

pub use policy::{masked_log_prob, masked_softmax, step_features, PolicyParams, ValueParams};
pub use ppo::{policy_surrogate, ppo_update, value_mse, NetOptimizer, PolicyGrad, ValueGrad};
pub use trace::{compute_gae, rollout_episode, EpisodeTrace, RolloutContext, StepRecord};

use rayon::prelude::*;

use crate::cache::{MetricsCache, ScoreCache, DEFAULT_CACHE_CAPACITY};
use crate::config::KvConfig;
use crate::error::{Error, Result};
use crate::graph::{Diameter, GeneratorSet};
use crate::numtheory::CandidatePool;
use crate::seeds;

/// Hyperparameters of one training run. Field names double as the config
/// file keys.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Number of generators to select per episode (floor(dmax / 2)).
    pub budget: usize,
    /// Weight on the running-order reward term.
    pub order_weight: f64,
    /// Weight on the propagation-score reward term.
    pub score_weight: f64,
    /// Fixed logit bias coefficient on the normalized order prior.
    pub prior_coef: f64,
    /// PPO clip ratio.
    pub clip_ratio: f64,
    pub learning_rate: f64,
    /// Reward discount inside GAE.
    pub discount: f64,
    pub gae_lambda: f64,
    pub episodes_per_batch: usize,
    pub epochs_per_batch: usize,
    pub batches: usize,
    pub seed: u64,
    /// Hidden width of both nets.
    pub hidden: usize,
    /// Entropy bonus weight; 0 disables the term.
    pub entropy_coef: f64,
    /// Capacity of the metrics and score caches.
    pub cache_capacity: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            budget: 2,
            order_weight: 1.0,
            score_weight: 1.0,
            prior_coef: 2.0,
            clip_ratio: 0.2,
            learning_rate: 3e-3,
            discount: 1.0,
            gae_lambda: 0.95,
            episodes_per_batch: 64,
            epochs_per_batch: 4,
            batches: 200,
            seed: 0,
            hidden: 32,
            entropy_coef: 0.0,
            cache_capacity: DEFAULT_CACHE_CAPACITY,
        }
    }
}

impl TrainConfig {
    pub const KEYS: &'static [&'static str] = &[
        "budget",
        "order_weight",
        "score_weight",
        "prior_coef",
        "clip_ratio",
        "learning_rate",
        "discount",
        "gae_lambda",
        "episodes_per_batch",
        "epochs_per_batch",
        "batches",
        "seed",
        "hidden",
        "entropy_coef",
        "cache_capacity",
    ];

    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, msg: &str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(msg.into()))
            }
        }
        check(self.budget >= 1, "budget must be at least 1")?;
        check(
            self.clip_ratio > 0.0 && self.clip_ratio < 1.0,
            "clip_ratio must lie in (0, 1)",
        )?;
        check(
            self.discount > 0.0 && self.discount <= 1.0,
            "discount must lie in (0, 1]",
        )?;
        check(
            (0.0..=1.0).contains(&self.gae_lambda),
            "gae_lambda must lie in [0, 1]",
        )?;
        check(
            self.learning_rate > 0.0 && self.learning_rate.is_finite(),
            "learning_rate must be positive",
        )?;
        check(self.episodes_per_batch >= 1, "episodes_per_batch must be at least 1")?;
        check(self.epochs_per_batch >= 1, "epochs_per_batch must be at least 1")?;
        check(self.batches >= 1, "batches must be at least 1")?;
        check(self.hidden >= 1, "hidden must be at least 1")?;
        check(
            self.order_weight.is_finite() && self.order_weight >= 0.0,
            "order_weight must be non-negative",
        )?;
        check(
            self.score_weight.is_finite() && self.score_weight >= 0.0,
            "score_weight must be non-negative",
        )?;
        check(
            self.prior_coef.is_finite() && self.prior_coef >= 0.0,
            "prior_coef must be non-negative",
        )?;
        check(
            self.entropy_coef.is_finite() && self.entropy_coef >= 0.0,
            "entropy_coef must be non-negative",
        )?;
        check(self.cache_capacity >= 1, "cache_capacity must be at least 1")?;
        Ok(())
    }

    /// Overrides fields present in `kv`. Unknown keys are the caller's
    /// concern (commands validate the whole file against their key set).
    pub fn apply_kv(&mut self, kv: &KvConfig) -> Result<()> {
        if let Some(v) = kv.get_usize("budget")? {
            self.budget = v;
        }
        if let Some(v) = kv.get_f64("order_weight")? {
            self.order_weight = v;
        }
        if let Some(v) = kv.get_f64("score_weight")? {
            self.score_weight = v;
        }
        if let Some(v) = kv.get_f64("prior_coef")? {
            self.prior_coef = v;
        }
        if let Some(v) = kv.get_f64("clip_ratio")? {
            self.clip_ratio = v;
        }
        if let Some(v) = kv.get_f64("learning_rate")? {
            self.learning_rate = v;
        }
        if let Some(v) = kv.get_f64("discount")? {
            self.discount = v;
        }
        if let Some(v) = kv.get_f64("gae_lambda")? {
            self.gae_lambda = v;
        }
        if let Some(v) = kv.get_usize("episodes_per_batch")? {
            self.episodes_per_batch = v;
        }
        if let Some(v) = kv.get_usize("epochs_per_batch")? {
            self.epochs_per_batch = v;
        }
        if let Some(v) = kv.get_usize("batches")? {
            self.batches = v;
        }
        if let Some(v) = kv.get_u64("seed")? {
            self.seed = v;
        }
        if let Some(v) = kv.get_usize("hidden")? {
            self.hidden = v;
        }
        if let Some(v) = kv.get_f64("entropy_coef")? {
            self.entropy_coef = v;
        }
        if let Some(v) = kv.get_usize("cache_capacity")? {
            self.cache_capacity = v;
        }
        Ok(())
    }

    /// Key=value lines in key order, for config snapshots.
    pub fn to_kv(&self) -> Vec<(String, String)> {
        vec![
            ("budget".into(), self.budget.to_string()),
            ("order_weight".into(), self.order_weight.to_string()),
            ("score_weight".into(), self.score_weight.to_string()),
            ("prior_coef".into(), self.prior_coef.to_string()),
            ("clip_ratio".into(), self.clip_ratio.to_string()),
            ("learning_rate".into(), self.learning_rate.to_string()),
            ("discount".into(), self.discount.to_string()),
            ("gae_lambda".into(), self.gae_lambda.to_string()),
            (
                "episodes_per_batch".into(),
                self.episodes_per_batch.to_string(),
            ),
            ("epochs_per_batch".into(), self.epochs_per_batch.to_string()),
            ("batches".into(), self.batches.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("hidden".into(), self.hidden.to_string()),
            ("entropy_coef".into(), self.entropy_coef.to_string()),
            ("cache_capacity".into(), self.cache_capacity.to_string()),
        ]
    }
}

/// One history row per batch.
#[derive(Debug, Clone, Copy)]
pub struct BatchStats {
    pub batch: usize,
    pub mean_return: f64,
    /// Diameter of the best set seen so far (inf while only disconnected).
    pub best_diameter: f64,
    pub best_apl: f64,
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub best: GeneratorSet,
    pub diameter: Diameter,
    pub avg_path_length: f64,
    pub history: Vec<BatchStats>,
    pub episodes_run: usize,
}

/// CSV export of the per-batch history.
pub fn history_to_csv(history: &[BatchStats]) -> String {
    let mut out = String::from("batch,mean_return,best_diameter,best_apl\n");
    for row in history {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.batch, row.mean_return, row.best_diameter, row.best_apl
        ));
    }
    out
}

fn normalize_advantages(advantages: &mut [Vec<f64>]) {
    let count: usize = advantages.iter().map(Vec::len).sum();
    if count == 0 {
        return;
    }
    let mean: f64 = advantages.iter().flatten().sum::<f64>() / count as f64;
    let var: f64 = advantages
        .iter()
        .flatten()
        .map(|a| (a - mean) * (a - mean))
        .sum::<f64>()
        / count as f64;
    let scale = 1.0 / (var.sqrt() + 1e-8);
    for row in advantages.iter_mut() {
        for a in row.iter_mut() {
            *a = (*a - mean) * scale;
        }
    }
}

/// Lexicographic (diameter, average path length) comparison key.
fn metric_key(diameter: Diameter, apl: f64) -> (f64, f64) {
    (diameter.as_f64(), apl)
}

/// Full training run. Deterministic for a fixed config: every episode uses
/// an RNG stream derived from (seed, batch, episode), so results do not
/// depend on the parallel schedule.
pub fn train(modulus: u32, pool: &CandidatePool, cfg: &TrainConfig) -> Result<TrainResult> {
    cfg.validate()?;
    if pool.modulus() != modulus {
        return Err(Error::Config(format!(
            "pool was built for modulus {}, not {modulus}",
            pool.modulus()
        )));
    }
    if pool.len() < cfg.budget {
        return Err(Error::PoolTooSmall {
            pool: pool.len(),
            budget: cfg.budget,
        });
    }

    let metrics = MetricsCache::new(cfg.cache_capacity);
    let scores = ScoreCache::new(cfg.cache_capacity);

    // A budget equal to the pool size admits exactly one set.
    if pool.len() == cfg.budget {
        let set = GeneratorSet::new(modulus, pool.candidates())?;
        let m = metrics.get_or_compute(&set);
        return Ok(TrainResult {
            best: set,
            diameter: m.diameter,
            avg_path_length: m.avg_path_length,
            history: Vec::new(),
            episodes_run: 0,
        });
    }

    let mut init_rng = seeds::stream(cfg.seed, seeds::TAG_INIT, &[]);
    let mut policy = PolicyParams::init(cfg.hidden, cfg.prior_coef, &mut init_rng);
    let mut value = ValueParams::init(cfg.hidden, &mut init_rng);
    let mut policy_opt = NetOptimizer::for_policy(&policy, cfg.learning_rate);
    let mut value_opt = NetOptimizer::for_value(&value, cfg.learning_rate);

    let ctx = RolloutContext {
        pool,
        metrics: &metrics,
        scores: &scores,
        order_weight: cfg.order_weight,
        score_weight: cfg.score_weight,
        budget: cfg.budget,
    };

    let mut best: Option<(GeneratorSet, Diameter, f64)> = None;
    let mut history = Vec::with_capacity(cfg.batches);
    let mut episodes_run = 0usize;

    for batch in 0..cfg.batches {
        let traces: Vec<EpisodeTrace> = (0..cfg.episodes_per_batch)
            .into_par_iter()
            .map(|episode| {
                let mut rng =
                    seeds::stream(cfg.seed, seeds::TAG_EPISODE, &[batch as u64, episode as u64]);
                rollout_episode(&policy, &value, &ctx, &mut rng)
            })
            .collect::<Result<_>>()?;
        episodes_run += traces.len();

        for trace in &traces {
            let key = metric_key(trace.diameter, trace.avg_path_length);
            let improves = match &best {
                None => true,
                Some((_, d, l)) => key < metric_key(*d, *l),
            };
            if improves {
                best = Some((trace.set.clone(), trace.diameter, trace.avg_path_length));
            }
        }

        let mut advantages = Vec::with_capacity(traces.len());
        let mut returns = Vec::with_capacity(traces.len());
        for trace in &traces {
            let (a, r) = compute_gae(trace, cfg.discount, cfg.gae_lambda);
            advantages.push(a);
            returns.push(r);
        }
        normalize_advantages(&mut advantages);

        let diag = ppo_update(
            &mut policy,
            &mut value,
            pool,
            &traces,
            &advantages,
            &returns,
            cfg.clip_ratio,
            cfg.entropy_coef,
            cfg.epochs_per_batch,
            &mut policy_opt,
            &mut value_opt,
        )?;

        let mean_return =
            traces.iter().map(|t| t.total_return).sum::<f64>() / traces.len() as f64;
        let (_, best_d, best_l) = best.as_ref().expect("at least one episode ran");
        history.push(BatchStats {
            batch,
            mean_return,
            best_diameter: best_d.as_f64(),
            best_apl: *best_l,
        });
        log::debug!(
            "batch {batch}: mean_return={mean_return:.4} best_d={best_d} \
             obj={:.4} vloss={:.4} clip={:.3}",
            diag.policy_objective,
            diag.value_loss,
            diag.clip_fraction
        );
    }

    let (set, diameter, apl) = best.expect("batches >= 1 ran");
    log::info!(
        "training done: best {set}, diameter {diameter}, apl {apl:.4}, \
         cache {} hits / {} misses",
        metrics.hits(),
        metrics.misses()
    );
    Ok(TrainResult {
        best: set,
        diameter,
        avg_path_length: apl,
        history,
        episodes_run,
    })
}
