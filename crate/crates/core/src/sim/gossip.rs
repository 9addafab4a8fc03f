//! Push-style epidemic gossip: each round, every informed node attempts to
//! transmit over each incident link independently with success probability p.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::KvConfig;
use crate::error::{Error, Result};
use crate::seeds;
use crate::sim::broadcast::broadcast_gossip_trial;
use crate::sim::{SimGraph, Topology};

/// Which vertex starts each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SourcePolicy {
    /// Same vertex every trial. Vertex-transitivity makes this lossless for
    /// intact circulants.
    Fixed(u32),
    /// Trial i starts at vertex i mod N.
    Rotating,
    /// Uniformly random vertex per trial; the choice damaged graphs need.
    RandomPerTrial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GossipConfig {
    /// Per-link per-attempt success probability.
    pub link_success: f64,
    pub max_rounds: u32,
    pub trials: u32,
    /// Coverage fractions whose first-hit rounds are recorded, ascending.
    pub thresholds: Vec<f64>,
    pub source: SourcePolicy,
}

impl Default for GossipConfig {
    fn default() -> Self {
        Self {
            link_success: 0.75,
            max_rounds: 120,
            trials: 30,
            thresholds: vec![0.9, 1.0],
            source: SourcePolicy::Fixed(0),
        }
    }
}

impl GossipConfig {
    pub const KEYS: &'static [&'static str] =
        &["p", "max_rounds", "trials", "thresholds", "source"];

    pub fn validate(&self) -> Result<()> {
        if !(self.link_success > 0.0 && self.link_success <= 1.0) {
            return Err(Error::Config("p must lie in (0, 1]".into()));
        }
        if self.max_rounds == 0 {
            return Err(Error::Config("max_rounds must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.thresholds.is_empty() {
            return Err(Error::Config("at least one coverage threshold".into()));
        }
        for &t in &self.thresholds {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::Config(format!("threshold {t} outside (0, 1]")));
            }
        }
        if self.thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("thresholds must be strictly ascending".into()));
        }
        Ok(())
    }

    pub fn apply_kv(&mut self, kv: &KvConfig) -> Result<()> {
        if let Some(v) = kv.get_f64("p")? {
            self.link_success = v;
        }
        if let Some(v) = kv.get_u32("max_rounds")? {
            self.max_rounds = v;
        }
        if let Some(v) = kv.get_u32("trials")? {
            self.trials = v;
        }
        if let Some(v) = kv.get_f64_list("thresholds")? {
            self.thresholds = v;
        }
        if let Some(raw) = kv.get("source") {
            self.source = match raw {
                "rotating" => SourcePolicy::Rotating,
                "random" => SourcePolicy::RandomPerTrial,
                fixed => match fixed.strip_prefix("fixed:").unwrap_or(fixed).parse::<u32>() {
                    Ok(v) => SourcePolicy::Fixed(v),
                    Err(_) => {
                        return Err(Error::Config(format!(
                            "source must be rotating, random, or fixed:<vertex>, got {raw:?}"
                        )))
                    }
                },
            };
        }
        Ok(())
    }

    pub fn to_kv(&self) -> Vec<(String, String)> {
        let thresholds = self
            .thresholds
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(",");
        let source = match self.source {
            SourcePolicy::Fixed(v) => format!("fixed:{v}"),
            SourcePolicy::Rotating => "rotating".into(),
            SourcePolicy::RandomPerTrial => "random".into(),
        };
        vec![
            ("p".into(), self.link_success.to_string()),
            ("max_rounds".into(), self.max_rounds.to_string()),
            ("trials".into(), self.trials.to_string()),
            ("thresholds".into(), thresholds),
            ("source".into(), source),
        ]
    }
}

/// Outcome of one gossip trial.
#[derive(Debug, Clone, Serialize)]
pub struct GossipTrial {
    pub source: u32,
    /// First round reaching each configured threshold; None if the cap hit
    /// first. Index matches `GossipConfig::thresholds`.
    pub rounds_to_threshold: Vec<Option<u32>>,
    pub transmissions: u64,
    pub rounds_run: u32,
    pub informed: usize,
}

fn coverage_reached(count: usize, n: usize, threshold: f64) -> bool {
    // +1e-9 absorbs representation error in threshold * n (e.g. 0.9 * 30).
    count as f64 + 1e-9 >= threshold * n as f64
}

/// One push-gossip trial. Attempts (successful or not) each cost one
/// transmission; nodes informed in round r first transmit in round r+1.
pub fn push_gossip_trial<R: Rng>(
    graph: &SimGraph,
    source: u32,
    cfg: &GossipConfig,
    rng: &mut R,
) -> GossipTrial {
    let n = graph.n();
    assert!((source as usize) < n, "source vertex out of range");
    // informed_round[v] = round in which v learned the message (0 = source).
    let mut informed_round: Vec<Option<u32>> = vec![None; n];
    informed_round[source as usize] = Some(0);
    let mut informed = 1usize;
    let mut transmissions = 0u64;
    let mut rounds_to_threshold: Vec<Option<u32>> = vec![None; cfg.thresholds.len()];
    for (i, &t) in cfg.thresholds.iter().enumerate() {
        if coverage_reached(informed, n, t) {
            rounds_to_threshold[i] = Some(0);
        }
    }

    let mut round = 0u32;
    while round < cfg.max_rounds && informed < n {
        round += 1;
        // Snapshot semantics: only nodes informed before this round transmit.
        for v in 0..n {
            match informed_round[v] {
                Some(r) if r < round => {}
                _ => continue,
            }
            for &w in graph.neighbors(v as u32) {
                transmissions += 1;
                if informed_round[w as usize].is_none() && rng.gen::<f64>() < cfg.link_success {
                    informed_round[w as usize] = Some(round);
                    informed += 1;
                }
            }
        }
        for (i, &t) in cfg.thresholds.iter().enumerate() {
            if rounds_to_threshold[i].is_none() && coverage_reached(informed, n, t) {
                rounds_to_threshold[i] = Some(round);
            }
        }
    }

    GossipTrial {
        source,
        rounds_to_threshold,
        transmissions,
        rounds_run: round,
        informed,
    }
}

/// Aggregated trial statistics. Means include censored trials at the round
/// cap; `censored` counts them per threshold.
#[derive(Debug, Clone, Serialize)]
pub struct DisseminationStats {
    pub thresholds: Vec<f64>,
    pub mean_rounds: Vec<f64>,
    pub censored: Vec<u32>,
    pub mean_transmissions: f64,
    pub trials: Vec<GossipTrial>,
}

fn trial_source<R: Rng>(policy: SourcePolicy, trial: u32, n: usize, rng: &mut R) -> u32 {
    match policy {
        SourcePolicy::Fixed(v) => {
            assert!((v as usize) < n, "fixed source {v} out of range for n={n}");
            v
        }
        SourcePolicy::Rotating => (trial as usize % n) as u32,
        SourcePolicy::RandomPerTrial => rng.gen_range(0..n as u32),
    }
}

/// Runs `cfg.trials` independent trials, each on its own RNG stream derived
/// from (master_seed, trial index), and aggregates in trial order.
pub fn dissemination_stats(
    topology: &Topology,
    cfg: &GossipConfig,
    master_seed: u64,
) -> Result<DisseminationStats> {
    cfg.validate()?;
    // A fully-connected broadcast model is plain gossip on K_N.
    let owned;
    let topology = match topology {
        Topology::Broadcast {
            n,
            model: super::BroadcastModel::FullyConnected,
        } => {
            owned = Topology::Graph(SimGraph::complete(*n));
            &owned
        }
        other => other,
    };
    let n = topology.n();

    let trials: Vec<GossipTrial> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seeds::stream(master_seed, seeds::TAG_TRIAL, &[u64::from(trial)]);
            let source = trial_source(cfg.source, trial, n, &mut rng);
            match topology {
                Topology::Graph(g) => push_gossip_trial(g, source, cfg, &mut rng),
                Topology::Broadcast { n, model } => {
                    broadcast_gossip_trial(*n, model, source, cfg, &mut rng)
                }
            }
        })
        .collect();

    let count = trials.len() as f64;
    let mut mean_rounds = vec![0.0; cfg.thresholds.len()];
    let mut censored = vec![0u32; cfg.thresholds.len()];
    let mut mean_transmissions = 0.0;
    for trial in &trials {
        for (i, hit) in trial.rounds_to_threshold.iter().enumerate() {
            match hit {
                Some(r) => mean_rounds[i] += f64::from(*r),
                None => {
                    mean_rounds[i] += f64::from(cfg.max_rounds);
                    censored[i] += 1;
                }
            }
        }
        mean_transmissions += trial.transmissions as f64;
    }
    for m in &mut mean_rounds {
        *m /= count;
    }
    mean_transmissions /= count;

    Ok(DisseminationStats {
        thresholds: cfg.thresholds.clone(),
        mean_rounds,
        censored,
        mean_transmissions,
        trials,
    })
}
