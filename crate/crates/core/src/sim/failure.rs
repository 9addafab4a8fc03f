//! Link-failure robustness: edge removal (uniform or biased toward
//! long-range links), largest connected component, and the per-rate
//! robustness evaluation combining both with gossip under damage.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::KvConfig;
use crate::error::{Error, Result};
use crate::seeds;
use crate::sim::gossip::{push_gossip_trial, GossipConfig};
use crate::sim::SimGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BiasMode {
    /// Uniform sample of edges.
    Random,
    /// Removal weight proportional to the canonical ring offset
    /// min(|u-v|, N-|u-v|): long-range links fail preferentially.
    DistanceBiased,
}

impl BiasMode {
    pub fn label(self) -> &'static str {
        match self {
            BiasMode::Random => "random",
            BiasMode::DistanceBiased => "biased",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureConfig {
    pub rates: Vec<f64>,
    pub realizations: u32,
    /// Mode used for the mean-T90 and mean-LCC columns. Pr80 is always
    /// reported for both modes.
    pub bias: BiasMode,
    /// LCC fraction that counts as surviving (the 80 in Pr80).
    pub lcc_threshold: f64,
}

impl Default for FailureConfig {
    fn default() -> Self {
        Self {
            rates: vec![0.30, 0.50, 0.70, 0.85],
            realizations: 20,
            bias: BiasMode::Random,
            lcc_threshold: 0.8,
        }
    }
}

impl FailureConfig {
    pub const KEYS: &'static [&'static str] =
        &["rates", "realizations", "bias", "lcc_threshold"];

    pub fn validate(&self) -> Result<()> {
        if self.rates.is_empty() {
            return Err(Error::Config("at least one failure rate".into()));
        }
        for &r in &self.rates {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::Config(format!("failure rate {r} outside [0, 1)")));
            }
        }
        if self.realizations == 0 {
            return Err(Error::Config("realizations must be at least 1".into()));
        }
        if !(self.lcc_threshold > 0.0 && self.lcc_threshold <= 1.0) {
            return Err(Error::Config("lcc_threshold must lie in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn apply_kv(&mut self, kv: &KvConfig) -> Result<()> {
        if let Some(v) = kv.get_f64_list("rates")? {
            self.rates = v;
        }
        if let Some(v) = kv.get_u32("realizations")? {
            self.realizations = v;
        }
        if let Some(raw) = kv.get("bias") {
            self.bias = match raw {
                "random" => BiasMode::Random,
                "biased" | "distance" | "distance-biased" => BiasMode::DistanceBiased,
                _ => {
                    return Err(Error::Config(format!(
                        "bias must be random or distance-biased, got {raw:?}"
                    )))
                }
            };
        }
        if let Some(v) = kv.get_f64("lcc_threshold")? {
            self.lcc_threshold = v;
        }
        Ok(())
    }

    pub fn to_kv(&self) -> Vec<(String, String)> {
        let rates = self
            .rates
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(",");
        vec![
            ("rates".into(), rates),
            ("realizations".into(), self.realizations.to_string()),
            ("bias".into(), self.bias.label().into()),
            ("lcc_threshold".into(), self.lcc_threshold.to_string()),
        ]
    }
}

/// Canonical ring offset of an edge, the distance-bias weight.
fn edge_offset(n: usize, u: u32, v: u32) -> u32 {
    let d = u.abs_diff(v);
    d.min(n as u32 - d)
}

/// Removes exactly floor(rate * |E|) edges and returns the damaged graph.
pub fn remove_edges<R: Rng>(
    graph: &SimGraph,
    rate: f64,
    bias: BiasMode,
    rng: &mut R,
) -> SimGraph {
    assert!((0.0..1.0).contains(&rate), "rate {rate} outside [0, 1)");
    let edges = graph.edges();
    let total = edges.len();
    let remove = (rate * total as f64).floor() as usize;
    if remove == 0 {
        return graph.clone();
    }
    let mut doomed = vec![false; total];
    match bias {
        BiasMode::Random => {
            for idx in rand::seq::index::sample(rng, total, remove) {
                doomed[idx] = true;
            }
        }
        BiasMode::DistanceBiased => {
            // Weighted sampling without replacement: each edge draws the key
            // ln(u) / w and the largest keys are removed; heavier weights
            // pull keys toward zero, so long-range edges go first.
            let mut keys: Vec<(f64, usize)> = edges
                .iter()
                .enumerate()
                .map(|(i, &(u, v))| {
                    let w = f64::from(edge_offset(graph.n(), u, v));
                    let draw: f64 = 1.0 - rng.gen::<f64>(); // (0, 1], ln finite
                    (draw.ln() / w, i)
                })
                .collect();
            keys.sort_unstable_by(|a, b| b.partial_cmp(a).expect("keys are finite"));
            for &(_, idx) in keys.iter().take(remove) {
                doomed[idx] = true;
            }
        }
    }
    let kept: Vec<(u32, u32)> = edges
        .iter()
        .enumerate()
        .filter(|(i, _)| !doomed[*i])
        .map(|(_, &e)| e)
        .collect();
    SimGraph::from_edges(graph.n(), &kept)
}

/// Largest connected component by BFS sweep: (size, fraction of N).
pub fn largest_connected_component(graph: &SimGraph) -> (usize, f64) {
    let n = graph.n();
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    let mut best = 0usize;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start as u32);
        let mut size = 1usize;
        while let Some(v) = queue.pop_front() {
            for &w in graph.neighbors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    size += 1;
                    queue.push_back(w);
                }
            }
        }
        best = best.max(size);
    }
    (best, best as f64 / n as f64)
}

/// Coverage fraction whose first-hit round is recorded under damage.
pub const DAMAGE_COVERAGE: f64 = 0.9;

/// One damaged-graph realization, raw output row.
#[derive(Debug, Clone, Serialize)]
pub struct FailureRealization {
    pub rate: f64,
    pub mode: BiasMode,
    pub index: u32,
    pub lcc_fraction: f64,
    /// Gossip source; rows of the configured bias mode only.
    pub source: Option<u32>,
    /// Rounds until 90% coverage on the damaged graph; None when the cap
    /// hit first or when this mode carries no gossip trial.
    pub t90: Option<u32>,
    pub censored: bool,
}

/// Aggregates for one failure rate. The mean columns report the configured
/// bias mode; Pr80 is always reported for both modes.
#[derive(Debug, Clone, Serialize)]
pub struct RateRecord {
    pub rate: f64,
    /// Mean rounds to 90% coverage, censored trials counted at the cap.
    pub mean_t90: f64,
    pub t90_censored: u32,
    pub mean_lcc: f64,
    pub pr80_random: f64,
    pub pr80_biased: f64,
}

/// For each rate: `realizations` damaged graphs per bias mode. The mode
/// matching `fail_cfg.bias` additionally runs one gossip trial from a
/// uniformly random source; a damaged graph is not vertex-transitive, so
/// the source must vary.
pub fn robustness_eval(
    graph: &SimGraph,
    fail_cfg: &FailureConfig,
    gossip_cfg: &GossipConfig,
    master_seed: u64,
) -> Result<(Vec<RateRecord>, Vec<FailureRealization>)> {
    fail_cfg.validate()?;
    gossip_cfg.validate()?;
    let damage_gossip = GossipConfig {
        thresholds: vec![DAMAGE_COVERAGE],
        ..gossip_cfg.clone()
    };
    let n = graph.n();
    let mut records = Vec::with_capacity(fail_cfg.rates.len());
    let mut raw = Vec::new();

    for (rate_idx, &rate) in fail_cfg.rates.iter().enumerate() {
        let realizations: Vec<(FailureRealization, FailureRealization)> = (0..fail_cfg
            .realizations)
            .into_par_iter()
            .map(|idx| {
                let path = [rate_idx as u64, u64::from(idx)];
                let build = |mode: BiasMode, tag: u64| {
                    let mut rng = seeds::stream(master_seed, tag, &path);
                    let damaged = remove_edges(graph, rate, mode, &mut rng);
                    let (_, lcc) = largest_connected_component(&damaged);
                    let mut row = FailureRealization {
                        rate,
                        mode,
                        index: idx,
                        lcc_fraction: lcc,
                        source: None,
                        t90: None,
                        censored: false,
                    };
                    if mode == fail_cfg.bias {
                        let source = rng.gen_range(0..n as u32);
                        let trial =
                            push_gossip_trial(&damaged, source, &damage_gossip, &mut rng);
                        row.source = Some(source);
                        row.t90 = trial.rounds_to_threshold[0];
                        row.censored = trial.rounds_to_threshold[0].is_none();
                    }
                    row
                };
                let random_row = build(BiasMode::Random, seeds::TAG_FAILURE_RANDOM);
                let biased_row = build(BiasMode::DistanceBiased, seeds::TAG_FAILURE_BIASED);
                (random_row, biased_row)
            })
            .collect();

        let count = fail_cfg.realizations as f64;
        let mut mean_t90 = 0.0;
        let mut t90_censored = 0u32;
        let mut mean_lcc = 0.0;
        let mut survived_random = 0u32;
        let mut survived_biased = 0u32;
        for (random_row, biased_row) in &realizations {
            let lead = match fail_cfg.bias {
                BiasMode::Random => random_row,
                BiasMode::DistanceBiased => biased_row,
            };
            match lead.t90 {
                Some(r) => mean_t90 += f64::from(r),
                None => {
                    mean_t90 += f64::from(damage_gossip.max_rounds);
                    t90_censored += 1;
                }
            }
            mean_lcc += lead.lcc_fraction;
            if random_row.lcc_fraction + 1e-9 >= fail_cfg.lcc_threshold {
                survived_random += 1;
            }
            if biased_row.lcc_fraction + 1e-9 >= fail_cfg.lcc_threshold {
                survived_biased += 1;
            }
        }
        records.push(RateRecord {
            rate,
            mean_t90: mean_t90 / count,
            t90_censored,
            mean_lcc: mean_lcc / count,
            pr80_random: f64::from(survived_random) / count,
            pr80_biased: f64::from(survived_biased) / count,
        });
        for (random_row, biased_row) in realizations {
            raw.push(random_row);
            raw.push(biased_row);
        }
    }
    Ok((records, raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GeneratorSet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn graph64() -> SimGraph {
        let gs = GeneratorSet::new(64, &[1, 2, 4, 8, 16, 32]).unwrap();
        SimGraph::from_generator_set(&gs)
    }

    #[test]
    fn removal_count_is_exact() {
        let g = graph64();
        let total = g.edge_count();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for rate in [0.0, 0.1, 0.5, 0.85, 0.99] {
            let damaged = remove_edges(&g, rate, BiasMode::Random, &mut rng);
            let expect = total - (rate * total as f64).floor() as usize;
            assert_eq!(damaged.edge_count(), expect, "rate={rate}");
        }
        let damaged = remove_edges(&g, 0.0, BiasMode::Random, &mut rng);
        assert_eq!(damaged.edges(), g.edges());
    }

    #[test]
    fn ten_edge_graph_halves_exactly() {
        let edges: Vec<(u32, u32)> = (0..10).map(|i| (i, (i + 1) % 11)).collect();
        let g = SimGraph::from_edges(11, &edges);
        assert_eq!(g.edge_count(), 10);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let damaged = remove_edges(&g, 0.5, BiasMode::Random, &mut rng);
        assert_eq!(damaged.edge_count(), 5);
    }

    #[test]
    fn biased_removal_prefers_long_edges() {
        let g = graph64();
        let mut removed_sum = 0.0;
        let mut removed_n = 0u32;
        let mut kept_sum = 0.0;
        let mut kept_n = 0u32;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let damaged = remove_edges(&g, 0.3, BiasMode::DistanceBiased, &mut rng);
            let kept: std::collections::HashSet<(u32, u32)> =
                damaged.edges().iter().copied().collect();
            for &(u, v) in g.edges() {
                let w = f64::from(edge_offset(64, u, v));
                if kept.contains(&(u, v)) {
                    kept_sum += w;
                    kept_n += 1;
                } else {
                    removed_sum += w;
                    removed_n += 1;
                }
            }
        }
        let removed_mean = removed_sum / f64::from(removed_n);
        let kept_mean = kept_sum / f64::from(kept_n);
        assert!(
            removed_mean > kept_mean,
            "removed mean offset {removed_mean} not above kept {kept_mean}"
        );
    }

    #[test]
    fn lcc_hand_cases() {
        let g = graph64();
        assert_eq!(largest_connected_component(&g), (64, 1.0));
        let empty = SimGraph::from_edges(10, &[]);
        assert_eq!(largest_connected_component(&empty), (1, 0.1));
        // Disjoint triangle and pentagon on 8 vertices.
        let two = SimGraph::from_edges(
            8,
            &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 6), (6, 7), (7, 3)],
        );
        assert_eq!(largest_connected_component(&two), (5, 5.0 / 8.0));
    }

    #[test]
    fn lcc_agrees_with_union_find() {
        struct Dsu(Vec<usize>);
        impl Dsu {
            fn find(&mut self, x: usize) -> usize {
                if self.0[x] != x {
                    let root = self.find(self.0[x]);
                    self.0[x] = root;
                }
                self.0[x]
            }
            fn union(&mut self, a: usize, b: usize) {
                let (ra, rb) = (self.find(a), self.find(b));
                if ra != rb {
                    self.0[ra] = rb;
                }
            }
        }
        let g = graph64();
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rate = 0.2 + 0.7 * (seed as f64 / 200.0);
            let damaged = remove_edges(&g, rate, BiasMode::Random, &mut rng);
            let mut dsu = Dsu((0..64).collect());
            for &(u, v) in damaged.edges() {
                dsu.union(u as usize, v as usize);
            }
            let mut counts = std::collections::HashMap::new();
            for v in 0..64 {
                *counts.entry(dsu.find(v)).or_insert(0usize) += 1;
            }
            let expect = counts.values().copied().max().unwrap();
            assert_eq!(largest_connected_component(&damaged).0, expect, "seed={seed}");
        }
    }

    #[test]
    fn rate_zero_gives_full_survival() {
        let g = graph64();
        let cfg = FailureConfig {
            rates: vec![0.0],
            realizations: 5,
            ..FailureConfig::default()
        };
        let (records, raw) =
            robustness_eval(&g, &cfg, &GossipConfig::default(), 11).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].pr80_random, 1.0);
        assert_eq!(records[0].pr80_biased, 1.0);
        assert_eq!(records[0].mean_lcc, 1.0);
        assert_eq!(raw.len(), 10);
    }

    #[test]
    fn near_total_failure_shatters_graph() {
        let g = graph64();
        let cfg = FailureConfig {
            rates: vec![0.99],
            realizations: 10,
            ..FailureConfig::default()
        };
        let (records, _) = robustness_eval(&g, &cfg, &GossipConfig::default(), 3).unwrap();
        assert_eq!(records[0].pr80_random, 0.0);
        assert!(records[0].mean_lcc < 0.3);
    }

    #[test]
    fn evaluation_is_reproducible() {
        let g = graph64();
        let cfg = FailureConfig {
            rates: vec![0.5, 0.85],
            realizations: 8,
            ..FailureConfig::default()
        };
        let a = robustness_eval(&g, &cfg, &GossipConfig::default(), 21).unwrap();
        let b = robustness_eval(&g, &cfg, &GossipConfig::default(), 21).unwrap();
        for (x, y) in a.0.iter().zip(&b.0) {
            assert_eq!(x.mean_t90.to_bits(), y.mean_t90.to_bits());
            assert_eq!(x.pr80_random, y.pr80_random);
            assert_eq!(x.pr80_biased, y.pr80_biased);
        }
        assert_eq!(a.1.len(), b.1.len());
    }

    #[test]
    fn config_kv_round_trip() {
        let kv = KvConfig::parse("rates = 0.3, 0.85\nrealizations = 5\nbias = distance-biased")
            .unwrap();
        let mut cfg = FailureConfig::default();
        cfg.apply_kv(&kv).unwrap();
        assert_eq!(cfg.rates, vec![0.3, 0.85]);
        assert_eq!(cfg.realizations, 5);
        assert_eq!(cfg.bias, BiasMode::DistanceBiased);
        assert!(FailureConfig {
            rates: vec![1.0],
            ..FailureConfig::default()
        }
        .validate()
        .is_err());
    }
}
