//! Sustained communication load: messages injected at random agents flood
//! the network with duplicate suppression; every link crossing costs one
//! unit. The broadcast medium has a closed form (one transmission reaches
//! everyone), reported by `broadcast_load_series`.

use serde::Serialize;

use crate::config::KvConfig;
use crate::error::{Error, Result};
use crate::seeds;
use crate::sim::SimGraph;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadConfig {
    pub steps: u32,
    /// New messages per step: floor(fraction * N) at distinct agents.
    pub injection_fraction: f64,
    /// Inject only at step 1 instead of every step.
    pub one_shot: bool,
}

impl Default for LoadConfig {
    fn default() -> Self {
        Self {
            steps: 50,
            injection_fraction: 0.05,
            one_shot: false,
        }
    }
}

impl LoadConfig {
    pub const KEYS: &'static [&'static str] = &["steps", "injection_fraction", "one_shot"];

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("steps must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.injection_fraction) {
            return Err(Error::Config(format!(
                "injection_fraction {} outside [0, 1]",
                self.injection_fraction
            )));
        }
        Ok(())
    }

    pub fn apply_kv(&mut self, kv: &KvConfig) -> Result<()> {
        if let Some(v) = kv.get_u32("steps")? {
            self.steps = v;
        }
        if let Some(v) = kv.get_f64("injection_fraction")? {
            self.injection_fraction = v;
        }
        if let Some(v) = kv.get_bool("one_shot")? {
            self.one_shot = v;
        }
        Ok(())
    }

    pub fn to_kv(&self) -> Vec<(String, String)> {
        vec![
            ("steps".into(), self.steps.to_string()),
            (
                "injection_fraction".into(),
                self.injection_fraction.to_string(),
            ),
            ("one_shot".into(), self.one_shot.to_string()),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadSeries {
    /// Link transmissions per step.
    pub per_step: Vec<u64>,
    pub cumulative: u64,
    pub injected: u64,
    /// Messages that reached every agent within the horizon.
    pub delivered: u64,
}

impl LoadSeries {
    pub fn average(&self) -> f64 {
        if self.per_step.is_empty() {
            return 0.0;
        }
        self.cumulative as f64 / self.per_step.len() as f64
    }

    pub fn std_dev(&self) -> f64 {
        if self.per_step.is_empty() {
            return 0.0;
        }
        let mean = self.average();
        let var = self
            .per_step
            .iter()
            .map(|&x| {
                let d = x as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / self.per_step.len() as f64;
        var.sqrt()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,transmissions,cumulative\n");
        let mut cum = 0u64;
        for (i, &x) in self.per_step.iter().enumerate() {
            cum += x;
            out.push_str(&format!("{},{},{}\n", i + 1, x, cum));
        }
        out
    }
}

struct Message {
    has: Vec<bool>,
    remaining: usize,
}

impl Message {
    fn new(n: usize, origin: u32) -> Self {
        let mut has = vec![false; n];
        has[origin as usize] = true;
        Self { has, remaining: n - 1 }
    }
}

/// Floods each message over the graph, one unit per edge crossed. An edge
/// transmits a message exactly when one endpoint holds it and the other
/// does not, so a message's lifetime cost is the number of edges between
/// distinct breadth-first levels of its origin, at most |E|.
///
/// Injection draws depend only on (seed, N, steps), never on the edges, so
/// different topologies face an identical message schedule.
pub fn comm_load_sim(graph: &SimGraph, cfg: &LoadConfig, master_seed: u64) -> Result<LoadSeries> {
    cfg.validate()?;
    let n = graph.n();
    let per_round = (cfg.injection_fraction * n as f64).floor() as usize;
    let mut rng = seeds::stream(master_seed, seeds::TAG_LOAD, &[]);
    let mut active: Vec<Message> = Vec::new();
    let mut per_step = Vec::with_capacity(cfg.steps as usize);
    let mut injected = 0u64;
    let mut delivered = 0u64;

    for step in 0..cfg.steps {
        if (step == 0 || !cfg.one_shot) && per_round > 0 {
            for origin in rand::seq::index::sample(&mut rng, n, per_round) {
                active.push(Message::new(n, origin as u32));
                injected += 1;
            }
        }
        let mut count = 0u64;
        for msg in &mut active {
            if msg.remaining == 0 {
                continue;
            }
            let mut arrivals: Vec<u32> = Vec::new();
            for &(u, v) in graph.edges() {
                let hu = msg.has[u as usize];
                let hv = msg.has[v as usize];
                if hu != hv {
                    count += 1;
                    arrivals.push(if hu { v } else { u });
                }
            }
            for v in arrivals {
                if !msg.has[v as usize] {
                    msg.has[v as usize] = true;
                    msg.remaining -= 1;
                }
            }
        }
        active.retain(|m| {
            if m.remaining == 0 {
                delivered += 1;
                false
            } else {
                true
            }
        });
        per_step.push(count);
    }
    let cumulative = per_step.iter().sum();
    Ok(LoadSeries {
        per_step,
        cumulative,
        injected,
        delivered,
    })
}

/// Broadcast-medium load: each injected message costs one transmission
/// heard by all N-1 others, completing immediately.
pub fn broadcast_load_series(n: usize, cfg: &LoadConfig) -> Result<LoadSeries> {
    cfg.validate()?;
    let per_round = (cfg.injection_fraction * n as f64).floor() as u64;
    let unit = per_round * (n as u64 - 1);
    let per_step: Vec<u64> = (0..cfg.steps)
        .map(|step| if step == 0 || !cfg.one_shot { unit } else { 0 })
        .collect();
    let injected = if cfg.one_shot {
        per_round
    } else {
        per_round * u64::from(cfg.steps)
    };
    Ok(LoadSeries {
        cumulative: per_step.iter().sum(),
        per_step,
        injected,
        delivered: injected,
    })
}
