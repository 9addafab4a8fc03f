//! Simulation harness: push gossip, link-failure robustness, and
//! communication-load accounting over explicit edge-list graphs.

pub mod broadcast;
pub mod failure;
pub mod gossip;
pub mod load;

pub use broadcast::{broadcast_gossip_trial, BroadcastModel, CollisionChannel, Contention, TransmitProbability};
pub use failure::{
    largest_connected_component, remove_edges, robustness_eval, BiasMode, FailureConfig,
    FailureRealization, RateRecord,
};
pub use gossip::{
    dissemination_stats, push_gossip_trial, DisseminationStats, GossipConfig, GossipTrial,
    SourcePolicy,
};
pub use load::{broadcast_load_series, comm_load_sim, LoadConfig, LoadSeries};

use crate::graph::GeneratorSet;

/// Undirected simple graph as sorted adjacency lists plus a canonical edge
/// list (u < v, sorted), the form every simulator iterates in fixed order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimGraph {
    n: usize,
    adj: Vec<Vec<u32>>,
    edges: Vec<(u32, u32)>,
}

impl SimGraph {
    /// Builds from undirected edges; reversed duplicates collapse.
    pub fn from_edges(n: usize, raw_edges: &[(u32, u32)]) -> Self {
        let mut edges: Vec<(u32, u32)> = raw_edges
            .iter()
            .filter(|(u, v)| u != v)
            .map(|&(u, v)| {
                assert!((u as usize) < n && (v as usize) < n, "edge endpoint out of range");
                (u.min(v), u.max(v))
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Self { n, adj, edges }
    }

    pub fn from_generator_set(gs: &GeneratorSet) -> Self {
        let n = gs.modulus();
        let mut edges = Vec::with_capacity(gs.edge_count() as usize);
        for &s in gs.offsets() {
            if 2 * s == n {
                for v in 0..n / 2 {
                    edges.push((v, v + s));
                }
            } else {
                for v in 0..n {
                    let w = (v + s) % n;
                    edges.push((v.min(w), v.max(w)));
                }
            }
        }
        Self::from_edges(n as usize, &edges)
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::with_capacity(n * (n - 1) / 2);
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                edges.push((u, v));
            }
        }
        Self::from_edges(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// What a dissemination experiment runs on: an explicit graph, or the shared
/// broadcast channel baseline.
#[derive(Debug, Clone)]
pub enum Topology {
    Graph(SimGraph),
    Broadcast { n: usize, model: BroadcastModel },
}

impl Topology {
    pub fn n(&self) -> usize {
        match self {
            Topology::Graph(g) => g.n(),
            Topology::Broadcast { n, .. } => *n,
        }
    }
}
