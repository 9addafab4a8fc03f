//! Circulant communication topologies for multi-agent systems: graph
//! construction and metrics, number-theoretic candidate pools, a
//! policy-gradient search over generator sets under a degree budget, and
//! simulators (gossip dissemination, link failure, sustained load) for
//! comparing discovered topologies against rule-based baselines.

pub mod cache;
pub mod config;
pub mod error;
pub mod graph;
pub mod numtheory;
pub mod propscore;
pub mod rl;
pub mod search;
pub mod seeds;
pub mod sim;

pub use cache::{GraphMetrics, MetricsCache, ScoreCache};
pub use config::KvConfig;
pub use error::{Error, Result};
pub use graph::{baselines, Diameter, DistanceProfile, GeneratorSet};
pub use numtheory::{CandidatePool, PoolMode};
pub use propscore::propagation_score;
pub use rl::{train, TrainConfig, TrainResult};
pub use search::{exhaustive_best, SearchOutcome};
pub use sim::{SimGraph, Topology};
