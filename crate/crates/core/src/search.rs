//! Exhaustive enumeration over all size-K candidate subsets: the ground-truth
//! optimum for desk-scale instances, and the oracle the trained policy is
//! judged against.

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{bfs_distances, Diameter, GeneratorSet};
use crate::numtheory::CandidatePool;

pub const DEFAULT_SEARCH_CAP: u128 = 1_000_000;

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best: GeneratorSet,
    pub diameter: Diameter,
    pub avg_path_length: f64,
    pub evaluated: u64,
}

/// C(n, k) with saturation; u128 keeps desk-scale counts exact.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(u128::from(n - i));
        acc /= u128::from(i + 1);
    }
    acc
}

/// Evaluates every size-`budget` subset of the pool and returns the
/// lexicographic (diameter, avg path length) minimizer. Ties beyond that
/// break toward the earlier subset in combination order, which is
/// deterministic for a fixed pool.
pub fn exhaustive_best(
    modulus: u32,
    pool: &CandidatePool,
    budget: usize,
    cap: u128,
) -> Result<SearchOutcome> {
    if budget == 0 {
        return Err(Error::Config("search budget must be at least 1".into()));
    }
    if pool.len() < budget {
        return Err(Error::PoolTooSmall {
            pool: pool.len(),
            budget,
        });
    }
    let combinations = binomial(pool.len() as u64, budget as u64);
    if combinations > cap {
        return Err(Error::SearchCapExceeded { combinations, cap });
    }

    let subsets: Vec<Vec<u32>> = pool
        .candidates()
        .iter()
        .copied()
        .combinations(budget)
        .collect();
    let evaluated = subsets.len() as u64;
    let best = subsets
        .into_par_iter()
        .enumerate()
        .map(|(rank, offsets)| {
            let gs = GeneratorSet::new(modulus, &offsets).expect("pool offsets are valid");
            let profile = bfs_distances(&gs);
            (
                profile.diameter().as_f64(),
                profile.avg_path_length(),
                rank,
                gs,
                profile.diameter(),
            )
        })
        .min_by(|a, b| {
            (a.0, a.1, a.2)
                .partial_cmp(&(b.0, b.1, b.2))
                .expect("metrics are never NaN")
        })
        .expect("at least one subset");

    Ok(SearchOutcome {
        best: best.3,
        diameter: best.4,
        avg_path_length: best.1,
        evaluated,
    })
}
