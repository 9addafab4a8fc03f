//! The push-gossip simulator compared with a from-scratch rewrite. The two
//! share no RNG stream or iteration order, so agreement is statistical:
//! means over independent trial sets must land close together.

use cayleycomm::graph::{baselines, diameter, GeneratorSet};
use cayleycomm::sim::{dissemination_stats, GossipConfig, SimGraph, SourcePolicy, Topology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent push gossip: round-start informed set is frozen in a clone,
/// every informed agent pushes to each neighbor, coin per attempt.
fn reference_rounds_to_full(
    graph: &SimGraph,
    source: u32,
    p: f64,
    cap: u32,
    rng: &mut ChaCha8Rng,
) -> Option<u32> {
    let n = graph.n();
    let mut informed = vec![false; n];
    informed[source as usize] = true;
    let mut count = 1usize;
    for round in 1..=cap {
        let start: Vec<bool> = informed.clone();
        for v in 0..n as u32 {
            if !start[v as usize] {
                continue;
            }
            for &w in graph.neighbors(v) {
                if rng.gen_bool(p) && !informed[w as usize] {
                    informed[w as usize] = true;
                    count += 1;
                }
            }
        }
        if count == n {
            return Some(round);
        }
    }
    None
}

#[test]
fn reference_rewrite_matches_statistically() {
    let gs = baselines::expo_generators(256, Some(7)).unwrap();
    let sim = SimGraph::from_generator_set(&gs);
    let trials = 200u32;

    let cfg = GossipConfig {
        link_success: 0.75,
        max_rounds: 120,
        trials,
        thresholds: vec![1.0],
        source: SourcePolicy::Fixed(0),
    };
    let stats = dissemination_stats(&Topology::Graph(sim.clone()), &cfg, 0xFEED).unwrap();
    assert_eq!(stats.censored[0], 0);

    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    let mut total = 0u64;
    for _ in 0..trials {
        let rounds = reference_rounds_to_full(&sim, 0, 0.75, 120, &mut rng)
            .expect("well-connected graph finishes in 120 rounds");
        total += u64::from(rounds);
    }
    let reference_mean = total as f64 / f64::from(trials);

    assert!(
        (stats.mean_rounds[0] - reference_mean).abs() < 1.0,
        "impl {} vs reference {}",
        stats.mean_rounds[0],
        reference_mean
    );
}

#[test]
fn reference_confirms_deterministic_limit() {
    // p = 1 turns gossip into breadth-first expansion in both codebases.
    let mut rng = ChaCha8Rng::seed_from_u64(0xACE);
    for (n, offsets) in [(64u32, vec![1u32, 9]), (100, vec![1, 7, 23]), (256, vec![1, 2, 4])] {
        let gs = GeneratorSet::new(n, &offsets).unwrap();
        let sim = SimGraph::from_generator_set(&gs);
        let d = diameter(&gs).finite().expect("connected");
        for _ in 0..3 {
            let got = reference_rounds_to_full(&sim, rng.gen_range(0..n), 1.0, 120, &mut rng);
            assert_eq!(got, Some(d), "n={n} offsets={offsets:?}");
        }
    }
}
