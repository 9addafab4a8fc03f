//! Distance metrics checked against independent references: Floyd-Warshall
//! over the explicit edge list, breadth-first search from every source, and
//! bitset level expansion. These deliberately avoid the library's own
//! single-source shortcut so they also validate the vertex-transitivity
//! assumption behind it.

use cayleycomm::graph::{avg_path_length, baselines, bfs_distances, diameter, Diameter, GeneratorSet};
use cayleycomm::sim::SimGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INF: u32 = u32::MAX;

fn floyd_warshall(n: usize, edges: &[(u32, u32)]) -> Vec<Vec<u32>> {
    let mut dist = vec![vec![INF; n]; n];
    for v in 0..n {
        dist[v][v] = 0;
    }
    for &(u, v) in edges {
        dist[u as usize][v as usize] = 1;
        dist[v as usize][u as usize] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            if dist[i][k] == INF {
                continue;
            }
            for j in 0..n {
                if dist[k][j] == INF {
                    continue;
                }
                let through = dist[i][k] + dist[k][j];
                if through < dist[i][j] {
                    dist[i][j] = through;
                }
            }
        }
    }
    dist
}

fn random_set(rng: &mut ChaCha8Rng) -> GeneratorSet {
    let n = rng.gen_range(3..=64u32);
    let count = rng.gen_range(1..=3usize);
    let offsets: Vec<u32> = (0..count).map(|_| rng.gen_range(1..n)).collect();
    GeneratorSet::new(n, &offsets).expect("offsets in range")
}

#[test]
fn floyd_warshall_agrees_on_random_circulants() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD15);
    for _ in 0..200 {
        let gs = random_set(&mut rng);
        let n = gs.modulus() as usize;
        let sim = SimGraph::from_generator_set(&gs);
        let all = floyd_warshall(n, sim.edges());

        let profile = bfs_distances(&gs);
        for v in 0..n {
            let oracle = if all[0][v] == INF { None } else { Some(all[0][v]) };
            assert_eq!(profile.distances()[v], oracle, "{gs} vertex {v}");
        }

        let mut max = 0u32;
        let mut sum = 0u64;
        let mut reachable_pairs = 0u64;
        let mut connected = true;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                if all[i][j] == INF {
                    connected = false;
                } else {
                    max = max.max(all[i][j]);
                    sum += u64::from(all[i][j]);
                    reachable_pairs += 1;
                }
            }
        }
        assert_eq!(gs.is_connected(), connected, "{gs}");
        if connected {
            assert_eq!(diameter(&gs), Diameter::Finite(max), "{gs}");
            // Vertex transitivity: the all-pairs sum is N times any row sum.
            let row_sum: u64 = profile
                .distances()
                .iter()
                .flatten()
                .map(|&d| u64::from(d))
                .sum();
            assert_eq!(sum, n as u64 * row_sum, "{gs}");
            let oracle_apl = sum as f64 / reachable_pairs as f64;
            assert!(
                (avg_path_length(&gs) - oracle_apl).abs() < 1e-12,
                "{gs}: {} vs {}",
                avg_path_length(&gs),
                oracle_apl
            );
        } else {
            assert_eq!(diameter(&gs), Diameter::Infinite, "{gs}");
        }
    }
}

#[test]
fn eight_vertex_reference_values() {
    // Cay(Z_8, {1,2,4}): from 0 the one-hop set is {1,2,4,6,7} and both
    // 3 = 1+2 and 5 = 1+4 take two hops, so distances sum to 9.
    let gs = GeneratorSet::new(8, &[1, 2, 4]).unwrap();
    let sim = SimGraph::from_generator_set(&gs);
    let all = floyd_warshall(8, sim.edges());
    let oracle_max = (0..8)
        .flat_map(|i| (0..8).map(move |j| (i, j)))
        .map(|(i, j)| all[i][j])
        .max()
        .unwrap();
    let oracle_sum: u32 = (0..8).map(|j| all[0][j]).sum();

    assert_eq!(gs.degree(), 5);
    assert_eq!(sim.edge_count(), 20);
    assert_eq!(oracle_max, 2);
    assert_eq!(diameter(&gs), Diameter::Finite(2));
    assert_eq!(oracle_sum, 9);
    assert_eq!(avg_path_length(&gs), 9.0 / 7.0);
}

/// Breadth-first distances from one source via plain adjacency walking,
/// written without the library's level bookkeeping.
fn bfs_reference(sim: &SimGraph, source: u32) -> Vec<u32> {
    let n = sim.n();
    let mut dist = vec![INF; n];
    dist[source as usize] = 0;
    let mut frontier = vec![source];
    let mut d = 0u32;
    while !frontier.is_empty() {
        d += 1;
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in sim.neighbors(v) {
                if dist[w as usize] == INF {
                    dist[w as usize] = d;
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    dist
}

#[test]
fn large_graph_diameter_from_every_source() {
    let gs = baselines::expo_generators(1024, Some(7)).unwrap();
    let sim = SimGraph::from_generator_set(&gs);

    let mut ecc = Vec::with_capacity(1024);
    let mut total = 0u64;
    for source in 0..1024u32 {
        let dist = bfs_reference(&sim, source);
        assert!(dist.iter().all(|&d| d != INF));
        ecc.push(*dist.iter().max().unwrap());
        total += dist.iter().map(|&d| u64::from(d)).sum::<u64>();
    }
    // Every eccentricity equal: the transitivity the library leans on.
    assert!(ecc.iter().all(|&e| e == ecc[0]));
    assert_eq!(diameter(&gs), Diameter::Finite(ecc[0]));
    let oracle_apl = total as f64 / (1024.0 * 1023.0);
    assert!((avg_path_length(&gs) - oracle_apl).abs() < 1e-12);
}

#[test]
fn bitset_expansion_matches_diameter() {
    // Level sets grown with word-wide ORs instead of queues.
    let gs = baselines::expo_generators(1024, Some(7)).unwrap();
    let sim = SimGraph::from_generator_set(&gs);
    const WORDS: usize = 1024 / 64;

    let rows: Vec<[u64; WORDS]> = (0..1024u32)
        .map(|v| {
            let mut row = [0u64; WORDS];
            for &w in sim.neighbors(v) {
                row[w as usize / 64] |= 1 << (w % 64);
            }
            row
        })
        .collect();
    let mut reach = [0u64; WORDS];
    reach[0] = 1;
    let mut steps = 0u32;
    while reach != [u64::MAX; WORDS] {
        let mut next = reach;
        for v in 0..1024 {
            if reach[v / 64] >> (v % 64) & 1 == 1 {
                for (a, b) in next.iter_mut().zip(&rows[v]) {
                    *a |= b;
                }
            }
        }
        assert_ne!(next, reach, "expansion stalled before full coverage");
        reach = next;
        steps += 1;
    }
    assert_eq!(diameter(&gs), Diameter::Finite(steps));
}

#[test]
fn distances_mirror_around_the_ring() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x313);
    for _ in 0..100 {
        let gs = random_set(&mut rng);
        let n = gs.modulus() as usize;
        let profile = bfs_distances(&gs);
        for v in 1..n {
            assert_eq!(
                profile.distances()[v],
                profile.distances()[n - v],
                "{gs} vertex {v}"
            );
        }
    }
}

#[test]
fn extra_offsets_never_hurt() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xADD);
    let mut checked = 0;
    while checked < 100 {
        let gs = random_set(&mut rng);
        let n = gs.modulus();
        let extra = rng.gen_range(1..n);
        let mut offsets = gs.offsets().to_vec();
        offsets.push(extra);
        let bigger = GeneratorSet::new(n, &offsets).unwrap();
        if bigger.offsets().len() == gs.offsets().len() {
            continue; // folded into an existing offset
        }
        assert!(diameter(&bigger) <= diameter(&gs), "{gs} + {extra}");
        if gs.is_connected() {
            assert!(avg_path_length(&bigger) <= avg_path_length(&gs) + 1e-12);
        }
        checked += 1;
    }
}
