//! Circulant graphs over Z_N given by positive generator offsets, with exact
//! structural metrics computed by BFS from vertex 0 (vertex-transitivity makes
//! one source sufficient).

pub mod baselines;

pub use baselines::{
    complete_generators, expo_generators, fibonacci_generators, prime_generators, ring_generators,
};

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::gcd_nonzero;

/// Graph diameter in hops. `Infinite` marks a disconnected graph and compares
/// greater than every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Diameter {
    Finite(u32),
    Infinite,
}

impl Diameter {
    pub fn is_finite(self) -> bool {
        matches!(self, Diameter::Finite(_))
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Diameter::Finite(d) => Some(d),
            Diameter::Infinite => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Diameter::Finite(d) => f64::from(d),
            Diameter::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Diameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diameter::Finite(d) => write!(f, "{d}"),
            Diameter::Infinite => write!(f, "inf"),
        }
    }
}

/// Positive generators S+ of a circulant graph on Z_N, in canonical form:
/// each stored offset s satisfies 1 <= s <= floor(N/2), strictly increasing.
/// An input offset s > N/2 denotes the same undirected edges as N - s and is
/// folded onto it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct GeneratorSet {
    #[serde(rename = "n")]
    modulus: u32,
    offsets: Vec<u32>,
}

#[derive(Deserialize)]
struct RawGeneratorSet {
    n: u32,
    offsets: Vec<u32>,
}

impl<'de> Deserialize<'de> for GeneratorSet {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let raw = RawGeneratorSet::deserialize(deserializer)?;
        GeneratorSet::new(raw.n, &raw.offsets).map_err(serde::de::Error::custom)
    }
}

impl GeneratorSet {
    /// Canonicalizes raw offsets: each s in [1, N-1] maps to min(s, N-s),
    /// duplicates collapse, result sorted ascending.
    pub fn new(modulus: u32, raw_offsets: &[u32]) -> Result<Self> {
        if modulus < 3 {
            return Err(Error::ModulusTooSmall(modulus));
        }
        if raw_offsets.is_empty() {
            return Err(Error::EmptyGeneratorSet);
        }
        let mut offsets = Vec::with_capacity(raw_offsets.len());
        for &s in raw_offsets {
            if s == 0 || s >= modulus {
                return Err(Error::OffsetOutOfRange {
                    offset: s,
                    max: modulus - 1,
                    modulus,
                });
            }
            offsets.push(s.min(modulus - s));
        }
        offsets.sort_unstable();
        offsets.dedup();
        Ok(Self { modulus, offsets })
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn offsets(&self) -> &[u32] {
        &self.offsets
    }

    /// Undirected degree: a half-modulus offset is self-paired and contributes
    /// one edge per vertex, every other offset contributes two.
    pub fn degree(&self) -> u32 {
        self.offsets
            .iter()
            .map(|&s| if 2 * s == self.modulus { 1 } else { 2 })
            .sum()
    }

    /// Total undirected edge count N * degree / 2.
    pub fn edge_count(&self) -> u64 {
        u64::from(self.modulus) * u64::from(self.degree()) / 2
    }

    /// Connected iff gcd of all offsets together with N is 1.
    pub fn is_connected(&self) -> bool {
        let g = self
            .offsets
            .iter()
            .fold(u64::from(self.modulus), |acc, &s| {
                gcd_nonzero(acc, u64::from(s))
            });
        g == 1
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("generator set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl fmt::Display for GeneratorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "circ({}; {:?})", self.modulus, self.offsets)
    }
}

/// Distances from vertex 0, plus the metrics derived from them.
#[derive(Debug, Clone)]
pub struct DistanceProfile {
    distances: Vec<Option<u32>>,
    diameter: Diameter,
    dist_sum: u64,
    reachable: usize,
}

impl DistanceProfile {
    /// distances[v] = d(0, v); None marks an unreachable vertex.
    pub fn distances(&self) -> &[Option<u32>] {
        &self.distances
    }

    pub fn diameter(&self) -> Diameter {
        self.diameter
    }

    /// Number of vertices reachable from 0, counting 0 itself.
    pub fn reachable(&self) -> usize {
        self.reachable
    }

    /// Mean distance over all v != 0; infinite when any vertex is unreachable.
    pub fn avg_path_length(&self) -> f64 {
        let n = self.distances.len();
        if self.reachable < n {
            return f64::INFINITY;
        }
        self.dist_sum as f64 / (n as f64 - 1.0)
    }

    /// CSV rows `vertex,distance` with `inf` for unreachable vertices.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex,distance\n");
        for (v, d) in self.distances.iter().enumerate() {
            match d {
                Some(d) => out.push_str(&format!("{v},{d}\n")),
                None => out.push_str(&format!("{v},inf\n")),
            }
        }
        out
    }
}

/// Single-source BFS from vertex 0 over neighbors {v +- s : s in offsets}.
pub fn bfs_distances(gs: &GeneratorSet) -> DistanceProfile {
    let n = gs.modulus() as usize;
    let mut distances: Vec<Option<u32>> = vec![None; n];
    distances[0] = Some(0);
    let mut queue = VecDeque::with_capacity(n);
    queue.push_back(0u32);
    let mut reachable = 1usize;
    let mut dist_sum = 0u64;
    let mut max_dist = 0u32;
    let modulus = gs.modulus();
    while let Some(v) = queue.pop_front() {
        let d = distances[v as usize].expect("queued vertices have distances");
        for &s in gs.offsets() {
            for w in [(v + s) % modulus, (v + modulus - s) % modulus] {
                if distances[w as usize].is_none() {
                    distances[w as usize] = Some(d + 1);
                    dist_sum += u64::from(d) + 1;
                    max_dist = max_dist.max(d + 1);
                    reachable += 1;
                    queue.push_back(w);
                }
            }
        }
    }
    let diameter = if reachable == n {
        Diameter::Finite(max_dist)
    } else {
        Diameter::Infinite
    };
    DistanceProfile {
        distances,
        diameter,
        dist_sum,
        reachable,
    }
}

/// Maximum shortest-path distance from any vertex; infinite when disconnected.
pub fn diameter(gs: &GeneratorSet) -> Diameter {
    bfs_distances(gs).diameter()
}

/// Mean shortest-path distance over ordered pairs; infinite when disconnected.
pub fn avg_path_length(gs: &GeneratorSet) -> f64 {
    bfs_distances(gs).avg_path_length()
}

/// Smallest D such that a degree-`degree` regular graph can hold `n` vertices
/// within D hops: n <= 1 + degree * sum_{h=0}^{D-1} (degree-1)^h. This is a
/// lower bound on the diameter of any such graph.
pub fn moore_min_diameter(n: u64, degree: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::Config("vertex count must be positive".into()));
    }
    if n == 1 {
        return Ok(0);
    }
    if degree < 2 {
        // Degree 0 reaches nothing; degree 1 reaches exactly one neighbor.
        return if n <= degree + 1 {
            Ok(1)
        } else {
            Err(Error::NoMooreBound { n, degree })
        };
    }
    let mut covered: u128 = 1;
    let mut frontier: u128 = u128::from(degree);
    let mut d: u32 = 0;
    while covered < u128::from(n) {
        d += 1;
        covered = covered.saturating_add(frontier);
        frontier = frontier.saturating_mul(u128::from(degree - 1));
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalize_folds_and_sorts() {
        let gs = GeneratorSet::new(8, &[7, 6, 4]).unwrap();
        assert_eq!(gs.offsets(), &[1, 2, 4]);
        let same = GeneratorSet::new(8, &[1, 2, 4]).unwrap();
        assert_eq!(gs, same);
    }

    #[test]
    fn canonicalize_is_idempotent_on_canonical_input() {
        let gs = GeneratorSet::new(1024, &[1, 2, 4, 8, 16, 32, 64]).unwrap();
        assert_eq!(gs.offsets(), &[1, 2, 4, 8, 16, 32, 64]);
        assert_eq!(gs.degree(), 14);
    }

    #[test]
    fn degree_counts_half_modulus_once() {
        // Offset 4 equals 8/2 and is self-paired, so it adds one edge.
        let gs = GeneratorSet::new(8, &[1, 2, 4]).unwrap();
        assert_eq!(gs.degree(), 5);
        assert_eq!(gs.edge_count(), 20);
        let no_half = GeneratorSet::new(9, &[1, 2, 4]).unwrap();
        assert_eq!(no_half.degree(), 6);
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            GeneratorSet::new(2, &[1]),
            Err(Error::ModulusTooSmall(2))
        ));
        assert!(matches!(
            GeneratorSet::new(8, &[]),
            Err(Error::EmptyGeneratorSet)
        ));
        assert!(matches!(
            GeneratorSet::new(8, &[0]),
            Err(Error::OffsetOutOfRange { .. })
        ));
        assert!(matches!(
            GeneratorSet::new(8, &[8]),
            Err(Error::OffsetOutOfRange { .. })
        ));
    }

    #[test]
    fn ring_distances() {
        let gs = GeneratorSet::new(5, &[1]).unwrap();
        let profile = bfs_distances(&gs);
        let dists: Vec<u32> = profile.distances().iter().map(|d| d.unwrap()).collect();
        assert_eq!(dists, vec![0, 1, 2, 2, 1]);
        assert_eq!(profile.diameter(), Diameter::Finite(2));
        assert_eq!(profile.avg_path_length(), 1.5);
    }

    #[test]
    fn disconnected_even_ring() {
        let gs = GeneratorSet::new(6, &[2]).unwrap();
        assert!(!gs.is_connected());
        let profile = bfs_distances(&gs);
        assert_eq!(profile.diameter(), Diameter::Infinite);
        assert!(profile.avg_path_length().is_infinite());
        assert_eq!(profile.reachable(), 3);
        assert!(profile.distances()[1].is_none());
        assert!(profile.distances()[2].is_some());
    }

    #[test]
    fn connectivity_via_gcd() {
        assert!(GeneratorSet::new(6, &[2, 3]).unwrap().is_connected());
        let primes = GeneratorSet::new(1024, &[2, 3, 5, 7, 11, 13, 17]).unwrap();
        assert!(primes.is_connected());
        assert!(!GeneratorSet::new(1024, &[2, 4, 8]).unwrap().is_connected());
    }

    #[test]
    fn moore_bound_examples() {
        assert_eq!(moore_min_diameter(1024, 14).unwrap(), 3);
        assert_eq!(moore_min_diameter(15, 2).unwrap(), 7);
        assert_eq!(moore_min_diameter(15, 14).unwrap(), 1);
        assert_eq!(moore_min_diameter(1, 5).unwrap(), 0);
        assert_eq!(moore_min_diameter(2, 1).unwrap(), 1);
        assert!(moore_min_diameter(3, 1).is_err());
        assert!(moore_min_diameter(0, 3).is_err());
    }

    #[test]
    fn moore_bound_large_values_do_not_overflow() {
        let d = moore_min_diameter(u64::MAX, 3).unwrap();
        assert!(d > 30);
    }

    #[test]
    fn diameter_ordering() {
        assert!(Diameter::Finite(3) < Diameter::Finite(4));
        assert!(Diameter::Finite(1000) < Diameter::Infinite);
        assert_eq!(Diameter::Infinite, Diameter::Infinite);
        assert_eq!(format!("{}", Diameter::Infinite), "inf");
        assert_eq!(format!("{}", Diameter::Finite(3)), "3");
    }

    #[test]
    fn json_round_trip_canonicalizes() {
        let gs = GeneratorSet::new(16, &[1, 3, 8]).unwrap();
        let text = gs.to_json();
        assert_eq!(text, r#"{"n":16,"offsets":[1,3,8]}"#);
        let back = GeneratorSet::from_json(&text).unwrap();
        assert_eq!(back, gs);
        let folded = GeneratorSet::from_json(r#"{"n":16,"offsets":[15,3,8]}"#).unwrap();
        assert_eq!(folded.offsets(), &[1, 3, 8]);
        assert!(GeneratorSet::from_json(r#"{"n":16,"offsets":[16]}"#).is_err());
        assert!(GeneratorSet::from_json(r#"{"n":16,"offsets":[]}"#).is_err());
    }

    #[test]
    fn distance_csv_shape() {
        let gs = GeneratorSet::new(6, &[2]).unwrap();
        let csv = bfs_distances(&gs).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "vertex,distance");
        assert_eq!(lines[1], "0,0");
        assert_eq!(lines[2], "1,inf");
        assert_eq!(lines[3], "2,1");
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn ring_diameter_is_half_modulus() {
        for n in 3u32..=200 {
            let gs = GeneratorSet::new(n, &[1]).unwrap();
            assert_eq!(diameter(&gs), Diameter::Finite(n / 2), "n={n}");
        }
    }

    #[test]
    fn coprime_single_offset_acts_like_ring() {
        for (n, s) in [(15u32, 4u32), (16, 3), (17, 5), (31, 12), (64, 27)] {
            let gs = GeneratorSet::new(n, &[s]).unwrap();
            assert_eq!(diameter(&gs), Diameter::Finite(n / 2), "n={n}, s={s}");
        }
    }
}
