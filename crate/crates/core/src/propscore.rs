//! Parameter-free propagation score g(S) used as dense reward shaping.
//!
//! Two rounds of X <- tanh(A_hat X) starting from fixed circle features, where
//! A_hat is the symmetrically normalized self-looped adjacency. The circulant
//! is regular, so each row action of A_hat reduces to (sum over neighbors and
//! self) / (degree + 1). The score is the negative sum of per-channel
//! population variances of the final features: 0 for perfect mixing, more
//! negative the more uneven the propagated features stay.

use crate::graph::GeneratorSet;

pub const FEATURE_CHANNELS: usize = 3;
pub const ROUNDS: usize = 2;

/// Row i = [cos(2*pi*i/n), sin(2*pi*i/n), 1].
pub fn node_features(n: usize) -> Vec<[f64; FEATURE_CHANNELS]> {
    let step = 2.0 * std::f64::consts::PI / n as f64;
    (0..n)
        .map(|i| {
            let theta = step * i as f64;
            [theta.cos(), theta.sin(), 1.0]
        })
        .collect()
}

/// Population variance (divide by row count) of each feature channel.
pub fn variance_per_channel(rows: &[[f64; FEATURE_CHANNELS]]) -> [f64; FEATURE_CHANNELS] {
    let n = rows.len();
    assert!(n >= 1, "variance needs at least one row");
    let inv = 1.0 / n as f64;
    let mut mean = [0.0f64; FEATURE_CHANNELS];
    for row in rows {
        for j in 0..FEATURE_CHANNELS {
            mean[j] += row[j];
        }
    }
    for m in &mut mean {
        *m *= inv;
    }
    let mut var = [0.0f64; FEATURE_CHANNELS];
    for j in 0..FEATURE_CHANNELS {
        // A constant channel has zero variance by definition; the two-pass
        // estimate would report rounding noise from mean != value.
        if rows.iter().all(|row| row[j] == rows[0][j]) {
            continue;
        }
        for row in rows {
            let d = row[j] - mean[j];
            var[j] += d * d;
        }
        var[j] *= inv;
    }
    var
}

/// Neighbor lists including self, each sorted ascending so the summation
/// order is fixed regardless of offset order or parallel schedule.
fn self_looped_adjacency(gs: &GeneratorSet) -> Vec<Vec<u32>> {
    let n = gs.modulus();
    (0..n)
        .map(|v| {
            let mut around = Vec::with_capacity(gs.offsets().len() * 2 + 1);
            around.push(v);
            for &s in gs.offsets() {
                around.push((v + s) % n);
                if 2 * s != n {
                    around.push((v + n - s) % n);
                }
            }
            around.sort_unstable();
            around
        })
        .collect()
}

/// g(S): negative total channel variance after two propagation rounds.
/// Always <= 0; exactly 0 when every vertex ends with identical features,
/// which the complete circulant achieves after a single round.
pub fn propagation_score(gs: &GeneratorSet) -> f64 {
    let n = gs.modulus() as usize;
    let adj = self_looped_adjacency(gs);
    let inv_deg = 1.0 / (f64::from(gs.degree()) + 1.0);
    let mut x = node_features(n);
    let mut next = vec![[0.0f64; FEATURE_CHANNELS]; n];
    for _ in 0..ROUNDS {
        for v in 0..n {
            let mut acc = [0.0f64; FEATURE_CHANNELS];
            for &w in &adj[v] {
                let row = &x[w as usize];
                for j in 0..FEATURE_CHANNELS {
                    acc[j] += row[j];
                }
            }
            for j in 0..FEATURE_CHANNELS {
                next[v][j] = (acc[j] * inv_deg).tanh();
            }
        }
        std::mem::swap(&mut x, &mut next);
    }
    let var = variance_per_channel(&x);
    -(var[0] + var[1] + var[2])
}
