//! Rule-based generator sets used as comparison baselines.

use crate::error::{Error, Result};
use crate::graph::GeneratorSet;

/// Powers of two {1, 2, 4, ...} below N, canonicalized. With a budget K the
/// K smallest powers are kept; a budget beyond the available powers keeps all
/// of them and warns, since larger powers would exceed N-1.
pub fn expo_generators(modulus: u32, budget: Option<usize>) -> Result<GeneratorSet> {
    if modulus < 3 {
        return Err(Error::ModulusTooSmall(modulus));
    }
    let mut powers = Vec::new();
    let mut p: u64 = 1;
    while p < u64::from(modulus) {
        powers.push(p as u32);
        p *= 2;
    }
    if let Some(k) = budget {
        if k == 0 {
            return Err(Error::Config("budget must be at least 1".into()));
        }
        if k < powers.len() {
            powers.truncate(k);
        } else if k > powers.len() {
            log::warn!(
                "budget {k} exceeds the {} powers of two below {modulus}; keeping all",
                powers.len()
            );
        }
    }
    GeneratorSet::new(modulus, &powers)
}

/// First `budget` distinct Fibonacci numbers 1, 2, 3, 5, 8, ... canonicalized.
/// The duplicate leading 1 of the raw sequence is skipped: offsets form a set.
pub fn fibonacci_generators(modulus: u32, budget: usize) -> Result<GeneratorSet> {
    if modulus < 3 {
        return Err(Error::ModulusTooSmall(modulus));
    }
    if budget == 0 {
        return Err(Error::Config("budget must be at least 1".into()));
    }
    let mut values = Vec::with_capacity(budget);
    let (mut a, mut b) = (1u64, 2u64);
    while values.len() < budget && a < u64::from(modulus) {
        values.push(a as u32);
        (a, b) = (b, a + b);
    }
    if values.len() < budget {
        return Err(Error::BaselineTooLarge {
            name: "fibonacci",
            requested: budget,
            available: values.len(),
            modulus,
        });
    }
    GeneratorSet::new(modulus, &values)
}

/// First `budget` primes 2, 3, 5, 7, ... canonicalized. Primes sharing a
/// factor with N are kept; only the whole-set gcd matters for connectivity.
pub fn prime_generators(modulus: u32, budget: usize) -> Result<GeneratorSet> {
    if modulus < 3 {
        return Err(Error::ModulusTooSmall(modulus));
    }
    if budget == 0 {
        return Err(Error::Config("budget must be at least 1".into()));
    }
    let mut values: Vec<u32> = Vec::with_capacity(budget);
    let mut candidate = 2u32;
    while values.len() < budget && candidate < modulus {
        if is_prime(candidate) {
            values.push(candidate);
        }
        candidate += 1;
    }
    if values.len() < budget {
        return Err(Error::BaselineTooLarge {
            name: "prime",
            requested: budget,
            available: values.len(),
            modulus,
        });
    }
    GeneratorSet::new(modulus, &values)
}

/// Single offset 1: the plain ring.
pub fn ring_generators(modulus: u32) -> Result<GeneratorSet> {
    GeneratorSet::new(modulus, &[1])
}

/// Every offset in [1, floor(N/2)]: the complete graph as a circulant.
pub fn complete_generators(modulus: u32) -> Result<GeneratorSet> {
    if modulus < 3 {
        return Err(Error::ModulusTooSmall(modulus));
    }
    let all: Vec<u32> = (1..=modulus / 2).collect();
    GeneratorSet::new(modulus, &all)
}

fn is_prime(x: u32) -> bool {
    if x < 2 {
        return false;
    }
    if x % 2 == 0 {
        return x == 2;
    }
    let mut d = 3u32;
    while u64::from(d) * u64::from(d) <= u64::from(x) {
        if x % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}
