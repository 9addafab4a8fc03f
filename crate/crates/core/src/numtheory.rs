//! Multiplicative orders modulo N and candidate pool construction.

use serde::Serialize;

use crate::error::{Error, Result};

/// Euclidean gcd. Errors on gcd(0, 0), which is undefined.
pub fn gcd(a: u64, b: u64) -> Result<u64> {
    if a == 0 && b == 0 {
        return Err(Error::GcdUndefined);
    }
    Ok(gcd_nonzero(a, b))
}

/// Euclidean gcd where at least one argument is nonzero.
pub(crate) fn gcd_nonzero(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Smallest k >= 1 with a^k = 1 (mod n). Requires n >= 2 and gcd(a, n) = 1.
///
/// Plain iteration: the order divides the group size, so at most n - 1 steps.
pub fn multiplicative_order(a: u64, n: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::Config(format!("order needs modulus >= 2, got {n}")));
    }
    let a = a % n;
    let g = gcd(a, n)?;
    if g != 1 {
        return Err(Error::OrderUndefined { a, n, g });
    }
    let mut acc = a;
    for k in 1..=n {
        if acc == 1 {
            return Ok(k);
        }
        acc = acc * a % n;
    }
    unreachable!("unit element must have finite order");
}

/// How candidate offsets for generator search are produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PoolMode {
    /// Every offset in [1, floor(n/2)] coprime to n.
    AllCoprime,
    /// Primes in [2, floor(n/2)] coprime to n.
    PrimesCoprime,
    /// Caller-supplied offsets; folded to canonical range, deduplicated,
    /// non-coprime entries dropped with a warning.
    Explicit(Vec<u32>),
}

/// Candidate offsets with their multiplicative orders and normalized orders.
///
/// `normalized_orders[i] = orders[i] / max(orders)`, so the maximum is 1.0
/// exactly and every entry lies in (0, 1].
#[derive(Debug, Clone, Serialize)]
pub struct CandidatePool {
    modulus: u32,
    candidates: Vec<u32>,
    orders: Vec<u64>,
    normalized_orders: Vec<f64>,
}

fn sieve_primes(limit: u32) -> Vec<u32> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u32);
            let mut q = p * p;
            while q <= n {
                composite[q] = true;
                q += p;
            }
        }
    }
    primes
}

impl CandidatePool {
    pub fn build(modulus: u32, mode: &PoolMode) -> Result<Self> {
        if modulus < 3 {
            return Err(Error::ModulusTooSmall(modulus));
        }
        let half = modulus / 2;
        let n = modulus as u64;
        let mut candidates: Vec<u32> = match mode {
            PoolMode::AllCoprime => (1..=half)
                .filter(|&s| gcd_nonzero(s as u64, n) == 1)
                .collect(),
            PoolMode::PrimesCoprime => sieve_primes(half)
                .into_iter()
                .filter(|&p| gcd_nonzero(p as u64, n) == 1)
                .collect(),
            PoolMode::Explicit(raw) => {
                let mut folded = Vec::with_capacity(raw.len());
                for &s in raw {
                    if s == 0 || s >= modulus {
                        return Err(Error::OffsetOutOfRange {
                            offset: s,
                            max: modulus - 1,
                            modulus,
                        });
                    }
                    let canon = s.min(modulus - s);
                    if gcd_nonzero(canon as u64, n) != 1 {
                        log::warn!("dropping pool candidate {s}: not coprime to {modulus}");
                        continue;
                    }
                    folded.push(canon);
                }
                folded.sort_unstable();
                folded.dedup();
                folded
            }
        };
        candidates.sort_unstable();
        candidates.dedup();
        if candidates.is_empty() {
            return Err(Error::EmptyPool { modulus });
        }

        let orders: Vec<u64> = candidates
            .iter()
            .map(|&c| multiplicative_order(c as u64, n))
            .collect::<Result<_>>()?;
        let max_order = *orders.iter().max().expect("pool is nonempty") as f64;
        let normalized_orders = orders.iter().map(|&o| o as f64 / max_order).collect();
        Ok(Self {
            modulus,
            candidates,
            orders,
            normalized_orders,
        })
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn candidates(&self) -> &[u32] {
        &self.candidates
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn normalized_orders(&self) -> &[f64] {
        &self.normalized_orders
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// CSV rows `candidate,order,normalized_order`, one per candidate.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("candidate,order,normalized_order\n");
        for i in 0..self.candidates.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                self.candidates[i], self.orders[i], self.normalized_orders[i]
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_basics() {
        assert_eq!(gcd(12, 18).unwrap(), 6);
        assert_eq!(gcd(7, 0).unwrap(), 7);
        assert_eq!(gcd(0, 7).unwrap(), 7);
        assert_eq!(gcd(1, 1).unwrap(), 1);
        assert!(matches!(gcd(0, 0), Err(Error::GcdUndefined)));
    }

    #[test]
    fn order_by_brute_force_agrees() {
        // Independent check: scan powers directly with u128 arithmetic.
        fn brute(a: u128, n: u128) -> u64 {
            let mut acc = 1u128;
            for k in 1..=n {
                acc = acc * a % n;
                if acc == 1 {
                    return k as u64;
                }
            }
            panic!("no order found");
        }
        for n in 2u64..=200 {
            for a in 1..n {
                if gcd_nonzero(a, n) != 1 {
                    assert!(multiplicative_order(a, n).is_err());
                    continue;
                }
                assert_eq!(
                    multiplicative_order(a, n).unwrap(),
                    brute(a as u128, n as u128),
                    "order mismatch at a={a}, n={n}"
                );
            }
        }
    }

    #[test]
    fn order_examples() {
        assert_eq!(multiplicative_order(3, 1024).unwrap(), 256);
        assert_eq!(multiplicative_order(1, 5).unwrap(), 1);
        assert_eq!(multiplicative_order(2, 7).unwrap(), 3);
        assert!(multiplicative_order(2, 1024).is_err());
    }

    #[test]
    fn pool_all_coprime_n8() {
        let pool = CandidatePool::build(8, &PoolMode::AllCoprime).unwrap();
        assert_eq!(pool.candidates(), &[1, 3]);
        assert_eq!(pool.orders(), &[1, 2]);
        assert_eq!(pool.normalized_orders(), &[0.5, 1.0]);
    }

    #[test]
    fn pool_all_coprime_n7() {
        let pool = CandidatePool::build(7, &PoolMode::AllCoprime).unwrap();
        assert_eq!(pool.candidates(), &[1, 2, 3]);
        assert_eq!(pool.orders(), &[1, 3, 6]);
        assert_eq!(pool.normalized_orders(), &[1.0 / 6.0, 0.5, 1.0]);
    }

    #[test]
    fn pool_primes_excludes_shared_factors() {
        let pool = CandidatePool::build(64, &PoolMode::PrimesCoprime).unwrap();
        assert_eq!(
            pool.candidates(),
            &[3, 5, 7, 11, 13, 17, 19, 23, 29, 31]
        );
        let big = CandidatePool::build(1024, &PoolMode::PrimesCoprime).unwrap();
        assert_eq!(big.candidates()[0], 3);
        assert_eq!(*big.candidates().last().unwrap(), 509);
        assert!(big.candidates().iter().all(|&p| p % 2 == 1));
    }

    #[test]
    fn pool_primes_can_be_empty() {
        assert!(matches!(
            CandidatePool::build(4, &PoolMode::PrimesCoprime),
            Err(Error::EmptyPool { modulus: 4 })
        ));
    }

    #[test]
    fn pool_primes_odd_modulus_keeps_two() {
        let pool = CandidatePool::build(31, &PoolMode::PrimesCoprime).unwrap();
        assert_eq!(pool.candidates(), &[2, 3, 5, 7, 11, 13]);
    }

    #[test]
    fn pool_explicit_folds_and_dedupes() {
        // 60 folds to 4 (not coprime to 64, dropped with a warning),
        // 63 folds to 1, 33 folds to 31.
        let pool = CandidatePool::build(64, &PoolMode::Explicit(vec![63, 33, 31, 60])).unwrap();
        assert_eq!(pool.candidates(), &[1, 31]);
    }

    #[test]
    fn pool_explicit_rejects_out_of_range() {
        assert!(CandidatePool::build(16, &PoolMode::Explicit(vec![0])).is_err());
        assert!(CandidatePool::build(16, &PoolMode::Explicit(vec![16])).is_err());
    }

    #[test]
    fn pool_normalization_hits_one_exactly() {
        for n in [15u32, 31, 47, 64, 128, 255] {
            let pool = CandidatePool::build(n, &PoolMode::AllCoprime).unwrap();
            let max = pool
                .normalized_orders()
                .iter()
                .cloned()
                .fold(f64::MIN, f64::max);
            assert_eq!(max, 1.0);
            assert!(pool.normalized_orders().iter().all(|&w| w > 0.0 && w <= 1.0));
        }
    }

    #[test]
    fn pool_empty_when_nothing_coprime() {
        // modulus 4: half-range is {1, 2}, explicit {2} folds to 2, not coprime.
        assert!(matches!(
            CandidatePool::build(4, &PoolMode::Explicit(vec![2])),
            Err(Error::EmptyPool { .. })
        ));
    }
}
