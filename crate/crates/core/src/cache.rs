//! Size-bounded caches for per-topology metrics, shared across parallel
//! evaluation workers. Keys are the canonical (modulus, offsets) pair, so two
//! raw spellings of the same set share an entry.

use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use lru::LruCache;

use crate::graph::{bfs_distances, Diameter, GeneratorSet};
use crate::propscore::propagation_score;

pub const DEFAULT_CACHE_CAPACITY: usize = 1 << 16;

type Key = (u32, Vec<u32>);

struct SharedLru<V: Clone> {
    inner: Mutex<LruCache<Key, V>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl<V: Clone> SharedLru<V> {
    fn new(capacity: usize) -> Self {
        let cap = NonZeroUsize::new(capacity.max(1)).expect("max(1) is nonzero");
        Self {
            inner: Mutex::new(LruCache::new(cap)),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    fn get_or_compute(&self, gs: &GeneratorSet, compute: impl FnOnce() -> V) -> V {
        let key: Key = (gs.modulus(), gs.offsets().to_vec());
        {
            let mut guard = self.inner.lock().expect("cache lock");
            if let Some(v) = guard.get(&key) {
                self.hits.fetch_add(1, Ordering::Relaxed);
                return v.clone();
            }
        }
        // Computed outside the lock; a racing worker may duplicate the work
        // but the value is a pure function of the key, so either copy wins.
        self.misses.fetch_add(1, Ordering::Relaxed);
        let v = compute();
        let mut guard = self.inner.lock().expect("cache lock");
        guard.put(key, v.clone());
        v
    }

    fn len(&self) -> usize {
        self.inner.lock().expect("cache lock").len()
    }
}

/// Diameter and average path length of one topology.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphMetrics {
    pub diameter: Diameter,
    pub avg_path_length: f64,
}

/// LRU cache of BFS-derived metrics.
pub struct MetricsCache {
    store: SharedLru<GraphMetrics>,
}

impl MetricsCache {
    pub fn new(capacity: usize) -> Self {
        Self {
            store: SharedLru::new(capacity),
        }
    }

    pub fn get_or_compute(&self, gs: &GeneratorSet) -> GraphMetrics {
        self.store.get_or_compute(gs, || {
            let profile = bfs_distances(gs);
            GraphMetrics {
                diameter: profile.diameter(),
                avg_path_length: profile.avg_path_length(),
            }
        })
    }

    pub fn hits(&self) -> u64 {
        self.store.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.store.misses.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for MetricsCache {
    fn default() -> Self {
        Self::new(DEFAULT_CACHE_CAPACITY)
    }
}

/// LRU cache of propagation scores.
pub struct ScoreCache {
    store: SharedLru<f64>,
}

impl ScoreCache {
    pub fn new(capacity: usize) -> Self {
        Self {
            store: SharedLru::new(capacity),
        }
    }

    pub fn get_or_compute(&self, gs: &GeneratorSet) -> f64 {
        self.store.get_or_compute(gs, || propagation_score(gs))
    }

    pub fn hits(&self) -> u64 {
        self.store.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.store.misses.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for ScoreCache {
    fn default() -> Self {
        Self::new(DEFAULT_CACHE_CAPACITY)
    }
}
