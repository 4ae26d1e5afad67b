//! Seeded, splittable random source.
//!
//! Every stochastic operation takes a [`RandomSource`] so that runs are
//! reproducible bit-for-bit from a `u64` seed. A source can derive child
//! streams keyed by an index; a child depends only on `(seed, index)`, never
//! on how much the parent has already drawn. Partitioning work across threads
//! with one child stream per fixed-size chunk therefore gives results that do
//! not depend on the number of workers.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;

/// Trials per child stream when a Monte Carlo run is partitioned. Fixed so
/// results do not depend on the worker count.
pub(crate) const CHUNK_TRIALS: u64 = 8192;

/// A deterministic random stream (ChaCha12 keyed by a 64-bit seed).
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha12Rng,
}

impl RandomSource {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    /// The seed this stream was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derive an independent child stream from `(seed, index)`.
    pub fn child(&self, index: u64) -> Self {
        Self::from_seed(mix(self.seed, index))
    }

    /// Uniform draw in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Unit-rate exponential draw.
    pub fn exponential(&mut self) -> f64 {
        Exp1.sample(&mut self.rng)
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Run `trials` Monte Carlo trials split into fixed-size chunks, one child
/// stream per chunk. `run_chunk` receives the chunk's stream and its trial
/// count; partial results are merged with the commutative `merge`, so the
/// outcome is byte-identical for every `threads >= 1`.
pub(crate) fn run_chunked<T, Run, Merge>(
    trials: u64,
    seed: u64,
    threads: usize,
    run_chunk: Run,
    zero: impl Fn() -> T + Sync + Send,
    merge: Merge,
) -> T
where
    T: Send,
    Run: Fn(&mut RandomSource, u64) -> T + Sync + Send,
    Merge: Fn(T, T) -> T + Sync + Send,
{
    let n_chunks = trials.div_ceil(CHUNK_TRIALS);
    let parent = RandomSource::from_seed(seed);
    let exec = |c: u64| {
        let mut rng = parent.child(c);
        let len = CHUNK_TRIALS.min(trials - c * CHUNK_TRIALS);
        run_chunk(&mut rng, len)
    };
    if threads <= 1 {
        (0..n_chunks).map(exec).fold(zero(), &merge)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        pool.install(|| {
            (0..n_chunks)
                .into_par_iter()
                .map(exec)
                .reduce(&zero, &merge)
        })
    }
}

/// splitmix64 finalizer over the pair, so nearby (seed, index) pairs land on
/// unrelated ChaCha keys.
fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = RandomSource::from_seed(7);
        let mut b = RandomSource::from_seed(7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn children_are_independent_of_parent_consumption() {
        let mut parent = RandomSource::from_seed(42);
        let fresh_child: Vec<u64> = {
            let mut c = parent.child(3);
            (0..8).map(|_| c.next_u64()).collect()
        };
        for _ in 0..1000 {
            parent.next_u64();
        }
        let mut late = parent.child(3);
        let late_child: Vec<u64> = (0..8).map(|_| late.next_u64()).collect();
        assert_eq!(fresh_child, late_child);
    }

    #[test]
    fn distinct_children_differ() {
        let parent = RandomSource::from_seed(1);
        let mut c0 = parent.child(0);
        let mut c1 = parent.child(1);
        assert_ne!(c0.next_u64(), c1.next_u64());
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut r = RandomSource::from_seed(5);
        for _ in 0..1000 {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn exponential_positive() {
        let mut r = RandomSource::from_seed(5);
        for _ in 0..1000 {
            assert!(r.exponential() > 0.0);
        }
    }
}
