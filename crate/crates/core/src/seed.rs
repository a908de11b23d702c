//! Named sub-stream derivation. All randomness in the crate flows from a
//! master seed through [`derive_seed`]; there is no global RNG.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags. Distinct tags give statistically independent streams for the
/// same master seed and index.
pub mod stream {
    pub const SBM_EDGES: u64 = 0x01;
    pub const SBM_FEATURES: u64 = 0x02;
    pub const SAMPLE_SLOT: u64 = 0x10;
    pub const PILOT: u64 = 0x11;
    pub const VERTEX: u64 = 0x12;
    pub const SPLIT: u64 = 0x20;
    pub const SUBDIVIDE: u64 = 0x21;
    pub const GRID: u64 = 0x22;
    pub const REFIT: u64 = 0x23;
    pub const GRAPH: u64 = 0x24;
    pub const VALIDUTIL: u64 = 0x30;
    pub const SWEEP: u64 = 0x31;
    pub const STABILITY: u64 = 0x40;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `master`, a stream tag and an index into a child seed.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index)
}

pub fn rng_from(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_rng(master: u64, stream: u64, index: u64) -> Rng {
    rng_from(derive_seed(master, stream, index))
}

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool
/// when `workers` is 0. Results never depend on the worker count.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
