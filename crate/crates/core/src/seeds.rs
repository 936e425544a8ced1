//! Keyed derivation of independent random streams.
//!
//! Every source of randomness in a run is a ChaCha12 stream whose 256-bit
//! seed is the little-endian word tuple `(master_seed, domain, k1, k2)`.
//! Distinct tuples give distinct seeds by construction, so streams never
//! collide and results are independent of evaluation order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Per-proposer simulation streams (`k1` = proposer id).
pub const DOMAIN_PROPOSER: u64 = 1;
/// Oracle acceptance-probability streams (`k1` = context, `k2` = arm).
pub const DOMAIN_ORACLE: u64 = 2;
/// Benchmark / test streams.
pub const DOMAIN_TEST: u64 = 3;

/// Derive the stream keyed by `(master_seed, domain, k1, k2)`.
pub fn stream(master_seed: u64, domain: u64, k1: u64, k2: u64) -> ChaCha12Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&domain.to_le_bytes());
    seed[16..24].copy_from_slice(&k1.to_le_bytes());
    seed[24..32].copy_from_slice(&k2.to_le_bytes());
    ChaCha12Rng::from_seed(seed)
}
