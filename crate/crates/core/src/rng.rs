//! Deterministic seed derivation and small samplers shared by the
//! simulation modules.
//!
//! Every stochastic component derives an independent ChaCha stream from a
//! master seed plus a role/index, so runs are bit-identical for a given
//! configuration regardless of chunking or thread count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; used only to derive seeds and cheap per-index
/// uniforms, never as a general-purpose stream.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A uniform in `[0, 1)` derived from a single hash of (seed, index).
#[inline]
pub fn hash_uniform(seed: u64, index: u64) -> f64 {
    let bits = mix64(seed ^ mix64(index.wrapping_add(0xa076_1d64_78bd_642f)));
    // 53 high bits -> [0, 1).
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Deterministic 256-bit seed for a (master seed, domain, index) triple.
pub fn derive_seed(master: u64, domain: u64, index: u64) -> [u8; 32] {
    let mut out = [0u8; 32];
    let base = mix64(master) ^ mix64(domain.wrapping_mul(0x9e37_79b9_7f4a_7c15)) ^ index;
    for (i, chunk) in out.chunks_exact_mut(8).enumerate() {
        chunk.copy_from_slice(&mix64(base.wrapping_add(i as u64 + 1)).to_le_bytes());
    }
    out
}

/// ChaCha stream for a (master seed, domain, index) triple.
pub fn stream(master: u64, domain: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive_seed(master, domain, index))
}

/// Poisson sample by inversion; intended for small means (the pair-number
/// distribution has mean `2λ <= 0.2`).
pub fn poisson_small(rng: &mut impl Rng, mean: f64) -> u32 {
    debug_assert!((0.0..=20.0).contains(&mean));
    if mean == 0.0 {
        return 0;
    }
    let mut u: f64 = rng.random();
    let mut p = (-mean).exp();
    let mut n = 0u32;
    while u >= p && n < 200 {
        u -= p;
        n += 1;
        p *= mean / n as f64;
    }
    n
}

/// Poisson sample by inversion conditioned on at least one event.
pub fn poisson_small_nonzero(rng: &mut impl Rng, mean: f64) -> u32 {
    debug_assert!(mean > 0.0);
    let p0 = (-mean).exp();
    let mut u: f64 = rng.random::<f64>() * (1.0 - p0);
    let mut p = p0 * mean; // P(1)
    let mut n = 1u32;
    while u >= p && n < 200 {
        u -= p;
        n += 1;
        p *= mean / n as f64;
    }
    n
}

/// Gaussian sample truncated at ±`clip` standard deviations (by rejection).
pub fn truncated_normal(rng: &mut impl Rng, sigma: f64, clip: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    loop {
        let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
        let u2: f64 = rng.random();
        let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        if z.abs() <= clip {
            return z * sigma;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_uniform_in_range_and_deterministic() {
        for i in 0..1000 {
            let u = hash_uniform(42, i);
            assert!((0.0..1.0).contains(&u));
            assert_eq!(u, hash_uniform(42, i));
        }
        assert_ne!(hash_uniform(42, 1), hash_uniform(43, 1));
    }

    #[test]
    fn poisson_matches_mean_and_conditioning() {
        let mut rng = stream(7, 0, 0);
        let mean = 0.08;
        let n = 200_000;
        let mut total = 0u64;
        let mut zeros = 0u64;
        for _ in 0..n {
            let k = poisson_small(&mut rng, mean);
            total += k as u64;
            if k == 0 {
                zeros += 1;
            }
        }
        let empirical = total as f64 / n as f64;
        assert!((empirical - mean).abs() < 3.0 * (mean / n as f64).sqrt());
        let p0 = (-mean_f64(mean)).exp();
        let emp0 = zeros as f64 / n as f64;
        assert!((emp0 - p0).abs() < 3.0 * (p0 * (1.0 - p0) / n as f64).sqrt());
        for _ in 0..10_000 {
            assert!(poisson_small_nonzero(&mut rng, mean) >= 1);
        }
    }

    fn mean_f64(m: f64) -> f64 {
        m
    }

    #[test]
    fn truncated_normal_respects_clip() {
        let mut rng = stream(9, 1, 0);
        for _ in 0..100_000 {
            assert!(truncated_normal(&mut rng, 100.0, 3.0).abs() <= 300.0);
        }
    }

    #[test]
    fn streams_reproducible() {
        let mut a = stream(123, 4, 5);
        let mut b = stream(123, 4, 5);
        for _ in 0..16 {
            assert_eq!(a.random::<u64>(), b.random::<u64>());
        }
    }
}
