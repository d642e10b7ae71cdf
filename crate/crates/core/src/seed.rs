//! Seed derivation for reproducible, independent random streams.
//!
//! Every random stream in the crate is derived from a master seed and a
//! textual label (plus an optional index) through [`derive_seed`]. The
//! mixing is part of the file-format contract and is fixed bit-for-bit:
//!
//! ```text
//! fnv1a64(label)       = FNV-1a over the UTF-8 bytes, offset 0xcbf29ce484222325,
//!                        prime 0x100000001b3
//! splitmix64(z)        = z += 0x9e3779b97f4a7c15;
//!                        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9;
//!                        z = (z ^ (z >> 27)) * 0x94d049bb133111eb;
//!                        z ^ (z >> 31)                 (all wrapping u64)
//! derive_seed(m, l, i) = splitmix64(splitmix64(m ^ fnv1a64(l)) ^ i)
//! ```
//!
//! The derived `u64` seeds a `ChaCha8Rng` through `SeedableRng::seed_from_u64`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for stream `(label, index)` under `master`.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ fnv1a64(label.as_bytes())) ^ index)
}

pub fn stream(master: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, label, index))
}

/// Maps a 64-bit hash to a uniform in `[0, 1)` using the top 53 bits.
#[inline]
pub fn unit_from_bits(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference SplitMix64 generator seeded with 0.
        assert_eq!(splitmix64(0), 0xe220_a839_7b1d_cdaf);
        assert_eq!(
            splitmix64(0x9e37_79b9_7f4a_7c15),
            0x6e78_9e6a_a1b9_65f4
        );
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), FNV_OFFSET);
        assert_eq!(fnv1a64(b"a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn labels_and_indices_separate_streams() {
        let a = derive_seed(7, "sample", 0);
        assert_ne!(a, derive_seed(7, "sample", 1));
        assert_ne!(a, derive_seed(7, "marks", 0));
        assert_ne!(a, derive_seed(8, "sample", 0));
        assert_eq!(a, derive_seed(7, "sample", 0));
    }

    #[test]
    fn unit_range() {
        assert_eq!(unit_from_bits(0), 0.0);
        assert!(unit_from_bits(u64::MAX) < 1.0);
    }
}
