//! Deterministic seed derivation.
//!
//! Every randomized component derives its RNG stream from a master seed and
//! a structured key. The hash below is a fixed FNV-1a so derived seeds are
//! stable across platforms and releases; `std::hash` offers no such
//! guarantee, which would break the byte-identical reproducibility contract.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Stable 64-bit FNV-1a over raw bytes.
pub fn stable_hash(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Builder for seeds derived from a master seed plus structured context.
#[derive(Debug, Clone)]
pub struct SeedKey {
    hash: u64,
}

impl SeedKey {
    pub fn new(master_seed: u64) -> Self {
        let mut key = SeedKey { hash: FNV_OFFSET };
        key.mix_bytes(&master_seed.to_le_bytes());
        key
    }

    pub fn with_str(mut self, s: &str) -> Self {
        self.mix_bytes(s.as_bytes());
        self.mix_bytes(&[0xff]); // field separator
        self
    }

    pub fn with_u64(mut self, v: u64) -> Self {
        self.mix_bytes(&v.to_le_bytes());
        self
    }

    fn mix_bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.hash ^= u64::from(b);
            self.hash = self.hash.wrapping_mul(FNV_PRIME);
        }
    }

    pub fn seed(&self) -> u64 {
        // splitmix-style finalizer to spread low-entropy keys
        let mut z = self.hash.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed())
    }
}

/// Convenience: an RNG for (master_seed, label, index) keys, the common case
/// for per-member and per-repetition streams.
pub fn derived_rng(master_seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    SeedKey::new(master_seed).with_str(label).with_u64(index).rng()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_stable() {
        // Frozen values guard against accidental changes to the derivation
        // scheme; any change here silently breaks reproducibility of runs.
        assert_eq!(stable_hash(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(stable_hash(b"a"), 0xaf63_dc4c_8601_ec8c);
        let a = SeedKey::new(42).with_str("split").with_u64(3).seed();
        let b = SeedKey::new(42).with_str("split").with_u64(3).seed();
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_keys_give_distinct_seeds() {
        let base = SeedKey::new(7);
        let s1 = base.clone().with_str("fit").with_u64(0).seed();
        let s2 = base.clone().with_str("fit").with_u64(1).seed();
        let s3 = base.clone().with_str("split").with_u64(0).seed();
        assert_ne!(s1, s2);
        assert_ne!(s1, s3);
        assert_ne!(s2, s3);
    }

    #[test]
    fn field_separator_prevents_concatenation_collisions() {
        let a = SeedKey::new(1).with_str("ab").with_str("c").seed();
        let b = SeedKey::new(1).with_str("a").with_str("bc").seed();
        assert_ne!(a, b);
    }
}
