//! Deterministic seed derivation.
//!
//! Experiments fan a single master seed out to many independent consumers
//! (chains, ensemble members, grid points, per-point attack noise). Seeds are
//! derived by hashing the master seed together with a list of role strings,
//! so adding a grid point or reordering work never perturbs the seeds handed
//! to unrelated consumers.

/// Derive a child seed from `master` and a sequence of role labels.
///
/// Uses FNV-1a over the little-endian master bytes and the labels, with a
/// zero byte terminating each label. Stable across platforms and releases.
pub fn derive_seed(master: u64, parts: &[&str]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for b in master.to_le_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    for part in parts {
        for b in part.as_bytes() {
            h ^= u64::from(*b);
            h = h.wrapping_mul(PRIME);
        }
        h ^= 0;
        h = h.wrapping_mul(PRIME);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_roles_distinct_seeds() {
        let a = derive_seed(42, &["hmc", "chain-0"]);
        let b = derive_seed(42, &["hmc", "chain-1"]);
        let c = derive_seed(43, &["hmc", "chain-0"]);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn concatenation_is_not_ambiguous() {
        // ["ab", "c"] and ["a", "bc"] must differ thanks to the terminator.
        let a = derive_seed(0, &["ab", "c"]);
        let b = derive_seed(0, &["a", "bc"]);
        assert_ne!(a, b);
    }

    #[test]
    fn frozen_values() {
        // Pinned so that persisted artifacts stay reproducible across releases.
        assert_eq!(derive_seed(0, &[]), 0xa8c7_f832_281a_39c5);
        assert_eq!(
            derive_seed(42, &["experiment", "grid-0", "train"]),
            0xc0bc_4869_f3da_00d9
        );
    }
}
