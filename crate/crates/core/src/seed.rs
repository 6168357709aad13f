//! Stable seed derivation.
//!
//! Every random stream in the toolkit is seeded from a top-level seed plus
//! a handful of context labels (station, grid entry, fold, epoch). The hash
//! must be stable across platforms and releases, so we use FNV-1a rather
//! than `std::hash`, whose output is explicitly unspecified.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over a byte slice.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Derives a child seed from a base seed and a list of context labels.
///
/// The labels are hashed with their lengths so that `["ab", "c"]` and
/// `["a", "bc"]` produce different seeds.
pub fn derive(base: u64, labels: &[&str]) -> u64 {
    let mut h = FNV_OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
    };
    eat(&base.to_le_bytes());
    for label in labels {
        eat(&(label.len() as u64).to_le_bytes());
        eat(label.as_bytes());
    }
    h
}

/// Derives a child seed from a base seed and an integer index.
pub fn derive_indexed(base: u64, label: &str, index: u64) -> u64 {
    let mut h = derive(base, &[label]);
    for &b in &index.to_le_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}
