//! Deterministic seed derivation.
//!
//! All stochastic components draw their seeds from one root seed through
//! [`derive_seed`], so any stage of a run can be reproduced in isolation.

/// Derive a child seed from a root seed and a component label.
///
/// FNV-1a over the label bytes, folded into the root. The same
/// (root, label) pair always yields the same child seed.
pub fn derive_seed(root: u64, label: &str) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = FNV_OFFSET ^ root;
    for byte in label.as_bytes() {
        h ^= u64::from(*byte);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}
