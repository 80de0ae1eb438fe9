//! Order-independent seed derivation for experiment cells.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Seed of one repetition of one cell; depends only on its arguments, so
/// any execution order gives the same streams.
pub fn derive_seed(master_seed: u64, cell_id: &str, repetition: usize) -> u64 {
    let mut h = mix(master_seed.wrapping_add(GOLDEN));
    h = mix(h ^ fnv1a(cell_id.as_bytes()));
    mix(h ^ (repetition as u64).wrapping_mul(GOLDEN))
}
