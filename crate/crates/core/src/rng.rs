//! Seeded random streams. Every consumer derives its generator from
//! `(run seed, stream tag, index)`, so draws never depend on the order in
//! which nodes happen to be processed.

use rand_pcg::Pcg64Mcg;

pub type NodeRng = Pcg64Mcg;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn mix(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index)
}

pub fn stream_rng(seed: u64, stream: u64, index: u64) -> NodeRng {
    let hi = mix(seed, stream, index);
    let lo = splitmix64(hi ^ 0x5851_f42d_4c95_7f2d);
    Pcg64Mcg::new(((hi as u128) << 64) | lo as u128 | 1)
}

/// Independent stream for node `v` under tag `stream`.
pub fn node_rng(seed: u64, stream: u64, v: u32) -> NodeRng {
    stream_rng(seed, stream, v as u64)
}

/// One Bernoulli draw, reproducible from its coordinates alone.
#[inline]
pub fn coin(seed: u64, stream: u64, index: u64, p: f64) -> bool {
    let u = (mix(seed, stream, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    u < p
}
