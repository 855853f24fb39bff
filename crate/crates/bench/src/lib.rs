//! Seeded fixtures shared by the benches.

use hvtm::rng::derive_stream;
use hvtm::tm::Sample;
use hvtm::{GrayImage, Hypervector};
use rand::Rng;

/// Vector of width `d` with each bit set with probability `density`.
pub fn random_hv(d: usize, density: f64, seed: u64) -> Hypervector {
    let mut rng = derive_stream(seed, &[b"bench-hv"]);
    let bits: Vec<bool> = (0..d).map(|_| rng.random_bool(density)).collect();
    Hypervector::from_bools(&bits)
}

/// 28x28 image with a filled rectangle whose placement depends on `seed`.
pub fn blob_image(seed: u64) -> GrayImage {
    let mut rng = derive_stream(seed, &[b"bench-img"]);
    let (r0, c0) = (rng.random_range(2..12), rng.random_range(2..12));
    let mut px = vec![0u8; 784];
    for r in r0..r0 + 14 {
        for c in c0..c0 + 10 {
            px[r * 28 + c] = 200;
        }
    }
    GrayImage::new(28, 28, px).expect("28x28")
}

/// `n` labelled random inputs over `classes` classes.
pub fn random_samples(n: usize, d: usize, classes: usize, seed: u64) -> Vec<Sample> {
    (0..n)
        .map(|i| (random_hv(d, 0.1, seed ^ i as u64), i % classes))
        .collect()
}
