//! Fixtures shared by the benchmarks.

use qjets::ring::Ring;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `count` row-major `rows × cols` matrices with uniform entries.
pub fn random_matrices(ring: &Ring, rows: usize, cols: usize, count: usize, seed: u64) -> Vec<Vec<u32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = ring.size() as u32;
    (0..count).map(|_| (0..rows * cols).map(|_| rng.gen_range(0..size)).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_reproducible() {
        let ring = Ring::new(2, 3).unwrap();
        let a = random_matrices(&ring, 4, 8, 3, 1);
        assert_eq!(a, random_matrices(&ring, 4, 8, 3, 1));
        assert!(a.iter().flatten().all(|&x| x < 8));
    }
}
