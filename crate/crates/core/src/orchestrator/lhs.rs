use rand::seq::SliceRandom;
use rand::Rng;

use crate::params::SearchBox;

/// `w` samples such that every dimension's `w` equal-width strata each hold
/// exactly one coordinate.
pub fn latin_hypercube<R: Rng + ?Sized>(w: usize, bounds: &SearchBox, rng: &mut R) -> Vec<Vec<f64>> {
    let n = bounds.dim();
    let mut samples = vec![vec![0.0; n]; w];
    let mut strata: Vec<usize> = (0..w).collect();
    for j in 0..n {
        strata.shuffle(rng);
        let (lo, width) = (bounds.lo(j), bounds.width(j));
        for (sample, &s) in samples.iter_mut().zip(&strata) {
            let u: f64 = rng.random();
            sample[j] = lo + width * (s as f64 + u) / w as f64;
        }
    }
    samples
}
