#![allow(dead_code)]

use ordunc_core::{EnsemblePrediction, ProbabilityVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

/// Flat Dirichlet draw, with occasional exact zeros to exercise `0·log 0`.
pub fn random_probs<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..k)
        .map(|_| {
            let x: f64 = Exp1.sample(rng);
            if rng.random_bool(0.1) {
                0.0
            } else {
                x
            }
        })
        .collect();
    if v.iter().all(|&x| x == 0.0) {
        v[rng.random_range(0..k)] = 1.0;
    }
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

pub fn random_vector<R: Rng>(rng: &mut R, k: usize) -> ProbabilityVector {
    ProbabilityVector::new(random_probs(rng, k)).unwrap()
}

pub fn random_ensemble<R: Rng>(rng: &mut R, k: usize, m: usize) -> EnsemblePrediction {
    EnsemblePrediction::new((0..m).map(|_| random_vector(rng, k)).collect()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}
