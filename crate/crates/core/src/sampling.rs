//! Seeded random states and observables for property checks.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::{c64, CMat, DensityMatrix, Observable};

fn ginibre<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    CMat::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c64(re, im)
    })
}

/// Hilbert–Schmidt random mixed state `G G† / tr(G G†)`.
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix {
    let g = ginibre(rng, d);
    DensityMatrix::from_unnormalized(&g * g.adjoint()).expect("Wishart matrices are positive")
}

/// Haar-like random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix {
    let g = ginibre(rng, d);
    DensityMatrix::pure(&g.column(0).into_owned()).expect("nonzero vector")
}

/// GUE-like Hermitian matrix `(G + G†) / 2`.
pub fn random_observable<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Observable {
    let g = ginibre(rng, d);
    Observable::new((&g + g.adjoint()) * c64(0.5, 0.0)).expect("Hermitian by construction")
}

/// Random probability vector with occasional exact zeros.
pub fn random_spectrum<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d)
        .map(|_| {
            if rng.random_bool(0.1) {
                0.0
            } else {
                rng.random::<f64>() + 1e-3
            }
        })
        .collect();
    if v.iter().all(|&x| x == 0.0) {
        v[0] = 1.0;
    }
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}
