//! Trajectories of nonunitary qudit dynamics.
//!
//! Each model implements [`Dynamics`], which exposes the state and its exact
//! time derivative at any time. A [`Trajectory`] samples those on a uniform
//! [`TimeGrid`] together with the Schatten speed and the smallest eigenvalue.

mod bipartite;
mod kraus;
mod non_hermitian;

pub use bipartite::{
    bipartite_reduced, neel_mixed_state, xxz_hamiltonian, xxz_two_site_reduced_diagonal, BipartiteEvolution,
    BipartiteModel, NeelPattern, MAX_SITES,
};
pub use kraus::{
    ad_bloch_vector, ad_diagnostics, ad_kraus_speed, ad_lambda_min, amplitude_damping, kraus_completeness_defect,
    AdDiagnostic, AmplitudeDamping, KrausChannel, KrausEvolution,
};
pub use non_hermitian::{
    non_hermitian_evolution, pt_closed_form_propagator, NonHermitianEvolution, NonHermitianModel, PtRegime,
    MIN_NORMALIZATION,
};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{c64, trace_norm, CMat, DensityMatrix};

/// Upper limit on trajectory size.
pub const MAX_NODES: usize = 100_000;

/// A time-dependent state with an exact derivative.
pub trait Dynamics: Sync {
    fn dim(&self) -> usize;

    /// `ρ_t` together with `dρ_t/dt`.
    fn state_and_velocity(&self, t: f64) -> Result<(DensityMatrix, CMat)>;

    fn state(&self, t: f64) -> Result<DensityMatrix> {
        Ok(self.state_and_velocity(t)?.0)
    }
}

/// Uniform grid `t_k = k h`, `k = 0..=steps`, with an even number of steps
/// so that the half-resolution grid used for error estimates is well formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    step: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(duration: f64, steps: usize) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(Error::InvalidGrid(format!("duration {duration} must be positive")));
        }
        if steps < 2 || !steps.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "step count {steps} must be even and at least 2"
            )));
        }
        if steps + 1 > MAX_NODES {
            return Err(Error::InvalidGrid(format!(
                "{} nodes exceed the cap of {MAX_NODES}",
                steps + 1
            )));
        }
        Ok(Self {
            step: duration / steps as f64,
            steps,
        })
    }

    /// Smallest even step count whose spacing does not exceed `max_step`.
    pub fn with_max_step(duration: f64, max_step: f64) -> Result<Self> {
        if !(max_step > 0.0) {
            return Err(Error::InvalidGrid(format!("step {max_step} must be positive")));
        }
        let raw = (duration / max_step).ceil().max(2.0) as usize;
        Self::new(duration, raw + raw % 2)
    }

    /// A grid on `[0, max τ]` on which every requested `τ` is an even node.
    ///
    /// Returns `None` when the `τ` values do not share a common spacing.
    pub fn covering(taus: &[f64], max_step: f64) -> Option<(Self, Vec<usize>)> {
        let tau_max = taus.iter().copied().fold(f64::NAN, f64::max);
        if !(tau_max > 0.0) || taus.iter().any(|&t| !(t > 0.0)) {
            return None;
        }
        let mut sorted = taus.to_vec();
        sorted.sort_by(f64::total_cmp);
        let unit = sorted
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|d| *d > 1e-12 * tau_max)
            .fold(sorted[0], f64::min);
        let multiples: Vec<usize> = taus.iter().map(|t| (t / unit).round() as usize).collect();
        if taus
            .iter()
            .zip(&multiples)
            .any(|(t, &m)| (t - m as f64 * unit).abs() > 1e-9 * tau_max)
        {
            return None;
        }
        let per_unit = {
            let raw = (unit / max_step).ceil().max(1.0) as usize;
            raw + raw % 2
        };
        let max_multiple = *multiples.iter().max()?;
        let steps = max_multiple * per_unit;
        let grid = Self::new(tau_max, steps).ok()?;
        Some((grid, multiples.iter().map(|m| m * per_unit).collect()))
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn duration(&self) -> f64 {
        self.step * self.steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| k as f64 * self.step).collect()
    }

    /// Same span with half the spacing.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.duration(), self.steps * 2)
    }
}

/// Where a speed series came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Trace norm of the exact derivative.
    Analytic,
    /// Trace norm of a difference quotient of the sampled states.
    FiniteDifference,
    /// Twice the Kraus speed `Σ_ℓ ‖V_ℓ ρ₀ V̇_ℓ†‖₁`, an upper bound on the Schatten speed.
    KrausBound,
    /// A state-independent upper bound on the Schatten speed.
    ConstantBound,
}

/// Sampled states with their speeds and smallest eigenvalues.
#[derive(Debug, Clone)]
pub struct Trajectory {
    step: f64,
    states: Vec<DensityMatrix>,
    speeds: Vec<f64>,
    provenance: Provenance,
}

impl Trajectory {
    /// Samples `dynamics` on `grid` with analytic Schatten speeds.
    pub fn generate<D: Dynamics + ?Sized>(dynamics: &D, grid: &TimeGrid) -> Result<Self> {
        let samples: Vec<(DensityMatrix, f64)> = grid
            .times()
            .into_par_iter()
            .map(|t| {
                let (rho, v) = dynamics.state_and_velocity(t)?;
                Ok((rho, trace_norm(&v)?))
            })
            .collect::<Result<_>>()?;
        let (states, speeds) = samples.into_iter().unzip();
        Ok(Self {
            step: grid.step(),
            states,
            speeds,
            provenance: Provenance::Analytic,
        })
    }

    /// Builds a trajectory from sampled states, estimating speeds by finite differences.
    pub fn from_states(states: Vec<DensityMatrix>, step: f64) -> Result<Self> {
        let speeds = finite_difference_speed(&states, step)?;
        Ok(Self {
            step,
            states,
            speeds,
            provenance: Provenance::FiniteDifference,
        })
    }

    /// Assembles a trajectory from precomputed states and speeds.
    pub fn from_parts(states: Vec<DensityMatrix>, speeds: Vec<f64>, step: f64, provenance: Provenance) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidGrid(format!("step {step} must be positive")));
        }
        if speeds.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                found: speeds.len(),
            });
        }
        Ok(Self {
            step,
            states,
            speeds,
            provenance,
        })
    }

    /// Replaces the speed series, e.g. with an upper bound used by a specialised speed limit.
    pub fn with_speeds(mut self, speeds: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if speeds.len() != self.states.len() {
            return Err(Error::DimensionMismatch {
                expected: self.states.len(),
                found: speeds.len(),
            });
        }
        self.speeds = speeds;
        self.provenance = provenance;
        Ok(self)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.step * (self.states.len().saturating_sub(1)) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.step * k as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.states.len()).map(|k| self.time(k)).collect()
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn lambda_min(&self) -> Vec<f64> {
        self.states.iter().map(DensityMatrix::lambda_min).collect()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

/// Trace norms of `(ρ_{k+1} − ρ_{k−1}) / 2h`, with second-order one-sided
/// quotients at both ends.
pub fn finite_difference_speed(states: &[DensityMatrix], step: f64) -> Result<Vec<f64>> {
    let n = states.len();
    if n < 3 {
        return Err(Error::InvalidGrid(format!("need at least 3 states, got {n}")));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidGrid(format!("step {step} must be positive")));
    }
    let m = |k: usize| states[k].matrix();
    let (three, four) = (c64(3.0, 0.0), c64(4.0, 0.0));
    let inv = c64(1.0 / (2.0 * step), 0.0);
    (0..n)
        .map(|k| {
            let d = if k == 0 {
                m(1) * four - m(0) * three - m(2)
            } else if k == n - 1 {
                m(n - 3) - m(n - 2) * four + m(n - 1) * three
            } else {
                m(k + 1) - m(k - 1)
            };
            trace_norm(&(d * inv))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::BlochVector;

    #[test]
    fn grid_shapes() {
        let g = TimeGrid::new(2.0, 4).unwrap();
        assert_eq!(g.times(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(TimeGrid::new(2.0, 3).is_err());
        assert!(TimeGrid::new(-1.0, 4).is_err());
        assert!(TimeGrid::new(1.0, MAX_NODES + 10).is_err());
        let g = TimeGrid::with_max_step(1.0, 0.3).unwrap();
        assert_eq!(g.steps(), 4);
        assert_eq!(g.refined().unwrap().steps(), 8);
    }

    #[test]
    fn covering_grid_hits_every_tau() {
        let taus: Vec<f64> = (1..=100).map(|k| 0.1 * k as f64).collect();
        let (grid, idx) = TimeGrid::covering(&taus, 0.01).unwrap();
        for (t, k) in taus.iter().zip(&idx) {
            assert_eq!(k % 2, 0);
            assert!((grid.step() * *k as f64 - t).abs() < 1e-12);
        }
        assert!(TimeGrid::covering(&[1.0, 2f64.sqrt()], 0.01).is_none());
    }

    #[test]
    fn finite_differences_of_constant_and_linear_paths() {
        let rho = BlochVector::new(0.4, 1.0, 0.3).unwrap().density_matrix();
        let speeds = finite_difference_speed(&vec![rho.clone(); 5], 0.1).unwrap();
        assert!(speeds.iter().all(|&s| s < 1e-14));

        let a = BlochVector::new(0.9, 0.2, 0.0).unwrap().density_matrix();
        let b = BlochVector::new(0.5, 2.0, 1.0).unwrap().density_matrix();
        let h = 0.1;
        let states: Vec<_> = (0..=10)
            .map(|k| {
                let s = k as f64 * h;
                DensityMatrix::new(a.matrix() * c64(1.0 - s, 0.0) + b.matrix() * c64(s, 0.0)).unwrap()
            })
            .collect();
        let expected = trace_norm(&(b.matrix() - a.matrix())).unwrap();
        for s in finite_difference_speed(&states, h).unwrap() {
            assert!((s - expected).abs() < 1e-12);
        }
        assert!(finite_difference_speed(&states[..2], h).is_err());
    }
}
