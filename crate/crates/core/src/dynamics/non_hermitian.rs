use num_complex::Complex64;

use crate::dynamics::{Dynamics, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::matrix::{
    anticommutator, c64, commutator, identity, mat_exp, max_asymmetry, sigma_x, sigma_z, trace, CMat, DensityMatrix,
    Observable, HERMITIAN_TOL,
};

/// Smallest admissible `tr[K_t ρ₀ K_t†]` before normalization.
pub const MIN_NORMALIZATION: f64 = 1e-14;

/// Phase of the PT-symmetric qubit `H = ωσx + iησz`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtRegime {
    Unbroken,
    Exceptional,
    Broken,
}

/// A non-Hermitian generator split as `H_sys = H_Re + iΥ_Im`.
#[derive(Debug, Clone)]
pub struct NonHermitianModel {
    h_sys: CMat,
    h_re: Observable,
    upsilon: Observable,
    pt: Option<(f64, f64)>,
}

impl NonHermitianModel {
    pub fn new(h_sys: CMat) -> Result<Self> {
        if !h_sys.is_square() {
            return Err(Error::NotSquare {
                rows: h_sys.nrows(),
                cols: h_sys.ncols(),
            });
        }
        if h_sys.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite);
        }
        let adj = h_sys.adjoint();
        let h_re = (&h_sys + &adj) * c64(0.5, 0.0);
        let upsilon = (&h_sys - &adj) * c64(0.0, -0.5);
        debug_assert!(max_asymmetry(&h_re) <= HERMITIAN_TOL * (1.0 + h_sys.norm()));
        Ok(Self {
            h_re: Observable::new(h_re)?,
            upsilon: Observable::new(upsilon)?,
            h_sys,
            pt: None,
        })
    }

    /// `H = ωσx + iησz`.
    pub fn pt_symmetric(omega: f64, eta: f64) -> Result<Self> {
        if !(omega > 0.0) || !(eta >= 0.0) || !omega.is_finite() || !eta.is_finite() {
            return Err(Error::InvalidModel(format!(
                "PT parameters ω={omega}, η={eta} must be ω > 0, η ≥ 0"
            )));
        }
        let h = sigma_x() * c64(omega, 0.0) + sigma_z() * c64(0.0, eta);
        let mut model = Self::new(h)?;
        model.pt = Some((omega, eta));
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        self.h_sys.nrows()
    }

    pub fn h_sys(&self) -> &CMat {
        &self.h_sys
    }

    pub fn h_re(&self) -> &Observable {
        &self.h_re
    }

    pub fn upsilon(&self) -> &Observable {
        &self.upsilon
    }

    /// `(ω, η)` for models built by [`NonHermitianModel::pt_symmetric`].
    pub fn pt_parameters(&self) -> Option<(f64, f64)> {
        self.pt
    }

    pub fn regime(&self) -> Option<PtRegime> {
        let (omega, eta) = self.pt?;
        Some(if (eta - omega).abs() <= 1e-12 * omega {
            PtRegime::Exceptional
        } else if eta < omega {
            PtRegime::Unbroken
        } else {
            PtRegime::Broken
        })
    }

    /// `K_t = e^{−itH_sys}`.
    pub fn propagator(&self, t: f64) -> Result<CMat> {
        mat_exp(&self.h_sys, t)
    }
}

/// Trace-normalized evolution `ρ_t = K_t ρ₀ K_t† / tr[K_t ρ₀ K_t†]`.
#[derive(Debug, Clone)]
pub struct NonHermitianEvolution<'a> {
    model: &'a NonHermitianModel,
    rho0: DensityMatrix,
}

impl<'a> NonHermitianEvolution<'a> {
    pub fn new(model: &'a NonHermitianModel, rho0: DensityMatrix) -> Result<Self> {
        if rho0.dim() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                found: rho0.dim(),
            });
        }
        Ok(Self { model, rho0 })
    }

    /// Right-hand side of the nonlinear master equation at state `rho`:
    /// `−i[H_Re, ρ] + {Υ, ρ} − 2⟨Υ⟩ρ`.
    pub fn generator(&self, rho: &DensityMatrix) -> CMat {
        let h = self.model.h_re.matrix();
        let u = self.model.upsilon.matrix();
        let r = rho.matrix();
        let mean = rho.expectation(u).re;
        commutator(h, r) * c64(0.0, -1.0) + anticommutator(u, r) - r * c64(2.0 * mean, 0.0)
    }
}

impl Dynamics for NonHermitianEvolution<'_> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn state_and_velocity(&self, t: f64) -> Result<(DensityMatrix, CMat)> {
        let k = self.model.propagator(t)?;
        let raw = &k * self.rho0.matrix() * k.adjoint();
        let norm = trace(&raw).re;
        if !(norm > MIN_NORMALIZATION) || !norm.is_finite() {
            return Err(Error::VanishingNorm { t, trace: norm });
        }
        let rho = DensityMatrix::from_unnormalized(raw)?;
        let vel = self.generator(&rho);
        Ok((rho, vel))
    }
}

/// Normalized non-Hermitian trajectory with speeds from the master equation.
pub fn non_hermitian_evolution(model: &NonHermitianModel, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<Trajectory> {
    Trajectory::generate(&NonHermitianEvolution::new(model, rho0.clone())?, grid)
}

/// Closed-form `e^{−itH}` for `H = ωσx + iησz = u·σ`, `u = (ω, 0, iη)`.
///
/// With `κ² = |ω² − η²|`:
/// unbroken `K_t = cos(κt) I − i sin(κt) (u/κ)·σ`,
/// broken `K_t = cosh(κt) I + sinh(κt) (−iu/κ)·σ`,
/// exceptional `K_t = I − it u·σ` since `(u·σ)² = 0`.
pub fn pt_closed_form_propagator(omega: f64, eta: f64, t: f64) -> Result<CMat> {
    let model = NonHermitianModel::pt_symmetric(omega, eta)?;
    let u_sigma = model.h_sys();
    let id = identity(2);
    Ok(match model.regime().expect("PT model") {
        PtRegime::Unbroken => {
            let kappa = (omega * omega - eta * eta).sqrt();
            let (s, c) = (kappa * t).sin_cos();
            &id * c64(c, 0.0) + u_sigma * Complex64::new(0.0, -s / kappa)
        }
        PtRegime::Broken => {
            let kappa = (eta * eta - omega * omega).sqrt();
            let (s, c) = ((kappa * t).sinh(), (kappa * t).cosh());
            &id * c64(c, 0.0) + u_sigma * Complex64::new(0.0, -s / kappa)
        }
        PtRegime::Exceptional => &id + u_sigma * c64(0.0, -t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{fidelity, mat_exp_general, trace_norm, BlochVector};

    #[test]
    fn decomposition_reconstructs_generator() {
        let h = CMat::from_row_slice(2, 2, &[c64(1.0, 0.5), c64(0.3, -0.2), c64(-0.7, 0.1), c64(0.0, -1.0)]);
        let m = NonHermitianModel::new(h.clone()).unwrap();
        let back = m.h_re().matrix() + m.upsilon().matrix() * c64(0.0, 1.0);
        assert!((back - h).norm() < 1e-15);
        assert!(max_asymmetry(m.upsilon().matrix()) < 1e-15);
    }

    #[test]
    fn regimes() {
        let tag = |eta| NonHermitianModel::pt_symmetric(1.0, eta).unwrap().regime().unwrap();
        assert_eq!(tag(0.5), PtRegime::Unbroken);
        assert_eq!(tag(1.0), PtRegime::Exceptional);
        assert_eq!(tag(2.0), PtRegime::Broken);
        assert!(NonHermitianModel::pt_symmetric(0.0, 1.0).is_err());
        assert!(NonHermitianModel::new(CMat::zeros(2, 3)).is_err());
    }

    #[test]
    fn closed_form_propagators_match_general_exponential() {
        for (omega, eta) in [(1.0, 2.0), (1.0, 0.5), (1.0, 1.0), (0.7, 0.2)] {
            let h = NonHermitianModel::pt_symmetric(omega, eta).unwrap();
            for t in [0.0, 0.3, 1.7, 4.0] {
                let closed = pt_closed_form_propagator(omega, eta, t).unwrap();
                let general = mat_exp_general(h.h_sys(), t).unwrap();
                let scale = 1.0 + general.norm();
                assert!((closed - general).norm() / scale < 1e-10, "ω={omega} η={eta} t={t}");
            }
        }
    }

    #[test]
    fn hermitian_limit_keeps_spectrum() {
        let h = sigma_x() * c64(0.8, 0.0) + sigma_z() * c64(0.3, 0.0);
        let model = NonHermitianModel::new(h).unwrap();
        let rho0 = BlochVector::new(0.6, 0.4, 1.2).unwrap().density_matrix();
        let traj = non_hermitian_evolution(&model, &rho0, &TimeGrid::new(5.0, 50).unwrap()).unwrap();
        for rho in traj.states() {
            assert!((rho.spectrum()[0] - rho0.spectrum()[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn master_equation_is_trace_free_and_matches_differences() {
        let model = NonHermitianModel::pt_symmetric(1.0, 0.5).unwrap();
        let rho0 = BlochVector::new(0.5, 1.0, 0.3).unwrap().density_matrix();
        let evo = NonHermitianEvolution::new(&model, rho0.clone()).unwrap();
        let h = 1e-3 / 1.5;
        let grid = TimeGrid::new(2000.0 * h, 2000).unwrap();
        let traj = Trajectory::generate(&evo, &grid).unwrap();
        let fd = Trajectory::from_states(traj.states().to_vec(), h).unwrap();
        for k in 0..traj.len() {
            let (rho, vel) = evo.state_and_velocity(traj.time(k)).unwrap();
            assert!(trace(&vel).norm() < 1e-12);
            assert!(fidelity(&rho0, &rho).unwrap() > 0.0);
            if k > 0 && k + 1 < traj.len() {
                assert!((traj.speeds()[k] - fd.speeds()[k]).abs() < 1e-6);
            }
            assert!((trace_norm(&vel).unwrap() - traj.speeds()[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn vanishing_normalization_is_reported() {
        // K_t = diag(e^{−50t}, 1) sends |0⟩⟨0| to a trace of e^{−100t}
        let h = CMat::from_row_slice(2, 2, &[c64(0.0, -50.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        let model = NonHermitianModel::new(h).unwrap();
        let rho0 = DensityMatrix::new(crate::matrix::ket_bra(2, 0, 0)).unwrap();
        let evo = NonHermitianEvolution::new(&model, rho0).unwrap();
        assert!(matches!(evo.state_and_velocity(1.0), Err(Error::VanishingNorm { .. })));
    }
}
