use crate::dynamics::{Dynamics, Provenance, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::matrix::{c64, fidelity, identity, trace_norm, BlochVector, CMat, DensityMatrix};

/// A time-dependent family of Kraus operators with analytic derivatives.
pub trait KrausChannel: Sync {
    fn dim(&self) -> usize;

    fn operators(&self, t: f64) -> Vec<CMat>;

    /// `dV_ℓ/dt`, in the same order as [`KrausChannel::operators`].
    fn derivatives(&self, t: f64) -> Vec<CMat>;

    /// The products `V_ℓ ρ₀ V̇_ℓ†`.
    ///
    /// Channels whose derivatives are singular at isolated times override this
    /// with the finite limit of the product.
    fn velocity_terms(&self, rho0: &CMat, t: f64) -> Vec<CMat> {
        self.operators(t)
            .iter()
            .zip(self.derivatives(t))
            .map(|(v, dv)| v * rho0 * dv.adjoint())
            .collect()
    }
}

/// Largest entry of `|Σ V†V − I|`.
pub fn kraus_completeness_defect<C: KrausChannel + ?Sized>(channel: &C, t: f64) -> f64 {
    let sum = channel
        .operators(t)
        .iter()
        .fold(CMat::zeros(channel.dim(), channel.dim()), |acc, v| {
            acc + v.adjoint() * v
        });
    (sum - identity(channel.dim()))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Qubit amplitude damping towards `|0⟩` at rate `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeDamping {
    gamma: f64,
}

impl AmplitudeDamping {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidModel(format!("decay rate {gamma} must be positive")));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl KrausChannel for AmplitudeDamping {
    fn dim(&self) -> usize {
        2
    }

    fn operators(&self, t: f64) -> Vec<CMat> {
        let decay = (-self.gamma * t).exp();
        let v0 = CMat::from_row_slice(
            2,
            2,
            &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(decay.sqrt(), 0.0)],
        );
        let jump = (-(-self.gamma * t).exp_m1()).sqrt();
        let v1 = CMat::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(jump, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        vec![v0, v1]
    }

    fn derivatives(&self, t: f64) -> Vec<CMat> {
        let g = self.gamma;
        let decay = (-g * t).exp();
        let d0 = CMat::from_row_slice(
            2,
            2,
            &[
                c64(0.0, 0.0),
                c64(0.0, 0.0),
                c64(0.0, 0.0),
                c64(-0.5 * g * decay.sqrt(), 0.0),
            ],
        );
        // d/dt √(1 − e^{−γt}) diverges at t = 0
        let jump = (-(-g * t).exp_m1()).sqrt();
        let rate = if jump > 0.0 {
            0.5 * g * decay / jump
        } else {
            f64::INFINITY
        };
        let d1 = CMat::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(rate, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        vec![d0, d1]
    }

    fn velocity_terms(&self, rho0: &CMat, t: f64) -> Vec<CMat> {
        let g = self.gamma;
        let decay = (-g * t).exp();
        let v0 = &self.operators(t)[0];
        let d0 = &self.derivatives(t)[0];
        // V₁ρ₀V̇₁† = (γ/2) e^{−γt} ⟨1|ρ₀|1⟩ |0⟩⟨0|, finite for all t ≥ 0
        let mut jump = CMat::zeros(2, 2);
        jump[(0, 0)] = rho0[(1, 1)] * (0.5 * g * decay);
        vec![v0 * rho0 * d0.adjoint(), jump]
    }
}

/// `ρ_t = Σ_ℓ V_ℓ(t) ρ₀ V_ℓ(t)†`.
#[derive(Debug, Clone)]
pub struct KrausEvolution<'a, C> {
    channel: &'a C,
    rho0: DensityMatrix,
}

impl<'a, C: KrausChannel> KrausEvolution<'a, C> {
    pub fn new(channel: &'a C, rho0: DensityMatrix) -> Result<Self> {
        if rho0.dim() != channel.dim() {
            return Err(Error::DimensionMismatch {
                expected: channel.dim(),
                found: rho0.dim(),
            });
        }
        Ok(Self { channel, rho0 })
    }

    /// `Σ_ℓ ‖V_ℓ ρ₀ V̇_ℓ†‖₁`, evaluated numerically.
    pub fn kraus_speed(&self, t: f64) -> Result<f64> {
        self.channel
            .velocity_terms(self.rho0.matrix(), t)
            .iter()
            .map(trace_norm)
            .sum()
    }
}

impl<C: KrausChannel> Dynamics for KrausEvolution<'_, C> {
    fn dim(&self) -> usize {
        self.channel.dim()
    }

    fn state_and_velocity(&self, t: f64) -> Result<(DensityMatrix, CMat)> {
        let rho0 = self.rho0.matrix();
        let d = self.dim();
        let rho = self
            .channel
            .operators(t)
            .iter()
            .fold(CMat::zeros(d, d), |acc, v| acc + v * rho0 * v.adjoint());
        let vel = self
            .channel
            .velocity_terms(rho0, t)
            .iter()
            .fold(CMat::zeros(d, d), |acc, term| acc + term + term.adjoint());
        if vel.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok((DensityMatrix::from_unnormalized(rho)?, vel))
    }
}

/// Amplitude-damping trajectory of the qubit with Bloch vector `bloch`.
///
/// States and speeds use the closed-form Bloch evolution; the Schatten speed
/// of a qubit is the Euclidean length of the Bloch velocity.
pub fn amplitude_damping(bloch: &BlochVector, gamma: f64, grid: &TimeGrid) -> Result<Trajectory> {
    AmplitudeDamping::new(gamma)?;
    let dynamics = AdBloch { bloch: *bloch, gamma };
    let traj = Trajectory::generate(&dynamics, grid)?;
    debug_assert_eq!(traj.provenance(), Provenance::Analytic);
    Ok(traj)
}

struct AdBloch {
    bloch: BlochVector,
    gamma: f64,
}

impl Dynamics for AdBloch {
    fn dim(&self) -> usize {
        2
    }

    fn state_and_velocity(&self, t: f64) -> Result<(DensityMatrix, CMat)> {
        let [x, y, z] = ad_bloch_vector(&self.bloch, self.gamma, t);
        let rho = bloch_matrix(x, y, z);
        let [x0, y0, z0] = self.bloch.cartesian();
        let g = self.gamma;
        let s = g * t;
        let half = (-0.5 * s).exp();
        let full = (-s).exp();
        let (vx, vy, vz) = (-0.5 * g * half * x0, -0.5 * g * half * y0, g * full * (1.0 - z0));
        let vel = bloch_matrix(vx, vy, vz) - identity(2) * c64(0.5, 0.0);
        Ok((DensityMatrix::from_unnormalized(rho)?, vel))
    }
}

fn bloch_matrix(x: f64, y: f64, z: f64) -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[
            c64(0.5 * (1.0 + z), 0.0),
            c64(0.5 * x, -0.5 * y),
            c64(0.5 * x, 0.5 * y),
            c64(0.5 * (1.0 - z), 0.0),
        ],
    )
}

/// Cartesian Bloch vector of the damped state at time `t`.
pub fn ad_bloch_vector(bloch: &BlochVector, gamma: f64, t: f64) -> [f64; 3] {
    let [x, y, z] = bloch.cartesian();
    let s = gamma * t;
    let half = (-0.5 * s).exp();
    // 1 − e^{−s} computed without cancellation
    let lost = -(-s).exp_m1();
    [half * x, half * y, (1.0 - lost) * z + lost]
}

/// Closed-form `λ_min(ρ_t)` for the damped qubit.
pub fn ad_lambda_min(bloch: &BlochVector, gamma: f64, t: f64) -> f64 {
    let (r, theta) = (bloch.r, bloch.theta);
    let decay = (-gamma * t).exp();
    let lost = -(-gamma * t).exp_m1();
    let c = 1.0 - r * theta.cos();
    let xi = 1.0 - r * r + lost * c * c;
    let x = (decay * xi).clamp(0.0, 1.0);
    // ½(1 − √(1 − x)) = x / (2(1 + √(1 − x)))
    x / (2.0 * (1.0 + (1.0 - x).sqrt()))
}

/// Closed-form Kraus speed `Σ_ℓ ‖V_ℓ ρ₀ V̇_ℓ†‖₁` for amplitude damping.
pub fn ad_kraus_speed(bloch: &BlochVector, gamma: f64, t: f64) -> Result<f64> {
    AmplitudeDamping::new(gamma)?;
    let (r, theta) = (bloch.r, bloch.theta);
    let c = 1.0 - r * theta.cos();
    let sin = r * theta.sin();
    let decay = (-gamma * t).exp();
    // e^{−γt}√(c² + e^{γt} r² sin²θ) = √(e^{−2γt}c² + e^{−γt} r² sin²θ)
    let root = (decay * decay * c * c + decay * sin * sin).sqrt();
    Ok(0.25 * gamma * (decay * c + root))
}

/// Bloch components, fidelity with the initial state and `λ_min` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdDiagnostic {
    pub t: f64,
    pub sx: f64,
    pub sz: f64,
    pub fidelity: f64,
    pub lambda_min: f64,
}

/// Polarizations and fidelity of the Kraus-propagated state at each time.
pub fn ad_diagnostics(bloch: &BlochVector, gamma: f64, times: &[f64]) -> Result<Vec<AdDiagnostic>> {
    let channel = AmplitudeDamping::new(gamma)?;
    let rho0 = bloch.density_matrix();
    let evo = KrausEvolution::new(&channel, rho0.clone())?;
    times
        .iter()
        .map(|&t| {
            let rho = evo.state(t)?;
            let [sx, _, sz] = rho.bloch_components().ok_or(Error::DimensionMismatch {
                expected: 2,
                found: rho.dim(),
            })?;
            Ok(AdDiagnostic {
                t,
                sx,
                sz,
                fidelity: fidelity(&rho0, &rho)?,
                lambda_min: rho.lambda_min(),
            })
        })
        .collect()
}


#[cfg(test)]
mod diagnostic_tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn fidelity_plateaus_at_ground_population() {
        let b = BlochVector::new(0.5, FRAC_PI_4, FRAC_PI_4).unwrap();
        let rows = ad_diagnostics(&b, 1.0, &[0.0, 1.0, 30.0]).unwrap();
        assert!((rows[0].fidelity - 1.0).abs() < 1e-12);
        assert!((rows[2].fidelity - 0.5 * (1.0 + 0.5 * FRAC_PI_4.cos())).abs() < 1e-4);
        assert!(rows[1].sz > rows[0].sz);
    }
}
