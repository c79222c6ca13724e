use crate::dynamics::{Dynamics, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::matrix::{
    c64, commutator, eigh, identity, kron, partial_trace_matrix, sigma_x, sigma_y, sigma_z, unitary_from_eigh, CMat,
    DensityMatrix, Observable, Subsystem,
};

/// Largest supported spin chain.
pub const MAX_SITES: usize = 6;

/// Two subsystems with local Hamiltonians and an interaction,
/// `H_sys = H_A⊗I + I⊗H_B + H_AB`.
#[derive(Debug, Clone)]
pub struct BipartiteModel {
    dims: (usize, usize),
    h_a: Observable,
    h_b: Observable,
    h_ab: Observable,
    h_sys: Observable,
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
}

impl BipartiteModel {
    pub fn new(h_a: Observable, h_b: Observable, h_ab: Observable) -> Result<Self> {
        let dims = (h_a.dim(), h_b.dim());
        let d = dims.0 * dims.1;
        if h_ab.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: h_ab.dim(),
            });
        }
        let total = kron(h_a.matrix(), &identity(dims.1)) + kron(&identity(dims.0), h_b.matrix()) + h_ab.matrix();
        let h_sys = Observable::new(total)?;
        let (eigenvalues, eigenvectors) = eigh(h_sys.matrix())?;
        Ok(Self {
            dims,
            h_a,
            h_b,
            h_ab,
            h_sys,
            eigenvalues,
            eigenvectors,
        })
    }

    /// Open XXZ chain of `sites` spins split after the first `sites_a` of them.
    pub fn xxz(sites: usize, sites_a: usize, j: f64, delta: f64) -> Result<Self> {
        check_sites(sites)?;
        if sites_a == 0 || sites_a >= sites {
            return Err(Error::InvalidModel(format!(
                "cut after {sites_a} of {sites} sites leaves an empty side"
            )));
        }
        let h_a = Observable::new(xxz_chain(sites_a, j, delta))?;
        let h_b = Observable::new(xxz_chain(sites - sites_a, j, delta))?;
        let h_ab = Observable::new(bond(sites, sites_a - 1, j, delta))?;
        Self::new(h_a, h_b, h_ab)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.0 * self.dims.1
    }

    pub fn h_a(&self) -> &Observable {
        &self.h_a
    }

    pub fn h_b(&self) -> &Observable {
        &self.h_b
    }

    pub fn h_ab(&self) -> &Observable {
        &self.h_ab
    }

    pub fn h_sys(&self) -> &Observable {
        &self.h_sys
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `e^{−itH_sys}` from the cached eigendecomposition.
    pub fn unitary(&self, t: f64) -> CMat {
        unitary_from_eigh(&self.eigenvalues, &self.eigenvectors, t)
    }
}

fn check_sites(sites: usize) -> Result<()> {
    if !(2..=MAX_SITES).contains(&sites) {
        return Err(Error::InvalidModel(format!(
            "chain length {sites} outside 2..={MAX_SITES}"
        )));
    }
    Ok(())
}

/// `op` acting on `site` (0-based, leftmost most significant) of a `sites`-spin chain.
fn on_site(sites: usize, site: usize, op: &CMat) -> CMat {
    (0..sites).fold(identity(1), |acc, k| {
        kron(&acc, &if k == site { op.clone() } else { identity(2) })
    })
}

/// `J(σxσx + σyσy + Δσzσz)` between `site` and `site + 1`.
fn bond(sites: usize, site: usize, j: f64, delta: f64) -> CMat {
    let pair = |p: &CMat| on_site(sites, site, p) * on_site(sites, site + 1, p);
    (pair(&sigma_x()) + pair(&sigma_y()) + pair(&sigma_z()) * c64(delta, 0.0)) * c64(j, 0.0)
}

fn xxz_chain(sites: usize, j: f64, delta: f64) -> CMat {
    let d = 1 << sites;
    (0..sites.saturating_sub(1)).fold(CMat::zeros(d, d), |acc, k| acc + bond(sites, k, j, delta))
}

/// `H = J Σ_k (σx_k σx_{k+1} + σy_k σy_{k+1} + Δ σz_k σz_{k+1})` with open boundaries.
pub fn xxz_hamiltonian(sites: usize, j: f64, delta: f64) -> Result<Observable> {
    check_sites(sites)?;
    if !j.is_finite() || !delta.is_finite() {
        return Err(Error::NonFinite);
    }
    Observable::new(xxz_chain(sites, j, delta))
}

/// Whether the `|1,0,1,0,…⟩` pattern fits the chain exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeelPattern {
    Strict,
    /// Odd chain; the pattern ends on a `1`.
    Truncated,
}

/// `(1 − p) I/d + p |Φ⟩⟨Φ|` with `|Φ⟩ = |1,0,1,0,…⟩`.
pub fn neel_mixed_state(sites: usize, p: f64) -> Result<(DensityMatrix, NeelPattern)> {
    check_sites(sites)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidModel(format!("mixing weight {p} outside [0, 1]")));
    }
    let d = 1usize << sites;
    let index = (0..sites)
        .filter(|k| k % 2 == 0)
        .map(|k| 1usize << (sites - 1 - k))
        .sum::<usize>();
    let mut m = identity(d) * c64((1.0 - p) / d as f64, 0.0);
    m[(index, index)] += c64(p, 0.0);
    let pattern = if sites.is_multiple_of(2) {
        NeelPattern::Strict
    } else {
        NeelPattern::Truncated
    };
    Ok((DensityMatrix::new(m)?, pattern))
}

/// Reduced dynamics of one side of a globally unitary evolution.
#[derive(Debug, Clone)]
pub struct BipartiteEvolution<'a> {
    model: &'a BipartiteModel,
    rho0: DensityMatrix,
    keep: Subsystem,
}

impl<'a> BipartiteEvolution<'a> {
    pub fn new(model: &'a BipartiteModel, rho0: DensityMatrix, keep: Subsystem) -> Result<Self> {
        if rho0.dim() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                found: rho0.dim(),
            });
        }
        Ok(Self { model, rho0, keep })
    }

    /// The globally evolved state `U_t ρ₀ U_t†`.
    pub fn global_state(&self, t: f64) -> Result<DensityMatrix> {
        let u = self.model.unitary(t);
        DensityMatrix::from_unnormalized(&u * self.rho0.matrix() * u.adjoint())
    }
}

impl Dynamics for BipartiteEvolution<'_> {
    fn dim(&self) -> usize {
        match self.keep {
            Subsystem::A => self.model.dims.0,
            Subsystem::B => self.model.dims.1,
        }
    }

    fn state_and_velocity(&self, t: f64) -> Result<(DensityMatrix, CMat)> {
        let u = self.model.unitary(t);
        let global = &u * self.rho0.matrix() * u.adjoint();
        let rate = commutator(self.model.h_sys.matrix(), &global) * c64(0.0, -1.0);
        let reduced = partial_trace_matrix(&global, self.model.dims, self.keep)?;
        let vel = partial_trace_matrix(&rate, self.model.dims, self.keep)?;
        Ok((DensityMatrix::from_unnormalized(reduced)?, vel))
    }
}

/// Trajectory of the reduced state on side `keep`, with analytic speeds
/// `‖tr_other(−i[H_sys, ρ_t])‖₁`.
pub fn bipartite_reduced(
    model: &BipartiteModel,
    rho0: &DensityMatrix,
    keep: Subsystem,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    Trajectory::generate(&BipartiteEvolution::new(model, rho0.clone(), keep)?, grid)
}

/// Diagonal of the first-site reduced state for the two-site chain started
/// from the mixed Néel state: `(3/8 + ¼ sin²(2Jt), 3/8 + ¼ cos²(2Jt))` at `p = 1/4`,
/// in general `((1 − p)/2 + p sin²(2Jt), (1 − p)/2 + p cos²(2Jt))`.
pub fn xxz_two_site_reduced_diagonal(j: f64, p: f64, t: f64) -> [f64; 2] {
    let (s, c) = (2.0 * j * t).sin_cos();
    let base = 0.5 * (1.0 - p);
    [base + p * s * s, base + p * c * c]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{eigvalsh, trace};
    use std::f64::consts::PI;

    #[test]
    fn two_site_spectrum() {
        let (j, delta) = (0.7, 1.3);
        let h = xxz_hamiltonian(2, j, delta).unwrap();
        let got = eigvalsh(h.matrix()).unwrap();
        let mut want = vec![j * delta, j * delta, 2.0 * j - j * delta, -2.0 * j - j * delta];
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
        let got = eigvalsh(xxz_hamiltonian(2, 0.5, 1.0).unwrap().matrix()).unwrap();
        for (g, w) in got.iter().zip([-1.5, 0.5, 0.5, 0.5]) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn two_site_matrix_elements() {
        let (j, delta) = (0.9, 0.4);
        let h = xxz_hamiltonian(2, j, delta).unwrap();
        // |10⟩ is basis index 2, |01⟩ index 1
        assert!((h.matrix()[(2, 2)] - c64(-j * delta, 0.0)).norm() < 1e-15);
        assert!((h.matrix()[(2, 1)] - c64(2.0 * j, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn chains_are_traceless_and_split_consistently() {
        for sites in 2..=5 {
            let h = xxz_hamiltonian(sites, 1.1, -0.6).unwrap();
            assert!(trace(h.matrix()).norm() < 1e-12);
            for cut in 1..sites {
                let model = BipartiteModel::xxz(sites, cut, 1.1, -0.6).unwrap();
                assert!((model.h_sys().matrix() - h.matrix()).norm() < 1e-12);
            }
        }
        assert!(xxz_hamiltonian(1, 1.0, 1.0).is_err());
        assert!(xxz_hamiltonian(MAX_SITES + 1, 1.0, 1.0).is_err());
        assert!(BipartiteModel::xxz(3, 3, 1.0, 1.0).is_err());
    }

    #[test]
    fn neel_states() {
        let (rho, pattern) = neel_mixed_state(2, 0.25).unwrap();
        assert_eq!(pattern, NeelPattern::Strict);
        for (g, w) in rho
            .spectrum()
            .iter()
            .zip([3.0 / 16.0, 3.0 / 16.0, 3.0 / 16.0, 7.0 / 16.0])
        {
            assert!((g - w).abs() < 1e-15);
        }
        assert!((rho.matrix()[(2, 2)].re - 7.0 / 16.0).abs() < 1e-15);
        let (mixed, _) = neel_mixed_state(4, 0.0).unwrap();
        assert!((mixed.matrix() - identity(16) * c64(1.0 / 16.0, 0.0)).norm() < 1e-15);
        let (pure, _) = neel_mixed_state(4, 1.0).unwrap();
        assert!((pure.matrix()[(0b1010, 0b1010)].re - 1.0).abs() < 1e-15);
        assert_eq!(neel_mixed_state(3, 0.5).unwrap().1, NeelPattern::Truncated);
        assert!(neel_mixed_state(2, 1.5).is_err());
    }

    #[test]
    fn two_site_reduced_state_matches_closed_form() {
        let j = 0.8;
        let model = BipartiteModel::xxz(2, 1, j, 1.7).unwrap();
        let (rho0, _) = neel_mixed_state(2, 0.25).unwrap();
        let grid = TimeGrid::new(4.0, 200).unwrap();
        let traj = bipartite_reduced(&model, &rho0, Subsystem::A, &grid).unwrap();
        for (k, rho) in traj.states().iter().enumerate() {
            let [a, b] = xxz_two_site_reduced_diagonal(j, 0.25, traj.time(k));
            let m = rho.matrix();
            assert!((m[(0, 0)].re - a).abs() < 1e-12);
            assert!((m[(1, 1)].re - b).abs() < 1e-12);
            assert!(m[(0, 1)].norm() < 1e-12);
            assert!(rho
                .spectrum()
                .iter()
                .all(|&l| (0.375 - 1e-12..=0.625 + 1e-12).contains(&l)));
        }
        let t = PI / (8.0 * j);
        let [a, b] = xxz_two_site_reduced_diagonal(j, 0.25, t);
        assert!((a - 0.5).abs() < 1e-15 && (b - 0.5).abs() < 1e-15);
    }

    #[test]
    fn decoupled_product_state_keeps_local_spectrum() {
        let h_a = Observable::new(sigma_x() * c64(0.9, 0.0) + sigma_z() * c64(0.2, 0.0)).unwrap();
        let h_b = Observable::new(sigma_y()).unwrap();
        let model = BipartiteModel::new(h_a, h_b, Observable::new(CMat::zeros(4, 4)).unwrap()).unwrap();
        let a = crate::matrix::BlochVector::new(0.7, 0.5, 0.1).unwrap().density_matrix();
        let b = crate::matrix::BlochVector::new(0.3, 2.0, 1.0).unwrap().density_matrix();
        let rho0 = DensityMatrix::new(kron(a.matrix(), b.matrix())).unwrap();
        let traj = bipartite_reduced(&model, &rho0, Subsystem::A, &TimeGrid::new(3.0, 30).unwrap()).unwrap();
        for rho in traj.states() {
            assert!((rho.lambda_min() - a.lambda_min()).abs() < 1e-12);
        }
        assert!(BipartiteEvolution::new(&model, a, Subsystem::A).is_err());
    }

    #[test]
    fn reduced_speed_matches_finite_differences() {
        let model = BipartiteModel::xxz(3, 1, 1.0, 0.5).unwrap();
        let (rho0, _) = neel_mixed_state(3, 0.6).unwrap();
        let h = 1e-4;
        let grid = TimeGrid::new(200.0 * h, 200).unwrap();
        let traj = bipartite_reduced(&model, &rho0, Subsystem::B, &grid).unwrap();
        let fd = Trajectory::from_states(traj.states().to_vec(), h).unwrap();
        for (a, f) in traj.speeds().iter().zip(fd.speeds()) {
            assert!((a - f).abs() < 1e-6);
        }
    }
}
