//! Dense complex matrix primitives for qudit states and observables.
//!
//! Everything here works on small `DMatrix<Complex64>` values (dimension up
//! to 64). Tensor products follow the A-slow/B-fast convention: basis index
//! `i_a * d_b + i_b`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Absolute Hermiticity tolerance, scaled by the largest entry for large operators.
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues in `[-PSD_TOL, 0)` are clamped to zero.
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalue pairs with `λ_i + λ_j` below this are dropped from the QFI sum.
pub const QFI_PAIR_CUTOFF: f64 = 1e-12;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn sigma_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c64(0., 0.), c64(1., 0.), c64(1., 0.), c64(0., 0.)])
}

pub fn sigma_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c64(0., 0.), c64(0., -1.), c64(0., 1.), c64(0., 0.)])
}

pub fn sigma_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c64(1., 0.), c64(0., 0.), c64(0., 0.), c64(-1., 0.)])
}

/// `|i⟩⟨j|` in dimension `d`.
pub fn ket_bra(d: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    m[(i, j)] = c64(1.0, 0.0);
    m
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Largest `|m_ij - conj(m_ji)|`.
pub fn max_asymmetry(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c64(0.5, 0.0)
}

fn ensure_square(m: &CMat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

fn ensure_finite(m: &CMat) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn entry_scale(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

fn ensure_hermitian(m: &CMat) -> Result<()> {
    let asym = max_asymmetry(m);
    if asym > HERMITIAN_TOL * entry_scale(m) {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come back in ascending order with the matching orthonormal
/// eigenvectors as columns. Qubit inputs use a closed form that keeps the
/// small eigenvalue accurate (`det / λ_max`) when the state is nearly pure.
pub fn eigh(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = ensure_square(m)?;
    ensure_finite(m)?;
    ensure_hermitian(m)?;
    if n == 2 {
        return Ok(eigh_2x2(m));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    Ok((values, vectors))
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(m: &CMat) -> Result<Vec<f64>> {
    let n = ensure_square(m)?;
    ensure_finite(m)?;
    ensure_hermitian(m)?;
    if n == 2 {
        let (lo, hi) = eigvals_2x2(m);
        return Ok(vec![lo, hi]);
    }
    let mut values: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn eigvals_2x2(m: &CMat) -> (f64, f64) {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = 0.5 * (a + d);
    let radius = (0.5 * (a - d)).hypot(b.norm());
    let det = a * d - b.norm_sqr();
    if mean >= 0.0 {
        let hi = mean + radius;
        let lo = if hi != 0.0 { det / hi } else { mean - radius };
        (lo.min(hi), hi)
    } else {
        let lo = mean - radius;
        let hi = if lo != 0.0 { det / lo } else { mean + radius };
        (lo, hi.max(lo))
    }
}

fn eigh_2x2(m: &CMat) -> (Vec<f64>, CMat) {
    let (lo, hi) = eigvals_2x2(m);
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mut vectors = CMat::zeros(2, 2);
    if b.norm() <= f64::EPSILON * (a.abs() + d.abs()).max(f64::MIN_POSITIVE) {
        let (first, second) = if a <= d { (0, 1) } else { (1, 0) };
        vectors[(first, 0)] = c64(1.0, 0.0);
        vectors[(second, 1)] = c64(1.0, 0.0);
        return (vec![lo, hi], vectors);
    }
    for (col, lambda) in [lo, hi].into_iter().enumerate() {
        // (a-λ) x + b y = 0 and b* x + (d-λ) y = 0; take the larger candidate.
        let v1 = [b, c64(lambda - a, 0.0)];
        let v2 = [c64(lambda - d, 0.0), b.conj()];
        let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
        let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
        let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
        let s = 1.0 / n.sqrt();
        vectors[(0, col)] = v[0] * s;
        vectors[(1, col)] = v[1] * s;
    }
    (vec![lo, hi], vectors)
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    ensure_finite(m)?;
    if m.nrows() == 2 && m.ncols() == 2 {
        let (hi, lo) = singular_values_2x2(m);
        return Ok(vec![hi, lo]);
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

fn singular_values_2x2(m: &CMat) -> (f64, f64) {
    let fro2: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).norm();
    // σ1 + σ2 = sqrt(‖m‖_F² + 2|det|), σ1 σ2 = |det|.
    let sum = (fro2 + 2.0 * det).sqrt();
    let diff = (fro2 - 2.0 * det).max(0.0).sqrt();
    (0.5 * (sum + diff), 0.5 * (sum - diff))
}

/// Schatten 1-norm.
pub fn trace_norm(m: &CMat) -> Result<f64> {
    ensure_finite(m)?;
    if m.nrows() == 2 && m.ncols() == 2 {
        let fro2: f64 = m.iter().map(|z| z.norm_sqr()).sum();
        let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).norm();
        return Ok((fro2 + 2.0 * det).sqrt());
    }
    Ok(singular_values(m)?.iter().sum())
}

/// Largest singular value.
pub fn operator_norm(m: &CMat) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Which factor of `A ⊗ B` survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace of an arbitrary operator on `A ⊗ B`.
pub fn partial_trace_matrix(m: &CMat, dims: (usize, usize), keep: Subsystem) -> Result<CMat> {
    let n = ensure_square(m)?;
    let (da, db) = dims;
    if da * db != n {
        return Err(Error::DimensionMismatch {
            expected: da * db,
            found: n,
        });
    }
    Ok(match keep {
        Subsystem::A => CMat::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()),
        Subsystem::B => CMat::from_fn(db, db, |k, l| (0..da).map(|i| m[(i * db + k, i * db + l)]).sum()),
    })
}

pub fn partial_trace(rho: &DensityMatrix, dims: (usize, usize), keep: Subsystem) -> Result<DensityMatrix> {
    DensityMatrix::from_unnormalized(partial_trace_matrix(rho.matrix(), dims, keep)?)
}

/// Point on (or inside) the Bloch ball in spherical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl BlochVector {
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidModel(format!("Bloch radius {r} outside [0, 1]")));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidModel(format!("polar angle {theta} outside [0, π]")));
        }
        if !phi.is_finite() {
            return Err(Error::InvalidModel("azimuth is not finite".into()));
        }
        Ok(Self {
            r,
            theta,
            phi: phi.rem_euclid(2.0 * PI),
        })
    }

    pub fn cartesian(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [self.r * st * cp, self.r * st * sp, self.r * ct]
    }

    /// `½(I + r·σ)`.
    pub fn density_matrix(&self) -> DensityMatrix {
        let [x, y, z] = self.cartesian();
        let m = CMat::from_row_slice(
            2,
            2,
            &[
                c64(0.5 * (1.0 + z), 0.0),
                c64(0.5 * x, -0.5 * y),
                c64(0.5 * x, 0.5 * y),
                c64(0.5 * (1.0 - z), 0.0),
            ],
        );
        DensityMatrix::new(m).expect("Bloch ball states are valid")
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
///
/// The ascending spectrum (with tolerated round-off negativity clamped to
/// zero) is computed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMat,
    spectrum: Vec<f64>,
}

impl DensityMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        ensure_square(&m)?;
        ensure_finite(&m)?;
        let asym = max_asymmetry(&m);
        if asym > HERMITIAN_TOL {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        let tr = trace(&m).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotUnitTrace { trace: tr });
        }
        Self::with_spectrum(m)
    }

    /// Hermitizes and trace-normalizes `m` before validating positivity.
    pub fn from_unnormalized(m: CMat) -> Result<Self> {
        ensure_square(&m)?;
        ensure_finite(&m)?;
        let h = hermitian_part(&m);
        let tr = trace(&h).re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::NotUnitTrace { trace: tr });
        }
        Self::with_spectrum(h * c64(1.0 / tr, 0.0))
    }

    fn with_spectrum(m: CMat) -> Result<Self> {
        let mut spectrum = eigvalsh(&m)?;
        if spectrum[0] < -PSD_TOL {
            return Err(Error::NotPositive {
                eigenvalue: spectrum[0],
            });
        }
        for l in spectrum.iter_mut() {
            *l = l.max(0.0);
        }
        Ok(Self { m, spectrum })
    }

    pub fn pure(psi: &CVec) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidModel("zero state vector".into()));
        }
        let v = psi / c64(norm, 0.0);
        Self::from_unnormalized(&v * v.adjoint())
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::new(identity(d) * c64(1.0 / d as f64, 0.0)).expect("I/d is a state")
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    /// Ascending eigenvalues, clamped to be nonnegative.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn lambda_min(&self) -> f64 {
        self.spectrum[0]
    }

    pub fn expectation(&self, op: &CMat) -> Complex64 {
        (&self.m * op).trace()
    }

    /// Bloch vector `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of a qubit state.
    pub fn bloch_components(&self) -> Option<[f64; 3]> {
        (self.dim() == 2).then(|| {
            [
                2.0 * self.m[(0, 1)].re,
                -2.0 * self.m[(0, 1)].im,
                (self.m[(0, 0)] - self.m[(1, 1)]).re,
            ]
        })
    }
}

/// Hermitian operator: a Hamiltonian or one of its Hermitian parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable(CMat);

impl Observable {
    pub fn new(m: CMat) -> Result<Self> {
        ensure_square(&m)?;
        ensure_finite(&m)?;
        ensure_hermitian(&m)?;
        Ok(Self(hermitian_part(&m)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }
}

impl AsRef<CMat> for Observable {
    fn as_ref(&self) -> &CMat {
        &self.0
    }
}

impl AsRef<CMat> for DensityMatrix {
    fn as_ref(&self) -> &CMat {
        &self.m
    }
}

/// Squared Uhlmann fidelity `(tr √(√ρ σ √ρ))²`; equals `⟨ψ|σ|ψ⟩` for pure `ρ`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let (vals, vecs) = eigh(rho.matrix())?;
    let sqrt_diag = CMat::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|l| c64(l.max(0.0).sqrt(), 0.0)),
    ));
    let sqrt_rho = &vecs * sqrt_diag * vecs.adjoint();
    let inner = hermitian_part(&(&sqrt_rho * sigma.matrix() * &sqrt_rho));
    let root_sum: f64 = eigvalsh(&inner)?.iter().map(|mu| mu.max(0.0).sqrt()).sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

/// `tr(ρh²) − tr(ρh)²`, clamped at zero.
pub fn variance(rho: &DensityMatrix, h: &Observable) -> Result<f64> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: h.dim(),
        });
    }
    let rh = rho.matrix() * h.matrix();
    let mean = rh.trace().re;
    let second = (&rh * h.matrix()).trace().re;
    Ok((second - mean * mean).max(0.0))
}

/// Symmetric-logarithmic-derivative QFI, normalized so pure states give the variance:
/// `½ Σ (λ_i − λ_j)² / (λ_i + λ_j) |⟨i|h|j⟩|²`.
pub fn qfi(rho: &DensityMatrix, h: &Observable) -> Result<f64> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: h.dim(),
        });
    }
    let (vals, vecs) = eigh(rho.matrix())?;
    let h_eig = vecs.adjoint() * h.matrix() * &vecs;
    let n = vals.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (li, lj) = (vals[i].max(0.0), vals[j].max(0.0));
            let s = li + lj;
            if s > QFI_PAIR_CUTOFF {
                acc += (li - lj).powi(2) / s * h_eig[(i, j)].norm_sqr();
            }
        }
    }
    Ok(0.5 * acc)
}

/// `exp(−i t m)`.
///
/// 2×2 inputs use `e^{−it tr/2} [cos(tκ) I − i t sinc(tκ) m₀]` with `m₀` the
/// traceless part and `κ² = −det m₀`; this stays valid at exceptional points
/// where `m₀` is nilpotent. Larger inputs go through [`mat_exp_general`].
pub fn mat_exp(m: &CMat, t: f64) -> Result<CMat> {
    let n = ensure_square(m)?;
    ensure_finite(m)?;
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    if n != 2 {
        return mat_exp_general(m, t);
    }
    let half_tr = trace(m) * 0.5;
    let m0 = m - identity(2) * half_tr;
    let kappa_sq = -(m0[(0, 0)] * m0[(1, 1)] - m0[(0, 1)] * m0[(1, 0)]);
    let x = kappa_sq.sqrt() * t;
    let sinc = if x.norm() < 1e-4 {
        let x2 = x * x;
        Complex64::new(1.0, 0.0) - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    };
    let phase = (c64(0.0, -t) * half_tr).exp();
    Ok((identity(2) * x.cos() - m0 * (c64(0.0, t) * sinc)) * phase)
}

/// `exp(−i t m)` by Padé scaling-and-squaring, regardless of dimension.
pub fn mat_exp_general(m: &CMat, t: f64) -> Result<CMat> {
    ensure_square(m)?;
    ensure_finite(m)?;
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok((m * c64(0.0, -t)).exp())
}

/// `exp(−i t H)` for Hermitian `H` from its eigendecomposition.
pub fn unitary_from_eigh(values: &[f64], vectors: &CMat, t: f64) -> CMat {
    let phases = DVector::from_iterator(values.len(), values.iter().map(|l| c64(0.0, -l * t).exp()));
    vectors * CMat::from_diagonal(&phases) * vectors.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    fn max_diff(a: &CMat, b: &CMat) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn eigh_pauli_and_mixed() {
        let (v, _) = eigh(&sigma_z()).unwrap();
        assert_eq!(v, vec![-1.0, 1.0]);
        let (v, _) = eigh(DensityMatrix::maximally_mixed(2).matrix()).unwrap();
        assert_abs_diff_eq!(v[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn eigh_bloch_state_reconstructs() {
        let rho = BlochVector::new(0.5, FRAC_PI_4, FRAC_PI_4).unwrap().density_matrix();
        let (v, vecs) = eigh(rho.matrix()).unwrap();
        assert_abs_diff_eq!(v[0], 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(v[1], 0.75, epsilon = 1e-14);
        let diag = CMat::from_diagonal(&DVector::from_iterator(2, v.iter().map(|l| c64(*l, 0.0))));
        assert!(max_diff(&(&vecs * diag * vecs.adjoint()), rho.matrix()) < 1e-12);
        assert!(max_diff(&(vecs.adjoint() * &vecs), &identity(2)) < 1e-12);
    }

    #[test]
    fn eigh_general_dimension_sorted() {
        let h = kron(&sigma_x(), &sigma_x()) + kron(&sigma_z(), &identity(2)) * c64(0.3, 0.0);
        let (v, vecs) = eigh(&h).unwrap();
        assert!(v.windows(2).all(|w| w[0] <= w[1]));
        let diag = CMat::from_diagonal(&DVector::from_iterator(4, v.iter().map(|l| c64(*l, 0.0))));
        assert!(max_diff(&(&vecs * diag * vecs.adjoint()), &h) < 1e-12);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = sigma_x() + sigma_z() * c64(0.0, 1.0);
        match eigh(&m) {
            Err(Error::NotHermitian { asymmetry }) => assert!(asymmetry > 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn norms_of_simple_matrices() {
        assert_abs_diff_eq!(trace_norm(&sigma_z()).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            trace_norm(DensityMatrix::maximally_mixed(3).matrix()).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(operator_norm(&sigma_x()).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            operator_norm(&(identity(2) * c64(3.0, 0.0))).unwrap(),
            3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn operator_norm_of_pt_hamiltonian_matches_svd() {
        let h = sigma_x() + sigma_z() * c64(0.0, 2.0);
        let svd: f64 = h.clone().singular_values().iter().copied().fold(0.0, f64::max);
        assert_abs_diff_eq!(operator_norm(&h).unwrap(), svd, epsilon = 1e-12);
        // oracle: square root of the top eigenvalue of H†H
        let hh = h.adjoint() * &h;
        let (ev, _) = eigh(&hermitian_part(&hh)).unwrap();
        assert_abs_diff_eq!(operator_norm(&h).unwrap(), ev[1].sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn commutator_trace_norm_of_pure_state() {
        let psi = CVec::from_vec(vec![c64(0.6, 0.0), c64(0.0, 0.8)]);
        let rho = DensityMatrix::pure(&psi).unwrap();
        let h = Observable::new(sigma_x()).unwrap();
        let tn = trace_norm(&commutator(h.matrix(), rho.matrix())).unwrap();
        let dh = variance(&rho, &h).unwrap().sqrt();
        assert_abs_diff_eq!(tn, 2.0 * dh, epsilon = 1e-12);
    }

    #[test]
    fn partial_trace_cases() {
        let s = 1.0 / 2f64.sqrt();
        let bell = CVec::from_vec(vec![c64(s, 0.), c64(0., 0.), c64(0., 0.), c64(s, 0.)]);
        let rho = DensityMatrix::pure(&bell).unwrap();
        let a = partial_trace(&rho, (2, 2), Subsystem::A).unwrap();
        assert!(max_diff(a.matrix(), DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);

        let ra = BlochVector::new(0.3, 1.0, 2.0).unwrap().density_matrix();
        let rb = DensityMatrix::maximally_mixed(3);
        let prod = DensityMatrix::new(kron(ra.matrix(), rb.matrix())).unwrap();
        let back = partial_trace(&prod, (2, 3), Subsystem::A).unwrap();
        assert!(max_diff(back.matrix(), ra.matrix()) < 1e-15);
        let back_b = partial_trace(&prod, (2, 3), Subsystem::B).unwrap();
        assert!(max_diff(back_b.matrix(), rb.matrix()) < 1e-15);

        assert!(matches!(
            partial_trace(&prod, (2, 2), Subsystem::A),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fidelity_cases() {
        let rho = BlochVector::new(0.5, FRAC_PI_4, FRAC_PI_4).unwrap().density_matrix();
        assert_abs_diff_eq!(fidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-12);
        let zero = DensityMatrix::new(ket_bra(2, 0, 0)).unwrap();
        let one = DensityMatrix::new(ket_bra(2, 1, 1)).unwrap();
        assert_abs_diff_eq!(fidelity(&zero, &one).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fidelity(&rho, &zero).unwrap(), 0.676_776_695_296_636_9, epsilon = 1e-12);
    }

    #[test]
    fn variance_cases() {
        let z = Observable::new(sigma_z()).unwrap();
        let up = DensityMatrix::new(ket_bra(2, 0, 0)).unwrap();
        assert_abs_diff_eq!(variance(&up, &z).unwrap(), 0.0);
        assert_abs_diff_eq!(
            variance(&DensityMatrix::maximally_mixed(2), &z).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn observable_rejects_non_hermitian() {
        assert!(matches!(
            Observable::new(sigma_x() * c64(0.0, 1.0)),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn qfi_cases() {
        let psi = CVec::from_vec(vec![c64(0.6, 0.0), c64(0.48, 0.64)]);
        let pure = DensityMatrix::pure(&psi).unwrap();
        let z = Observable::new(sigma_z()).unwrap();
        assert_abs_diff_eq!(qfi(&pure, &z).unwrap(), variance(&pure, &z).unwrap(), epsilon = 1e-12);
        let x = Observable::new(sigma_x()).unwrap();
        assert_abs_diff_eq!(qfi(&DensityMatrix::maximally_mixed(2), &x).unwrap(), 0.0);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(matches!(DensityMatrix::new(sigma_z()), Err(Error::NotUnitTrace { .. })));
        let neg = CMat::from_diagonal(&DVector::from_vec(vec![c64(1.5, 0.), c64(-0.5, 0.)]));
        assert!(matches!(DensityMatrix::new(neg), Err(Error::NotPositive { .. })));
        let tiny = CMat::from_diagonal(&DVector::from_vec(vec![c64(1.0 + 5e-11, 0.), c64(-5e-11, 0.)]));
        let rho = DensityMatrix::new(tiny).unwrap();
        assert_eq!(rho.lambda_min(), 0.0);
    }

    #[test]
    fn mat_exp_cases() {
        let h = sigma_x();
        assert!(max_diff(&mat_exp(&h, 0.0).unwrap(), &identity(2)) < 1e-15);
        let k = mat_exp(&h, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(max_diff(&k, &(sigma_x() * c64(0.0, -1.0))) < 1e-15);

        // ω σx + 2iω σz at ωt = 1: cosh(√3) I + sinh(√3) (û·σ), û = −i u / √3.
        let pt = sigma_x() + sigma_z() * c64(0.0, 2.0);
        let s3 = 3f64.sqrt();
        let u_sigma = (sigma_x() * c64(0.0, -1.0) + sigma_z() * c64(2.0, 0.0)) * c64(1.0 / s3, 0.0);
        let expected = identity(2) * c64(s3.cosh(), 0.0) + u_sigma * c64(s3.sinh(), 0.0);
        assert!(max_diff(&mat_exp(&pt, 1.0).unwrap(), &expected) < 1e-12);
        assert!(max_diff(&mat_exp_general(&pt, 1.0).unwrap(), &expected) < 1e-11);
    }

    #[test]
    fn mat_exp_exceptional_point_and_non_traceless() {
        let ep = sigma_x() + sigma_z() * c64(0.0, 1.0);
        for t in [0.0, 0.3, 2.0] {
            let a = mat_exp(&ep, t).unwrap();
            let b = mat_exp_general(&ep, t).unwrap();
            assert!(max_diff(&a, &b) < 1e-12, "t={t}");
        }
        let shifted = sigma_y() + identity(2) * c64(0.7, -0.2);
        assert!(
            max_diff(
                &mat_exp(&shifted, 1.3).unwrap(),
                &mat_exp_general(&shifted, 1.3).unwrap()
            ) < 1e-12
        );
    }
}
