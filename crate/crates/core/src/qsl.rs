//! Entropic speed limits evaluated on trajectories.
//!
//! Every bound has the form `|ΔS| ≤ Γ = ∫₀^τ g_q[λ_min(ρ_t)] v(t) dt`, where
//! `v` is the Schatten speed or one of its upper bounds (the Kraus speed of a
//! CPTP map, or a state-independent constant). The speed-limit time is
//! `τ_QSL = |ΔS| τ / Γ` and the relative error is `ς = 1 − |ΔS| / Γ`.
//!
//! Integrals use the composite trapezoid rule on the trajectory grid together
//! with the same rule on every second node; their difference is the error
//! estimate and their Richardson combination is the reported value.

use rayon::prelude::*;

use crate::dynamics::{
    ad_kraus_speed, ad_lambda_min, BipartiteEvolution, BipartiteModel, Dynamics, KrausChannel, KrausEvolution,
    NonHermitianEvolution, NonHermitianModel, Provenance, TimeGrid, Trajectory,
};
use crate::entropy::{entropy_auto, g_weight, EntropyKind, EntropyParams};
use crate::error::{Error, Result};
use crate::matrix::{commutator, operator_norm, qfi, trace_norm, variance, BlochVector, DensityMatrix, Subsystem};

/// Relative change between the `h` and `2h` quadratures accepted as converged.
pub const CONVERGENCE_TOL: f64 = 1e-6;
/// Bounds at or below this are treated as vanishing.
pub const TRIVIAL_GAMMA: f64 = 1e-14;
/// `λ_min` below this marks a report as weakly conditioned.
pub const WEAK_LAMBDA: f64 = 1e-6;
/// Slack allowed in the bound-chain assertions.
pub const CHAIN_TOL: f64 = 1e-9;

/// Outcome of one speed-limit evaluation at evolution time `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QslReport {
    pub tau: f64,
    /// `|S(ρ_τ) − S(ρ₀)|` in nats.
    pub delta_s: f64,
    /// Integrated bound in nats; infinite when the weight diverged.
    pub gamma: f64,
    pub tau_qsl: f64,
    pub varsigma: f64,
    /// The weight diverged or the bound vanished, so the limit carries no information.
    pub trivial: bool,
    /// Some `λ_min` on `[0, τ]` fell below [`WEAK_LAMBDA`].
    pub weakly_conditioned: bool,
    /// The `h` and `2h` quadratures agreed to [`CONVERGENCE_TOL`].
    pub converged: bool,
    /// The entropy parameters admit the bound at all.
    pub valid: bool,
}

impl QslReport {
    fn invalid(tau: f64) -> Self {
        Self {
            tau,
            delta_s: f64::NAN,
            gamma: f64::NAN,
            tau_qsl: f64::NAN,
            varsigma: f64::NAN,
            trivial: true,
            weakly_conditioned: false,
            converged: true,
            valid: false,
        }
    }

    fn from_parts(tau: f64, delta_s: f64, integral: Integral) -> Self {
        let Integral {
            value,
            converged,
            weakly_conditioned,
            divergent,
        } = integral;
        let trivial = divergent || !(value > TRIVIAL_GAMMA);
        let (tau_qsl, varsigma) = if trivial {
            (0.0, 1.0)
        } else {
            (delta_s * tau / value, 1.0 - delta_s / value)
        };
        Self {
            tau,
            delta_s,
            gamma: if divergent { f64::INFINITY } else { value },
            tau_qsl,
            varsigma,
            trivial,
            weakly_conditioned,
            converged,
            valid: true,
        }
    }
}

/// An integrated bound with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub converged: bool,
    pub weakly_conditioned: bool,
    pub divergent: bool,
}

/// Running trapezoid integrals of `integrand` on the full grid and on even nodes.
struct Cumulative {
    fine: Vec<f64>,
    coarse: Vec<f64>,
}

impl Cumulative {
    fn new(integrand: &[f64], step: f64) -> Self {
        let trapezoid = |values: &[f64], h: f64| {
            let mut out = Vec::with_capacity(values.len());
            let mut acc = 0.0;
            out.push(0.0);
            for w in values.windows(2) {
                acc += 0.5 * h * (w[0] + w[1]);
                out.push(acc);
            }
            out
        };
        let evens: Vec<f64> = integrand.iter().step_by(2).copied().collect();
        Self {
            fine: trapezoid(integrand, step),
            coarse: trapezoid(&evens, 2.0 * step),
        }
    }

    /// Richardson-extrapolated integral up to node `k` and whether it converged.
    fn at(&self, k: usize) -> (f64, bool) {
        let fine = self.fine[k];
        if !k.is_multiple_of(2) {
            return (fine, false);
        }
        let coarse = self.coarse[k / 2];
        let diff = fine - coarse;
        let converged = diff.abs() <= CONVERGENCE_TOL * fine.abs() || diff.abs() <= TRIVIAL_GAMMA;
        (fine + diff / 3.0, converged)
    }
}

/// Weighted speeds `g_q[λ_min] v` per node, truncated before the first divergent weight.
struct WeightedSpeed {
    integrand: Vec<f64>,
    /// First node whose weight diverged.
    divergent_from: Option<usize>,
    /// Running minimum of `λ_min`.
    running_min: Vec<f64>,
}

impl WeightedSpeed {
    fn new(traj: &Trajectory, q: f64) -> Result<Self> {
        let lambdas = traj.lambda_min();
        let mut integrand = Vec::with_capacity(lambdas.len());
        let mut divergent_from = None;
        for (k, (&l, &v)) in lambdas.iter().zip(traj.speeds()).enumerate() {
            match g_weight(l, q) {
                Ok(g) => integrand.push(g * v),
                Err(Error::DivergentWeight { .. }) => {
                    divergent_from = Some(k);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let running_min = lambdas
            .iter()
            .scan(f64::INFINITY, |m, &l| {
                *m = m.min(l);
                Some(*m)
            })
            .collect();
        Ok(Self {
            integrand,
            divergent_from,
            running_min,
        })
    }

    fn integral(&self, cumulative: &Cumulative, k: usize) -> Integral {
        let weakly_conditioned = self.running_min[k] < WEAK_LAMBDA;
        if self.divergent_from.is_some_and(|d| d <= k) {
            return Integral {
                value: f64::INFINITY,
                converged: true,
                weakly_conditioned,
                divergent: true,
            };
        }
        let (value, converged) = cumulative.at(k);
        Integral {
            value,
            converged,
            weakly_conditioned,
            divergent: false,
        }
    }
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParams {
            q,
            z: f64::NAN,
            reason: "bounds need 0 < q < 1",
        });
    }
    Ok(())
}

fn check_params(params: &EntropyParams) -> Result<()> {
    if !params.qsl_valid() {
        return Err(Error::InvalidParams {
            q: params.q(),
            z: params.z(),
            reason: "bounds need 0 < q ≤ z ≤ 1",
        });
    }
    Ok(())
}

/// `Γ = ∫₀^τ g_q[λ_min(ρ_t)] v(t) dt` over the whole trajectory.
pub fn integrated_bound(traj: &Trajectory, q: f64) -> Result<Integral> {
    check_q(q)?;
    if traj.len() < 2 {
        return Err(Error::InvalidGrid("trajectory needs at least two nodes".into()));
    }
    let weighted = WeightedSpeed::new(traj, q)?;
    let cumulative = Cumulative::new(&weighted.integrand, traj.step());
    Ok(weighted.integral(&cumulative, traj.len() - 1))
}

/// Speed-limit reports at the given nodes of one trajectory.
pub fn qsl_profile(traj: &Trajectory, params: &EntropyParams, nodes: &[usize]) -> Result<Vec<QslReport>> {
    check_params(params)?;
    if let Some(&k) = nodes.iter().find(|&&k| k >= traj.len()) {
        return Err(Error::InvalidGrid(format!(
            "node {k} outside trajectory of {} nodes",
            traj.len()
        )));
    }
    let weighted = WeightedSpeed::new(traj, params.q())?;
    let cumulative = Cumulative::new(&weighted.integrand, traj.step());
    let states = traj.states();
    let s0 = entropy_auto(states[0].spectrum(), params)?;
    nodes
        .iter()
        .map(|&k| {
            let delta_s = (entropy_auto(states[k].spectrum(), params)? - s0).abs();
            Ok(QslReport::from_parts(
                traj.time(k),
                delta_s,
                weighted.integral(&cumulative, k),
            ))
        })
        .collect()
}

/// Speed-limit report for the full trajectory, `τ` being its duration.
pub fn qsl_time(traj: &Trajectory, params: &EntropyParams) -> Result<QslReport> {
    Ok(qsl_profile(traj, params, &[traj.len() - 1])?[0])
}

/// Trajectory of a Kraus evolution whose speed series is `2 Σ_ℓ ‖V_ℓ ρ₀ V̇_ℓ†‖₁`.
pub fn kraus_bound_trajectory<C: KrausChannel>(
    channel: &C,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let evo = KrausEvolution::new(channel, rho0.clone())?;
    let states: Vec<DensityMatrix> = grid
        .times()
        .into_par_iter()
        .map(|t| evo.state(t))
        .collect::<Result<_>>()?;
    let speeds: Vec<f64> = grid
        .times()
        .into_par_iter()
        .map(|t| Ok(2.0 * evo.kraus_speed(t)?))
        .collect::<Result<_>>()?;
    Trajectory::from_parts(states, speeds, grid.step(), Provenance::KrausBound)
}

/// Reports for a trajectory family regenerated on finer grids until the
/// quadrature converges or the node cap is reached.
fn refine_until_converged<F>(
    make: &F,
    params: &EntropyParams,
    grid: TimeGrid,
    nodes: Vec<usize>,
) -> Result<Vec<QslReport>>
where
    F: Fn(&TimeGrid) -> Result<Trajectory> + Sync,
{
    let (mut grid, mut nodes) = (grid, nodes);
    loop {
        let reports = qsl_profile(&make(&grid)?, params, &nodes)?;
        if reports.iter().all(|r| r.converged || r.trivial) {
            return Ok(reports);
        }
        match grid.refined() {
            Ok(finer) => {
                grid = finer;
                nodes.iter_mut().for_each(|k| *k *= 2);
            }
            Err(_) => return Ok(reports),
        }
    }
}

/// Speed limit for a Kraus channel, with the speed bounded by twice
/// the Kraus speed.
pub fn cptp_qsl<C: KrausChannel>(
    channel: &C,
    rho0: &DensityMatrix,
    params: &EntropyParams,
    tau: f64,
    max_step: f64,
) -> Result<QslReport> {
    check_params(params)?;
    let grid = TimeGrid::with_max_step(tau, max_step)?;
    let make = |g: &TimeGrid| kraus_bound_trajectory(channel, rho0, g);
    Ok(refine_until_converged(&make, params, grid, vec![grid.steps()])?[0])
}

/// Speed-bound constant of the normalized non-Hermitian evolution,
/// `C = a + ‖Υ‖₁ + ‖Υ‖∞` with `a = ‖H_Re‖∞`, or `a = √ΔH_Re²(ρ₀)` when refined.
pub fn nh_speed_constant(model: &NonHermitianModel, rho0: &DensityMatrix, refined: bool) -> Result<f64> {
    let upsilon = model.upsilon().matrix();
    let hermitian = if refined {
        variance(rho0, model.h_re())?.sqrt()
    } else {
        operator_norm(model.h_re().matrix())?
    };
    Ok(hermitian + trace_norm(upsilon)? + operator_norm(upsilon)?)
}

/// Normalized non-Hermitian trajectory with the constant speed bound `2C`.
pub fn nh_bound_trajectory(
    model: &NonHermitianModel,
    rho0: &DensityMatrix,
    refined: bool,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let evo = NonHermitianEvolution::new(model, rho0.clone())?;
    let states: Vec<DensityMatrix> = grid
        .times()
        .into_par_iter()
        .map(|t| evo.state(t))
        .collect::<Result<_>>()?;
    let bound = 2.0 * nh_speed_constant(model, rho0, refined)?;
    let n = states.len();
    Trajectory::from_parts(states, vec![bound; n], grid.step(), Provenance::ConstantBound)
}

/// Non-Hermitian speed limit with the constant bound of [`nh_speed_constant`].
pub fn nh_qsl(
    model: &NonHermitianModel,
    rho0: &DensityMatrix,
    params: &EntropyParams,
    tau: f64,
    refined: bool,
    max_step: f64,
) -> Result<QslReport> {
    check_params(params)?;
    let grid = TimeGrid::with_max_step(tau, max_step)?;
    let make = |g: &TimeGrid| nh_bound_trajectory(model, rho0, refined, g);
    Ok(refine_until_converged(&make, params, grid, vec![grid.steps()])?[0])
}

/// The three quantities bounding the reduced speed of a bipartite evolution,
/// `‖[H, ρ₀]‖₁ ≤ 2√F_Q ≤ 2√ΔH²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedChain {
    pub commutator: f64,
    pub qfi_bound: f64,
    pub variance_bound: f64,
}

impl SpeedChain {
    pub fn new(model: &BipartiteModel, rho0: &DensityMatrix) -> Result<Self> {
        let h = model.h_sys();
        Ok(Self {
            commutator: trace_norm(&commutator(h.matrix(), rho0.matrix()))?,
            qfi_bound: 2.0 * qfi(rho0, h)?.sqrt(),
            variance_bound: 2.0 * variance(rho0, h)?.sqrt(),
        })
    }

    fn check(&self) -> Result<()> {
        if self.commutator > self.qfi_bound + CHAIN_TOL {
            return Err(Error::ChainViolation {
                t: 0.0,
                detail: format!("‖[H,ρ₀]‖₁ = {} exceeds 2√F = {}", self.commutator, self.qfi_bound),
            });
        }
        if self.qfi_bound > self.variance_bound + CHAIN_TOL {
            return Err(Error::ChainViolation {
                t: 0.0,
                detail: format!("2√F = {} exceeds 2√ΔH² = {}", self.qfi_bound, self.variance_bound),
            });
        }
        Ok(())
    }
}

/// Reduced trajectory with the constant speed bound `2√ΔH²(ρ₀)`, after
/// checking that every analytic reduced speed respects the whole chain.
pub fn manybody_bound_trajectory(
    model: &BipartiteModel,
    rho0: &DensityMatrix,
    keep: Subsystem,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let chain = SpeedChain::new(model, rho0)?;
    chain.check()?;
    let traj = Trajectory::generate(&BipartiteEvolution::new(model, rho0.clone(), keep)?, grid)?;
    for (k, &v) in traj.speeds().iter().enumerate() {
        if v > chain.commutator + CHAIN_TOL {
            return Err(Error::ChainViolation {
                t: traj.time(k),
                detail: format!("reduced speed {v} exceeds ‖[H,ρ₀]‖₁ = {}", chain.commutator),
            });
        }
    }
    let n = traj.len();
    traj.with_speeds(vec![chain.variance_bound; n], Provenance::ConstantBound)
}

/// Many-body speed limit on the reduced dynamics of side `keep`.
pub fn manybody_qsl(
    model: &BipartiteModel,
    rho0: &DensityMatrix,
    keep: Subsystem,
    params: &EntropyParams,
    tau: f64,
    max_step: f64,
) -> Result<QslReport> {
    check_params(params)?;
    let grid = TimeGrid::with_max_step(tau, max_step)?;
    let make = |g: &TimeGrid| manybody_bound_trajectory(model, rho0, keep, g);
    Ok(refine_until_converged(&make, params, grid, vec![grid.steps()])?[0])
}

/// `|dS/dt| − g_q[λ_min] ‖dρ/dt‖₁` per node, the entropy rate taken by finite
/// differences on the trajectory grid. Non-positive margins confirm the
/// entropy-rate inequality.
pub fn entropy_rate_bound_check(traj: &Trajectory, params: &EntropyParams) -> Result<Vec<f64>> {
    check_params(params)?;
    let n = traj.len();
    if n < 3 {
        return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {n}")));
    }
    let s: Vec<f64> = traj
        .states()
        .iter()
        .map(|r| entropy_auto(r.spectrum(), params))
        .collect::<Result<_>>()?;
    let h = traj.step();
    let lambdas = traj.lambda_min();
    (0..n)
        .map(|k| {
            let ds = if k == 0 {
                (-3.0 * s[0] + 4.0 * s[1] - s[2]) / (2.0 * h)
            } else if k == n - 1 {
                (s[n - 3] - 4.0 * s[n - 2] + 3.0 * s[n - 1]) / (2.0 * h)
            } else {
                (s[k + 1] - s[k - 1]) / (2.0 * h)
            };
            Ok(ds.abs() - g_weight(lambdas[k], params.q())? * traj.speeds()[k])
        })
        .collect()
}

/// Closed-form amplitude-damping speed limit of the CPTP bound.
///
/// Entropies come from the closed-form qubit spectrum `{λ_min, 1 − λ_min}`
/// and the integral of `2 g_q[λ_min(t)] Σ_ℓ‖V_ℓρ₀V̇_ℓ†‖₁` is evaluated by
/// adaptive Simpson quadrature on the closed-form integrand.
pub fn ad_closed_form_qsl(bloch: &BlochVector, gamma: f64, params: &EntropyParams, tau: f64) -> Result<QslReport> {
    check_params(params)?;
    if !(tau > 0.0) {
        return Err(Error::InvalidGrid(format!("τ = {tau} must be positive")));
    }
    let (q, z) = (params.q(), params.z());
    let entropy = |t: f64| {
        let l = ad_lambda_min(bloch, gamma, t);
        let purity = l.powf(q) + (1.0 - l).powf(q);
        match params.kind() {
            EntropyKind::Renyi => purity.ln() / (1.0 - q),
            EntropyKind::Tsallis => (purity - 1.0) / (1.0 - q),
            _ => (purity.powf((1.0 - z) / (1.0 - q)) - 1.0) / (1.0 - z),
        }
    };
    let delta_s = (entropy(tau) - entropy(0.0)).abs();
    let integrand = |t: f64| -> f64 {
        let l = ad_lambda_min(bloch, gamma, t);
        let g = (1.0 - q + l) * l.powf(q - 2.0) / (1.0 - q);
        2.0 * g * ad_kraus_speed(bloch, gamma, t).unwrap_or(f64::NAN)
    };
    let min_lambda = (0..=256)
        .map(|k| ad_lambda_min(bloch, gamma, tau * k as f64 / 256.0))
        .fold(f64::INFINITY, f64::min);
    if !(min_lambda > crate::entropy::WEIGHT_FLOOR) {
        let integral = Integral {
            value: f64::INFINITY,
            converged: true,
            weakly_conditioned: true,
            divergent: true,
        };
        return Ok(QslReport::from_parts(tau, delta_s, integral));
    }
    let value = adaptive_simpson(&integrand, 0.0, tau, 1e-13)?;
    let integral = Integral {
        value,
        converged: true,
        weakly_conditioned: min_lambda < WEAK_LAMBDA,
        divergent: false,
    };
    Ok(QslReport::from_parts(tau, delta_s, integral))
}

/// Adaptive Simpson quadrature to tolerance `tol` relative to `1 + |∫f|`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        (a, fa): (f64, f64),
        (m, fm): (f64, f64),
        (b, fb): (f64, f64),
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        // Below a few ulps of the local estimate the difference is roundoff.
        let next = (0.5 * tol).max(8.0 * f64::EPSILON * (left.abs() + right.abs()));
        recurse(f, (a, fa), (lm, flm), (m, fm), left, next, depth - 1)
            + recurse(f, (m, fm), (rm, frm), (b, fb), right, next, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let value = recurse(f, (a, fa), (m, fm), (b, fb), whole, tol * (1.0 + whole.abs()), 40);
    if !value.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(value)
}

/// Which member of the entropy family a grid sweeps over `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropySpec {
    /// `z → 1`
    Renyi,
    /// `z → q`
    Tsallis,
    /// Fixed `z` for every `q`.
    SharmaMittal(f64),
}

impl EntropySpec {
    /// Parameters at `q`, or `None` when the bound does not apply there.
    pub fn params(&self, q: f64) -> Option<EntropyParams> {
        let params = match *self {
            Self::Renyi => EntropyParams::renyi(q),
            Self::Tsallis => EntropyParams::tsallis(q),
            Self::SharmaMittal(z) => EntropyParams::new(q, z),
        };
        params.ok().filter(EntropyParams::qsl_valid)
    }
}

/// Speed-limit reports over a `(q, τ)` grid with the grid-normalized error.
#[derive(Debug, Clone)]
pub struct GridReport {
    pub qs: Vec<f64>,
    pub taus: Vec<f64>,
    pub entropy: EntropySpec,
    /// Row-major: `cells[i * taus.len() + j]` is `(qs[i], taus[j])`.
    pub cells: Vec<QslReport>,
    /// `(ς − min ς) / (max ς − min ς)` over the valid cells, `NaN` elsewhere.
    pub varsigma_norm: Vec<f64>,
}

impl GridReport {
    pub fn cell(&self, i: usize, j: usize) -> &QslReport {
        &self.cells[i * self.taus.len() + j]
    }

    pub fn varsigma_norm_at(&self, i: usize, j: usize) -> f64 {
        self.varsigma_norm[i * self.taus.len() + j]
    }

    /// Indices `(i, j)` of the largest finite `τ_QSL`.
    pub fn argmax_tau_qsl(&self) -> Option<(usize, usize)> {
        let n = self.taus.len();
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.tau_qsl.is_finite())
            .max_by(|a, b| a.1.tau_qsl.total_cmp(&b.1.tau_qsl))
            .map(|(k, _)| (k / n, k % n))
    }
}

fn normalize(cells: &[QslReport]) -> Vec<f64> {
    let valid = || {
        cells
            .iter()
            .filter(|c| c.valid && c.varsigma.is_finite())
            .map(|c| c.varsigma)
    };
    let lo = valid().fold(f64::INFINITY, f64::min);
    let hi = valid().fold(f64::NEG_INFINITY, f64::max);
    cells
        .iter()
        .map(|c| {
            if !(c.valid && c.varsigma.is_finite()) {
                f64::NAN
            } else if hi > lo {
                ((c.varsigma - lo) / (hi - lo)).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect()
}

/// Sweeps a `(q, τ)` grid. `make` produces the trajectory, with the speed
/// series of the bound in use, on any requested time grid.
///
/// When the `τ` values share a common spacing a single trajectory serves the
/// whole sweep; otherwise each `τ` gets its own. Grids are refined until the
/// quadrature converges or the node cap is hit.
pub fn sweep<F>(make: F, qs: &[f64], entropy: EntropySpec, taus: &[f64], max_step: f64) -> Result<GridReport>
where
    F: Fn(&TimeGrid) -> Result<Trajectory> + Sync,
{
    if qs.is_empty() || taus.is_empty() {
        return Err(Error::InvalidGrid("empty q or τ axis".into()));
    }
    if let Some(&q) = qs.iter().find(|&&q| !(q > 0.0 && q < 1.0)) {
        return Err(Error::InvalidParams {
            q,
            z: f64::NAN,
            reason: "q axis must lie in (0, 1)",
        });
    }
    if let Some(&t) = taus.iter().find(|&&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::InvalidGrid(format!("τ = {t} must be positive")));
    }
    let segments: Vec<(TimeGrid, Vec<usize>, Vec<usize>)> = match TimeGrid::covering(taus, max_step) {
        Some((grid, nodes)) => vec![(grid, nodes, (0..taus.len()).collect())],
        None => taus
            .iter()
            .enumerate()
            .map(|(j, &t)| {
                let grid = TimeGrid::with_max_step(t, max_step)?;
                Ok((grid, vec![grid.steps()], vec![j]))
            })
            .collect::<Result<_>>()?,
    };
    let mut cells = vec![QslReport::invalid(f64::NAN); qs.len() * taus.len()];
    for (grid, nodes, columns) in segments {
        let per_q = sweep_segment(&make, qs, entropy, grid, nodes)?;
        for (i, reports) in per_q.into_iter().enumerate() {
            for (report, &j) in reports.into_iter().zip(&columns) {
                cells[i * taus.len() + j] = report;
            }
        }
    }
    for (k, cell) in cells.iter_mut().enumerate() {
        if !cell.valid {
            *cell = QslReport::invalid(taus[k % taus.len()]);
        }
    }
    let varsigma_norm = normalize(&cells);
    Ok(GridReport {
        qs: qs.to_vec(),
        taus: taus.to_vec(),
        entropy,
        cells,
        varsigma_norm,
    })
}

fn sweep_segment<F>(
    make: &F,
    qs: &[f64],
    entropy: EntropySpec,
    grid: TimeGrid,
    nodes: Vec<usize>,
) -> Result<Vec<Vec<QslReport>>>
where
    F: Fn(&TimeGrid) -> Result<Trajectory> + Sync,
{
    let (mut grid, mut nodes) = (grid, nodes);
    loop {
        let traj = make(&grid)?;
        let per_q: Vec<Vec<QslReport>> = qs
            .par_iter()
            .map(|&q| match entropy.params(q) {
                Some(params) => qsl_profile(&traj, &params, &nodes),
                None => Ok(vec![QslReport::invalid(f64::NAN); nodes.len()]),
            })
            .collect::<Result<_>>()?;
        let settled = per_q.iter().flatten().all(|r| r.converged || r.trivial);
        if settled {
            return Ok(per_q);
        }
        match grid.refined() {
            Ok(finer) => {
                grid = finer;
                nodes.iter_mut().for_each(|k| *k *= 2);
            }
            Err(_) => return Ok(per_q),
        }
    }
}
