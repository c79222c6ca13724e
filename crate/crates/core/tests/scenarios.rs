use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use smqsl::dynamics::NonHermitianModel;
use smqsl::dynamics::{amplitude_damping, neel_mixed_state, BipartiteEvolution, BipartiteModel, TimeGrid, Trajectory};
use smqsl::matrix::{c64, identity, kron, sigma_x, sigma_z};
use smqsl::qsl::{entropy_rate_bound_check, manybody_bound_trajectory, manybody_qsl, nh_qsl, sweep, EntropySpec};
use smqsl::verify::{ad_reference_grid, pt_reference_grid, reference_bloch};
use smqsl::{BlochVector, DensityMatrix, EntropyParams, Observable, Subsystem};

fn two_site(j: f64) -> (BipartiteModel, DensityMatrix) {
    let model = BipartiteModel::xxz(2, 1, j, 1.0).unwrap();
    let (rho0, _) = neel_mixed_state(2, 0.25).unwrap();
    (model, rho0)
}

#[test]
fn two_site_entropy_change_has_period_pi_over_2j() {
    let params = EntropyParams::renyi(0.5).unwrap();
    for j in [0.5, 1.0] {
        let (model, rho0) = two_site(j);
        let period = FRAC_PI_2 / j;
        for tau in [0.3, 0.7, 1.1] {
            let a = manybody_qsl(&model, &rho0, Subsystem::A, &params, tau, 0.01).unwrap();
            let b = manybody_qsl(&model, &rho0, Subsystem::A, &params, tau + period, 0.01).unwrap();
            assert!((a.delta_s - b.delta_s).abs() < 1e-12, "J = {j}, τ = {tau}");
            assert!(a.delta_s > 1e-3);
        }
        for k in 1..=2 {
            let r = manybody_qsl(&model, &rho0, Subsystem::A, &params, k as f64 * period, 0.01).unwrap();
            assert!(r.delta_s < 1e-12 && r.tau_qsl < 1e-12, "J = {j}, k = {k}");
        }
        // The half period swaps the two populations, so only the quarter period is maximal.
        let half = manybody_qsl(&model, &rho0, Subsystem::A, &params, 0.5 * period, 0.01).unwrap();
        let quarter = manybody_qsl(&model, &rho0, Subsystem::A, &params, 0.25 * period, 0.01).unwrap();
        assert!(half.delta_s < 1e-12);
        assert!((quarter.delta_s - (2.0f64.ln() - a_max_entropy_gap())).abs() < 1e-12);
    }
}

// Rényi-1/2 entropy of diag(3/8, 5/8).
fn a_max_entropy_gap() -> f64 {
    2.0 * ((0.375f64).sqrt() + (0.625f64).sqrt()).ln()
}

#[test]
fn decoupled_product_state_has_no_speed_limit() {
    let h_a = Observable::new(sigma_x()).unwrap();
    let h_b = Observable::new(sigma_z() * c64(0.7, 0.0)).unwrap();
    let h_ab = Observable::new(identity(4) * c64(0.0, 0.0)).unwrap();
    let model = BipartiteModel::new(h_a, h_b, h_ab).unwrap();
    let a = BlochVector::new(0.6, 1.0, 0.3).unwrap().density_matrix();
    let b = BlochVector::new(0.4, 2.0, 1.0).unwrap().density_matrix();
    let rho0 = DensityMatrix::new(kron(a.matrix(), b.matrix())).unwrap();
    for params in [
        EntropyParams::renyi(0.3).unwrap(),
        EntropyParams::new(0.4, 0.8).unwrap(),
    ] {
        let r = manybody_qsl(&model, &rho0, Subsystem::A, &params, 2.0, 0.01).unwrap();
        assert!(r.delta_s < 1e-12);
        assert!(r.tau_qsl < 1e-10);
        assert!((r.varsigma - 1.0).abs() < 1e-10);
    }
}

#[test]
fn entropy_rate_inequality_on_reduced_chain() {
    let model = BipartiteModel::xxz(4, 2, 1.0, 0.5).unwrap();
    let (rho0, _) = neel_mixed_state(4, 0.7).unwrap();
    let grid = TimeGrid::new(2.0, 400).unwrap();
    let traj = Trajectory::generate(&BipartiteEvolution::new(&model, rho0, Subsystem::A).unwrap(), &grid).unwrap();
    let margins = entropy_rate_bound_check(&traj, &EntropyParams::new(0.4, 0.8).unwrap()).unwrap();
    assert!(
        margins.iter().all(|&m| m <= 1e-6),
        "max margin {}",
        margins.iter().fold(f64::MIN, |a, &b| a.max(b))
    );
}

#[test]
fn entropy_rate_inequality_under_damping() {
    let grid = TimeGrid::new(5.0, 1000).unwrap();
    let traj = amplitude_damping(&reference_bloch(), 1.0, &grid).unwrap();
    let margins = entropy_rate_bound_check(&traj, &EntropyParams::new(0.3, 0.6).unwrap()).unwrap();
    assert!(margins.iter().all(|&m| m <= 1e-6));
}

#[test]
fn manybody_sweep_matches_pointwise_limits() {
    let (model, rho0) = two_site(0.5);
    let qs = [0.3, 0.6];
    let taus = [0.5, 1.0, 2.5];
    let grid = sweep(
        |g: &TimeGrid| manybody_bound_trajectory(&model, &rho0, Subsystem::A, g),
        &qs,
        EntropySpec::SharmaMittal(0.8),
        &taus,
        0.01,
    )
    .unwrap();
    for (i, &q) in qs.iter().enumerate() {
        let params = EntropyParams::new(q, 0.8).unwrap();
        for (j, &tau) in taus.iter().enumerate() {
            let direct = manybody_qsl(&model, &rho0, Subsystem::A, &params, tau, 0.01).unwrap();
            let cell = grid.cell(i, j);
            assert!((cell.delta_s - direct.delta_s).abs() < 1e-12);
            assert!((cell.gamma - direct.gamma).abs() <= 1e-6 * direct.gamma);
        }
    }
}

#[test]
fn long_damping_window_is_loose() {
    let grid = ad_reference_grid(EntropySpec::SharmaMittal(0.75)).unwrap();
    let peak = grid
        .cells
        .iter()
        .filter(|c| c.valid)
        .map(|c| c.tau_qsl)
        .fold(0.0, f64::max);
    let i = grid.qs.iter().position(|&q| (q - 0.5).abs() < 1e-9).unwrap();
    let j = grid.taus.len() - 1;
    assert!((grid.taus[j] - 20.0).abs() < 1e-9);
    assert!(grid.cell(i, j).tau_qsl <= 1e-2 * peak);
}

#[test]
fn broken_pt_limit_fades_as_the_state_purifies() {
    let grid = pt_reference_grid(2.0, EntropySpec::SharmaMittal(0.5), false).unwrap();
    let (i, j) = grid.argmax_tau_qsl().unwrap();
    // Cells with q > z are invalid.
    assert!(grid.qs[i] <= 0.5 + 1e-12);
    assert!(grid.taus[j] < 1.0, "peak at ωτ = {}", grid.taus[j]);
    // Past the peak λ_min → 0 drives Γ up and the limit decays.
    for i in 0..grid.qs.len() {
        let row: Vec<f64> = (j..grid.taus.len()).map(|k| grid.cell(i, k).tau_qsl).collect();
        if grid.cell(i, j).valid {
            assert!(row.windows(2).all(|w| w[1] <= w[0]), "q = {}", grid.qs[i]);
        }
    }
}

#[test]
fn unbroken_pt_nearly_returns() {
    let model = NonHermitianModel::pt_symmetric(1.0, 0.5).unwrap();
    let rho0 = reference_bloch().density_matrix();
    let params = EntropyParams::tsallis(0.5).unwrap();
    let limit = |tau: f64| nh_qsl(&model, &rho0, &params, tau, false, 0.01).unwrap();
    let at_three = limit(3.0);
    let earlier = limit(1.5);
    assert!(
        at_three.tau_qsl < 0.25 * earlier.tau_qsl,
        "{} vs {}",
        at_three.tau_qsl,
        earlier.tau_qsl
    );
    assert!(at_three.varsigma > earlier.varsigma);
}

#[test]
fn reference_state_spectrum() {
    let rho = BlochVector::new(0.5, FRAC_PI_4, FRAC_PI_4).unwrap().density_matrix();
    let s = rho.spectrum();
    assert!((s[0] - 0.25).abs() < 1e-14 && (s[1] - 0.75).abs() < 1e-14);
}
