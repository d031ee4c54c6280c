//! Randomized invariants of the solvers.

use exactme::correlations::{bm_reference, bm_series, exact_series, nonmarkov_measure};
use exactme::greens::{solve_u, solve_v, ScalarSpectrum, VOptions};
use exactme::linalg::{spectral_norm, CMatrix};
use exactme::mastereq::{
    compute_coefficients, generator_apply, lindblad_form, occupation, propagate_rho, Basis, DensityMatrix,
    PropagationOptions,
};
use exactme::models::{model_dynamics, ModelKind, SpecialModel};
use exactme::spectral::{Band, Coupling, ReservoirSpec, SpectralDensity, Statistics, SystemSpec};
use exactme::TimeGrid;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn density() -> impl Strategy<Value = SpectralDensity> {
    prop_oneof![
        (0.01..1.0f64, 0.5..3.0f64, 0.5..10.0f64).prop_map(|(e, s, w)| SpectralDensity::ohmic(e, s, w).unwrap()),
        (0.01..1.0f64, -2.0..2.0f64, 0.2..3.0f64).prop_map(|(e, x, w)| SpectralDensity::lorentzian(e, x, w).unwrap()),
        (0.01..1.0f64, -3.0..0.0f64, 0.5..4.0f64).prop_map(|(k, a, w)| SpectralDensity::flat_band(k, a, a + w).unwrap()),
        (0.01..1.0f64, 0.01..1.0f64, 0.1..2.0f64).prop_map(|(k1, k2, gap)| SpectralDensity::gapped(vec![
            Band::flat(k1, -2.0, -gap / 2.0),
            Band::flat(k2, gap / 2.0, 2.0),
        ])
        .unwrap()),
        prop::collection::vec(0.0..1.0f64, 3..8).prop_map(|ys| {
            let n = ys.len();
            let samples = ys
                .into_iter()
                .enumerate()
                .map(|(i, y)| (i as f64 / (n - 1) as f64 * 4.0 - 2.0, if i == 0 || i == n - 1 { 0.0 } else { y }))
                .collect();
            SpectralDensity::tabulated(samples).unwrap()
        }),
    ]
}

fn ohmic_system(stats: Statistics, eta: f64, s: f64, wc: f64, t: f64, mu: f64, eps: f64) -> SystemSpec {
    let bath = ReservoirSpec::new(stats, t, mu, SpectralDensity::ohmic(eta, s, wc).unwrap()).unwrap();
    SystemSpec::scalar(stats, eps, vec![bath]).unwrap()
}

fn two_level_fermion(eta: f64, t: f64, mu: f64, hop: f64) -> SystemSpec {
    let bath = ReservoirSpec::new(Statistics::Fermion, t, mu, SpectralDensity::flat_band(eta, -3.0, 3.0).unwrap()).unwrap();
    let energy = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(hop, 0.0), c(hop, 0.0), c(-0.3, 0.0)]);
    let weights = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.3, 0.0), c(0.3, 0.0), c(0.5, 0.0)]);
    SystemSpec::new(
        Statistics::Fermion,
        energy,
        vec![Coupling {
            reservoir: bath,
            weights,
        }],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_density_is_nonnegative(d in density(), e in -20.0..20.0f64) {
        prop_assert!(d.evaluate_j(e).unwrap() >= 0.0);
    }

    #[test]
    fn fermi_distribution_decreases(t in 0.05..5.0f64, mu in -2.0..2.0f64, e1 in -5.0..5.0f64, de in 1e-3..3.0f64) {
        let r = ReservoirSpec::new(Statistics::Fermion, t, mu, SpectralDensity::flat_band(0.1, -10.0, 10.0).unwrap()).unwrap();
        prop_assert!(r.distribution(e1 + de).unwrap() <= r.distribution(e1).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flat_band_shift_is_logarithmic(k in 0.01..2.0f64, a in -3.0..0.0f64, w in 0.5..5.0f64, x in -6.0..6.0f64) {
        let b = a + w;
        prop_assume!((x - a).abs() > 1e-3 && (x - b).abs() > 1e-3);
        let d = SpectralDensity::flat_band(k, a, b).unwrap();
        let exact = k / (2.0 * std::f64::consts::PI) * ((x - a) / (x - b)).abs().ln();
        prop_assert!((d.lamb_shift(x).unwrap() - exact).abs() < 1e-6);
    }

    #[test]
    fn lamb_shift_continuous_at_vanishing_edge(eta in 0.01..1.0f64, s in 1.0..3.0f64, wc in 0.5..10.0f64) {
        let d = SpectralDensity::ohmic(eta, s, wc).unwrap();
        let h = 1e-7;
        let jump = (d.lamb_shift(h).unwrap() - d.lamb_shift(-h).unwrap()).abs();
        prop_assert!(jump < 1e-4 * d.lamb_shift(-1.0).unwrap().abs().max(1e-3), "jump {jump}");
    }

    #[test]
    fn sum_rule_holds(d in density(), eps in -1.5..1.5f64) {
        let r = ReservoirSpec::new(Statistics::Fermion, 0.0, 0.0, d).unwrap();
        let sys = SystemSpec::scalar(Statistics::Fermion, eps, vec![r]).unwrap();
        let Ok(spec) = ScalarSpectrum::new(&sys) else { return Ok(()) };
        let total = spec.sum_rule().unwrap();
        prop_assert!((total - 1.0).abs() < 1e-3, "sum rule {total}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn propagator_contracts_and_starts_at_identity(eta in 0.01..0.8f64, s in 0.5..2.0f64, wc in 0.5..5.0f64, eps in 0.2..2.0f64) {
        let sys = ohmic_system(Statistics::Boson, eta, s, wc, 0.0, 0.0, eps);
        let grid = TimeGrid::with_horizon(10.0, 0.02).unwrap();
        let gf = solve_u(&sys, &grid).unwrap();
        prop_assert_eq!(gf.u.entry(0, 0, 0), c(1.0, 0.0));
        for k in 0..grid.len() {
            prop_assert!(spectral_norm(&gf.u.matrix(k)) <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn correlation_is_hermitian_and_positive(eta in 0.01..0.5f64, t in 0.0..3.0f64, mu in -1.0..1.0f64) {
        let sys = two_level_fermion(eta, t, mu, 0.2);
        let grid = TimeGrid::with_horizon(6.0, 0.02).unwrap();
        let gf = solve_v(&sys, solve_u(&sys, &grid).unwrap(), &VOptions { anchors: vec![50, 120], max_lag: 100 }).unwrap();
        for k in 0..grid.len() {
            let v = gf.v_diag_matrix(k).unwrap();
            prop_assert!(exactme::linalg::hermitian_eigenvalues(&v)[0] > -1e-10);
        }
        // v(t_p, t_q)† = v(t_q, t_p) from two independently computed slices.
        let a = gf.v_slices[&50].values.matrix(120);
        let b = gf.v_slices[&120].values.matrix(50);
        prop_assert!(exactme::linalg::max_abs_diff(&a, &b.adjoint()) < 1e-10);
    }

    #[test]
    fn dissipation_rate_matches_decay_of_u(eta in 0.01..0.6f64, s in 0.5..2.0f64, wc in 0.5..5.0f64, temp in 0.0..2.0f64) {
        let sys = ohmic_system(Statistics::Boson, eta, s, wc, temp, 0.0, 1.0);
        let grid = TimeGrid::with_horizon(10.0, 0.005).unwrap();
        let gf = solve_v(&sys, solve_u(&sys, &grid).unwrap(), &VOptions::default()).unwrap();
        let coef = compute_coefficients(&gf).unwrap();
        let gamma = coef.gamma_scalar();
        let p: Vec<f64> = gf.u_scalar().iter().map(|u| u.norm_sqr()).collect();
        let h = grid.dt;
        for k in 2..grid.len() - 2 {
            if p[k] < 1e-3 {
                continue;
            }
            let dp = (p[k - 2] - 8.0 * p[k - 1] + 8.0 * p[k + 1] - p[k + 2]) / (12.0 * h);
            prop_assert!((dp + 2.0 * gamma[k] * p[k]).abs() < 1e-6, "k = {k}: {dp} vs {}", -2.0 * gamma[k] * p[k]);
        }
    }

    #[test]
    fn coefficients_start_from_bare_values(eta in 0.01..0.5f64, temp in 0.0..2.0f64, mu in -1.0..1.0f64, hop in -0.5..0.5f64) {
        let sys = two_level_fermion(eta, temp, mu, hop);
        let grid = TimeGrid::with_horizon(1.0, 0.01).unwrap();
        let gf = solve_v(&sys, solve_u(&sys, &grid).unwrap(), &VOptions::default()).unwrap();
        let c0 = compute_coefficients(&gf).unwrap().at(0);
        prop_assert!(exactme::linalg::max_abs_diff(&c0.eps_prime, &sys.energy) < 1e-12);
        prop_assert!(c0.gamma.norm() < 1e-12);
        prop_assert!(c0.gamma_tilde.norm() < 1e-12);
    }

    #[test]
    fn fermion_density_matrix_tracks_green_functions(eta in 0.05..0.5f64, temp in 0.0..2.0f64, mu in -1.0..1.0f64, occ in 0usize..4) {
        let sys = two_level_fermion(eta, temp, mu, 0.2);
        let grid = TimeGrid::with_horizon(5.0, 0.01).unwrap();
        let gf = solve_v(&sys, solve_u(&sys, &grid).unwrap(), &VOptions::default()).unwrap();
        let coef = compute_coefficients(&gf).unwrap();
        let occupations = [occ >> 1, occ & 1];
        let rho0 = DensityMatrix::fock(Basis::FermionFock { modes: 2 }, &occupations).unwrap();
        let traj = propagate_rho(&rho0, &coef, &PropagationOptions::default()).unwrap();
        prop_assert!(traj.trace_drift < 1e-8);
        prop_assert!(traj.min_eigenvalue >= -1e-8);
        let n0 = rho0.occupation_matrix();
        let n = occupation(&gf, &n0).unwrap();
        for (k, rho) in traj.steps.iter().zip(&traj.states) {
            prop_assert!(exactme::linalg::hermiticity_defect(&rho.matrix) < 1e-14);
            prop_assert!(exactme::linalg::max_abs_diff(&rho.occupation_matrix(), &n.matrix(*k)) < 1e-4);
        }
    }

    #[test]
    fn fermion_coherence_follows_propagator(eta in 0.05..0.8f64, mu in -1.0..1.0f64, theta in 0.3..1.3f64) {
        let sys = ohmic_system(Statistics::Fermion, eta, 1.0, 5.0, 0.0, mu, 1.0);
        let grid = TimeGrid::with_horizon(8.0, 0.005).unwrap();
        let gf = solve_v(&sys, solve_u(&sys, &grid).unwrap(), &VOptions::default()).unwrap();
        let coef = compute_coefficients(&gf).unwrap();
        let psi = [c(theta.cos(), 0.0), c(theta.sin(), 0.0)];
        let rho0 = DensityMatrix::pure(Basis::FermionFock { modes: 1 }, &psi).unwrap();
        let traj = propagate_rho(&rho0, &coef, &PropagationOptions::default()).unwrap();
        // ⟨a⟩ = ρ_{10} evolves as u(t) ⟨a⟩₀.
        let a0 = rho0.matrix[(1, 0)];
        for (k, rho) in traj.steps.iter().zip(&traj.states) {
            let ratio = rho.matrix[(1, 0)] / a0;
            prop_assert!((ratio - gf.u.entry(*k, 0, 0)).norm() < 1e-6);
        }
    }

    #[test]
    fn lindblad_form_matches_generator(
        eta in 0.05..0.5f64, temp in 0.0..2.0f64, k in 1usize..100,
        re in prop::collection::vec(-1.0..1.0f64, 16), im in prop::collection::vec(-1.0..1.0f64, 16),
    ) {
        // Fermions: identical. Truncated bosons: identical when the top
        // Fock level carries no weight.
        let grid = TimeGrid::with_horizon(2.0, 0.02).unwrap();
        for (stats, basis) in [
            (Statistics::Fermion, Basis::FermionFock { modes: 1 }),
            (Statistics::Boson, Basis::BosonFock { cutoff: 3 }),
        ] {
            let sys = ohmic_system(stats, eta, 1.0, 5.0, temp, -0.5, 1.0);
            let gf = solve_v(&sys, solve_u(&sys, &grid).unwrap(), &VOptions::default()).unwrap();
            let set = compute_coefficients(&gf).unwrap().at(k);
            let dim = basis.dim();
            let top = if stats == Statistics::Boson { dim - 1 } else { dim };
            let a = CMatrix::from_fn(dim, dim, |i, j| if i < top && j < top { c(re[4 * i + j], im[4 * i + j]) } else { c(0.0, 0.0) });
            let m = &a * a.adjoint();
            let m = m.clone() / m.trace();
            let rho = DensityMatrix::new(basis, m).unwrap();
            let g = generator_apply(&rho, &set, stats).unwrap();
            let l = lindblad_form(&set, stats).apply(&rho).unwrap();
            prop_assert!(exactme::linalg::max_abs_diff(&g, &l) < 1e-12);
        }
    }
}

fn two_level_state(p: f64, re: f64, im: f64) -> CMatrix {
    let r = (p * (1.0 - p)).sqrt();
    CMatrix::from_row_slice(2, 2, &[c(p, 0.0), c(re * r, -im * r), c(re * r, im * r), c(1.0 - p, 0.0)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn special_models_preserve_trace_and_hermiticity(
        eta in 0.02..0.5f64, p in 0.0..1.0f64, re in -0.7..0.7f64, im in -0.7..0.7f64,
    ) {
        let rho0 = two_level_state(p, re, im);
        let grid = TimeGrid::with_horizon(5.0, 0.01).unwrap();
        let boson = ReservoirSpec::new(Statistics::Boson, 0.0, 0.0, SpectralDensity::ohmic(eta, 1.0, 5.0).unwrap()).unwrap();
        let fermion = ReservoirSpec::new(Statistics::Fermion, 0.5, 0.0, SpectralDensity::flat_band(eta, -4.0, 4.0).unwrap()).unwrap();
        for m in [
            SpecialModel::new(ModelKind::SpinZeroT, boson.clone(), 1.0).unwrap(),
            SpecialModel::new(ModelKind::PureDephasing, boson, 1.0).unwrap(),
            SpecialModel::new(ModelKind::Majorana, fermion, 0.0).unwrap(),
        ] {
            let traj = model_dynamics(&m, &grid, &rho0).unwrap();
            for rho in &traj.states {
                prop_assert!((rho.trace() - c(1.0, 0.0)).norm() < 1e-10);
                prop_assert!(exactme::linalg::hermiticity_defect(rho) < 1e-10);
            }
        }
    }

    #[test]
    fn spin_dynamics_is_the_single_excitation_solution(eta in 0.02..0.5f64, s in 0.5..2.0f64, p in 0.0..1.0f64, re in -0.7..0.7f64) {
        let bath = ReservoirSpec::new(Statistics::Boson, 0.0, 0.0, SpectralDensity::ohmic(eta, s, 2.0).unwrap()).unwrap();
        let m = SpecialModel::new(ModelKind::SpinZeroT, bath.clone(), 1.0).unwrap();
        let grid = TimeGrid::with_horizon(6.0, 0.01).unwrap();
        // Basis (|g⟩, |e⟩): excited population in entry (1,1).
        let rho0 = two_level_state(1.0 - p, re, 0.0);
        let traj = model_dynamics(&m, &grid, &rho0).unwrap();
        let sys = SystemSpec::scalar(Statistics::Boson, 1.0, vec![bath]).unwrap();
        let u = solve_u(&sys, &grid).unwrap().u_scalar();
        for (k, rho) in traj.states.iter().enumerate() {
            prop_assert!((rho[(1, 1)].re - u[k].norm_sqr() * p).abs() < 1e-6);
            prop_assert!((rho[(1, 0)] - u[k] * rho0[(1, 0)]).norm() < 1e-6);
        }
    }

    #[test]
    fn dephasing_is_unital(eta in 0.02..0.5f64, temp in 0.0..2.0f64) {
        let bath = ReservoirSpec::new(Statistics::Boson, temp, 0.0, SpectralDensity::ohmic(eta, 1.0, 5.0).unwrap()).unwrap();
        let m = SpecialModel::new(ModelKind::PureDephasing, bath, 1.0).unwrap();
        let grid = TimeGrid::with_horizon(5.0, 0.01).unwrap();
        let mixed = two_level_state(0.5, 0.0, 0.0);
        let traj = model_dynamics(&m, &grid, &mixed).unwrap();
        for rho in &traj.states {
            prop_assert!(exactme::linalg::max_abs_diff(rho, &mixed) < 1e-10);
        }
    }

    #[test]
    fn majorana_purity_decreases_while_rate_is_positive(eta in 0.05..1.0f64, temp in 0.0..2.0f64, re in -1.0..1.0f64) {
        let bath = ReservoirSpec::new(Statistics::Fermion, temp, 0.0, SpectralDensity::lorentzian(eta, 0.0, 1.0).unwrap()).unwrap();
        let m = SpecialModel::new(ModelKind::Majorana, bath, 0.0).unwrap();
        let grid = TimeGrid::with_horizon(8.0, 0.01).unwrap();
        let traj = model_dynamics(&m, &grid, &two_level_state(0.5, re, 0.0)).unwrap();
        let purity: Vec<f64> = traj.states.iter().map(|r| (r * r).trace().re).collect();
        for k in 1..purity.len() {
            if traj.rate[k - 1] >= 0.0 && traj.rate[k] >= 0.0 {
                prop_assert!(purity[k] <= purity[k - 1] + 1e-12);
            }
        }
    }

    #[test]
    fn measure_is_bounded_and_vanishes_at_zero_lag(eta in 0.01..0.5f64, temp in 0.0..2.0f64) {
        let sys = ohmic_system(Statistics::Boson, eta, 1.0, 5.0, temp, 0.0, 1.0);
        let grid = TimeGrid::with_horizon(20.0, 0.02).unwrap();
        let anchors = vec![1, 50, 250, 500];
        let gf = solve_v(&sys, solve_u(&sys, &grid).unwrap(), &VOptions { anchors: anchors.clone(), max_lag: 500 }).unwrap();
        let exact = exact_series(&gf, 1.0, &anchors, 500).unwrap();
        let bm = bm_series(&bm_reference(&sys).unwrap(), 1.0, &exact.base_times, &exact.lags, 0.0);
        for a in 0..anchors.len() {
            if let Some(m0) = nonmarkov_measure(&exact, &bm, a, 0).unwrap() {
                prop_assert!(m0 < 1e-12);
            }
            for l in 0..exact.lags.len() {
                if let Some(m) = nonmarkov_measure(&exact, &bm, a, l).unwrap() {
                    prop_assert!((0.0..=2.0).contains(&m));
                }
            }
        }
    }

    #[test]
    fn reversed_two_time_correlator_is_the_conjugate(eta in 0.02..0.5f64, temp in 0.0..2.0f64, q in 10usize..200, l in 1usize..200) {
        let sys = ohmic_system(Statistics::Boson, eta, 1.0, 5.0, temp, 0.0, 1.0);
        let grid = TimeGrid::with_horizon(10.0, 0.02).unwrap();
        let p = q + l;
        let gf = solve_v(&sys, solve_u(&sys, &grid).unwrap(), &VOptions { anchors: vec![q, p], max_lag: 0 }).unwrap();
        let n0 = 1.0;
        let forward = exactme::correlations::exact_two_time(&gf, n0, grid.time(q), grid.elapsed(l)).unwrap();
        // ⟨a†(t+τ) a(t)⟩ from the slice anchored at t+τ.
        let u = gf.u_scalar();
        let backward = u[p].conj() * u[q] * n0 + gf.v_slices[&p].values.entry(q, 0, 0);
        prop_assert!((forward - backward.conj()).norm() < 1e-8);
    }
}

#[test]
fn weak_wide_band_measure_vanishes_after_transient() {
    // Flat band 400κ wide, centred on the level.
    let kappa = 0.1;
    let r = ReservoirSpec::new(Statistics::Fermion, 1.0, 1.0, SpectralDensity::flat_band(kappa, -19.0, 21.0).unwrap()).unwrap();
    let sys = SystemSpec::scalar(Statistics::Fermion, 1.0, vec![r]).unwrap();
    let dt = 0.01;
    let grid = TimeGrid::with_horizon(200.0, dt).unwrap();
    let lag = (10.0 / kappa / dt) as usize;
    let anchor = (10.0 / kappa / dt) as usize;
    let gf = solve_v(&sys, solve_u(&sys, &grid).unwrap(), &VOptions { anchors: vec![anchor], max_lag: lag }).unwrap();
    let exact = exact_series(&gf, 1.0, &[anchor], lag).unwrap();
    let bm = bm_series(&bm_reference(&sys).unwrap(), 1.0, &exact.base_times, &exact.lags, 0.0);
    let sup = exactme::correlations::sup_measure(&exact, &bm, 0).unwrap().unwrap();
    assert!(sup < 0.05, "sup measure {sup}");
}
