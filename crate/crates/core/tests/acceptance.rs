//! Acceptance checks: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). Every line reports the
//! measured quantity next to its tolerance; the process exits with status 0
//! so that a known shortfall is reported rather than aborting the suite.

use std::f64::consts::PI;
use std::time::Instant;

use exactme::correlations::{bm_reference, bm_series, exact_series, sup_measure};
use exactme::greens::{find_bound_states, reconstruct_u, solve_u, solve_v, ScalarSpectrum, VOptions};
use exactme::linalg::CMatrix;
use exactme::mastereq::{compute_coefficients, propagate_rho, DensityMatrix, PropagationOptions};
use exactme::models::{model_dynamics, ModelKind, SpecialModel};
use exactme::spectral::{Band, ReservoirSpec, SpectralDensity, Statistics, SystemSpec};
use exactme::{GreenFunctions, Result, TimeGrid};
use num_complex::Complex64;

const EPS: f64 = 1.0;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn system(stats: Statistics, temp: f64, mu: f64, d: SpectralDensity) -> SystemSpec {
    let r = ReservoirSpec::new(stats, temp, mu, d).expect("valid reservoir");
    SystemSpec::scalar(stats, EPS, vec![r]).expect("valid system")
}

fn ohmic(eta: f64, s: f64, wc: f64) -> SpectralDensity {
    SpectralDensity::ohmic(eta, s, wc).expect("valid ohmic density")
}

fn green(sys: &SystemSpec, t_max: f64, dt: f64) -> Result<GreenFunctions> {
    let grid = TimeGrid::with_horizon(t_max, dt)?;
    solve_v(sys, solve_u(sys, &grid)?, &VOptions::default())
}

fn v_scalar(gf: &GreenFunctions, k: usize) -> f64 {
    gf.v_diag.as_ref().expect("v solved").entry(k, 0, 0).re
}

type Check = fn() -> Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

// 1 ------------------------------------------------------------------------

fn decoupled_errors(dt: f64, n: usize) -> Result<(f64, f64)> {
    let sys = system(Statistics::Boson, 1.0, 0.0, ohmic(0.0, 1.0, 5.0));
    let grid = TimeGrid::new(0.0, dt, n)?;
    let gf = solve_v(&sys, solve_u(&sys, &grid)?, &VOptions::default())?;
    let coef = compute_coefficients(&gf)?;
    let u = gf.u_scalar();
    let du = (0..grid.len())
        .map(|k| (u[k] - Complex64::from_polar(1.0, -EPS * grid.time(k))).norm())
        .fold(0.0, f64::max);
    let g = coef
        .gamma_scalar()
        .iter()
        .chain(coef.gamma_tilde_scalar().iter())
        .fold(0.0f64, |m, x| m.max(x.abs()));
    Ok((du, g))
}

fn decoupled() -> Result<Outcome> {
    let start = Instant::now();
    let (du, g) = decoupled_errors(0.01, 5000)?;
    let secs = start.elapsed().as_secs_f64();
    outcome(
        du < 1e-10 && g < 1e-10 && secs < 1.0,
        format!("max|u − e^(−iεt)| = {du:.2e}, max|γ|,|γ̃| = {g:.2e} (< 1e-10); 5000 steps in {secs:.3} s (< 1 s)"),
    )
}

// 2 ------------------------------------------------------------------------

const KAPPA: f64 = 0.5;

fn wide_band(stats: Statistics) -> SystemSpec {
    // Width 100ε_s centred on ε_s; bosons need μ below the band bottom.
    let d = SpectralDensity::flat_band(KAPPA, EPS - 50.0, EPS + 50.0).unwrap();
    match stats {
        Statistics::Fermion => system(stats, EPS, EPS, d),
        Statistics::Boson => system(stats, EPS, EPS - 51.0, d),
    }
}

fn wide_band_markov() -> Result<Outcome> {
    let dt = 0.002;
    let t_max = 30.0;
    let mut worst_u = 0.0f64;
    let mut details = Vec::new();
    let mut pass = true;
    for stats in [Statistics::Fermion, Statistics::Boson] {
        let sys = wide_band(stats);
        let gf = green(&sys, t_max, dt)?;
        let u = gf.u_scalar();
        for (k, uk) in u.iter().enumerate() {
            let t = gf.grid.elapsed(k);
            if KAPPA * t <= 5.0 {
                let m = (-0.5 * KAPPA * t).exp();
                worst_u = worst_u.max((uk.norm() - m).abs() / m);
            }
        }
        let last = gf.grid.n_steps;
        // Initially occupied level: n = |u|² + v.
        let n = u[last].norm_sqr() + v_scalar(&gf, last);
        let f = sys.couplings[0].reservoir.distribution(EPS)?;
        let err = (n - f).abs();
        let ok = match stats {
            Statistics::Fermion => err / f < 0.01,
            Statistics::Boson => err < 0.01,
        };
        pass &= ok;
        details.push(format!("{stats:?} n(t_s) = {n:.6}, f = {f:.3e}, |n − f| = {err:.2e}"));
    }
    pass &= worst_u < 0.02;
    outcome(
        pass,
        format!(
            "κ = {KAPPA}, band [−49, 51]: max rel. ||u| − e^(−κt/2)| = {worst_u:.2e} (< 2%); {} (< 1%)",
            details.join("; ")
        ),
    )
}

// 3 ------------------------------------------------------------------------

fn catalog(eta: f64) -> Vec<(&'static str, SpectralDensity)> {
    let table: Vec<(f64, f64)> = [(-1.0, 0.0), (0.0, 0.6), (1.0, 1.0), (2.0, 0.4), (3.0, 0.0)]
        .iter()
        .map(|&(e, j)| (e, eta * j))
        .collect();
    vec![
        ("sub-ohmic", ohmic(eta, 0.5, 1.0)),
        ("ohmic", ohmic(eta, 1.0, 5.0)),
        ("super-ohmic", ohmic(eta, 2.0, 2.0)),
        ("lorentzian", SpectralDensity::lorentzian(eta, 1.0, 0.5).unwrap()),
        ("flat", SpectralDensity::flat_band(eta, -1.0, 3.0).unwrap()),
        (
            "gapped",
            SpectralDensity::gapped(vec![Band::flat(eta, -2.0, 0.5), Band::flat(eta, 1.5, 4.0)]).unwrap(),
        ),
        ("tabulated", SpectralDensity::tabulated(table).unwrap()),
    ]
}

fn sum_rule() -> Result<Outcome> {
    let mut worst = (0.0f64, String::new());
    let mut pass = true;
    for eta in [0.05, 0.3, 0.8] {
        for (name, d) in catalog(eta) {
            let sys = system(Statistics::Fermion, 1.0, 0.0, d);
            let err = (ScalarSpectrum::new(&sys)?.sum_rule()? - 1.0).abs();
            pass &= err < 1e-3;
            if err >= worst.0 {
                worst = (err, format!("{name}, η = {eta}"));
            }
        }
    }
    outcome(
        pass,
        format!("7 densities × 3 couplings: worst |Σ Z_b + ∫D_d − 1| = {:.2e} ({}) (< 1e-3)", worst.0, worst.1),
    )
}

// 4 ------------------------------------------------------------------------

fn cross_method() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    // Below and above the bound-state threshold η_c ≈ 0.564.
    for eta in [0.1, 0.8] {
        let sys = system(Statistics::Boson, 0.0, 0.0, ohmic(eta, 0.5, EPS));
        let grid = TimeGrid::with_horizon(20.0, 0.01)?;
        let u = solve_u(&sys, &grid)?.u_scalar();
        let r = reconstruct_u(&sys, &grid)?;
        let err = u.iter().zip(&r).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst = worst.max(err);
        parts.push(format!("η = {eta}: {err:.2e}"));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-2 && secs < 30.0,
        format!("s = ½, ε_c = ε_s, max|u_volterra − u_reconstructed| on [0, 20]: {} (≤ 1e-2); {secs:.2} s (< 30 s)", parts.join(", ")),
    )
}

// 5 ------------------------------------------------------------------------

fn bound_count(eta: f64, s: f64, wc: f64) -> Result<usize> {
    Ok(find_bound_states(&system(Statistics::Boson, 0.0, 0.0, ohmic(eta, s, wc)))?.len())
}

fn bisect_threshold(s: f64, wc: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if bound_count(mid, s, wc)? == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn threshold() -> Result<Outcome> {
    let below = bound_count(0.19, 1.0, 5.0)?;
    let above = bound_count(0.21, 1.0, 5.0)?;
    let ohmic_c = bisect_threshold(1.0, 5.0, 0.1, 0.3)?;
    let sub_c = bisect_threshold(0.5, EPS, 0.3, 0.8)?;
    // Onset of the pole below the band: ε_s = η ε_c Γ(s).
    let oracle_ohmic = EPS / 5.0;
    let oracle_sub = EPS / PI.sqrt();
    let pass = below == 0
        && above == 1
        && (ohmic_c - 0.200).abs() <= 0.005
        && (sub_c - 0.564).abs() <= 0.005
        && (ohmic_c - oracle_ohmic).abs() <= 0.005
        && (sub_c - oracle_sub).abs() <= 0.005;
    outcome(
        pass,
        format!(
            "s = 1, ε_c = 5: {below} bound state(s) at η = 0.19, {above} at η = 0.21, η_c = {ohmic_c:.5} (0.200 ± 0.005; ε_s/(ε_cΓ(s)) = {oracle_ohmic:.5}); s = ½, ε_c = 1: η_c = {sub_c:.5} (0.564 ± 0.005; {oracle_sub:.5})"
        ),
    )
}

// 6 ------------------------------------------------------------------------

fn long_time() -> Result<Outcome> {
    let grid = TimeGrid::with_horizon(50.0, 0.01)?;
    let weak = system(Statistics::Boson, 0.0, 0.0, ohmic(0.05, 1.0, 5.0));
    let u = solve_u(&weak, &grid)?.u_scalar();
    let decayed = u[grid.n_steps].norm();
    let strong = system(Statistics::Boson, 0.0, 0.0, ohmic(0.3, 1.0, 5.0));
    let bound = find_bound_states(&strong)?;
    let z = bound.iter().map(|b| b.residue).sum::<f64>();
    let u = solve_u(&strong, &grid)?.u_scalar();
    let dev = (0..grid.len())
        .filter(|&k| grid.elapsed(k) >= 40.0 - 1e-9)
        .map(|k| (u[k].norm() - z).abs())
        .fold(0.0, f64::max);
    outcome(
        decayed < 1e-2 && bound.len() == 1 && dev < 1e-2,
        format!(
            "s = 1, ε_c = 5: η = 0.05 |u(50)| = {decayed:.2e} (< 1e-2); η = 0.3 Z_b = {z:.5}, max||u| − Z_b| on [40, 50] = {dev:.2e} (< 1e-2)"
        ),
    )
}

// 7 ------------------------------------------------------------------------

fn master_equation() -> Result<Outcome> {
    let start = Instant::now();
    let sys = system(Statistics::Boson, EPS, 0.0, ohmic(0.02, 0.5, EPS));
    let gf = green(&sys, 50.0, 0.01)?;
    let coef = compute_coefficients(&gf)?;
    let rho0 = DensityMatrix::coherent(20, c(1.0, 0.0))?;
    let n0 = rho0.occupation_matrix()[(0, 0)].re;
    let traj = propagate_rho(&rho0, &coef, &PropagationOptions::default())?;
    let secs = start.elapsed().as_secs_f64();
    let u = gf.u_scalar();
    let err = traj
        .steps
        .iter()
        .zip(&traj.states)
        .map(|(&k, rho)| (rho.occupation_matrix()[(0, 0)].re - (u[k].norm_sqr() * n0 + v_scalar(&gf, k))).abs())
        .fold(0.0, f64::max);
    outcome(
        err < 1e-4 && traj.trace_drift < 1e-8 && traj.min_eigenvalue >= -1e-8 && secs < 120.0,
        format!(
            "coherent α = 1, cutoff 20, η = 0.02, T = ε_s: max|⟨a†a⟩_ρ − (|u|² + v)| = {err:.2e} (< 1e-4), trace drift {:.1e} (< 1e-8), min eigenvalue {:.1e} (≥ −1e-8), {secs:.1} s (< 120 s)",
            traj.trace_drift, traj.min_eigenvalue
        ),
    )
}

// 8 ------------------------------------------------------------------------

fn fdt() -> Result<Outcome> {
    let t_s = 200.0;
    let dt = 0.005;
    let mut parts = Vec::new();
    let mut pass = true;
    for (eta, bound_expected) in [(0.3, 1), (0.05, 0)] {
        let sys = system(Statistics::Boson, EPS, -EPS, ohmic(eta, 1.0, 5.0));
        let spectrum = ScalarSpectrum::new(&sys)?;
        let bound = spectrum.bound_states.len();
        let chi = spectrum.integrated_fluctuation(t_s)?;
        let gf = green(&sys, t_s, dt)?;
        let v = v_scalar(&gf, gf.grid.n_steps);
        let rel = (v - chi).abs() / v;
        pass &= bound == bound_expected && rel < 1e-3;
        if bound == 0 {
            let continuum = spectrum.thermal_continuum()?;
            let reduce = (chi - continuum).abs() / continuum;
            pass &= reduce < 1e-10;
            parts.push(format!(
                "η = {eta} (no bound state): ∫χ = {chi:.8}, ∫D_d f = {continuum:.8} (rel. {reduce:.1e}), v = {v:.8} (rel. {rel:.2e})"
            ));
        } else {
            parts.push(format!("η = {eta} ({bound} bound state): v(t_s) = {v:.8}, ∫χ = {chi:.8}, rel. {rel:.2e} (< 1e-3)"));
        }
    }
    outcome(pass, format!("s = 1, ε_c = 5, T = ε_s, μ = −ε_s, t_s = 200: {}", parts.join("; ")))
}

// 9 ------------------------------------------------------------------------

fn backflow() -> Result<Outcome> {
    let sys = system(Statistics::Boson, EPS, 0.0, ohmic(0.1, 0.5, EPS));
    let grid = TimeGrid::with_horizon(60.0, 0.01)?;
    let gf = solve_v(&sys, solve_u(&sys, &grid)?, &VOptions::default())?;
    let gamma = compute_coefficients(&gf)?.gamma_scalar();
    let window: Vec<(f64, f64)> = (1..grid.len())
        .map(|k| (grid.elapsed(k), gamma[k]))
        .filter(|&(t, _)| t < 10.0)
        .collect();
    let (t_min, g_min) = window.iter().copied().fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let first_negative = (1..grid.len()).find(|&k| gamma[k] < 0.0).map(|k| grid.elapsed(k));
    let onset = match first_negative {
        Some(t) => format!("first negative γ at t = {t:.2}"),
        None => "no negative γ up to t = 60".into(),
    };
    outcome(
        g_min < 0.0,
        format!("s = ½, η = 0.1, ε_c = ε_s: min γ on (0, 10) = {g_min:.3e} at t = {t_min:.2} (needs < 0); {onset}"),
    )
}

// 10 -----------------------------------------------------------------------

fn sup_n(eta: f64) -> Result<f64> {
    let sys = system(Statistics::Boson, EPS, 0.0, ohmic(eta, 1.0, 5.0));
    let dt = 0.01;
    let grid = TimeGrid::with_horizon(120.0, dt)?;
    let anchor = grid.index_of(100.0).expect("anchor on grid");
    let lag = (20.0 / dt).round() as usize;
    let gf = solve_v(&sys, solve_u(&sys, &grid)?, &VOptions { anchors: vec![anchor], max_lag: lag })?;
    let exact = exact_series(&gf, 1.0, &[anchor], lag)?;
    let bm = bm_series(&bm_reference(&sys)?, 1.0, &exact.base_times, &exact.lags, grid.t0);
    Ok(sup_measure(&exact, &bm, 0)?.unwrap_or(f64::NAN))
}

fn measure() -> Result<Outcome> {
    let weak = sup_n(0.05)?;
    let strong = sup_n(0.3)?;
    outcome(
        weak < 0.05 && strong > 0.1,
        format!("s = 1, ε_c = 5, T = ε_s, anchor t = 100, τ ≤ 20: η = 0.05 sup 𝒩 = {weak:.4} (< 0.05); η = 0.3 sup 𝒩 = {strong:.4} (> 0.1)"),
    )
}

// 11 -----------------------------------------------------------------------

fn two_level(m: &[f64; 4]) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(m[0], 0.0), c(m[1], 0.0), c(m[2], 0.0), c(m[3], 0.0)])
}

/// Composite Simpson rule with `n` (even) panels.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn special_models() -> Result<Outcome> {
    let grid = TimeGrid::with_horizon(10.0, 0.01)?;

    // (a) amplitude damping from the excited state.
    let bath = ReservoirSpec::new(Statistics::Boson, 0.0, 0.0, ohmic(0.1, 1.0, 5.0))?;
    let spin = SpecialModel::new(ModelKind::SpinZeroT, bath.clone(), EPS)?;
    let traj = model_dynamics(&spin, &grid, &two_level(&[0.0, 0.0, 0.0, 1.0]))?;
    let u = solve_u(&SystemSpec::scalar(Statistics::Boson, EPS, vec![bath])?, &grid)?.u_scalar();
    let err_a = traj
        .states
        .iter()
        .zip(&u)
        .map(|(r, u)| (r[(1, 1)].re - u.norm_sqr()).abs())
        .fold(0.0, f64::max);

    // (b) dephasing of |+⟩ against Γ(t) = 2∫J coth(ω/2T) sin(ωt)/ω dω.
    let temp = 1.0;
    let bath = ReservoirSpec::new(Statistics::Boson, temp, 0.0, ohmic(0.1, 1.0, 5.0))?;
    let d = bath.density.clone();
    let deph = SpecialModel::new(ModelKind::PureDephasing, bath, EPS)?;
    let plus = two_level(&[0.5, 0.5, 0.5, 0.5]);
    // γ⁽²⁾(0) is large at T = ε_s; RK4 needs the finer step near t = 0.
    let fine = grid.refined(2);
    let traj = model_dynamics(&deph, &fine, &plus)?;
    let pop_b = traj
        .states
        .iter()
        .map(|r| (r[(0, 0)].re - 0.5).abs().max((r[(1, 1)].re - 0.5).abs()))
        .fold(0.0, f64::max);
    let w_max = d.support()[0].upper;
    let decay = |t: f64| {
        simpson(
            |w| {
                if w == 0.0 {
                    // J(ω) coth(ω/2T) → 2T J′(0), sin(ωt)/ω → t.
                    let h = 1e-6;
                    return 2.0 * d.evaluate_j(h).unwrap() / h * 2.0 * temp * t;
                }
                2.0 * d.evaluate_j(w).unwrap() / (w / (2.0 * temp)).tanh() * (w * t).sin() / w
            },
            0.0,
            w_max,
            400_000,
        )
    };
    let mut err_b = 0.0f64;
    for k in (0..fine.len()).step_by(100) {
        let t = fine.elapsed(k);
        let expected = Complex64::from_polar((-2.0 * decay(t)).exp(), -2.0 * EPS * t);
        err_b = err_b.max((traj.states[k][(0, 1)] / plus[(0, 1)] - expected).norm());
    }

    // (c) Majorana mode in a Lorentzian fermion bath centred at zero: the
    // symmetrized kernel 2 Re g equals the kernel of twice the coupling, so
    // exp(−2∫γ) = |u|² for a zero-energy level in that bath.
    let (eta, width) = (0.3, 1.0);
    let bath = ReservoirSpec::new(Statistics::Fermion, 0.5, 0.0, SpectralDensity::lorentzian(eta, 0.0, width)?)?;
    let maj = SpecialModel::new(ModelKind::Majorana, bath, 0.0)?;
    let traj = model_dynamics(&maj, &grid, &two_level(&[1.0, 0.0, 0.0, 0.0]))?;
    let doubled = ReservoirSpec::new(Statistics::Fermion, 0.5, 0.0, SpectralDensity::lorentzian(2.0 * eta, 0.0, width)?)?;
    let u = solve_u(&SystemSpec::scalar(Statistics::Fermion, 0.0, vec![doubled])?, &grid)?.u_scalar();
    let trace_c = traj.states.iter().map(|r| (r.trace() - c(1.0, 0.0)).norm()).fold(0.0, f64::max);
    // Eigenbasis of λ = σ_x.
    let h = two_level(&[1.0, 1.0, 1.0, -1.0]) / c(2f64.sqrt(), 0.0);
    let coherence0 = (&h * &traj.states[0] * &h)[(0, 1)];
    let err_c = traj
        .states
        .iter()
        .zip(&u)
        .map(|(r, u)| ((&h * r * &h)[(0, 1)] / coherence0 - u.norm_sqr()).norm())
        .fold(0.0, f64::max);

    outcome(
        err_a < 1e-6 && pop_b < 1e-10 && err_b < 1e-6 && trace_c < 1e-10 && err_c < 1e-6,
        format!(
            "(a) max|ρ_ee − |u|²| = {err_a:.2e} (< 1e-6); (b) population drift {pop_b:.1e} (< 1e-10), coherence vs Γ(t) {err_b:.2e} at dt = 0.005 (< 1e-6); (c) trace drift {trace_c:.1e} (< 1e-10), λ-basis coherence vs exp(−2∫γ) {err_c:.2e} (< 1e-6)"
        ),
    )
}

// 12 -----------------------------------------------------------------------

/// `(u, n)` of an initially occupied wide-band fermion level.
fn wide_band_series(dt: f64) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let gf = green(&wide_band(Statistics::Fermion), 10.0, dt)?;
    let u = gf.u_scalar();
    let n = (0..gf.grid.len()).map(|k| u[k].norm_sqr() + v_scalar(&gf, k)).collect();
    Ok((u, n))
}

fn series_gap(coarse: &(Vec<Complex64>, Vec<f64>), fine: &(Vec<Complex64>, Vec<f64>)) -> f64 {
    (0..coarse.0.len())
        .map(|k| (coarse.0[k] - fine.0[2 * k]).norm().max((coarse.1[k] - fine.1[2 * k]).abs()))
        .fold(0.0, f64::max)
}

fn convergence() -> Result<Outcome> {
    // Decoupled level: the scheme is exact, so both errors sit at round-off.
    let (e1, g1) = decoupled_errors(0.02, 2500)?;
    let (e2, g2) = decoupled_errors(0.01, 5000)?;
    let exact_ok = e1.max(g1) < 1e-12 && e2.max(g2) < 1e-12;
    // Wide band: error of each grid estimated from the next finer one.
    let s = [0.004, 0.002, 0.001].map(wide_band_series);
    let [a, b, c3] = s;
    let (a, b, c3) = (a?, b?, c3?);
    let d1 = series_gap(&a, &b);
    let d2 = series_gap(&b, &c3);
    let ratio = d1 / d2;
    outcome(
        exact_ok && ratio >= 3.5,
        format!(
            "decoupled: errors {:.1e} (dt 0.02) and {:.1e} (dt 0.01), both at round-off; wide band: max|Δ(u, n)| {d1:.2e} → {d2:.2e} on halving dt 0.004 → 0.002, ratio {ratio:.2} (≥ 3.5, order {:.2})",
            e1.max(g1),
            e2.max(g2),
            ratio.log2()
        ),
    )
}

fn main() {
    let criteria: [(&str, Check); 12] = [
        ("decoupled oracle", decoupled),
        ("wide-band Markov limit", wide_band_markov),
        ("sum rule", sum_rule),
        ("cross-method propagator", cross_method),
        ("bound-state threshold", threshold),
        ("long-time dichotomy", long_time),
        ("master-equation consistency", master_equation),
        ("fluctuation-dissipation", fdt),
        ("short-time backflow", backflow),
        ("measure dichotomy", measure),
        ("special models", special_models),
        ("grid convergence", convergence),
    ];
    let mut passed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (status, detail) = match check() {
            Ok(o) => (if o.pass { "PASS" } else { "FAIL" }, o.detail),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        if status == "PASS" {
            passed += 1;
        }
        println!(
            "{status} {:>2} {name}: {detail} [{:.1} s]",
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
}
