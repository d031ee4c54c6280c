//! Special exactly solvable models outside the generic Fano–Anderson
//! solver: zero-temperature amplitude damping of a spin, pure dephasing of
//! a spin in a boson bath, and a Majorana zero mode in a fermion bath.
//!
//! States are 2×2 density matrices. Basis conventions:
//! spin amplitude damping `(|g⟩, |e⟩)`; dephasing `(|↑⟩, |↓⟩)` with
//! `σ_z = diag(1, −1)`; Majorana `λ = σ_x`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::greens::{kernel_lattice, solve_u, solve_u_with_kernel, KernelKind, TimeGrid};
use crate::linalg::{hermitian_part, CMatrix, MatSeries};
use crate::mastereq::{compute_coefficients, propagate_rho, Basis, DensityMatrix, PropagationOptions};
use crate::quadrature::{integrate, Tolerance};
use crate::spectral::{ReservoirSpec, Statistics, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelKind {
    SpinZeroT,
    PureDephasing,
    Majorana,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::SpinZeroT => "spin_zero_T",
            ModelKind::PureDephasing => "pure_dephasing",
            ModelKind::Majorana => "majorana",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spin_zero_T" | "spin_zero_t" => Ok(ModelKind::SpinZeroT),
            "pure_dephasing" => Ok(ModelKind::PureDephasing),
            "majorana" => Ok(ModelKind::Majorana),
            _ => Err(Error::Configuration(format!("unknown model kind '{s}'"))),
        }
    }
}

/// A special model: its kind, bath and (for the spin kinds) level splitting.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialModel {
    pub kind: ModelKind,
    pub bath: ReservoirSpec,
    pub splitting: f64,
}

impl SpecialModel {
    pub fn new(kind: ModelKind, bath: ReservoirSpec, splitting: f64) -> Result<Self> {
        if !splitting.is_finite() {
            return Err(Error::InvalidInput("level splitting must be finite".into()));
        }
        match kind {
            ModelKind::SpinZeroT => {
                if bath.statistics != Statistics::Boson {
                    return Err(Error::Configuration("spin amplitude damping needs a boson bath".into()));
                }
                if bath.temperature != 0.0 {
                    return Err(Error::Configuration(format!(
                        "spin amplitude damping is exact only at T = 0, got T = {}",
                        bath.temperature
                    )));
                }
            }
            ModelKind::PureDephasing => {
                if bath.statistics != Statistics::Boson {
                    return Err(Error::Configuration("pure dephasing needs a boson bath".into()));
                }
                if bath.density.support().first().is_some_and(|iv| iv.lower < 0.0) {
                    return Err(Error::Configuration(
                        "pure dephasing needs a spectral density supported on ω >= 0".into(),
                    ));
                }
            }
            ModelKind::Majorana => {
                if bath.statistics != Statistics::Fermion {
                    return Err(Error::Configuration("Majorana mode needs a fermion bath".into()));
                }
            }
        }
        Ok(Self { kind, bath, splitting })
    }

    fn require(&self, kind: ModelKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::Configuration(format!("operation needs a {kind} model, got {}", self.kind)))
        }
    }
}

/// Time series of a two-level model.
#[derive(Debug, Clone)]
pub struct ModelTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMatrix>,
    /// Decay rate driving the model at each time (`γ` or `γ⁽²⁾`).
    pub rate: Vec<f64>,
    /// Times at which the rate changes sign.
    pub backflow_events: Vec<f64>,
    pub warnings: Vec<String>,
}

fn validated(rho0: &CMatrix) -> Result<DensityMatrix> {
    DensityMatrix::new(Basis::FermionFock { modes: 1 }, rho0.clone())
}

/// Linearly interpolated zero crossings of a sampled rate.
fn sign_changes(times: &[f64], rate: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 1..rate.len() {
        let (a, b) = (rate[k - 1], rate[k]);
        if !(a.is_finite() && b.is_finite()) {
            continue;
        }
        if (a >= 0.0 && b < 0.0) || (a < 0.0 && b >= 0.0) {
            let w = if a == b { 0.0 } else { a / (a - b) };
            out.push(times[k - 1] + w * (times[k] - times[k - 1]));
        }
    }
    if !out.is_empty() {
        log::info!("rate changes sign {} times (first at t = {:.4})", out.len(), out[0]);
    }
    out
}

/// Amplitude damping of a spin in a zero-temperature boson bath:
/// `dρ/dt = −i[ε′σ₊σ₋, ρ] + γ(2σ₋ρσ₊ − σ₊σ₋ρ − ρσ₊σ₋)`, with `ε′`, `γ` from
/// the single-level propagator.
pub fn spin_zero_t_dynamics(m: &SpecialModel, grid: &TimeGrid, rho0: &CMatrix) -> Result<ModelTrajectory> {
    m.require(ModelKind::SpinZeroT)?;
    if m.bath.temperature != 0.0 {
        return Err(Error::Configuration("spin amplitude damping needs T = 0".into()));
    }
    let rho0 = validated(rho0)?;
    let sys = SystemSpec::scalar(Statistics::Boson, m.splitting, vec![m.bath.clone()])?;
    let mut gf = solve_u(&sys, grid)?;
    // The noise kernel of a zero-temperature boson bath vanishes, so v ≡ 0.
    gf.v_diag = Some(MatSeries::zeros(1, grid.len()));
    let coeffs = compute_coefficients(&gf)?;
    let traj = propagate_rho(&rho0, &coeffs, &PropagationOptions::default())?;
    let times = traj.times();
    let rate = coeffs.gamma_scalar();
    let backflow_events = sign_changes(&times, &rate);
    let mut warnings = gf.warnings;
    warnings.extend(traj.warnings);
    Ok(ModelTrajectory {
        times,
        states: traj.states.into_iter().map(|s| s.matrix).collect(),
        rate,
        backflow_events,
        warnings,
    })
}

/// `coth(ω/2T)`, using `1/x + x/3` for small arguments and 1 at `T = 0`.
fn coth_half(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return omega.signum();
    }
    let x = omega / (2.0 * temperature);
    if x.abs() < 1e-3 {
        1.0 / x + x / 3.0
    } else {
        1.0 / x.tanh()
    }
}

fn dephasing_tolerance() -> Tolerance {
    Tolerance {
        absolute: 1e-11,
        relative: 1e-10,
        max_intervals: 20000,
    }
}

fn dephasing_integral<F: Fn(f64) -> f64>(m: &SpecialModel, weight: F, context: &str) -> Result<f64> {
    let d = &m.bath.density;
    let t = m.bath.temperature;
    let mut total = 0.0;
    for iv in d.support() {
        let f = |w: f64| {
            if w == 0.0 {
                return 0.0;
            }
            2.0 * d.evaluate_j(w).unwrap_or(0.0) * coth_half(w, t) * weight(w)
        };
        total += integrate(f, iv.lower, iv.upper, &d.breakpoints(), dephasing_tolerance(), context)?.value;
    }
    Ok(total)
}

/// `γ⁽²⁾(t) = 2∫dω J(ω) coth(ω/2T) cos(ωt)` (elapsed time `t` from `t0`).
/// The bath chemical potential does not enter.
pub fn dephasing_rate(m: &SpecialModel, t: f64) -> Result<f64> {
    m.require(ModelKind::PureDephasing)?;
    dephasing_integral(m, |w| (w * t).cos(), "dephasing rate")
}

/// `Γ(t) = ∫₀ᵗ γ⁽²⁾ = 2∫dω J(ω) coth(ω/2T) sin(ωt)/ω`.
pub fn dephasing_decay(m: &SpecialModel, t: f64) -> Result<f64> {
    m.require(ModelKind::PureDephasing)?;
    dephasing_integral(
        m,
        |w| {
            let x = w * t;
            if x.abs() < 1e-4 {
                t * (1.0 - x * x / 6.0)
            } else {
                x.sin() / w
            }
        },
        "dephasing decay",
    )
}

/// Closed-form coherence factor `ρ₀₁(t)/ρ₀₁(0) = e^{−2iεt − 2Γ(t)}`.
pub fn dephasing_coherence(m: &SpecialModel, t: f64) -> Result<Complex64> {
    let g = dephasing_decay(m, t)?;
    Ok(Complex64::from_polar((-2.0 * g).exp(), -2.0 * m.splitting * t))
}

fn rk4_two_level<F>(grid: &TimeGrid, rho0: &DensityMatrix, rhs: F) -> Result<Vec<CMatrix>>
where
    F: Fn(usize, u8, &CMatrix) -> CMatrix,
{
    let dt = grid.dt;
    let h = Complex64::new(0.5 * dt, 0.0);
    let f = Complex64::new(dt, 0.0);
    let s = Complex64::new(dt / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    let mut rho = rho0.matrix.clone();
    let mut out = Vec::with_capacity(grid.len());
    out.push(rho.clone());
    for k in 0..grid.n_steps {
        // stage 0: t_k, 1: t_k + dt/2, 2: t_{k+1}
        let k1 = rhs(k, 0, &rho);
        let k2 = rhs(k, 1, &(&rho + &k1 * h));
        let k3 = rhs(k, 1, &(&rho + &k2 * h));
        let k4 = rhs(k, 2, &(&rho + &k3 * f));
        rho = hermitian_part(&(&rho + (k1 + &k2 * two + &k3 * two + k4) * s));
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Instability { step: k + 1, norm: f64::NAN });
        }
        out.push(rho.clone());
    }
    Ok(out)
}

/// Pure dephasing `dρ/dt = −i[εσ_z, ρ] + γ⁽²⁾(t)(σ_zρσ_z − ρ)`, integrated
/// by RK4 with `γ⁽²⁾` evaluated at every stage time.
pub fn dephasing_dynamics(m: &SpecialModel, grid: &TimeGrid, rho0: &CMatrix) -> Result<ModelTrajectory> {
    m.require(ModelKind::PureDephasing)?;
    let rho0 = validated(rho0)?;
    let n = grid.n_steps;
    let mut rate = Vec::with_capacity(n + 1);
    let mut half = Vec::with_capacity(n);
    for k in 0..=n {
        rate.push(dephasing_rate(m, grid.elapsed(k))?);
        if k < n {
            half.push(dephasing_rate(m, grid.elapsed(k) + 0.5 * grid.dt)?);
        }
    }
    let sz = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
    ]));
    let h = &sz * Complex64::new(m.splitting, 0.0);
    let minus_i = Complex64::new(0.0, -1.0);
    let states = rk4_two_level(grid, &rho0, |k, stage, r| {
        let g = match stage {
            0 => rate[k],
            1 => half[k],
            _ => rate[k + 1],
        };
        (&h * r - r * &h) * minus_i + (&sz * r * &sz - r) * Complex64::new(g, 0.0)
    })?;
    let times: Vec<f64> = (0..=n).map(|k| grid.time(k)).collect();
    let backflow_events = sign_changes(&times, &rate);
    Ok(ModelTrajectory {
        times,
        states,
        rate,
        backflow_events,
        warnings: Vec::new(),
    })
}

/// Values at `t_k + dt/2` by cubic interpolation (linear at the ends).
fn half_steps(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n.saturating_sub(1))
        .map(|k| {
            if k >= 1 && k + 2 < n {
                (-values[k - 1] + 9.0 * values[k] + 9.0 * values[k + 1] - values[k + 2]) / 16.0
            } else {
                0.5 * (values[k] + values[k + 1])
            }
        })
        .collect()
}

/// Decay rate `γ(t) = −u̇/u` of the Majorana mode, from the propagator
/// equation with zero energy and the symmetrized kernel `g(τ) + g(τ)* = 2 Re g`.
/// Steps where `u` vanishes are bridged linearly.
pub fn majorana_rate(m: &SpecialModel, grid: &TimeGrid) -> Result<(Vec<f64>, Vec<String>)> {
    m.require(ModelKind::Majorana)?;
    let sys = SystemSpec::scalar(Statistics::Fermion, 0.0, vec![m.bath.clone()])?;
    let mut kernel = kernel_lattice(&sys, KernelKind::Memory, grid.dt, grid.n_steps);
    for k in 0..kernel.len() {
        let g = kernel.at(k)[0];
        kernel.at_mut(k)[0] = Complex64::new(2.0 * g.re, 0.0);
    }
    let gf = solve_u_with_kernel(&CMatrix::zeros(1, 1), &kernel, grid)?;
    let u_dot = gf.lattice_u_dot();
    let mut rate: Vec<f64> = (0..grid.len())
        .map(|k| {
            let u = gf.u.at(k)[0];
            if u.norm() < 1e-12 {
                f64::NAN
            } else {
                -(u_dot.at(k)[0] / u).re
            }
        })
        .collect();
    let mut warnings = Vec::new();
    let bad: Vec<usize> = (0..rate.len()).filter(|&k| !rate[k].is_finite()).collect();
    if !bad.is_empty() {
        for &k in &bad {
            let lo = (0..k).rev().find(|j| rate[*j].is_finite());
            let hi = (k + 1..rate.len()).find(|j| !bad.contains(j));
            rate[k] = match (lo, hi) {
                (Some(lo), Some(hi)) => {
                    let w = (k - lo) as f64 / (hi - lo) as f64;
                    (1.0 - w) * rate[lo] + w * rate[hi]
                }
                _ => {
                    return Err(Error::Precondition(format!(
                        "cannot bridge vanishing Majorana propagator at step {k}"
                    )))
                }
            };
        }
        let msg = format!("Majorana propagator vanishes at {} steps; rate bridged", bad.len());
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok((rate, warnings))
}

/// Majorana decoherence `dρ/dt = γ(t)(λρλ − ρ)` with `λ = σ_x`.
pub fn majorana_dynamics(m: &SpecialModel, grid: &TimeGrid, rho0: &CMatrix) -> Result<ModelTrajectory> {
    let (rate, warnings) = majorana_rate(m, grid)?;
    let rho0 = validated(rho0)?;
    let half = half_steps(&rate);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let lambda = CMatrix::from_row_slice(2, 2, &[zero, one, one, zero]);
    let states = rk4_two_level(grid, &rho0, |k, stage, r| {
        let g = match stage {
            0 => rate[k],
            1 => half[k],
            _ => rate[k + 1],
        };
        (&lambda * r * &lambda - r) * Complex64::new(g, 0.0)
    })?;
    let times: Vec<f64> = (0..grid.len()).map(|k| grid.time(k)).collect();
    let backflow_events = sign_changes(&times, &rate);
    Ok(ModelTrajectory {
        times,
        states,
        rate,
        backflow_events,
        warnings,
    })
}

/// Dispatches to the dynamics of `m.kind`.
pub fn model_dynamics(m: &SpecialModel, grid: &TimeGrid, rho0: &CMatrix) -> Result<ModelTrajectory> {
    match m.kind {
        ModelKind::SpinZeroT => spin_zero_t_dynamics(m, grid, rho0),
        ModelKind::PureDephasing => dephasing_dynamics(m, grid, rho0),
        ModelKind::Majorana => majorana_dynamics(m, grid, rho0),
    }
}
