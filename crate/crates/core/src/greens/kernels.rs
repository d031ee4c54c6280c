//! Memory and noise kernels on the time-difference lattice.
//!
//! For each reservoir a composite Gauss-Legendre node set is built over its
//! support, fine enough to resolve both the density and the oscillation
//! `e^{-iετ}` up to the largest lag required. A kernel lattice is then a
//! weighted sum of phasors, evaluated in fixed-size chunks so the result is
//! independent of the thread count.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{ensure_finite, Result};
use crate::linalg::{CMatrix, MatSeries, ZERO};
use crate::quadrature::{PanelNodes, PanelPlan};
use crate::spectral::{ReservoirSpec, Statistics, SystemSpec};

/// Which kernel to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// `g(τ) = ∫ dε/2π J(ε) e^{-iετ}`.
    Memory,
    /// `g̃(τ) = ∫ dε/2π J(ε) f(ε) e^{-iετ}`.
    Noise,
}

const CHUNK: usize = 256;
/// Panels may span at most this phase at the largest lag.
const MAX_PANEL_PHASE: f64 = 4.0 * PI;

/// Quadrature nodes for one reservoir, resolving lags up to `max_lag`.
pub(crate) fn reservoir_nodes(r: &ReservoirSpec, max_lag: f64) -> PanelNodes {
    let d = &r.density;
    if d.is_zero() {
        return PanelNodes::default();
    }
    let mut width = d.feature_scale();
    if max_lag > 0.0 {
        width = width.min(MAX_PANEL_PHASE / max_lag);
    }
    let mut plan = PanelPlan::new(width);
    plan.graded_points = d.graded_edges();
    plan.breakpoints = d.breakpoints();
    let (t, mu) = (r.temperature, r.chemical_potential);
    match r.statistics {
        Statistics::Fermion => {
            plan.breakpoints.push(mu);
            if t > 0.0 {
                plan.windows.push((mu - 40.0 * t, mu + 40.0 * t, t / 4.0));
            }
        }
        Statistics::Boson => {
            if t > 0.0 {
                plan.windows.push((mu, mu + 40.0 * t, t / 4.0));
            }
        }
    }
    let mut panels = Vec::new();
    for iv in d.support() {
        panels.extend(plan.panels(iv.lower, iv.upper));
    }
    PanelNodes::from_panels(&panels)
}

/// Spectral weights `w_m J(ε_m)/2π` (times `f` for the noise kernel).
fn spectral_weights(r: &ReservoirSpec, nodes: &PanelNodes, kind: KernelKind) -> Vec<f64> {
    nodes
        .nodes
        .iter()
        .zip(&nodes.weights)
        .map(|(&e, &w)| {
            let j = r.density.j(e);
            if j == 0.0 {
                return 0.0;
            }
            let f = match kind {
                KernelKind::Memory => 1.0,
                KernelKind::Noise => r.occupation(e),
            };
            w * j * f / (2.0 * PI)
        })
        .collect()
}

/// `Σ_m W_m e^{-iε_m k dt}` for `k = 0..len`.
fn phasor_sums(energies: &[f64], weights: &[f64], dt: f64, len: usize) -> Vec<Complex64> {
    let active: Vec<(f64, f64)> = energies
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w != 0.0)
        .map(|(e, w)| (*e, *w))
        .collect();
    if active.is_empty() {
        return vec![ZERO; len];
    }
    let steps: Vec<Complex64> = active
        .iter()
        .map(|(e, _)| Complex64::from_polar(1.0, -e * dt))
        .collect();
    let chunks: Vec<Vec<Complex64>> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let k0 = c * CHUNK;
            let k1 = (k0 + CHUNK).min(len);
            let mut phase: Vec<Complex64> = active
                .iter()
                .map(|(e, w)| Complex64::from_polar(*w, -e * dt * k0 as f64))
                .collect();
            let mut out = Vec::with_capacity(k1 - k0);
            for _ in k0..k1 {
                let mut acc = ZERO;
                for (p, s) in phase.iter_mut().zip(&steps) {
                    acc += *p;
                    *p *= s;
                }
                out.push(acc);
            }
            out
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

/// Scalar kernel of one reservoir on the lattice `k dt`, `k = 0..=n`.
pub fn reservoir_kernel(r: &ReservoirSpec, kind: KernelKind, dt: f64, n: usize) -> Vec<Complex64> {
    let nodes = reservoir_nodes(r, dt * n as f64);
    let w = spectral_weights(r, &nodes, kind);
    phasor_sums(&nodes.nodes, &w, dt, n + 1)
}

/// Matrix kernel `Σ_α W_α k_α(k dt)` on the lattice, `k = 0..=n`.
pub fn kernel_lattice(sys: &SystemSpec, kind: KernelKind, dt: f64, n: usize) -> MatSeries {
    let dim = sys.dim();
    let mut out = MatSeries::zeros(dim, n + 1);
    for c in &sys.couplings {
        if c.reservoir.density.is_zero() || c.weights.iter().all(|z| *z == ZERO) {
            continue;
        }
        let series = reservoir_kernel(&c.reservoir, kind, dt, n);
        let raw = out.raw_mut();
        for (k, g) in series.iter().enumerate() {
            for i in 0..dim {
                for j in 0..dim {
                    raw[k * dim * dim + i * dim + j] += c.weights[(i, j)] * g;
                }
            }
        }
    }
    out
}

fn single_lag(sys: &SystemSpec, kind: KernelKind, tau: f64) -> Result<CMatrix> {
    ensure_finite("time difference", tau)?;
    let dim = sys.dim();
    let mut out = CMatrix::zeros(dim, dim);
    for c in &sys.couplings {
        if c.reservoir.density.is_zero() {
            continue;
        }
        let nodes = reservoir_nodes(&c.reservoir, tau.abs());
        let w = spectral_weights(&c.reservoir, &nodes, kind);
        let g: Complex64 = nodes
            .nodes
            .iter()
            .zip(&w)
            .filter(|(_, w)| **w != 0.0)
            .map(|(e, w)| Complex64::from_polar(*w, -e * tau))
            .sum();
        out += &c.weights * g;
    }
    Ok(out)
}

/// Memory kernel `g(τ)` at a single time difference.
pub fn memory_kernel(sys: &SystemSpec, tau: f64) -> Result<CMatrix> {
    single_lag(sys, KernelKind::Memory, tau)
}

/// Noise kernel `g̃(τ)` at a single time difference.
pub fn noise_kernel(sys: &SystemSpec, tau: f64) -> Result<CMatrix> {
    single_lag(sys, KernelKind::Noise, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralDensity;
    use statrs::function::gamma::gamma;

    fn scalar(stats: Statistics, t: f64, mu: f64, d: SpectralDensity) -> SystemSpec {
        SystemSpec::scalar(stats, 1.0, vec![ReservoirSpec::new(stats, t, mu, d).unwrap()]).unwrap()
    }

    #[test]
    fn flat_band_kernel_is_sinc() {
        let (k, w) = (0.8, 6.0);
        let sys = scalar(Statistics::Boson, 0.0, -10.0, SpectralDensity::flat_band(k, -w, w).unwrap());
        for tau in [0.0, 0.3, 1.7, 12.5] {
            let g = memory_kernel(&sys, tau).unwrap()[(0, 0)];
            let exact = if tau == 0.0 { k * w / PI } else { k * (w * tau).sin() / (PI * tau) };
            assert!((g.re - exact).abs() < 1e-12 && g.im.abs() < 1e-12, "{tau}");
        }
    }

    #[test]
    fn ohmic_kernel_matches_closed_form() {
        let (eta, s, ec) = (0.1, 0.5, 1.0);
        let sys = scalar(Statistics::Boson, 0.0, 0.0, SpectralDensity::ohmic(eta, s, ec).unwrap());
        let dt = 0.05;
        let n = 400;
        let lattice = kernel_lattice(&sys, KernelKind::Memory, dt, n);
        for k in [0, 1, 37, 200, 400] {
            let tau = k as f64 * dt;
            let exact = Complex64::new(eta * ec * ec * gamma(s + 1.0), 0.0)
                / Complex64::new(1.0, ec * tau).powf(s + 1.0);
            assert!((lattice.entry(k, 0, 0) - exact).norm() < 1e-9, "{k}");
        }
    }

    #[test]
    fn zero_temperature_boson_noise_vanishes() {
        let sys = scalar(Statistics::Boson, 0.0, 0.0, SpectralDensity::ohmic(0.3, 1.0, 5.0).unwrap());
        assert_eq!(noise_kernel(&sys, 0.4).unwrap()[(0, 0)], ZERO);
    }

    #[test]
    fn filled_fermion_band_noise_equals_memory() {
        let sys = scalar(Statistics::Fermion, 0.0, 10.0, SpectralDensity::flat_band(0.5, -2.0, 2.0).unwrap());
        for tau in [0.0, 0.9, 3.0] {
            let g = memory_kernel(&sys, tau).unwrap();
            let gt = noise_kernel(&sys, tau).unwrap();
            assert!((g[(0, 0)] - gt[(0, 0)]).norm() < 1e-14);
        }
    }

    #[test]
    fn lattice_is_thread_count_independent() {
        let sys = scalar(Statistics::Boson, 1.0, 0.0, SpectralDensity::ohmic(0.3, 1.0, 5.0).unwrap());
        let a = kernel_lattice(&sys, KernelKind::Noise, 0.02, 1000);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| kernel_lattice(&sys, KernelKind::Noise, 0.02, 1000));
        assert_eq!(a, b);
    }
}
