//! Frequency-domain description of a single level: bound states (real
//! poles of the propagator outside the band), the dissipation spectrum,
//! the spectral reconstruction of `u(t)` and the steady-state fluctuation
//! spectrum.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{ensure_finite, Error, Result};
use crate::greens::TimeGrid;
use crate::quadrature::{integrate, PanelNodes, Tolerance};
use crate::spectral::{Interval, ScalarBath, SystemSpec};

/// A localized bound state: a real pole of the propagator.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub energy: f64,
    /// Residue `Z = 1/(1 − Δ′(ε_b))`, in `(0, 1]`.
    pub residue: f64,
    /// Set when the pole lies so close to a band edge that it is hard to
    /// distinguish from the continuum.
    pub warning: Option<String>,
}

const ROOT_TOLERANCE: f64 = 1e-10;
const EDGE_FLAG: f64 = 1e-6;
const MIN_RESIDUE: f64 = 1e-6;
const FD_STEP: f64 = 1e-5;

/// Continuum region between/around the support in which a pole is sought.
#[derive(Debug, Clone, Copy)]
enum Region {
    Below(f64),
    Gap(f64, f64),
    Above(f64),
}

/// Precomputed spectral data of a single-level system.
#[derive(Debug, Clone)]
pub struct ScalarSpectrum<'a> {
    bath: ScalarBath<'a>,
    pub bound_states: Vec<BoundState>,
    max_intervals: usize,
}

impl<'a> ScalarSpectrum<'a> {
    pub fn new(sys: &'a SystemSpec) -> Result<Self> {
        let bath = sys.scalar_view()?;
        let bound_states = search(&bath)?;
        Ok(Self {
            bath,
            bound_states,
            max_intervals: 4000,
        })
    }

    /// Caps adaptive integrations over the spectrum at `points` function
    /// evaluations per support interval (15 per Gauss–Kronrod interval).
    pub fn with_quadrature_budget(mut self, points: usize) -> Self {
        self.max_intervals = (points / 15).max(1);
        self
    }

    pub fn bath(&self) -> &ScalarBath<'a> {
        &self.bath
    }

    pub fn level(&self) -> f64 {
        self.bath.level
    }

    /// `D_d(ε) = (J/2π) / ([ε − ε_s − Δ(ε)]² + J²/4)`; zero off the support.
    pub fn dissipation(&self, e: f64) -> Result<f64> {
        ensure_finite("energy", e)?;
        let j = self.bath.j(e);
        if j == 0.0 {
            return Ok(0.0);
        }
        let y = e - self.bath.level - self.bath.lamb_shift(e)?;
        Ok(j / (2.0 * PI) / (y * y + 0.25 * j * j))
    }

    /// Total residue `Σ_b Z_b` of the bound states.
    pub fn bound_weight(&self) -> f64 {
        self.bound_states.iter().map(|b| b.residue).sum()
    }

    fn tolerance(&self) -> Tolerance {
        Tolerance {
            absolute: 1e-10,
            relative: 1e-9,
            max_intervals: self.max_intervals,
        }
    }

    fn integrate_support<F>(&self, f: F, context: &str) -> Result<(f64, Vec<(f64, f64)>)>
    where
        F: Fn(f64) -> f64,
    {
        let bps = self.bath.breakpoints();
        let mut total = 0.0;
        let mut partition = Vec::new();
        for iv in self.bath.support() {
            let est = integrate(&f, iv.lower, iv.upper, &bps, self.tolerance(), context)?;
            total += est.value;
            partition.extend(est.partition);
        }
        Ok((total, partition))
    }

    /// `∫ D_d(ε) dε` over the support.
    pub fn continuum_weight(&self) -> Result<f64> {
        Ok(self
            .integrate_support(|e| self.dissipation(e).unwrap_or(f64::NAN), "dissipation spectrum")?
            .0)
    }

    /// `Σ_b Z_b + ∫ D_d dε`, which equals `u(t0) = 1` for an exact spectrum.
    pub fn sum_rule(&self) -> Result<f64> {
        Ok(self.bound_weight() + self.continuum_weight()?)
    }

    /// `u(t) = Σ_b Z_b e^{−iε_b t} + ∫ D_d(ε) e^{−iεt} dε` on the grid.
    pub fn reconstruct_u(&self, grid: &TimeGrid) -> Result<Vec<Complex64>> {
        let (_, partition) =
            self.integrate_support(|e| self.dissipation(e).unwrap_or(f64::NAN), "dissipation spectrum")?;
        let horizon = grid.elapsed(grid.n_steps);
        let max_width = if horizon > 0.0 { 4.0 * PI / horizon } else { f64::INFINITY };
        let mut panels = Vec::new();
        for (a, b) in partition {
            let pieces = ((b - a) / max_width).ceil().max(1.0) as usize;
            let h = (b - a) / pieces as f64;
            for i in 0..pieces {
                let lo = a + h * i as f64;
                let hi = if i + 1 == pieces { b } else { lo + h };
                panels.push((lo, hi));
            }
        }
        let nodes = PanelNodes::from_panels(&panels);
        let weights: Vec<f64> = nodes
            .nodes
            .par_iter()
            .zip(&nodes.weights)
            .map(|(&e, &w)| self.dissipation(e).map(|d| d * w))
            .collect::<Result<_>>()?;
        let values = (0..=grid.n_steps)
            .into_par_iter()
            .map(|k| {
                let t = grid.elapsed(k);
                let mut acc: Complex64 = self
                    .bound_states
                    .iter()
                    .map(|b| Complex64::from_polar(b.residue, -b.energy * t))
                    .sum();
                for (e, w) in nodes.nodes.iter().zip(&weights) {
                    acc += Complex64::from_polar(*w, -e * t);
                }
                acc
            })
            .collect();
        Ok(values)
    }

    /// Fluctuation spectrum `χ(ε)` after elapsed time `elapsed`:
    /// `[D_b(ε) + D_d(ε)] f(ε)` with
    /// `D_b = (J/2π) Σ_{jk} Z_j Z_k cos[(ε_j − ε_k) t] / ((ε − ε_j)(ε − ε_k))`.
    /// For several reservoirs `J f` is replaced by `Σ_α J_α f_α`.
    pub fn fluctuation(&self, e: f64, elapsed: f64) -> Result<f64> {
        ensure_finite("energy", e)?;
        if let Some(b) = self.bound_states.iter().find(|b| b.energy == e) {
            return Err(Error::Pole(b.energy));
        }
        let jf = self.bath.j_thermal(e);
        if jf == 0.0 {
            return Ok(0.0);
        }
        let mut bound = 0.0;
        for bj in &self.bound_states {
            for bk in &self.bound_states {
                bound += bj.residue * bk.residue * ((bj.energy - bk.energy) * elapsed).cos()
                    / ((e - bj.energy) * (e - bk.energy));
            }
        }
        let j = self.bath.j(e);
        let y = e - self.bath.level - self.bath.lamb_shift(e)?;
        let continuum = 1.0 / (y * y + 0.25 * j * j);
        Ok(jf / (2.0 * PI) * (bound + continuum))
    }

    /// `∫ χ(ε) dε`: the stationary value of `v(t,t)`.
    pub fn integrated_fluctuation(&self, elapsed: f64) -> Result<f64> {
        Ok(self
            .integrate_support(|e| self.fluctuation(e, elapsed).unwrap_or(f64::NAN), "fluctuation spectrum")?
            .0)
    }

    /// `∫ D_d(ε) f(ε) dε`: the stationary occupation without bound states.
    pub fn thermal_continuum(&self) -> Result<f64> {
        Ok(self
            .integrate_support(
                |e| {
                    let j = self.bath.j(e);
                    if j == 0.0 {
                        0.0
                    } else {
                        self.dissipation(e).unwrap_or(f64::NAN) * self.bath.j_thermal(e) / j
                    }
                },
                "thermal continuum",
            )?
            .0)
    }
}

fn regions(support: &[Interval]) -> Vec<Region> {
    let mut out = Vec::new();
    if let Some(first) = support.first() {
        out.push(Region::Below(first.lower));
    }
    for w in support.windows(2) {
        out.push(Region::Gap(w[0].upper, w[1].lower));
    }
    if let Some(last) = support.last() {
        out.push(Region::Above(last.upper));
    }
    out
}

fn search(bath: &ScalarBath<'_>) -> Result<Vec<BoundState>> {
    let level = bath.level;
    if bath.is_decoupled() || bath.support().is_empty() {
        return Ok(vec![BoundState {
            energy: level,
            residue: 1.0,
            warning: None,
        }]);
    }
    let y = |e: f64| -> Result<f64> { Ok(e - level - bath.lamb_shift(e)?) };
    let span = bath.support().last().unwrap().upper - bath.support()[0].lower;
    let scale = span.max(level.abs()).max(1.0);
    let delta = 1e-10 * scale;
    let mut found = Vec::new();
    for region in regions(bath.support()) {
        // y is strictly increasing off the support, so each region holds at
        // most one root.
        let bracket = match region {
            Region::Below(a) => {
                let hi = a - delta;
                if y(hi)? <= 0.0 {
                    None
                } else {
                    let mut step = scale;
                    let mut lo = hi - step;
                    while y(lo)? > 0.0 {
                        step *= 2.0;
                        lo = hi - step;
                        if step > 1e12 * scale {
                            return Err(Error::NumericalFailure {
                                context: "bound-state bracket".into(),
                                estimate: step,
                                target: scale,
                            });
                        }
                    }
                    Some((lo, hi))
                }
            }
            Region::Above(b) => {
                let lo = b + delta;
                if y(lo)? >= 0.0 {
                    None
                } else {
                    let mut step = scale;
                    let mut hi = lo + step;
                    while y(hi)? < 0.0 {
                        step *= 2.0;
                        hi = lo + step;
                        if step > 1e12 * scale {
                            return Err(Error::NumericalFailure {
                                context: "bound-state bracket".into(),
                                estimate: step,
                                target: scale,
                            });
                        }
                    }
                    Some((lo, hi))
                }
            }
            Region::Gap(b, a) => {
                let (lo, hi) = (b + delta, a - delta);
                if lo < hi && y(lo)? < 0.0 && y(hi)? > 0.0 {
                    Some((lo, hi))
                } else {
                    None
                }
            }
        };
        let Some((mut lo, mut hi)) = bracket else { continue };
        let mut root = 0.5 * (lo + hi);
        for _ in 0..200 {
            root = 0.5 * (lo + hi);
            let v = y(root)?;
            if v.abs() < ROOT_TOLERANCE || hi - lo < 4.0 * f64::EPSILON * root.abs().max(1.0) {
                break;
            }
            if v > 0.0 {
                hi = root;
            } else {
                lo = root;
            }
        }
        let edge_distance = bath
            .support()
            .iter()
            .map(|iv| (root - iv.lower).abs().min((root - iv.upper).abs()))
            .fold(f64::INFINITY, f64::min);
        let h = FD_STEP.min(0.5 * edge_distance);
        let slope = (bath.lamb_shift(root + h)? - bath.lamb_shift(root - h)?) / (2.0 * h);
        let residue = 1.0 / (1.0 - slope);
        if residue < MIN_RESIDUE {
            log::warn!(
                "dropping pole at {root} with residue {residue:.3e}: indistinguishable from the continuum"
            );
            continue;
        }
        let warning = (edge_distance < EDGE_FLAG).then(|| {
            format!("pole at {root} lies within {edge_distance:.1e} of a band edge; residue unreliable")
        });
        found.push(BoundState {
            energy: root,
            residue,
            warning,
        });
    }
    Ok(found)
}

/// Bound states of a single-level system.
pub fn find_bound_states(sys: &SystemSpec) -> Result<Vec<BoundState>> {
    Ok(ScalarSpectrum::new(sys)?.bound_states)
}

/// Dissipation spectrum `D_d(ε)` of a single-level system.
pub fn dissipation_spectrum(sys: &SystemSpec, e: f64) -> Result<f64> {
    let bath = sys.scalar_view()?;
    ScalarSpectrum {
        bath,
        bound_states: Vec::new(),
        max_intervals: 4000,
    }
    .dissipation(e)
}

/// Spectral reconstruction of the propagator on `grid`.
pub fn reconstruct_u(sys: &SystemSpec, grid: &TimeGrid) -> Result<Vec<Complex64>> {
    ScalarSpectrum::new(sys)?.reconstruct_u(grid)
}

/// Fluctuation spectrum `χ(ε)` after elapsed time `elapsed`.
pub fn steady_fluctuation_spectrum(sys: &SystemSpec, e: f64, elapsed: f64) -> Result<f64> {
    ScalarSpectrum::new(sys)?.fluctuation(e, elapsed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{ReservoirSpec, SpectralDensity, Statistics};
    use statrs::function::gamma::gamma;

    fn ohmic_system(eta: f64, s: f64, ec: f64, t: f64) -> SystemSpec {
        let d = SpectralDensity::ohmic(eta, s, ec).unwrap();
        let r = ReservoirSpec::new(Statistics::Boson, t, 0.0, d).unwrap();
        SystemSpec::scalar(Statistics::Boson, 1.0, vec![r]).unwrap()
    }

    #[test]
    fn decoupled_level_is_its_own_pole() {
        let sys = SystemSpec::scalar(Statistics::Boson, 0.7, vec![]).unwrap();
        let b = find_bound_states(&sys).unwrap();
        assert_eq!(b, vec![BoundState { energy: 0.7, residue: 1.0, warning: None }]);
    }

    #[test]
    fn ohmic_threshold() {
        // ε_s = η ε_c Γ(s) at threshold
        for (s, ec) in [(1.0, 5.0), (0.5, 1.0)] {
            let eta_c = 1.0 / (ec * gamma(s));
            assert!(find_bound_states(&ohmic_system(0.95 * eta_c, s, ec, 0.0)).unwrap().is_empty());
            let b = find_bound_states(&ohmic_system(1.05 * eta_c, s, ec, 0.0)).unwrap();
            assert_eq!(b.len(), 1);
            assert!(b[0].energy < 0.0 && b[0].residue > 0.0 && b[0].residue <= 1.0);
        }
    }

    #[test]
    fn weak_coupling_peak_near_shifted_level() {
        let sys = ohmic_system(0.02, 1.0, 5.0, 0.0);
        let spec = ScalarSpectrum::new(&sys).unwrap();
        let bath = spec.bath();
        let target = 1.0 + bath.lamb_shift(1.0).unwrap();
        let half_width = 0.5 * bath.j(1.0);
        let (mut best, mut arg) = (0.0, 0.0);
        for i in 0..4001 {
            let e = 0.5 + i as f64 * 2.5e-4;
            let d = spec.dissipation(e).unwrap();
            if d > best {
                best = d;
                arg = e;
            }
        }
        assert!((arg - target).abs() < half_width);
        assert_eq!(spec.dissipation(-1.0).unwrap(), 0.0);
    }

    #[test]
    fn sum_rule_with_and_without_bound_state() {
        for eta in [0.05, 0.3] {
            let sys = ohmic_system(eta, 1.0, 5.0, 0.0);
            let total = ScalarSpectrum::new(&sys).unwrap().sum_rule().unwrap();
            assert!((total - 1.0).abs() < 1e-3, "{eta}: {total}");
        }
    }

    #[test]
    fn pole_evaluation_is_an_error() {
        let sys = ohmic_system(0.3, 1.0, 5.0, 1.0);
        let spec = ScalarSpectrum::new(&sys).unwrap();
        let e = spec.bound_states[0].energy;
        assert!(matches!(spec.fluctuation(e, 0.0), Err(Error::Pole(_))));
    }
}
