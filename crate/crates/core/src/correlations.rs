//! Two-time correlation functions `⟨a†(t) a(t+τ)⟩`, their Born–Markov
//! counterparts and the non-Markovianity measure built from them.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greens::{GreenFunctions, TimeGrid};
use crate::linalg::CMatrix;
use crate::spectral::{Statistics, SystemSpec};

/// Equal-time occupations below this make the normalized correlator
/// undefined.
pub const MIN_OCCUPATION: f64 = 1e-12;

/// Correlator values on a set of base times and lags.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoTimeSeries {
    pub base_times: Vec<f64>,
    pub lags: Vec<f64>,
    /// `values[a][l] = ⟨a†(t_a) a(t_a + τ_l)⟩`.
    pub values: Vec<Vec<Complex64>>,
    /// `n(t_a)`.
    pub base_occupation: Vec<f64>,
    /// `n(t_a + τ_l)`.
    pub shifted_occupation: Vec<Vec<f64>>,
}

impl TwoTimeSeries {
    /// `C(t,τ)/√(n(t) n(t+τ))`, or `None` when an occupation vanishes.
    pub fn normalized(&self, a: usize, l: usize) -> Option<Complex64> {
        let d = self.base_occupation[a] * self.shifted_occupation[a][l];
        if self.base_occupation[a] < MIN_OCCUPATION || self.shifted_occupation[a][l] < MIN_OCCUPATION {
            None
        } else {
            Some(self.values[a][l] / d.sqrt())
        }
    }

    fn shape(&self) -> (usize, usize) {
        (self.base_times.len(), self.lags.len())
    }
}

fn scalar(gf: &GreenFunctions) -> Result<()> {
    if gf.dim() != 1 {
        return Err(Error::InvalidInput(format!(
            "two-time correlators are implemented for a single level, got {} levels",
            gf.dim()
        )));
    }
    Ok(())
}

fn step_of(grid: &TimeGrid, t: f64, what: &str) -> Result<usize> {
    grid.index_of(t)
        .ok_or_else(|| Error::Precondition(format!("{what} = {t} is not on the time grid")))
}

/// `[u(t+τ) n₀ u†(t)] + v(t+τ, t)`; entry `(j,i)` is `⟨a_i†(t) a_j(t+τ)⟩`.
pub fn exact_two_time_matrix(gf: &GreenFunctions, n0: &CMatrix, q: usize, p: usize) -> Result<CMatrix> {
    if p >= gf.u.len() || q > p {
        return Err(Error::Precondition(format!("steps ({q}, {p}) outside the solved grid")));
    }
    let v = gf.v_at(p, q)?;
    Ok(gf.u.matrix(p) * n0 * gf.u.matrix(q).adjoint() + v)
}

/// `⟨a†(t) a(t+τ)⟩ = u*(t) u(t+τ) n₀ + v(t+τ, t)` for a single level.
pub fn exact_two_time(gf: &GreenFunctions, n0: f64, t: f64, tau: f64) -> Result<Complex64> {
    scalar(gf)?;
    if tau < 0.0 {
        return Err(Error::InvalidInput(format!("lag must be >= 0, got {tau}")));
    }
    let q = step_of(&gf.grid, t, "t")?;
    let p = step_of(&gf.grid, t + tau, "t + tau")?;
    let n0 = CMatrix::from_element(1, 1, Complex64::new(n0, 0.0));
    Ok(exact_two_time_matrix(gf, &n0, q, p)?[(0, 0)])
}

/// Exact correlators for every stored slice anchor in `anchors` and lags
/// `0..=max_lag` steps.
pub fn exact_series(gf: &GreenFunctions, n0: f64, anchors: &[usize], max_lag: usize) -> Result<TwoTimeSeries> {
    scalar(gf)?;
    let grid = gf.grid;
    let v = gf
        .v_diag
        .as_ref()
        .ok_or_else(|| Error::Precondition("two-time correlators need v(t,t)".into()))?;
    let occ = |k: usize| gf.u.at(k)[0].norm_sqr() * n0 + v.at(k)[0].re;
    for &q in anchors {
        if q + max_lag > grid.n_steps {
            return Err(Error::Precondition(format!(
                "anchor step {q} plus lag {max_lag} exceeds the grid"
            )));
        }
        let slice = gf
            .v_slices
            .get(&q)
            .ok_or_else(|| Error::Precondition(format!("no v slice stored at anchor step {q}")))?;
        if slice.values.len() <= q + max_lag {
            return Err(Error::Precondition(format!(
                "v slice at anchor step {q} is shorter than lag {max_lag}"
            )));
        }
    }
    let rows: Vec<(Vec<Complex64>, Vec<f64>)> = anchors
        .par_iter()
        .map(|&q| {
            let slice = &gf.v_slices[&q].values;
            let uq = gf.u.at(q)[0].conj();
            (0..=max_lag)
                .map(|l| {
                    let p = q + l;
                    (uq * gf.u.at(p)[0] * n0 + slice.at(p)[0], occ(p))
                })
                .unzip()
        })
        .collect();
    let (values, shifted_occupation) = rows.into_iter().unzip();
    Ok(TwoTimeSeries {
        base_times: anchors.iter().map(|&q| grid.time(q)).collect(),
        lags: (0..=max_lag).map(|l| grid.elapsed(l)).collect(),
        values,
        base_occupation: anchors.iter().map(|&q| occ(q)).collect(),
        shifted_occupation,
    })
}

/// Born–Markov rates of a single level: everything evaluated at `ε_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BornMarkov {
    pub statistics: Statistics,
    pub level: f64,
    /// `κ = J(ε_s)`.
    pub kappa: f64,
    /// `Δ(ε_s)`.
    pub lamb_shift: f64,
    /// `n̄ = f(ε_s, T)` (spectral-weight average over reservoirs).
    pub mean_occupation: f64,
}

impl BornMarkov {
    /// `n_BM(t) = n₀ e^{−κt} + n̄ (1 − e^{−κt})`, `t` elapsed from `t0`.
    ///
    /// For fermions the gain `κn̄` and loss `κ(1−n̄)` rates add up to the
    /// same total `κ`, so both statistics share this form.
    pub fn occupation(&self, n0: f64, t: f64) -> f64 {
        let e = (-self.kappa * t).exp();
        n0 * e + self.mean_occupation * (1.0 - e)
    }
}

/// Born–Markov parameters of a single-level system.
pub fn bm_reference(sys: &SystemSpec) -> Result<BornMarkov> {
    let bath = sys.scalar_view()?;
    let level = bath.level;
    if !bath.support().iter().any(|iv| iv.contains(level)) {
        return Err(Error::BornMarkovUndefined(format!(
            "level {level} lies outside the spectral support"
        )));
    }
    let kappa = bath.j(level);
    if kappa <= 0.0 {
        return Err(Error::BornMarkovUndefined(format!(
            "no resonant decay channel: J({level}) = 0"
        )));
    }
    let mean_occupation = bath.j_thermal(level) / kappa;
    if !mean_occupation.is_finite() {
        return Err(Error::BornMarkovUndefined(format!(
            "thermal occupation at the level {level} is not finite"
        )));
    }
    Ok(BornMarkov {
        statistics: sys.statistics,
        level,
        kappa,
        lamb_shift: bath.lamb_shift(level)?,
        mean_occupation,
    })
}

/// Quantum-regression correlator
/// `⟨a†(t) a(t+τ)⟩_BM = e^{−i(ε_s+Δ)τ} e^{−κτ/2} n_BM(t)`.
pub fn bm_two_time(p: &BornMarkov, n_bm: f64, tau: f64) -> Complex64 {
    Complex64::from_polar((-0.5 * p.kappa * tau).exp() * n_bm, -(p.level + p.lamb_shift) * tau)
}

/// Born–Markov series on the same base times and lags as an exact one.
pub fn bm_series(p: &BornMarkov, n0: f64, base_times: &[f64], lags: &[f64], t0: f64) -> TwoTimeSeries {
    let values = base_times
        .iter()
        .map(|&t| {
            let n = p.occupation(n0, t - t0);
            lags.iter().map(|&tau| bm_two_time(p, n, tau)).collect()
        })
        .collect();
    let shifted_occupation = base_times
        .iter()
        .map(|&t| lags.iter().map(|&tau| p.occupation(n0, t + tau - t0)).collect())
        .collect();
    TwoTimeSeries {
        base_times: base_times.to_vec(),
        lags: lags.to_vec(),
        values,
        base_occupation: base_times.iter().map(|&t| p.occupation(n0, t - t0)).collect(),
        shifted_occupation,
    }
}

/// `𝒩(t,τ) = |C(t,τ)/√(n(t)n(t+τ)) − C_BM(t,τ)/√(n_BM(t)n_BM(t+τ))|` at
/// base index `a` and lag index `l`; `None` when a denominator vanishes.
pub fn nonmarkov_measure(exact: &TwoTimeSeries, bm: &TwoTimeSeries, a: usize, l: usize) -> Result<Option<f64>> {
    if exact.shape() != bm.shape() {
        return Err(Error::InvalidInput("exact and Born-Markov series have different shapes".into()));
    }
    let (na, nl) = exact.shape();
    if a >= na || l >= nl {
        return Err(Error::InvalidInput(format!("index ({a}, {l}) outside the series")));
    }
    match (exact.normalized(a, l), bm.normalized(a, l)) {
        (Some(x), Some(y)) => Ok(Some((x - y).norm())),
        _ => Ok(None),
    }
}

/// `sup_τ 𝒩(t_a, τ)` over the defined lags, `None` if none is defined.
pub fn sup_measure(exact: &TwoTimeSeries, bm: &TwoTimeSeries, a: usize) -> Result<Option<f64>> {
    let mut sup: Option<f64> = None;
    for l in 0..exact.lags.len() {
        if let Some(v) = nonmarkov_measure(exact, bm, a, l)? {
            sup = Some(sup.map_or(v, |s| s.max(v)));
        }
    }
    Ok(sup)
}

/// `count` anchor steps spaced logarithmically over `[dt, t_max − lag]`
/// (deduplicated, ascending).
pub fn log_anchors(grid: &TimeGrid, count: usize, max_lag: usize) -> Vec<usize> {
    let last = grid.n_steps.saturating_sub(max_lag);
    if last == 0 || count == 0 {
        return vec![0];
    }
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            if count == 1 {
                last
            } else {
                let x = i as f64 / (count - 1) as f64;
                ((last as f64).powf(x)).round() as usize
            }
        })
        .collect();
    out.dedup();
    out
}
