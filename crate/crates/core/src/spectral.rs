//! Reservoir spectral densities, thermal occupations, Lamb shift and
//! self-energy.
//!
//! Conventions: hbar = k_B = 1. The spectral density `J(ε)` enters the
//! memory kernel as `g(τ) = ∫ dε/2π J(ε) e^{-iετ}`, so a flat density of
//! height `κ` gives population decay at rate `κ` in the wide-band limit,
//! and the retarded self-energy is `Σ(ε + i0) = Δ(ε) − iJ(ε)/2`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermiticity_defect, require_square, CMatrix};
use crate::quadrature::{integrate, Tolerance};

/// Particle statistics of the system and its reservoirs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    Boson,
    Fermion,
}

impl Statistics {
    /// `+1` for bosons, `-1` for fermions.
    pub fn sign(self) -> f64 {
        match self {
            Statistics::Boson => 1.0,
            Statistics::Fermion => -1.0,
        }
    }
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistics::Boson => "boson",
            Statistics::Fermion => "fermion",
        })
    }
}

impl FromStr for Statistics {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "boson" | "bosonic" => Ok(Statistics::Boson),
            "fermion" | "fermionic" => Ok(Statistics::Fermion),
            other => Err(Error::InvalidInput(format!(
                "unknown statistics '{other}' (expected boson or fermion)"
            ))),
        }
    }
}

/// A closed energy interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, e: f64) -> bool {
        e >= self.lower && e <= self.upper
    }
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Profile of one band of a gapped density.
#[derive(Debug, Clone, PartialEq)]
pub enum BandShape {
    Flat { kappa: f64 },
    Tabulated { samples: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub lower: f64,
    pub upper: f64,
    pub shape: BandShape,
}

impl Band {
    pub fn flat(kappa: f64, lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            shape: BandShape::Flat { kappa },
        }
    }

    pub fn tabulated(samples: Vec<(f64, f64)>) -> Self {
        let lower = samples.first().map_or(0.0, |s| s.0);
        let upper = samples.last().map_or(0.0, |s| s.0);
        Self {
            lower,
            upper,
            shape: BandShape::Tabulated { samples },
        }
    }

    fn value(&self, e: f64) -> f64 {
        if e < self.lower || e > self.upper {
            return 0.0;
        }
        match &self.shape {
            BandShape::Flat { kappa } => *kappa,
            BandShape::Tabulated { samples } => interpolate(samples, e),
        }
    }
}

/// Functional form of a spectral density.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityKind {
    /// `J(ε) = 2πη ε (ε/ε_c)^{s-1} e^{-ε/ε_c}` for `ε ≥ 0`.
    OhmicFamily { eta: f64, exponent: f64, cutoff: f64 },
    /// `J(ε) = η Γ² / ((ε − ε₀)² + Γ²)`, truncated far in the tails.
    Lorentzian { eta: f64, center: f64, width: f64 },
    /// `J(ε) = κ` on `[lower, upper]`.
    FlatBand { kappa: f64, lower: f64, upper: f64 },
    /// Disjoint bands separated by gaps.
    GappedBand { bands: Vec<Band> },
    /// Piecewise-linear interpolation of `(ε, J)` samples.
    Tabulated { samples: Vec<(f64, f64)> },
}

/// Relative level below which the ohmic tail is cut off.
const OHMIC_TAIL: f64 = 1e-12;
/// Lorentzian tails are truncated this many widths from the center.
pub const LORENTZIAN_TRUNCATION: f64 = 400.0;

/// A reservoir spectral density together with its support.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    kind: DensityKind,
    support: Vec<Interval>,
    peak: f64,
}

fn interpolate(samples: &[(f64, f64)], e: f64) -> f64 {
    let n = samples.len();
    if n == 0 || e < samples[0].0 || e > samples[n - 1].0 {
        return 0.0;
    }
    let k = samples.partition_point(|s| s.0 <= e);
    if k == 0 {
        return samples[0].1;
    }
    if k >= n {
        return samples[n - 1].1;
    }
    let (x0, y0) = samples[k - 1];
    let (x1, y1) = samples[k];
    y0 + (y1 - y0) * (e - x0) / (x1 - x0)
}

fn check_samples(samples: &[(f64, f64)]) -> Result<()> {
    if samples.len() < 2 {
        return Err(Error::InvalidInput(
            "tabulated density needs at least two samples".into(),
        ));
    }
    for (e, j) in samples {
        ensure_finite("tabulated energy", *e)?;
        ensure_finite("tabulated J", *j)?;
        if *j < 0.0 {
            return Err(Error::InvalidInput(format!(
                "tabulated J must be non-negative, got {j} at {e}"
            )));
        }
    }
    if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidInput(
            "tabulated energies must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Upper energy of the truncated ohmic support in units of the cutoff.
fn ohmic_truncation(s: f64) -> f64 {
    // Solve s ln x − x = s ln s − s + ln(tail) for x > s.
    let target = if s > 0.0 { s * s.ln() - s } else { 0.0 } + OHMIC_TAIL.ln();
    let f = |x: f64| s * x.ln() - x - target;
    let mut lo = s.max(1e-300);
    let mut hi = s + 30.0;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi {
            break;
        }
    }
    hi
}

impl SpectralDensity {
    pub fn new(kind: DensityKind) -> Result<Self> {
        let support = match &kind {
            DensityKind::OhmicFamily {
                eta,
                exponent,
                cutoff,
            } => {
                ensure_finite("eta", *eta)?;
                ensure_finite("exponent", *exponent)?;
                ensure_finite("cutoff", *cutoff)?;
                if *eta < 0.0 || *exponent <= 0.0 || *cutoff <= 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "ohmic family needs eta >= 0, s > 0, cutoff > 0 (got {eta}, {exponent}, {cutoff})"
                    )));
                }
                if *eta == 0.0 {
                    vec![]
                } else {
                    vec![Interval {
                        lower: 0.0,
                        upper: cutoff * ohmic_truncation(*exponent),
                    }]
                }
            }
            DensityKind::Lorentzian { eta, center, width } => {
                ensure_finite("eta", *eta)?;
                ensure_finite("center", *center)?;
                ensure_finite("width", *width)?;
                if *eta < 0.0 || *width <= 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "lorentzian needs eta >= 0 and width > 0 (got {eta}, {width})"
                    )));
                }
                if *eta == 0.0 {
                    vec![]
                } else {
                    vec![Interval {
                        lower: center - LORENTZIAN_TRUNCATION * width,
                        upper: center + LORENTZIAN_TRUNCATION * width,
                    }]
                }
            }
            DensityKind::FlatBand {
                kappa,
                lower,
                upper,
            } => {
                ensure_finite("kappa", *kappa)?;
                ensure_finite("lower", *lower)?;
                ensure_finite("upper", *upper)?;
                if *kappa < 0.0 || lower >= upper {
                    return Err(Error::InvalidInput(format!(
                        "flat band needs kappa >= 0 and lower < upper (got {kappa}, [{lower}, {upper}])"
                    )));
                }
                if *kappa == 0.0 {
                    vec![]
                } else {
                    vec![Interval {
                        lower: *lower,
                        upper: *upper,
                    }]
                }
            }
            DensityKind::GappedBand { bands } => {
                if bands.is_empty() {
                    return Err(Error::InvalidInput("gapped band needs at least one band".into()));
                }
                let mut out: Vec<Interval> = Vec::new();
                for b in bands {
                    match &b.shape {
                        BandShape::Flat { kappa } => {
                            ensure_finite("kappa", *kappa)?;
                            if *kappa < 0.0 {
                                return Err(Error::InvalidInput("band kappa must be >= 0".into()));
                            }
                        }
                        BandShape::Tabulated { samples } => {
                            check_samples(samples)?;
                            if samples[0].0 != b.lower || samples[samples.len() - 1].0 != b.upper {
                                return Err(Error::InvalidInput(
                                    "tabulated band edges must match its samples".into(),
                                ));
                            }
                        }
                    }
                    ensure_finite("band lower", b.lower)?;
                    ensure_finite("band upper", b.upper)?;
                    if b.lower >= b.upper {
                        return Err(Error::InvalidInput("band edges must satisfy lower < upper".into()));
                    }
                    if let Some(prev) = out.last() {
                        if b.lower <= prev.upper {
                            return Err(Error::InvalidInput(
                                "bands must be sorted and disjoint".into(),
                            ));
                        }
                    }
                    out.push(Interval {
                        lower: b.lower,
                        upper: b.upper,
                    });
                }
                out
            }
            DensityKind::Tabulated { samples } => {
                check_samples(samples)?;
                if samples.iter().all(|s| s.1 == 0.0) {
                    vec![]
                } else {
                    vec![Interval {
                        lower: samples[0].0,
                        upper: samples[samples.len() - 1].0,
                    }]
                }
            }
        };
        let mut density = Self {
            kind,
            support,
            peak: 0.0,
        };
        density.peak = density.compute_peak();
        Ok(density)
    }

    pub fn ohmic(eta: f64, exponent: f64, cutoff: f64) -> Result<Self> {
        Self::new(DensityKind::OhmicFamily {
            eta,
            exponent,
            cutoff,
        })
    }

    pub fn lorentzian(eta: f64, center: f64, width: f64) -> Result<Self> {
        Self::new(DensityKind::Lorentzian { eta, center, width })
    }

    pub fn flat_band(kappa: f64, lower: f64, upper: f64) -> Result<Self> {
        Self::new(DensityKind::FlatBand {
            kappa,
            lower,
            upper,
        })
    }

    pub fn gapped(bands: Vec<Band>) -> Result<Self> {
        Self::new(DensityKind::GappedBand { bands })
    }

    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(DensityKind::Tabulated { samples })
    }

    /// The identically vanishing density.
    pub fn zero() -> Self {
        Self::flat_band(0.0, 0.0, 1.0).expect("valid")
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    /// Intervals on which `J` may be non-zero, sorted and disjoint.
    pub fn support(&self) -> &[Interval] {
        &self.support
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    /// Largest value of `J`.
    pub fn peak(&self) -> f64 {
        self.peak
    }

    fn compute_peak(&self) -> f64 {
        match &self.kind {
            DensityKind::OhmicFamily {
                eta,
                exponent,
                cutoff,
            } => 2.0 * PI * eta * cutoff * (exponent * exponent.ln() - exponent).exp(),
            DensityKind::Lorentzian { eta, .. } => *eta,
            DensityKind::FlatBand { kappa, .. } => *kappa,
            DensityKind::GappedBand { bands } => bands
                .iter()
                .map(|b| match &b.shape {
                    BandShape::Flat { kappa } => *kappa,
                    BandShape::Tabulated { samples } => {
                        samples.iter().map(|s| s.1).fold(0.0, f64::max)
                    }
                })
                .fold(0.0, f64::max),
            DensityKind::Tabulated { samples } => samples.iter().map(|s| s.1).fold(0.0, f64::max),
        }
    }

    /// `J(ε)`, rejecting non-finite energies.
    pub fn evaluate_j(&self, e: f64) -> Result<f64> {
        ensure_finite("energy", e)?;
        Ok(self.j(e))
    }

    /// `J(ε)` for a finite energy; zero outside the support.
    pub(crate) fn j(&self, e: f64) -> f64 {
        if !self.support.iter().any(|iv| iv.contains(e)) {
            return 0.0;
        }
        match &self.kind {
            DensityKind::OhmicFamily {
                eta,
                exponent,
                cutoff,
            } => {
                if e <= 0.0 {
                    return 0.0;
                }
                let x = e / cutoff;
                2.0 * PI * eta * cutoff * (exponent * x.ln() - x).exp()
            }
            DensityKind::Lorentzian { eta, center, width } => {
                let d = e - center;
                eta * width * width / (d * d + width * width)
            }
            DensityKind::FlatBand { kappa, .. } => *kappa,
            DensityKind::GappedBand { bands } => bands
                .iter()
                .find(|b| e >= b.lower && e <= b.upper)
                .map_or(0.0, |b| b.value(e)),
            DensityKind::Tabulated { samples } => interpolate(samples, e),
        }
    }

    /// Points where `J` is not smooth or changes character; used to split
    /// quadrature panels.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        match &self.kind {
            DensityKind::GappedBand { bands } => {
                for b in bands {
                    if let BandShape::Tabulated { samples } = &b.shape {
                        out.extend(samples.iter().map(|s| s.0));
                    }
                }
            }
            DensityKind::Tabulated { samples } => out.extend(samples.iter().map(|s| s.0)),
            DensityKind::Lorentzian { center, .. } => out.push(*center),
            DensityKind::OhmicFamily {
                exponent, cutoff, ..
            } => out.push(exponent * cutoff),
            DensityKind::FlatBand { .. } => {}
        }
        out
    }

    /// Support edges near which `J` behaves algebraically (`J ~ ε^s`);
    /// quadrature panels are graded toward them.
    pub fn graded_edges(&self) -> Vec<f64> {
        match &self.kind {
            DensityKind::OhmicFamily { .. } if !self.is_zero() => vec![0.0],
            _ => Vec::new(),
        }
    }

    /// Smallest energy scale over which `J` varies.
    pub fn feature_scale(&self) -> f64 {
        match &self.kind {
            DensityKind::OhmicFamily {
                exponent, cutoff, ..
            } => cutoff * exponent.min(1.0),
            DensityKind::Lorentzian { width, .. } => *width,
            _ => self
                .support
                .iter()
                .map(Interval::width)
                .fold(f64::INFINITY, f64::min)
                .min(self.min_sample_spacing()),
        }
    }

    fn min_sample_spacing(&self) -> f64 {
        let spacing = |s: &[(f64, f64)]| {
            s.windows(2)
                .map(|w| w[1].0 - w[0].0)
                .fold(f64::INFINITY, f64::min)
        };
        match &self.kind {
            DensityKind::Tabulated { samples } => spacing(samples),
            DensityKind::GappedBand { bands } => bands
                .iter()
                .map(|b| match &b.shape {
                    BandShape::Tabulated { samples } => spacing(samples),
                    BandShape::Flat { .. } => f64::INFINITY,
                })
                .fold(f64::INFINITY, f64::min),
            _ => f64::INFINITY,
        }
    }

    /// Characteristic size of `Δ`, used for absolute tolerances.
    pub fn scale(&self) -> f64 {
        let width: f64 = self.support.iter().map(Interval::width).sum();
        (self.peak * width.max(1.0) / (2.0 * PI)).max(1e-300)
    }

    /// Lamb shift `Δ(ε) = P∫ dε′/2π J(ε′)/(ε − ε′)`.
    ///
    /// On each support interval `[a, b]` the integrand is regularized by
    /// subtracting `J(p)` with `p` the point of `[a, b]` closest to `ε`; the
    /// subtracted piece integrates to `J(p) ln|(ε−a)/(ε−b)|`. At a band edge
    /// where `J` is finite the result is infinite.
    pub fn lamb_shift(&self, e: f64) -> Result<f64> {
        ensure_finite("energy", e)?;
        let mut total = 0.0;
        let bps = self.breakpoints();
        for iv in &self.support {
            total += self.pv_piece(e, iv, &bps)?;
        }
        Ok(total / (2.0 * PI))
    }

    fn pv_piece(&self, e: f64, iv: &Interval, bps: &[f64]) -> Result<f64> {
        let (a, b) = (iv.lower, iv.upper);
        let p = e.clamp(a, b);
        let jp = self.j(p);
        let f = |x: f64| {
            if x == e {
                0.0
            } else {
                (self.j(x) - jp) / (e - x)
            }
        };
        let mut cuts: Vec<f64> = bps.to_vec();
        cuts.push(p);
        let tol = Tolerance {
            absolute: 1e-12 * self.scale(),
            relative: 1e-10,
            max_intervals: 4000,
        };
        let regular = integrate(f, a, b, &cuts, tol, "principal-value integral")?.value;
        let log_term = if jp == 0.0 {
            0.0
        } else {
            jp * ((e - a) / (e - b)).abs().ln()
        };
        Ok(regular + log_term)
    }

    /// Retarded self-energy `Δ(ε) − iJ(ε)/2`.
    pub fn self_energy(&self, e: f64) -> Result<Complex64> {
        let delta = self.lamb_shift(e)?;
        Ok(Complex64::new(delta, -0.5 * self.j(e)))
    }
}

/// A thermal reservoir.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirSpec {
    pub statistics: Statistics,
    pub temperature: f64,
    pub chemical_potential: f64,
    pub density: SpectralDensity,
}

impl ReservoirSpec {
    pub fn new(
        statistics: Statistics,
        temperature: f64,
        chemical_potential: f64,
        density: SpectralDensity,
    ) -> Result<Self> {
        ensure_finite("temperature", temperature)?;
        ensure_finite("chemical potential", chemical_potential)?;
        if temperature < 0.0 {
            return Err(Error::InvalidInput(format!(
                "temperature must be >= 0, got {temperature}"
            )));
        }
        if statistics == Statistics::Boson {
            if let Some(first) = density.support().first() {
                let inf = first.lower;
                let ok = chemical_potential < inf
                    || (chemical_potential == inf && density.j(inf) == 0.0);
                if !ok {
                    return Err(Error::Domain(format!(
                        "boson reservoir needs chemical potential below the band bottom {inf}, got {chemical_potential}"
                    )));
                }
            }
        }
        Ok(Self {
            statistics,
            temperature,
            chemical_potential,
            density,
        })
    }

    /// Thermal occupation `f(ε) = 1/(e^{(ε−μ)/T} ∓ 1)`.
    pub fn distribution(&self, e: f64) -> Result<f64> {
        ensure_finite("energy", e)?;
        if self.statistics == Statistics::Boson && e <= self.chemical_potential {
            return Err(Error::Domain(format!(
                "Bose occupation undefined at ε = {e} <= μ = {}",
                self.chemical_potential
            )));
        }
        Ok(self.occupation(e))
    }

    /// Unchecked occupation; infinite for bosons at or below `μ`.
    pub(crate) fn occupation(&self, e: f64) -> f64 {
        occupation(self.statistics, self.temperature, self.chemical_potential, e)
    }
}

pub(crate) fn occupation(stats: Statistics, t: f64, mu: f64, e: f64) -> f64 {
    let d = e - mu;
    match stats {
        Statistics::Boson => {
            if d <= 0.0 {
                f64::INFINITY
            } else if t == 0.0 {
                0.0
            } else {
                1.0 / (d / t).exp_m1()
            }
        }
        Statistics::Fermion => {
            if t == 0.0 {
                if d < 0.0 {
                    1.0
                } else if d == 0.0 {
                    0.5
                } else {
                    0.0
                }
            } else {
                let x = d / t;
                if x > 0.0 {
                    let y = (-x).exp();
                    y / (1.0 + y)
                } else {
                    1.0 / (1.0 + x.exp())
                }
            }
        }
    }
}

/// One reservoir attached to the system with an `N x N` weight matrix; the
/// reservoir contributes `W J(ε)` to the matrix spectral density.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub reservoir: ReservoirSpec,
    pub weights: CMatrix,
}

/// System levels and their reservoirs.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub statistics: Statistics,
    pub energy: CMatrix,
    pub couplings: Vec<Coupling>,
}

impl SystemSpec {
    pub fn new(statistics: Statistics, energy: CMatrix, couplings: Vec<Coupling>) -> Result<Self> {
        require_square(&energy, "energy matrix")?;
        if hermiticity_defect(&energy) > 1e-12 {
            return Err(Error::InvalidInput("energy matrix must be Hermitian".into()));
        }
        let n = energy.nrows();
        for (k, c) in couplings.iter().enumerate() {
            if c.reservoir.statistics != statistics {
                return Err(Error::InvalidInput(format!(
                    "reservoir {k} is {} but the system is {statistics}",
                    c.reservoir.statistics
                )));
            }
            require_square(&c.weights, "coupling weights")?;
            if c.weights.nrows() != n {
                return Err(Error::InvalidInput(format!(
                    "reservoir {k} weights are {}x{}, system is {n}x{n}",
                    c.weights.nrows(),
                    c.weights.ncols()
                )));
            }
            if hermiticity_defect(&c.weights) > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "reservoir {k} weights must be Hermitian"
                )));
            }
            if hermitian_eigenvalues(&c.weights)[0] < -1e-12 {
                return Err(Error::InvalidInput(format!(
                    "reservoir {k} weights must be positive semidefinite"
                )));
            }
        }
        Ok(Self {
            statistics,
            energy,
            couplings,
        })
    }

    /// Single level of energy `eps` coupled with unit weight to each reservoir.
    pub fn scalar(statistics: Statistics, eps: f64, reservoirs: Vec<ReservoirSpec>) -> Result<Self> {
        ensure_finite("level energy", eps)?;
        let one = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        Self::new(
            statistics,
            CMatrix::from_element(1, 1, Complex64::new(eps, 0.0)),
            reservoirs
                .into_iter()
                .map(|reservoir| Coupling {
                    reservoir,
                    weights: one.clone(),
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.energy.nrows()
    }

    /// Scalar view for single-level analyses.
    pub fn scalar_view(&self) -> Result<ScalarBath<'_>> {
        if self.dim() != 1 {
            return Err(Error::Precondition(format!(
                "operation requires a single-level system, got N = {}",
                self.dim()
            )));
        }
        let mut support: Vec<Interval> = Vec::new();
        let mut parts = Vec::new();
        for c in &self.couplings {
            let w = c.weights[(0, 0)].re;
            if w == 0.0 || c.reservoir.density.is_zero() {
                continue;
            }
            support.extend_from_slice(c.reservoir.density.support());
            parts.push((w, &c.reservoir));
        }
        support.sort_by(|a, b| a.lower.total_cmp(&b.lower));
        let mut merged: Vec<Interval> = Vec::new();
        for iv in support {
            match merged.last_mut() {
                Some(last) if iv.lower <= last.upper => last.upper = last.upper.max(iv.upper),
                _ => merged.push(iv),
            }
        }
        Ok(ScalarBath {
            level: self.energy[(0, 0)].re,
            parts,
            support: merged,
        })
    }
}

/// Total scalar spectral density `Σ_α w_α J_α` seen by a single level.
#[derive(Debug, Clone)]
pub struct ScalarBath<'a> {
    pub level: f64,
    parts: Vec<(f64, &'a ReservoirSpec)>,
    support: Vec<Interval>,
}

impl ScalarBath<'_> {
    /// Merged support of all reservoirs.
    pub fn support(&self) -> &[Interval] {
        &self.support
    }

    pub fn is_decoupled(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn j(&self, e: f64) -> f64 {
        self.parts.iter().map(|(w, r)| w * r.density.j(e)).sum()
    }

    /// `Σ_α w_α J_α(ε) f_α(ε)`.
    pub fn j_thermal(&self, e: f64) -> f64 {
        self.parts
            .iter()
            .map(|(w, r)| {
                let j = r.density.j(e);
                if j == 0.0 {
                    0.0
                } else {
                    w * j * r.occupation(e)
                }
            })
            .sum()
    }

    pub fn lamb_shift(&self, e: f64) -> Result<f64> {
        let mut total = 0.0;
        for (w, r) in &self.parts {
            total += w * r.density.lamb_shift(e)?;
        }
        Ok(total)
    }

    pub fn self_energy(&self, e: f64) -> Result<Complex64> {
        Ok(Complex64::new(self.lamb_shift(e)?, -0.5 * self.j(e)))
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .parts
            .iter()
            .flat_map(|(_, r)| {
                let mut b = r.density.breakpoints();
                b.extend(r.density.support().iter().flat_map(|iv| [iv.lower, iv.upper]));
                if r.statistics == Statistics::Fermion {
                    b.push(r.chemical_potential);
                }
                b
            })
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    pub fn graded_edges(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .parts
            .iter()
            .flat_map(|(_, r)| r.density.graded_edges())
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Largest `w J` peak, used to scale tolerances.
    pub fn peak(&self) -> f64 {
        self.parts.iter().map(|(w, r)| w * r.density.peak()).sum()
    }

    pub fn reservoirs(&self) -> impl Iterator<Item = (f64, &ReservoirSpec)> {
        self.parts.iter().map(|(w, r)| (*w, *r))
    }
}
