//! Nonequilibrium Green functions: the retarded propagator `u`, the
//! correlation function `v`, bound states and frequency-domain spectra.

pub mod correlation;
pub mod kernels;
pub mod spectrum;
pub mod volterra;

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};
use crate::linalg::{hermitian_part, CMatrix, MatSeries};
use crate::spectral::{DensityKind, SystemSpec};

pub use kernels::{kernel_lattice, memory_kernel, noise_kernel, KernelKind};
pub use spectrum::{
    dissipation_spectrum, find_bound_states, reconstruct_u, steady_fluctuation_spectrum,
    BoundState, ScalarSpectrum,
};

/// Uniform time lattice `t_k = t0 + k dt`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n_steps: usize) -> Result<Self> {
        ensure_finite("t0", t0)?;
        ensure_finite("dt", dt)?;
        if dt <= 0.0 {
            return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
        }
        if n_steps < 2 {
            return Err(Error::InvalidInput(format!(
                "grid needs at least 2 steps, got {n_steps}"
            )));
        }
        Ok(Self { t0, dt, n_steps })
    }

    /// Grid on `[0, t_max]`; `t_max` must be an integer multiple of `dt`.
    pub fn with_horizon(t_max: f64, dt: f64) -> Result<Self> {
        ensure_finite("t_max", t_max)?;
        ensure_finite("dt", dt)?;
        if dt <= 0.0 || t_max <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "t_max and dt must be positive, got {t_max} and {dt}"
            )));
        }
        let steps = (t_max / dt).round();
        if (steps * dt - t_max).abs() > 1e-9 * t_max {
            return Err(Error::InvalidInput(format!(
                "t_max = {t_max} is not a multiple of dt = {dt}"
            )));
        }
        Self::new(0.0, dt, steps as usize)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + self.dt * k as f64
    }

    /// Elapsed time `t_k − t0`.
    pub fn elapsed(&self, k: usize) -> f64 {
        self.dt * k as f64
    }

    pub fn t_max(&self) -> f64 {
        self.time(self.n_steps)
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Step index of time `t`, if it lies on the lattice.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = (t - self.t0) / self.dt;
        let k = x.round();
        if k < 0.0 || k > self.n_steps as f64 || (x - k).abs() > 1e-6 {
            None
        } else {
            Some(k as usize)
        }
    }

    /// Same grid with `factor` times more steps over the same horizon.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            t0: self.t0,
            dt: self.dt / factor as f64,
            n_steps: self.n_steps * factor,
        }
    }
}

/// Values of `v(t_p, t_q)` for a fixed anchor `q` and `p = 0..=q+max_lag`.
#[derive(Debug, Clone)]
pub struct VSlice {
    pub anchor: usize,
    pub values: MatSeries,
}

/// Green functions of one system on one grid.
#[derive(Debug, Clone)]
pub struct GreenFunctions {
    pub grid: TimeGrid,
    /// Bare system energy matrix.
    pub energy: CMatrix,
    /// `u(t_k, t0)`.
    pub u: MatSeries,
    /// `du/dt` from the equation's right-hand side.
    pub u_dot: MatSeries,
    /// `v(t_k, t_k)`.
    pub v_diag: Option<MatSeries>,
    /// Off-diagonal slices keyed by anchor step.
    pub v_slices: BTreeMap<usize, VSlice>,
    pub warnings: Vec<String>,
}

impl GreenFunctions {
    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    pub fn u_matrix(&self, k: usize) -> CMatrix {
        self.u.matrix(k)
    }

    /// `du/dt` of the computed lattice `u`.
    ///
    /// `u_dot` agrees with the derivative of the lattice solution only to
    /// the scheme's `O(dt²)`; rates built from this series instead
    /// integrate back to the lattice `u` itself. The slowly varying
    /// `w = e^{iHt}u` is differenced (fourth order) and mapped back with
    /// `u̇ = −iHu + e^{−iHt}ẇ`, which is exact for a decoupled system. The
    /// first point keeps the equation's value.
    pub fn lattice_u_dot(&self) -> MatSeries {
        let n = self.u.len();
        let dim = self.dim();
        let eig = hermitian_part(&self.energy).symmetric_eigen();
        let rotation = |t: f64| -> CMatrix {
            let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                dim,
                eig.eigenvalues.iter().map(|&e| Complex64::from_polar(1.0, -e * t)),
            ));
            &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
        };
        let mut w = MatSeries::zeros(dim, n);
        for k in 0..n {
            let t = self.grid.elapsed(k);
            w.set_matrix(k, &(rotation(-t) * self.u.matrix(k)));
        }
        let w_dot = correlation::differentiate(&w, self.grid.dt);
        let minus_i_h = &self.energy * Complex64::new(0.0, -1.0);
        let mut d = MatSeries::zeros(dim, n);
        for k in 0..n {
            let t = self.grid.elapsed(k);
            let m = &minus_i_h * self.u.matrix(k) + rotation(t) * w_dot.matrix(k);
            d.set_matrix(k, &m);
        }
        if n > 0 {
            d.at_mut(0).copy_from_slice(self.u_dot.at(0));
        }
        d
    }

    /// Scalar propagator series (single-level systems).
    pub fn u_scalar(&self) -> Vec<Complex64> {
        (0..self.u.len()).map(|k| self.u.entry(k, 0, 0)).collect()
    }

    pub fn v_diag_matrix(&self, k: usize) -> Result<CMatrix> {
        self.v_diag
            .as_ref()
            .map(|v| v.matrix(k))
            .ok_or_else(|| Error::Precondition("v has not been solved".into()))
    }

    /// `v(t_p, t_q)` from the diagonal or a stored slice, using
    /// `v(τ,t)† = v(t,τ)` when only the transposed slice is available.
    pub fn v_at(&self, p: usize, q: usize) -> Result<CMatrix> {
        if p == q {
            if let Some(v) = &self.v_diag {
                return Ok(v.matrix(p));
            }
        }
        if let Some(s) = self.v_slices.get(&q) {
            if p < s.values.len() {
                return Ok(s.values.matrix(p));
            }
        }
        if let Some(s) = self.v_slices.get(&p) {
            if q < s.values.len() {
                return Ok(s.values.matrix(q).adjoint());
            }
        }
        Err(Error::Precondition(format!(
            "no v slice covers steps ({p}, {q})"
        )))
    }
}

/// Highest frequency the grid must resolve.
pub fn fastest_scale(sys: &SystemSpec) -> f64 {
    let mut scale = crate::linalg::hermitian_eigenvalues(&sys.energy)
        .iter()
        .map(|e| e.abs())
        .fold(0.0, f64::max);
    for c in &sys.couplings {
        let d = &c.reservoir.density;
        if d.is_zero() {
            continue;
        }
        let s = match d.kind() {
            DensityKind::OhmicFamily { cutoff, .. } => *cutoff,
            DensityKind::Lorentzian { center, width, .. } => center.abs() + width,
            _ => d
                .support()
                .iter()
                .map(|iv| iv.lower.abs().max(iv.upper.abs()))
                .fold(0.0, f64::max),
        };
        scale = scale.max(s);
    }
    scale
}

/// Solves for the retarded propagator `u(t, t0)` on `grid`.
pub fn solve_u(sys: &SystemSpec, grid: &TimeGrid) -> Result<GreenFunctions> {
    let kernel = kernel_lattice(sys, KernelKind::Memory, grid.dt, grid.n_steps);
    let mut gf = solve_u_with_kernel(&sys.energy, &kernel, grid)?;
    let scale = fastest_scale(sys);
    if scale > 0.0 && grid.dt > 0.1 / scale {
        let msg = format!(
            "dt = {} is coarser than 0.1/{scale:.4} recommended for the fastest scale",
            grid.dt
        );
        log::warn!("{msg}");
        gf.warnings.push(msg);
    }
    Ok(gf)
}

/// Solves the propagator equation with a caller-supplied kernel lattice.
pub fn solve_u_with_kernel(energy: &CMatrix, kernel: &MatSeries, grid: &TimeGrid) -> Result<GreenFunctions> {
    let p = volterra::march(energy, kernel, grid.dt, grid.n_steps)?;
    Ok(GreenFunctions {
        grid: *grid,
        energy: energy.clone(),
        u: p.u,
        u_dot: p.u_dot,
        v_diag: None,
        v_slices: BTreeMap::new(),
        warnings: Vec::new(),
    })
}

/// Options for [`solve_v`].
#[derive(Debug, Clone, Default)]
pub struct VOptions {
    /// Anchor steps `q` at which slices `v(t_p, t_q)` are stored.
    pub anchors: Vec<usize>,
    /// Largest lag `p − q` (in steps) of each slice.
    pub max_lag: usize,
}

/// Computes `v(t,t)` on every step and the requested slices.
pub fn solve_v(sys: &SystemSpec, mut gf: GreenFunctions, options: &VOptions) -> Result<GreenFunctions> {
    let n = gf.grid.n_steps;
    if gf.u.len() != n + 1 || gf.u.dim() != sys.dim() {
        return Err(Error::Precondition(
            "propagator missing or solved on a different grid".into(),
        ));
    }
    let noise = kernel_lattice(sys, KernelKind::Noise, gf.grid.dt, n);
    gf.v_diag = Some(correlation::v_diagonal(&gf.u, &noise, gf.grid.dt)?);
    for &q in &options.anchors {
        let lag = options.max_lag.min(n - q.min(n));
        if q > n {
            return Err(Error::Precondition(format!("anchor step {q} beyond grid")));
        }
        let values = correlation::v_slice(&gf.u, &noise, gf.grid.dt, q, lag)?;
        gf.v_slices.insert(q, VSlice { anchor: q, values });
    }
    Ok(gf)
}

/// `v(t_p, t_q)` for `p = 0..=q+max_lag` by marching the equation of
/// motion of `v` directly (cross-check of the quadratic form).
pub fn march_v(sys: &SystemSpec, gf: &GreenFunctions, q: usize, max_lag: usize) -> Result<MatSeries> {
    let n = gf.grid.n_steps;
    let memory = kernel_lattice(sys, KernelKind::Memory, gf.grid.dt, n);
    let noise = kernel_lattice(sys, KernelKind::Noise, gf.grid.dt, n);
    correlation::march_v(&sys.energy, &memory, &gf.u, &noise, gf.grid.dt, q, max_lag)
}
