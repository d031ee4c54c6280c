//! Marching solver for the propagator equation
//! `du/dτ = −iεu − ∫₀^τ g(τ−τ′) u(τ′) dτ′`, `u(0) = 1`.
//!
//! The free evolution is integrated exactly through the factor
//! `E = e^{−iε dt}` and the memory term by the trapezoidal rule on both the
//! time step and the convolution (exponential trapezoid). The endpoint term
//! `½ dt G₀ u_{k+1}` is linear, so the implicit update is solved exactly
//! with a precomputed matrix inverse rather than by a fixed-point
//! iteration. The scheme is second order and reproduces the uncoupled
//! evolution to round-off.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    block_to_matrix, inverse, matrix_to_block, mul_acc, spectral_norm, unitary_propagator, CMatrix,
    MatSeries, ZERO,
};

/// Bound on the propagator norm beyond which the march is declared unstable.
pub const INSTABILITY_BOUND: f64 = 1.0 + 1e-3;
/// Convolutions longer than this are split over fixed-size chunks.
const PAR_CHUNK: usize = 2048;

/// Operand order of a lattice convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Order {
    /// `Σ_j w_j K_{m−j} U_j`
    KernelFirst,
    /// `Σ_j w_j U_j K_{m−j}`
    SeriesFirst,
}

/// Lattice convolution over `j ∈ [lo, hi)` written into `out` (overwritten).
///
/// The summation order depends only on the indices, never on the thread
/// count: chunks of fixed size are reduced left to right.
#[allow(clippy::too_many_arguments)]
pub(crate) fn convolve(
    out: &mut [Complex64],
    kernel: &MatSeries,
    series: &MatSeries,
    m: usize,
    lo: usize,
    hi: usize,
    order: Order,
    weight: impl Fn(usize) -> f64 + Sync,
) {
    let n = kernel.dim();
    out.iter_mut().for_each(|z| *z = ZERO);
    if hi <= lo {
        return;
    }
    let sum_range = |a: usize, b: usize, acc: &mut [Complex64]| {
        for j in a..b {
            match order {
                Order::KernelFirst => mul_acc(acc, kernel.at(m - j), series.at(j), n, weight(j)),
                Order::SeriesFirst => mul_acc(acc, series.at(j), kernel.at(m - j), n, weight(j)),
            }
        }
    };
    if hi - lo <= PAR_CHUNK || n * n * (hi - lo) < 4 * PAR_CHUNK {
        sum_range(lo, hi, out);
        return;
    }
    let starts: Vec<usize> = (lo..hi).step_by(PAR_CHUNK).collect();
    let partial: Vec<Vec<Complex64>> = starts
        .par_iter()
        .map(|&a| {
            let mut acc = vec![ZERO; n * n];
            sum_range(a, (a + PAR_CHUNK).min(hi), &mut acc);
            acc
        })
        .collect();
    for p in partial {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
}

/// Solution of the propagator equation on a uniform lattice.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub u: MatSeries,
    pub u_dot: MatSeries,
}

/// Solves the propagator equation for `n` steps of size `dt` with the
/// memory kernel sampled on the lag lattice (`kernel.len() > n`).
pub fn march(energy: &CMatrix, kernel: &MatSeries, dt: f64, n: usize) -> Result<Propagator> {
    let dim = energy.nrows();
    let (u, u_dot) = march_forced(energy, kernel, dt, n, &CMatrix::identity(dim, dim), None, true)?;
    Ok(Propagator { u, u_dot })
}

/// Marches `dX/dτ = −iεX − ∫₀^τ g(τ−τ′)X(τ′)dτ′ + S(τ)` from `X(0) = init`.
///
/// With `check_norm` the march aborts once the spectral norm of `X`
/// exceeds [`INSTABILITY_BOUND`].
pub(crate) fn march_forced(
    energy: &CMatrix,
    kernel: &MatSeries,
    dt: f64,
    n: usize,
    init: &CMatrix,
    source: Option<&MatSeries>,
    check_norm: bool,
) -> Result<(MatSeries, MatSeries)> {
    let dim = energy.nrows();
    if kernel.dim() != dim || kernel.len() < n + 1 {
        return Err(Error::Precondition(format!(
            "kernel lattice has {} entries of size {}, need {} of size {dim}",
            kernel.len(),
            kernel.dim(),
            n + 1
        )));
    }
    if let Some(s) = source {
        if s.dim() != dim || s.len() < n + 1 {
            return Err(Error::Precondition("source lattice too short".into()));
        }
    }
    let e_step = unitary_propagator(energy, dt);
    let minus_i_eps = energy * Complex64::new(0.0, -1.0);
    let g0 = kernel.matrix(0);
    let lhs = CMatrix::identity(dim, dim) + &g0 * Complex64::new(0.25 * dt * dt, 0.0);
    let lhs_inv = inverse(&lhs).ok_or(Error::Instability {
        step: 0,
        norm: f64::INFINITY,
    })?;
    let half = Complex64::new(0.5 * dt, 0.0);
    let source_at = |k: usize| source.map(|s| s.matrix(k));

    let mut x = MatSeries::zeros(dim, n + 1);
    let mut x_dot = MatSeries::zeros(dim, n + 1);
    x.set_matrix(0, init);
    let mut d0 = &minus_i_eps * init;
    if let Some(s0) = source_at(0) {
        d0 += s0;
    }
    x_dot.set_matrix(0, &d0);

    // Memory integral at the current step, F_k.
    let mut memory = CMatrix::zeros(dim, dim);
    let mut history = vec![ZERO; dim * dim];
    let mut next_block = vec![ZERO; dim * dim];
    for k in 0..n {
        // H_{k+1} = dt [½ G_{k+1} X_0 + Σ_{j=1}^{k} G_{k+1−j} X_j]
        convolve(&mut history, kernel, &x, k + 1, 0, k + 1, Order::KernelFirst, |j| {
            if j == 0 {
                0.5 * dt
            } else {
                dt
            }
        });
        let h_next = block_to_matrix(dim, &history);
        let x_k = x.matrix(k);
        let mut rhs = &e_step * &x_k - (&e_step * &memory + &h_next) * half;
        if let (Some(s0), Some(s1)) = (source_at(k), source_at(k + 1)) {
            rhs += (&e_step * s0 + s1) * half;
        }
        let x_next = &lhs_inv * rhs;
        memory = h_next + &g0 * &x_next * half;

        if check_norm {
            let norm = spectral_norm(&x_next);
            if !norm.is_finite() || norm > INSTABILITY_BOUND {
                return Err(Error::Instability { step: k + 1, norm });
            }
        }
        matrix_to_block(&x_next, &mut next_block);
        x.at_mut(k + 1).copy_from_slice(&next_block);
        let mut dx = &minus_i_eps * &x_next - &memory;
        if let Some(s1) = source_at(k + 1) {
            dx += s1;
        }
        x_dot.set_matrix(k + 1, &dx);
    }
    Ok((x, x_dot))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_kernel(values: impl Fn(f64) -> Complex64, dt: f64, n: usize) -> MatSeries {
        let mut s = MatSeries::zeros(1, n + 1);
        for k in 0..=n {
            s.at_mut(k)[0] = values(k as f64 * dt);
        }
        s
    }

    #[test]
    fn decoupled_is_exact() {
        let eps = CMatrix::from_element(1, 1, Complex64::new(1.3, 0.0));
        let n = 5000;
        let dt = 0.01;
        let p = march(&eps, &MatSeries::zeros(1, n + 1), dt, n).unwrap();
        for k in (0..=n).step_by(97) {
            let exact = Complex64::from_polar(1.0, -1.3 * dt * k as f64);
            assert!((p.u.entry(k, 0, 0) - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn exponential_kernel_matches_analytic() {
        // g(τ) = (λΓ/2) e^{−Γτ}, ε = 0: u'' + Γu' + (λΓ/2) u = 0.
        let (lam, gam) = (0.5, 2.0);
        let c = lam * gam / 2.0;
        let dt = 0.005;
        let n = 2000;
        let k = scalar_kernel(|t| Complex64::new(c * (-gam * t).exp(), 0.0), dt, n);
        let p = march(&CMatrix::zeros(1, 1), &k, dt, n).unwrap();
        // roots of r² + Γ r + c = 0
        let disc = (gam * gam - 4.0 * c).sqrt();
        let (r1, r2) = ((-gam + disc) / 2.0, (-gam - disc) / 2.0);
        let exact = |t: f64| (r1 * (r2 * t).exp() - r2 * (r1 * t).exp()) / (r1 - r2);
        for idx in [100, 500, 1000, 2000] {
            let t = idx as f64 * dt;
            assert!((p.u.entry(idx, 0, 0).re - exact(t)).abs() < 1e-5, "{t}");
        }
    }
}
