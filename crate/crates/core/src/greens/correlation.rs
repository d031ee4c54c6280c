//! The correlation function
//! `v(τ,t) = ∫₀^τ dτ₁ ∫₀^t dτ₂ u(τ−τ₁) g̃(τ₁−τ₂) u†(t−τ₂)`
//! evaluated as a trapezoidal quadratic form on the lattice.
//!
//! The equal-time diagonal is accumulated incrementally in `O(n)` work per
//! step; off-diagonal slices for a fixed second argument reuse the partial
//! sums `Z_d = Σ_y a_y g̃_{d+y} u_y†`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greens::volterra::{convolve, march_forced, Order};
use crate::linalg::{mul_acc, mul_adj_acc, CMatrix, MatSeries, ZERO};

/// `g̃_m` for a signed lag, using `g̃_{−m} = g̃_m†`.
fn noise_at(noise: &MatSeries, m: isize, out: &mut [Complex64]) {
    let n = noise.dim();
    if m >= 0 {
        out.copy_from_slice(noise.at(m as usize));
    } else {
        let src = noise.at((-m) as usize);
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = src[j * n + i].conj();
            }
        }
    }
}

fn trapezoid_weight(j: usize, last: usize) -> f64 {
    if last == 0 {
        0.0
    } else if j == 0 || j == last {
        0.5
    } else {
        1.0
    }
}

/// `v(t_k, t_k)` for every lattice step.
pub fn v_diagonal(u: &MatSeries, noise: &MatSeries, dt: f64) -> Result<MatSeries> {
    let dim = u.dim();
    let len = u.len();
    if noise.dim() != dim || noise.len() < len {
        return Err(Error::Precondition(
            "noise kernel lattice shorter than the propagator".into(),
        ));
    }
    let mut v = MatSeries::zeros(dim, len);
    // P_k = Σ_{x,y<k} b_x b_y U_x g̃_{y−x} U_y†, with b_0 = ½ and 1 otherwise.
    let mut p = vec![ZERO; dim * dim];
    let mut y = vec![ZERO; dim * dim];
    let mut c = vec![ZERO; dim * dim];
    let mut tmp = vec![ZERO; dim * dim];
    let mut xkk = vec![ZERO; dim * dim];
    let dt2 = dt * dt;
    for k in 0..len {
        // C_k = (Σ_{x<k} b_x U_x g̃_{k−x}) U_k†
        convolve(&mut y, noise, u, k, 0, k, Order::SeriesFirst, |x| if x == 0 { 0.5 } else { 1.0 });
        c.iter_mut().for_each(|z| *z = ZERO);
        mul_adj_acc(&mut c, &y, u.at(k), dim, 1.0);
        // X_kk = U_k g̃_0 U_k†
        tmp.iter_mut().for_each(|z| *z = ZERO);
        mul_acc(&mut tmp, u.at(k), noise.at(0), dim, 1.0);
        xkk.iter_mut().for_each(|z| *z = ZERO);
        mul_adj_acc(&mut xkk, &tmp, u.at(k), dim, 1.0);

        if k > 0 {
            let out = v.at_mut(k);
            for i in 0..dim {
                for j in 0..dim {
                    let cij = c[i * dim + j] + c[j * dim + i].conj();
                    out[i * dim + j] = dt2 * (p[i * dim + j] + 0.5 * cij + 0.25 * xkk[i * dim + j]);
                }
            }
            // Exact Hermitian symmetry.
            for i in 0..dim {
                out[i * dim + i].im = 0.0;
                for j in 0..i {
                    let z = 0.5 * (out[i * dim + j] + out[j * dim + i].conj());
                    out[i * dim + j] = z;
                    out[j * dim + i] = z.conj();
                }
            }
        }
        let b = if k == 0 { 0.5 } else { 1.0 };
        for i in 0..dim {
            for j in 0..dim {
                let cij = c[i * dim + j] + c[j * dim + i].conj();
                p[i * dim + j] += b * cij + b * b * xkk[i * dim + j];
            }
        }
    }
    Ok(v)
}

/// `Z_d` for `d ∈ [−q, max_d]`, indexed by `d + q`.
fn partial_sums(u: &MatSeries, noise: &MatSeries, q: usize, max_d: usize) -> Vec<Vec<Complex64>> {
    let dim = u.dim();
    let span: Vec<isize> = (-(q as isize)..=max_d as isize).collect();
    span.par_iter()
        .map(|&d| {
            let mut z = vec![ZERO; dim * dim];
            let mut g = vec![ZERO; dim * dim];
            for yy in 0..=q {
                let w = trapezoid_weight(yy, q);
                if w == 0.0 {
                    continue;
                }
                noise_at(noise, d + yy as isize, &mut g);
                mul_adj_acc(&mut z, &g, u.at(yy), dim, w);
            }
            z
        })
        .collect()
}

/// `v(t_p, t_q)` for `p = 0..=q+max_lag` at fixed anchor step `q`.
pub fn v_slice(u: &MatSeries, noise: &MatSeries, dt: f64, q: usize, max_lag: usize) -> Result<MatSeries> {
    let dim = u.dim();
    let top = q + max_lag;
    if top >= u.len() || top >= noise.len() {
        return Err(Error::Precondition(format!(
            "slice up to step {top} exceeds the solved horizon of {} steps",
            u.len().saturating_sub(1)
        )));
    }
    let z = partial_sums(u, noise, q, max_lag);
    let rows: Vec<Vec<Complex64>> = (0..=top)
        .into_par_iter()
        .map(|p| {
            let mut acc = vec![ZERO; dim * dim];
            for x in 0..=p {
                let w = trapezoid_weight(x, p);
                if w == 0.0 {
                    continue;
                }
                // d = (p − q) − x, stored at index d + q = p − x
                mul_acc(&mut acc, u.at(x), &z[p - x], dim, w * dt * dt);
            }
            acc
        })
        .collect();
    let mut out = MatSeries::zeros(dim, top + 1);
    for (p, row) in rows.into_iter().enumerate() {
        out.at_mut(p).copy_from_slice(&row);
    }
    Ok(out)
}

/// `v(t_p, t_q)` for `p = 0..=q+max_lag` by direct time-marching of
/// `∂_τ v(τ,t) = −iεv − ∫₀^τ g(τ−τ′)v(τ′,t)dτ′ + ∫₀^t g̃(τ−τ′)u†(t−τ′)dτ′`.
///
/// Independent of [`v_slice`] except for the shared inputs; used to
/// cross-check it.
pub fn march_v(
    energy: &CMatrix,
    memory: &MatSeries,
    u: &MatSeries,
    noise: &MatSeries,
    dt: f64,
    q: usize,
    max_lag: usize,
) -> Result<MatSeries> {
    let dim = u.dim();
    let top = q + max_lag;
    if top >= u.len() || top >= noise.len() || top >= memory.len() {
        return Err(Error::Precondition("march horizon exceeds the solved lattice".into()));
    }
    let z = partial_sums(u, noise, q, max_lag);
    let mut source = MatSeries::zeros(dim, top + 1);
    for (p, zd) in z.iter().take(top + 1).enumerate() {
        let dst = source.at_mut(p);
        for (d, s) in dst.iter_mut().zip(zd) {
            *d = s * dt;
        }
    }
    let (v, _) = march_forced(
        energy,
        memory,
        dt,
        top,
        &CMatrix::zeros(dim, dim),
        Some(&source),
        false,
    )?;
    Ok(v)
}

/// Time derivative of a smooth lattice series by fourth-order finite
/// differences (centered in the interior, one-sided at the ends).
pub fn differentiate(series: &MatSeries, dt: f64) -> MatSeries {
    let dim = series.dim();
    let len = series.len();
    let mut out = MatSeries::zeros(dim, len);
    if len < 2 {
        return out;
    }
    let stencil = |k: usize| -> Vec<(usize, f64)> {
        if len < 5 {
            // too short for the wide stencils
            return if k + 1 < len {
                vec![(k, -1.0), (k + 1, 1.0)]
            } else {
                vec![(k - 1, -1.0), (k, 1.0)]
            };
        }
        let c = 1.0 / 12.0;
        match k {
            0 => vec![(0, -25.0 * c), (1, 48.0 * c), (2, -36.0 * c), (3, 16.0 * c), (4, -3.0 * c)],
            1 => vec![(0, -3.0 * c), (1, -10.0 * c), (2, 18.0 * c), (3, -6.0 * c), (4, c)],
            _ if k + 2 < len => vec![(k - 2, c), (k - 1, -8.0 * c), (k + 1, 8.0 * c), (k + 2, -c)],
            _ if k + 1 < len => vec![
                (k + 1, 3.0 * c),
                (k, 10.0 * c),
                (k - 1, -18.0 * c),
                (k - 2, 6.0 * c),
                (k - 3, -c),
            ],
            _ => vec![
                (k, 25.0 * c),
                (k - 1, -48.0 * c),
                (k - 2, 36.0 * c),
                (k - 3, -16.0 * c),
                (k - 4, 3.0 * c),
            ],
        }
    };
    for k in 0..len {
        let dst: Vec<Complex64> = {
            let mut acc = vec![ZERO; dim * dim];
            for (idx, w) in stencil(k) {
                for (a, s) in acc.iter_mut().zip(series.at(idx)) {
                    *a += s * (w / dt);
                }
            }
            acc
        };
        out.at_mut(k).copy_from_slice(&dst);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_cubic_is_exact() {
        let dt = 0.1;
        let mut s = MatSeries::zeros(1, 12);
        for k in 0..12 {
            let t = k as f64 * dt;
            s.at_mut(k)[0] = Complex64::new(t * t * t - t, 0.5 * t * t);
        }
        let d = differentiate(&s, dt);
        for k in 0..12 {
            let t = k as f64 * dt;
            let exact = Complex64::new(3.0 * t * t - 1.0, t);
            assert!((d.at(k)[0] - exact).norm() < 1e-12, "{k}");
        }
    }

    #[test]
    fn diagonal_matches_slices_and_is_hermitian() {
        // Two-level propagator and noise kernel with generic structure.
        let dim = 2;
        let len = 40;
        let dt = 0.05;
        let mut u = MatSeries::zeros(dim, len);
        let mut g = MatSeries::zeros(dim, len);
        for k in 0..len {
            let t = k as f64 * dt;
            let ub = u.at_mut(k);
            ub[0] = Complex64::from_polar((-0.3 * t).exp(), -t);
            ub[1] = Complex64::new(0.1 * t, 0.05 * t * t);
            ub[2] = Complex64::new(-0.2 * t, 0.0);
            ub[3] = Complex64::from_polar((-0.1 * t).exp(), 0.4 * t);
            // PSD-generating kernel: sum of two weighted phasors
            let gb = g.at_mut(k);
            let p1 = Complex64::from_polar(0.7, -0.8 * t);
            let p2 = Complex64::from_polar(0.4, 1.3 * t);
            gb[0] = p1 + p2;
            gb[1] = p1 * 0.5;
            gb[2] = p1 * 0.5;
            gb[3] = p1 * 0.25 + p2 * 2.0;
        }
        let diag = v_diagonal(&u, &g, dt).unwrap();
        assert!(diag.at(0).iter().all(|z| *z == ZERO));
        for q in [1, 7, 20] {
            let slice = v_slice(&u, &g, dt, q, 10).unwrap();
            let a = slice.matrix(q);
            let b = diag.matrix(q);
            assert!((a - &b).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-13);
            let ev = crate::linalg::hermitian_eigenvalues(&b);
            assert!(ev[0] > -1e-12);
            assert!(slice.at(0).iter().all(|z| *z == ZERO));
        }
    }
}
