//! Time-dependent master-equation coefficients from the Green functions.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greens::correlation::differentiate;
use crate::greens::{GreenFunctions, TimeGrid};
use crate::linalg::{abs_determinant, hermitian_part, inverse, CMatrix, MatSeries};

/// Steps where `|det u|` falls below this are flagged as singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// Coefficients of the exact master equation at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    /// Renormalized energy `ε′`.
    pub eps_prime: CMatrix,
    /// Dissipation `γ`.
    pub gamma: CMatrix,
    /// Fluctuation `γ̃`.
    pub gamma_tilde: CMatrix,
}

impl CoefficientSet {
    pub fn dim(&self) -> usize {
        self.eps_prime.nrows()
    }

    pub fn is_finite(&self) -> bool {
        [&self.eps_prime, &self.gamma, &self.gamma_tilde]
            .iter()
            .all(|m| m.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// `(1−w) a + w b`.
    pub fn lerp(a: &Self, b: &Self, w: f64) -> Self {
        let mix = |x: &CMatrix, y: &CMatrix| x * Complex64::new(1.0 - w, 0.0) + y * Complex64::new(w, 0.0);
        Self {
            eps_prime: mix(&a.eps_prime, &b.eps_prime),
            gamma: mix(&a.gamma, &b.gamma),
            gamma_tilde: mix(&a.gamma_tilde, &b.gamma_tilde),
        }
    }
}

/// Coefficient series on the Green-function grid.
#[derive(Debug, Clone)]
pub struct MECoefficients {
    pub grid: TimeGrid,
    pub eps_prime: MatSeries,
    pub gamma: MatSeries,
    pub gamma_tilde: MatSeries,
    /// Steps where `u` is numerically singular; their entries are NaN.
    pub singular_steps: Vec<usize>,
}

impl MECoefficients {
    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn at(&self, k: usize) -> CoefficientSet {
        CoefficientSet {
            eps_prime: self.eps_prime.matrix(k),
            gamma: self.gamma.matrix(k),
            gamma_tilde: self.gamma_tilde.matrix(k),
        }
    }

    /// Scalar `γ(t_k)` series for single-level systems.
    pub fn gamma_scalar(&self) -> Vec<f64> {
        self.gamma.scalars().iter().map(|z| z.re).collect()
    }

    pub fn gamma_tilde_scalar(&self) -> Vec<f64> {
        self.gamma_tilde.scalars().iter().map(|z| z.re).collect()
    }

    pub fn eps_prime_scalar(&self) -> Vec<f64> {
        self.eps_prime.scalars().iter().map(|z| z.re).collect()
    }
}

fn coefficients_at(u: &CMatrix, u_dot: &CMatrix, v: &CMatrix, v_dot: &CMatrix) -> Option<CoefficientSet> {
    if abs_determinant(u) <= SINGULAR_DET {
        return None;
    }
    let z = u_dot * inverse(u)?;
    let zh = z.adjoint();
    let i_half = Complex64::new(0.0, 0.5);
    let eps_prime = hermitian_part(&((&z - &zh) * i_half));
    let gamma = hermitian_part(&((&z + &zh) * Complex64::new(-0.5, 0.0)));
    let zv = &z * v;
    let gamma_tilde = hermitian_part(&(v_dot - &zv - zv.adjoint()));
    let set = CoefficientSet { eps_prime, gamma, gamma_tilde };
    set.is_finite().then_some(set)
}

/// `ε′ = (i/2)(u̇u⁻¹ − h.c.)`, `γ = −½(u̇u⁻¹ + h.c.)`,
/// `γ̃ = v̇ − (u̇u⁻¹v + h.c.)` at every step.
///
/// `u̇` and `v̇(t,t)` are fourth-order differences of the lattice
/// solutions (see [`GreenFunctions::lattice_u_dot`]), so the coefficients
/// reproduce the computed `u` and `v` when the master equation is
/// integrated. At `t0` the derivative of `v(t,t)`
/// vanishes identically (`v = O(t²)`), so `γ̃(t0) = 0` is imposed exactly.
pub fn compute_coefficients(gf: &GreenFunctions) -> Result<MECoefficients> {
    let v = gf
        .v_diag
        .as_ref()
        .ok_or_else(|| Error::Precondition("coefficients need v(t,t); solve v first".into()))?;
    let dim = gf.dim();
    let len = gf.u.len();
    if v.len() != len || gf.u_dot.len() != len {
        return Err(Error::Precondition("u, du/dt and v(t,t) lengths differ".into()));
    }
    let u_dot = gf.lattice_u_dot();
    let mut v_dot = differentiate(v, gf.grid.dt);
    v_dot.at_mut(0).iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));

    let sets: Vec<Option<CoefficientSet>> = (0..len)
        .into_par_iter()
        .map(|k| coefficients_at(&gf.u.matrix(k), &u_dot.matrix(k), &v.matrix(k), &v_dot.matrix(k)))
        .collect();

    let mut out = MECoefficients {
        grid: gf.grid,
        eps_prime: MatSeries::zeros(dim, len),
        gamma: MatSeries::zeros(dim, len),
        gamma_tilde: MatSeries::zeros(dim, len),
        singular_steps: Vec::new(),
    };
    let nan = CMatrix::from_element(dim, dim, Complex64::new(f64::NAN, f64::NAN));
    for (k, set) in sets.into_iter().enumerate() {
        match set {
            Some(c) => {
                out.eps_prime.set_matrix(k, &c.eps_prime);
                out.gamma.set_matrix(k, &c.gamma);
                out.gamma_tilde.set_matrix(k, &c.gamma_tilde);
            }
            None => {
                out.eps_prime.set_matrix(k, &nan);
                out.gamma.set_matrix(k, &nan);
                out.gamma_tilde.set_matrix(k, &nan);
                out.singular_steps.push(k);
            }
        }
    }
    if !out.singular_steps.is_empty() {
        log::warn!(
            "propagator numerically singular at {} steps (first t = {}); coefficients flagged",
            out.singular_steps.len(),
            gf.grid.time(out.singular_steps[0])
        );
    }
    Ok(out)
}
