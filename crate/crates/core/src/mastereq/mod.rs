//! Exact master equation: coefficients from the Green functions,
//! generator, Lindblad rewriting and density-matrix propagation.

pub mod coefficients;
pub mod fock;
pub mod generator;
pub mod propagate;

pub use coefficients::{compute_coefficients, CoefficientSet, MECoefficients};
pub use fock::{default_cutoff, Basis, DensityMatrix};
pub use generator::{generator_apply, lindblad_form, ChannelRates, Generator, LindbladForm};
pub use propagate::{propagate_rho, PropagationOptions, Trajectory};

use crate::error::{Error, Result};
use crate::greens::GreenFunctions;
use crate::linalg::{CMatrix, MatSeries};

/// Single-particle occupation `n(t) = u n₀ u† + v(t,t)` at every step.
///
/// Index convention: `n_{ji} = ⟨a_i† a_j⟩`, the same as for `n₀` and
/// [`DensityMatrix::occupation_matrix`].
pub fn occupation(gf: &GreenFunctions, n0: &CMatrix) -> Result<MatSeries> {
    let dim = gf.dim();
    if n0.nrows() != dim || n0.ncols() != dim {
        return Err(Error::InvalidInput(format!(
            "initial occupation must be {dim}x{dim}"
        )));
    }
    let v = gf
        .v_diag
        .as_ref()
        .ok_or_else(|| Error::Precondition("occupation needs v(t,t); solve v first".into()))?;
    let mut out = MatSeries::zeros(dim, gf.u.len());
    for k in 0..gf.u.len() {
        let u = gf.u.matrix(k);
        let n = &u * n0 * u.adjoint() + v.matrix(k);
        out.set_matrix(k, &n);
    }
    Ok(out)
}
