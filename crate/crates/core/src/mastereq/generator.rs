//! Right-hand side of the exact master equation and its Lindblad-form
//! rewriting.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix};
use crate::mastereq::coefficients::CoefficientSet;
use crate::mastereq::fock::{Basis, DensityMatrix};
use crate::spectral::Statistics;

/// Ladder operators of a basis, cached for repeated generator evaluation.
#[derive(Debug, Clone)]
pub struct Generator {
    basis: Basis,
    a: Vec<CMatrix>,
    a_dag: Vec<CMatrix>,
}

impl Generator {
    pub fn new(basis: Basis) -> Self {
        let a = basis.annihilators();
        let a_dag = a.iter().map(|m| m.adjoint()).collect();
        Self { basis, a, a_dag }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    fn check(&self, rho: &CMatrix, c: &CoefficientSet, stats: Statistics) -> Result<()> {
        self.basis.check(stats, c.dim())?;
        if rho.nrows() != self.basis.dim() || rho.ncols() != self.basis.dim() {
            return Err(Error::InvalidInput("density matrix does not match the basis".into()));
        }
        if !c.is_finite() {
            return Err(Error::InvalidInput("master-equation coefficients are not finite".into()));
        }
        Ok(())
    }

    /// `H′ = Σ ε′_ij a_i† a_j`.
    pub fn hamiltonian(&self, eps_prime: &CMatrix) -> CMatrix {
        let dim = self.basis.dim();
        let mut h = CMatrix::zeros(dim, dim);
        for (i, ai) in self.a_dag.iter().enumerate() {
            for (j, aj) in self.a.iter().enumerate() {
                let e = eps_prime[(i, j)];
                if e != Complex64::new(0.0, 0.0) {
                    h += ai * aj * e;
                }
            }
        }
        h
    }

    /// `dρ/dt` of the exact master equation (upper signs boson, lower fermion):
    /// `−i[H′,ρ] + Σγ_ij(2a_jρa_i† − a_i†a_jρ − ρa_i†a_j)
    ///  + Σγ̃_ij(a_i†ρa_j ± a_jρa_i† ∓ a_i†a_jρ − ρa_ja_i†)`.
    pub fn apply(&self, rho: &CMatrix, c: &CoefficientSet, stats: Statistics) -> Result<CMatrix> {
        self.check(rho, c, stats)?;
        Ok(self.apply_unchecked(rho, c))
    }

    pub(crate) fn apply_unchecked(&self, rho: &CMatrix, c: &CoefficientSet) -> CMatrix {
        let s = Complex64::new(self.basis.statistics().sign(), 0.0);
        let h = self.hamiltonian(&c.eps_prime);
        let minus_i = Complex64::new(0.0, -1.0);
        let mut out = (&h * rho - rho * &h) * minus_i;
        let n = c.dim();
        for i in 0..n {
            let ai_d = &self.a_dag[i];
            for j in 0..n {
                let aj = &self.a[j];
                let g = c.gamma[(i, j)];
                let gt = c.gamma_tilde[(i, j)];
                if g == Complex64::new(0.0, 0.0) && gt == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let aj_rho = aj * rho;
                let ai_d_rho = ai_d * rho;
                let num = ai_d * aj;
                let num_rho = &num * rho;
                // γ term
                out += (&aj_rho * ai_d * Complex64::new(2.0, 0.0) - &num_rho - rho * &num) * g;
                // γ̃ term
                let anti = aj * ai_d;
                out += (&ai_d_rho * aj + (&aj_rho * ai_d - &num_rho) * s - rho * anti) * gt;
            }
        }
        out
    }
}

/// `dρ/dt` for a density matrix and one set of coefficients.
pub fn generator_apply(rho: &DensityMatrix, c: &CoefficientSet, stats: Statistics) -> Result<CMatrix> {
    Generator::new(rho.basis).apply(&rho.matrix, c, stats)
}

/// The generator written as `−i[H̃,ρ] + Σ w_ij L_{A_i,B_j}[ρ]` with
/// `L_{A,B}ρ = AρB − ½BAρ − ½ρBA`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladForm {
    pub statistics: Statistics,
    /// Renormalized single-particle energy `H̃`.
    pub hamiltonian: CMatrix,
    /// `γ̃_ij` on `L_{a_i†, a_j}` (gain).
    pub gain: CMatrix,
    /// `2γ_ij ± γ̃_ij` on `L_{a_j, a_i†}` (loss).
    pub loss: CMatrix,
}

/// Eigenvalues of the channel weight matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRates {
    pub gain: Vec<f64>,
    pub loss: Vec<f64>,
}

impl ChannelRates {
    /// Whether any channel has a negative rate (back-flow of information).
    pub fn has_negative(&self) -> bool {
        self.gain.iter().chain(&self.loss).any(|&r| r < 0.0)
    }
}

pub fn lindblad_form(c: &CoefficientSet, stats: Statistics) -> LindbladForm {
    let s = Complex64::new(stats.sign(), 0.0);
    LindbladForm {
        statistics: stats,
        hamiltonian: c.eps_prime.clone(),
        gain: c.gamma_tilde.clone(),
        loss: &c.gamma * Complex64::new(2.0, 0.0) + &c.gamma_tilde * s,
    }
}

impl LindbladForm {
    pub fn rates(&self) -> ChannelRates {
        ChannelRates {
            gain: hermitian_eigenvalues(&self.gain),
            loss: hermitian_eigenvalues(&self.loss),
        }
    }

    /// Applies the decomposition to `ρ`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<CMatrix> {
        rho.basis.check(self.statistics, self.hamiltonian.nrows())?;
        let g = Generator::new(rho.basis);
        let r = &rho.matrix;
        let h = g.hamiltonian(&self.hamiltonian);
        let mut out = (&h * r - r * &h) * Complex64::new(0.0, -1.0);
        let lind = |a: &CMatrix, b: &CMatrix| -> CMatrix {
            let ba = b * a;
            a * r * b - (&ba * r + r * &ba) * Complex64::new(0.5, 0.0)
        };
        let n = self.hamiltonian.nrows();
        for i in 0..n {
            for j in 0..n {
                out += lind(&g.a_dag[i], &g.a[j]) * self.gain[(i, j)];
                out += lind(&g.a[j], &g.a_dag[i]) * self.loss[(i, j)];
            }
        }
        Ok(out)
    }
}
