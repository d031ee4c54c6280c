//! Truncated Fock spaces and reduced density matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermitian_part, hermiticity_defect, CMatrix};
use crate::spectral::Statistics;

/// State space of the system modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// One bosonic mode with occupations `0..=cutoff`.
    BosonFock { cutoff: usize },
    /// `modes` fermionic modes, `2^modes` occupation states, Jordan-Wigner
    /// ordered with mode 0 as the most significant bit.
    FermionFock { modes: usize },
}

/// Default boson cutoff for an initial occupation `n0`.
pub fn default_cutoff(n0: f64) -> usize {
    20usize.max((10.0 * (n0 + 1.0)).ceil() as usize)
}

impl Basis {
    pub fn dim(&self) -> usize {
        match self {
            Basis::BosonFock { cutoff } => cutoff + 1,
            Basis::FermionFock { modes } => 1 << modes,
        }
    }

    pub fn modes(&self) -> usize {
        match self {
            Basis::BosonFock { .. } => 1,
            Basis::FermionFock { modes } => *modes,
        }
    }

    pub fn statistics(&self) -> Statistics {
        match self {
            Basis::BosonFock { .. } => Statistics::Boson,
            Basis::FermionFock { .. } => Statistics::Fermion,
        }
    }

    /// Annihilation operators `a_i`, one per mode.
    pub fn annihilators(&self) -> Vec<CMatrix> {
        let dim = self.dim();
        match self {
            Basis::BosonFock { cutoff } => {
                let mut a = CMatrix::zeros(dim, dim);
                for n in 1..=*cutoff {
                    a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
                }
                vec![a]
            }
            Basis::FermionFock { modes } => (0..*modes)
                .map(|j| {
                    let bit = 1usize << (modes - 1 - j);
                    let mut a = CMatrix::zeros(dim, dim);
                    for s in 0..dim {
                        if s & bit != 0 {
                            // parity of the modes preceding j
                            let before = (s >> (modes - j)).count_ones();
                            let sign = if before % 2 == 0 { 1.0 } else { -1.0 };
                            a[(s ^ bit, s)] = Complex64::new(sign, 0.0);
                        }
                    }
                    a
                })
                .collect(),
        }
    }

    pub(crate) fn check(&self, stats: Statistics, modes: usize) -> Result<()> {
        if self.statistics() != stats {
            return Err(Error::InvalidInput(format!(
                "{} basis used with {stats} statistics",
                self.statistics()
            )));
        }
        if self.modes() != modes {
            return Err(Error::InvalidInput(format!(
                "basis has {} modes but the coefficients describe {modes}",
                self.modes()
            )));
        }
        Ok(())
    }
}

/// A reduced density matrix in a Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub basis: Basis,
    pub matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates trace, Hermiticity and positivity.
    pub fn new(basis: Basis, matrix: CMatrix) -> Result<Self> {
        let dim = basis.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidInput(format!(
                "density matrix is {}x{}, basis dimension is {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if hermiticity_defect(&matrix) > 1e-10 {
            return Err(Error::InvalidInput("density matrix must be Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::InvalidInput(format!("density matrix trace is {tr}, expected 1")));
        }
        let rho = Self { basis, matrix };
        let min = rho.min_eigenvalue();
        if min < -1e-8 {
            return Err(Error::InvalidInput(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(rho)
    }

    /// Occupation-number basis state; `occupations` has one entry per mode.
    pub fn fock(basis: Basis, occupations: &[usize]) -> Result<Self> {
        if occupations.len() != basis.modes() {
            return Err(Error::InvalidInput(format!(
                "need {} occupations, got {}",
                basis.modes(),
                occupations.len()
            )));
        }
        let index = match basis {
            Basis::BosonFock { cutoff } => {
                if occupations[0] > cutoff {
                    return Err(Error::InvalidInput(format!(
                        "occupation {} exceeds cutoff {cutoff}",
                        occupations[0]
                    )));
                }
                occupations[0]
            }
            Basis::FermionFock { modes } => {
                let mut s = 0;
                for (j, &n) in occupations.iter().enumerate() {
                    if n > 1 {
                        return Err(Error::InvalidInput("fermion occupations are 0 or 1".into()));
                    }
                    s |= n << (modes - 1 - j);
                }
                s
            }
        };
        let dim = basis.dim();
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = Complex64::new(1.0, 0.0);
        Ok(Self { basis, matrix: m })
    }

    /// Coherent state `|α⟩` truncated at `cutoff` and renormalized.
    pub fn coherent(cutoff: usize, alpha: Complex64) -> Result<Self> {
        let dim = cutoff + 1;
        let mut amp = Vec::with_capacity(dim);
        let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        for n in 0..dim {
            if n > 0 {
                c *= alpha / (n as f64).sqrt();
            }
            amp.push(c);
        }
        let norm: f64 = amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi = nalgebra::DVector::from_iterator(dim, amp.into_iter().map(|z| z / norm));
        Ok(Self {
            basis: Basis::BosonFock { cutoff },
            matrix: &psi * psi.adjoint(),
        })
    }

    /// `|ψ⟩⟨ψ|` for a normalized state vector.
    pub fn pure(basis: Basis, psi: &[Complex64]) -> Result<Self> {
        if psi.len() != basis.dim() {
            return Err(Error::InvalidInput("state vector has wrong dimension".into()));
        }
        let v = nalgebra::DVector::from_column_slice(psi);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidInput("zero state vector".into()));
        }
        let v = v / Complex64::new(norm, 0.0);
        Ok(Self {
            basis,
            matrix: &v * v.adjoint(),
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix)[0]
    }

    pub(crate) fn hermitize(&mut self) {
        self.matrix = hermitian_part(&self.matrix);
    }

    /// Single-particle matrix `n` with `n_{ji} = Tr(ρ a_i† a_j)`.
    pub fn occupation_matrix(&self) -> CMatrix {
        let ops = self.basis.annihilators();
        let m = ops.len();
        let mut n = CMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                n[(j, i)] = (&self.matrix * ops[i].adjoint() * &ops[j]).trace();
            }
        }
        n
    }

    /// Population of the highest boson Fock level (zero for fermions).
    pub fn top_population(&self) -> f64 {
        match self.basis {
            Basis::BosonFock { cutoff } => self.matrix[(cutoff, cutoff)].re,
            Basis::FermionFock { .. } => 0.0,
        }
    }
}
