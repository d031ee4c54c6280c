//! Fourth-order Runge–Kutta propagation of the reduced density matrix.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::greens::TimeGrid;
use crate::linalg::CMatrix;
use crate::mastereq::coefficients::{CoefficientSet, MECoefficients};
use crate::mastereq::fock::DensityMatrix;
use crate::mastereq::generator::Generator;

/// Largest population tolerated in the top boson Fock level.
pub const CUTOFF_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PropagationOptions {
    /// Store every `record_every`-th state (the last step is always stored).
    pub record_every: usize,
    /// Propagate only up to this step (defaults to the whole grid).
    pub last_step: Option<usize>,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            record_every: 1,
            last_step: None,
        }
    }
}

/// Recorded states plus integrator diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub steps: Vec<usize>,
    pub states: Vec<DensityMatrix>,
    /// Largest `|Tr ρ − 1|` over all steps.
    pub trace_drift: f64,
    /// Smallest eigenvalue over the recorded states.
    pub min_eigenvalue: f64,
    /// Largest top-level boson population seen.
    pub top_population: f64,
    /// Steps whose coefficients were bridged across a singular propagator.
    pub bridged_steps: Vec<usize>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.steps.iter().map(|&k| self.grid.time(k)).collect()
    }
}

/// Coefficient sets with singular steps replaced by linear interpolation
/// between the nearest regular neighbours.
fn bridged_sets(c: &MECoefficients, last: usize) -> Result<Vec<CoefficientSet>> {
    let mut sets: Vec<CoefficientSet> = (0..=last).map(|k| c.at(k)).collect();
    let bad: Vec<usize> = c.singular_steps.iter().copied().filter(|&k| k <= last).collect();
    for &k in &bad {
        let lo = (0..k).rev().find(|j| !bad.contains(j));
        let hi = (k + 1..=last).find(|j| !bad.contains(j));
        match (lo, hi) {
            (Some(lo), Some(hi)) => {
                let w = (k - lo) as f64 / (hi - lo) as f64;
                sets[k] = CoefficientSet::lerp(&sets[lo], &sets[hi], w);
            }
            _ => {
                return Err(Error::Precondition(format!(
                    "cannot bridge singular coefficients at step {k}: no regular step on both sides"
                )))
            }
        }
    }
    Ok(sets)
}

/// Coefficients at `t_k + dt/2`: four-point cubic interpolation in the
/// interior, three-point quadratic at the two ends of the grid.
fn midpoint(sets: &[CoefficientSet], k: usize) -> CoefficientSet {
    let last = sets.len() - 1;
    let (first, w): (usize, &[f64]) = if k >= 1 && k + 2 <= last {
        (k - 1, &[-1.0 / 16.0, 9.0 / 16.0, 9.0 / 16.0, -1.0 / 16.0])
    } else if last < 2 {
        (k, &[0.5, 0.5])
    } else if k == 0 {
        (0, &[3.0 / 8.0, 6.0 / 8.0, -1.0 / 8.0])
    } else {
        (k - 1, &[-1.0 / 8.0, 6.0 / 8.0, 3.0 / 8.0])
    };
    let pick = |f: fn(&CoefficientSet) -> &CMatrix| -> CMatrix {
        let mut m = f(&sets[first]) * Complex64::new(w[0], 0.0);
        for (o, wk) in w.iter().enumerate().skip(1) {
            m += f(&sets[first + o]) * Complex64::new(*wk, 0.0);
        }
        m
    };
    CoefficientSet {
        eps_prime: pick(|s| &s.eps_prime),
        gamma: pick(|s| &s.gamma),
        gamma_tilde: pick(|s| &s.gamma_tilde),
    }
}

/// Integrates the exact master equation from `rho0` at `t0` across the
/// coefficient grid.
pub fn propagate_rho(rho0: &DensityMatrix, c: &MECoefficients, options: &PropagationOptions) -> Result<Trajectory> {
    let grid = c.grid;
    let stats = rho0.basis.statistics();
    rho0.basis.check(stats, c.dim())?;
    let last = options.last_step.unwrap_or(grid.n_steps);
    if last > grid.n_steps || last >= c.len() {
        return Err(Error::Precondition(format!(
            "requested step {last} beyond the coefficient grid ({} steps)",
            grid.n_steps
        )));
    }
    let every = options.record_every.max(1);
    let sets = bridged_sets(c, last)?;
    let mut warnings = Vec::new();
    let mut bridged_steps = c.singular_steps.iter().copied().filter(|&k| k <= last).collect::<Vec<_>>();
    bridged_steps.sort_unstable();
    if !bridged_steps.is_empty() {
        let msg = format!(
            "generator bridged across {} singular steps starting at t = {}",
            bridged_steps.len(),
            grid.time(bridged_steps[0])
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }

    let gen = Generator::new(rho0.basis);
    let dt = grid.dt;
    let half = Complex64::new(0.5 * dt, 0.0);
    let full = Complex64::new(dt, 0.0);
    let sixth = Complex64::new(dt / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);

    let mut rho = rho0.clone();
    let mut traj = Trajectory {
        grid,
        steps: vec![0],
        states: vec![rho0.clone()],
        trace_drift: (rho0.trace() - 1.0).norm(),
        min_eigenvalue: rho0.min_eigenvalue(),
        top_population: rho0.top_population(),
        bridged_steps,
        warnings,
    };
    for k in 0..last {
        let mid = midpoint(&sets, k);
        let r = &rho.matrix;
        let k1 = gen.apply_unchecked(r, &sets[k]);
        let k2 = gen.apply_unchecked(&(r + &k1 * half), &mid);
        let k3 = gen.apply_unchecked(&(r + &k2 * half), &mid);
        let k4 = gen.apply_unchecked(&(r + &k3 * full), &sets[k + 1]);
        let next: CMatrix = r + (k1 + &k2 * two + &k3 * two + k4) * sixth;
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Instability { step: k + 1, norm: f64::NAN });
        }
        rho.matrix = next;
        rho.hermitize();

        let step = k + 1;
        traj.trace_drift = traj.trace_drift.max((rho.trace() - 1.0).norm());
        let top = rho.top_population();
        traj.top_population = traj.top_population.max(top);
        if top > CUTOFF_TOLERANCE {
            return Err(Error::CutoffOverflow {
                population: top,
                time: grid.time(step),
            });
        }
        if step % every == 0 || step == last {
            traj.min_eigenvalue = traj.min_eigenvalue.min(rho.min_eigenvalue());
            traj.steps.push(step);
            traj.states.push(rho.clone());
        }
    }
    Ok(traj)
}
