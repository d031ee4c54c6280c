//! Propagating a coherent state with the exact master equation and
//! comparing the occupation with the Green-function prediction.

use exactme::greens::{solve_u, solve_v, VOptions};
use exactme::mastereq::{compute_coefficients, occupation, propagate_rho, DensityMatrix, PropagationOptions};
use exactme::spectral::{ReservoirSpec, SpectralDensity, Statistics, SystemSpec};
use exactme::TimeGrid;
use num_complex::Complex64;

fn main() -> exactme::Result<()> {
    let bath = ReservoirSpec::new(Statistics::Boson, 1.0, 0.0, SpectralDensity::ohmic(0.02, 0.5, 1.0)?)?;
    let sys = SystemSpec::scalar(Statistics::Boson, 1.0, vec![bath])?;
    let grid = TimeGrid::with_horizon(20.0, 0.01)?;
    let gf = solve_v(&sys, solve_u(&sys, &grid)?, &VOptions::default())?;
    let coef = compute_coefficients(&gf)?;

    let rho0 = DensityMatrix::coherent(20, Complex64::new(1.0, 0.0))?;
    let traj = propagate_rho(&rho0, &coef, &PropagationOptions { record_every: 200, last_step: None })?;
    let n = occupation(&gf, &rho0.occupation_matrix())?;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "t", "trace", "purity", "n (ρ)", "n (GF)");
    for (&k, rho) in traj.steps.iter().zip(&traj.states) {
        println!(
            "{:>6.2} {:>10.7} {:>10.6} {:>10.6} {:>10.6}",
            grid.time(k),
            rho.trace().re,
            rho.purity(),
            rho.occupation_matrix()[(0, 0)].re,
            n.entry(k, 0, 0).re
        );
    }
    println!("trace drift {:.1e}, min eigenvalue {:.1e}", traj.trace_drift, traj.min_eigenvalue);
    Ok(())
}
