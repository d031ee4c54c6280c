//! Retarded propagator u(t): Volterra solution, bound states and the
//! spectral reconstruction, below and above the bound-state threshold.

use exactme::greens::{find_bound_states, reconstruct_u, solve_u};
use exactme::spectral::{ReservoirSpec, SpectralDensity, Statistics, SystemSpec};
use exactme::TimeGrid;

fn main() -> exactme::Result<()> {
    let grid = TimeGrid::with_horizon(50.0, 0.01)?;
    for eta in [0.05, 0.3] {
        let bath = ReservoirSpec::new(Statistics::Boson, 0.0, 0.0, SpectralDensity::ohmic(eta, 1.0, 5.0)?)?;
        let sys = SystemSpec::scalar(Statistics::Boson, 1.0, vec![bath])?;
        let u = solve_u(&sys, &grid)?.u_scalar();
        let r = reconstruct_u(&sys, &grid)?;
        let gap = u.iter().zip(&r).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        println!("η = {eta}");
        for b in find_bound_states(&sys)? {
            println!("  bound state at ε = {:.5}, residue Z = {:.5}", b.energy, b.residue);
        }
        for t in [0.0, 5.0, 10.0, 20.0, 50.0] {
            let k = grid.index_of(t).expect("on grid");
            println!("  |u({t:>4})| = {:.6}", u[k].norm());
        }
        // The difference is the O(dt²) error of the time stepping; it shows
        // up as a slow phase drift of the bound-state oscillation.
        println!("  max |u − spectral reconstruction| = {gap:.2e}");
    }
    Ok(())
}
