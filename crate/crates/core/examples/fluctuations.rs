//! Correlation function v(t,t) and its stationary value from the
//! fluctuation spectrum, with and without a bound state.

use exactme::greens::{solve_u, solve_v, ScalarSpectrum, VOptions};
use exactme::spectral::{ReservoirSpec, SpectralDensity, Statistics, SystemSpec};
use exactme::TimeGrid;

fn main() -> exactme::Result<()> {
    let grid = TimeGrid::with_horizon(100.0, 0.01)?;
    for eta in [0.05, 0.3] {
        let bath = ReservoirSpec::new(Statistics::Boson, 1.0, -1.0, SpectralDensity::ohmic(eta, 1.0, 5.0)?)?;
        let sys = SystemSpec::scalar(Statistics::Boson, 1.0, vec![bath])?;
        let gf = solve_v(&sys, solve_u(&sys, &grid)?, &VOptions::default())?;
        let v = gf.v_diag.as_ref().expect("solved");
        let spectrum = ScalarSpectrum::new(&sys)?;
        println!("η = {eta}: {} bound state(s)", spectrum.bound_states.len());
        for t in [1.0, 10.0, 50.0, 100.0] {
            let k = grid.index_of(t).expect("on grid");
            println!("  v({t:>5}) = {:.6}   ∫χ = {:.6}", v.entry(k, 0, 0).re, spectrum.integrated_fluctuation(t)?);
        }
        println!("  ∫D_d f = {:.6}", spectrum.thermal_continuum()?);
    }
    Ok(())
}
