//! Time-dependent master-equation coefficients ε′(t), γ(t), γ̃(t) and the
//! sign changes of the dissipation rate.

use exactme::greens::{solve_u, solve_v, VOptions};
use exactme::mastereq::compute_coefficients;
use exactme::spectral::{ReservoirSpec, SpectralDensity, Statistics, SystemSpec};
use exactme::TimeGrid;

fn main() -> exactme::Result<()> {
    let grid = TimeGrid::with_horizon(20.0, 0.01)?;
    for eta in [0.1, 0.4] {
        let bath = ReservoirSpec::new(Statistics::Boson, 1.0, 0.0, SpectralDensity::ohmic(eta, 0.5, 1.0)?)?;
        let sys = SystemSpec::scalar(Statistics::Boson, 1.0, vec![bath])?;
        let gf = solve_v(&sys, solve_u(&sys, &grid)?, &VOptions::default())?;
        let c = compute_coefficients(&gf)?;
        let (eps, gamma, gamma_t) = (c.eps_prime_scalar(), c.gamma_scalar(), c.gamma_tilde_scalar());
        println!("η = {eta}");
        println!("  {:>6} {:>10} {:>10} {:>10}", "t", "ε′", "γ", "γ̃");
        for k in (0..grid.len()).step_by(250) {
            println!("  {:>6.2} {:>10.5} {:>10.5} {:>10.5}", grid.time(k), eps[k], gamma[k], gamma_t[k]);
        }
        let negative: Vec<f64> = (1..grid.len()).filter(|&k| gamma[k] < 0.0).map(|k| grid.time(k)).collect();
        match negative.first() {
            Some(t) => println!("  γ first negative at t = {t:.2} ({} steps)", negative.len()),
            None => println!("  γ stays positive"),
        }
    }
    Ok(())
}
