//! Two-time correlations and the non-Markovianity measure against the
//! Born–Markov reference, for weak and strong coupling.

use exactme::correlations::{bm_reference, bm_series, exact_series, sup_measure};
use exactme::greens::{solve_u, solve_v, VOptions};
use exactme::spectral::{ReservoirSpec, SpectralDensity, Statistics, SystemSpec};
use exactme::TimeGrid;

fn main() -> exactme::Result<()> {
    let dt = 0.02;
    let grid = TimeGrid::with_horizon(60.0, dt)?;
    let lag = (20.0 / dt) as usize;
    let anchors: Vec<usize> = [0.0, 10.0, 20.0, 40.0].iter().map(|&t| grid.index_of(t).expect("on grid")).collect();
    for eta in [0.05, 0.3] {
        let bath = ReservoirSpec::new(Statistics::Boson, 1.0, 0.0, SpectralDensity::ohmic(eta, 1.0, 5.0)?)?;
        let sys = SystemSpec::scalar(Statistics::Boson, 1.0, vec![bath])?;
        let gf = solve_v(&sys, solve_u(&sys, &grid)?, &VOptions { anchors: anchors.clone(), max_lag: lag })?;
        let exact = exact_series(&gf, 1.0, &anchors, lag)?;
        let bm = bm_series(&bm_reference(&sys)?, 1.0, &exact.base_times, &exact.lags, grid.t0);
        println!("η = {eta}");
        for (a, t) in exact.base_times.iter().enumerate() {
            match sup_measure(&exact, &bm, a)? {
                Some(m) => println!("  t = {t:>5.1}  sup_τ N = {m:.4}"),
                None => println!("  t = {t:>5.1}  N undefined (vanishing occupation)"),
            }
        }
    }
    Ok(())
}
