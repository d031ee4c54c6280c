//! The three two-level special models: zero-temperature amplitude damping,
//! pure dephasing and Majorana decoherence.

use exactme::linalg::CMatrix;
use exactme::models::{dephasing_coherence, model_dynamics, ModelKind, SpecialModel};
use exactme::spectral::{ReservoirSpec, SpectralDensity, Statistics};
use exactme::TimeGrid;
use num_complex::Complex64;

fn main() -> exactme::Result<()> {
    let grid = TimeGrid::with_horizon(10.0, 0.01)?;
    let r = |x: f64| Complex64::new(x, 0.0);
    let excited = CMatrix::from_row_slice(2, 2, &[r(0.0), r(0.0), r(0.0), r(1.0)]);
    let plus = CMatrix::from_row_slice(2, 2, &[r(0.5), r(0.5), r(0.5), r(0.5)]);

    let cold = ReservoirSpec::new(Statistics::Boson, 0.0, 0.0, SpectralDensity::ohmic(0.1, 1.0, 5.0)?)?;
    let spin = SpecialModel::new(ModelKind::SpinZeroT, cold, 1.0)?;
    let traj = model_dynamics(&spin, &grid, &excited)?;
    println!("amplitude damping: excited population");
    for k in (0..grid.len()).step_by(200) {
        println!("  t = {:>5.2}  ρ_ee = {:.6}  γ = {:.5}", traj.times[k], traj.states[k][(1, 1)].re, traj.rate[k]);
    }

    let warm = ReservoirSpec::new(Statistics::Boson, 1.0, 0.0, SpectralDensity::ohmic(0.02, 1.0, 5.0)?)?;
    let deph = SpecialModel::new(ModelKind::PureDephasing, warm, 1.0)?;
    let traj = model_dynamics(&deph, &grid, &plus)?;
    println!("pure dephasing: |ρ₀₁| (master equation vs closed form)");
    for k in (0..grid.len()).step_by(200) {
        let exact = dephasing_coherence(&deph, grid.elapsed(k))? * plus[(0, 1)];
        println!("  t = {:>5.2}  {:.6}  {:.6}", traj.times[k], traj.states[k][(0, 1)].norm(), exact.norm());
    }

    let lead = ReservoirSpec::new(Statistics::Fermion, 0.5, 0.0, SpectralDensity::lorentzian(0.3, 0.0, 1.0)?)?;
    let maj = SpecialModel::new(ModelKind::Majorana, lead, 0.0)?;
    let traj = model_dynamics(&maj, &grid, &excited)?;
    println!("Majorana: ⟨σ_z⟩ decay, {} rate sign change(s)", traj.backflow_events.len());
    for k in (0..grid.len()).step_by(200) {
        let rho = &traj.states[k];
        println!("  t = {:>5.2}  ⟨σ_z⟩ = {:.6}", traj.times[k], (rho[(0, 0)] - rho[(1, 1)]).re);
    }
    Ok(())
}
