//! Spectral densities, Lamb shifts and thermal occupations of the catalog.

use exactme::spectral::{Band, ReservoirSpec, SpectralDensity, Statistics};

fn main() -> exactme::Result<()> {
    let catalog = [
        ("sub-ohmic s=1/2", SpectralDensity::ohmic(0.1, 0.5, 1.0)?),
        ("ohmic", SpectralDensity::ohmic(0.1, 1.0, 5.0)?),
        ("lorentzian", SpectralDensity::lorentzian(0.1, 1.0, 0.5)?),
        ("flat band", SpectralDensity::flat_band(0.1, -2.0, 2.0)?),
        (
            "gapped",
            SpectralDensity::gapped(vec![Band::flat(0.1, -2.0, -0.5), Band::flat(0.05, 0.5, 2.0)])?,
        ),
    ];
    println!("{:<16} {:>10} {:>12} {:>12}", "density", "energy", "J", "lamb shift");
    for (name, d) in &catalog {
        for e in [-1.0, 0.25, 1.0, 3.0] {
            println!("{name:<16} {e:>10.3} {:>12.6} {:>12.6}", d.evaluate_j(e)?, d.lamb_shift(e)?);
        }
    }

    let bath = ReservoirSpec::new(Statistics::Boson, 1.0, 0.0, SpectralDensity::ohmic(0.1, 1.0, 5.0)?)?;
    let lead = ReservoirSpec::new(Statistics::Fermion, 0.5, 0.2, SpectralDensity::flat_band(0.1, -2.0, 2.0)?)?;
    println!("\nBose  f(1) at T = 1:          {:.6}", bath.distribution(1.0)?);
    println!("Fermi f(1) at T = 0.5, μ = 0.2: {:.6}", lead.distribution(1.0)?);
    Ok(())
}
