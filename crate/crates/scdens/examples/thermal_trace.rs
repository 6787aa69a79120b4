//! Oscillating part of the level density at finite temperature, two ways:
//! a periodic-orbit sum with each orbit damped by the thermal modulation
//! factor x/sinh(x), and direct convolution of the exact spectrum with the
//! thermal window. Long orbits die first; heating is a low-pass filter on
//! the spectrum's time side.

use scdens::correlations::{
    convolved_level_density, modulated_trace_formula, FoldingKernel, PoCatalog, TraceTarget,
};
use scdens::spectra::{smooth_level_density, solve_spectrum, PotentialModel};

fn main() -> scdens::Result<()> {
    let omega = 1.0;
    let t = 0.15;
    let model = PotentialModel::harmonic(&[omega]);
    let spectrum = solve_spectrum(&model, 200)?;
    let kernel = FoldingKernel::thermal(t)?;
    let catalog = PoCatalog::Harmonic1d {
        omega,
        hbar: 1.0,
        k_max: 12,
    };

    println!("1D harmonic oscillator, T = {t}, orbit sum vs folded spectrum:");
    println!("{:>6} {:>14} {:>14} {:>10}", "E", "orbit sum", "convolution", "abs err");
    for e in [10.3, 15.7, 21.2, 26.9] {
        let orbits = catalog.orbits_at(e)?;
        let osc = modulated_trace_formula(&orbits, &kernel, 1.0, TraceTarget::LevelDensity)?;
        let folded =
            convolved_level_density(&spectrum, &kernel, e)? - smooth_level_density(&model, e);
        println!("{e:>6.1} {osc:>14.8} {folded:>14.8} {:>10.2e}", (osc - folded).abs());
    }

    // The same filter in a box: each k-fold wall-to-wall repetition carries
    // modulation x_k/sinh(x_k) with x_k = pi T k T_orbit / hbar, so the
    // harmonic content of the level-density oscillations thins out as T grows.
    let l = std::f64::consts::PI;
    let box_cat = PoCatalog::Box1d {
        length: l,
        hbar: 1.0,
        mass: 0.5,
        k_max: 6,
    };
    let e = 110.25; // momentum p = 10.5 in these units
    let orbits = box_cat.orbits_at(e)?;
    println!();
    println!("box L = pi at E = {e}: survival factor per repetition");
    println!("{:>4} {:>10} {:>12} {:>12}", "k", "period", "T = 0.5", "T = 2");
    for orbit in &orbits {
        let cool = FoldingKernel::thermal(0.5)?.fourier(orbit.period);
        let warm = FoldingKernel::thermal(2.0)?.fourier(orbit.period);
        println!(
            "{:>4} {:>10.4} {cool:>12.6} {warm:>12.6}",
            orbit.label, orbit.period
        );
    }
    Ok(())
}
