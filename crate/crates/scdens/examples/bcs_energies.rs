//! Thermodynamic sums evaluated two independent ways. Occupation-weighted
//! sums over the spectrum are re-expressed as energy integrals against a
//! folded level density, which is how the smooth + oscillating split of
//! every finite-T / paired quantity is derived. Both routes must agree to
//! quadrature accuracy.

use scdens::correlations::{
    bcs_energy_via_folding, entropy_via_folding, free_energy_via_folding,
    modulated_trace_formula, FoldingKernel, PeriodicOrbit, TraceTarget,
};
use scdens::qm_densities::{fix_fermi_level, thermo_report, OccupationScheme};
use scdens::spectra::{solve_spectrum, PotentialModel};

fn main() -> scdens::Result<()> {
    let model = PotentialModel::box1d(std::f64::consts::PI).with_units(1.0, 0.5);
    let spectrum = solve_spectrum(&model, 120)?;
    let n = 20usize;

    println!("box L = pi, N = {n}: free energy, direct sum vs folded integral");
    println!("{:>6} {:>18} {:>18} {:>10}", "T", "direct", "folded", "rel err");
    for t in [1.0, 5.0, 20.0] {
        let scheme = OccupationScheme::thermal(t);
        let lambda = fix_fermi_level(&spectrum, &scheme, n)?;
        let report = thermo_report(&spectrum, &scheme, n)?;
        let folded = free_energy_via_folding(&spectrum, t, lambda)?;
        let rel = ((folded - report.free_energy) / report.free_energy).abs();
        println!("{t:>6.1} {:>18.10} {folded:>18.10} {rel:>10.2e}", report.free_energy);
    }

    println!();
    println!("pairing: single-particle part of the BCS energy");
    println!("{:>6} {:>18} {:>18} {:>10}", "gap", "direct", "folded", "rel err");
    for gap in [1.0, 3.0] {
        let scheme = OccupationScheme::bcs(gap);
        let lambda = fix_fermi_level(&spectrum, &scheme, n)?;
        let report = thermo_report(&spectrum, &scheme, n)?;
        let direct = report.e_bcs.expect("bcs scheme reports e_bcs");
        let folded = bcs_energy_via_folding(&spectrum, &scheme, lambda)?;
        let rel = ((folded - direct) / direct).abs();
        println!("{gap:>6.1} {direct:>18.10} {folded:>18.10} {rel:>10.2e}");
    }

    // Entropy from the folded free energy by central difference in T.
    let t = 5.0;
    let scheme = OccupationScheme::thermal(t);
    let report = thermo_report(&spectrum, &scheme, n)?;
    let s_fd = entropy_via_folding(&spectrum, t, n)?;
    println!();
    println!("entropy at T = {t}: occupation form {:.8}, -dF/dT {s_fd:.8}", report.entropy);

    // On the oscillating side the same derivative structure shows up as
    // delta E_pair = gap * d(delta E_BCS)/d gap, orbit by orbit.
    let orbits = vec![
        PeriodicOrbit {
            label: "alpha".into(),
            action: 41.0,
            period: 2.3,
            sigma: 2,
            amplitude: Some(0.8),
        },
        PeriodicOrbit {
            label: "beta".into(),
            action: 97.0,
            period: 4.1,
            sigma: 5,
            amplitude: Some(0.35),
        },
    ];
    let gap = 1.2;
    let h = gap / 500.0;
    let e_bcs = |g: f64| -> scdens::Result<f64> {
        modulated_trace_formula(&orbits, &FoldingKernel::pairing(g)?, 1.0, TraceTarget::BcsEnergy)
    };
    let fd = gap * (e_bcs(gap + h)? - e_bcs(gap - h)?) / (2.0 * h);
    let direct = modulated_trace_formula(
        &orbits,
        &FoldingKernel::pairing(gap)?,
        1.0,
        TraceTarget::PairEnergy,
    )?;
    println!();
    println!("two-orbit catalog, gap = {gap}:");
    println!("  delta E_pair             = {direct:.10}");
    println!("  gap * d(delta E_BCS)/dg  = {fd:.10}");
    Ok(())
}
