//! Quantum density of N fermions in a 1D hard-wall box against its smooth
//! Thomas-Fermi background: Friedel-type oscillations near the walls, and
//! their thermal damping at the midpoint.

use scdens::grid::Grid;
use scdens::qm_densities::{density, fix_fermi_level, DensityKind, OccupationScheme};
use scdens::smooth_tf::{rho_tf, smooth_fermi_level, CountingMode};
use scdens::spectra::{solve_spectrum, PotentialModel};

fn main() -> scdens::Result<()> {
    // L = pi with hbar^2/2m = 1, so levels sit at E_n = n^2.
    let l = std::f64::consts::PI;
    let model = PotentialModel::box1d(l).with_units(1.0, 0.5);
    let n = 20usize;
    let spectrum = solve_spectrum(&model, 80)?;

    let cold = OccupationScheme::zero_t();
    let lambda = fix_fermi_level(&spectrum, &cold, n)?;
    let smooth = smooth_fermi_level(&model, n, CountingMode::WithSurface)?;
    println!("box L = pi, N = {n}");
    println!("lambda       = {lambda:.6}  (midgap between n = 10 and n = 11)");
    println!("lambda~      = {:.6}  (smooth counting with surface term)", smooth.lambda);
    println!();

    let grid = Grid::line(0.0, l, 61);
    let rho = density(&spectrum, &cold, lambda, &grid, DensityKind::Rho)?;
    println!("{:>8} {:>12} {:>12} {:>12}", "x", "rho_qm", "rho_tf", "delta");
    for i in (0..grid.len()).step_by(5) {
        let x = grid.param(i);
        let bg = rho_tf(&model, smooth.lambda, &[x]);
        println!(
            "{x:>8.4} {:>12.6} {bg:>12.6} {:>12.6}",
            rho.values[i],
            rho.values[i] - bg
        );
    }

    // Heating wipes out all but the shortest wall orbit: at the midpoint
    // the surviving oscillation is -(4/pi^2) sin(pL) times the modulation
    // factor of the one-bounce orbit (period L m / p).
    use scdens::correlations::FoldingKernel;
    let mid = Grid::line(0.5 * l, 0.5 * l + 1e-3, 2);
    let p_flat = (n as f64 / 2.0 + 0.5) * std::f64::consts::PI / l;
    let rho_flat = 2.0 * p_flat / std::f64::consts::PI;
    println!();
    println!("midpoint oscillation vs temperature (flat background {rho_flat:.6}):");
    println!("{:>6} {:>14} {:>14}", "T", "quantum", "one-bounce");
    for t in [1.0, 3.0, 5.0, 8.0] {
        let scheme = OccupationScheme::thermal(t);
        let lam = fix_fermi_level(&spectrum, &scheme, n)?;
        let hot = density(&spectrum, &scheme, lam, &mid, DensityKind::Rho)?.values[0];
        let kernel = FoldingKernel::thermal(t)?;
        let p = lam.sqrt();
        let predicted =
            -(4.0 / std::f64::consts::PI.powi(2)) * (p * l).sin() * kernel.fourier(l * 0.5 / p);
        println!("{t:>6.1} {:>14.6} {predicted:>14.6}", hot - rho_flat);
    }
    Ok(())
}
