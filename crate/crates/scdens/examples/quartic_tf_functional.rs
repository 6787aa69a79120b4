//! Functional form of the Thomas-Fermi kinetic energy density, tested on a
//! non-integrable 2D quartic oscillator: feeding the *quantum* density
//! through tau_TF[rho] reproduces the quantum kinetic density inside the
//! classically allowed region far better than the smooth curve alone,
//! because the leading density oscillations cancel inside the functional.

use scdens::closed_orbits::{tf_functional_check, InteriorWindow};
use scdens::grid::Grid;
use scdens::qm_densities::{density, fix_fermi_level, DensityKind, OccupationScheme};
use scdens::smooth_tf::{rho_tf, smooth_fermi_level, tau_tf, tau_tf_of_rho, CountingMode};
use scdens::spectra::{solve_spectrum, PotentialModel};

fn main() -> scdens::Result<()> {
    let model = PotentialModel::quartic2d(0.6)?;
    let n = 60usize;
    let spectrum = solve_spectrum(&model, n / 2 + 60)?;
    let scheme = OccupationScheme::zero_t();
    let lambda = fix_fermi_level(&spectrum, &scheme, n)?;
    let lt = smooth_fermi_level(&model, n, CountingMode::VolumeOnly)?.lambda;
    println!("quartic kappa = 0.6, N = {n}: lambda = {lambda:.4}, lambda~ = {lt:.4}");

    // Cut along the x = y diagonal, parameterised by arclength.
    let f = std::f64::consts::FRAC_1_SQRT_2;
    let reach = (lt / 0.1).powf(0.25) * 1.05;
    let grid = Grid::cut2d([f, f], -reach, reach, 401);

    let rho = density(&spectrum, &scheme, lambda, &grid, DensityKind::Rho)?;
    let tau = density(&spectrum, &scheme, lambda, &grid, DensityKind::Tau)?;

    let window = InteriorWindow::standard(&model, lt);
    let report = tf_functional_check(&rho, &tau, &model, lt, &window)?;
    let s = &report.summary;
    println!();
    println!("tau_qm vs tau_TF[rho_qm] inside the window ({} pts):", s.points_used);
    println!("  rms residual / rms tau = {:.4},  max ratio = {:.4}", s.rms_ratio, s.max_ratio);

    // Against the bare smooth curve the residual is the full oscillation.
    let mut osc_rms = 0.0f64;
    let mut fun_rms = 0.0f64;
    let mut m = 0usize;
    for i in 0..grid.len() {
        let t = grid.param(i);
        let point = grid.embed(t);
        if !window.contains(&model, lt, &point) {
            continue;
        }
        osc_rms += (tau.values[i] - tau_tf(&model, lt, &point)).powi(2);
        fun_rms += report.residual.values[i].powi(2);
        m += 1;
    }
    println!(
        "  rms residual: functional = {:.4e}, bare smooth curve = {:.4e}",
        (fun_rms / m as f64).sqrt(),
        (osc_rms / m as f64).sqrt()
    );

    // Sanity: the functional is exact on its own smooth input.
    let mut worst = 0.0f64;
    for i in (0..grid.len()).step_by(20) {
        let point = grid.embed(grid.param(i));
        let smooth_rho = rho_tf(&model, lt, &point);
        let diff = (tau_tf_of_rho(&model, smooth_rho)? - tau_tf(&model, lt, &point)).abs();
        worst = worst.max(diff);
    }
    println!("  tau_TF[rho_TF] - tau_TF, worst sample: {worst:.2e}");
    Ok(())
}
