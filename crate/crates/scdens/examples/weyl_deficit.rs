//! The wall-orbit density profile, integrated over a hard-wall cavity,
//! reproduces the surface term of the smooth level counting in any
//! dimension. The estimator truncates the radial quadrature at a Bessel
//! zero and attaches the analytic tail, so the residual error comes from
//! the next-order wall curvature and falls off like 1/pR.

use scdens::closed_orbits::integrate_friedel_deficit;
use scdens::smooth_tf::weyl_surface_deficit;
use scdens::spectra::PotentialModel;

fn main() -> scdens::Result<()> {
    println!(
        "{:>3} {:>10} {:>9} {:>12} {:>12} {:>10} {:>10}",
        "D", "lambda~", "pR", "numeric", "surface", "rel err", "err*pR"
    );
    for (dim, lambdas) in [
        (1usize, [50.0f64, 120.0, 300.0]),
        (2, [900.0, 1600.0, 3600.0]),
        (3, [6400.0, 8100.0, 10000.0]),
    ] {
        let model = PotentialModel::billiard(dim, 1.0);
        for lt in lambdas {
            let pr = lt.sqrt();
            let numeric = integrate_friedel_deficit(&model, lt)?;
            let weyl = weyl_surface_deficit(&model, lt)?;
            let rel = (numeric / weyl - 1.0).abs();
            println!(
                "{dim:>3} {lt:>10.0} {pr:>9.2} {numeric:>12.4} {weyl:>12.4} {rel:>10.2e} {:>10.3}",
                rel * pr
            );
        }
    }
    println!();
    println!("D = 1 is exact; for D = 2 the error constant is about 0.2-0.3,");
    println!("for D = 3 about 0.65, so percent-level accuracy needs pR of a");
    println!("few tens. The product err*pR stays of that order as pR grows,");
    println!("while the raw relative error keeps shrinking.");
    Ok(())
}
