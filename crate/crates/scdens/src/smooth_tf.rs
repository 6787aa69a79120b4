//! Thomas-Fermi (phase-space) densities, smooth counting functions and the
//! smooth Fermi level.
//!
//! The smooth particle number is the phase-space volume below the Fermi
//! surface; for hard-wall models it can be sharpened by the leading surface
//! correction, which every wall contributes with a negative sign. Solving
//! N(lambda) = N for the smooth level gives the reference energy that all
//! semiclassical amplitudes and phases are evaluated at.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{gamma_fn, integrate, QuadratureSpec};
use crate::spectra::{smooth_level_density, PotentialModel};

/// Volume of the unit ball in `d` dimensions.
fn unit_ball_volume(d: usize) -> f64 {
    let hd = d as f64 / 2.0;
    std::f64::consts::PI.powf(hd) / gamma_fn(hd + 1.0).expect("positive argument")
}

/// Local Thomas-Fermi particle density (spin 2): 2 V_D p^D / (2 pi hbar)^D
/// with the local momentum p(lambda, r). Zero in the forbidden region.
pub fn rho_tf(model: &PotentialModel, lambda: f64, point: &[f64]) -> f64 {
    match model.classical_momentum(lambda, point) {
        None => 0.0,
        Some(p) => {
            let d = model.dim();
            2.0 * unit_ball_volume(d) * (p / (2.0 * std::f64::consts::PI * model.hbar())).powi(d as i32)
        }
    }
}

/// Local Thomas-Fermi kinetic-energy density:
/// rho_TF * (D/(D+2)) * p^2/2m.
pub fn tau_tf(model: &PotentialModel, lambda: f64, point: &[f64]) -> f64 {
    match model.classical_momentum(lambda, point) {
        None => 0.0,
        Some(p) => {
            let d = model.dim() as f64;
            rho_tf(model, lambda, point) * d / (d + 2.0) * p * p / (2.0 * model.mass())
        }
    }
}

/// The Thomas-Fermi kinetic-energy functional tau_TF[rho]: eliminate the
/// momentum from the pair (rho_TF, tau_TF) and apply the resulting power
/// law to an arbitrary density value.
pub fn tau_tf_of_rho(model: &PotentialModel, rho: f64) -> Result<f64> {
    if rho < 0.0 {
        return Err(Error::Domain(format!(
            "tau_TF[rho] needs rho >= 0, got {rho}"
        )));
    }
    let d = model.dim();
    let hbar = model.hbar();
    // Invert rho = 2 V_D (p / 2 pi hbar)^D for p^2.
    let p2 = (rho * (2.0 * std::f64::consts::PI * hbar).powi(d as i32)
        / (2.0 * unit_ball_volume(d)))
    .powf(2.0 / d as f64);
    Ok(rho * d as f64 / (d as f64 + 2.0) * p2 / (2.0 * model.mass()))
}

/// Which terms of the smooth counting function to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountingMode {
    /// Phase-space volume term only.
    VolumeOnly,
    /// Volume term plus the leading (negative) hard-wall surface correction.
    WithSurface,
}

/// Leading surface correction to the smooth particle number of a hard-wall
/// model: -(p R / hbar)^{D-1} / Gamma(D), spin 2 included. In one dimension
/// this is the constant -1 regardless of the wall positions.
pub fn weyl_surface_deficit(model: &PotentialModel, lambda: f64) -> Result<f64> {
    if lambda <= 0.0 {
        return Err(Error::Domain(format!(
            "surface deficit needs lambda > 0, got {lambda}"
        )));
    }
    let p = (2.0 * model.mass() * lambda).sqrt();
    match model {
        PotentialModel::Box1d { .. } => Ok(-1.0),
        PotentialModel::Billiard { dim, radius, hbar, .. } => {
            let d = *dim;
            Ok(-(p * radius / hbar).powi(d as i32 - 1) / gamma_fn(d as f64)?)
        }
        _ => Err(Error::Unsupported(format!(
            "surface correction needs hard walls, not a {} model",
            model.kind_name()
        ))),
    }
}

/// Smooth particle number at a trial Fermi level. The volume term comes
/// from closed forms for the hard-wall models and from integrating the
/// smooth level density for the harmonic and quartic traps.
pub fn smooth_particle_count(
    model: &PotentialModel,
    lambda: f64,
    mode: CountingMode,
) -> Result<f64> {
    if lambda <= 0.0 {
        return Ok(0.0);
    }
    let hbar = model.hbar();
    let p = (2.0 * model.mass() * lambda).sqrt();
    let volume = match model {
        PotentialModel::Box1d { length, .. } => {
            2.0 * length * p / (std::f64::consts::PI * hbar)
        }
        // rho_TF is constant inside a billiard: N_vol = rho_TF * V_D R^D.
        PotentialModel::Billiard { dim, radius, .. } => {
            let d = *dim;
            let vd = unit_ball_volume(d);
            2.0 * vd * vd * (radius * p / (2.0 * std::f64::consts::PI * hbar)).powi(d as i32)
        }
        PotentialModel::Harmonic { .. } | PotentialModel::Quartic2d { .. } => {
            let m = model.clone();
            2.0 * integrate(
                |e: f64| smooth_level_density(&m, e),
                0.0,
                lambda,
                QuadratureSpec::with_rel_tol(1e-12),
            )?
            .value
        }
    };
    match mode {
        CountingMode::VolumeOnly => Ok(volume),
        CountingMode::WithSurface => Ok(volume + weyl_surface_deficit(model, lambda)?),
    }
}

/// A solved smooth Fermi level and the counting convention that defined it.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SmoothFermiLevel {
    pub lambda: f64,
    /// Smooth particle number reproduced at `lambda`.
    pub n_particles: f64,
    pub mode: CountingMode,
}

/// Solve the smooth counting relation N(lambda) = N for the smooth Fermi
/// level. The result reproduces the particle number to better than 1e-8.
pub fn smooth_fermi_level(
    model: &PotentialModel,
    n_particles: usize,
    mode: CountingMode,
) -> Result<SmoothFermiLevel> {
    assert!(n_particles >= 1, "need at least one particle");
    let n = n_particles as f64;
    let mut hi = 1.0;
    while smooth_particle_count(model, hi, mode)? < n {
        hi *= 2.0;
        if hi > 1e18 {
            return Err(Error::RootFinding(format!(
                "smooth counting never reaches N = {n}"
            )));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if smooth_particle_count(model, mid, mode)? < n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let reproduced = smooth_particle_count(model, lambda, mode)?;
    if (reproduced - n).abs() > 1e-8 * n.max(1.0) {
        return Err(Error::RootFinding(format!(
            "smooth Fermi level reproduces N = {reproduced}, wanted {n}"
        )));
    }
    Ok(SmoothFermiLevel {
        lambda,
        n_particles: reproduced,
        mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::solve_spectrum;

    #[test]
    fn box_counting_closed_forms() {
        // L = pi, hbar^2/2m = 1: N_vol = 2 sqrt(lambda).
        let model = PotentialModel::box1d(std::f64::consts::PI).with_units(1.0, 0.5);
        let vol = smooth_fermi_level(&model, 20, CountingMode::VolumeOnly).unwrap();
        assert!(
            (vol.lambda - 100.0).abs() < 1e-8,
            "volume-only smooth level {} vs 100",
            vol.lambda
        );
        let weyl = smooth_fermi_level(&model, 20, CountingMode::WithSurface).unwrap();
        assert!(
            (weyl.lambda - 110.25).abs() < 1e-8,
            "wall-corrected smooth level {} vs (21/2)^2",
            weyl.lambda
        );
    }

    #[test]
    fn disk_weyl_level_matches_quadratic_solution() {
        let model = PotentialModel::billiard(2, 1.0);
        // N = lambda/2 - sqrt(lambda) = 100 gives sqrt(lambda) = 1 + sqrt(201).
        let weyl = smooth_fermi_level(&model, 100, CountingMode::WithSurface).unwrap();
        let want = 202.0 + 2.0 * 201.0f64.sqrt();
        assert!(
            (weyl.lambda - want).abs() < 1e-8,
            "disk smooth level {} vs {want}",
            weyl.lambda
        );
        let vol = smooth_fermi_level(&model, 100, CountingMode::VolumeOnly).unwrap();
        assert!((vol.lambda - 200.0).abs() < 1e-8);
    }

    #[test]
    fn harmonic_quadrature_matches_closed_form() {
        // 1D: N = 2 lambda / (hbar w); 2D isotropic: N = lambda^2.
        let one = PotentialModel::harmonic(&[1.0]);
        let lev = smooth_fermi_level(&one, 20, CountingMode::VolumeOnly).unwrap();
        assert!((lev.lambda - 10.0).abs() < 1e-8, "1D level {}", lev.lambda);
        let two = PotentialModel::harmonic(&[1.0, 1.0]);
        let lev = smooth_fermi_level(&two, 30, CountingMode::VolumeOnly).unwrap();
        assert!(
            (lev.lambda - 30.0f64.sqrt()).abs() < 1e-8,
            "2D level {} vs sqrt(30)",
            lev.lambda
        );
    }

    #[test]
    fn quartic_level_matches_angular_integral_oracle() {
        // lambda = (3 pi N / I_c)^{2/3} with I_c = 12.768681545003383 at
        // kappa = 0.6 (independent high-precision quadrature).
        let model = PotentialModel::quartic2d(0.6).unwrap();
        let lev = smooth_fermi_level(&model, 120, CountingMode::VolumeOnly).unwrap();
        assert!(
            (lev.lambda - 19.870290289836925).abs() < 1e-7,
            "quartic smooth level {}",
            lev.lambda
        );
        let g = smooth_level_density(&model, lev.lambda);
        assert!(
            (g - 4.529375197202448).abs() < 1e-9,
            "quartic smooth density {g}"
        );
    }

    #[test]
    fn smooth_level_reproduces_n_for_every_model() {
        let cases: Vec<(PotentialModel, CountingMode)> = vec![
            (PotentialModel::box1d(2.0), CountingMode::VolumeOnly),
            (PotentialModel::box1d(2.0), CountingMode::WithSurface),
            (PotentialModel::harmonic(&[1.0, 2.0f64.sqrt()]), CountingMode::VolumeOnly),
            (PotentialModel::billiard(2, 1.0), CountingMode::WithSurface),
            (PotentialModel::billiard(3, 1.0), CountingMode::WithSurface),
            (PotentialModel::quartic2d(0.6).unwrap(), CountingMode::VolumeOnly),
        ];
        for (model, mode) in cases {
            let lev = smooth_fermi_level(&model, 42, mode).unwrap();
            assert!(
                (lev.n_particles - 42.0).abs() < 1e-8,
                "{}: N(lambda) = {}",
                model.kind_name(),
                lev.n_particles
            );
        }
    }

    #[test]
    fn surface_deficit_values() {
        let seg = PotentialModel::box1d(3.0);
        assert_eq!(weyl_surface_deficit(&seg, 7.0).unwrap(), -1.0);
        let disk = PotentialModel::billiard(2, 1.0);
        // hbar^2/2m = 1: p = sqrt(lambda).
        let d2 = weyl_surface_deficit(&disk, 225.0).unwrap();
        assert!((d2 + 15.0).abs() < 1e-12, "disk deficit {d2} vs -15");
        let ball = PotentialModel::billiard(3, 2.0);
        let d3 = weyl_surface_deficit(&ball, 25.0).unwrap();
        assert!((d3 + 50.0).abs() < 1e-12, "sphere deficit {d3} vs -(p R)^2/2");
        assert!(weyl_surface_deficit(&PotentialModel::harmonic(&[1.0]), 5.0).is_err());
    }

    #[test]
    fn staircase_selects_the_surface_corrected_count() {
        // The orbital staircase of the disk fluctuates around the
        // volume+surface count; against the volume-only count it shows a
        // systematic deficit close to p R / hbar. This pins both the
        // prefactor and the sign of the surface term.
        let model = PotentialModel::billiard(2, 1.0);
        let sp = solve_spectrum(&model, 700).unwrap();
        let (mut resid_weyl, mut resid_vol, mut deficit) = (0.0, 0.0, 0.0);
        let zs: Vec<f64> = (6..=15).map(|k| 2.0 * k as f64).collect();
        for &z in &zs {
            let e = z * z;
            let counted = 2.0 * sp.states_below(e) as f64;
            let vol = smooth_particle_count(&model, e, CountingMode::VolumeOnly).unwrap();
            let weyl = smooth_particle_count(&model, e, CountingMode::WithSurface).unwrap();
            resid_weyl += counted - weyl;
            resid_vol += counted - vol;
            deficit += -z;
        }
        let m = zs.len() as f64;
        assert!(
            (resid_weyl / m).abs() < 2.0,
            "mean residual against volume+surface = {}",
            resid_weyl / m
        );
        assert!(
            (resid_vol / m - deficit / m).abs() < 2.0,
            "volume-only residual {} should sit near the mean deficit {}",
            resid_vol / m,
            deficit / m
        );
    }

    #[test]
    fn functional_reproduces_tau_on_tf_densities() {
        let cases: Vec<(PotentialModel, Vec<f64>, f64)> = vec![
            (PotentialModel::box1d(2.0), vec![0.7], 31.0),
            (PotentialModel::harmonic(&[1.0]), vec![1.1], 9.0),
            (PotentialModel::billiard(2, 1.0), vec![0.55], 230.0),
            (PotentialModel::billiard(3, 1.0), vec![0.4], 150.0),
            (PotentialModel::harmonic(&[1.0, 1.4, 0.8]), vec![0.3, -0.2, 0.5], 11.0),
            (PotentialModel::quartic2d(0.6).unwrap(), vec![1.0, 1.2], 19.87),
        ];
        for (model, point, lambda) in cases {
            let rho = rho_tf(&model, lambda, &point);
            let tau = tau_tf(&model, lambda, &point);
            let via_rho = tau_tf_of_rho(&model, rho).unwrap();
            assert!(
                (tau - via_rho).abs() <= 1e-12 * tau.abs(),
                "{}: tau_TF = {tau} vs functional {via_rho}",
                model.kind_name()
            );
            assert!(rho > 0.0 && tau > 0.0);
        }
    }

    #[test]
    fn forbidden_region_gives_vanishing_smooth_densities() {
        let model = PotentialModel::harmonic(&[1.0]);
        assert_eq!(rho_tf(&model, 2.0, &[10.0]), 0.0);
        assert_eq!(tau_tf(&model, 2.0, &[10.0]), 0.0);
        let disk = PotentialModel::billiard(2, 1.0);
        assert_eq!(rho_tf(&disk, 50.0, &[1.7]), 0.0);
        assert!(tau_tf_of_rho(&disk, -1e-9).is_err(), "negative rho must fail");
        assert_eq!(tau_tf_of_rho(&disk, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn disk_tf_density_spot_value() {
        // rho_TF = p^2 / (2 pi hbar^2) in 2D, independent of r inside.
        let disk = PotentialModel::billiard(2, 1.0);
        let lambda = 230.0;
        let want = lambda / (2.0 * std::f64::consts::PI);
        for r in [0.0, 0.3, 0.99] {
            let got = rho_tf(&disk, lambda, &[r]);
            assert!(
                (got - want).abs() < 1e-12 * want,
                "rho_TF({r}) = {got} vs {want}"
            );
        }
    }
}
