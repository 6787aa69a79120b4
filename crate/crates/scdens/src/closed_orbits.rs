//! Closed-orbit machinery for spatial density oscillations: phases, action
//! integrals, the wall-reflection orbit of hard-wall billiards, orbit
//! catalogs, and the semiclassical density sums plus the local consistency
//! checks built on them.
//!
//! An orbit returns to its starting point r, so every quantity here is a
//! function of (lambda, r). Built-in generation covers only the shortest
//! wall-reflection orbit ("+"), whose amplitude is fixed by the regularized
//! Bessel form of its density contribution; richer catalogs are data,
//! loaded from JSON files on an explicit sampling grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DensityField, Grid};
use crate::qm_densities::DensityKind;
use crate::smooth_tf::{rho_tf, tau_tf_of_rho};
use crate::specfun::{
    bessel_j_over_pow, bessel_j_zeros_upto, gamma_fn, integrate, integrate_split,
    sph_bessel_zeros_upto, QuadratureSpec,
};
use crate::spectra::PotentialModel;

/// One closed orbit evaluated at a fixed (lambda, r).
#[derive(Debug, Clone)]
pub struct ClosedOrbit {
    pub label: String,
    /// Action along the orbit, S(lambda, r).
    pub action: f64,
    /// Period T(lambda, r) = dS/dlambda.
    pub period: f64,
    /// Number of conjugate points passed.
    pub morse_index: u32,
    /// Density-oscillation amplitude (units of a particle density).
    pub amplitude: f64,
    /// Extra weight carried into the gradient kinetic channel; optional
    /// because general closed-form expressions are not implemented here.
    pub q_weight: Option<f64>,
}

impl ClosedOrbit {
    /// Oscillation phase S/hbar - (pi/2) mu - (pi/4)(D + 1).
    pub fn phase(&self, hbar: f64, dim: usize) -> f64 {
        self.action / hbar
            - std::f64::consts::FRAC_PI_2 * self.morse_index as f64
            - std::f64::consts::FRAC_PI_4 * (dim as f64 + 1.0)
    }
}

/// Line integral of the classical momentum along a piecewise-linear path.
/// Points are model coordinates; every path point must be classically
/// allowed at the given energy.
pub fn action_integral(model: &PotentialModel, energy: f64, path: &[Vec<f64>]) -> Result<f64> {
    if path.len() < 2 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for seg in path.windows(2) {
        let (a, b) = (&seg[0], &seg[1]);
        assert_eq!(a.len(), b.len(), "path points must share a dimension");
        let length = a
            .iter()
            .zip(b)
            .map(|(x, y)| (y - x) * (y - x))
            .sum::<f64>()
            .sqrt();
        if length == 0.0 {
            continue;
        }
        let mut forbidden: Option<f64> = None;
        let r = integrate(
            |t: f64| {
                let q: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
                match model.classical_momentum(energy, &q) {
                    Some(p) => p * length,
                    None => {
                        forbidden.get_or_insert(t);
                        0.0
                    }
                }
            },
            0.0,
            1.0,
            QuadratureSpec::with_rel_tol(1e-10),
        )?;
        if let Some(t) = forbidden {
            return Err(Error::Domain(format!(
                "path enters the forbidden region near t = {t:.4} of a segment (V > {energy})"
            )));
        }
        total += r.value;
    }
    Ok(total)
}

fn billiard_geometry(model: &PotentialModel) -> Result<(usize, f64)> {
    match model {
        PotentialModel::Billiard { dim, radius, .. } => Ok((*dim, *radius)),
        _ => Err(Error::Unsupported(format!(
            "wall-reflection orbits need a hard-wall billiard, not {}",
            model.kind_name()
        ))),
    }
}

/// Envelope of the wall-orbit density oscillation:
/// rho_TF 2^nu Gamma(nu+1) (R/r)^{nu-1/2} sqrt(2/pi) z^{-(nu+1/2)}.
fn plus_envelope(model: &PotentialModel, lambda: f64, r: f64) -> Result<f64> {
    let (dim, radius) = billiard_geometry(model)?;
    let nu = dim as f64 / 2.0;
    let p = (2.0 * model.mass() * lambda).sqrt();
    let z = 2.0 * (radius - r) * p / model.hbar();
    Ok(rho_tf(model, lambda, &[r])
        * 2f64.powf(nu)
        * gamma_fn(nu + 1.0)?
        * (radius / r).powf(nu - 0.5)
        * (2.0 / std::f64::consts::PI).sqrt()
        * z.powf(-(nu + 0.5)))
}

fn plus_density_raw(model: &PotentialModel, lambda: f64, r: f64) -> Result<f64> {
    let (dim, radius) = billiard_geometry(model)?;
    if r <= 0.0 {
        return Err(Error::Domain(format!(
            "wall-orbit density diverges toward the center; needs r > 0, got {r}"
        )));
    }
    if r > radius {
        return Err(Error::Domain(format!(
            "r = {r} lies outside the billiard of radius {radius}"
        )));
    }
    if lambda <= 0.0 {
        return Err(Error::Domain(format!("needs lambda > 0, got {lambda}")));
    }
    let nu = dim as f64 / 2.0;
    let p = (2.0 * model.mass() * lambda).sqrt();
    let z = 2.0 * (radius - r) * p / model.hbar();
    Ok(-rho_tf(model, lambda, &[r])
        * 2f64.powf(nu)
        * gamma_fn(nu + 1.0)?
        * (radius / r).powf(nu - 0.5)
        * bessel_j_over_pow(nu, z)?)
}

/// Regularized density oscillation of the shortest wall-reflection orbit
/// of a hard-wall billiard:
/// -rho_TF 2^nu Gamma(nu+1) (R/r)^{nu-1/2} J_nu(z)/z^nu,
/// nu = D/2, z = 2 (R - r) p_lambda / hbar. Exactly -rho_TF at the wall.
///
/// Evaluation is restricted to r >= 0.05 R: the (R/r)^{nu-1/2} factor
/// diverges toward the center, where this single-orbit form stops being
/// meaningful anyway.
pub fn friedel_plus_density(model: &PotentialModel, lambda: f64, r: f64) -> Result<f64> {
    let (_, radius) = billiard_geometry(model)?;
    if r > 0.0 && r < 0.05 * radius {
        return Err(Error::Domain(format!(
            "r = {r} is below the evaluation floor 0.05 R = {}; the wall-orbit \
             form diverges toward the center",
            0.05 * radius
        )));
    }
    plus_density_raw(model, lambda, r)
}

/// Particle-number deficit carried by the wall-orbit oscillation,
/// integrated over the billiard with the radial measure.
///
/// The radial integral is oscillatory and only conditionally matches the
/// closed surface-term form, so it is evaluated as an exact quadrature up
/// to the last Bessel zero below z_top = 2 p R / hbar, plus the analytic
/// remainder of the near-wall (half-space) asymptotic integral. Agreement
/// with -(pR/hbar)^{D-1}/Gamma(D) is at the percent level once pR/hbar is
/// well into the semiclassical regime.
pub fn integrate_friedel_deficit(model: &PotentialModel, lambda: f64) -> Result<f64> {
    let (dim, radius) = billiard_geometry(model)?;
    let nu = dim as f64 / 2.0;
    let hbar = model.hbar();
    let p = (2.0 * model.mass() * lambda).sqrt();
    let z_top = 2.0 * radius * p / hbar;
    let zeros = match dim {
        1 => sph_bessel_zeros_upto(0, z_top),
        2 => bessel_j_zeros_upto(1, z_top),
        3 => sph_bessel_zeros_upto(1, z_top),
        _ => unreachable!("billiard dimensions are 1-3"),
    };
    let &z_last = zeros.last().ok_or_else(|| {
        Error::Domain(format!(
            "z_top = {z_top:.3} contains no Bessel zero; lambda too small for the \
             surface-term regime"
        ))
    })?;
    // Surface of the unit (D-1)-sphere: S_D = D V_D.
    let vd = std::f64::consts::PI.powf(nu) / gamma_fn(nu + 1.0)?;
    let sd = dim as f64 * vd;
    let mut breaks = vec![0.0];
    breaks.extend_from_slice(&zeros);
    // Exact piece: ball measure, z from 0 (wall) to the last zero.
    let m = model.clone();
    let exact = integrate_split(
        &mut |z: f64| {
            let r = radius - z * hbar / (2.0 * p);
            plus_density_raw(&m, lambda, r).unwrap_or(0.0) * sd * r.powi(dim as i32 - 1)
                * hbar
                / (2.0 * p)
        },
        &breaks,
        QuadratureSpec::with_rel_tol(1e-9),
    )?
    .value;
    // Analytic remainder of the half-space idealization: the prefactor of
    // the near-wall integrand times (int_0^inf - int_0^z_last) J_nu/z^nu.
    let c_half = -sd * radius.powi(dim as i32 - 1) * hbar / (2.0 * p)
        * rho_tf(model, lambda, &[radius * 0.5])
        * 2f64.powf(nu)
        * gamma_fn(nu + 1.0)?;
    let i_inf = std::f64::consts::PI.sqrt() / (2f64.powf(nu) * gamma_fn(nu + 0.5)?);
    let i_num = integrate_split(
        &mut |z: f64| bessel_j_over_pow(nu, z).unwrap_or(0.0),
        &breaks,
        QuadratureSpec::with_rel_tol(1e-9),
    )?
    .value;
    let _ = z_last;
    Ok(exact + c_half * (i_inf - i_num))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SampledFamily {
    label: String,
    mu: u32,
    #[serde(rename = "S")]
    action: Vec<f64>,
    #[serde(rename = "T")]
    period: Vec<f64>,
    #[serde(rename = "A")]
    amplitude: Vec<f64>,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    q_weight: Option<Vec<f64>>,
}

/// File-backed orbit catalog: every family is tabulated on one declared
/// radial sampling grid at one smooth Fermi level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledCatalog {
    pub lambda: f64,
    pub dim: usize,
    pub hbar: f64,
    /// Potential used for the kinetic prefactor p^2/2m; a missing model
    /// means V = 0 (billiard interior).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PotentialModel>,
    pub points: Vec<f64>,
    orbits: Vec<SampledFamily>,
}

/// Source of closed orbits for the semiclassical density sums.
#[derive(Debug, Clone)]
pub enum OrbitCatalog {
    /// The shortest wall-reflection orbit of a hard-wall billiard, with
    /// amplitude fixed by matching the regularized Bessel form.
    BilliardPlus { model: PotentialModel },
    /// Orbits tabulated on an explicit grid, typically loaded from JSON.
    Sampled(SampledCatalog),
}

impl OrbitCatalog {
    pub fn billiard_plus(model: &PotentialModel) -> Result<Self> {
        billiard_geometry(model)?;
        Ok(OrbitCatalog::BilliardPlus {
            model: model.clone(),
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cat: SampledCatalog = serde_json::from_str(text)?;
        if cat.points.is_empty() {
            return Err(Error::Config("catalog declares no sampling points".into()));
        }
        for fam in &cat.orbits {
            let n = cat.points.len();
            if fam.action.len() != n || fam.period.len() != n || fam.amplitude.len() != n {
                return Err(Error::Config(format!(
                    "orbit {:?} tabulates {} actions, {} periods, {} amplitudes for {n} points",
                    fam.label,
                    fam.action.len(),
                    fam.period.len(),
                    fam.amplitude.len()
                )));
            }
            if let Some(q) = &fam.q_weight {
                if q.len() != n {
                    return Err(Error::Config(format!(
                        "orbit {:?} tabulates {} Q weights for {n} points",
                        fam.label,
                        q.len()
                    )));
                }
            }
        }
        Ok(OrbitCatalog::Sampled(cat))
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn dim(&self) -> usize {
        match self {
            OrbitCatalog::BilliardPlus { model } => model.dim(),
            OrbitCatalog::Sampled(c) => c.dim,
        }
    }

    pub fn hbar(&self) -> f64 {
        match self {
            OrbitCatalog::BilliardPlus { model } => model.hbar(),
            OrbitCatalog::Sampled(c) => c.hbar,
        }
    }

    /// Kinetic prefactor p^2/2m = lambda - V(r) entering the tau channels.
    fn kinetic_factor(&self, lambda: f64, r: f64) -> f64 {
        let v = match self {
            OrbitCatalog::BilliardPlus { .. } => 0.0,
            OrbitCatalog::Sampled(c) => c
                .model
                .as_ref()
                .map(|m| m.evaluate_potential(&[r]))
                .unwrap_or(0.0),
        };
        lambda - v
    }

    /// All orbits at one point, ordered by period. Sampled catalogs are
    /// defined only on their declared grid and at their declared level.
    pub fn orbits_at(&self, lambda: f64, r: f64) -> Result<Vec<ClosedOrbit>> {
        match self {
            OrbitCatalog::BilliardPlus { model } => {
                let (_, radius) = billiard_geometry(model)?;
                if r <= 0.0 || r >= radius {
                    return Err(Error::Domain(format!(
                        "wall orbit needs 0 < r < R = {radius}, got {r}"
                    )));
                }
                let p = (2.0 * model.mass() * lambda).sqrt();
                Ok(vec![ClosedOrbit {
                    label: "+".into(),
                    action: 2.0 * (radius - r) * p,
                    period: 2.0 * (radius - r) * model.mass() / p,
                    morse_index: 2,
                    amplitude: plus_envelope(model, lambda, r)?,
                    q_weight: None,
                }])
            }
            OrbitCatalog::Sampled(cat) => {
                if (lambda - cat.lambda).abs() > 1e-9 * cat.lambda.abs().max(1.0) {
                    return Err(Error::Domain(format!(
                        "catalog sampled at lambda = {}, requested {lambda}",
                        cat.lambda
                    )));
                }
                let scale = cat.points.iter().fold(1.0f64, |m, p| m.max(p.abs()));
                let idx = cat
                    .points
                    .iter()
                    .position(|&p| (p - r).abs() <= 1e-9 * scale)
                    .ok_or_else(|| {
                        Error::Domain(format!("r = {r} is not on the catalog sampling grid"))
                    })?;
                let mut orbits: Vec<ClosedOrbit> = cat
                    .orbits
                    .iter()
                    .map(|fam| ClosedOrbit {
                        label: fam.label.clone(),
                        action: fam.action[idx],
                        period: fam.period[idx],
                        morse_index: fam.mu,
                        amplitude: fam.amplitude[idx],
                        q_weight: fam.q_weight.as_ref().map(|q| q[idx]),
                    })
                    .collect();
                orbits.sort_by(|a, b| a.period.total_cmp(&b.period));
                Ok(orbits)
            }
        }
    }
}

/// Shared assembly for the plain and kernel-damped oscillation sums: each
/// orbit's term is scaled by `weight(orbit)` before summation.
pub(crate) fn density_sum_weighted(
    catalog: &OrbitCatalog,
    lambda: f64,
    grid: &Grid,
    which: DensityKind,
    max_period: Option<f64>,
    weight: &dyn Fn(&ClosedOrbit) -> f64,
) -> Result<DensityField> {
    grid.validate()?;
    let hbar = catalog.hbar();
    let dim = catalog.dim();
    let mut values = Vec::with_capacity(grid.len());
    for &r in &grid.params() {
        let mut total = 0.0;
        for orbit in catalog.orbits_at(lambda, r)? {
            if let Some(cut) = max_period {
                if orbit.period > cut {
                    continue;
                }
            }
            if !orbit.period.is_finite() {
                return Err(Error::CatalogIncomplete(format!(
                    "orbit {:?} carries a non-finite period",
                    orbit.label
                )));
            }
            let mut term = orbit.amplitude * orbit.phase(hbar, dim).cos() * weight(&orbit);
            match which {
                DensityKind::Rho => {}
                DensityKind::Tau => term *= catalog.kinetic_factor(lambda, r),
                DensityKind::Tau1 => {
                    let q = orbit.q_weight.ok_or_else(|| {
                        Error::CatalogIncomplete(format!(
                            "orbit {:?} lacks the Q weight needed for tau1",
                            orbit.label
                        ))
                    })?;
                    term *= catalog.kinetic_factor(lambda, r) * q;
                }
            }
            total += term;
        }
        values.push(total);
    }
    let name = match which {
        DensityKind::Rho => "drho",
        DensityKind::Tau => "dtau",
        DensityKind::Tau1 => "dtau1",
    };
    Ok(DensityField::new(grid.clone(), name, values)
        .with_meta("lambda", format!("{lambda:.16e}"))
        .with_meta("quantity", name))
}

/// Sum the closed-orbit oscillations over a grid. The density channel sums
/// A cos(Phi); the tau channel multiplies by p^2/2m; the tau1 channel
/// additionally weights each orbit by its Q factor. Orbits with periods
/// above `max_period` (if given) are dropped.
pub fn semiclassical_density_sum(
    catalog: &OrbitCatalog,
    lambda: f64,
    grid: &Grid,
    which: DensityKind,
    max_period: Option<f64>,
) -> Result<DensityField> {
    density_sum_weighted(catalog, lambda, grid, which, max_period, &|_| 1.0)
}

/// Interior region on which local semiclassical identities are scored:
/// potential below a fraction of the Fermi level, and (for hard walls) a
/// minimum distance to the wall measured in Fermi wavelengths.
#[derive(Debug, Clone, Copy)]
pub struct InteriorWindow {
    /// Keep points with V(r) <= potential_fraction * lambda.
    pub potential_fraction: f64,
    /// Keep points at least this far from any hard wall.
    pub wall_margin: f64,
}

impl InteriorWindow {
    /// Default window: V <= 0.6 lambda, and 1.5 Fermi wavelengths of wall
    /// clearance for hard-wall models (zero clearance where there are no
    /// walls to collide with).
    pub fn standard(model: &PotentialModel, lambda: f64) -> Self {
        let margin = match model {
            PotentialModel::Box1d { .. } | PotentialModel::Billiard { .. } => {
                let p = (2.0 * model.mass() * lambda).sqrt();
                1.5 * 2.0 * std::f64::consts::PI * model.hbar() / p
            }
            _ => 0.0,
        };
        InteriorWindow {
            potential_fraction: 0.6,
            wall_margin: margin,
        }
    }

    fn wall_distance(model: &PotentialModel, point: &[f64]) -> f64 {
        match model {
            PotentialModel::Box1d { length, .. } => point[0].min(length - point[0]),
            PotentialModel::Billiard { radius, .. } => {
                let r = point.iter().map(|x| x * x).sum::<f64>().sqrt();
                radius - r
            }
            _ => f64::INFINITY,
        }
    }

    pub fn contains(&self, model: &PotentialModel, lambda: f64, point: &[f64]) -> bool {
        let v = model.evaluate_potential(point);
        v.is_finite()
            && v <= self.potential_fraction * lambda
            && Self::wall_distance(model, point) >= self.wall_margin
    }
}

/// Outcome of a local consistency check: the pointwise residual, the
/// reference curve the residual was taken against, and window statistics.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub residual: DensityField,
    /// The modeled curve: [lambda - V] drho for the virial check,
    /// tau_TF[rho_qm] for the functional check.
    pub reference: DensityField,
    pub summary: WindowSummary,
}

/// Residual statistics over an interior window.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WindowSummary {
    /// max |residual| / max |target| over the window.
    pub max_ratio: f64,
    /// rms residual / rms target over the window.
    pub rms_ratio: f64,
    pub points_used: usize,
}

fn window_stats(
    grid: &Grid,
    model: &PotentialModel,
    lambda: f64,
    window: &InteriorWindow,
    residual: &[f64],
    target: &[f64],
) -> WindowSummary {
    let (mut max_res, mut max_tgt) = (0.0f64, 0.0f64);
    let (mut ss_res, mut ss_tgt) = (0.0f64, 0.0f64);
    let mut used = 0usize;
    for (i, &t) in grid.params().iter().enumerate() {
        let point = grid.embed(t);
        if !window.contains(model, lambda, &point) {
            continue;
        }
        used += 1;
        max_res = max_res.max(residual[i].abs());
        max_tgt = max_tgt.max(target[i].abs());
        ss_res += residual[i] * residual[i];
        ss_tgt += target[i] * target[i];
    }
    WindowSummary {
        max_ratio: max_res / max_tgt,
        rms_ratio: (ss_res / ss_tgt).sqrt(),
        points_used: used,
    }
}

fn demand_same_grid(a: &DensityField, b: &DensityField) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::Config(
            "fields must share one evaluation grid".into(),
        ));
    }
    Ok(())
}

/// Local virial check: residual = dtau - [lambda - V] drho, scored against
/// dtau on the interior window.
pub fn lvt_check(
    dtau: &DensityField,
    drho: &DensityField,
    model: &PotentialModel,
    lambda: f64,
    window: &InteriorWindow,
) -> Result<CheckReport> {
    demand_same_grid(dtau, drho)?;
    let reference = drho.map("virial_dtau", |t, v| {
        (lambda - model.evaluate_potential(&drho.grid.embed(t))) * v
    });
    let residual_values: Vec<f64> = dtau
        .values
        .iter()
        .zip(&reference.values)
        .map(|(a, b)| a - b)
        .collect();
    let summary = window_stats(
        &dtau.grid,
        model,
        lambda,
        window,
        &residual_values,
        &dtau.values,
    );
    let residual = DensityField::new(dtau.grid.clone(), "lvt_residual", residual_values)
        .with_meta("lambda", format!("{lambda:.16e}"));
    Ok(CheckReport {
        residual,
        reference,
        summary,
    })
}

/// Kinetic-functional check: residual = tau_qm - tau_TF[rho_qm], scored
/// against tau_qm on the interior window.
pub fn tf_functional_check(
    rho_qm: &DensityField,
    tau_qm: &DensityField,
    model: &PotentialModel,
    lambda: f64,
    window: &InteriorWindow,
) -> Result<CheckReport> {
    demand_same_grid(rho_qm, tau_qm)?;
    let mut reference_values = Vec::with_capacity(rho_qm.values.len());
    for &rho in &rho_qm.values {
        reference_values.push(tau_tf_of_rho(model, rho.max(0.0))?);
    }
    let residual_values: Vec<f64> = tau_qm
        .values
        .iter()
        .zip(&reference_values)
        .map(|(t, f)| t - f)
        .collect();
    let summary = window_stats(
        &tau_qm.grid,
        model,
        lambda,
        window,
        &residual_values,
        &tau_qm.values,
    );
    let reference = DensityField::new(rho_qm.grid.clone(), "tau_tf_of_rho", reference_values)
        .with_meta("lambda", format!("{lambda:.16e}"));
    let residual = DensityField::new(tau_qm.grid.clone(), "tf_residual", residual_values)
        .with_meta("lambda", format!("{lambda:.16e}"));
    Ok(CheckReport {
        residual,
        reference,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_substitutions() {
        let orbit = |s: f64, mu: u32| ClosedOrbit {
            label: "t".into(),
            action: s,
            period: 1.0,
            morse_index: mu,
            amplitude: 1.0,
            q_weight: None,
        };
        let pi = std::f64::consts::PI;
        assert!((orbit(0.0, 0).phase(1.0, 1) + pi / 2.0).abs() < 1e-15);
        let got = orbit(pi, 1).phase(1.0, 2);
        assert!(
            (got + pi / 4.0).abs() < 1e-15,
            "S=pi hbar, mu=1, D=2 gives {got}, want -pi/4"
        );
    }

    #[test]
    fn chord_action_is_length_times_momentum() {
        let disk = PotentialModel::billiard(2, 1.0);
        let lambda = 17.0;
        // 3-4-5 style chord of length 1.
        let path = vec![vec![-0.3, 0.4], vec![0.5, -0.2]];
        let s = action_integral(&disk, lambda, &path).unwrap();
        let want = lambda.sqrt(); // p = sqrt(2 m lambda) = sqrt(lambda) at m = 1/2
        assert!(
            (s - want).abs() < 1e-10 * want,
            "chord action {s} vs {want}"
        );
        // Period from the action slope, against T = l sqrt(m / 2 lambda).
        let h = 1e-5 * lambda;
        let t_fd = (action_integral(&disk, lambda + h, &path).unwrap()
            - action_integral(&disk, lambda - h, &path).unwrap())
            / (2.0 * h);
        let t_want = (0.5 / (2.0 * lambda)).sqrt();
        assert!(
            (t_fd - t_want).abs() < 1e-6 * t_want,
            "chord period {t_fd} vs {t_want}"
        );
    }

    #[test]
    fn action_adds_over_subpaths_and_vanishes_on_points() {
        let model = PotentialModel::harmonic(&[1.0]);
        let e = 3.0;
        let whole = action_integral(&model, e, &[vec![-1.5], vec![1.2]]).unwrap();
        let first = action_integral(&model, e, &[vec![-1.5], vec![0.3]]).unwrap();
        let second = action_integral(&model, e, &[vec![0.3], vec![1.2]]).unwrap();
        assert!(
            (whole - first - second).abs() < 1e-9 * whole.abs(),
            "additivity: {whole} vs {} + {}",
            first,
            second
        );
        assert_eq!(action_integral(&model, e, &[vec![0.4]]).unwrap(), 0.0);
    }

    #[test]
    fn oscillator_round_trip_action() {
        // Full period between the turning points: S = 2 pi E / omega.
        let model = PotentialModel::harmonic(&[1.0]);
        let e = 2.5f64;
        let a = (2.0 * e).sqrt(); // turning point for m = omega = 1
        let s = action_integral(&model, e, &[vec![-a], vec![a], vec![-a]]).unwrap();
        let want = 2.0 * std::f64::consts::PI * e;
        assert!(
            (s - want).abs() < 1e-8 * want,
            "round-trip action {s} vs {want}"
        );
    }

    #[test]
    fn forbidden_paths_are_rejected() {
        let model = PotentialModel::harmonic(&[1.0]);
        let err = action_integral(&model, 0.5, &[vec![0.0], vec![5.0]]).unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "got {err}");
    }

    #[test]
    fn wall_density_equals_minus_tf_density() {
        for dim in [1usize, 2, 3] {
            let model = PotentialModel::billiard(dim, 1.0);
            let lambda = 140.0;
            let got = friedel_plus_density(&model, lambda, 1.0).unwrap();
            let want = -rho_tf(&model, lambda, &[0.5]);
            assert!(
                (got - want).abs() < 1e-12 * want.abs(),
                "dim {dim}: wall value {got} vs -rho_TF {want}"
            );
        }
    }

    #[test]
    fn one_dimensional_friedel_is_a_sinc() {
        let model = PotentialModel::billiard(1, 1.0);
        let lambda = 90.0f64;
        let p = lambda.sqrt();
        let rho0 = rho_tf(&model, lambda, &[0.0]);
        for r in [0.2, 0.55, 0.9] {
            let z = 2.0 * (1.0 - r) * p;
            let want = -rho0 * z.sin() / z;
            let got = friedel_plus_density(&model, lambda, r).unwrap();
            assert!(
                (got - want).abs() < 1e-12 * rho0,
                "r = {r}: {got} vs sinc form {want}"
            );
        }
        assert!(friedel_plus_density(&model, lambda, 0.0).is_err());
        assert!(friedel_plus_density(&model, lambda, 1.2).is_err());
        assert!(
            friedel_plus_density(&model, lambda, 0.02).is_err(),
            "r below the 0.05 R floor must be refused"
        );
    }

    #[test]
    fn envelope_touches_oscillation_extrema() {
        // At the extrema of cos(z - nu pi/2 - pi/4) the exact oscillation
        // must sit on its asymptotic envelope; a wrong phase convention
        // would leave it well below. Allow 3%.
        for dim in [2usize, 3] {
            let model = PotentialModel::billiard(dim, 1.0);
            let lambda = 400.0f64;
            let p = lambda.sqrt();
            let nu = dim as f64 / 2.0;
            let alpha = nu * std::f64::consts::FRAC_PI_2 + std::f64::consts::FRAC_PI_4;
            let mut k = 0;
            loop {
                let z = alpha + k as f64 * std::f64::consts::PI;
                k += 1;
                if z < 5.0 {
                    continue;
                }
                if z > 30.0 {
                    break;
                }
                let r = 1.0 - z / (2.0 * p);
                let got = friedel_plus_density(&model, lambda, r).unwrap().abs();
                let env = plus_envelope(&model, lambda, r).unwrap();
                assert!(
                    (got / env - 1.0).abs() < 0.03,
                    "dim {dim}, z = {z:.2}: |friedel| = {got}, envelope = {env}"
                );
            }
        }
    }

    #[test]
    fn segment_deficit_is_exactly_minus_one() {
        let model = PotentialModel::billiard(1, 1.0);
        for lambda in [50.0, 120.0, 300.0] {
            let d = integrate_friedel_deficit(&model, lambda).unwrap();
            assert!(
                (d + 1.0).abs() < 1e-8,
                "segment deficit at lambda = {lambda} is {d}"
            );
        }
    }

    #[test]
    fn deficit_reproduces_surface_term() {
        // hbar = 1, m = 1/2, R = 1: pR = sqrt(lambda).
        let disk = PotentialModel::billiard(2, 1.0);
        let lambda = 1600.0; // pR = 40
        let d = integrate_friedel_deficit(&disk, lambda).unwrap();
        let want = -40.0;
        assert!(
            (d / want - 1.0).abs() < 0.01,
            "disk deficit {d} vs surface term {want}"
        );
        let ball = PotentialModel::billiard(3, 1.0);
        let lambda = 8100.0; // pR = 90
        let d = integrate_friedel_deficit(&ball, lambda).unwrap();
        let want = -90.0 * 90.0 / 2.0;
        assert!(
            (d / want - 1.0).abs() < 0.01,
            "ball deficit {d} vs surface term {want}"
        );
    }

    #[test]
    fn deficit_scales_linearly_with_momentum_in_2d() {
        let disk = PotentialModel::billiard(2, 1.0);
        let d1 = integrate_friedel_deficit(&disk, 900.0).unwrap(); // pR = 30
        let d2 = integrate_friedel_deficit(&disk, 3600.0).unwrap(); // pR = 60
        assert!(
            (d2 / d1 - 2.0).abs() < 0.04,
            "doubling the momentum should double the deficit: {d1} -> {d2}"
        );
    }

    #[test]
    fn plus_orbit_matches_regularized_density_in_the_asymptotic_regime() {
        // Pointwise agreement is measured against the TF background: an
        // oscillation passes through zero, so "within 5%" can only mean
        // 5% of the density scale it rides on.
        for dim in [2usize, 3] {
            let model = PotentialModel::billiard(dim, 1.0);
            let lambda = 230.0f64;
            let p = lambda.sqrt();
            let catalog = OrbitCatalog::billiard_plus(&model).unwrap();
            // Radii with z between 3 and 20.
            let r_hi = 1.0 - 3.0 / (2.0 * p);
            let r_lo = 1.0 - 20.0 / (2.0 * p);
            let grid = Grid::radial(r_lo, r_hi, 121);
            let sc = semiclassical_density_sum(&catalog, lambda, &grid, DensityKind::Rho, None)
                .unwrap();
            let mut worst = 0.0f64;
            for (i, &r) in grid.params().iter().enumerate() {
                let exact = friedel_plus_density(&model, lambda, r).unwrap();
                let scale = rho_tf(&model, lambda, &[r]);
                worst = worst.max((sc.values[i] - exact).abs() / scale);
            }
            assert!(
                worst < 0.05,
                "dim {dim}: wall-orbit cosine sum deviates {worst:.4} of rho_TF \
                 from the regularized form"
            );
        }
    }

    #[test]
    fn tau_channel_is_kinetic_factor_times_density_channel() {
        let disk = PotentialModel::billiard(2, 1.0);
        let lambda = 230.0;
        let catalog = OrbitCatalog::billiard_plus(&disk).unwrap();
        let grid = Grid::radial(0.3, 0.9, 31);
        let drho =
            semiclassical_density_sum(&catalog, lambda, &grid, DensityKind::Rho, None).unwrap();
        let dtau =
            semiclassical_density_sum(&catalog, lambda, &grid, DensityKind::Tau, None).unwrap();
        for i in 0..grid.len() {
            assert!(
                (dtau.values[i] - lambda * drho.values[i]).abs()
                    <= 1e-12 * dtau.values[i].abs().max(1e-300),
                "tau channel must be lambda times rho channel inside a billiard"
            );
        }
    }

    #[test]
    fn period_is_action_slope_for_the_wall_orbit() {
        let ball = PotentialModel::billiard(3, 1.0);
        let catalog = OrbitCatalog::billiard_plus(&ball).unwrap();
        let (lambda, r) = (250.0, 0.6);
        let h = 1e-4 * lambda;
        let s = |l: f64| catalog.orbits_at(l, r).unwrap()[0].action;
        let t_fd = (s(lambda + h) - s(lambda - h)) / (2.0 * h);
        let t = catalog.orbits_at(lambda, r).unwrap()[0].period;
        assert!(
            (t_fd - t).abs() < 1e-6 * t,
            "wall orbit period {t} vs action slope {t_fd}"
        );
    }

    fn synthetic_catalog(q: bool) -> String {
        let points = [0.2, 0.4, 0.6];
        let fam = |mu: u32, c: f64| SampledFamily {
            label: format!("test{mu}"),
            mu,
            action: points.iter().map(|&r| 10.0 + c * r).collect(),
            period: points.iter().map(|_| c).collect(),
            amplitude: points.iter().map(|&r| 1.0 + r).collect(),
            q_weight: q.then(|| points.iter().map(|_| 0.5).collect()),
        };
        serde_json::to_string(&SampledCatalog {
            lambda: 25.0,
            dim: 1,
            hbar: 1.0,
            model: None,
            points: points.to_vec(),
            orbits: vec![fam(2, 3.0), fam(4, 1.0)],
        })
        .unwrap()
    }

    #[test]
    fn sampled_catalog_round_trip_and_ordering() {
        let catalog = OrbitCatalog::from_json_str(&synthetic_catalog(true)).unwrap();
        let orbits = catalog.orbits_at(25.0, 0.4).unwrap();
        assert_eq!(orbits.len(), 2);
        assert!(
            orbits[0].period <= orbits[1].period,
            "orbits must be ordered by period"
        );
        assert_eq!(orbits[1].label, "test2");
        assert!((orbits[1].action - 11.2).abs() < 1e-14);
        // Off-grid and off-level requests are refused.
        assert!(catalog.orbits_at(25.0, 0.5).is_err());
        assert!(catalog.orbits_at(26.0, 0.4).is_err());
    }

    #[test]
    fn tau1_requires_q_weights() {
        let grid = Grid::radial(0.2, 0.6, 3);
        let with_q = OrbitCatalog::from_json_str(&synthetic_catalog(true)).unwrap();
        let sum = semiclassical_density_sum(&with_q, 25.0, &grid, DensityKind::Tau1, None);
        assert!(sum.is_ok(), "Q present: {sum:?}");
        let without_q = OrbitCatalog::from_json_str(&synthetic_catalog(false)).unwrap();
        let err =
            semiclassical_density_sum(&without_q, 25.0, &grid, DensityKind::Tau1, None)
                .unwrap_err();
        assert!(matches!(err, Error::CatalogIncomplete(_)), "got {err}");
        // The density channel never needs Q.
        semiclassical_density_sum(&without_q, 25.0, &grid, DensityKind::Rho, None).unwrap();
    }

    #[test]
    fn period_cutoff_drops_long_orbits() {
        let catalog = OrbitCatalog::from_json_str(&synthetic_catalog(true)).unwrap();
        let grid = Grid::radial(0.2, 0.6, 3);
        let all = semiclassical_density_sum(&catalog, 25.0, &grid, DensityKind::Rho, None)
            .unwrap();
        let short = semiclassical_density_sum(&catalog, 25.0, &grid, DensityKind::Rho, Some(2.0))
            .unwrap();
        assert!(
            (all.values[0] - short.values[0]).abs() > 1e-12,
            "cutoff at T = 2 must remove the T = 3 family"
        );
    }

    #[test]
    fn virial_residual_vanishes_on_constructed_fields() {
        // Fields built to satisfy dtau = [lambda - V] drho exactly.
        let model = PotentialModel::harmonic(&[1.0]);
        let lambda = 9.0;
        let grid = Grid::line(-2.0, 2.0, 41);
        let drho_vals: Vec<f64> = grid.params().iter().map(|&x| (3.0 * x).cos()).collect();
        let drho = DensityField::new(grid.clone(), "drho", drho_vals.clone());
        let dtau_vals: Vec<f64> = grid
            .params()
            .iter()
            .zip(&drho_vals)
            .map(|(&x, &v)| (lambda - model.evaluate_potential(&[x])) * v)
            .collect();
        let dtau = DensityField::new(grid.clone(), "dtau", dtau_vals);
        let window = InteriorWindow::standard(&model, lambda);
        let report = lvt_check(&dtau, &drho, &model, lambda, &window).unwrap();
        assert!(
            report.summary.max_ratio < 1e-14,
            "constructed fields should have zero virial residual, got {}",
            report.summary.max_ratio
        );
        assert!(report.summary.points_used > 30);
        // Mismatched grids are refused.
        let other = DensityField::new(Grid::line(-2.0, 2.0, 40), "drho", vec![0.0; 40]);
        assert!(lvt_check(&dtau, &other, &model, lambda, &window).is_err());
    }

    #[test]
    fn functional_residual_vanishes_on_tf_inputs() {
        let model = PotentialModel::billiard(2, 1.0);
        let lambda = 230.0;
        let grid = Grid::radial(0.05, 0.95, 31);
        let rho_vals: Vec<f64> = grid
            .params()
            .iter()
            .map(|&r| rho_tf(&model, lambda, &[r]))
            .collect();
        let tau_vals: Vec<f64> = grid
            .params()
            .iter()
            .map(|&r| crate::smooth_tf::tau_tf(&model, lambda, &[r]))
            .collect();
        let rho = DensityField::new(grid.clone(), "rho", rho_vals);
        let tau = DensityField::new(grid.clone(), "tau", tau_vals);
        let window = InteriorWindow {
            potential_fraction: 0.6,
            wall_margin: 0.0,
        };
        let report = tf_functional_check(&rho, &tau, &model, lambda, &window).unwrap();
        assert!(
            report.summary.max_ratio < 1e-12,
            "TF inputs must be a fixed point of the functional check, got {}",
            report.summary.max_ratio
        );
    }

    #[test]
    fn interior_window_excludes_walls_and_turning_points() {
        let disk = PotentialModel::billiard(2, 1.0);
        let lambda = 230.0;
        let w = InteriorWindow::standard(&disk, lambda);
        assert!(w.contains(&disk, lambda, &[0.2]));
        assert!(
            !w.contains(&disk, lambda, &[0.99]),
            "points hugging the wall must be excluded"
        );
        let trap = PotentialModel::harmonic(&[1.0]);
        let wt = InteriorWindow::standard(&trap, 9.0);
        assert!(wt.contains(&trap, 9.0, &[1.0]));
        // V(x) = x^2/2 = 0.6 lambda at x = sqrt(1.2 lambda).
        assert!(!wt.contains(&trap, 9.0, &[3.5]));
    }
}
