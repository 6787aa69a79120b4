//! Finite-temperature and pairing correlations: energy-smearing kernels
//! with closed-form Fourier transforms, convolved level densities, folded
//! free/BCS energies validated against their direct orbital sums, and the
//! damped trace formulas that describe all of these semiclassically.
//!
//! Convention: level densities here are spinless (N = 2 integral of g);
//! energies (free energy, BCS energy) carry the spin factor 2 explicitly,
//! matching the direct assemblies in [`crate::qm_densities`].

use serde::{Deserialize, Serialize};

use crate::closed_orbits::{density_sum_weighted, OrbitCatalog};
use crate::error::{Error, Result};
use crate::grid::{DensityField, Grid};
use crate::qm_densities::{DensityKind, OccupationScheme};
use crate::specfun::{
    bessel_k0, bessel_k1, integrate_from_neg_inf, integrate_split, QuadratureSpec,
};
use crate::spectra::{smooth_level_density, EnergySpectrum};

/// Symmetric, normalized energy-smearing kernel. The thermal kernel is the
/// derivative of the Fermi function; the pairing kernel is the derivative
/// of the BCS occupation v^2 with respect to the level energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FoldingKernel {
    Thermal { temperature: f64 },
    Pairing { gap: f64 },
}

impl FoldingKernel {
    pub fn thermal(temperature: f64) -> Result<Self> {
        if !(temperature > 0.0) {
            return Err(Error::Domain(format!(
                "thermal kernel needs T > 0, got {temperature}"
            )));
        }
        Ok(FoldingKernel::Thermal { temperature })
    }

    pub fn pairing(gap: f64) -> Result<Self> {
        if !(gap > 0.0) {
            return Err(Error::Domain(format!(
                "pairing kernel needs gap > 0, got {gap}"
            )));
        }
        Ok(FoldingKernel::Pairing { gap })
    }

    /// Kernel weight at energy offset `e` (units 1/energy). Even in `e`,
    /// positive, and normalized to unit integral.
    pub fn evaluate(&self, e: f64) -> f64 {
        match *self {
            FoldingKernel::Thermal { temperature } => {
                let c = (e / (2.0 * temperature)).cosh();
                if c.is_finite() {
                    1.0 / (4.0 * temperature * c * c)
                } else {
                    0.0
                }
            }
            FoldingKernel::Pairing { gap } => {
                let quasi = (e * e + gap * gap).sqrt();
                gap * gap / (2.0 * quasi.powi(3))
            }
        }
    }

    /// Closed-form Fourier transform at conjugate variable `tau` (an orbit
    /// period over hbar): pi T tau / sinh(pi T tau) for the thermal kernel,
    /// gap tau K_1(gap tau) for the pairing kernel. Equals 1 at tau = 0.
    pub fn fourier(&self, tau: f64) -> f64 {
        let tau = tau.abs();
        match *self {
            FoldingKernel::Thermal { temperature } => {
                let x = std::f64::consts::PI * temperature * tau;
                if x == 0.0 {
                    1.0
                } else {
                    let s = x.sinh();
                    if s.is_finite() {
                        x / s
                    } else {
                        0.0
                    }
                }
            }
            FoldingKernel::Pairing { gap } => {
                let z = gap * tau;
                if z == 0.0 {
                    1.0
                } else if z > 600.0 {
                    0.0
                } else {
                    z * bessel_k1(z).expect("z > 0 is in domain")
                }
            }
        }
    }

    /// Kernel mass beyond `+x` (one tail; `x >= 0`). Closed forms:
    /// 1/(1 + e^{x/T}) and (1 - x/sqrt(x^2 + gap^2))/2.
    pub fn tail_mass(&self, x: f64) -> f64 {
        match *self {
            FoldingKernel::Thermal { temperature } => {
                let u = x / temperature;
                if u > 700.0 {
                    0.0
                } else {
                    1.0 / (1.0 + u.exp())
                }
            }
            FoldingKernel::Pairing { gap } => {
                0.5 * (1.0 - x / (x * x + gap * gap).sqrt())
            }
        }
    }

    /// Width parameter (T or gap) setting the kernel's energy scale.
    pub fn scale(&self) -> f64 {
        match *self {
            FoldingKernel::Thermal { temperature } => temperature,
            FoldingKernel::Pairing { gap } => gap,
        }
    }

    /// Compact label used in CSV metadata, e.g. `thermal:T=5`.
    pub fn label(&self) -> String {
        match *self {
            FoldingKernel::Thermal { temperature } => format!("thermal:T={temperature}"),
            FoldingKernel::Pairing { gap } => format!("pairing:gap={gap}"),
        }
    }
}

/// Numerical Fourier transform of the kernel: 2 int_0^inf evaluate(E)
/// cos(tau E) dE. This exists to validate the closed forms in
/// [`FoldingKernel::fourier`]; production paths never call it.
///
/// The truncation tail is bounded by 2 tail_mass(X): below 6e-8 for the
/// pairing kernel at X = 3000 gap, and ~1e-20 for the thermal kernel at
/// X = 45 T, both inside the 1e-6 validation budget.
pub fn numeric_fourier(kernel: &FoldingKernel, tau: f64) -> Result<f64> {
    let tau = tau.abs();
    let x_max = match kernel {
        FoldingKernel::Thermal { temperature } => 45.0 * temperature,
        FoldingKernel::Pairing { gap } => 3000.0 * gap,
    };
    let mut breaks = vec![0.0];
    if tau > 0.0 {
        // Split at the cosine's sign changes.
        let half_period = std::f64::consts::PI / tau;
        let mut z = half_period;
        while z < x_max {
            breaks.push(z);
            z += half_period;
        }
    }
    breaks.push(x_max);
    let r = integrate_split(
        &mut |e: f64| kernel.evaluate(e) * (tau * e).cos(),
        &breaks,
        QuadratureSpec::with_rel_tol(1e-9),
    )?;
    Ok(2.0 * r.value)
}

fn certify_convolution_tail(
    spectrum: &EnergySpectrum,
    kernel: &FoldingKernel,
    e: f64,
) -> Result<()> {
    if spectrum.is_synthetic() {
        return Ok(());
    }
    let e_top = spectrum.max_energy();
    let gap = e_top - e;
    // Missing levels above the solved spectrum contribute at most roughly
    // g_smooth(E_top) x kernel mass beyond the gap; factor 4 headroom for
    // level-density growth and staircase fluctuations.
    let bound = if gap <= 0.0 {
        f64::INFINITY
    } else {
        4.0 * smooth_level_density(&spectrum.model, e_top) * kernel.tail_mass(gap)
    };
    let scale = smooth_level_density(&spectrum.model, e).max(1.0);
    if bound > 1e-12 * scale {
        return Err(Error::SpectrumTooShort(format!(
            "levels above E = {e_top:.6} could contribute up to {bound:.3e} \
             to the folded density at E = {e:.6}; solve more levels"
        )));
    }
    Ok(())
}

/// Kernel-smeared level density g(E) = sum_n deg_n kernel(E - E_n),
/// spinless. Fails when the solved spectrum ends too close to `e` for the
/// kernel tail to be negligible (synthetic level lists are taken as
/// complete and never fail this way).
pub fn convolved_level_density(
    spectrum: &EnergySpectrum,
    kernel: &FoldingKernel,
    e: f64,
) -> Result<f64> {
    certify_convolution_tail(spectrum, kernel, e)?;
    Ok(spectrum
        .levels
        .iter()
        .map(|l| l.degeneracy as f64 * kernel.evaluate(e - l.energy))
        .sum())
}

/// Strictly increasing breakpoint list for quadrature over [a, b] with
/// panel seams at the level energies (kernel peaks).
fn level_breaks(spectrum: &EnergySpectrum, a: f64, b: f64) -> Vec<f64> {
    let mut breaks = vec![a];
    for l in &spectrum.levels {
        if l.energy > a + 1e-12 * (1.0 + a.abs()) && l.energy < b - 1e-12 * (1.0 + b.abs()) {
            if l.energy > *breaks.last().unwrap() {
                breaks.push(l.energy);
            }
        }
    }
    breaks.push(b);
    breaks
}

/// Free energy as the energy-weighted folded level density,
/// F = 2 int_{-inf}^{lambda} E g_T(E) dE. Agrees with the direct orbital
/// assembly 2 sum E nu - T S; the match is enforced in tests rather than
/// assumed.
pub fn free_energy_via_folding(
    spectrum: &EnergySpectrum,
    temperature: f64,
    lambda: f64,
) -> Result<f64> {
    let kernel = FoldingKernel::thermal(temperature)?;
    certify_convolution_tail(spectrum, &kernel, lambda)?;
    if spectrum.is_empty() {
        return Err(Error::SpectrumTooShort("empty spectrum".into()));
    }
    let mut g_e = |e: f64| -> f64 {
        e * spectrum
            .levels
            .iter()
            .map(|l| l.degeneracy as f64 * kernel.evaluate(e - l.energy))
            .sum::<f64>()
    };
    // Below this point every kernel tail is < e^{-50}.
    let a = (spectrum.levels[0].energy - 50.0 * temperature).min(lambda - 50.0 * temperature);
    let spec = QuadratureSpec::with_rel_tol(1e-10);
    let far = integrate_from_neg_inf(&mut g_e, a, spec)?.value;
    let near = integrate_split(&mut g_e, &level_breaks(spectrum, a, lambda), spec)?.value;
    Ok(2.0 * (far + near))
}

/// BCS total energy as the per-level folded integral
/// 2 sum_n deg_n int_{-inf}^{lambda} E f_gap(E - E_n) dE over the pairing
/// window, plus 2 deg E_n for every level below the window. Shares the
/// window convention of [`OccupationScheme::Bcs`], which is the matched
/// truncation that makes the comparison with the direct sum meaningful
/// (the pair sum alone diverges logarithmically on an infinite spectrum).
pub fn bcs_energy_via_folding(
    spectrum: &EnergySpectrum,
    scheme: &OccupationScheme,
    lambda: f64,
) -> Result<f64> {
    let gap = match *scheme {
        OccupationScheme::Bcs { gap, .. } => gap,
        _ => {
            return Err(Error::Domain(
                "bcs_energy_via_folding needs a BCS occupation scheme".into(),
            ))
        }
    };
    let window = scheme.window_width();
    if !spectrum.is_synthetic() && lambda + window > spectrum.max_energy() {
        return Err(Error::SpectrumTooShort(format!(
            "pairing window reaches E = {:.6} but the spectrum ends at {:.6}",
            lambda + window,
            spectrum.max_energy()
        )));
    }
    let kernel = FoldingKernel::pairing(gap)?;
    let spec = QuadratureSpec::with_rel_tol(1e-11);
    let mut total = 0.0;
    for l in &spectrum.levels {
        let weight = 2.0 * l.degeneracy as f64;
        if l.energy < lambda - window {
            total += weight * l.energy;
            continue;
        }
        if l.energy > lambda + window {
            continue;
        }
        // int_{-inf}^{lambda} E f(E - E_n) dE, as u = E - E_n from -inf to x.
        let x = lambda - l.energy;
        let e_n = l.energy;
        let mut g_u = |u: f64| (e_n + u) * kernel.evaluate(u);
        let a = x - 30.0 * gap;
        let far = integrate_from_neg_inf(&mut g_u, a, spec)?.value;
        let mut breaks = vec![a];
        if a < 0.0 && x > 0.0 {
            breaks.push(0.0); // kernel peak
        }
        breaks.push(x);
        let near = integrate_split(&mut g_u, &breaks, spec)?.value;
        total += weight * (far + near);
    }
    Ok(total)
}

/// Entropy from the canonical relation S = -dF/dT at fixed particle
/// number, by central differences of the folded free energy with the
/// Fermi level re-fitted at each temperature.
pub fn entropy_via_folding(
    spectrum: &EnergySpectrum,
    temperature: f64,
    n_particles: usize,
) -> Result<f64> {
    let h = 1e-3 * temperature;
    let f_at = |t: f64| -> Result<f64> {
        let scheme = OccupationScheme::thermal(t);
        let lambda = crate::qm_densities::fix_fermi_level(spectrum, &scheme, n_particles)?;
        free_energy_via_folding(spectrum, t, lambda)
    };
    Ok((f_at(temperature - h)? - f_at(temperature + h)?) / (2.0 * h))
}

/// One periodic orbit evaluated at a fixed energy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub label: String,
    /// Action S(E) around the orbit.
    #[serde(rename = "S")]
    pub action: f64,
    /// Period T(E) = dS/dE.
    #[serde(rename = "T")]
    pub period: f64,
    /// Maslov index entering the phase as -(pi/2) sigma.
    pub sigma: u32,
    /// Trace-formula amplitude (1/energy units); optional because file
    /// catalogs may tabulate geometry without amplitudes.
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
}

impl PeriodicOrbit {
    /// Oscillation phase S/hbar - (pi/2) sigma.
    pub fn phase(&self, hbar: f64) -> f64 {
        self.action / hbar - std::f64::consts::FRAC_PI_2 * self.sigma as f64
    }
}

fn default_k_max() -> usize {
    10
}

fn default_unit() -> f64 {
    1.0
}

/// Source of periodic orbits for the trace formulas: closed-form families
/// for the integrable 1D models, or explicit records from file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PoCatalog {
    /// Repetitions k = 1..k_max of the single primitive orbit of a 1D
    /// harmonic trap: T_k = 2 pi k / omega, S_k = 2 pi k E / omega,
    /// sigma_k = 2k, A_k = 2 / (hbar omega).
    Harmonic1d {
        omega: f64,
        #[serde(default = "default_unit")]
        hbar: f64,
        #[serde(default = "default_k_max")]
        k_max: usize,
    },
    /// Repetitions of the bouncing orbit of a 1D box of length L:
    /// S_k = 2 k L p, T_k = 2 k L m / p, sigma_k = 4k,
    /// A_k = 2 L m / (pi hbar p).
    Box1d {
        length: f64,
        #[serde(default = "default_unit")]
        hbar: f64,
        #[serde(default = "default_unit")]
        mass: f64,
        #[serde(default = "default_k_max")]
        k_max: usize,
    },
    /// Orbits given directly, valid at one energy (checked when declared).
    Explicit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        energy: Option<f64>,
        orbits: Vec<PeriodicOrbit>,
    },
}

impl PoCatalog {
    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// All orbits at the given energy, ordered by period (most significant
    /// first under any decaying modulation).
    pub fn orbits_at(&self, energy: f64) -> Result<Vec<PeriodicOrbit>> {
        let mut orbits = match *self {
            PoCatalog::Harmonic1d { omega, hbar, k_max } => (1..=k_max)
                .map(|k| PeriodicOrbit {
                    label: format!("k={k}"),
                    action: 2.0 * std::f64::consts::PI * k as f64 * energy / omega,
                    period: 2.0 * std::f64::consts::PI * k as f64 / omega,
                    sigma: 2 * k as u32,
                    amplitude: Some(2.0 / (hbar * omega)),
                })
                .collect::<Vec<_>>(),
            PoCatalog::Box1d {
                length,
                hbar,
                mass,
                k_max,
            } => {
                if energy <= 0.0 {
                    return Err(Error::Domain(format!(
                        "box orbits need E > 0, got {energy}"
                    )));
                }
                let p = (2.0 * mass * energy).sqrt();
                (1..=k_max)
                    .map(|k| PeriodicOrbit {
                        label: format!("k={k}"),
                        action: 2.0 * k as f64 * length * p,
                        period: 2.0 * k as f64 * length * mass / p,
                        sigma: 4 * k as u32,
                        amplitude: Some(2.0 * length * mass / (std::f64::consts::PI * hbar * p)),
                    })
                    .collect()
            }
            PoCatalog::Explicit {
                energy: declared,
                ref orbits,
            } => {
                if let Some(e0) = declared {
                    if (energy - e0).abs() > 1e-9 * e0.abs().max(1.0) {
                        return Err(Error::Domain(format!(
                            "catalog declared at E = {e0}, requested {energy}"
                        )));
                    }
                }
                orbits.clone()
            }
        };
        orbits.sort_by(|a, b| a.period.total_cmp(&b.period));
        Ok(orbits)
    }
}

/// Which modulated oscillating quantity to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceTarget {
    /// delta g = sum A f(T/hbar) cos Phi (spinless level density).
    LevelDensity,
    /// delta F = sum (hbar/T)^2 A f_T(T/hbar) cos Phi; thermal kernel.
    FreeEnergy,
    /// delta E_BCS = sum (hbar/T)^2 A f_gap(T/hbar) cos Phi; pairing kernel.
    BcsEnergy,
    /// delta E_pair = -gap^2 sum A K_0(gap T/hbar) cos Phi; pairing kernel.
    /// The sign follows from delta E_pair = gap d(delta E_BCS)/d gap, since
    /// d/dz [z K_1(z)] = -z K_0(z).
    PairEnergy,
}

/// Kernel-damped trace-formula sum over periodic orbits. Orbits are summed
/// from shortest period up (descending significance) with compensated
/// summation.
pub fn modulated_trace_formula(
    orbits: &[PeriodicOrbit],
    kernel: &FoldingKernel,
    hbar: f64,
    target: TraceTarget,
) -> Result<f64> {
    match (target, kernel) {
        (TraceTarget::FreeEnergy, FoldingKernel::Pairing { .. }) => {
            return Err(Error::Domain(
                "free-energy modulation takes the thermal kernel".into(),
            ))
        }
        (TraceTarget::BcsEnergy | TraceTarget::PairEnergy, FoldingKernel::Thermal { .. }) => {
            return Err(Error::Domain(
                "BCS/pair-energy modulation takes the pairing kernel".into(),
            ))
        }
        _ => {}
    }
    let mut ordered: Vec<&PeriodicOrbit> = orbits.iter().collect();
    ordered.sort_by(|a, b| a.period.total_cmp(&b.period));
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for orbit in ordered {
        let a = orbit.amplitude.ok_or_else(|| {
            Error::CatalogIncomplete(format!("orbit {:?} lacks an amplitude", orbit.label))
        })?;
        if !(orbit.period > 0.0) {
            return Err(Error::Domain(format!(
                "orbit {:?} has non-positive period {}",
                orbit.label, orbit.period
            )));
        }
        let tau = orbit.period / hbar;
        let cos_phi = orbit.phase(hbar).cos();
        let term = match target {
            TraceTarget::LevelDensity => a * kernel.fourier(tau) * cos_phi,
            TraceTarget::FreeEnergy | TraceTarget::BcsEnergy => {
                (hbar / orbit.period).powi(2) * a * kernel.fourier(tau) * cos_phi
            }
            TraceTarget::PairEnergy => {
                let gap = kernel.scale();
                let z = gap * tau;
                let k0 = if z > 600.0 {
                    0.0
                } else {
                    bessel_k0(z).expect("z > 0 is in domain")
                };
                -gap * gap * a * k0 * cos_phi
            }
        };
        // Kahan compensation keeps long alternating catalogs stable.
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(sum)
}

/// Kernel-damped closed-orbit density oscillation: the sum of
/// [`crate::closed_orbits::semiclassical_density_sum`] with each orbit's
/// term multiplied by fourier(T_orbit/hbar). Short orbits near a wall keep
/// their weight (fourier(0) = 1), so surface oscillations survive heating
/// that erases the long-orbit interior ones.
pub fn modulated_density(
    catalog: &OrbitCatalog,
    kernel: &FoldingKernel,
    lambda: f64,
    grid: &Grid,
    which: DensityKind,
) -> Result<DensityField> {
    let hbar = catalog.hbar();
    let field = density_sum_weighted(catalog, lambda, grid, which, None, &|orbit| {
        kernel.fourier(orbit.period / hbar)
    })?;
    Ok(field.with_meta("kernel", kernel.label()))
}
