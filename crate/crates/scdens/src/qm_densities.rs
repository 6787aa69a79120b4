//! Occupation schemes and the quantum spatial densities built on them.
//!
//! Everything here is spin-degenerate: each orbital holds two particles, so
//! particle numbers, densities and energies all carry an explicit factor 2
//! on top of the level degeneracies. Three occupation schemes are supported:
//! a sharp Fermi filling, grand-canonical thermal occupations, and BCS
//! quasiparticle occupations with a constant gap acting inside an energy
//! window around the Fermi level.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DensityField, Grid};
use crate::specfun::{integrate_to_inf, QuadratureSpec};
use crate::spectra::EnergySpectrum;

/// How orbitals are filled for a given Fermi level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OccupationScheme {
    /// Sharp filling of all orbitals below the Fermi level.
    ZeroT,
    /// Fermi-Dirac occupations at temperature `temperature` (energy units).
    Thermal { temperature: f64 },
    /// BCS occupations v^2 with constant gap. Pairing acts on orbitals
    /// within `window` of the Fermi level; orbitals below the window stay
    /// fully occupied, those above stay empty. `window = 0` selects the
    /// default half-width of 20 gaps.
    Bcs {
        gap: f64,
        #[serde(default)]
        window: f64,
    },
}

impl OccupationScheme {
    pub fn zero_t() -> Self {
        OccupationScheme::ZeroT
    }

    pub fn thermal(temperature: f64) -> Self {
        assert!(
            temperature > 0.0,
            "temperature must be positive, got {temperature}"
        );
        OccupationScheme::Thermal { temperature }
    }

    /// BCS scheme with the default pairing window of 20 gaps.
    pub fn bcs(gap: f64) -> Self {
        assert!(gap > 0.0, "pairing gap must be positive, got {gap}");
        OccupationScheme::Bcs { gap, window: 0.0 }
    }

    pub fn bcs_with_window(gap: f64, window: f64) -> Self {
        assert!(gap > 0.0, "pairing gap must be positive, got {gap}");
        assert!(window > 0.0, "pairing window must be positive, got {window}");
        OccupationScheme::Bcs { gap, window }
    }

    /// Half-width of the pairing window (zero for non-BCS schemes).
    pub fn window_width(&self) -> f64 {
        match *self {
            OccupationScheme::Bcs { gap, window } => {
                if window > 0.0 {
                    window
                } else {
                    20.0 * gap
                }
            }
            _ => 0.0,
        }
    }

    /// Occupation probability of one orbital at energy `e`.
    pub fn occupation(&self, e: f64, lambda: f64) -> f64 {
        match *self {
            OccupationScheme::ZeroT => {
                if e <= lambda {
                    1.0
                } else {
                    0.0
                }
            }
            OccupationScheme::Thermal { temperature } => {
                1.0 / (1.0 + ((e - lambda) / temperature).exp())
            }
            OccupationScheme::Bcs { gap, .. } => {
                let w = self.window_width();
                if e < lambda - w {
                    1.0
                } else if e > lambda + w {
                    0.0
                } else {
                    let eq = ((lambda - e).powi(2) + gap * gap).sqrt();
                    0.5 * (1.0 + (lambda - e) / eq)
                }
            }
        }
    }

    /// Anomalous BCS weight u v of one orbital; zero for other schemes and
    /// outside the pairing window.
    pub fn anomalous(&self, e: f64, lambda: f64) -> f64 {
        match *self {
            OccupationScheme::Bcs { gap, .. } => {
                let w = self.window_width();
                if (e - lambda).abs() > w {
                    0.0
                } else {
                    0.5 * gap / ((lambda - e).powi(2) + gap * gap).sqrt()
                }
            }
            _ => 0.0,
        }
    }

    /// Compact label used in CSV metadata, e.g. `thermal:T=5`.
    pub fn label(&self) -> String {
        match *self {
            OccupationScheme::ZeroT => "zero_t".into(),
            OccupationScheme::Thermal { temperature } => format!("thermal:T={temperature}"),
            OccupationScheme::Bcs { gap, .. } => {
                format!("bcs:gap={gap}:window={}", self.window_width())
            }
        }
    }
}

/// Which local density to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    /// Particle density 2 sum occ |phi|^2.
    Rho,
    /// Kinetic-energy density -(hbar^2/2m) 2 sum occ phi lap(phi).
    Tau,
    /// Positive-definite kinetic-energy density (hbar^2/2m) 2 sum occ |grad phi|^2.
    Tau1,
}

impl DensityKind {
    pub fn column_name(&self) -> &'static str {
        match self {
            DensityKind::Rho => "rho",
            DensityKind::Tau => "tau",
            DensityKind::Tau1 => "tau1",
        }
    }
}

/// Occupation of every level (per orbital, not degeneracy-weighted).
pub fn occupations(spectrum: &EnergySpectrum, scheme: &OccupationScheme, lambda: f64) -> Vec<f64> {
    spectrum
        .levels
        .iter()
        .map(|l| scheme.occupation(l.energy, lambda))
        .collect()
}

/// Spin-degenerate particle number 2 sum_n deg_n occ_n at a given Fermi level.
pub fn particle_count(spectrum: &EnergySpectrum, scheme: &OccupationScheme, lambda: f64) -> f64 {
    spectrum
        .levels
        .iter()
        .map(|l| 2.0 * l.degeneracy as f64 * scheme.occupation(l.energy, lambda))
        .sum()
}

/// Upper bound on the particle number carried by orbitals above the top of
/// the solved spectrum. Uses the smooth level density with a factor-2
/// headroom against staircase fluctuations; exact zero for schemes whose
/// occupations vanish identically up there.
pub fn occupation_tail_bound(
    spectrum: &EnergySpectrum,
    scheme: &OccupationScheme,
    lambda: f64,
) -> Result<f64> {
    let e_top = spectrum.max_energy();
    match *scheme {
        OccupationScheme::ZeroT => {
            if lambda < e_top {
                Ok(0.0)
            } else {
                Ok(f64::INFINITY)
            }
        }
        OccupationScheme::Bcs { .. } => {
            if lambda + scheme.window_width() <= e_top {
                Ok(0.0)
            } else {
                Ok(f64::INFINITY)
            }
        }
        OccupationScheme::Thermal { temperature } => {
            // occ(E) <= exp(-(E - lambda)/T) and the integrand decays fast,
            // so a modest relative tolerance is plenty.
            let model = spectrum.model.clone();
            let r = integrate_to_inf(
                |e: f64| {
                    crate::spectra::smooth_level_density(&model, e)
                        * (-(e - lambda) / temperature).exp()
                },
                e_top,
                QuadratureSpec::with_rel_tol(1e-6),
            )?;
            Ok(4.0 * r.value) // 2 spins x factor-2 headroom
        }
    }
}

fn check_tail(spectrum: &EnergySpectrum, scheme: &OccupationScheme, lambda: f64) -> Result<f64> {
    let tail = occupation_tail_bound(spectrum, scheme, lambda)?;
    if tail > 1e-10 {
        return Err(Error::SpectrumTooShort(format!(
            "occupation tail above E = {:.6} bounded only by {tail:.3e} (> 1e-10); solve more levels",
            spectrum.max_energy()
        )));
    }
    Ok(tail)
}

/// Find the Fermi level that fills `n_particles` (even, spin-degenerate).
///
/// Zero temperature requires the filling to end at a shell boundary;
/// stopping inside a degenerate shell is reported as a `ParticleNumber`
/// error. The smooth schemes solve `N(lambda) = N` by bisection to an
/// absolute tolerance of 1e-10 on the particle number, and certify that the
/// spectrum is long enough for the occupation tail to be negligible.
pub fn fix_fermi_level(
    spectrum: &EnergySpectrum,
    scheme: &OccupationScheme,
    n_particles: usize,
) -> Result<f64> {
    if n_particles < 2 || n_particles % 2 != 0 {
        return Err(Error::ParticleNumber(format!(
            "spin-degenerate filling needs even N >= 2, got {n_particles}"
        )));
    }
    match *scheme {
        OccupationScheme::ZeroT => {
            let mut filled = 0usize;
            for (k, level) in spectrum.levels.iter().enumerate() {
                filled += 2 * level.degeneracy;
                if filled == n_particles {
                    let next = spectrum.levels.get(k + 1).ok_or_else(|| {
                        Error::SpectrumTooShort(format!(
                            "need level {} to place the Fermi level above E = {}",
                            k + 2,
                            level.energy
                        ))
                    })?;
                    return Ok(0.5 * (level.energy + next.energy));
                }
                if filled > n_particles {
                    return Err(Error::ParticleNumber(format!(
                        "N = {n_particles} stops inside the shell at E = {} (degeneracy {}); \
                         nearest closed shells hold {} and {filled} particles",
                        level.energy,
                        level.degeneracy,
                        filled - 2 * level.degeneracy,
                    )));
                }
            }
            Err(Error::SpectrumTooShort(format!(
                "spectrum holds only {filled} particles, requested {n_particles}"
            )))
        }
        _ => {
            let span = match *scheme {
                OccupationScheme::Thermal { temperature } => 80.0 * temperature,
                _ => scheme.window_width() + 1.0,
            };
            let mut lo = spectrum.levels[0].energy - span;
            let mut hi = spectrum.max_energy() + span;
            let n = n_particles as f64;
            if particle_count(spectrum, scheme, hi) < n {
                return Err(Error::SpectrumTooShort(format!(
                    "even lambda = {hi:.6} reaches only N = {}, requested {n}",
                    particle_count(spectrum, scheme, hi)
                )));
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if particle_count(spectrum, scheme, mid) < n {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let lambda = 0.5 * (lo + hi);
            let resid = particle_count(spectrum, scheme, lambda) - n;
            if resid.abs() > 1e-10 {
                return Err(Error::ParticleNumber(format!(
                    "counting function misses N = {n} by {resid:.3e} at lambda = {lambda:.12}"
                )));
            }
            check_tail(spectrum, scheme, lambda)?;
            Ok(lambda)
        }
    }
}

/// Assemble rho, tau or tau1 on a grid for a given scheme and Fermi level.
pub fn density(
    spectrum: &EnergySpectrum,
    scheme: &OccupationScheme,
    lambda: f64,
    grid: &Grid,
    kind: DensityKind,
) -> Result<DensityField> {
    grid.validate()?;
    check_tail(spectrum, scheme, lambda)?;
    let occ = occupations(spectrum, scheme, lambda);
    let hb2m = spectrum.model.hbar().powi(2) / (2.0 * spectrum.model.mass());
    let values = grid
        .params()
        .iter()
        .map(|&t| {
            let point = grid.embed(t);
            let terms = spectrum.all_density_terms(&point);
            terms
                .iter()
                .zip(&occ)
                .map(|(w, &nu)| {
                    2.0 * nu
                        * match kind {
                            DensityKind::Rho => w.phi_sq,
                            DensityKind::Tau => -hb2m * w.lap_dot,
                            DensityKind::Tau1 => hb2m * w.grad_sq,
                        }
                })
                .sum()
        })
        .collect();
    Ok(
        DensityField::new(grid.clone(), kind.column_name(), values)
            .with_meta("model", spectrum.model.kind_name())
            .with_meta("scheme", scheme.label())
            .with_meta("lambda", format!("{lambda:.16e}"))
            .with_meta("quantity", kind.column_name()),
    )
}

/// Convenience wrapper: fix the Fermi level for `n_particles`, then
/// assemble the density; the particle number lands in the metadata.
pub fn density_for_particles(
    spectrum: &EnergySpectrum,
    scheme: &OccupationScheme,
    n_particles: usize,
    grid: &Grid,
    kind: DensityKind,
) -> Result<DensityField> {
    let lambda = fix_fermi_level(spectrum, scheme, n_particles)?;
    Ok(density(spectrum, scheme, lambda, grid, kind)?
        .with_meta("n_particles", n_particles))
}

/// Integral thermodynamic quantities of one occupied spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct ThermoReport {
    /// Particle number reproduced by the fitted Fermi level.
    pub n_particles: f64,
    pub lambda: f64,
    /// Scheme energy: plain orbital sum at T = 0, the Helmholtz free energy
    /// 2 sum E nu - T S for thermal occupations, and the BCS total energy
    /// for the paired scheme.
    pub free_energy: f64,
    pub entropy: f64,
    /// Grand potential F - lambda N.
    pub grand_potential: f64,
    /// BCS energy 2 [sum E v^2 - gap sum u v] (paired scheme only).
    pub e_bcs: Option<f64>,
    /// Pair condensation energy -2 gap sum u v (paired scheme only).
    pub e_pair: Option<f64>,
    /// Certified bound on the particle number sitting above the solved
    /// spectrum.
    pub occupation_tail_bound: f64,
}

fn xlogx(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else {
        v * v.ln()
    }
}

fn entropy_at(spectrum: &EnergySpectrum, scheme: &OccupationScheme, lambda: f64) -> f64 {
    match scheme {
        OccupationScheme::Thermal { .. } => spectrum
            .levels
            .iter()
            .map(|l| {
                let nu = scheme.occupation(l.energy, lambda);
                -2.0 * l.degeneracy as f64 * (xlogx(nu) + xlogx(1.0 - nu))
            })
            .sum(),
        _ => 0.0,
    }
}

/// Fix the Fermi level and report N, lambda, energy, entropy and grand
/// potential, plus the BCS decomposition when pairing is active.
pub fn thermo_report(
    spectrum: &EnergySpectrum,
    scheme: &OccupationScheme,
    n_particles: usize,
) -> Result<ThermoReport> {
    let lambda = fix_fermi_level(spectrum, scheme, n_particles)?;
    let tail = occupation_tail_bound(spectrum, scheme, lambda)?;
    let n = particle_count(spectrum, scheme, lambda);
    let entropy = entropy_at(spectrum, scheme, lambda);
    let occupied_energy: f64 = spectrum
        .levels
        .iter()
        .map(|l| 2.0 * l.degeneracy as f64 * l.energy * scheme.occupation(l.energy, lambda))
        .sum();
    let (free_energy, e_bcs, e_pair) = match *scheme {
        OccupationScheme::ZeroT => (occupied_energy, None, None),
        OccupationScheme::Thermal { temperature } => {
            (occupied_energy - temperature * entropy, None, None)
        }
        OccupationScheme::Bcs { gap, .. } => {
            let uv_sum: f64 = spectrum
                .levels
                .iter()
                .map(|l| l.degeneracy as f64 * scheme.anomalous(l.energy, lambda))
                .sum();
            let e_pair = -2.0 * gap * uv_sum;
            (occupied_energy + e_pair, Some(occupied_energy + e_pair), Some(e_pair))
        }
    };
    Ok(ThermoReport {
        n_particles: n,
        lambda,
        free_energy,
        entropy,
        grand_potential: free_energy - lambda * n,
        e_bcs,
        e_pair,
        occupation_tail_bound: tail,
    })
}
