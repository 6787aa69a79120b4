//! Model potentials and their exact single-particle spectra.
//!
//! Four trap families are supported: a 1D box with hard walls, harmonic
//! traps in 1-3 dimensions (not necessarily isotropic), spherical hard-wall
//! billiards in 1-3 dimensions, and a coupled 2D quartic oscillator
//! V = (x^4 + y^4)/2 - kappa x^2 y^2. The box, harmonic and billiard
//! spectra are assembled from closed forms and Bessel zeros; the quartic
//! one comes from a parity-blocked Ritz diagonalisation with a certified
//! basis-size policy.
//!
//! Besides eigenvalues, a spectrum evaluates the three local bilinears that
//! every density assembly needs, summed over each degenerate level:
//! |phi|^2, |grad phi|^2 and phi * lap phi. For the radial billiards these
//! are angle-reduced shell sums, so a single radius is enough to evaluate
//! them.

mod hermite;
mod quartic;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{
    bessel_j, bessel_j_zeros_upto, integrate, sph_bessel_j, sph_bessel_j_prime,
    sph_bessel_zeros_upto, QuadratureSpec,
};
use hermite::hermite_values_derivs;
use quartic::{quartic_orbital, solve_quartic, QuarticBasis, QuarticState, BLOCK_NAMES};

/// Trap models. `hbar` and `mass` ride along with the geometry so a model
/// value fully fixes the unit system; the convenience constructors use
/// hbar = mass = 1, except billiards which use mass = 1/2 so that energies
/// are squared wavenumbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialModel {
    /// Hard-wall interval [0, length].
    Box1d { length: f64, hbar: f64, mass: f64 },
    /// V = (m/2) sum_i omega_i^2 x_i^2; dimension = number of frequencies.
    Harmonic {
        frequencies: Vec<f64>,
        hbar: f64,
        mass: f64,
    },
    /// Hard wall at radius R: a segment (dim 1), disk (2) or sphere (3).
    Billiard {
        dim: usize,
        radius: f64,
        hbar: f64,
        mass: f64,
    },
    /// V = (x^4 + y^4)/2 - kappa x^2 y^2, confining for kappa < 1.
    Quartic2d { kappa: f64, hbar: f64, mass: f64 },
}

impl PotentialModel {
    pub fn box1d(length: f64) -> Self {
        assert!(length > 0.0, "box length must be positive, got {length}");
        PotentialModel::Box1d {
            length,
            hbar: 1.0,
            mass: 1.0,
        }
    }

    pub fn harmonic(frequencies: &[f64]) -> Self {
        assert!(
            (1..=3).contains(&frequencies.len()),
            "harmonic trap supports 1-3 frequencies, got {}",
            frequencies.len()
        );
        assert!(
            frequencies.iter().all(|&w| w > 0.0),
            "trap frequencies must be positive, got {frequencies:?}"
        );
        PotentialModel::Harmonic {
            frequencies: frequencies.to_vec(),
            hbar: 1.0,
            mass: 1.0,
        }
    }

    /// Hard-wall billiard with hbar^2 / 2 mass = 1, so E = (z / radius)^2
    /// with z the relevant Bessel zero.
    pub fn billiard(dim: usize, radius: f64) -> Self {
        assert!((1..=3).contains(&dim), "billiard dimension must be 1-3, got {dim}");
        assert!(radius > 0.0, "billiard radius must be positive, got {radius}");
        PotentialModel::Billiard {
            dim,
            radius,
            hbar: 1.0,
            mass: 0.5,
        }
    }

    pub fn quartic2d(kappa: f64) -> Result<Self> {
        if kappa >= 1.0 {
            return Err(Error::Domain(format!(
                "quartic coupling kappa = {kappa} is not confining (requires kappa < 1)"
            )));
        }
        Ok(PotentialModel::Quartic2d {
            kappa,
            hbar: 1.0,
            mass: 1.0,
        })
    }

    /// Same geometry with different units.
    pub fn with_units(mut self, hbar: f64, mass: f64) -> Self {
        assert!(hbar > 0.0 && mass > 0.0, "hbar and mass must be positive");
        match &mut self {
            PotentialModel::Box1d { hbar: h, mass: m, .. }
            | PotentialModel::Harmonic { hbar: h, mass: m, .. }
            | PotentialModel::Billiard { hbar: h, mass: m, .. }
            | PotentialModel::Quartic2d { hbar: h, mass: m, .. } => {
                *h = hbar;
                *m = mass;
            }
        }
        self
    }

    pub fn dim(&self) -> usize {
        match self {
            PotentialModel::Box1d { .. } => 1,
            PotentialModel::Harmonic { frequencies, .. } => frequencies.len(),
            PotentialModel::Billiard { dim, .. } => *dim,
            PotentialModel::Quartic2d { .. } => 2,
        }
    }

    pub fn hbar(&self) -> f64 {
        match self {
            PotentialModel::Box1d { hbar, .. }
            | PotentialModel::Harmonic { hbar, .. }
            | PotentialModel::Billiard { hbar, .. }
            | PotentialModel::Quartic2d { hbar, .. } => *hbar,
        }
    }

    pub fn mass(&self) -> f64 {
        match self {
            PotentialModel::Box1d { mass, .. }
            | PotentialModel::Harmonic { mass, .. }
            | PotentialModel::Billiard { mass, .. }
            | PotentialModel::Quartic2d { mass, .. } => *mass,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            PotentialModel::Box1d { .. } => "box1d",
            PotentialModel::Harmonic { .. } => "harmonic",
            PotentialModel::Billiard { .. } => "billiard",
            PotentialModel::Quartic2d { .. } => "quartic2d",
        }
    }

    /// True if a single radius determines the potential (billiards always,
    /// harmonic traps when isotropic).
    pub fn is_radial(&self) -> bool {
        match self {
            PotentialModel::Billiard { .. } => true,
            PotentialModel::Harmonic { frequencies, .. } => {
                frequencies.iter().all(|&w| w == frequencies[0])
            }
            PotentialModel::Box1d { .. } => true,
            PotentialModel::Quartic2d { .. } => false,
        }
    }

    /// Expand a point to full Cartesian coordinates. A 1-component point
    /// for a radial multi-dimensional model is read as a radius and padded
    /// with zeros (valid because every quantity this crate evaluates on
    /// such models is a rotational invariant).
    fn full_point(&self, point: &[f64]) -> Vec<f64> {
        let d = self.dim();
        if point.len() == d {
            return point.to_vec();
        }
        if point.len() == 1 && d > 1 && self.is_radial() {
            let mut p = vec![0.0; d];
            p[0] = point[0];
            return p;
        }
        panic!(
            "point of length {} is not valid for a {}-dimensional {} model",
            point.len(),
            d,
            self.kind_name()
        );
    }

    /// V at a point. Points beyond a hard wall give +infinity. Accepts
    /// full coordinates, or a bare radius for radial models.
    pub fn evaluate_potential(&self, point: &[f64]) -> f64 {
        let p = self.full_point(point);
        match self {
            PotentialModel::Box1d { length, .. } => {
                if p[0] < 0.0 || p[0] > *length {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            PotentialModel::Harmonic {
                frequencies, mass, ..
            } => {
                0.5 * mass
                    * frequencies
                        .iter()
                        .zip(&p)
                        .map(|(w, x)| w * w * x * x)
                        .sum::<f64>()
            }
            PotentialModel::Billiard { radius, .. } => {
                let r2: f64 = p.iter().map(|x| x * x).sum();
                if r2 <= radius * radius {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            PotentialModel::Quartic2d { kappa, .. } => {
                let (x, y) = (p[0], p[1]);
                0.5 * (x.powi(4) + y.powi(4)) - kappa * x * x * y * y
            }
        }
    }

    /// Local classical momentum sqrt(2m (E - V)), or None in the
    /// classically forbidden region.
    pub fn classical_momentum(&self, energy: f64, point: &[f64]) -> Option<f64> {
        let v = self.evaluate_potential(point);
        if v.is_finite() && v <= energy {
            Some((2.0 * self.mass() * (energy - v)).sqrt())
        } else {
            None
        }
    }
}

/// One (possibly degenerate) energy level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Level {
    pub energy: f64,
    pub degeneracy: usize,
    /// Model-specific quantum labels ("n=3", "m=±2,k=1", ...).
    pub labels: Vec<String>,
}

/// Level-summed local bilinears of the eigenfunctions, the raw material of
/// every density: sum_i |phi_i|^2, sum_i |grad phi_i|^2 and
/// sum_i phi_i * lap phi_i over the degenerate members i of one level.
#[derive(Debug, Clone, Copy, Default)]
pub struct DensityTerms {
    pub phi_sq: f64,
    pub grad_sq: f64,
    pub lap_dot: f64,
}

#[derive(Debug, Clone)]
struct DiskShell {
    m: usize,
    /// z = j_{m,k}, the k-th zero of J_m.
    z: f64,
    /// Squared normalisation 1 / (pi R^2 J_{m+1}(z)^2).
    norm_sq: f64,
}

#[derive(Debug, Clone)]
struct SphereShell {
    l: usize,
    /// z = k-th zero of the spherical Bessel function j_l.
    z: f64,
    /// Squared radial amplitude 2 / (R^3 j_{l+1}(z)^2).
    amp_sq: f64,
}

#[derive(Debug, Clone)]
enum Basis {
    /// Bare level list without wavefunctions; supports thermodynamics and
    /// level-density work but no spatial densities.
    Synthetic,
    Box1d,
    Billiard1d,
    Harmonic {
        /// Quantum numbers of each member of each level.
        members: Vec<Vec<Vec<usize>>>,
        /// Largest quantum number used per axis.
        nmax: Vec<usize>,
    },
    Disk {
        shells: Vec<DiskShell>,
    },
    Sphere {
        shells: Vec<SphereShell>,
    },
    Quartic {
        basis: QuarticBasis,
        members: Vec<Vec<QuarticState>>,
    },
}

/// An exactly solved spectrum: ascending levels plus enough basis data to
/// evaluate the level-summed density terms anywhere.
#[derive(Debug, Clone)]
pub struct EnergySpectrum {
    pub model: PotentialModel,
    pub levels: Vec<Level>,
    basis: Basis,
}

/// Solve the lowest `count` levels of a model. Levels are complete: no
/// eigenvalue below `levels.last().energy` is missing. For the quartic
/// model the Ritz basis grows until this prefix is certified to a relative
/// 1e-6 between consecutive cutoffs.
pub fn solve_spectrum(model: &PotentialModel, count: usize) -> Result<EnergySpectrum> {
    assert!(count >= 1, "requested an empty spectrum");
    let (levels, basis) = match model {
        PotentialModel::Box1d { length, hbar, mass } => {
            let scale = hbar * hbar * std::f64::consts::PI.powi(2) / (2.0 * mass * length * length);
            let levels = (1..=count)
                .map(|n| Level {
                    energy: scale * (n * n) as f64,
                    degeneracy: 1,
                    labels: vec![format!("n={n}")],
                })
                .collect();
            (levels, Basis::Box1d)
        }
        PotentialModel::Harmonic {
            frequencies,
            hbar,
            ..
        } => harmonic_levels(frequencies, *hbar, count),
        PotentialModel::Billiard {
            dim: 1,
            radius,
            hbar,
            mass,
        } => {
            let scale =
                hbar * hbar * std::f64::consts::PI.powi(2) / (8.0 * mass * radius * radius);
            let levels = (1..=count)
                .map(|n| Level {
                    energy: scale * (n * n) as f64,
                    degeneracy: 1,
                    labels: vec![format!("n={n}")],
                })
                .collect();
            (levels, Basis::Billiard1d)
        }
        PotentialModel::Billiard {
            dim: 2,
            radius,
            hbar,
            mass,
        } => disk_levels(*radius, *hbar, *mass, count)?,
        PotentialModel::Billiard {
            dim: 3,
            radius,
            hbar,
            mass,
        } => sphere_levels(*radius, *hbar, *mass, count)?,
        PotentialModel::Billiard { dim, .. } => {
            return Err(Error::Unsupported(format!("billiard dimension {dim}")))
        }
        PotentialModel::Quartic2d { kappa, hbar, mass } => {
            quartic_levels(*kappa, *hbar, *mass, count)?
        }
    };
    Ok(EnergySpectrum {
        model: model.clone(),
        levels,
        basis,
    })
}

fn harmonic_levels(frequencies: &[f64], hbar: f64, count: usize) -> (Vec<Level>, Basis) {
    let wmin = frequencies.iter().cloned().fold(f64::INFINITY, f64::min);
    let zero_point: f64 = 0.5 * hbar * frequencies.iter().sum::<f64>();
    let mut cap = zero_point + hbar * wmin * (count as f64 + 2.0);
    loop {
        let mut states: Vec<(f64, Vec<usize>)> = Vec::new();
        let mut idx = vec![0usize; frequencies.len()];
        enumerate_indices(frequencies, hbar, cap, 0, &mut idx, &mut states);
        states.sort_by(|a, b| a.0.total_cmp(&b.0));
        let tol = 1e-10 * (cap.abs() + hbar * wmin);
        let mut grouped: Vec<(f64, Vec<Vec<usize>>)> = Vec::new();
        for (e, n) in states {
            match grouped.last_mut() {
                Some((e0, ns)) if (e - *e0).abs() <= tol => ns.push(n),
                _ => grouped.push((e, vec![n])),
            }
        }
        // The last group near the cap may be cut open; never expose it.
        grouped.pop();
        if grouped.len() >= count {
            grouped.truncate(count);
            let mut nmax = vec![0usize; frequencies.len()];
            let levels = grouped
                .iter()
                .map(|(e, ns)| Level {
                    energy: *e,
                    degeneracy: ns.len(),
                    labels: ns
                        .iter()
                        .map(|n| {
                            let parts: Vec<String> = n.iter().map(|q| q.to_string()).collect();
                            format!("n=({})", parts.join(","))
                        })
                        .collect(),
                })
                .collect();
            for (_, ns) in &grouped {
                for n in ns {
                    for (a, &q) in n.iter().enumerate() {
                        nmax[a] = nmax[a].max(q);
                    }
                }
            }
            let members = grouped.into_iter().map(|(_, ns)| ns).collect();
            return (levels, Basis::Harmonic { members, nmax });
        }
        cap = zero_point + (cap - zero_point) * 1.6;
    }
}

fn enumerate_indices(
    frequencies: &[f64],
    hbar: f64,
    cap: f64,
    axis: usize,
    idx: &mut Vec<usize>,
    out: &mut Vec<(f64, Vec<usize>)>,
) {
    if axis == frequencies.len() {
        let e: f64 = hbar
            * frequencies
                .iter()
                .zip(idx.iter())
                .map(|(w, &n)| w * (n as f64 + 0.5))
                .sum::<f64>();
        if e <= cap {
            out.push((e, idx.clone()));
        }
        return;
    }
    for n in 0.. {
        idx[axis] = n;
        // Cheap prune: zero-point of the remaining axes cannot rescue a
        // partial sum that already exceeds the cap.
        let partial: f64 = hbar
            * frequencies
                .iter()
                .zip(idx.iter())
                .take(axis + 1)
                .map(|(w, &q)| w * (q as f64 + 0.5))
                .sum::<f64>();
        if partial > cap {
            break;
        }
        enumerate_indices(frequencies, hbar, cap, axis + 1, idx, out);
    }
    idx[axis] = 0;
}

fn disk_levels(radius: f64, hbar: f64, mass: f64, count: usize) -> Result<(Vec<Level>, Basis)> {
    let scale = hbar * hbar / (2.0 * mass * radius * radius);
    let mut z_max = (1.0 + (8.0 * count as f64 + 41.0).sqrt()) * 1.15;
    loop {
        let mut shells: Vec<(usize, usize, f64)> = Vec::new();
        for m in 0.. {
            let zeros = bessel_j_zeros_upto(m, z_max);
            if zeros.is_empty() {
                break;
            }
            shells.extend(zeros.into_iter().enumerate().map(|(i, z)| (m, i + 1, z)));
        }
        if shells.len() >= count {
            shells.sort_by(|a, b| a.2.total_cmp(&b.2));
            shells.truncate(count);
            let mut levels = Vec::with_capacity(count);
            let mut basis = Vec::with_capacity(count);
            for &(m, k, z) in &shells {
                let deg = if m == 0 { 1 } else { 2 };
                let edge = bessel_j((m + 1) as f64, z)?;
                levels.push(Level {
                    energy: scale * z * z,
                    degeneracy: deg,
                    labels: vec![if m == 0 {
                        format!("m=0,k={k}")
                    } else {
                        format!("m=±{m},k={k}")
                    }],
                });
                basis.push(DiskShell {
                    m,
                    z,
                    norm_sq: 1.0 / (std::f64::consts::PI * radius * radius * edge * edge),
                });
            }
            return Ok((levels, Basis::Disk { shells: basis }));
        }
        z_max *= 1.25;
    }
}

fn sphere_levels(radius: f64, hbar: f64, mass: f64, count: usize) -> Result<(Vec<Level>, Basis)> {
    let scale = hbar * hbar / (2.0 * mass * radius * radius);
    let mut z_max = (2.0 * std::f64::consts::PI * count as f64).sqrt() * 1.2 + 4.0;
    loop {
        let mut shells: Vec<(usize, usize, f64)> = Vec::new();
        for l in 0.. {
            let zeros = sph_bessel_zeros_upto(l, z_max);
            if zeros.is_empty() {
                break;
            }
            shells.extend(zeros.into_iter().enumerate().map(|(i, z)| (l, i + 1, z)));
        }
        if shells.len() >= count {
            shells.sort_by(|a, b| a.2.total_cmp(&b.2));
            shells.truncate(count);
            let mut levels = Vec::with_capacity(count);
            let mut basis = Vec::with_capacity(count);
            for &(l, k, z) in &shells {
                let edge = sph_bessel_j(l + 1, z);
                levels.push(Level {
                    energy: scale * z * z,
                    degeneracy: 2 * l + 1,
                    labels: vec![format!("l={l},k={k}")],
                });
                basis.push(SphereShell {
                    l,
                    z,
                    amp_sq: 2.0 / (radius.powi(3) * edge * edge),
                });
            }
            return Ok((levels, Basis::Sphere { shells: basis }));
        }
        z_max *= 1.25;
    }
}

fn quartic_levels(
    kappa: f64,
    hbar: f64,
    mass: f64,
    count: usize,
) -> Result<(Vec<Level>, Basis)> {
    let mut need = count * 4 / 3 + 8;
    loop {
        let sol = solve_quartic(kappa, hbar, mass, need)?;
        let certified = &sol.states[..need.min(sol.states.len())];
        let mut grouped: Vec<Vec<QuarticState>> = Vec::new();
        for s in certified {
            match grouped.last_mut() {
                Some(g) if (s.energy - g[0].energy).abs() <= 1e-8 * (g[0].energy.abs() + 1.0) => {
                    g.push(s.clone())
                }
                _ => grouped.push(vec![s.clone()]),
            }
        }
        grouped.pop(); // the last group may be cut open at the certification edge
        if grouped.len() >= count {
            grouped.truncate(count);
            let levels = grouped
                .iter()
                .map(|g| Level {
                    energy: g.iter().map(|s| s.energy).sum::<f64>() / g.len() as f64,
                    degeneracy: g.len(),
                    labels: g
                        .iter()
                        .map(|s| format!("{} #{}", BLOCK_NAMES[s.block], s.rank + 1))
                        .collect(),
                })
                .collect();
            return Ok((
                levels,
                Basis::Quartic {
                    basis: sol.basis,
                    members: grouped,
                },
            ));
        }
        need = need * 3 / 2 + 4;
    }
}

/// Angular integral over c(theta)^{-1/2} with
/// c = 1/2 - (1 + kappa) sin^2(2 theta) / 4, the shape factor of the
/// quartic equipotentials. Enters every smooth (phase-space) quantity of
/// the quartic model.
pub(crate) fn quartic_angular_integral(kappa: f64) -> Result<f64> {
    let r = integrate(
        |t: f64| {
            let s = (2.0 * t).sin();
            1.0 / (0.5 - 0.25 * (1.0 + kappa) * s * s).sqrt()
        },
        0.0,
        2.0 * std::f64::consts::PI,
        QuadratureSpec::with_rel_tol(1e-12),
    )?;
    Ok(r.value)
}

impl EnergySpectrum {
    /// Wrap an explicit list of levels (ascending) without basis data.
    /// Such a spectrum supports occupations, fermi levels and folded
    /// energies, but not spatial densities.
    pub fn from_levels(model: PotentialModel, levels: Vec<Level>) -> Self {
        assert!(
            levels.windows(2).all(|w| w[0].energy <= w[1].energy),
            "levels must be sorted by energy"
        );
        EnergySpectrum {
            model,
            levels,
            basis: Basis::Synthetic,
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// True for spectra built with [`EnergySpectrum::from_levels`]: the
    /// level list is taken as complete (nothing exists above the last
    /// level), so tail certifications against the model do not apply.
    pub fn is_synthetic(&self) -> bool {
        matches!(self.basis, Basis::Synthetic)
    }

    /// Highest solved eigenvalue; densities and occupations are only
    /// trustworthy when their weights are negligible here.
    pub fn max_energy(&self) -> f64 {
        self.levels.last().map(|l| l.energy).unwrap_or(f64::NAN)
    }

    /// Number of orbitals (degeneracy-weighted levels) strictly below `e`.
    pub fn states_below(&self, e: f64) -> usize {
        self.levels
            .iter()
            .take_while(|l| l.energy < e)
            .map(|l| l.degeneracy)
            .sum()
    }

    /// Level-summed |phi|^2, |grad phi|^2, phi*lap(phi) at a point.
    ///
    /// The point is given in model coordinates: a coordinate for 1D models,
    /// a radius (or full coordinates) for the disk and sphere, and full
    /// coordinates for harmonic and quartic traps.
    pub fn density_terms(&self, level: usize, point: &[f64]) -> DensityTerms {
        match &self.basis {
            Basis::Synthetic => {
                panic!("synthetic spectrum carries no wavefunctions")
            }
            Basis::Box1d => {
                let length = match &self.model {
                    PotentialModel::Box1d { length, .. } => *length,
                    _ => unreachable!(),
                };
                box_terms(length, level + 1, point[0])
            }
            Basis::Billiard1d => {
                let radius = match &self.model {
                    PotentialModel::Billiard { radius, .. } => *radius,
                    _ => unreachable!(),
                };
                // Identical to a box of length 2R shifted to [-R, R].
                box_terms(2.0 * radius, level + 1, point[0] + radius)
            }
            Basis::Harmonic { members, nmax } => {
                let (frequencies, hbar, mass) = match &self.model {
                    PotentialModel::Harmonic {
                        frequencies,
                        hbar,
                        mass,
                    } => (frequencies, *hbar, *mass),
                    _ => unreachable!(),
                };
                let p = self.model.full_point(point);
                let axes = harmonic_axis_tables(frequencies, hbar, mass, nmax, &p);
                harmonic_terms(&members[level], &axes)
            }
            Basis::Disk { shells } => {
                let radius = match &self.model {
                    PotentialModel::Billiard { radius, .. } => *radius,
                    _ => unreachable!(),
                };
                let r = radial_coordinate(&self.model, point);
                disk_terms(&shells[level], radius, r)
            }
            Basis::Sphere { shells } => {
                let radius = match &self.model {
                    PotentialModel::Billiard { radius, .. } => *radius,
                    _ => unreachable!(),
                };
                let r = radial_coordinate(&self.model, point);
                sphere_terms(&shells[level], radius, r)
            }
            Basis::Quartic { basis, members } => {
                let p = self.model.full_point(point);
                let mut t = DensityTerms::default();
                for s in &members[level] {
                    let (phi, grad, lap) = quartic_orbital(basis, s, p[0], p[1]);
                    t.phi_sq += phi * phi;
                    t.grad_sq += grad[0] * grad[0] + grad[1] * grad[1];
                    t.lap_dot += phi * lap;
                }
                t
            }
        }
    }

    /// Density terms of every level at one point. Equivalent to calling
    /// [`Self::density_terms`] per level but shares the per-point basis
    /// tables, which matters for the Ritz and harmonic models.
    pub fn all_density_terms(&self, point: &[f64]) -> Vec<DensityTerms> {
        match &self.basis {
            Basis::Harmonic { members, nmax } => {
                let (frequencies, hbar, mass) = match &self.model {
                    PotentialModel::Harmonic {
                        frequencies,
                        hbar,
                        mass,
                    } => (frequencies, *hbar, *mass),
                    _ => unreachable!(),
                };
                let p = self.model.full_point(point);
                let axes = harmonic_axis_tables(frequencies, hbar, mass, nmax, &p);
                members.iter().map(|m| harmonic_terms(m, &axes)).collect()
            }
            Basis::Quartic { basis, members } => {
                let p = self.model.full_point(point);
                let b = basis.b;
                let (ux, dux, d2ux) = hermite_values_derivs(basis.nmax, p[0] / b);
                let (uy, duy, d2uy) = hermite_values_derivs(basis.nmax, p[1] / b);
                members
                    .iter()
                    .map(|states| {
                        let mut t = DensityTerms::default();
                        for s in states {
                            let (mut phi, mut gx, mut gy, mut lap) = (0.0, 0.0, 0.0, 0.0);
                            for (&c, &(i, j)) in s.coeffs.iter().zip(&basis.blocks[s.block]) {
                                phi += c * ux[i] * uy[j];
                                gx += c * dux[i] * uy[j];
                                gy += c * ux[i] * duy[j];
                                lap += c * (d2ux[i] * uy[j] + ux[i] * d2uy[j]);
                            }
                            phi /= b;
                            gx /= b * b;
                            gy /= b * b;
                            lap /= b * b * b;
                            t.phi_sq += phi * phi;
                            t.grad_sq += gx * gx + gy * gy;
                            t.lap_dot += phi * lap;
                        }
                        t
                    })
                    .collect()
            }
            _ => (0..self.levels.len())
                .map(|k| self.density_terms(k, point))
                .collect(),
        }
    }

    /// Smooth (phase-space volume) orbital level density, spinless. Used
    /// to certify truncation tails: the number of orbitals missed above
    /// `max_energy` is about the integral of this beyond it.
    pub fn smooth_level_density(&self, energy: f64) -> f64 {
        smooth_level_density(&self.model, energy)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "model": self.model,
            "levels": self.levels,
        })
    }

    pub fn write_json<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, &self.to_json())?;
        writeln!(w)?;
        Ok(())
    }
}

/// Spinless smooth level density of a model (orbital counting measure).
pub fn smooth_level_density(model: &PotentialModel, energy: f64) -> f64 {
    if energy <= 0.0 {
        return 0.0;
    }
    let pi = std::f64::consts::PI;
    match model {
        PotentialModel::Box1d { length, hbar, mass } => {
            length * (2.0 * mass).sqrt() / (2.0 * pi * hbar * energy.sqrt())
        }
        PotentialModel::Harmonic {
            frequencies, hbar, ..
        } => {
            let d = frequencies.len();
            let prod: f64 = frequencies.iter().map(|w| hbar * w).product();
            let fact: f64 = (1..d).map(|k| k as f64).product();
            energy.powi(d as i32 - 1) / (fact * prod)
        }
        PotentialModel::Billiard {
            dim: 1,
            radius,
            hbar,
            mass,
        } => 2.0 * radius * (2.0 * mass).sqrt() / (2.0 * pi * hbar * energy.sqrt()),
        PotentialModel::Billiard {
            dim: 2,
            radius,
            hbar,
            mass,
        } => mass * radius * radius / (2.0 * hbar * hbar),
        PotentialModel::Billiard {
            dim: 3,
            radius,
            hbar,
            mass,
        } => radius.powi(3) * (2.0 * mass).powf(1.5) * energy.sqrt() / (3.0 * pi * hbar.powi(3)),
        PotentialModel::Billiard { .. } => f64::NAN,
        PotentialModel::Quartic2d { kappa, hbar, mass } => {
            let ic = quartic_angular_integral(*kappa).unwrap_or(f64::NAN);
            mass * energy.sqrt() * ic / (4.0 * pi * hbar * hbar)
        }
    }
}

fn radial_coordinate(model: &PotentialModel, point: &[f64]) -> f64 {
    if point.len() == 1 {
        point[0].abs()
    } else {
        let p = model.full_point(point);
        p.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

fn box_terms(length: f64, n: usize, x: f64) -> DensityTerms {
    if !(0.0..=length).contains(&x) {
        return DensityTerms::default();
    }
    let k = n as f64 * std::f64::consts::PI / length;
    let a = 2.0 / length;
    let (s, c) = (k * x).sin_cos();
    DensityTerms {
        phi_sq: a * s * s,
        grad_sq: a * k * k * c * c,
        lap_dot: -k * k * a * s * s,
    }
}

struct AxisTable {
    b: f64,
    u: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

fn harmonic_axis_tables(
    frequencies: &[f64],
    hbar: f64,
    mass: f64,
    nmax: &[usize],
    point: &[f64],
) -> Vec<AxisTable> {
    frequencies
        .iter()
        .zip(nmax)
        .zip(point)
        .map(|((w, &nm), &x)| {
            let b = (hbar / (mass * w)).sqrt();
            let (u, d1, d2) = hermite_values_derivs(nm, x / b);
            AxisTable { b, u, d1, d2 }
        })
        .collect()
}

fn harmonic_terms(members: &[Vec<usize>], axes: &[AxisTable]) -> DensityTerms {
    let d = axes.len();
    let norm: f64 = axes.iter().map(|a| 1.0 / a.b).product();
    let mut t = DensityTerms::default();
    for n in members {
        let phi: f64 = (0..d).map(|i| axes[i].u[n[i]]).product();
        let mut grad2 = 0.0;
        let mut lap = 0.0;
        for i in 0..d {
            let mut others = 1.0;
            for j in 0..d {
                if j != i {
                    others *= axes[j].u[n[j]];
                }
            }
            let gi = others * axes[i].d1[n[i]] / axes[i].b;
            grad2 += gi * gi;
            lap += others * axes[i].d2[n[i]] / (axes[i].b * axes[i].b);
        }
        t.phi_sq += norm * phi * phi;
        t.grad_sq += norm * grad2;
        t.lap_dot += norm * phi * lap;
    }
    t
}

fn disk_terms(shell: &DiskShell, radius: f64, r: f64) -> DensityTerms {
    if r > radius {
        return DensityTerms::default();
    }
    let q = shell.z / radius;
    let deg = if shell.m == 0 { 1.0 } else { 2.0 };
    let c2 = shell.norm_sq;
    if r < 1e-12 * radius {
        // Only m = 0 reaches the centre; m = 1 contributes to the gradient.
        return match shell.m {
            0 => DensityTerms {
                phi_sq: c2,
                grad_sq: 0.0,
                lap_dot: -q * q * c2,
            },
            1 => DensityTerms {
                phi_sq: 0.0,
                grad_sq: c2 * q * q,
                lap_dot: 0.0,
            },
            _ => DensityTerms::default(),
        };
    }
    let zr = q * r;
    let jm = bessel_j(shell.m as f64, zr).expect("integer order, z >= 0");
    let jprev = if shell.m == 0 {
        -bessel_j(1.0, zr).expect("integer order, z >= 0")
    } else {
        bessel_j(shell.m as f64 - 1.0, zr).expect("integer order, z >= 0")
    };
    // J_m'(z) = J_{m-1}(z) - (m/z) J_m(z); for m = 0, J_0' = -J_1.
    let jp = if shell.m == 0 {
        jprev
    } else {
        jprev - shell.m as f64 / zr * jm
    };
    let phi_sq = deg * c2 * jm * jm;
    let m2 = (shell.m * shell.m) as f64;
    DensityTerms {
        phi_sq,
        grad_sq: deg * c2 * (q * q * jp * jp + m2 * jm * jm / (r * r)),
        lap_dot: -q * q * phi_sq,
    }
}

fn sphere_terms(shell: &SphereShell, radius: f64, r: f64) -> DensityTerms {
    if r > radius {
        return DensityTerms::default();
    }
    let q = shell.z / radius;
    let a2 = shell.amp_sq;
    let l = shell.l;
    let pre = (2 * l + 1) as f64 / (4.0 * std::f64::consts::PI);
    if r < 1e-12 * radius {
        return match l {
            0 => DensityTerms {
                phi_sq: pre * a2,
                grad_sq: 0.0,
                lap_dot: -q * q * pre * a2,
            },
            // u ~ A q r / 3 near the origin: u'^2 + 2 (u/r)^2 -> A^2 q^2 / 3.
            1 => DensityTerms {
                phi_sq: 0.0,
                grad_sq: pre * a2 * q * q / 3.0,
                lap_dot: 0.0,
            },
            _ => DensityTerms::default(),
        };
    }
    let zr = q * r;
    let u = sph_bessel_j(l, zr);
    let up = q * sph_bessel_j_prime(l, zr);
    let u2 = a2 * u * u;
    let phi_sq = pre * u2;
    let ll1 = (l * (l + 1)) as f64;
    DensityTerms {
        phi_sq,
        grad_sq: pre * (a2 * up * up + ll1 * u2 / (r * r)),
        lap_dot: -q * q * phi_sq,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::integrate;

    #[test]
    fn box_spectrum_is_quadratic() {
        let model = PotentialModel::box1d(3.0);
        let sp = solve_spectrum(&model, 5).unwrap();
        let e1 = std::f64::consts::PI.powi(2) / 18.0;
        for (k, level) in sp.levels.iter().enumerate() {
            let n = (k + 1) as f64;
            assert!(
                (level.energy - e1 * n * n).abs() < 1e-13 * level.energy,
                "box level {k}: {} vs {}",
                level.energy,
                e1 * n * n
            );
            assert_eq!(level.degeneracy, 1);
        }
        assert_eq!(sp.levels[2].labels[0], "n=3");
    }

    #[test]
    fn box_orbitals_normalised_with_kinetic_sum_rule() {
        let model = PotentialModel::box1d(2.5);
        let sp = solve_spectrum(&model, 4).unwrap();
        for k in 0..4 {
            let norm = integrate(
                |x: f64| sp.density_terms(k, &[x]).phi_sq,
                0.0,
                2.5,
                QuadratureSpec::default(),
            )
            .unwrap()
            .value;
            assert!((norm - 1.0).abs() < 1e-12, "norm of level {k} = {norm}");
            // For V = 0 inside, int |grad phi|^2 = 2 m E / hbar^2.
            let kin = integrate(
                |x: f64| sp.density_terms(k, &[x]).grad_sq,
                0.0,
                2.5,
                QuadratureSpec::default(),
            )
            .unwrap()
            .value;
            let want = 2.0 * sp.levels[k].energy;
            assert!(
                (kin - want).abs() < 1e-11 * want,
                "kinetic sum rule level {k}: {kin} vs {want}"
            );
        }
    }

    #[test]
    fn isotropic_harmonic_degeneracies_climb_linearly() {
        let model = PotentialModel::harmonic(&[1.0, 1.0]);
        let sp = solve_spectrum(&model, 6).unwrap();
        for (k, level) in sp.levels.iter().enumerate() {
            assert!(
                (level.energy - (k as f64 + 1.0)).abs() < 1e-12,
                "2D oscillator shell {k} energy {}",
                level.energy
            );
            assert_eq!(level.degeneracy, k + 1, "shell {k} degeneracy");
        }
    }

    #[test]
    fn anisotropic_harmonic_splits_shells() {
        let w2 = 2f64.sqrt();
        let model = PotentialModel::harmonic(&[1.0, w2]);
        let sp = solve_spectrum(&model, 5).unwrap();
        let zp = 0.5 * (1.0 + w2);
        let want = [zp, zp + 1.0, zp + w2, zp + 2.0, zp + 1.0 + w2];
        for (k, w) in want.iter().enumerate() {
            assert!(
                (sp.levels[k].energy - w).abs() < 1e-12,
                "anisotropic level {k}: {} vs {w}",
                sp.levels[k].energy
            );
            assert_eq!(sp.levels[k].degeneracy, 1);
        }
    }

    #[test]
    fn harmonic_ground_state_is_gaussian() {
        let model = PotentialModel::harmonic(&[1.0]);
        let sp = solve_spectrum(&model, 1).unwrap();
        for &x in &[0.0, 0.5, -1.3] {
            let t = sp.density_terms(0, &[x]);
            let want = (-x * x).exp() / std::f64::consts::PI.sqrt();
            assert!(
                (t.phi_sq - want).abs() < 1e-14,
                "|phi_0({x})|^2 = {} vs {want}",
                t.phi_sq
            );
        }
    }

    #[test]
    fn segment_billiard_matches_shifted_box() {
        let model = PotentialModel::billiard(1, 1.0);
        let sp = solve_spectrum(&model, 3).unwrap();
        // hbar^2/2m = 1: E_n = (n pi / 2)^2
        for (k, level) in sp.levels.iter().enumerate() {
            let n = (k + 1) as f64;
            let want = (n * std::f64::consts::PI / 2.0).powi(2);
            assert!(
                (level.energy - want).abs() < 1e-12 * want,
                "segment level {k}: {} vs {want}",
                level.energy
            );
        }
        // density profile symmetric in x
        let t1 = sp.density_terms(1, &[0.4]);
        let t2 = sp.density_terms(1, &[-0.4]);
        assert!((t1.phi_sq - t2.phi_sq).abs() < 1e-14);
    }

    #[test]
    fn disk_levels_match_bessel_zeros() {
        let model = PotentialModel::billiard(2, 1.0);
        let sp = solve_spectrum(&model, 6).unwrap();
        // E = j_{m,k}^2 with hbar^2/2m = R = 1.
        assert!((sp.levels[0].energy - 5.78318596294678).abs() < 1e-9);
        let degs: Vec<usize> = sp.levels.iter().map(|l| l.degeneracy).collect();
        assert_eq!(degs, vec![1, 2, 2, 1, 2, 2], "disk degeneracy pattern");
        assert_eq!(sp.levels[1].labels[0], "m=±1,k=1");
    }

    #[test]
    fn disk_shells_normalised_to_their_degeneracy() {
        let model = PotentialModel::billiard(2, 1.3);
        let sp = solve_spectrum(&model, 5).unwrap();
        for k in 0..5 {
            let v = integrate(
                |r: f64| sp.density_terms(k, &[r]).phi_sq * 2.0 * std::f64::consts::PI * r,
                0.0,
                1.3,
                QuadratureSpec::default(),
            )
            .unwrap()
            .value;
            assert!(
                (v - sp.levels[k].degeneracy as f64).abs() < 1e-10,
                "disk shell {k} integrates to {v}, degeneracy {}",
                sp.levels[k].degeneracy
            );
        }
    }

    #[test]
    fn sphere_levels_and_shell_norms() {
        let model = PotentialModel::billiard(3, 1.0);
        let sp = solve_spectrum(&model, 4).unwrap();
        assert!((sp.levels[0].energy - std::f64::consts::PI.powi(2)).abs() < 1e-9);
        // First l=1 zero of j_1 is 4.493409457909064.
        assert!((sp.levels[1].energy - 4.493409457909064f64.powi(2)).abs() < 1e-8);
        assert_eq!(sp.levels[1].degeneracy, 3);
        for k in 0..4 {
            let v = integrate(
                |r: f64| sp.density_terms(k, &[r]).phi_sq * 4.0 * std::f64::consts::PI * r * r,
                0.0,
                1.0,
                QuadratureSpec::default(),
            )
            .unwrap()
            .value;
            assert!(
                (v - sp.levels[k].degeneracy as f64).abs() < 1e-9,
                "sphere shell {k} integrates to {v}"
            );
        }
    }

    #[test]
    fn radial_terms_continuous_at_origin() {
        for dim in [2usize, 3] {
            let model = PotentialModel::billiard(dim, 1.0);
            let sp = solve_spectrum(&model, 6).unwrap();
            for k in 0..6 {
                let at0 = sp.density_terms(k, &[0.0]);
                let near = sp.density_terms(k, &[1e-7]);
                assert!(
                    (at0.phi_sq - near.phi_sq).abs() < 1e-6 * (near.phi_sq.abs() + 1.0),
                    "dim {dim} level {k} phi_sq jump at origin: {} vs {}",
                    at0.phi_sq,
                    near.phi_sq
                );
                assert!(
                    (at0.grad_sq - near.grad_sq).abs() < 1e-4 * (near.grad_sq.abs() + 1.0),
                    "dim {dim} level {k} grad_sq jump at origin: {} vs {}",
                    at0.grad_sq,
                    near.grad_sq
                );
            }
        }
    }

    #[test]
    fn quartic_exchange_pairs_merge_into_degenerate_levels() {
        let model = PotentialModel::quartic2d(0.6).unwrap();
        let sp = solve_spectrum(&model, 6).unwrap();
        assert!((sp.levels[0].energy - 0.969321505840).abs() < 1e-7);
        assert_eq!(sp.levels[0].degeneracy, 1);
        assert!((sp.levels[1].energy - 2.189715036002).abs() < 1e-7);
        assert_eq!(sp.levels[1].degeneracy, 2, "exchange pair should merge");
        let labels = &sp.levels[1].labels;
        assert!(
            labels.iter().any(|l| l.contains("x:even,y:odd"))
                && labels.iter().any(|l| l.contains("x:odd,y:even")),
            "pair labels record both parities: {labels:?}"
        );
    }

    #[test]
    fn smooth_density_tracks_disk_staircase() {
        let model = PotentialModel::billiard(2, 1.0);
        let sp = solve_spectrum(&model, 120).unwrap();
        let e = 180.0f64;
        let z = e.sqrt(); // hbar^2/2m = R = 1
        let counted = sp.states_below(e) as f64;
        // Volume term z^2/4; the surface correction is -z/2 + O(1).
        let volume = z * z / 4.0;
        assert!(
            (counted - volume).abs() < 0.7 * z / 2.0 + 3.0,
            "disk staircase at E={e}: counted {counted}, volume term {volume}"
        );
        // smooth_level_density must be the derivative of the volume term.
        let g = sp.smooth_level_density(e);
        assert!((g - 0.25).abs() < 1e-12, "disk smooth density {g}");
    }

    #[test]
    fn quartic_potential_and_momentum() {
        let model = PotentialModel::quartic2d(0.6).unwrap();
        let v = model.evaluate_potential(&[1.0, 1.0]);
        assert!((v - 0.4).abs() < 1e-15, "V(1,1) = {v}");
        let p = model.classical_momentum(1.4, &[1.0, 1.0]).unwrap();
        assert!((p - (2.0f64).sqrt()).abs() < 1e-12, "p = {p}");
        assert!(model.classical_momentum(0.1, &[1.0, 1.0]).is_none());
        // billiard walls are forbidden territory
        let disk = PotentialModel::billiard(2, 1.0);
        assert!(disk.classical_momentum(10.0, &[1.5]).is_none());
        assert_eq!(disk.evaluate_potential(&[0.7]), 0.0);
    }

    #[test]
    fn spectrum_json_roundtrip() {
        let model = PotentialModel::billiard(2, 1.0);
        let sp = solve_spectrum(&model, 3).unwrap();
        let txt = serde_json::to_string(&sp.to_json()).unwrap();
        let back: serde_json::Value = serde_json::from_str(&txt).unwrap();
        assert_eq!(back["model"]["kind"], "billiard");
        assert_eq!(back["model"]["dim"], 2);
        assert_eq!(back["levels"].as_array().unwrap().len(), 3);
        let model_back: PotentialModel =
            serde_json::from_value(back["model"].clone()).unwrap();
        assert_eq!(model_back, model);
    }

    #[test]
    fn completeness_no_level_missing_below_cutoff() {
        // Independent recount: collect every Bessel zero below the last
        // solved level and compare orbit counts.
        let sp = solve_spectrum(&PotentialModel::billiard(2, 1.0), 40).unwrap();
        let z_last = sp.max_energy().sqrt();
        let mut orbitals = 0usize;
        for m in 0..(z_last as usize + 2) {
            let zs = bessel_j_zeros_upto(m, z_last + 1e-9);
            orbitals += zs.len() * if m == 0 { 1 } else { 2 };
        }
        let solved: usize = sp.levels.iter().map(|l| l.degeneracy).sum();
        assert_eq!(solved, orbitals, "disk spectrum misses levels below cutoff");
    }
}
