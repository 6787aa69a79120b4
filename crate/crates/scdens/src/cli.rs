//! Configuration-driven front end: parses a declarative TOML run
//! description, wires models, occupation schemes, and diagnostics
//! together, and emits reproducible CSV curves plus a JSON manifest.
//!
//! All numeric output uses fixed summation orders and a seeded generator
//! for spot checks, so re-running a config byte-reproduces every artifact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closed_orbits::{
    friedel_plus_density, integrate_friedel_deficit, lvt_check, tf_functional_check,
    InteriorWindow,
};
use crate::correlations::{
    bcs_energy_via_folding, modulated_trace_formula, numeric_fourier, FoldingKernel, PoCatalog,
    TraceTarget,
};
use crate::error::{Error, Result};
use crate::grid::{DensityField, Grid};
use crate::qm_densities::{
    density, thermo_report, DensityKind, OccupationScheme, ThermoReport,
};
use crate::smooth_tf::{rho_tf, smooth_fermi_level, tau_tf, weyl_surface_deficit, CountingMode};
use crate::spectra::{smooth_level_density, solve_spectrum, EnergySpectrum, PotentialModel};

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "SCDENS_OUTPUT_DIR";

/// Model section of a run config. Mirrors [`PotentialModel`] but leaves
/// `hbar`/`mass` optional so configs inherit each model's unit convention
/// (hbar = mass = 1; billiards use mass = 1/2).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Box1d {
        length: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hbar: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mass: Option<f64>,
    },
    Harmonic {
        frequencies: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hbar: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mass: Option<f64>,
    },
    Billiard {
        dim: usize,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hbar: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mass: Option<f64>,
    },
    Quartic2d {
        kappa: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hbar: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mass: Option<f64>,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<PotentialModel> {
        let (model, hbar, mass) = match self {
            ModelSpec::Box1d { length, hbar, mass } => {
                if !(*length > 0.0) {
                    return Err(Error::Config(format!(
                        "model.length: must be > 0, got {length}"
                    )));
                }
                (PotentialModel::box1d(*length), hbar, mass)
            }
            ModelSpec::Harmonic {
                frequencies,
                hbar,
                mass,
            } => {
                if frequencies.is_empty() || frequencies.len() > 3 {
                    return Err(Error::Config(format!(
                        "model.frequencies: need 1-3 entries, got {}",
                        frequencies.len()
                    )));
                }
                if frequencies.iter().any(|w| !(*w > 0.0)) {
                    return Err(Error::Config(
                        "model.frequencies: all entries must be > 0".into(),
                    ));
                }
                (PotentialModel::harmonic(frequencies), hbar, mass)
            }
            ModelSpec::Billiard {
                dim,
                radius,
                hbar,
                mass,
            } => {
                if !(1..=3).contains(dim) {
                    return Err(Error::Config(format!(
                        "model.dim: billiards are 1-3 dimensional, got {dim}"
                    )));
                }
                if !(*radius > 0.0) {
                    return Err(Error::Config(format!(
                        "model.radius: must be > 0, got {radius}"
                    )));
                }
                (PotentialModel::billiard(*dim, *radius), hbar, mass)
            }
            ModelSpec::Quartic2d { kappa, hbar, mass } => {
                if !(*kappa < 1.0) {
                    return Err(Error::Config(format!(
                        "model.kappa: the quartic trap confines only for kappa < 1, got {kappa}"
                    )));
                }
                (PotentialModel::quartic2d(*kappa)?, hbar, mass)
            }
        };
        match (hbar, mass) {
            (None, None) => Ok(model),
            (h, m) => {
                let h = h.unwrap_or_else(|| model.hbar());
                let m = m.unwrap_or_else(|| model.mass());
                if !(h > 0.0 && m > 0.0) {
                    return Err(Error::Config(format!(
                        "model.hbar/model.mass: must be > 0, got {h} and {m}"
                    )));
                }
                Ok(model.with_units(h, m))
            }
        }
    }
}

/// A requested output curve or check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Diagnostic {
    /// Quantum density plus its smooth background (and the wall-orbit
    /// oscillation for billiards).
    Density,
    /// Local-virial residual delta-tau vs (lambda - V) delta-rho.
    Lvt,
    /// Kinetic density vs the functional of the quantum density.
    TfFunctional,
    /// Wall-orbit density oscillation and its integrated surface deficit.
    Friedel,
    /// Kernel-damped periodic-orbit level-density oscillation over the
    /// grid's parameter range read as energies.
    Trace,
    /// Numerical vs closed-form kernel Fourier transform.
    FoldingValidate,
}

impl Diagnostic {
    fn name(&self) -> &'static str {
        match self {
            Diagnostic::Density => "density",
            Diagnostic::Lvt => "lvt",
            Diagnostic::TfFunctional => "tf-functional",
            Diagnostic::Friedel => "friedel",
            Diagnostic::Trace => "trace",
            Diagnostic::FoldingValidate => "folding-validate",
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("scdens-out")
}

/// One reproducible run: a model, a particle number, an occupation scheme,
/// a spatial (or spectral) grid, and the diagnostics to emit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub n_particles: usize,
    pub scheme: OccupationScheme,
    pub grid: Grid,
    pub diagnostics: Vec<Diagnostic>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Seed for the spot-check sampler recorded in the manifest.
    #[serde(default)]
    pub seed: u64,
    /// Number of levels to solve; grown automatically when omitted until
    /// occupation tails certify.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_levels: Option<usize>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Checks every declarative invariant, reporting all violations at
    /// once, each message naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n_particles < 2 || self.n_particles % 2 != 0 {
            problems.push(format!(
                "n_particles: must be even and >= 2, got {}",
                self.n_particles
            ));
        }
        if let Err(e) = self.model.build() {
            problems.push(e.to_string());
        }
        match self.scheme {
            OccupationScheme::ZeroT => {}
            OccupationScheme::Thermal { temperature } => {
                if !(temperature > 0.0) {
                    problems.push(format!(
                        "scheme.temperature: must be > 0, got {temperature}"
                    ));
                }
            }
            OccupationScheme::Bcs { gap, window } => {
                if !(gap > 0.0) {
                    problems.push(format!("scheme.gap: must be > 0, got {gap}"));
                }
                if window < 0.0 {
                    problems.push(format!("scheme.window: must be >= 0, got {window}"));
                }
            }
        }
        if let Err(e) = self.grid.validate() {
            problems.push(format!("grid: {e}"));
        }
        if self.diagnostics.is_empty() {
            problems.push("diagnostics: need at least one".into());
        }
        let needs_kernel = [Diagnostic::Trace, Diagnostic::FoldingValidate];
        for d in &self.diagnostics {
            if needs_kernel.contains(d) && matches!(self.scheme, OccupationScheme::ZeroT) {
                problems.push(format!(
                    "diagnostics: {} needs a thermal or bcs scheme",
                    d.name()
                ));
            }
        }
        if self.diagnostics.contains(&Diagnostic::Friedel) {
            if !matches!(self.model, ModelSpec::Billiard { .. }) {
                problems.push("diagnostics: friedel needs a billiard model".into());
            }
        }
        if self.diagnostics.contains(&Diagnostic::Trace) {
            let supported = matches!(self.model, ModelSpec::Box1d { .. })
                || matches!(&self.model, ModelSpec::Harmonic { frequencies, .. } if frequencies.len() == 1);
            if !supported {
                problems.push(
                    "diagnostics: trace has periodic-orbit catalogs for box1d and 1d harmonic models only"
                        .into(),
                );
            }
            if self.grid.start() <= 0.0 {
                problems.push(
                    "grid.start: trace reads grid parameters as energies and needs start > 0"
                        .into(),
                );
            }
        }
        if let Some(n_levels) = self.n_levels {
            if n_levels < self.n_particles / 2 {
                problems.push(format!(
                    "n_levels: {n_levels} cannot hold {} particles",
                    self.n_particles
                ));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    fn kernel(&self) -> Result<FoldingKernel> {
        match self.scheme {
            OccupationScheme::Thermal { temperature } => FoldingKernel::thermal(temperature),
            OccupationScheme::Bcs { gap, .. } => FoldingKernel::pairing(gap),
            OccupationScheme::ZeroT => Err(Error::Config(
                "this diagnostic needs a thermal or bcs scheme".into(),
            )),
        }
    }
}

/// Everything a finished run leaves behind.
#[derive(Debug)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    /// CSV files, in the order written.
    pub files: Vec<PathBuf>,
    pub manifest_path: PathBuf,
    pub manifest: serde_json::Value,
}

/// Parse, validate, and execute a config file.
pub fn run(config_path: &Path) -> Result<RunOutcome> {
    let cfg = RunConfig::from_path(config_path)?;
    cfg.validate()?;
    execute(&cfg)
}

fn resolve_output_dir(cfg: &RunConfig) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => cfg.output_dir.clone(),
    }
}

fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, &path)?;
    Ok(path)
}

fn csv_table(meta: &BTreeMap<String, String>, header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::from("#");
    for (k, v) in meta {
        let _ = write!(out, " {k}={v}");
    }
    out.push('\n');
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Solve the spectrum with enough levels for the scheme's tails to
/// certify, growing the count when the config leaves it automatic.
fn solve_certified(
    cfg: &RunConfig,
    model: &PotentialModel,
) -> Result<(EnergySpectrum, ThermoReport, usize)> {
    let mut count = cfg.n_levels.unwrap_or(cfg.n_particles + 128);
    let cap = 16 * (cfg.n_particles + 128);
    loop {
        let spectrum = solve_spectrum(model, count)?;
        match thermo_report(&spectrum, &cfg.scheme, cfg.n_particles) {
            Ok(report) => return Ok((spectrum, report, count)),
            Err(Error::SpectrumTooShort(_)) if cfg.n_levels.is_none() && count < cap => {
                count *= 2;
            }
            Err(e) => return Err(e),
        }
    }
}

fn td_field(
    model: &PotentialModel,
    lambda_tilde: f64,
    grid: &Grid,
    kind: DensityKind,
) -> Result<DensityField> {
    let (name, f): (&str, fn(&PotentialModel, f64, &[f64]) -> f64) = match kind {
        DensityKind::Rho => ("rho_tf", rho_tf),
        DensityKind::Tau | DensityKind::Tau1 => ("tau_tf", tau_tf),
    };
    let values: Vec<f64> = grid
        .params()
        .iter()
        .map(|&t| f(model, lambda_tilde, &grid.embed(t)))
        .collect();
    Ok(DensityField::new(grid.clone(), name, values)
        .with_meta("lambda_tilde", format!("{lambda_tilde:.16e}")))
}

struct Workspace<'a> {
    cfg: &'a RunConfig,
    model: PotentialModel,
    spectrum: EnergySpectrum,
    report: ThermoReport,
    lambda_tilde: f64,
    counting: CountingMode,
    out_dir: PathBuf,
    files: Vec<PathBuf>,
    artifacts: Vec<serde_json::Value>,
    rng: ChaCha8Rng,
}

impl Workspace<'_> {
    fn emit(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = write_atomic(&self.out_dir, name, contents)?;
        self.files.push(path);
        Ok(())
    }

    fn record(&mut self, diag: Diagnostic, files: &[&str], summary: serde_json::Value) {
        self.artifacts.push(serde_json::json!({
            "diagnostic": diag.name(),
            "files": files,
            "summary": summary,
        }));
    }

    /// Spot-check a few window points so the manifest carries directly
    /// re-checkable numbers; positions depend only on the seed.
    fn sample_points(
        &mut self,
        residual: &DensityField,
        reference: &DensityField,
    ) -> serde_json::Value {
        let n = residual.values.len();
        let picks: Vec<serde_json::Value> = (0..5)
            .map(|_| {
                let i = self.rng.gen_range(0..n);
                serde_json::json!({
                    "param": residual.grid.param(i),
                    "residual": residual.values[i],
                    "reference": reference.values[i],
                })
            })
            .collect();
        serde_json::Value::Array(picks)
    }

    fn quantum_field(&self, kind: DensityKind) -> Result<DensityField> {
        density(
            &self.spectrum,
            &self.cfg.scheme,
            self.report.lambda,
            &self.cfg.grid,
            kind,
        )
    }

    fn plus_rows(&self) -> Result<Vec<Vec<f64>>> {
        let mut rows = Vec::new();
        for &r in &self.cfg.grid.params() {
            if r <= 0.0 {
                continue;
            }
            match friedel_plus_density(&self.model, self.lambda_tilde, r) {
                Ok(v) => rows.push(vec![r, v]),
                // Points under the near-center evaluation floor are skipped
                // rather than written as placeholders.
                Err(Error::Domain(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(rows)
    }

    fn run_density(&mut self) -> Result<()> {
        let rho_qm = self.quantum_field(DensityKind::Rho)?;
        let rho_bg = td_field(&self.model, self.lambda_tilde, &self.cfg.grid, DensityKind::Rho)?;
        self.emit("density_qm.csv", &rho_qm.to_csv())?;
        self.emit("density_tf.csv", &rho_bg.to_csv())?;
        let mut files = vec!["density_qm.csv", "density_tf.csv"];
        if matches!(self.model, PotentialModel::Billiard { .. }) {
            let rows = self.plus_rows()?;
            let meta = BTreeMap::from([
                ("curve".to_string(), "friedel_plus".to_string()),
                (
                    "lambda_tilde".to_string(),
                    format!("{:.16e}", self.lambda_tilde),
                ),
            ]);
            self.emit("density_plus.csv", &csv_table(&meta, &["r", "drho_plus"], &rows))?;
            files.push("density_plus.csv");
        }
        let max_qm = rho_qm.max_abs();
        self.record(
            Diagnostic::Density,
            &files,
            serde_json::json!({ "max_abs_rho_qm": max_qm }),
        );
        Ok(())
    }

    fn run_lvt(&mut self) -> Result<()> {
        let model = self.model.clone();
        let lt = self.lambda_tilde;
        let rho_qm = self.quantum_field(DensityKind::Rho)?;
        let tau_qm = self.quantum_field(DensityKind::Tau)?;
        let grid = self.cfg.grid.clone();
        let drho = rho_qm.map("drho", |t, v| v - rho_tf(&model, lt, &grid.embed(t)));
        let dtau = tau_qm.map("dtau", |t, v| v - tau_tf(&model, lt, &grid.embed(t)));
        let window = InteriorWindow::standard(&model, lt);
        let check = lvt_check(&dtau, &drho, &model, lt, &window)?;
        self.emit("lvt_residual.csv", &check.residual.to_csv())?;
        self.emit("lvt_reference.csv", &check.reference.to_csv())?;
        let samples = self.sample_points(&check.residual, &check.reference);
        self.record(
            Diagnostic::Lvt,
            &["lvt_residual.csv", "lvt_reference.csv"],
            serde_json::json!({
                "window": { "max_ratio": check.summary.max_ratio,
                            "rms_ratio": check.summary.rms_ratio,
                            "points_used": check.summary.points_used },
                "samples": samples,
            }),
        );
        Ok(())
    }

    fn run_tf_functional(&mut self) -> Result<()> {
        let rho_qm = self.quantum_field(DensityKind::Rho)?;
        let tau_qm = self.quantum_field(DensityKind::Tau)?;
        let window = InteriorWindow::standard(&self.model, self.lambda_tilde);
        let check = tf_functional_check(&rho_qm, &tau_qm, &self.model, self.lambda_tilde, &window)?;
        self.emit("tau_qm.csv", &tau_qm.to_csv())?;
        self.emit("tau_tf_of_rho.csv", &check.reference.to_csv())?;
        self.emit("tf_residual.csv", &check.residual.to_csv())?;
        let samples = self.sample_points(&check.residual, &check.reference);
        self.record(
            Diagnostic::TfFunctional,
            &["tau_qm.csv", "tau_tf_of_rho.csv", "tf_residual.csv"],
            serde_json::json!({
                "window": { "max_ratio": check.summary.max_ratio,
                            "rms_ratio": check.summary.rms_ratio,
                            "points_used": check.summary.points_used },
                "samples": samples,
            }),
        );
        Ok(())
    }

    fn run_friedel(&mut self) -> Result<()> {
        let rows = self.plus_rows()?;
        let meta = BTreeMap::from([
            ("curve".to_string(), "friedel_plus".to_string()),
            (
                "lambda_tilde".to_string(),
                format!("{:.16e}", self.lambda_tilde),
            ),
        ]);
        self.emit("friedel_plus.csv", &csv_table(&meta, &["r", "drho_plus"], &rows))?;
        let numeric = integrate_friedel_deficit(&self.model, self.lambda_tilde)?;
        let weyl = weyl_surface_deficit(&self.model, self.lambda_tilde)?;
        self.record(
            Diagnostic::Friedel,
            &["friedel_plus.csv"],
            serde_json::json!({
                "deficit_numeric": numeric,
                "deficit_weyl": weyl,
                "relative_error": (numeric - weyl).abs() / weyl.abs(),
            }),
        );
        Ok(())
    }

    fn run_trace(&mut self) -> Result<()> {
        let kernel = self.cfg.kernel()?;
        let hbar = self.model.hbar();
        let catalog = match &self.model {
            PotentialModel::Box1d { length, hbar, mass } => PoCatalog::Box1d {
                length: *length,
                hbar: *hbar,
                mass: *mass,
                k_max: 24,
            },
            PotentialModel::Harmonic {
                frequencies, hbar, ..
            } => PoCatalog::Harmonic1d {
                omega: frequencies[0],
                hbar: *hbar,
                k_max: 24,
            },
            other => {
                return Err(Error::Unsupported(format!(
                    "no periodic-orbit catalog for a {} model",
                    other.kind_name()
                )))
            }
        };
        let mut rows = Vec::new();
        for &e in &self.cfg.grid.params() {
            let orbits = catalog.orbits_at(e)?;
            let dg = modulated_trace_formula(&orbits, &kernel, hbar, TraceTarget::LevelDensity)?;
            rows.push(vec![e, dg, smooth_level_density(&self.model, e)]);
        }
        let meta = BTreeMap::from([
            ("kernel".to_string(), kernel.label()),
            ("orbits".to_string(), "k<=24".to_string()),
        ]);
        self.emit(
            "trace_delta_g.csv",
            &csv_table(&meta, &["energy", "delta_g", "g_smooth"], &rows),
        )?;
        let max_dg = rows.iter().map(|r| r[1].abs()).fold(0.0, f64::max);
        self.record(
            Diagnostic::Trace,
            &["trace_delta_g.csv"],
            serde_json::json!({ "kernel": kernel.label(), "max_abs_delta_g": max_dg }),
        );
        Ok(())
    }

    fn run_folding_validate(&mut self) -> Result<()> {
        let kernel = self.cfg.kernel()?;
        let tau_max = 20.0 / kernel.scale();
        let mut rows = Vec::new();
        let mut max_err = 0.0f64;
        for i in 0..50 {
            let tau = tau_max * i as f64 / 49.0;
            let closed = kernel.fourier(tau);
            let numeric = numeric_fourier(&kernel, tau)?;
            let err = (numeric - closed).abs();
            max_err = max_err.max(err);
            rows.push(vec![tau, closed, numeric, err]);
        }
        let meta = BTreeMap::from([("kernel".to_string(), kernel.label())]);
        self.emit(
            "kernel_fourier.csv",
            &csv_table(&meta, &["tau", "closed_form", "numeric", "abs_err"], &rows),
        )?;
        self.record(
            Diagnostic::FoldingValidate,
            &["kernel_fourier.csv"],
            serde_json::json!({ "max_abs_err": max_err, "threshold": 1e-6,
                                "passed": max_err <= 1e-6 }),
        );
        Ok(())
    }
}

/// Execute an already-validated config.
pub fn execute(cfg: &RunConfig) -> Result<RunOutcome> {
    let model = cfg.model.build()?;
    let out_dir = resolve_output_dir(cfg);
    std::fs::create_dir_all(&out_dir)?;
    let (spectrum, report, n_levels) = solve_certified(cfg, &model)?;
    // Hard walls carry a surface term in the smooth counting; smooth traps
    // use the phase-space volume alone.
    let counting = match model {
        PotentialModel::Box1d { .. } | PotentialModel::Billiard { .. } => {
            CountingMode::WithSurface
        }
        _ => CountingMode::VolumeOnly,
    };
    let smooth = smooth_fermi_level(&model, cfg.n_particles, counting)?;
    let mut ws = Workspace {
        cfg,
        model,
        spectrum,
        report,
        lambda_tilde: smooth.lambda,
        counting,
        out_dir,
        files: Vec::new(),
        artifacts: Vec::new(),
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
    };
    for diag in &cfg.diagnostics {
        match diag {
            Diagnostic::Density => ws.run_density()?,
            Diagnostic::Lvt => ws.run_lvt()?,
            Diagnostic::TfFunctional => ws.run_tf_functional()?,
            Diagnostic::Friedel => ws.run_friedel()?,
            Diagnostic::Trace => ws.run_trace()?,
            Diagnostic::FoldingValidate => ws.run_folding_validate()?,
        }
    }
    let manifest = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "model": ws.model,
        "n_particles": cfg.n_particles,
        "scheme": cfg.scheme.label(),
        "grid": cfg.grid,
        "seed": cfg.seed,
        "lambda": ws.report.lambda,
        "lambda_tilde": ws.lambda_tilde,
        "delta_lambda": ws.report.lambda - ws.lambda_tilde,
        "counting_mode": ws.counting,
        "truncation": {
            "n_levels": n_levels,
            "max_level_energy": ws.spectrum.max_energy(),
            "occupation_tail_bound": ws.report.occupation_tail_bound,
        },
        "thermo": ws.report,
        "artifacts": ws.artifacts,
    });
    let manifest_text = serde_json::to_string_pretty(&manifest)?;
    // The manifest is written last: its presence marks a complete run.
    let manifest_path = write_atomic(&ws.out_dir, "manifest.json", &manifest_text)?;
    Ok(RunOutcome {
        output_dir: ws.out_dir,
        files: ws.files,
        manifest_path,
        manifest,
    })
}

/// Parse and validate a config, solve its spectrum, and write it as JSON
/// next to where a run would put its curves.
pub fn export_spectrum(config_path: &Path) -> Result<PathBuf> {
    let cfg = RunConfig::from_path(config_path)?;
    cfg.validate()?;
    let model = cfg.model.build()?;
    let out_dir = resolve_output_dir(&cfg);
    std::fs::create_dir_all(&out_dir)?;
    let (spectrum, report, n_levels) = solve_certified(&cfg, &model)?;
    let doc = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "n_particles": cfg.n_particles,
        "n_levels": n_levels,
        "lambda": report.lambda,
        "scheme": cfg.scheme.label(),
        "spectrum": spectrum.to_json(),
    });
    write_atomic(&out_dir, "spectrum.json", &serde_json::to_string_pretty(&doc)?)
}

/// One entry of the oracle-check report.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// The measured figure the threshold applies to (a relative error or
    /// residual ratio; NaN when the check errored out).
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

/// Result of [`validate_suite`]: cross-module consistency checks with
/// measured values against pinned thresholds.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<20} measured {:>12.4e}  threshold {:.1e}  [{}]",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.threshold,
                c.detail
            )?;
        }
        writeln!(
            f,
            "{}/{} checks passed",
            self.checks.iter().filter(|c| c.passed).count(),
            self.checks.len()
        )
    }
}

fn check(
    checks: &mut Vec<CheckOutcome>,
    name: &'static str,
    threshold: f64,
    body: impl FnOnce() -> Result<(f64, String)>,
) {
    match body() {
        Ok((measured, detail)) => checks.push(CheckOutcome {
            name,
            passed: measured <= threshold,
            measured,
            threshold,
            detail,
        }),
        Err(e) => checks.push(CheckOutcome {
            name,
            passed: false,
            measured: f64::NAN,
            threshold,
            detail: format!("errored: {e}"),
        }),
    }
}

/// Run the built-in cross-module oracle checks: dual-formulation free and
/// BCS energies, kernel Fourier transforms, Weyl surface deficits, and
/// local-virial window summaries. Failures become report entries, never
/// panics or errors.
pub fn validate_suite() -> ValidationReport {
    let mut checks = Vec::new();
    let box_model = PotentialModel::box1d(std::f64::consts::PI).with_units(1.0, 0.5);

    check(&mut checks, "dual-free-energy", 1e-8, || {
        let sp = solve_spectrum(&box_model, 60)?;
        let mut worst = 0.0f64;
        for t in [1.0, 5.0, 20.0] {
            let scheme = OccupationScheme::thermal(t);
            let report = thermo_report(&sp, &scheme, 20)?;
            let folded =
                crate::correlations::free_energy_via_folding(&sp, t, report.lambda)?;
            worst = worst.max((folded - report.free_energy).abs() / report.free_energy.abs());
        }
        Ok((worst, "box L=pi, N=20, T in {1, 5, 20}".into()))
    });

    check(&mut checks, "dual-bcs-energy", 1e-8, || {
        let sp = solve_spectrum(&box_model, 60)?;
        let mut worst = 0.0f64;
        for gap in [1.0, 3.0] {
            let scheme = OccupationScheme::bcs(gap);
            let report = thermo_report(&sp, &scheme, 20)?;
            let direct = report.e_bcs.expect("bcs scheme reports E_BCS");
            let folded = bcs_energy_via_folding(&sp, &scheme, report.lambda)?;
            worst = worst.max((folded - direct).abs() / direct.abs());
        }
        Ok((worst, "box L=pi, N=20, gap in {1, 3}".into()))
    });

    check(&mut checks, "thermal-fourier", 1e-6, || {
        let kernel = FoldingKernel::thermal(1.5)?;
        let mut worst = 0.0f64;
        for i in 0..50 {
            let tau = (20.0 / 1.5) * i as f64 / 49.0;
            worst = worst.max((numeric_fourier(&kernel, tau)? - kernel.fourier(tau)).abs());
        }
        Ok((worst, "T = 1.5, 50 points, tau in [0, 20/T]".into()))
    });

    check(&mut checks, "pairing-fourier", 1e-6, || {
        let kernel = FoldingKernel::pairing(1.0)?;
        let mut worst = 0.0f64;
        for i in 0..50 {
            let tau = 20.0 * i as f64 / 49.0;
            worst = worst.max((numeric_fourier(&kernel, tau)? - kernel.fourier(tau)).abs());
        }
        Ok((worst, "gap = 1, 50 points, tau in [0, 20/gap]".into()))
    });

    for (name, dim, lambda) in [
        ("weyl-deficit-1d", 1usize, 50.0),
        ("weyl-deficit-2d", 2, 1600.0),
        ("weyl-deficit-3d", 3, 8100.0),
    ] {
        check(&mut checks, name, 1e-2, || {
            let model = PotentialModel::billiard(dim, 1.0);
            let numeric = integrate_friedel_deficit(&model, lambda)?;
            let weyl = weyl_surface_deficit(&model, lambda)?;
            Ok((
                (numeric - weyl).abs() / weyl.abs(),
                format!("lambda = {lambda}, deficit {numeric:.6} vs {weyl:.6}"),
            ))
        });
    }

    for (name, model, grid) in [
        (
            "lvt-box",
            box_model.clone(),
            Grid::line(0.0, std::f64::consts::PI, 801),
        ),
        (
            "lvt-harmonic",
            PotentialModel::harmonic(&[1.0]),
            Grid::line(-4.5, 4.5, 801),
        ),
    ] {
        check(&mut checks, name, 0.15, || {
            let n = 20usize;
            let sp = solve_spectrum(&model, n + 60)?;
            let scheme = OccupationScheme::zero_t();
            let report = thermo_report(&sp, &scheme, n)?;
            let counting = match model {
                PotentialModel::Box1d { .. } => CountingMode::WithSurface,
                _ => CountingMode::VolumeOnly,
            };
            let lt = smooth_fermi_level(&model, n, counting)?.lambda;
            let rho_qm = density(&sp, &scheme, report.lambda, &grid, DensityKind::Rho)?;
            let tau_qm = density(&sp, &scheme, report.lambda, &grid, DensityKind::Tau)?;
            let m = model.clone();
            let drho = rho_qm.map("drho", |t, v| v - rho_tf(&m, lt, &grid.embed(t)));
            let dtau = tau_qm.map("dtau", |t, v| v - tau_tf(&m, lt, &grid.embed(t)));
            let window = InteriorWindow::standard(&model, lt);
            let chk = lvt_check(&dtau, &drho, &model, lt, &window)?;
            Ok((
                chk.summary.max_ratio,
                format!("N = 20, {} interior points", chk.summary.points_used),
            ))
        });
    }

    ValidationReport { checks }
}
