//! Orbit catalogs as data: tabulated closed-orbit families load from JSON
//! and drive the same oscillation sums as the built-in wall orbit, and
//! periodic-orbit catalogs for the energy-domain sums round-trip the same
//! way. Catalogs declare their validity (sampling grid, Fermi level, or
//! energy) and refuse requests outside it.

use scdens::closed_orbits::{semiclassical_density_sum, OrbitCatalog};
use scdens::correlations::{modulated_density, FoldingKernel, PoCatalog};
use scdens::grid::Grid;
use scdens::qm_densities::DensityKind;
use scdens::spectra::PotentialModel;
use serde_json::json;

fn main() -> scdens::Result<()> {
    let model = PotentialModel::billiard(2, 1.0);
    let lt = 230.0;
    let builtin = OrbitCatalog::billiard_plus(&model)?;
    let grid = Grid::radial(0.50, 0.95, 10);

    // Tabulate the built-in wall orbit on the grid and write it back out as
    // the JSON schema a catalog file uses.
    let points = grid.params();
    let (mut s, mut t, mut a) = (vec![], vec![], vec![]);
    for &r in &points {
        let orbit = &builtin.orbits_at(lt, r)?[0];
        s.push(orbit.action);
        t.push(orbit.period);
        a.push(orbit.amplitude);
    }
    let text = serde_json::to_string_pretty(&json!({
        "lambda": lt,
        "dim": 2,
        "hbar": 1.0,
        "points": points,
        "orbits": [{ "label": "+", "mu": 2, "S": s, "T": t, "A": a }],
    }))?;
    println!("catalog file ({} bytes):\n{}\n...", text.len(), &text[..200]);

    let loaded = OrbitCatalog::from_json_str(&text)?;
    let direct = semiclassical_density_sum(&builtin, lt, &grid, DensityKind::Rho, None)?;
    let from_file = semiclassical_density_sum(&loaded, lt, &grid, DensityKind::Rho, None)?;
    let worst = direct
        .values
        .iter()
        .zip(&from_file.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    println!();
    println!("built-in vs loaded oscillation sum, worst |diff| = {worst:.2e}");

    // Validity is enforced, not assumed.
    let off_grid = loaded.orbits_at(lt, 0.7321);
    println!("off-grid point:  {}", off_grid.unwrap_err());
    let no_q = semiclassical_density_sum(&loaded, lt, &grid, DensityKind::Tau1, None);
    println!("tau1 without Q:  {}", no_q.unwrap_err());

    // Same density sum with each orbit damped by a thermal window: the wall
    // orbit shortens as r -> R, so oscillations survive heating only there.
    let kernel = FoldingKernel::thermal(16.0)?;
    let hot = modulated_density(&builtin, &kernel, lt, &grid, DensityKind::Rho)?;
    println!();
    println!("{:>6} {:>10} {:>10} {:>9}", "r", "cold", "T = 16", "survival");
    for i in (0..grid.len()).step_by(3) {
        println!(
            "{:>6.3} {:>10.5} {:>10.5} {:>9.3}",
            grid.param(i),
            direct.values[i],
            hot.values[i],
            hot.values[i] / direct.values[i]
        );
    }

    // Energy-domain catalogs: an explicit orbit list pinned to one energy.
    let po_text = serde_json::to_string(&json!({
        "kind": "explicit",
        "energy": 110.25,
        "orbits": [
            { "label": "k=1", "S": 65.97, "T": 0.2992, "sigma": 4, "A": 0.0952 },
        ],
    }))?;
    let po = PoCatalog::from_json_str(&po_text)?;
    println!();
    println!("explicit periodic-orbit catalog: {} orbit(s) at E = 110.25", po.orbits_at(110.25)?.len());
    println!("wrong energy:    {}", po.orbits_at(200.0).unwrap_err());
    Ok(())
}
