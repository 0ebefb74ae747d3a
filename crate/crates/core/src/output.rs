//! Result files: probe series, energy ledger, snapshots and run summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::mesh::{BoundaryLabel, StructuredMesh};
use crate::simulation::{RunResult, RunSummary};
use crate::solver::LedgerRow;

/// Cumulative energy ledger as CSV (J).
pub fn ledger_csv(labels: &[BoundaryLabel], rows: &[LedgerRow]) -> String {
    let mut s = String::from("time_s,E_input");
    for l in labels {
        write!(s, ",E_boundary_{l}").unwrap();
    }
    s.push_str(",E_stored,residual\n");
    for r in rows {
        write!(s, "{:?},{:?}", r.time, r.input).unwrap();
        for b in &r.boundary {
            write!(s, ",{b:?}").unwrap();
        }
        writeln!(s, ",{:?},{:?}", r.stored, r.residual).unwrap();
    }
    s
}

pub fn summary_text(s: &RunSummary) -> String {
    format!(
        "variant = {}\nactive_cells = {}\ndofs = {}\nsteps = {}\nsimulated_time_s = {}\nwall_clock_s = {:.3}\n\
         peak_temperature_degC = {}\nfinal_max_temperature_degC = {}\ncg_iterations = {}\n\
         max_picard_iterations = {}\nmax_relative_energy_residual = {:e}\ncooldown_stopped_early = {}\n",
        s.variant,
        s.n_cells,
        s.n_dofs,
        s.n_steps,
        s.simulated_time,
        s.wall_clock.as_secs_f64(),
        s.peak_temperature,
        s.final_max_temperature,
        s.total_cg_iterations,
        s.max_picard_iterations,
        s.max_relative_residual,
        s.cooldown_stopped_early
    )
}

/// Legacy ASCII VTK rectilinear grid with nodal temperatures and cell
/// region/active flags. Inactive nodes are written as NaN.
pub fn vtk_snapshot(mesh: &StructuredMesh, temperatures: &[f64], time: f64) -> String {
    let [nx, ny, nz] = mesh.node_dims();
    let mut s = String::new();
    writeln!(s, "# vtk DataFile Version 3.0\ntemperature at t = {time:?} s\nASCII\nDATASET RECTILINEAR_GRID").unwrap();
    writeln!(s, "DIMENSIONS {nx} {ny} {nz}").unwrap();
    for (name, c) in [("X", mesh.x()), ("Y", mesh.y()), ("Z", mesh.z())] {
        writeln!(s, "{name}_COORDINATES {} double", c.len()).unwrap();
        let line: Vec<String> = c.iter().map(|v| format!("{v:?}")).collect();
        writeln!(s, "{}", line.join(" ")).unwrap();
    }
    writeln!(
        s,
        "POINT_DATA {}\nSCALARS temperature double 1\nLOOKUP_TABLE default",
        mesh.n_nodes()
    )
    .unwrap();
    for t in temperatures {
        if t.is_nan() {
            s.push_str("nan\n");
        } else {
            writeln!(s, "{t:?}").unwrap();
        }
    }
    writeln!(
        s,
        "CELL_DATA {}\nSCALARS region int 1\nLOOKUP_TABLE default",
        mesh.n_cells()
    )
    .unwrap();
    for c in 0..mesh.n_cells() {
        writeln!(s, "{}", mesh.region(c).map_or(-1, |r| r.code())).unwrap();
    }
    s.push_str("SCALARS active int 1\nLOOKUP_TABLE default\n");
    for &a in mesh.active_flags() {
        writeln!(s, "{}", a as i32).unwrap();
    }
    s
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Output directory of a config loaded from `config_dir`, created on demand.
pub fn output_dir(config: &SimulationConfig, config_dir: &Path) -> Result<PathBuf> {
    let dir = SimulationConfig::resolve(config_dir, &config.output.directory);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

pub fn snapshot_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("snapshot_{step:06}.vtk"))
}

pub fn write_snapshot(
    path: &Path,
    mesh: &StructuredMesh,
    temperatures: &[f64],
    time: f64,
) -> Result<()> {
    write(path, &vtk_snapshot(mesh, temperatures, time))
}

/// Write probes, ledger and summary into `dir`; returns the written paths.
pub fn write_results(
    config: &SimulationConfig,
    dir: &Path,
    result: &RunResult,
) -> Result<Vec<PathBuf>> {
    let probes = dir.join(&config.output.probes);
    result.probes.write_csv(&probes)?;
    let ledger = dir.join(&config.output.ledger);
    write(&ledger, &ledger_csv(&result.ledger_labels, &result.ledger))?;
    let summary = dir.join(&config.output.summary);
    write(&summary, &summary_text(&result.summary))?;
    Ok(vec![probes, ledger, summary])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Region, Symmetry};

    #[test]
    fn ledger_header_lists_labels() {
        let rows = vec![LedgerRow {
            time: 1.0,
            input: 2.0,
            boundary: vec![0.5, 0.25],
            stored: 1.25,
            residual: 0.0,
        }];
        let s = ledger_csv(&[BoundaryLabel::AirPart, BoundaryLabel::Down], &rows);
        let mut lines = s.lines();
        assert_eq!(
            lines.next().unwrap(),
            "time_s,E_input,E_boundary_air_part,E_boundary_down,E_stored,residual"
        );
        assert_eq!(lines.next().unwrap(), "1.0,2.0,0.5,0.25,1.25,0.0");
    }

    #[test]
    fn vtk_counts_match_mesh() {
        let mesh = StructuredMesh::from_parts(
            vec![0.0, 1.0],
            vec![0.0, 1.0],
            vec![0.0, 0.5, 1.0],
            vec![Some(Region::Base), Some(Region::Part)],
            vec![None, Some(0)],
            1,
            Symmetry::default(),
        )
        .unwrap();
        let temps = vec![20.0; mesh.n_nodes()];
        let s = vtk_snapshot(&mesh, &temps, 0.0);
        assert!(s.contains("DIMENSIONS 2 2 3"));
        assert!(s.contains("POINT_DATA 12"));
        assert!(s.contains("CELL_DATA 2"));
    }
}
