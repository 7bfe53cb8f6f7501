use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::json;

use super::solver::MildSolution;
use crate::error::Result;

pub const SOLUTION_CSV_HEADER: &str = "t,norm_X1,norm_X1pe,weighted_profile,status";

pub fn write_solution_csv<W: Write>(sol: &MildSolution, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# schema=1")?;
    writeln!(out, "{SOLUTION_CSV_HEADER}")?;
    let profile = sol.weighted_profile();
    let status = sol.status.label();
    for j in 0..sol.times.len() {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{status}",
            sol.times[j], sol.norms_x1[j], sol.norms_x1pe[j], profile[j]
        )?;
    }
    Ok(())
}

/// Raw coefficients as little-endian f64, modes-major and time-minor, plus a
/// JSON sidecar (same stem, `.json`) describing the layout.
pub fn write_coefficient_dump(sol: &MildSolution, path: &Path) -> Result<()> {
    let n_modes = sol.operator().len();
    let n_times = sol.times.len();
    let mut out = BufWriter::new(File::create(path)?);
    for m in 0..n_modes {
        for u in &sol.states {
            out.write_all(&u[m].to_le_bytes())?;
        }
    }
    out.flush()?;
    let sidecar = json!({
        "dtype": "float64",
        "byte_order": "little",
        "layout": "modes-major, time-minor",
        "shape": [n_modes, n_times],
        "n_modes": sol.operator().config().n_modes,
        "h": sol.h,
        "times": sol.times,
        "status": sol.status,
    });
    std::fs::write(path.with_extension("json"), serde_json::to_string_pretty(&sidecar).map_err(std::io::Error::other)?)?;
    Ok(())
}
