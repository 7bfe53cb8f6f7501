use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Volterra,
    Talbot,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Volterra => "volterra",
            Method::Talbot => "talbot",
        }
    }
}

/// s_μ on the uniform grid t_j = j h, j = 0..=J.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarResolventTable {
    pub mu: f64,
    pub h: f64,
    pub values: Vec<f64>,
    pub method: Method,
    /// Richardson-type estimate of the maximal error on the grid.
    pub error_estimate: f64,
    pub kernel_id: String,
}

pub const CSV_HEADER: &str = "t,s_mu,method,mu,kernel_id";

impl ScalarResolventTable {
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.h * self.steps() as f64
    }

    pub fn time(&self, j: usize) -> f64 {
        self.h * j as f64
    }

    /// Index of `t` on the grid, or a grid-membership error.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t / self.h;
        let j = x.round();
        if !(j >= 0.0 && (x - j).abs() <= 1e-9 * x.abs().max(1.0) && (j as usize) < self.values.len()) {
            return Err(Error::Grid(format!("t = {t} is not a node of the grid with h = {} up to {}", self.h, self.horizon())));
        }
        Ok(j as usize)
    }

    pub fn value_at(&self, t: f64) -> Result<f64> {
        Ok(self.values[self.index_of(t)?])
    }

    /// Piecewise-linear interpolation inside the grid.
    pub fn interpolate(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.horizon() * (1.0 + 1e-12)).contains(&t) {
            return Err(Error::Grid(format!("t = {t} outside [0, {}]", self.horizon())));
        }
        let x = t / self.h;
        let j = (x.floor() as usize).min(self.steps().saturating_sub(1));
        let w = x - j as f64;
        Ok((1.0 - w) * self.values[j] + w * self.values[j + 1])
    }
}

/// Write tables as CSV with a schema line and the header
/// `t,s_mu,method,mu,kernel_id`.
pub fn write_tables_csv<W: Write>(tables: &[ScalarResolventTable], mut out: W) -> std::io::Result<()> {
    writeln!(out, "# schema=1")?;
    writeln!(out, "{CSV_HEADER}")?;
    for tab in tables {
        for (j, v) in tab.values.iter().enumerate() {
            writeln!(out, "{},{},{},{},{}", tab.time(j), v, tab.method.as_str(), tab.mu, tab.kernel_id)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ScalarResolventTable {
        ScalarResolventTable {
            mu: 1.0,
            h: 0.25,
            values: vec![1.0, 0.5, 0.0],
            method: Method::Volterra,
            error_estimate: 0.0,
            kernel_id: "sum:[{1;1;0}]".into(),
        }
    }

    #[test]
    fn grid_membership() {
        let t = table();
        assert_eq!(t.index_of(0.5).unwrap(), 2);
        assert_eq!(t.value_at(0.25).unwrap(), 0.5);
        assert!(matches!(t.index_of(0.3), Err(Error::Grid(_))));
        assert!(matches!(t.index_of(0.75), Err(Error::Grid(_))));
        assert!(t.index_of(-0.25).is_err());
        assert_eq!(t.interpolate(0.125).unwrap(), 0.75);
        assert!(t.interpolate(0.6).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_tables_csv(&[table()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# schema=1");
        assert_eq!(lines[1], CSV_HEADER);
        assert_eq!(lines[2], "0,1,volterra,1,sum:[{1;1;0}]");
        assert_eq!(lines.len(), 5);
    }
}
