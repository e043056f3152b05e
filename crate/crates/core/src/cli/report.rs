//! Structured-text check report and CSV plot tables.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
        }
    }
}

/// One check: `value ≤ tolerance` passes.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub check: String,
    pub value: f64,
    pub tolerance: f64,
    pub status: Status,
    /// Law or identity exercised, or `plumbing`.
    pub tag: &'static str,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub notes: Vec<String>,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Report { command: command.into(), seed, ..Default::default() }
    }

    /// Records `value ≤ tolerance`. NaN fails.
    pub fn check(&mut self, check: &str, value: f64, tolerance: f64, tag: &'static str) {
        let status = if value <= tolerance { Status::Pass } else { Status::Fail };
        self.rows.push(Row { check: check.into(), value, tolerance, status, tag });
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.status == Status::Pass)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# reactive-time report");
        let _ = writeln!(out, "# command: {}", self.command);
        let _ = writeln!(out, "# seed: {}", self.seed);
        let _ = writeln!(
            out,
            "# units: energies in J, reactive energies in J/sr, reactive power in VAr (1 VAr = 1 J/sr)"
        );
        for n in &self.notes {
            let _ = writeln!(out, "# {n}");
        }
        let _ = writeln!(out, "check\tvalue\ttolerance\tstatus\ttag");
        for r in &self.rows {
            let _ = writeln!(out, "{}\t{:.6e}\t{:.3e}\t{}\t{}", r.check, r.value, r.tolerance, r.status.as_str(), r.tag);
        }
        let failed = self.rows.iter().filter(|r| r.status == Status::Fail).count();
        let _ = writeln!(out, "# {} checks, {} failed", self.rows.len(), failed);
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

pub const CSV_COLUMNS: [&str; 10] = ["s", "t", "U", "X", "abs_S", "abs_T", "P", "Q", "active_residual", "reactive_residual"];

/// Plot table with one row per `(s, t)`. Densities are spatial means over
/// the grid; residuals are the largest magnitude over interior nodes and
/// empty where no stencil applies.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlotTable {
    pub rows: Vec<[Option<f64>; 10]>,
}

impl PlotTable {
    pub fn render(&self) -> String {
        let mut out = CSV_COLUMNS.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.map_or_else(String::new, |x| format!("{:.12e}", x + 0.0))).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_fails_and_rows_render() {
        let mut r = Report::new("conserve", 7);
        r.check("a", 1e-3, 1e-2, "reactive-law");
        r.check("b", f64::NAN, 1.0, "plumbing");
        assert!(!r.passed());
        let text = r.render();
        assert!(text.contains("a\t1.000000e-3\t1.000e-2\tpass\treactive-law"));
        assert!(text.contains("\tFAIL\tplumbing"));
    }

    #[test]
    fn csv_leaves_missing_cells_empty() {
        let mut row = [Some(1.0); 10];
        row[8] = None;
        let t = PlotTable { rows: vec![row] }.render();
        assert_eq!(t.lines().count(), 2);
        assert!(t.lines().nth(1).unwrap().contains(",,"));
    }
}
