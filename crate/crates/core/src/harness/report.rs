//! RMSE report rows and CSV output.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::harness::config::Scheme;

/// Column order of every CSV this crate writes.
pub const CSV_COLUMNS: [&str; 12] = [
    "scheme",
    "V",
    "L",
    "ev_n0_db",
    "gain_rmse_theory_db",
    "gain_rmse_sim_db",
    "gain_rmse_sim_stderr",
    "phase_rmse_theory_deg",
    "phase_rmse_sim_deg",
    "phase_rmse_sim_stderr",
    "trials",
    "seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RmseRow {
    pub scheme: Scheme,
    pub elements: usize,
    pub code_length: usize,
    pub ev_n0_db: f64,
    pub gain_rmse_theory_db: f64,
    pub gain_rmse_sim_db: f64,
    pub gain_rmse_sim_stderr: f64,
    pub phase_rmse_theory_deg: f64,
    pub phase_rmse_sim_deg: f64,
    pub phase_rmse_sim_stderr: f64,
    pub trials: usize,
    pub seed: u64,
}

impl RmseRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.scheme,
            self.elements,
            self.code_length,
            self.ev_n0_db,
            self.gain_rmse_theory_db,
            self.gain_rmse_sim_db,
            self.gain_rmse_sim_stderr,
            self.phase_rmse_theory_deg,
            self.phase_rmse_sim_deg,
            self.phase_rmse_sim_stderr,
            self.trials,
            self.seed
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RmseReport {
    /// Lines emitted before the column header, each prefixed with `# `.
    pub comments: Vec<String>,
    pub rows: Vec<RmseRow>,
}

impl RmseReport {
    pub fn new(rows: Vec<RmseRow>) -> Self {
        Self {
            comments: Vec::new(),
            rows,
        }
    }

    pub fn extend(&mut self, other: RmseReport) {
        self.rows.extend(other.rows);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            writeln!(out, "# {c}").unwrap();
        }
        out.push_str(&CSV_COLUMNS.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_line());
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    /// Rows of one scheme and code length, in report order.
    pub fn series(&self, scheme: Scheme, code_length: usize) -> Vec<&RmseRow> {
        self.rows
            .iter()
            .filter(|r| r.scheme == scheme && r.code_length == code_length)
            .collect()
    }
}
