//! Machine-readable report types shared by the comparison and axiom-check
//! machinery. Serialization is plain serde/JSON with a fixed field order so
//! identical runs produce identical bytes.

use serde::{Deserialize, Serialize};

/// One moment-comparison row: empirical estimate vs analytic value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub points: Vec<Vec<usize>>,
    pub order: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub analytic: f64,
    pub z_score: f64,
    pub flagged: bool,
}

/// Moment-comparison report with the z-score gate applied per row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub check: String,
    pub z_gate: f64,
    pub sample_count: usize,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| !r.flagged)
    }

    pub fn max_abs_z(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.z_score.abs())
            .fold(0.0, f64::max)
    }

    /// Aligned-column text rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{} (samples = {}, gate |z| < {})\n",
            self.check, self.sample_count, self.z_gate
        ));
        out.push_str(&format!(
            "{:<28} {:>4} {:>14} {:>12} {:>14} {:>8}  {}\n",
            "points", "n", "estimate", "std_error", "analytic", "z", "flag"
        ));
        for row in &self.rows {
            let pts = row
                .points
                .iter()
                .map(|p| {
                    format!(
                        "({})",
                        p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
                    )
                })
                .collect::<Vec<_>>()
                .join("");
            out.push_str(&format!(
                "{:<28} {:>4} {:>14.6e} {:>12.3e} {:>14.6e} {:>8.2} {}\n",
                pts,
                row.order,
                row.estimate,
                row.std_error,
                row.analytic,
                row.z_score,
                if row.flagged { "  FAIL" } else { "" }
            ));
        }
        out
    }

    /// CSV rendering of the per-tuple rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("points;order;estimate;std_error;analytic;z_score;flagged\n");
        for row in &self.rows {
            let pts = row
                .points
                .iter()
                .map(|p| p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","))
                .collect::<Vec<_>>()
                .join("|");
            out.push_str(&format!(
                "{};{};{};{};{};{};{}\n",
                pts, row.order, row.estimate, row.std_error, row.analytic, row.z_score, row.flagged
            ));
        }
        out
    }
}

/// A single recorded violation of a grid predicate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub momenta: Vec<Vec<f64>>,
    pub value: f64,
    pub reason: String,
}

/// Grid-check report for one axiom-content predicate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: String,
    pub n: usize,
    pub alpha: f64,
    pub points_checked: usize,
    pub violations: Vec<Violation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// One member of a norm-bound family study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundRow {
    pub label: String,
    pub width: f64,
    pub center_norm: f64,
    pub pairing: f64,
    pub norm: f64,
    pub ratio: f64,
}

/// Continuity-bound study: pairing/norm ratios over a test-function family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub check: String,
    pub order: usize,
    pub alpha: f64,
    pub weight_exponent: usize,
    pub rows: Vec<BoundRow>,
    pub max_ratio: f64,
    /// Regression slope of log(ratio) against the shell-approach parameter
    /// −log(width) over the on-shell shrinking subfamily.
    pub shell_trend: f64,
}

/// Scaling-exponent study of the near-shell integrability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub check: String,
    pub alpha: f64,
    pub exponent_expected: f64,
    pub exponent_measured: f64,
    pub converged: bool,
    pub epsilons: Vec<f64>,
    pub masses: Vec<f64>,
}
