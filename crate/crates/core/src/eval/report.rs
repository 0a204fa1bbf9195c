//! Per-cell PSI/AST metrics and their tabular and structured renderings.

use std::fmt::Write as _;

use serde::Serialize;

use super::simulate::SimulationOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    /// Percentage of solved instances.
    pub psi: f64,
    /// Average solving time in seconds, unsolved counted as the timeout.
    pub ast: f64,
}

impl Metrics {
    pub fn from_outcomes(outcomes: &[SimulationOutcome]) -> Self {
        if outcomes.is_empty() {
            return Self { psi: 0.0, ast: 0.0 };
        }
        let n = outcomes.len() as f64;
        let solved = outcomes.iter().filter(|o| o.solved).count() as f64;
        let total: f64 = outcomes.iter().map(SimulationOutcome::seconds).sum();
        Self { psi: 100.0 * solved / n, ast: total / n }
    }

    fn mean(items: impl Iterator<Item = Metrics> + Clone) -> Self {
        let n = items.clone().count().max(1) as f64;
        let (p, a) = items.fold((0.0, 0.0), |(p, a), m| (p + m.psi, a + m.ast));
        Self { psi: p / n, ast: a / n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub repeat: usize,
    pub fold: usize,
    pub instances: usize,
    pub solved: usize,
    #[serde(flatten)]
    pub metrics: Metrics,
}

/// Mean and maximum sub-portfolio size over every schedule built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubPortfolioStats {
    pub mean: f64,
    pub max: usize,
}

impl SubPortfolioStats {
    pub fn from_sizes(sizes: &[usize]) -> Self {
        let mean = if sizes.is_empty() { 0.0 } else { sizes.iter().sum::<usize>() as f64 / sizes.len() as f64 };
        Self { mean, max: sizes.iter().copied().max().unwrap_or(0) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub approach: String,
    pub timeout_ms: u64,
    /// Row-major over (repeat, fold), zero-based indices.
    pub cells: Vec<Cell>,
    pub subportfolio: Option<SubPortfolioStats>,
}

impl EvaluationReport {
    pub fn repeats(&self) -> usize {
        self.cells.iter().map(|c| c.repeat + 1).max().unwrap_or(0)
    }

    pub fn cell(&self, repeat: usize, fold: usize) -> Option<&Cell> {
        self.cells.iter().find(|c| c.repeat == repeat && c.fold == fold)
    }

    /// Mean over the folds of one repeat.
    pub fn repeat_mean(&self, repeat: usize) -> Metrics {
        Metrics::mean(self.cells.iter().filter(move |c| c.repeat == repeat).map(|c| c.metrics))
    }

    /// Mean of the per-repeat means.
    pub fn overall(&self) -> Metrics {
        Metrics::mean((0..self.repeats()).map(|r| self.repeat_mean(r)))
    }

    /// `approach,repeat,fold,psi,ast` rows, then one `avg` row per repeat and
    /// a final `all,avg` row. Repeats and folds are numbered from 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("approach,repeat,fold,psi,ast\n");
        self.write_rows(&mut out);
        out
    }

    pub(crate) fn write_rows(&self, out: &mut String) {
        let a = &self.approach;
        for c in &self.cells {
            let _ = writeln!(out, "{a},{},{},{:.6},{:.6}", c.repeat + 1, c.fold + 1, c.metrics.psi, c.metrics.ast);
        }
        for r in 0..self.repeats() {
            let m = self.repeat_mean(r);
            let _ = writeln!(out, "{a},{},avg,{:.6},{:.6}", r + 1, m.psi, m.ast);
        }
        let m = self.overall();
        let _ = writeln!(out, "{a},all,avg,{:.6},{:.6}", m.psi, m.ast);
    }

    pub fn to_document(&self) -> ReportDocument {
        ReportDocument {
            approach: self.approach.clone(),
            timeout: self.timeout_ms as f64 / 1000.0,
            repeats: (0..self.repeats())
                .map(|r| RepeatDocument {
                    repeat: r + 1,
                    folds: self
                        .cells
                        .iter()
                        .filter(|c| c.repeat == r)
                        .map(|c| Cell { repeat: c.repeat + 1, fold: c.fold + 1, ..c.clone() })
                        .collect(),
                    avg: self.repeat_mean(r),
                })
                .collect(),
            overall: self.overall(),
            subportfolio: self.subportfolio,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_document()).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Structured report laid out per repeat, each with its folds and average.
#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub approach: String,
    pub timeout: f64,
    pub repeats: Vec<RepeatDocument>,
    pub overall: Metrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subportfolio: Option<SubPortfolioStats>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RepeatDocument {
    pub repeat: usize,
    pub folds: Vec<Cell>,
    pub avg: Metrics,
}

/// All reports' rows in one table.
pub fn combined_csv(reports: &[EvaluationReport]) -> String {
    let mut out = String::from("approach,repeat,fold,psi,ast\n");
    for r in reports {
        r.write_rows(&mut out);
    }
    out
}

/// One `approach,psi,ast` line per report.
pub fn comparison_csv(reports: &[EvaluationReport]) -> String {
    let mut out = String::from("approach,psi,ast\n");
    for r in reports {
        let m = r.overall();
        let _ = writeln!(out, "{},{:.6},{:.6}", r.approach, m.psi, m.ast);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(repeat: usize, fold: usize, psi: f64, ast: f64) -> Cell {
        Cell { repeat, fold, instances: 4, solved: 0, metrics: Metrics { psi, ast } }
    }

    #[test]
    fn aggregates_are_means_of_repeat_means() {
        let report = EvaluationReport {
            approach: "X".into(),
            timeout_ms: 1000,
            cells: vec![cell(0, 0, 50.0, 10.0), cell(0, 1, 100.0, 20.0), cell(1, 0, 0.0, 1.0), cell(1, 1, 0.0, 1.0)],
            subportfolio: None,
        };
        assert_eq!(report.repeat_mean(0), Metrics { psi: 75.0, ast: 15.0 });
        assert_eq!(report.overall(), Metrics { psi: 37.5, ast: 8.0 });
        let csv = report.to_csv();
        assert!(csv.starts_with("approach,repeat,fold,psi,ast\nX,1,1,50.000000,10.000000\n"));
        assert!(csv.ends_with("X,2,avg,0.000000,1.000000\nX,all,avg,37.500000,8.000000\n"));
        let doc = report.to_json();
        assert!(doc.contains("\"repeat\": 2"));
        assert!(!doc.contains("subportfolio"));
    }

    #[test]
    fn subportfolio_stats() {
        let s = SubPortfolioStats::from_sizes(&[1, 2, 1, 0]);
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.max, 2);
        assert_eq!(SubPortfolioStats::from_sizes(&[]).max, 0);
    }
}
