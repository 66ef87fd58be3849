//! Scoring predicted magic numbers against reference datasets.
//!
//! Each reference dataset is aligned 1:1 with the prediction on its own.
//! Candidate pairs within tolerance are taken closest first; ties go to
//! the smaller observed value, then the smaller prediction. A prediction
//! paired in at least one dataset is a match; otherwise it is spurious.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::datasets::{DataPoint, ReferenceDataset};
use crate::error::{Error, Result};
use crate::shells::{Format, MagicSet};

/// Relative window of the row-alignment mode.
pub const DEFAULT_ROW_WINDOW: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MatchMode {
    /// Window is the printed uncertainty, or `slack` where none is printed.
    Strict { slack: u32 },
    /// Window is the larger of the printed uncertainty and
    /// `window * observed`. With the default 5 % this pairs predictions and
    /// observations the way the published comparison tables line them up.
    RowAlignment { window: f64 },
}

impl Default for MatchMode {
    fn default() -> Self {
        MatchMode::Strict { slack: 0 }
    }
}

impl MatchMode {
    pub fn row() -> Self {
        MatchMode::RowAlignment {
            window: DEFAULT_ROW_WINDOW,
        }
    }

    pub fn tolerance(&self, point: &DataPoint) -> f64 {
        let sigma = point.sigma.map(f64::from);
        match *self {
            MatchMode::Strict { slack } => sigma.unwrap_or(f64::from(slack)),
            MatchMode::RowAlignment { window } => {
                sigma.unwrap_or(0.0).max(window * f64::from(point.n))
            }
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            MatchMode::Strict { slack } => format!(
                "strict: |predicted - observed| <= printed uncertainty, or {slack} where none is printed"
            ),
            MatchMode::RowAlignment { window } => format!(
                "row alignment: |predicted - observed| <= max(printed uncertainty, {window} * observed)"
            ),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            MatchMode::RowAlignment { window } if !(window.is_finite() && window >= 0.0) => Err(
                Error::invalid(format!("row window must be finite and non-negative, got {window}")),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Match {
    pub predicted: u32,
    pub observed: u32,
    pub dataset: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Miss {
    pub observed: u32,
    pub dataset: String,
}

/// The 1:1 pairing of a prediction with one dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetAlignment {
    pub dataset: String,
    /// `(predicted, observed)`, ascending in `predicted`.
    pub pairs: Vec<(u32, u32)>,
    pub misses: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub predicted: Vec<u32>,
    /// Best supporting observation for each supported prediction.
    pub matches: Vec<Match>,
    /// Observed values left unpaired in their dataset.
    pub misses: Vec<Miss>,
    /// Predictions no dataset supports.
    pub spurious: Vec<u32>,
    pub mode: MatchMode,
    pub tolerance_rule: String,
    pub alignments: Vec<DatasetAlignment>,
}

impl ComparisonReport {
    /// `matches - weight * spurious`.
    pub fn score(&self, spurious_weight: f64) -> f64 {
        self.matches.len() as f64 - spurious_weight * self.spurious.len() as f64
    }

    pub fn all_supported(&self) -> bool {
        self.spurious.is_empty()
    }
}

fn align(predicted: &[u32], dataset: &ReferenceDataset, mode: MatchMode) -> DatasetAlignment {
    let mut candidates = Vec::new();
    for (pi, &p) in predicted.iter().enumerate() {
        for (oi, point) in dataset.values.iter().enumerate() {
            let distance = p.abs_diff(point.n);
            if f64::from(distance) <= mode.tolerance(point) {
                candidates.push((distance, point.n, p, pi, oi));
            }
        }
    }
    candidates.sort_unstable();

    let mut used_p = vec![false; predicted.len()];
    let mut used_o = vec![false; dataset.values.len()];
    let mut pairs = Vec::new();
    for (_, o, p, pi, oi) in candidates {
        if !used_p[pi] && !used_o[oi] {
            used_p[pi] = true;
            used_o[oi] = true;
            pairs.push((p, o));
        }
    }
    pairs.sort_unstable();

    let misses = dataset
        .values
        .iter()
        .zip(&used_o)
        .filter(|(_, &used)| !used)
        .map(|(p, _)| p.n)
        .collect();

    DatasetAlignment {
        dataset: dataset.id.clone(),
        pairs,
        misses,
    }
}

pub fn compare(
    predicted: &MagicSet,
    references: &[ReferenceDataset],
    mode: MatchMode,
) -> Result<ComparisonReport> {
    if predicted.is_empty() {
        return Err(Error::invalid("nothing to compare: predicted set is empty"));
    }
    if references.is_empty() {
        return Err(Error::invalid("nothing to compare against: no reference datasets"));
    }
    mode.validate()?;
    for d in references {
        d.validate()?;
    }

    let alignments: Vec<DatasetAlignment> = references
        .iter()
        .map(|d| align(predicted.values(), d, mode))
        .collect();

    // (distance, dataset id, observed) is independent of reference order.
    let mut best: BTreeMap<u32, (u32, &str, u32)> = BTreeMap::new();
    for a in &alignments {
        for &(p, o) in &a.pairs {
            let key = (p.abs_diff(o), a.dataset.as_str(), o);
            best.entry(p)
                .and_modify(|cur| {
                    if key < *cur {
                        *cur = key;
                    }
                })
                .or_insert(key);
        }
    }

    let matches = best
        .iter()
        .map(|(&p, &(_, ds, o))| Match {
            predicted: p,
            observed: o,
            dataset: ds.to_string(),
        })
        .collect();
    let spurious = predicted
        .values()
        .iter()
        .copied()
        .filter(|p| !best.contains_key(p))
        .collect();
    let misses = alignments
        .iter()
        .flat_map(|a| {
            a.misses.iter().map(|&o| Miss {
                observed: o,
                dataset: a.dataset.clone(),
            })
        })
        .collect();

    Ok(ComparisonReport {
        predicted: predicted.values().to_vec(),
        matches,
        misses,
        spurious,
        mode,
        tolerance_rule: mode.describe(),
        alignments,
    })
}

/// One line of the side-by-side rendering: a prediction or an unpaired
/// observation, with what each dataset puts next to it.
struct ReportRow {
    anchor: u32,
    predicted: Option<u32>,
    cells: Vec<Option<u32>>,
}

fn report_rows(report: &ComparisonReport) -> Vec<ReportRow> {
    let width = report.alignments.len();
    let mut rows: Vec<ReportRow> = report
        .predicted
        .iter()
        .map(|&p| ReportRow {
            anchor: p,
            predicted: Some(p),
            cells: report
                .alignments
                .iter()
                .map(|a| a.pairs.iter().find(|(pp, _)| *pp == p).map(|&(_, o)| o))
                .collect(),
        })
        .collect();

    let mut unpaired: BTreeMap<u32, Vec<Option<u32>>> = BTreeMap::new();
    for (col, a) in report.alignments.iter().enumerate() {
        for &o in &a.misses {
            unpaired.entry(o).or_insert_with(|| vec![None; width])[col] = Some(o);
        }
    }
    rows.extend(unpaired.into_iter().map(|(o, cells)| ReportRow {
        anchor: o,
        predicted: None,
        cells,
    }));
    rows.sort_by_key(|r| (r.anchor, r.predicted.is_none()));
    rows
}

fn status(report: &ComparisonReport, row: &ReportRow) -> &'static str {
    match row.predicted {
        Some(p) if report.spurious.contains(&p) => "spurious",
        Some(_) => "match",
        None => "miss",
    }
}

pub fn render_report(
    report: &ComparisonReport,
    references: &[ReferenceDataset],
    format: Format,
) -> Result<String> {
    let cell = |col: usize, v: Option<u32>| -> String {
        match v {
            None => String::new(),
            Some(v) => match references.get(col).and_then(|d| d.sigma_of(v)) {
                Some(s) => format!("{v}±{s}"),
                None => v.to_string(),
            },
        }
    };
    let rows = report_rows(report);
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["predicted".to_string()];
            header.extend(report.alignments.iter().map(|a| a.dataset.clone()));
            header.push("status".into());
            w.write_record(&header)?;
            for r in &rows {
                let mut rec = vec![r.predicted.map(|p| p.to_string()).unwrap_or_default()];
                rec.extend(r.cells.iter().map(|c| c.map(|v| v.to_string()).unwrap_or_default()));
                rec.push(status(report, r).into());
                w.write_record(&rec)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        Format::Markdown => {
            let mut out = String::new();
            let _ = write!(out, "| predicted |");
            for a in &report.alignments {
                let _ = write!(out, " {} |", a.dataset);
            }
            out.push_str(" status |\n|---:|");
            for _ in &report.alignments {
                out.push_str("---:|");
            }
            out.push_str(":---|\n");
            for r in &rows {
                let _ = write!(
                    out,
                    "| {} |",
                    r.predicted.map(|p| p.to_string()).unwrap_or_default()
                );
                for (col, c) in r.cells.iter().enumerate() {
                    let _ = write!(out, " {} |", cell(col, *c));
                }
                let _ = writeln!(out, " {} |", status(report, r));
            }
            let _ = writeln!(
                out,
                "\n{} predicted, {} matched, {} spurious, {} unpaired observations",
                report.predicted.len(),
                report.matches.len(),
                report.spurious.len(),
                report.misses.len()
            );
            let _ = writeln!(out, "tolerance: {}", report.tolerance_rule);
            Ok(out)
        }
    }
}
