//! Shell tables: energy-ordered levels, running occupancy, gaps and the
//! magic numbers they imply.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::Level;

/// Minimum gap, in units of `hbar omega_0`, that closes a shell.
pub const DEFAULT_THRESHOLD: f64 = 0.39;

/// Strictly increasing list of magic numbers, optionally with a per-entry
/// uncertainty.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MagicSet {
    values: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    uncertainties: Option<Vec<u32>>,
}

impl MagicSet {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        Self::check_values(&values)?;
        Ok(Self {
            values,
            uncertainties: None,
        })
    }

    pub fn with_uncertainties(values: Vec<u32>, uncertainties: Vec<u32>) -> Result<Self> {
        Self::check_values(&values)?;
        if uncertainties.len() != values.len() {
            return Err(Error::invalid(format!(
                "{} uncertainties given for {} values",
                uncertainties.len(),
                values.len()
            )));
        }
        Ok(Self {
            values,
            uncertainties: Some(uncertainties),
        })
    }

    fn check_values(values: &[u32]) -> Result<()> {
        if values.first() == Some(&0) {
            return Err(Error::invalid("magic numbers must be positive"));
        }
        if let Some(w) = values.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "magic numbers must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn uncertainties(&self) -> Option<&[u32]> {
        self.uncertainties.as_deref()
    }

    /// Uncertainty of entry `i`, zero when none was given.
    pub fn uncertainty(&self, i: usize) -> u32 {
        self.uncertainties.as_ref().map_or(0, |u| u[i])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, value: u32) -> bool {
        self.values.binary_search(&value).is_ok()
    }

    pub fn is_subset(&self, other: &MagicSet) -> bool {
        self.values.iter().all(|&v| other.contains(v))
    }

    /// Values in exactly one of the two sets, ascending.
    pub fn symmetric_difference(&self, other: &MagicSet) -> Vec<u32> {
        let a: BTreeSet<u32> = self.values.iter().copied().collect();
        let b: BTreeSet<u32> = other.values.iter().copied().collect();
        a.symmetric_difference(&b).copied().collect()
    }
}

impl FromIterator<u32> for MagicSet {
    /// Sorts and deduplicates; zeros are dropped.
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        let set: BTreeSet<u32> = iter.into_iter().filter(|&v| v > 0).collect();
        Self {
            values: set.into_iter().collect(),
            uncertainties: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellRow {
    pub level: Level,
    pub cumulative: u32,
    /// Energy to the next row; `None` on the last row, which has no successor
    /// within the enumerated range.
    pub gap_after: Option<f64>,
}

impl ShellRow {
    /// Gap with the last row mapped to `+inf`.
    pub fn gap_or_inf(&self) -> f64 {
        self.gap_after.unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellTable {
    rows: Vec<ShellRow>,
    threshold: f64,
    magic: MagicSet,
}

fn level_order(a: &Level, b: &Level) -> Ordering {
    a.energy
        .total_cmp(&b.energy)
        .then(a.n.cmp(&b.n))
        .then(a.l.cmp(&b.l))
}

/// Sort `levels`, accumulate occupancies and read off the magic numbers.
///
/// A cumulative count is magic when the gap to the next level exceeds
/// `threshold`. Ties in energy are ordered by ascending `n`, then `l`.
pub fn build_shell_table(levels: &[Level], threshold: f64) -> Result<ShellTable> {
    if levels.is_empty() {
        return Err(Error::invalid("cannot build a shell table from no levels"));
    }
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::invalid(format!(
            "threshold must be positive and finite, got {threshold}"
        )));
    }
    if let Some(bad) = levels.iter().find(|lv| !lv.energy.is_finite()) {
        return Err(Error::invalid(format!(
            "level ({}, {}) has non-finite energy",
            bad.n, bad.l
        )));
    }

    let mut sorted = levels.to_vec();
    sorted.sort_by(level_order);

    let mut rows = Vec::with_capacity(sorted.len());
    let mut cumulative = 0u32;
    for (i, level) in sorted.iter().enumerate() {
        cumulative += level.degeneracy;
        rows.push(ShellRow {
            level: *level,
            cumulative,
            gap_after: sorted.get(i + 1).map(|next| next.energy - level.energy),
        });
    }
    let magic = rows
        .iter()
        .filter(|r| r.gap_after.is_some_and(|g| g > threshold))
        .map(|r| r.cumulative)
        .collect();

    Ok(ShellTable {
        rows,
        threshold,
        magic,
    })
}

impl ShellTable {
    pub fn rows(&self) -> &[ShellRow] {
        &self.rows
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn magic(&self) -> &MagicSet {
        &self.magic
    }

    pub fn is_magic(&self, row: &ShellRow) -> bool {
        row.gap_after.is_some_and(|g| g > self.threshold)
    }

    pub fn total_particles(&self) -> u32 {
        self.rows.last().map_or(0, |r| r.cumulative)
    }

    /// Gap following the row whose cumulative count is `cumulative`.
    ///
    /// The last row reports `+inf`.
    pub fn gap_at(&self, cumulative: u32) -> Result<f64> {
        self.rows
            .iter()
            .find(|r| r.cumulative == cumulative)
            .map(ShellRow::gap_or_inf)
            .ok_or_else(|| {
                Error::not_found(format!("no level closes at cumulative count {cumulative}"))
            })
    }

    /// Same levels, new threshold.
    pub fn with_threshold(&self, threshold: f64) -> Result<ShellTable> {
        let levels: Vec<Level> = self.rows.iter().map(|r| r.level).collect();
        build_shell_table(&levels, threshold)
    }
}

/// Free function form of [`ShellTable::gap_at`].
pub fn gap_at(table: &ShellTable, cumulative: u32) -> Result<f64> {
    table.gap_at(cumulative)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Markdown,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::invalid(format!(
                "unknown format '{other}' (expected markdown, csv or json)"
            ))),
        }
    }
}

/// Fixed three-decimal rendering with ties rounded away from zero.
pub fn fmt3(x: f64) -> String {
    let r = (x * 1000.0).round() / 1000.0;
    // avoid "-0.000"
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r:.3}")
}

pub const CSV_HEADER: [&str; 7] = [
    "n",
    "l",
    "energy",
    "degeneracy",
    "cumulative",
    "gap_after",
    "is_magic",
];

/// One parsed line of the CSV rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub n: u32,
    pub l: u32,
    pub energy: f64,
    pub degeneracy: u32,
    pub cumulative: u32,
    pub gap_after: Option<f64>,
    pub is_magic: bool,
}

#[derive(Serialize)]
struct JsonRow {
    n: u32,
    l: u32,
    energy: f64,
    degeneracy: u32,
    cumulative: u32,
    gap_after: Option<f64>,
    is_magic: bool,
}

#[derive(Serialize)]
struct JsonTable<'a> {
    threshold: f64,
    total: u32,
    magic: &'a [u32],
    rows: Vec<JsonRow>,
}

pub fn render_table(table: &ShellTable, format: Format) -> Result<String> {
    match format {
        Format::Markdown => Ok(render_markdown(table)),
        Format::Csv => render_csv(table),
        Format::Json => {
            let doc = JsonTable {
                threshold: table.threshold,
                total: table.total_particles(),
                magic: table.magic.values(),
                rows: table
                    .rows
                    .iter()
                    .map(|r| JsonRow {
                        n: r.level.n,
                        l: r.level.l,
                        energy: r.level.energy,
                        degeneracy: r.level.degeneracy,
                        cumulative: r.cumulative,
                        gap_after: r.gap_after,
                        is_magic: table.is_magic(r),
                    })
                    .collect(),
            };
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            Ok(s)
        }
    }
}

fn render_markdown(table: &ShellTable) -> String {
    let mut out = String::new();
    out.push_str("| n | l | E(n,l) | 2(2l+1) | total |\n");
    out.push_str("|--:|--:|-------:|--------:|------:|\n");
    for row in &table.rows {
        let total = if table.is_magic(row) {
            format!("**{}**", row.cumulative)
        } else {
            row.cumulative.to_string()
        };
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} |",
            row.level.n,
            row.level.l,
            fmt3(row.level.energy),
            row.level.degeneracy,
            total
        );
        if table.is_magic(row) {
            let gap = row.gap_after.expect("magic rows have a successor");
            let _ = writeln!(out, "| | | {} | | |", fmt3(gap));
        }
    }
    out
}

fn render_csv(table: &ShellTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for row in &table.rows {
        w.write_record([
            row.level.n.to_string(),
            row.level.l.to_string(),
            fmt3(row.level.energy),
            row.level.degeneracy.to_string(),
            row.cumulative.to_string(),
            row.gap_after.map(fmt3).unwrap_or_default(),
            table.is_magic(row).to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Parse the CSV rendering produced by [`render_table`].
pub fn parse_csv_table(text: &str) -> Result<Vec<CsvRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::invalid(format!(
            "unexpected csv header {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        rows.push(record?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{enumerate_levels, Model};
    use proptest::prelude::*;

    fn table_levels() -> Vec<Level> {
        enumerate_levels(&Model::q_exact(0.038).unwrap(), 22.6).unwrap()
    }

    #[test]
    fn empty_and_bad_threshold() {
        assert!(build_shell_table(&[], 0.39).is_err());
        let lv = [Level::new(0, 0, 0.0)];
        assert!(build_shell_table(&lv, 0.0).is_err());
        assert!(build_shell_table(&lv, -0.1).is_err());
        assert!(build_shell_table(&lv, f64::NAN).is_err());
    }

    #[test]
    fn single_level_has_no_magic() {
        let t = build_shell_table(&[Level::new(0, 0, 0.0)], 0.39).unwrap();
        assert!(t.magic().is_empty());
        assert_eq!(t.rows()[0].cumulative, 2);
        assert_eq!(t.gap_at(2).unwrap(), f64::INFINITY);
    }

    #[test]
    fn gaps_in_table() {
        let t = build_shell_table(&table_levels(), DEFAULT_THRESHOLD).unwrap();
        for (c, g) in [(2, 1.000), (8, 1.006), (34, 0.397), (186, 0.329), (542, 0.325), (18, 0.237)] {
            let got = t.gap_at(c).unwrap();
            assert!((got - g).abs() <= 1e-3, "gap at {c}: {got}");
        }
        assert!(matches!(t.gap_at(19), Err(Error::NotFound(_))));
    }

    #[test]
    fn plain_ho_magic() {
        let levels = enumerate_levels(&Model::PlainHo, 7.5).unwrap();
        let t = build_shell_table(&levels, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(t.magic().values(), &[2, 8, 20, 40, 70, 112, 168]);
        assert_eq!(t.total_particles(), 240);
    }

    #[test]
    fn ties_resolve_by_n_then_l() {
        let levels = [
            Level::new(2, 2, 1.0),
            Level::new(3, 1, 1.0),
            Level::new(2, 0, 1.0),
        ];
        let t = build_shell_table(&levels, 0.39).unwrap();
        let order: Vec<_> = t.rows().iter().map(|r| (r.level.n, r.level.l)).collect();
        assert_eq!(order, vec![(2, 0), (2, 2), (3, 1)]);
    }

    #[test]
    fn magic_set_validation() {
        assert!(MagicSet::new(vec![2, 8, 8]).is_err());
        assert!(MagicSet::new(vec![8, 2]).is_err());
        assert!(MagicSet::new(vec![0, 2]).is_err());
        assert!(MagicSet::with_uncertainties(vec![2, 8], vec![1]).is_err());
        let m = MagicSet::with_uncertainties(vec![2, 8], vec![0, 3]).unwrap();
        assert_eq!(m.uncertainty(1), 3);
        assert!(MagicSet::new(vec![]).unwrap().is_empty());
    }

    #[test]
    fn format_parsing() {
        assert_eq!("markdown".parse::<Format>().unwrap(), Format::Markdown);
        assert_eq!("CSV".parse::<Format>().unwrap(), Format::Csv);
        assert!(matches!("xml".parse::<Format>(), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn fmt3_rounding() {
        assert_eq!(fmt3(0.0), "0.000");
        assert_eq!(fmt3(-1e-12), "0.000");
        assert_eq!(fmt3(2.0058), "2.006");
        assert_eq!(fmt3(0.0625), "0.063");
        assert_eq!(fmt3(-0.0625), "-0.063");
    }

    #[test]
    fn csv_first_row_and_round_trip() {
        let t = build_shell_table(&table_levels(), DEFAULT_THRESHOLD).unwrap();
        let text = render_table(&t, Format::Csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert!(lines.next().unwrap().starts_with("0,0,0.000,2,2,"));

        let parsed = parse_csv_table(&text).unwrap();
        assert_eq!(parsed.len(), t.rows().len());
        for (p, r) in parsed.iter().zip(t.rows()) {
            assert_eq!((p.n, p.l, p.degeneracy, p.cumulative), (r.level.n, r.level.l, r.level.degeneracy, r.cumulative));
            assert_eq!(fmt3(p.energy), fmt3(r.level.energy));
            assert_eq!(p.gap_after.map(fmt3), r.gap_after.map(fmt3));
            assert_eq!(p.is_magic, t.is_magic(r));
        }
        // a second pass through the parsed numbers is lossless
        let again: Vec<String> = parsed.iter().map(|p| fmt3(p.energy)).collect();
        let orig: Vec<String> = t.rows().iter().map(|r| fmt3(r.level.energy)).collect();
        assert_eq!(again, orig);
    }

    #[test]
    fn csv_parse_rejects_foreign_header() {
        assert!(parse_csv_table("a,b\n1,2\n").is_err());
    }

    #[test]
    fn markdown_marks_magic() {
        let t = build_shell_table(&table_levels(), DEFAULT_THRESHOLD).unwrap();
        let md = render_table(&t, Format::Markdown).unwrap();
        assert!(md.contains("| 0 | 0 | 0.000 | 2 | **2** |"));
        assert!(md.contains("| 2 | 2 | 2.006 | 10 | 18 |"));
        assert!(md.contains("| | | 0.397 | | |"));
    }

    #[test]
    fn json_mirrors_fields() {
        let t = build_shell_table(&table_levels(), DEFAULT_THRESHOLD).unwrap();
        let v: serde_json::Value = serde_json::from_str(&render_table(&t, Format::Json).unwrap()).unwrap();
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), t.rows().len());
        assert_eq!(rows[0]["is_magic"], true);
        assert!(rows.last().unwrap()["gap_after"].is_null());
        assert_eq!(v["magic"].as_array().unwrap().len(), t.magic().len());
    }

    fn shuffled(levels: &[Level], seed: u64) -> Vec<Level> {
        // small deterministic Fisher-Yates driven by an LCG
        let mut v = levels.to_vec();
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        for i in (1..v.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (s >> 33) as usize % (i + 1);
            v.swap(i, j);
        }
        v
    }

    proptest! {
        #[test]
        fn permutation_invariant(seed in any::<u64>()) {
            let levels = table_levels();
            let a = build_shell_table(&levels, DEFAULT_THRESHOLD).unwrap();
            let b = build_shell_table(&shuffled(&levels, seed), DEFAULT_THRESHOLD).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn threshold_monotone(t1 in 0.01f64..1.2, t2 in 0.01f64..1.2) {
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            let levels = table_levels();
            let m_lo = build_shell_table(&levels, lo).unwrap().magic().clone();
            let m_hi = build_shell_table(&levels, hi).unwrap().magic().clone();
            prop_assert!(m_hi.is_subset(&m_lo));
        }

        #[test]
        fn scale_invariant(lambda in 0.1f64..10.0, threshold in 0.05f64..1.0) {
            let levels = table_levels();
            let scaled: Vec<Level> = levels.iter().map(|lv| Level { energy: lv.energy * lambda, ..*lv }).collect();
            let a = build_shell_table(&levels, threshold).unwrap();
            let b = build_shell_table(&scaled, threshold * lambda).unwrap();
            prop_assert_eq!(a.magic(), b.magic());
        }

        #[test]
        fn cumulative_conservation(cut in 0.5f64..30.0) {
            let levels = enumerate_levels(&Model::q_exact(0.038).unwrap(), cut).unwrap();
            let t = build_shell_table(&levels, DEFAULT_THRESHOLD).unwrap();
            let sum: u32 = levels.iter().map(|lv| lv.degeneracy).sum();
            prop_assert_eq!(t.total_particles(), sum);
            let mut prev = 0;
            for r in t.rows() {
                prop_assert_eq!(r.cumulative, prev + r.level.degeneracy);
                prev = r.cumulative;
            }
        }

        #[test]
        fn classical_total_is_complete_bands(top in 0u32..15) {
            let cut = f64::from(top) + 0.5;
            let levels = enumerate_levels(&Model::PlainHo, cut).unwrap();
            let t = build_shell_table(&levels, DEFAULT_THRESHOLD).unwrap();
            let expected: u32 = (0..=top).map(|n| (n + 1) * (n + 2)).sum();
            prop_assert_eq!(t.total_particles(), expected);
        }
    }
}
