//! Parameter scans over deformation and gap threshold.
//!
//! Every grid point runs the full pipeline (enumerate, tabulate, compare).
//! Deformations are evaluated in parallel; results are merged by grid index
//! so the output does not depend on scheduling.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compare::{compare, MatchMode};
use crate::datasets::ReferenceDataset;
use crate::error::{Error, Result};
use crate::pipeline::{levels_for, ECut, REFERENCE_PARTICLES};
use crate::shells::{build_shell_table, MagicSet};
use crate::spectrum::Model;

/// Evenly spaced values `lo..=hi`; a single step means the single value `lo`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        let axis = Self { lo, hi, steps };
        axis.validate()?;
        Ok(axis)
    }

    pub fn single(value: f64) -> Result<Self> {
        Self::new(value, value, 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::invalid("range bounds must be finite"));
        }
        if self.steps == 0 {
            return Err(Error::invalid("range needs at least one step"));
        }
        if self.lo > self.hi {
            return Err(Error::invalid(format!(
                "range lower bound {} exceeds upper bound {}",
                self.lo, self.hi
            )));
        }
        if self.steps == 1 && self.lo != self.hi {
            return Err(Error::invalid(format!(
                "a single-step range needs lo == hi, got {}:{}",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.lo + (self.hi - self.lo) * (i as f64) / last)
            .collect()
    }
}

impl FromStr for Axis {
    type Err = Error;

    /// `lo:hi:steps`, or a bare number for a single value.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |t: &str| -> Result<f64> {
            t.parse::<f64>()
                .map_err(|_| Error::invalid(format!("malformed number '{t}' in range '{s}'")))
        };
        match parts.as_slice() {
            [v] => Axis::single(num(v)?),
            [lo, hi, steps] => {
                let steps = steps
                    .parse::<usize>()
                    .map_err(|_| Error::invalid(format!("malformed step count in range '{s}'")))?;
                Axis::new(num(lo)?, num(hi)?, steps)
            }
            _ => Err(Error::invalid(format!("malformed range '{s}' (expected lo:hi:steps)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub tau: Axis,
    pub threshold: Axis,
    pub e_cut: ECut,
    pub mode: MatchMode,
    /// Weight of each unsupported prediction in the score.
    pub spurious_weight: f64,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self {
            tau: Axis {
                lo: 0.03,
                hi: 0.05,
                steps: 21,
            },
            threshold: Axis {
                lo: 0.3,
                hi: 0.5,
                steps: 21,
            },
            e_cut: ECut::Particles(REFERENCE_PARTICLES),
            mode: MatchMode::row(),
            spurious_weight: 1.0,
        }
    }
}

impl ScanGrid {
    pub fn objective(&self) -> String {
        format!("matches - {} * spurious", self.spurious_weight)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub tau_index: usize,
    pub threshold_index: usize,
    pub tau: f64,
    pub threshold: f64,
    pub magic: MagicSet,
    pub matches: usize,
    pub spurious: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub grid: ScanGrid,
    pub objective: String,
    /// Row-major: deformation outer, threshold inner.
    pub points: Vec<ScanPoint>,
    /// Indices into `points` attaining the highest score.
    pub best: Vec<usize>,
}

impl ScanResult {
    pub fn best_points(&self) -> impl Iterator<Item = &ScanPoint> {
        self.best.iter().map(|&i| &self.points[i])
    }

    pub fn point_at(&self, tau_index: usize, threshold_index: usize) -> Option<&ScanPoint> {
        self.points
            .iter()
            .find(|p| p.tau_index == tau_index && p.threshold_index == threshold_index)
    }

    /// Grid point closest to `(tau, threshold)`.
    pub fn nearest(&self, tau: f64, threshold: f64) -> Option<&ScanPoint> {
        self.points.iter().min_by(|a, b| {
            let da = (a.tau - tau).abs() + (a.threshold - threshold).abs();
            let db = (b.tau - tau).abs() + (b.threshold - threshold).abs();
            da.total_cmp(&db)
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// `tau,threshold,score,magic` with the magic set space-separated.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["tau", "threshold", "score", "magic"])?;
        for p in &self.points {
            let magic: Vec<String> = p.magic.values().iter().map(u32::to_string).collect();
            w.write_record([
                p.tau.to_string(),
                p.threshold.to_string(),
                p.score.to_string(),
                magic.join(" "),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Magic numbers of a standalone pipeline run at one grid point.
pub fn evaluate_point(tau: f64, threshold: f64, e_cut: ECut) -> Result<MagicSet> {
    let levels = levels_for(&Model::q_exact(tau)?, e_cut)?;
    Ok(build_shell_table(&levels, threshold)?.magic().clone())
}

pub fn run_scan(grid: &ScanGrid, references: &[ReferenceDataset]) -> Result<ScanResult> {
    grid.tau.validate()?;
    grid.threshold.validate()?;
    if references.is_empty() {
        return Err(Error::invalid("scan needs at least one reference dataset"));
    }
    if !grid.spurious_weight.is_finite() {
        return Err(Error::invalid("spurious weight must be finite"));
    }
    if let ECut::Energy(e) = grid.e_cut {
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::invalid(format!("e_cut must be positive and finite, got {e}")));
        }
    }

    let taus = grid.tau.values();
    let thresholds = grid.threshold.values();

    let per_tau: Vec<Vec<ScanPoint>> = taus
        .par_iter()
        .enumerate()
        .map(|(ti, &tau)| -> Vec<ScanPoint> {
            let Ok(model) = Model::q_exact(tau) else {
                return Vec::new();
            };
            let Ok(levels) = levels_for(&model, grid.e_cut) else {
                return Vec::new();
            };
            thresholds
                .iter()
                .enumerate()
                .filter_map(|(hi, &threshold)| {
                    let table = build_shell_table(&levels, threshold).ok()?;
                    let magic = table.magic().clone();
                    let (matches, spurious, score) = if magic.is_empty() {
                        (0, 0, 0.0)
                    } else {
                        let report = compare(&magic, references, grid.mode).ok()?;
                        (
                            report.matches.len(),
                            report.spurious.len(),
                            report.score(grid.spurious_weight),
                        )
                    };
                    Some(ScanPoint {
                        tau_index: ti,
                        threshold_index: hi,
                        tau,
                        threshold,
                        magic,
                        matches,
                        spurious,
                        score,
                    })
                })
                .collect()
        })
        .collect();

    let points: Vec<ScanPoint> = per_tau.into_iter().flatten().collect();
    if points.is_empty() {
        return Err(Error::EmptyResult(
            "no grid point could be evaluated (check threshold > 0 and the tau range)".into(),
        ));
    }
    let top = points.iter().map(|p| p.score).fold(f64::NEG_INFINITY, f64::max);
    let best = points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.score == top)
        .map(|(i, _)| i)
        .collect();

    Ok(ScanResult {
        objective: grid.objective(),
        grid: grid.clone(),
        points,
        best,
    })
}

/// A grid point next to the region whose magic set differs from the target
/// by exactly one number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub tau: f64,
    pub threshold: f64,
    /// Present at this point but not in the target.
    pub entered: Option<u32>,
    /// In the target but missing at this point.
    pub left: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub target: MagicSet,
    /// `(tau, threshold)` of the largest 4-connected set of grid points
    /// reproducing the target exactly.
    pub region: Vec<(f64, f64)>,
    /// Number of separate connected regions reproducing the target.
    pub components: usize,
    pub boundary: Vec<BoundaryPoint>,
}

impl StabilityReport {
    pub fn is_empty(&self) -> bool {
        self.region.is_empty()
    }

    /// Whether the region contains the grid point nearest `(tau, threshold)`,
    /// within `eps` in both coordinates.
    pub fn contains(&self, tau: f64, threshold: f64, eps: f64) -> bool {
        self.region
            .iter()
            .any(|&(t, h)| (t - tau).abs() <= eps && (h - threshold).abs() <= eps)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "target reproduced at {} grid point(s) in the largest region ({} region(s) total)",
            self.region.len(),
            self.components
        );
        if let (Some(t), Some(h)) = (
            self.region.iter().map(|p| p.0).reduce(f64::min).zip(self.region.iter().map(|p| p.0).reduce(f64::max)),
            self.region.iter().map(|p| p.1).reduce(f64::min).zip(self.region.iter().map(|p| p.1).reduce(f64::max)),
        ) {
            let _ = writeln!(out, "tau in [{}, {}], threshold in [{}, {}]", t.0, t.1, h.0, h.1);
        }
        for b in &self.boundary {
            let change = match (b.entered, b.left) {
                (Some(v), _) => format!("+{v}"),
                (_, Some(v)) => format!("-{v}"),
                _ => String::new(),
            };
            let _ = writeln!(out, "boundary tau={} threshold={} {}", b.tau, b.threshold, change);
        }
        out
    }
}

pub fn stability_report(result: &ScanResult, target: &MagicSet) -> Result<StabilityReport> {
    if result.points.is_empty() {
        return Err(Error::invalid("stability report needs a non-empty scan result"));
    }
    let nt = result.grid.tau.steps;
    let nh = result.grid.threshold.steps;
    let mut index = vec![None; nt * nh];
    for (i, p) in result.points.iter().enumerate() {
        index[p.tau_index * nh + p.threshold_index] = Some(i);
    }
    let hits = |cell: usize| index[cell].is_some_and(|i| result.points[i].magic.values() == target.values());

    let neighbours = |cell: usize| {
        let (t, h) = (cell / nh, cell % nh);
        let mut out = Vec::with_capacity(4);
        if t > 0 {
            out.push(cell - nh);
        }
        if t + 1 < nt {
            out.push(cell + nh);
        }
        if h > 0 {
            out.push(cell - 1);
        }
        if h + 1 < nh {
            out.push(cell + 1);
        }
        out
    };

    let mut seen = vec![false; nt * nh];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for start in 0..nt * nh {
        if seen[start] || !hits(start) {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(c) = queue.pop_front() {
            comp.push(c);
            for nb in neighbours(c) {
                if !seen[nb] && hits(nb) {
                    seen[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }

    // largest first; equal sizes keep grid order
    let region_cells = components
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)))
        .map(|(_, c)| c.clone())
        .unwrap_or_default();

    let mut border: BTreeSet<usize> = BTreeSet::new();
    for &c in &region_cells {
        border.extend(neighbours(c).into_iter().filter(|&nb| !hits(nb)));
    }
    let boundary = border
        .into_iter()
        .filter_map(|cell| {
            let p = &result.points[index[cell]?];
            let diff = p.magic.symmetric_difference(target);
            if diff.len() != 1 {
                return None;
            }
            let v = diff[0];
            let (entered, left) = if p.magic.contains(v) { (Some(v), None) } else { (None, Some(v)) };
            Some(BoundaryPoint {
                tau: p.tau,
                threshold: p.threshold,
                entered,
                left,
            })
        })
        .collect();

    let region = region_cells
        .iter()
        .map(|&c| {
            let p = &result.points[index[c].expect("region cells are evaluated")];
            (p.tau, p.threshold)
        })
        .collect();

    Ok(StabilityReport {
        target: target.clone(),
        region,
        components: components.len(),
        boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::lookup;
    use crate::pipeline::{REFERENCE_MAGIC, REFERENCE_TAU};

    fn refs() -> Vec<ReferenceDataset> {
        ["martin", "pedersen", "brechignac"]
            .iter()
            .map(|id| lookup(id).unwrap())
            .collect()
    }

    #[test]
    fn axis_values_and_parsing() {
        let a: Axis = "0.03:0.05:21".parse().unwrap();
        let v = a.values();
        assert_eq!(v.len(), 21);
        assert_eq!(v[0], 0.03);
        assert_eq!(v[20], 0.05);
        assert!((v[8] - 0.038).abs() < 1e-15);
        assert_eq!("0.3:0.3:1".parse::<Axis>().unwrap().values(), vec![0.3]);
        assert_eq!("0.39".parse::<Axis>().unwrap().values(), vec![0.39]);
        assert_eq!("0:0:2".parse::<Axis>().unwrap().values(), vec![0.0, 0.0]);
        for bad in ["0.5:0.3:3", "0.3:0.5:0", "0.3:0.5:1", "a:b:c", "1:2", "0.1:0.2:x", "nan:1:2"] {
            assert!(bad.parse::<Axis>().is_err(), "{bad}");
        }
    }

    #[test]
    fn reference_point_reproduces_table() {
        let grid = ScanGrid {
            tau: "0.036:0.040:5".parse().unwrap(),
            threshold: "0.37:0.41:5".parse().unwrap(),
            ..ScanGrid::default()
        };
        let r = run_scan(&grid, &refs()).unwrap();
        assert_eq!(r.points.len(), 25);
        let p = r.nearest(REFERENCE_TAU, 0.39).unwrap();
        assert!((p.tau - REFERENCE_TAU).abs() < 1e-12 && (p.threshold - 0.39).abs() < 1e-12);
        assert_eq!(p.magic.values(), &REFERENCE_MAGIC);
        assert!(r.best.iter().all(|&i| i < r.points.len()));
    }

    #[test]
    fn degenerate_classical_grid() {
        let grid = ScanGrid {
            tau: "0:0:2".parse().unwrap(),
            threshold: Axis::single(0.39).unwrap(),
            e_cut: ECut::Energy(7.5),
            ..ScanGrid::default()
        };
        let r = run_scan(&grid, &refs()).unwrap();
        assert_eq!(r.points.len(), 2);
        for p in &r.points {
            assert_eq!(p.magic.values(), &[2, 8, 20, 40, 70, 112, 168]);
        }
    }

    #[test]
    fn raising_threshold_only_removes() {
        let lo = evaluate_point(REFERENCE_TAU, 0.39, ECut::Particles(REFERENCE_PARTICLES)).unwrap();
        let hi = evaluate_point(REFERENCE_TAU, 0.45, ECut::Particles(REFERENCE_PARTICLES)).unwrap();
        assert!(hi.is_subset(&lo));
        assert!(hi.len() < lo.len());
    }

    #[test]
    fn grid_points_match_standalone_runs() {
        let grid = ScanGrid {
            tau: "0.02:0.06:3".parse().unwrap(),
            threshold: "0.3:0.5:3".parse().unwrap(),
            ..ScanGrid::default()
        };
        let r = run_scan(&grid, &refs()).unwrap();
        for p in &r.points {
            assert_eq!(p.magic, evaluate_point(p.tau, p.threshold, grid.e_cut).unwrap());
        }
    }

    #[test]
    fn reproducible_serialisation() {
        let grid = ScanGrid {
            tau: "0.03:0.05:5".parse().unwrap(),
            threshold: "0.3:0.5:5".parse().unwrap(),
            ..ScanGrid::default()
        };
        let a = run_scan(&grid, &refs()).unwrap();
        let b = run_scan(&grid, &refs()).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
    }

    #[test]
    fn empty_grid_is_an_error() {
        let grid = ScanGrid {
            tau: Axis::single(0.038).unwrap(),
            threshold: "-0.5:0:3".parse().unwrap(),
            ..ScanGrid::default()
        };
        assert!(matches!(run_scan(&grid, &refs()), Err(Error::EmptyResult(_))));
        assert!(run_scan(&ScanGrid::default(), &[]).is_err());
    }

    #[test]
    fn stability_region_and_boundary() {
        let grid = ScanGrid {
            tau: "0.036:0.040:5".parse().unwrap(),
            threshold: "0.31:0.39:9".parse().unwrap(),
            ..ScanGrid::default()
        };
        let r = run_scan(&grid, &refs()).unwrap();
        let target = MagicSet::new(REFERENCE_MAGIC.to_vec()).unwrap();
        let s = stability_report(&r, &target).unwrap();
        assert!(s.contains(REFERENCE_TAU, 0.39, 1e-9));
        assert!(!s.boundary.is_empty());
        for b in &s.boundary {
            assert!(b.entered.is_some() ^ b.left.is_some());
        }
    }

    #[test]
    fn unreachable_target_gives_empty_region() {
        let grid = ScanGrid {
            tau: "0.03:0.05:3".parse().unwrap(),
            threshold: "0.3:0.5:3".parse().unwrap(),
            ..ScanGrid::default()
        };
        let r = run_scan(&grid, &refs()).unwrap();
        let s = stability_report(&r, &MagicSet::new(vec![1]).unwrap()).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.components, 0);
        assert!(s.boundary.is_empty());
    }
}
