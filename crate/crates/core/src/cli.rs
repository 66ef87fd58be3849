//! The `qshell` command line.
//!
//! [`run`] does all the work and returns what should go to stdout and
//! stderr together with the exit status, so the binary stays a thin shim.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::compare::{compare, render_report, MatchMode, DEFAULT_ROW_WINDOW};
use crate::datasets::{load_dataset_file, ReferenceDataset, Registry};
use crate::error::{Error, Result};
use crate::pipeline::{levels_for, ECut, REFERENCE_E_CUT, REFERENCE_MAGIC, REFERENCE_PARTICLES, REFERENCE_TAU};
use crate::scan::{run_scan, stability_report, Axis, ScanGrid};
use crate::shells::{build_shell_table, fmt3, render_table, Format, MagicSet, ShellTable, DEFAULT_THRESHOLD};
use crate::spectrum::{Level, Model, ModelId};

/// Exit status when a comparison leaves unsupported predictions.
pub const EXIT_SPURIOUS: i32 = 2;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "qshell", version, about = "Shell structure and magic numbers of the q-deformed 3-d harmonic oscillator")]
pub struct Cli {
    /// Print a version banner on stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List single-particle levels of a model, sorted by energy.
    Spectrum(SpectrumArgs),
    /// Level table with running occupancy, gaps and magic numbers.
    Table(TableArgs),
    /// Magic numbers only, optionally with the gap after given counts.
    Magic(MagicArgs),
    /// Compare predicted magic numbers with reference datasets.
    Compare(CompareArgs),
    /// Sweep deformation and gap threshold.
    Scan(ScanArgs),
    /// List or show reference datasets.
    Datasets(DatasetsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Markdown,
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Markdown => Format::Markdown,
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Strict,
    Row,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// q-exact, q-taylor2, nilsson, plain-ho or pseudo-3nl.
    #[arg(long, default_value = "q-exact")]
    pub model: String,

    /// Deformation tau, q = e^tau.
    #[arg(long, default_value_t = REFERENCE_TAU, allow_negative_numbers = true)]
    pub tau: f64,

    /// Nilsson mu' (required with --model nilsson).
    #[arg(long, allow_negative_numbers = true)]
    pub mu_prime: Option<f64>,

    /// Keep levels with energy at or below this value (units of hbar omega_0).
    #[arg(long, default_value_t = REFERENCE_E_CUT, allow_negative_numbers = true)]
    pub e_cut: f64,

    /// Instead of --e-cut, keep levels until this many particles are placed.
    #[arg(long, conflicts_with = "e_cut")]
    pub particles: Option<u32>,
}

impl ModelArgs {
    fn model(&self) -> Result<Model> {
        let id: ModelId = self.model.parse()?;
        Ok(match id {
            ModelId::QExact => Model::q_exact(self.tau)?,
            ModelId::QTaylor2 => Model::QTaylor2 { tau: self.tau },
            ModelId::Nilsson => Model::Nilsson {
                mu_prime: self
                    .mu_prime
                    .ok_or_else(|| Error::invalid("--mu-prime is required for the nilsson model"))?,
            },
            ModelId::PlainHo => Model::PlainHo,
            ModelId::Pseudo3nl => Model::Pseudo3nl,
        })
    }

    fn cut(&self) -> ECut {
        match self.particles {
            Some(p) => ECut::Particles(p),
            None => ECut::Energy(self.e_cut),
        }
    }

    fn levels(&self) -> Result<Vec<Level>> {
        levels_for(&self.model()?, self.cut())
    }
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "markdown")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Minimum gap closing a shell.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD, allow_negative_numbers = true)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value = "markdown")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct MagicArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD, allow_negative_numbers = true)]
    pub threshold: f64,
    /// Also report the gap following these cumulative counts.
    #[arg(long, value_delimiter = ',')]
    pub gap_at: Vec<u32>,
    #[arg(long, value_enum, default_value = "markdown")]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Args)]
pub struct RefArgs {
    /// Dataset ids, comma separated; defaults to every experiment.
    #[arg(long, value_delimiter = ',')]
    pub refs: Vec<String>,
    /// Extra dataset files (same JSON schema as the built-ins).
    #[arg(long = "dataset-file")]
    pub dataset_files: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "strict")]
    pub mode: ModeArg,
    /// Strict mode: window for entries printed without an uncertainty.
    #[arg(long, default_value_t = 0)]
    pub slack: u32,
    /// Row mode: relative window.
    #[arg(long, default_value_t = DEFAULT_ROW_WINDOW)]
    pub window: f64,
}

impl RefArgs {
    fn mode(&self) -> MatchMode {
        match self.mode {
            ModeArg::Strict => MatchMode::Strict { slack: self.slack },
            ModeArg::Row => MatchMode::RowAlignment { window: self.window },
        }
    }

    fn references(&self) -> Result<Vec<ReferenceDataset>> {
        let mut reg = Registry::from_env()?;
        let mut extra_ids = Vec::new();
        for path in &self.dataset_files {
            let sets = load_dataset_file(path)?;
            extra_ids.extend(sets.iter().map(|d| d.id.clone()));
            reg.extend(sets)?;
        }
        if self.refs.is_empty() {
            let mut sets = reg.experiments();
            for id in &extra_ids {
                if !sets.iter().any(|d| &d.id == id) {
                    sets.push(reg.get(id)?.clone());
                }
            }
            Ok(sets)
        } else {
            reg.select(&self.refs)
        }
    }
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD, allow_negative_numbers = true)]
    pub threshold: f64,
    #[command(flatten)]
    pub refs: RefArgs,
    #[arg(long, value_enum, default_value = "markdown")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Deformation range lo:hi:steps (or a single value).
    #[arg(long, default_value = "0.03:0.05:21", allow_hyphen_values = true)]
    pub tau: String,
    /// Threshold range lo:hi:steps (or a single value).
    #[arg(long, default_value = "0.3:0.5:21", allow_hyphen_values = true)]
    pub threshold: String,
    /// Fixed energy cut; by default each deformation keeps levels up to the
    /// particle count given by --particles.
    #[arg(long, allow_negative_numbers = true)]
    pub e_cut: Option<f64>,
    #[arg(long, default_value_t = REFERENCE_PARTICLES, conflicts_with = "e_cut")]
    pub particles: u32,
    /// Weight of unsupported predictions in the score.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub weight: f64,
    #[command(flatten)]
    pub refs: RefArgs,
    /// Report where the scan reproduces a target set: `reference` for the
    /// reference set, or a comma-separated list.
    #[arg(long)]
    pub stability: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct DatasetsArgs {
    /// Show a single dataset.
    pub id: Option<String>,
    #[command(flatten)]
    pub files: DatasetFiles,
    #[arg(long, value_enum, default_value = "markdown")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct DatasetFiles {
    #[arg(long = "dataset-file")]
    pub dataset_files: Vec<PathBuf>,
}

/// Captured result of one invocation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CliOutput {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

pub fn run<I, T>(args: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            return if code == 0 {
                CliOutput { stdout: text, stderr: String::new(), code }
            } else {
                CliOutput { stdout: String::new(), stderr: text, code }
            };
        }
    };

    let mut out = CliOutput::default();
    if cli.verbose {
        out.stderr = format!("qshell {}\n", env!("CARGO_PKG_VERSION"));
    }
    match dispatch(&cli.command) {
        Ok((stdout, code)) => {
            out.stdout = stdout;
            out.code = code;
        }
        Err(e) => {
            let _ = writeln!(out.stderr, "error: {e}");
            out.code = match e {
                Error::InvalidArgument(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            };
        }
    }
    out
}

fn dispatch(command: &Command) -> Result<(String, i32)> {
    match command {
        Command::Spectrum(a) => Ok((cmd_spectrum(a)?, 0)),
        Command::Table(a) => Ok((cmd_table(a)?, 0)),
        Command::Magic(a) => Ok((cmd_magic(a)?, 0)),
        Command::Compare(a) => cmd_compare(a),
        Command::Scan(a) => Ok((cmd_scan(a)?, 0)),
        Command::Datasets(a) => Ok((cmd_datasets(a)?, 0)),
    }
}

fn shell_table(model: &ModelArgs, threshold: f64) -> Result<ShellTable> {
    build_shell_table(&model.levels()?, threshold)
}

pub fn cmd_spectrum(a: &SpectrumArgs) -> Result<String> {
    let mut levels = a.model.levels()?;
    levels.sort_by(|x, y| x.energy.total_cmp(&y.energy).then(x.n.cmp(&y.n)).then(x.l.cmp(&y.l)));
    match Format::from(a.format) {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&levels)?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut s = String::from("n,l,energy,degeneracy\n");
            for lv in &levels {
                let _ = writeln!(s, "{},{},{},{}", lv.n, lv.l, fmt3(lv.energy), lv.degeneracy);
            }
            Ok(s)
        }
        Format::Markdown => {
            let mut s = String::from("| n | l | E(n,l) | 2(2l+1) |\n|--:|--:|-------:|--------:|\n");
            for lv in &levels {
                let _ = writeln!(s, "| {} | {} | {} | {} |", lv.n, lv.l, fmt3(lv.energy), lv.degeneracy);
            }
            Ok(s)
        }
    }
}

pub fn cmd_table(a: &TableArgs) -> Result<String> {
    render_table(&shell_table(&a.model, a.threshold)?, a.format.into())
}

pub fn cmd_magic(a: &MagicArgs) -> Result<String> {
    let table = shell_table(&a.model, a.threshold)?;
    let gaps: Vec<(u32, f64)> = a
        .gap_at
        .iter()
        .map(|&c| table.gap_at(c).map(|g| (c, g)))
        .collect::<Result<_>>()?;
    let values = table.magic().values();
    Ok(match Format::from(a.format) {
        Format::Json => {
            let doc = serde_json::json!({
                "threshold": table.threshold(),
                "magic": values,
                "gaps": gaps.iter().map(|(c, g)| serde_json::json!({"cumulative": c, "gap_after": if g.is_finite() { Some(*g) } else { None }})).collect::<Vec<_>>(),
            });
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("magic\n");
            for v in values {
                let _ = writeln!(s, "{v}");
            }
            if !gaps.is_empty() {
                s.push_str("\ncumulative,gap_after\n");
                for (c, g) in &gaps {
                    let _ = writeln!(s, "{c},{}", if g.is_finite() { fmt3(*g) } else { String::new() });
                }
            }
            s
        }
        Format::Markdown => {
            let list: Vec<String> = values.iter().map(u32::to_string).collect();
            let mut s = format!("magic ({}): {}\n", values.len(), list.join(", "));
            for (c, g) in &gaps {
                let gap = if g.is_finite() { fmt3(*g) } else { "none (last level)".into() };
                let _ = writeln!(s, "gap after {c}: {gap}");
            }
            s
        }
    })
}

/// Exit status 0 when every prediction is supported, [`EXIT_SPURIOUS`] otherwise.
pub fn cmd_compare(a: &CompareArgs) -> Result<(String, i32)> {
    let references = a.refs.references()?;
    let table = shell_table(&a.model, a.threshold)?;
    let report = compare(table.magic(), &references, a.refs.mode())?;
    let text = render_report(&report, &references, a.format.into())?;
    let code = if report.all_supported() { 0 } else { EXIT_SPURIOUS };
    Ok((text, code))
}

fn parse_target(spec: &str) -> Result<MagicSet> {
    if spec.eq_ignore_ascii_case("reference") {
        return MagicSet::new(REFERENCE_MAGIC.to_vec());
    }
    let values = spec
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::invalid(format!("malformed target entry '{t}'")))
        })
        .collect::<Result<Vec<u32>>>()?;
    MagicSet::new(values)
}

pub fn cmd_scan(a: &ScanArgs) -> Result<String> {
    let grid = ScanGrid {
        tau: a.tau.parse::<Axis>()?,
        threshold: a.threshold.parse::<Axis>()?,
        e_cut: match a.e_cut {
            Some(e) => ECut::Energy(e),
            None => ECut::Particles(a.particles),
        },
        mode: a.refs.mode(),
        spurious_weight: a.weight,
    };
    let target = a.stability.as_deref().map(parse_target).transpose()?;
    let result = run_scan(&grid, &a.refs.references()?)?;
    let stability = target.map(|t| stability_report(&result, &t)).transpose()?;

    match Format::from(a.format) {
        Format::Json => {
            let doc = serde_json::json!({ "scan": result, "stability": stability });
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut s = result.to_csv()?;
            if let Some(st) = stability {
                s.push('\n');
                for line in st.render().lines() {
                    let _ = writeln!(s, "# {line}");
                }
            }
            Ok(s)
        }
        Format::Markdown => {
            let mut s = String::from("| tau | threshold | score | magic |\n|---:|---:|---:|:---|\n");
            for p in &result.points {
                let m: Vec<String> = p.magic.values().iter().map(u32::to_string).collect();
                let _ = writeln!(s, "| {} | {} | {} | {} |", p.tau, p.threshold, p.score, m.join(", "));
            }
            let _ = writeln!(s, "\nobjective: {}", result.objective);
            if let Some(st) = stability {
                s.push('\n');
                s.push_str(&st.render());
            }
            Ok(s)
        }
    }
}

pub fn cmd_datasets(a: &DatasetsArgs) -> Result<String> {
    let mut reg = Registry::from_env()?;
    for path in &a.files.dataset_files {
        reg.extend(load_dataset_file(path)?)?;
    }
    let sets: Vec<ReferenceDataset> = match &a.id {
        Some(id) => vec![reg.get(id)?.clone()],
        None => reg.all().to_vec(),
    };
    let entry = |p: &crate::datasets::DataPoint| {
        let mut s = p.n.to_string();
        if let Some(sig) = p.sigma {
            let _ = write!(s, "±{sig}");
        }
        if p.weak {
            s = format!("({s})");
        }
        s
    };
    Ok(match Format::from(a.format) {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&sets)?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("id,kind,n,sigma,weak\n");
            for d in &sets {
                let kind = serde_json::to_value(d.kind)?;
                for p in &d.values {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{}",
                        d.id,
                        kind.as_str().unwrap_or_default(),
                        p.n,
                        p.sigma.map(|v| v.to_string()).unwrap_or_default(),
                        p.weak
                    );
                }
            }
            s
        }
        Format::Markdown => {
            let mut s = String::from("| id | kind | source | values |\n|---|---|---|---|\n");
            for d in &sets {
                let kind = serde_json::to_value(d.kind)?;
                let vals: Vec<String> = d.values.iter().map(entry).collect();
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} |",
                    d.id,
                    kind.as_str().unwrap_or_default(),
                    d.source,
                    vals.join(", ")
                );
            }
            s
        }
    })
}
