//! Spectrum, shell structure and magic numbers of the three-dimensional
//! q-deformed harmonic oscillator with u_q(3) > so_q(3) symmetry, and their
//! comparison with alkali metal cluster data.
//!
//! The pipeline is: [`spectrum::enumerate_levels`] produces levels,
//! [`shells::build_shell_table`] orders and fills them and reads off magic
//! numbers, [`compare::compare`] scores those against [`datasets`], and
//! [`scan`] repeats the whole thing over a parameter grid.

pub mod cli;
pub mod compare;
pub mod datasets;
pub mod error;
pub mod pipeline;
pub mod qmath;
pub mod scan;
pub mod shells;
pub mod spectrum;

pub use compare::{compare, ComparisonReport, MatchMode};
pub use datasets::{DatasetKind, ReferenceDataset, Registry};
pub use error::{Error, Result};
pub use pipeline::{q_shell_table, ECut};
pub use qmath::{q_number, DeformationParameter};
pub use scan::{run_scan, stability_report, ScanGrid, ScanResult};
pub use shells::{build_shell_table, gap_at, render_table, Format, MagicSet, ShellTable};
pub use spectrum::{enumerate_levels, Level, Model, ModelId};
