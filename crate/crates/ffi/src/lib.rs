//! C ABI over `qshell`.
//!
//! Every fallible call returns a [`QshStatus`] and writes results through
//! out-pointers. On failure, [`qsh_last_error_message`] describes the most
//! recent error on the calling thread. Shell tables are opaque handles
//! released with [`qsh_shell_table_free`]; strings returned by the library
//! are released with [`qsh_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qshell::compare::{compare, render_report, MatchMode};
use qshell::datasets::Registry;
use qshell::pipeline::{q_shell_table, ECut};
use qshell::shells::{build_shell_table, render_table, Format, MagicSet, ShellTable};
use qshell::spectrum::{pseudo_3nl_fill, Level, Model};
use qshell::{DeformationParameter, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QshStatus {
    Ok = 0,
    InvalidArgument = 1,
    NotFound = 2,
    EmptyResult = 3,
    Io = 4,
    NullPointer = 5,
    BufferTooSmall = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QshModel {
    QExact = 0,
    QTaylor2 = 1,
    Nilsson = 2,
    PlainHo = 3,
    Pseudo3nl = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QshFormat {
    Markdown = 0,
    Csv = 1,
    Json = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QshMatchMode {
    /// Parameter is the slack for entries printed without an uncertainty.
    Strict = 0,
    /// Parameter is the relative window.
    Row = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QshLevel {
    pub n: u32,
    pub l: u32,
    pub energy: f64,
    pub degeneracy: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QshShellRow {
    pub n: u32,
    pub l: u32,
    pub energy: f64,
    pub degeneracy: u32,
    pub cumulative: u32,
    /// `INFINITY` on the last row.
    pub gap_after: f64,
    pub is_magic: bool,
}

/// Opaque shell table.
pub struct QshShellTable {
    inner: ShellTable,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> QshStatus {
    match err {
        Error::InvalidArgument(_) => QshStatus::InvalidArgument,
        Error::NotFound(_) => QshStatus::NotFound,
        Error::EmptyResult(_) => QshStatus::EmptyResult,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => QshStatus::Io,
    }
}

struct Fail(QshStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(QshStatus::NullPointer, format!("{what} is null"))
}

/// Run `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QshStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            QshStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            QshStatus::Internal
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn to_format(f: QshFormat) -> Format {
    match f {
        QshFormat::Markdown => Format::Markdown,
        QshFormat::Csv => Format::Csv,
        QshFormat::Json => Format::Json,
    }
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(QshStatus::Internal, "output contains a NUL byte".into()))
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qsh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn qsh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn qsh_q_number(x: f64, tau: f64, out: *mut f64) -> QshStatus {
    guard(|| {
        let v = qshell::q_number(x, DeformationParameter::new(tau)?)?;
        write(out, v, "out")
    })
}

/// Energy of level `(n, l)`. `param` is tau for the q models, mu' for
/// Nilsson, and ignored otherwise.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn qsh_energy(model: QshModel, n: u32, l: u32, param: f64, out: *mut f64) -> QshStatus {
    guard(|| {
        let m = match model {
            QshModel::QExact => Model::q_exact(param)?,
            QshModel::QTaylor2 => Model::QTaylor2 { tau: param },
            QshModel::Nilsson => Model::Nilsson { mu_prime: param },
            QshModel::PlainHo => Model::PlainHo,
            QshModel::Pseudo3nl => Model::Pseudo3nl,
        };
        write(out, m.energy(n, l)?, "out")
    })
}

fn boxed(table: ShellTable) -> *mut QshShellTable {
    Box::into_raw(Box::new(QshShellTable { inner: table }))
}

/// Shell table of the q-deformed oscillator with levels up to `e_cut`.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle owned by
/// the caller.
#[no_mangle]
pub unsafe extern "C" fn qsh_shell_table_new(
    tau: f64,
    threshold: f64,
    e_cut: f64,
    out: *mut *mut QshShellTable,
) -> QshStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let table = q_shell_table(tau, threshold, ECut::Energy(e_cut))?;
        write(out, boxed(table), "out")
    })
}

/// Shell table from caller-supplied levels. Degeneracies are taken as given.
///
/// # Safety
/// `levels` must point to `len` readable `QshLevel`s; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qsh_shell_table_from_levels(
    levels: *const QshLevel,
    len: usize,
    threshold: f64,
    out: *mut *mut QshShellTable,
) -> QshStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let slice = if len == 0 {
            &[][..]
        } else if levels.is_null() {
            return Err(null("levels"));
        } else {
            std::slice::from_raw_parts(levels, len)
        };
        let levels: Vec<Level> = slice
            .iter()
            .map(|lv| Level {
                n: lv.n,
                l: lv.l,
                energy: lv.energy,
                degeneracy: lv.degeneracy,
            })
            .collect();
        write(out, boxed(build_shell_table(&levels, threshold)?), "out")
    })
}

/// # Safety
/// `table` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qsh_shell_table_free(table: *mut QshShellTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

unsafe fn table_ref<'a>(table: *const QshShellTable) -> Result<&'a ShellTable, Fail> {
    table.as_ref().map(|t| &t.inner).ok_or_else(|| null("table"))
}

/// # Safety
/// `table` must be a live handle; `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qsh_shell_table_len(table: *const QshShellTable, out_len: *mut usize) -> QshStatus {
    guard(|| write(out_len, table_ref(table)?.rows().len(), "out_len"))
}

/// # Safety
/// `table` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qsh_shell_table_row(
    table: *const QshShellTable,
    index: usize,
    out: *mut QshShellRow,
) -> QshStatus {
    guard(|| {
        let t = table_ref(table)?;
        let row = t.rows().get(index).ok_or_else(|| {
            Fail(
                QshStatus::NotFound,
                format!("row {index} out of range (table has {})", t.rows().len()),
            )
        })?;
        let value = QshShellRow {
            n: row.level.n,
            l: row.level.l,
            energy: row.level.energy,
            degeneracy: row.level.degeneracy,
            cumulative: row.cumulative,
            gap_after: row.gap_or_inf(),
            is_magic: t.is_magic(row),
        };
        write(out, value, "out")
    })
}

/// Copy the magic numbers into `buf`. `out_len` always receives the full
/// count; if `capacity` is smaller, nothing is copied and
/// `QSH_STATUS_BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `table` must be a live handle, `buf` must hold `capacity` `uint32_t`s
/// (may be null when `capacity` is 0), `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qsh_shell_table_magic(
    table: *const QshShellTable,
    buf: *mut u32,
    capacity: usize,
    out_len: *mut usize,
) -> QshStatus {
    guard(|| copy_out(table_ref(table)?.magic().values(), buf, capacity, out_len))
}

unsafe fn copy_out(values: &[u32], buf: *mut u32, capacity: usize, out_len: *mut usize) -> Result<(), Fail> {
    write(out_len, values.len(), "out_len")?;
    if capacity < values.len() {
        return Err(Fail(
            QshStatus::BufferTooSmall,
            format!("need {} entries, buffer holds {capacity}", values.len()),
        ));
    }
    if !values.is_empty() {
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    }
    Ok(())
}

/// Gap after the row closing at `cumulative` (`INFINITY` for the last row).
///
/// # Safety
/// `table` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qsh_shell_table_gap_at(
    table: *const QshShellTable,
    cumulative: u32,
    out: *mut f64,
) -> QshStatus {
    guard(|| write(out, table_ref(table)?.gap_at(cumulative)?, "out"))
}

/// Render the table; release the string with `qsh_string_free`.
///
/// # Safety
/// `table` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qsh_shell_table_render(
    table: *const QshShellTable,
    format: QshFormat,
    out: *mut *mut c_char,
) -> QshStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = render_table(table_ref(table)?, to_format(format))?;
        write(out, into_c_string(text)?, "out")
    })
}

/// Compare a predicted magic set with built-in datasets.
///
/// `dataset_ids` is a comma-separated list, or null for every experiment.
/// `out_spurious` receives the number of unsupported predictions; `out_report`,
/// if not null, receives the rendered report (free with `qsh_string_free`).
///
/// # Safety
/// `predicted` must point to `len` readable `uint32_t`s; `dataset_ids` must
/// be null or NUL-terminated; out-pointers must be valid where required.
#[no_mangle]
pub unsafe extern "C" fn qsh_compare(
    predicted: *const u32,
    len: usize,
    dataset_ids: *const c_char,
    mode: QshMatchMode,
    mode_param: f64,
    format: QshFormat,
    out_spurious: *mut usize,
    out_report: *mut *mut c_char,
) -> QshStatus {
    guard(|| {
        if out_spurious.is_null() {
            return Err(null("out_spurious"));
        }
        let values = if len == 0 {
            Vec::new()
        } else if predicted.is_null() {
            return Err(null("predicted"));
        } else {
            std::slice::from_raw_parts(predicted, len).to_vec()
        };
        let set = MagicSet::new(values)?;
        let reg = Registry::from_env()?;
        let refs = if dataset_ids.is_null() {
            reg.experiments()
        } else {
            let ids = CStr::from_ptr(dataset_ids)
                .to_str()
                .map_err(|_| Fail(QshStatus::InvalidArgument, "dataset ids are not utf-8".into()))?;
            let ids: Vec<&str> = ids.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            reg.select(&ids)?
        };
        let mode = match mode {
            QshMatchMode::Strict => {
                if !(mode_param.is_finite() && mode_param >= 0.0 && mode_param <= f64::from(u32::MAX)) {
                    return Err(Fail(QshStatus::InvalidArgument, format!("invalid slack {mode_param}")));
                }
                MatchMode::Strict { slack: mode_param as u32 }
            }
            QshMatchMode::Row => MatchMode::RowAlignment { window: mode_param },
        };
        let report = compare(&set, &refs, mode)?;
        write(out_spurious, report.spurious.len(), "out_spurious")?;
        if !out_report.is_null() {
            let text = render_report(&report, &refs, to_format(format))?;
            out_report.write(into_c_string(text)?);
        }
        Ok(())
    })
}

/// Running totals of the `3n + l` groups for `k = 0..=k_max`, copied like
/// [`qsh_shell_table_magic`].
///
/// # Safety
/// `buf` must hold `capacity` `uint32_t`s; `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qsh_pseudo_3nl_fill(
    k_max: u32,
    buf: *mut u32,
    capacity: usize,
    out_len: *mut usize,
) -> QshStatus {
    guard(|| {
        let totals: Vec<u32> = pseudo_3nl_fill(k_max).iter().map(|g| g.cumulative).collect();
        copy_out(&totals, buf, capacity, out_len)
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qsh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
