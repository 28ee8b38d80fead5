//! C ABI over the `dofinetti` library.
//!
//! Tables and datasets are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns a
//! [`DfStatus`]; on failure `df_last_error_message` describes the cause.
//!
//! Bivariate graphs are passed as integers: 0 = `X->Y`, 1 = `Y->X`, 2 = `X|Y`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use dofinetti::discover::discover_bivariate_report;
use dofinetti::estimate::{fit_joint, truncated_factorization};
use dofinetti::oracle::analytic_post_interventional;
use dofinetti::simulate::{polya_joint_log_prob, sample_icm_bivariate};
use dofinetti::{AxisKey, BetaPrior, BivariateGraph, Dag, Error, ExchangeableDataset, InterventionSet, JointTable};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownAxis = 3,
    ZeroMass = 4,
    InconsistentQuery = 5,
    Cyclic = 6,
    InsufficientData = 7,
    Io = 8,
    Panic = 9,
}

/// Opaque joint probability table.
pub struct DfTable(JointTable);

/// Opaque grouped dataset.
pub struct DfDataset(ExchangeableDataset);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> DfStatus {
    match err {
        Error::UnknownAxis(_) => DfStatus::UnknownAxis,
        Error::ZeroMassContext { .. } => DfStatus::ZeroMass,
        Error::ConditioningInconsistent(_)
        | Error::InconsistentInterventionPattern(_)
        | Error::OverlappingAxes(_)
        | Error::DuplicateAxis(_) => DfStatus::InconsistentQuery,
        Error::Cyclic => DfStatus::Cyclic,
        Error::InsufficientData(_) => DfStatus::InsufficientData,
        Error::Io { .. } => DfStatus::Io,
        _ => DfStatus::InvalidArgument,
    }
}

enum Fail {
    Null,
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DfStatus::Ok,
        Ok(Err(Fail::Null)) => {
            set_error("null pointer argument".into());
            DfStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            DfStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null)
}

unsafe fn as_slice<'a, T>(p: *const T, len: usize) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null);
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null);
    }
    out.write(value);
    Ok(())
}

fn graph_of(code: i32) -> Result<BivariateGraph, Fail> {
    match code {
        0 => Ok(BivariateGraph::XToY),
        1 => Ok(BivariateGraph::YToX),
        2 => Ok(BivariateGraph::Independent),
        _ => Err(Error::InvalidArgument(format!("unknown graph code {code}")).into()),
    }
}

fn code_of(graph: BivariateGraph) -> i32 {
    match graph {
        BivariateGraph::XToY => 0,
        BivariateGraph::YToX => 1,
        BivariateGraph::Independent => 2,
    }
}

unsafe fn intervention_of(
    vars: *const usize,
    positions: *const usize,
    values: *const usize,
    len: usize,
) -> Result<InterventionSet, Fail> {
    let (v, p, x) = (as_slice(vars, len)?, as_slice(positions, len)?, as_slice(values, len)?);
    Ok(InterventionSet::new(
        (0..len).map(|k| (AxisKey::new(v[k], p[k]), x[k])),
    )?)
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn df_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Samples a bivariate dataset; variable 0 is X and variable 1 is Y.
#[no_mangle]
pub unsafe extern "C" fn df_dataset_simulate(
    graph: i32,
    alpha: f64,
    beta: f64,
    num_envs: usize,
    num_positions: usize,
    seed: u64,
    out: *mut *mut DfDataset,
) -> DfStatus {
    guard(|| {
        let prior = BetaPrior::new(alpha, beta)?;
        let ds = sample_icm_bivariate(graph_of(graph)?, prior, num_envs, num_positions, seed)?;
        write_out(out, Box::into_raw(Box::new(DfDataset(ds))))
    })
}

/// Builds a dataset from values laid out environment-major, then position,
/// then variable.
#[no_mangle]
pub unsafe extern "C" fn df_dataset_new(
    num_envs: usize,
    num_positions: usize,
    cardinalities: *const usize,
    num_vars: usize,
    values: *const u32,
    num_values: usize,
    out: *mut *mut DfDataset,
) -> DfStatus {
    guard(|| {
        let cards = as_slice(cardinalities, num_vars)?.to_vec();
        let vals = as_slice(values, num_values)?.to_vec();
        let ds = ExchangeableDataset::new(num_envs, num_positions, cards, vals)?;
        write_out(out, Box::into_raw(Box::new(DfDataset(ds))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn df_dataset_free(ds: *mut DfDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Writes the environment, position and variable counts.
#[no_mangle]
pub unsafe extern "C" fn df_dataset_shape(
    ds: *const DfDataset,
    num_envs: *mut usize,
    num_positions: *mut usize,
    num_vars: *mut usize,
) -> DfStatus {
    guard(|| {
        let ds = &as_ref(ds)?.0;
        write_out(num_envs, ds.num_envs())?;
        write_out(num_positions, ds.num_positions())?;
        write_out(num_vars, ds.num_vars())
    })
}

/// Value of `var` at `pos` in environment `env`.
#[no_mangle]
pub unsafe extern "C" fn df_dataset_get(
    ds: *const DfDataset,
    env: usize,
    pos: usize,
    var: usize,
    out: *mut usize,
) -> DfStatus {
    guard(|| {
        let ds = &as_ref(ds)?.0;
        if env >= ds.num_envs() || pos >= ds.num_positions() || var >= ds.num_vars() {
            return Err(Error::InvalidArgument(format!("index ({env}, {pos}, {var}) out of range")).into());
        }
        write_out(out, ds.get(env, pos, var))
    })
}

/// Bivariate graph discovered from positions 0 and 1.
#[no_mangle]
pub unsafe extern "C" fn df_discover_bivariate(
    ds: *const DfDataset,
    significance: f64,
    out_graph: *mut i32,
) -> DfStatus {
    guard(|| {
        let report = discover_bivariate_report(&as_ref(ds)?.0, significance, false)?;
        write_out(out_graph, code_of(report.graph))
    })
}

/// Empirical joint table of one environment block.
#[no_mangle]
pub unsafe extern "C" fn df_fit_joint(ds: *const DfDataset, out: *mut *mut DfTable) -> DfStatus {
    guard(|| {
        let table = fit_joint(&as_ref(ds)?.0);
        write_out(out, Box::into_raw(Box::new(DfTable(table))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn df_table_free(t: *mut DfTable) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of axes and of cells.
#[no_mangle]
pub unsafe extern "C" fn df_table_shape(t: *const DfTable, num_axes: *mut usize, num_cells: *mut usize) -> DfStatus {
    guard(|| {
        let t = &as_ref(t)?.0;
        write_out(num_axes, t.axes().len())?;
        write_out(num_cells, t.len())
    })
}

/// Variable, position and cardinality of axis `index`; axis 0 varies slowest.
#[no_mangle]
pub unsafe extern "C" fn df_table_axis(
    t: *const DfTable,
    index: usize,
    var: *mut usize,
    pos: *mut usize,
    card: *mut usize,
) -> DfStatus {
    guard(|| {
        let t = &as_ref(t)?.0;
        let axis = t
            .axes()
            .get(index)
            .ok_or_else(|| Error::InvalidArgument(format!("axis index {index} out of range")))?;
        write_out(var, axis.key.var)?;
        write_out(pos, axis.key.pos)?;
        write_out(card, axis.card)
    })
}

/// Copies the cell probabilities in row-major order; `len` must equal the cell count.
#[no_mangle]
pub unsafe extern "C" fn df_table_probs(t: *const DfTable, buf: *mut f64, len: usize) -> DfStatus {
    guard(|| {
        let probs = as_ref(t)?.0.probs();
        if len != probs.len() {
            return Err(Error::DimensionMismatch(format!("buffer holds {len}, table has {}", probs.len())).into());
        }
        if buf.is_null() {
            return Err(Fail::Null);
        }
        slice::from_raw_parts_mut(buf, len).copy_from_slice(probs);
        Ok(())
    })
}

/// Post-interventional block table from the exchangeable truncated
/// factorization. The DAG has `num_vars` nodes and edges
/// `edge_from[k] -> edge_to[k]`; the intervention forces
/// `(vars[k], positions[k])` to `values[k]`.
#[no_mangle]
pub unsafe extern "C" fn df_truncated_factorization(
    t: *const DfTable,
    num_vars: usize,
    edge_from: *const usize,
    edge_to: *const usize,
    num_edges: usize,
    vars: *const usize,
    positions: *const usize,
    values: *const usize,
    num_interventions: usize,
    out: *mut *mut DfTable,
) -> DfStatus {
    guard(|| {
        let (from, to) = (as_slice(edge_from, num_edges)?, as_slice(edge_to, num_edges)?);
        let dag = Dag::new(num_vars, from.iter().copied().zip(to.iter().copied()))?;
        let iv = intervention_of(vars, positions, values, num_interventions)?;
        let post = truncated_factorization(&as_ref(t)?.0, &dag, &iv)?;
        write_out(out, Box::into_raw(Box::new(DfTable(post))))
    })
}

/// Exact post-interventional bivariate block table under a Beta prior.
#[no_mangle]
pub unsafe extern "C" fn df_analytic_post_interventional(
    graph: i32,
    alpha: f64,
    beta: f64,
    num_positions: usize,
    vars: *const usize,
    positions: *const usize,
    values: *const usize,
    num_interventions: usize,
    out: *mut *mut DfTable,
) -> DfStatus {
    guard(|| {
        let prior = BetaPrior::new(alpha, beta)?;
        let iv = intervention_of(vars, positions, values, num_interventions)?;
        let table = analytic_post_interventional(graph_of(graph)?, prior, num_positions, &iv)?;
        write_out(out, Box::into_raw(Box::new(DfTable(table))))
    })
}

/// Sum of squared cell differences after aligning axes.
#[no_mangle]
pub unsafe extern "C" fn df_table_squared_error(a: *const DfTable, b: *const DfTable, out: *mut f64) -> DfStatus {
    guard(|| {
        let e = as_ref(a)?.0.squared_error(&as_ref(b)?.0)?;
        write_out(out, e)
    })
}

/// Log-probability of a binary `(x, y)` sequence under the causal Pólya urn.
#[no_mangle]
pub unsafe extern "C" fn df_urn_log_prob(
    xs: *const u8,
    ys: *const u8,
    len: usize,
    alpha: f64,
    beta: f64,
    out: *mut f64,
) -> DfStatus {
    guard(|| {
        let prior = BetaPrior::new(alpha, beta)?;
        let lp = polya_joint_log_prob(as_slice(xs, len)?, as_slice(ys, len)?, prior)?;
        write_out(out, lp)
    })
}
