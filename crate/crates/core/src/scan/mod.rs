//! Config-driven time scans, difference scans and the N-scaling protocol.
//!
//! Grid cells are evaluated on the current rayon pool and gathered in
//! config order, so output does not depend on the thread count.

mod config;
mod scaling;
mod table;

pub use config::{
    BathGrid, Cell, Column, DiffMode, DiffSpec, OutputSpec, ScanConfig, Sweep, TimeGrid,
    DEFAULT_TIME_POINTS,
};
pub use scaling::{
    ols_fit, run_n_scaling, LabeledState, LinearFit, ScalingConfig, ScalingFit, ScalingReport,
    EXACT_FIT_RESIDUAL,
};
pub use table::{config_echo, format_sig, metadata, ScanTable, Value, CSV_DIGITS, UNITS_NOTE};

use rayon::prelude::*;

use crate::channel::{evolve_with_derivative, BathSpec, Picture};
use crate::diagnostics::{local_coherence, local_temperature, negativity, purity};
use crate::error::{Error, Result};
use crate::metrology::{m1_m2, max_qfi_over_time, qfi_of_state, sld, DEFAULT_SLD_CUTOFF};
use crate::opalg::{kron_all, reduce_to_qubit, DensityMatrix};

/// Runs `f` on a dedicated pool of `threads` workers (0 picks the default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(f))
}

/// Tensor product of the single-qubit reductions of `rho`.
pub fn productize(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let locals = (0..rho.n_qubits())
        .map(|q| reduce_to_qubit(rho, q).map(DensityMatrix::into_matrix))
        .collect::<Result<Vec<_>>>()?;
    DensityMatrix::new(kron_all(locals.iter()))
}

fn base_header(config: &ScanConfig) -> Vec<String> {
    let mut h = vec!["beta".to_string()];
    h.extend(config.sweep_names().into_iter().map(String::from));
    h
}

fn base_row(cell: &Cell) -> Vec<Value> {
    let mut r = vec![Value::Num(cell.bath.beta)];
    r.extend(cell.params.iter().map(|&v| Value::Num(v)));
    r
}

fn bound_at(bath: &BathSpec, t: f64, n: usize) -> f64 {
    // The bound is undefined at t = 0 and once p rounds to 1.
    m1_m2(bath, t).map(|r| r.bound_value(n)).unwrap_or(f64::NAN)
}

fn time_row(cell: &Cell, rho_in: &DensityMatrix, t: f64, columns: &[Column]) -> Result<Vec<Value>> {
    let (rho, drho) = evolve_with_derivative(rho_in, &cell.bath, t, Picture::Kraus)?;
    let local = if columns.iter().any(|c| matches!(c, Column::LocalTemperature | Column::LocalCoherence)) {
        Some(reduce_to_qubit(&rho, 0)?)
    } else {
        None
    };
    let mut row = base_row(cell);
    row.push(Value::Num(t));
    for c in columns {
        row.push(match c {
            Column::Qfi => Value::Num(sld(&rho, &drho, DEFAULT_SLD_CUTOFF)?.qfi),
            Column::Purity => Value::Num(purity(&rho)),
            Column::Negativity => {
                Value::Num(if rho.n_qubits() >= 2 { negativity(&rho, 0)? } else { 0.0 })
            }
            Column::LocalTemperature => Value::Temp(local_temperature(local.as_ref().expect("reduced"))?),
            Column::LocalCoherence => Value::Num(local_coherence(local.as_ref().expect("reduced"))?),
            Column::Bound => Value::Num(bound_at(&cell.bath, t, rho.n_qubits())),
        });
    }
    Ok(row)
}

fn flatten(blocks: Vec<Vec<Vec<Value>>>) -> Vec<Vec<Value>> {
    blocks.into_iter().flatten().collect()
}

/// One row per `(β, swept parameters, t)` with the requested output columns.
pub fn run_time_scan(config: &ScanConfig) -> Result<ScanTable> {
    let cells = config.cells()?;
    let times = config.times()?;
    let columns = &config.output.columns;
    let blocks = cells
        .par_iter()
        .map(|cell| {
            let rho_in = cell.spec.build()?;
            times.par_iter().map(|&t| time_row(cell, &rho_in, t, columns)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut header = base_header(config);
    header.push("t".into());
    header.extend(columns.iter().map(|c| c.name().to_string()));
    Ok(ScanTable { metadata: metadata("scan", &config.to_toml()), header, rows: flatten(blocks) })
}

/// Difference scan in the mode named by `config.diff`.
pub fn run_difference_scan(config: &ScanConfig) -> Result<ScanTable> {
    let mode = match &config.diff {
        Some(d) => d.mode,
        None => return Err(Error::Config("difference scan needs a [diff] section with `mode`".into())),
    };
    let cells = config.cells()?;
    let times = config.times()?;
    let mut header = base_header(config);
    let rows = match mode {
        DiffMode::PeakMinusAsymptote => {
            header.extend(
                ["t_peak", "qfi_peak", "asymptote", "difference", "has_transient_peak"].map(String::from),
            );
            cells
                .par_iter()
                .map(|cell| {
                    let peak = max_qfi_over_time(&cell.spec.build()?, &cell.bath, &times)?;
                    let mut row = base_row(cell);
                    row.extend([
                        Value::Num(peak.t_peak),
                        Value::Num(peak.peak_value),
                        Value::Num(peak.asymptote),
                        Value::Num(peak.sup() - peak.asymptote),
                        Value::Flag(peak.has_transient_peak),
                    ]);
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()?
        }
        DiffMode::CorrelatedMinusProductized => {
            header.extend(["t", "qfi", "qfi_productized", "difference"].map(String::from));
            let blocks = cells
                .par_iter()
                .map(|cell| {
                    let rho = cell.spec.build()?;
                    let prod = productize(&rho)?;
                    times
                        .par_iter()
                        .map(|&t| {
                            let a = qfi_of_state(&rho, &cell.bath, t, Picture::Kraus)?;
                            let b = qfi_of_state(&prod, &cell.bath, t, Picture::Kraus)?;
                            let mut row = base_row(cell);
                            row.extend([Value::Num(t), Value::Num(a), Value::Num(b), Value::Num(a - b)]);
                            Ok(row)
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            flatten(blocks)
        }
    };
    Ok(ScanTable { metadata: metadata(&format!("diff {mode}"), &config.to_toml()), header, rows })
}
