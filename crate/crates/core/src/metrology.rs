//! Quantum Fisher information of the evolved ensemble with respect to β.

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{channel_params, evolve_with_derivative, param_derivatives, BathSpec, Picture};
use crate::error::{domain, Error, Result};
use crate::opalg::{
    c, hermiticity_defect, herm_eig, mat2, op_norm, trace, DensityMatrix, Operator, EIG_INPUT_TOL,
    ZERO,
};
use crate::states::StateSpec;

/// Pairs with `λ_i + λ_j` at or below this fraction of the largest
/// eigenvalue are treated as outside the support.
pub const DEFAULT_SLD_CUTOFF: f64 = 1e-12;

/// Derivative weight on kernel pairs above this is flagged as rank deficiency.
pub const SUPPORT_LEAK_TOL: f64 = 1e-9;

/// Relative excess over the asymptote that counts as a transient peak.
pub const TRANSIENT_PEAK_REL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SldResult {
    /// Symmetric logarithmic derivative in the computational basis.
    pub l: Operator,
    pub qfi: f64,
    /// Number of eigenvalues of ρ inside the support.
    pub support_rank: usize,
    /// `max |∂ρ − ½{ρ, L}|` over support pairs, in the eigenbasis of ρ.
    pub residual: f64,
    /// `∂ρ` has weight outside the support of ρ; the QFI is then a limit
    /// value and may be discontinuous in β.
    pub rank_deficient: bool,
}

/// Solves `∂ρ = ½{ρ, L}` in the eigenbasis of `rho`.
///
/// `rel_cutoff` is relative to the largest eigenvalue of `rho`.
pub fn sld(rho: &DensityMatrix, drho: &Operator, rel_cutoff: f64) -> Result<SldResult> {
    let d = rho.dim();
    if drho.nrows() != d || drho.ncols() != d {
        return Err(Error::Contract(format!(
            "derivative is {}x{}, state is {d}x{d}",
            drho.nrows(),
            drho.ncols()
        )));
    }
    let herm = hermiticity_defect(drho);
    if herm > EIG_INPUT_TOL {
        return Err(Error::Contract(format!("derivative is not Hermitian (defect {herm:e})")));
    }
    let tr = trace(drho).norm();
    if tr > EIG_INPUT_TOL {
        return Err(Error::Contract(format!("derivative is not traceless (trace {tr:e})")));
    }
    if !(rel_cutoff >= 0.0) {
        return domain(format!("cutoff {rel_cutoff} must be nonnegative"));
    }

    let eig = herm_eig(rho.matrix())?;
    let lam = &eig.eigenvalues;
    let v = &eig.eigenvectors;
    let cutoff = rel_cutoff * lam.iter().cloned().fold(0.0, f64::max);
    let dt = v.adjoint() * drho * v;

    let mut lt = Operator::zeros(d, d);
    let mut qfi = 0.0;
    let mut leak: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let s = lam[i] + lam[j];
            if s > cutoff {
                lt[(i, j)] = dt[(i, j)] * (2.0 / s);
                qfi += 2.0 * dt[(i, j)].norm_sqr() / s;
            } else {
                leak = leak.max(dt[(i, j)].norm());
            }
        }
    }
    if !qfi.is_finite() {
        return Err(Error::Numeric(format!("QFI evaluated to {qfi}")));
    }
    let support_rank = lam.iter().filter(|&&x| 2.0 * x > cutoff).count();

    let l = v * &lt * v.adjoint();
    let m = rho.matrix();
    let anti = (m * &l + &l * m).scale(0.5);
    let rt = v.adjoint() * (drho - anti) * v;
    let mut residual: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            if lam[i] + lam[j] > cutoff {
                residual = residual.max(rt[(i, j)].norm());
            }
        }
    }

    Ok(SldResult { l, qfi, support_rank, residual, rank_deficient: leak > SUPPORT_LEAK_TOL })
}

/// SLD of the evolved input state at time `t`.
pub fn sld_of_evolved(rho_in: &DensityMatrix, bath: &BathSpec, t: f64, picture: Picture) -> Result<SldResult> {
    let (rho, drho) = evolve_with_derivative(rho_in, bath, t, picture)?;
    sld(&rho, &drho, DEFAULT_SLD_CUTOFF)
}

/// QFI of the evolved input state at time `t`.
pub fn qfi_of_state(rho_in: &DensityMatrix, bath: &BathSpec, t: f64, picture: Picture) -> Result<f64> {
    Ok(sld_of_evolved(rho_in, bath, t, picture)?.qfi)
}

pub fn qfi_at(spec: &StateSpec, bath: &BathSpec, t: f64) -> Result<f64> {
    qfi_of_state(&spec.build()?, bath, t, Picture::Kraus)
}

/// QFI along a time grid.
pub fn qfi_curve(rho_in: &DensityMatrix, bath: &BathSpec, times: &[f64]) -> Result<Vec<f64>> {
    times.iter().map(|&t| qfi_of_state(rho_in, bath, t, Picture::Kraus)).collect()
}

/// `N π₀(β) π₁(β)`, the QFI of `ρ_th(β)^{⊗N}`.
pub fn thermal_asymptote(bath: &BathSpec, n_qubits: usize) -> f64 {
    let (p0, p1) = bath.populations();
    n_qubits as f64 * p0 * p1
}

/// `1/√(ν F)`; `+∞` when `qfi` is zero.
pub fn cramer_rao(qfi: f64, nu: u64) -> Result<f64> {
    if nu == 0 {
        return domain("repetition count must be at least 1");
    }
    if !(qfi >= 0.0) || !qfi.is_finite() {
        return domain(format!("QFI {qfi} must be finite and nonnegative"));
    }
    if qfi == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / (nu as f64 * qfi).sqrt())
}

/// `M₁ = Σ ∂K†∂K` and `M₂ = i Σ ∂K†K` for the canonical Kraus set.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub m1: Operator,
    pub m2: Operator,
    pub m1_norm: f64,
    pub m2_norm: f64,
}

impl BoundReport {
    /// `4 (N ‖M₁‖ + N(N−1) ‖M₂‖²)`
    pub fn bound_value(&self, n_qubits: usize) -> f64 {
        let n = n_qubits as f64;
        4.0 * (n * self.m1_norm + n * (n - 1.0) * self.m2_norm * self.m2_norm)
    }
}

/// Kraus operators and their β-derivatives, same order as [`crate::channel::kraus_ops`].
pub fn kraus_with_derivatives(bath: &BathSpec, t: f64) -> Result<Vec<(Operator, Operator)>> {
    let params = channel_params(bath, t)?;
    let dv = param_derivatives(bath, t)?;
    let (p, q) = (params.p, params.q);
    if p == 0.0 || p == 1.0 {
        return Err(Error::Numeric(format!(
            "Kraus derivative is singular at p = {p} (t = {t})"
        )));
    }
    let q1 = 1.0 - q;
    if q1 <= 0.0 {
        return Err(Error::Numeric(format!("Kraus derivative is singular at q = {q}")));
    }
    let (sq, sq1, sp) = (q.sqrt(), q1.sqrt(), p.sqrt());
    let s = params.sqrt_keep();
    let ds = s * 0.5 * t * dv.dlambda;
    let dsq = dv.dq / (2.0 * sq);
    let dsq1 = -dv.dq / (2.0 * sq1);
    let dsp = dv.dp / (2.0 * sp);
    let r = |x: f64| c(x, 0.0);
    Ok(vec![
        (mat2(r(sq), ZERO, ZERO, r(sq * s)), mat2(r(dsq), ZERO, ZERO, r(dsq * s + sq * ds))),
        (mat2(ZERO, r(sq * sp), ZERO, ZERO), mat2(ZERO, r(dsq * sp + sq * dsp), ZERO, ZERO)),
        (mat2(r(sq1 * s), ZERO, ZERO, r(sq1)), mat2(r(dsq1 * s + sq1 * ds), ZERO, ZERO, r(dsq1))),
        (mat2(ZERO, ZERO, r(sq1 * sp), ZERO), mat2(ZERO, ZERO, r(dsq1 * sp + sq1 * dsp), ZERO)),
    ])
}

pub fn m1_m2(bath: &BathSpec, t: f64) -> Result<BoundReport> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("bound needs t > 0, got {t}"));
    }
    let ks = kraus_with_derivatives(bath, t)?;
    let mut m1 = Operator::zeros(2, 2);
    let mut m2 = Operator::zeros(2, 2);
    for (k, dk) in &ks {
        m1 += dk.adjoint() * dk;
        m2 += dk.adjoint() * k;
    }
    m2 *= Complex64::i();
    let m1_norm = op_norm(&m1);
    let m2_norm = op_norm(&m2);
    Ok(BoundReport { m1, m2, m1_norm, m2_norm })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakReport {
    pub t_peak: f64,
    pub peak_value: f64,
    pub asymptote: f64,
    pub has_transient_peak: bool,
    /// Index of the grid argmax.
    pub grid_index: usize,
}

impl PeakReport {
    /// Supremum of the QFI over `t ≥ 0`: the grid peak or the `t → ∞` limit.
    pub fn sup(&self) -> f64 {
        self.peak_value.max(self.asymptote)
    }
}

/// Relative width at which the bracketed peak search stops.
pub const PEAK_SEARCH_REL_TOL: f64 = 1e-9;

/// Golden-section maximization of `f` on `[lo, hi]`, seeded with a known
/// interior point `(x0, f0)`. Returns the best point evaluated.
fn golden_max(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    (x0, f0): (f64, f64),
) -> Result<(f64, f64)> {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let tol = PEAK_SEARCH_REL_TOL * hi.abs().max(1e-300);
    let (mut best_x, mut best_f) = (x0, f0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            (x2, f2) = (x1, f1);
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            (x1, f1) = (x2, f2);
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
        for (x, v) in [(x1, f1), (x2, f2)] {
            if v > best_f {
                (best_x, best_f) = (x, v);
            }
        }
    }
    Ok((best_x, best_f))
}

/// Peak report from QFI values already evaluated on `times`: grid argmax,
/// then a golden-section search between its neighbours.
pub fn peak_from_curve(
    rho_in: &DensityMatrix,
    bath: &BathSpec,
    times: &[f64],
    values: &[f64],
) -> Result<PeakReport> {
    check_grid(times)?;
    if values.len() != times.len() {
        return domain(format!("{} QFI values for {} time points", values.len(), times.len()));
    }
    let (mut i, mut best) = (0, f64::NEG_INFINITY);
    for (k, &v) in values.iter().enumerate() {
        if v > best {
            i = k;
            best = v;
        }
    }
    let (mut t_peak, mut peak_value) = (times[i], best);
    if i > 0 && i + 1 < times.len() {
        let f = |t| qfi_of_state(rho_in, bath, t, Picture::Kraus);
        (t_peak, peak_value) = golden_max(f, times[i - 1], times[i + 1], (t_peak, peak_value))?;
    }
    let asymptote = thermal_asymptote(bath, rho_in.n_qubits());
    Ok(PeakReport {
        t_peak,
        peak_value,
        asymptote,
        has_transient_peak: peak_value > asymptote * (1.0 + TRANSIENT_PEAK_REL),
        grid_index: i,
    })
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return domain("empty time grid");
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return domain("time grid entries must be finite and nonnegative");
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("time grid must be strictly increasing");
    }
    Ok(())
}

/// Grid argmax of the QFI with one parabolic refinement step.
pub fn max_qfi_over_time(rho_in: &DensityMatrix, bath: &BathSpec, times: &[f64]) -> Result<PeakReport> {
    check_grid(times)?;
    let values = qfi_curve(rho_in, bath, times)?;
    peak_from_curve(rho_in, bath, times, &values)
}

/// Repeats the peak search on a grid `factor` times denser spanning the grid
/// cells on either side of `coarse.grid_index`.
pub fn refine_peak(
    rho_in: &DensityMatrix,
    bath: &BathSpec,
    times: &[f64],
    coarse: &PeakReport,
    factor: usize,
) -> Result<PeakReport> {
    if factor < 1 {
        return domain("refinement factor must be at least 1");
    }
    check_grid(times)?;
    let i = coarse.grid_index.min(times.len() - 1);
    let lo = times[i.saturating_sub(1)];
    let hi = times[(i + 1).min(times.len() - 1)];
    if !(hi > lo) {
        return Ok(*coarse);
    }
    let cells = if i == 0 || i + 1 == times.len() { factor } else { 2 * factor };
    max_qfi_over_time(rho_in, bath, &linspace(lo, hi, cells + 1))
}

/// Peak on `times` and on the refined grid of [`refine_peak`]. Returns `(coarse, fine)`.
pub fn max_qfi_refined(
    rho_in: &DensityMatrix,
    bath: &BathSpec,
    times: &[f64],
    factor: usize,
) -> Result<(PeakReport, PeakReport)> {
    let coarse = max_qfi_over_time(rho_in, bath, times)?;
    let fine = refine_peak(rho_in, bath, times, &coarse, factor)?;
    Ok((coarse, fine))
}

/// `count` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (count - 1) as f64;
            (0..count).map(|k| if k + 1 == count { hi } else { lo + h * k as f64 }).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VQuantifier {
    /// Time-supremum of the QFI at the upper endpoint of the parameter.
    pub v_max: f64,
    /// Time-supremum of the QFI at the lower endpoint.
    pub v_min: f64,
    pub v: f64,
}

/// Relative change of the time-maximised QFI between the two endpoints of
/// one state parameter.
pub fn v_quantifier(
    template: &StateSpec,
    param: &str,
    (lo, hi): (f64, f64),
    bath: &BathSpec,
    times: &[f64],
) -> Result<VQuantifier> {
    let peak = |value: f64| -> Result<f64> {
        let spec = template.with_param(param, value)?;
        Ok(max_qfi_over_time(&spec.build()?, bath, times)?.sup())
    };
    let v_max = peak(hi)?;
    let v_min = peak(lo)?;
    if v_max == 0.0 {
        return Err(Error::Numeric(format!("v_max = 0 for `{param}`: ratio undefined")));
    }
    Ok(VQuantifier { v_max, v_min, v: (v_max - v_min) / v_max })
}
