//! Generalized amplitude damping (GAD) thermalization of each qubit.
//!
//! A bath `(β, γ)` and a time `t` fix the channel parameters
//! `q = π₀(β)`, `λ = −γ coth(β/2)` and `p = 1 − e^{λt}`. The Kraus form
//! drives evolution; the Lindblad closed form (which carries an extra
//! β-independent phase `e^{∓it}` on coherences) is kept as a cross-check.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::opalg::{
    apply_local_kraus_op, c, map_local_blocks, mat2, Block, DensityMatrix, Operator, ZERO,
};
use crate::states::thermal_populations;

/// Below this β the rate derivative `γ / (2 sinh²(β/2))` is not evaluated.
pub const MIN_BETA_FOR_DERIVATIVE: f64 = 1e-6;

/// Bath at inverse temperature `beta` coupled with single-qubit rate `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub beta: f64,
    pub gamma: f64,
}

impl BathSpec {
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        let bath = BathSpec { beta, gamma };
        bath.validate()?;
        Ok(bath)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return domain(format!("beta = {} must be positive and finite", self.beta));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return domain(format!("gamma = {} must be positive and finite", self.gamma));
        }
        Ok(())
    }

    /// Thermalization rate `λ = −γ coth(β/2)`.
    pub fn lambda(&self) -> f64 {
        -self.gamma / (self.beta / 2.0).tanh()
    }

    /// `(π₀(β), π₁(β))`
    pub fn populations(&self) -> (f64, f64) {
        thermal_populations(self.beta)
    }

    /// `20 / |λ|`, by which every state is thermal to about `e^{-20}`.
    pub fn thermalization_time(&self) -> f64 {
        20.0 / self.lambda().abs()
    }
}

/// GAD parameters at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelParams {
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub t: f64,
}

impl ChannelParams {
    /// Coherence damping factor `√(1 − p) = e^{λt/2}`.
    pub fn coherence_factor(&self) -> f64 {
        (self.lambda * self.t / 2.0).exp()
    }

    /// `√(1 − p)`, taken from `e^{λt/2}` when that agrees with `p`. Near
    /// `p = 1` the subtraction loses every digit the exponential keeps.
    pub fn sqrt_keep(&self) -> f64 {
        let coh = self.coherence_factor();
        let keep = (1.0 - self.p).max(0.0);
        if (coh * coh - keep).abs() <= 1e-12 { coh } else { keep.sqrt() }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return domain(format!("time t = {t} must be finite and nonnegative"));
    }
    Ok(())
}

pub fn channel_params(bath: &BathSpec, t: f64) -> Result<ChannelParams> {
    bath.validate()?;
    check_time(t)?;
    let lambda = bath.lambda();
    let p = -(lambda * t).exp_m1();
    Ok(ChannelParams { p, q: bath.populations().0, lambda, t })
}

/// β-derivatives of the channel parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamDerivatives {
    pub dp: f64,
    pub dq: f64,
    pub dlambda: f64,
}

pub fn param_derivatives(bath: &BathSpec, t: f64) -> Result<ParamDerivatives> {
    bath.validate()?;
    check_time(t)?;
    if bath.beta < MIN_BETA_FOR_DERIVATIVE {
        return domain(format!(
            "beta = {} below {MIN_BETA_FOR_DERIVATIVE}: rate derivative overflows",
            bath.beta
        ));
    }
    let (p0, p1) = bath.populations();
    let sh = (bath.beta / 2.0).sinh();
    let dlambda = bath.gamma / (2.0 * sh * sh);
    let dp = -t * (bath.lambda() * t).exp() * dlambda;
    Ok(ParamDerivatives { dp, dq: p0 * p1, dlambda })
}

/// Rates of the Lindblad jump operators `√Γ₀₁ |0⟩⟨1|` (decay) and `√Γ₁₀ |1⟩⟨0|` (excitation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladRates {
    pub decay: f64,
    pub excitation: f64,
    /// Thermal occupation `1 / (e^β − 1)`.
    pub occupation: f64,
}

pub fn lindblad_rates(bath: &BathSpec) -> Result<LindbladRates> {
    bath.validate()?;
    let n = 1.0 / bath.beta.exp_m1();
    Ok(LindbladRates { decay: bath.gamma * (n + 1.0), excitation: bath.gamma * n, occupation: n })
}

/// The four canonical GAD Kraus operators.
pub fn kraus_ops(params: &ChannelParams) -> Vec<Operator> {
    let (p, q) = (params.p.clamp(0.0, 1.0), params.q.clamp(0.0, 1.0));
    let sq = q.sqrt();
    let sq1 = (1.0 - q).sqrt();
    let s1p = params.sqrt_keep().min(1.0);
    let sp = p.sqrt();
    let r = |x: f64| c(x, 0.0);
    vec![
        mat2(r(sq), ZERO, ZERO, r(sq * s1p)),
        mat2(ZERO, r(sq * sp), ZERO, ZERO),
        mat2(r(sq1 * s1p), ZERO, ZERO, r(sq1)),
        mat2(ZERO, ZERO, r(sq1 * sp), ZERO),
    ]
}

/// Single-qubit GAD action written as a linear map on 2x2 blocks. Valid for
/// any operator, not only unit-trace ones.
#[derive(Debug, Clone, Copy)]
struct LocalGad {
    /// weight of the trace fed into |0⟩⟨0|
    to_ground: f64,
    /// weight of the trace fed into |1⟩⟨1|
    to_excited: f64,
    /// population retention
    keep: f64,
    /// multiplier of the upper off-diagonal entry
    coherence: Complex64,
}

impl LocalGad {
    fn apply(&self, b: &Block) -> Block {
        let tr = b[0][0] + b[1][1];
        [
            [tr * self.to_ground + b[0][0] * self.keep, b[0][1] * self.coherence],
            [b[1][0] * self.coherence.conj(), tr * self.to_excited + b[1][1] * self.keep],
        ]
    }

    fn value(params: &ChannelParams, phase: f64) -> Self {
        let (p, q) = (params.p, params.q);
        LocalGad {
            to_ground: p * q,
            to_excited: p * (1.0 - q),
            keep: 1.0 - p,
            coherence: Complex64::from_polar(params.coherence_factor(), -phase),
        }
    }

    /// β-derivative of the map coefficients.
    fn derivative(params: &ChannelParams, d: &ParamDerivatives, phase: f64) -> Self {
        let (p, q) = (params.p, params.q);
        let coh = Complex64::from_polar(params.coherence_factor(), -phase);
        LocalGad {
            to_ground: d.dp * q + p * d.dq,
            to_excited: d.dp * (1.0 - q) - p * d.dq,
            keep: -d.dp,
            coherence: coh * (0.5 * params.t * d.dlambda),
        }
    }
}

fn single_qubit_only(rho1: &DensityMatrix) -> Result<()> {
    if rho1.n_qubits() != 1 {
        return domain(format!("expected a single-qubit state, got {} qubits", rho1.n_qubits()));
    }
    Ok(())
}

/// Closed-form GAD action on one qubit.
pub fn evolve_single_closed(rho1: &DensityMatrix, params: &ChannelParams) -> Result<DensityMatrix> {
    single_qubit_only(rho1)?;
    let m = rho1.matrix();
    let rho22 = m[(1, 1)].re;
    let (p, q) = (params.p, params.q);
    let s = params.sqrt_keep();
    let out = mat2(
        c(p * q + (1.0 - p) * (1.0 - rho22), 0.0),
        m[(0, 1)] * s,
        m[(1, 0)] * s,
        c((1.0 - q) * p + (1.0 - p) * rho22, 0.0),
    );
    DensityMatrix::from_parts(out)
}

/// Lindblad closed-form solution on one qubit, coherent phase included.
pub fn evolve_single_lindblad(rho1: &DensityMatrix, bath: &BathSpec, t: f64) -> Result<DensityMatrix> {
    single_qubit_only(rho1)?;
    let params = channel_params(bath, t)?;
    let out = map_local_blocks(rho1.matrix(), 1, 0, |b| LocalGad::value(&params, t).apply(b));
    DensityMatrix::from_parts(out)
}

/// `(Φ_β^{(t)})^{⊗N}[ρ]` by sequential local Kraus application.
pub fn evolve_ensemble(rho: &DensityMatrix, bath: &BathSpec, t: f64) -> Result<DensityMatrix> {
    let params = channel_params(bath, t)?;
    let kraus = kraus_ops(&params);
    let n = rho.n_qubits();
    let mut x = rho.matrix().clone();
    for q in 0..n {
        x = apply_local_kraus_op(&x, n, &kraus, q)?;
    }
    DensityMatrix::from_parts(x)
}

/// Which coherent phase convention to evolve with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picture {
    /// GAD Kraus form, no coherent phase.
    Kraus,
    /// Lindblad closed form, coherences pick up `e^{∓it}`.
    Lindblad,
}

/// Evolved state and its exact β-derivative, propagated by the product rule
/// over the N local channel applications.
pub fn evolve_with_derivative(
    rho_in: &DensityMatrix,
    bath: &BathSpec,
    t: f64,
    picture: Picture,
) -> Result<(DensityMatrix, Operator)> {
    let params = channel_params(bath, t)?;
    let derivs = param_derivatives(bath, t)?;
    let phase = match picture {
        Picture::Kraus => 0.0,
        Picture::Lindblad => t,
    };
    let n = rho_in.n_qubits();
    let kraus = kraus_ops(&params);
    let value = LocalGad::value(&params, phase);
    let deriv = LocalGad::derivative(&params, &derivs, phase);
    let mut x = rho_in.matrix().clone();
    let d = x.nrows();
    let mut dx = Operator::zeros(d, d);
    for q in 0..n {
        let carried = map_local_blocks(&dx, n, q, |b| value.apply(b));
        let fresh = map_local_blocks(&x, n, q, |b| deriv.apply(b));
        dx = carried + fresh;
        x = match picture {
            Picture::Kraus => apply_local_kraus_op(&x, n, &kraus, q)?,
            Picture::Lindblad => map_local_blocks(&x, n, q, |b| value.apply(b)),
        };
    }
    Ok((DensityMatrix::from_parts(x)?, dx))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMethod {
    Analytic,
    /// Central difference with step `h` in β.
    FiniteDifference { step: f64 },
}

/// `∂ρ_out(t, β)/∂β` for a β-independent input state.
pub fn d_evolve_dbeta(
    rho_in: &DensityMatrix,
    bath: &BathSpec,
    t: f64,
    method: DerivativeMethod,
) -> Result<Operator> {
    match method {
        DerivativeMethod::Analytic => Ok(evolve_with_derivative(rho_in, bath, t, Picture::Kraus)?.1),
        DerivativeMethod::FiniteDifference { step } => {
            if !(step > 0.0) {
                return domain(format!("finite-difference step {step} must be positive"));
            }
            if bath.beta <= step {
                return Err(Error::Domain(format!(
                    "finite-difference step {step} reaches beta = {} <= 0",
                    bath.beta
                )));
            }
            let up = BathSpec { beta: bath.beta + step, ..*bath };
            let down = BathSpec { beta: bath.beta - step, ..*bath };
            let a = evolve_ensemble(rho_in, &up, t)?.into_matrix();
            let b = evolve_ensemble(rho_in, &down, t)?.into_matrix();
            Ok((a - b).scale(0.5 / step))
        }
    }
}
