//! Initial-state families for the thermometer ensemble.
//!
//! Energies are `ε₀ = -1/2`, `ε₁ = +1/2` (ħ = ω = 1), so `|0⟩` is the ground
//! state. Angles (φ, α, χ, θ) are periodic and accepted as any finite real.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::opalg::{self, c, diag, embed_local, herm_eig, kron_all, mat2, DensityMatrix, Operator, ONE, ZERO};

/// Local inverse temperatures at or above this value are the ground-state limit.
pub const MU_GROUND_CAP: f64 = 50.0;

/// Thermal populations `(π₀(μ), π₁(μ))` of a qubit at inverse temperature `mu`.
pub fn thermal_populations(mu: f64) -> (f64, f64) {
    // logistic forms never overflow
    let p0 = 1.0 / (1.0 + (-mu).exp());
    let p1 = 1.0 / (1.0 + mu.exp());
    (p0, p1)
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return domain(format!("{name} = {v} outside [0, 1]"));
    }
    Ok(())
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return domain(format!("{name} = {v} is not finite"));
    }
    Ok(())
}

fn check_mu(mu: f64) -> Result<()> {
    check_finite("mu", mu)?;
    if mu < 0.0 {
        return domain(format!("mu = {mu} must be nonnegative"));
    }
    Ok(())
}

fn check_n(n: usize, min: usize, family: &str) -> Result<()> {
    if n < min {
        return domain(format!("{family} needs at least {min} qubit(s), got {n}"));
    }
    if n > 12 {
        return domain(format!("{n} qubits exceeds the dense-matrix limit of 12"));
    }
    Ok(())
}

fn thermal_pops_capped(mu: f64) -> (f64, f64) {
    if mu >= MU_GROUND_CAP {
        (1.0, 0.0)
    } else {
        thermal_populations(mu)
    }
}

/// `ρ_th(μ) = diag(π₀(μ), π₁(μ))`.
pub fn thermal_qubit(mu: f64) -> Result<DensityMatrix> {
    check_mu(mu)?;
    let (p0, p1) = thermal_pops_capped(mu);
    DensityMatrix::from_parts(diag(&[p0, p1]))
}

/// Single-qubit state with excited population `a`, coherence fraction `r` and phase `phi`.
pub fn single_qubit(a: f64, r: f64, phi: f64) -> Result<Operator> {
    check_unit("a", a)?;
    check_unit("r", r)?;
    check_finite("phi", phi)?;
    let coh = (a * (1.0 - a)).sqrt() * r;
    let off = Complex64::from_polar(coh, phi);
    Ok(mat2(c(1.0 - a, 0.0), off, off.conj(), c(a, 0.0)))
}

/// N-fold tensor power of [`single_qubit`].
pub fn product_state(a: f64, r: f64, phi: f64, n: usize) -> Result<DensityMatrix> {
    check_n(n, 1, "product state")?;
    let one = single_qubit(a, r, phi)?;
    DensityMatrix::from_parts(kron_all(std::iter::repeat_n(&one, n)))
}

/// `|0…0⟩⟨0…0|`
pub fn ground(n: usize) -> Result<DensityMatrix> {
    check_n(n, 1, "ground state")?;
    let d = 1 << n;
    let mut m = Operator::zeros(d, d);
    m[(0, 0)] = ONE;
    DensityMatrix::from_parts(m)
}

/// `I / 2^N`
pub fn maximally_mixed(n: usize) -> Result<DensityMatrix> {
    check_n(n, 1, "maximally mixed state")?;
    let d = 1 << n;
    DensityMatrix::from_parts(opalg::identity(d).scale(1.0 / d as f64))
}

/// `w0 |0…0⟩ + w1 |1…1⟩` as a dense vector.
fn cat_vector(n: usize, w0: f64, w1: f64) -> Vec<Complex64> {
    let d = 1 << n;
    let mut v = vec![ZERO; d];
    v[0] += c(w0, 0.0);
    v[d - 1] += c(w1, 0.0);
    v
}

pub fn ghz_vector(n: usize) -> Vec<Complex64> {
    cat_vector(n, FRAC_1_SQRT_2, FRAC_1_SQRT_2)
}

pub fn ghz(n: usize) -> Result<DensityMatrix> {
    check_n(n, 2, "GHZ state")?;
    DensityMatrix::from_pure(&ghz_vector(n))
}

/// `η |GHZ_N⟩⟨GHZ_N| + (1 − η) I/2^N`. At N = 1 the "GHZ" vector is `|+⟩`.
pub fn identity_mixture(eta: f64, n: usize) -> Result<DensityMatrix> {
    check_unit("eta", eta)?;
    check_n(n, 1, "identity mixture")?;
    let g = DensityMatrix::from_pure(&ghz_vector(n))?.into_matrix();
    let d = 1 << n;
    let m = g.scale(eta) + opalg::identity(d).scale((1.0 - eta) / d as f64);
    DensityMatrix::from_parts(m)
}

/// `η |ψ_N(μ)⟩⟨ψ_N(μ)| + (1 − η) ρ_th(μ)^⊗N` with `|ψ_N(μ)⟩ = √π₀|0…0⟩ + √π₁|1…1⟩`.
pub fn thermal_mixture(eta: f64, mu: f64, n: usize) -> Result<DensityMatrix> {
    check_unit("eta", eta)?;
    check_mu(mu)?;
    check_n(n, 1, "thermal mixture")?;
    let (p0, p1) = thermal_pops_capped(mu);
    let psi = DensityMatrix::from_pure(&cat_vector(n, p0.sqrt(), p1.sqrt()))?.into_matrix();
    let th = diag(&[p0, p1]);
    let prod = kron_all(std::iter::repeat_n(&th, n));
    DensityMatrix::from_parts(psi.scale(eta) + prod.scale(1.0 - eta))
}

/// Pauli eigenstate used in the k-superposition family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocalBasis {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
    /// `(|0⟩ + i|1⟩)/√2`
    #[serde(rename = "r")]
    Right,
    /// `(|0⟩ − i|1⟩)/√2`
    #[serde(rename = "l")]
    Left,
}

impl LocalBasis {
    /// Amplitudes `(⟨0|k⟩, ⟨1|k⟩)`.
    pub fn amplitudes(self) -> (Complex64, Complex64) {
        let s = FRAC_1_SQRT_2;
        match self {
            LocalBasis::Zero => (ONE, ZERO),
            LocalBasis::One => (ZERO, ONE),
            LocalBasis::Plus => (c(s, 0.0), c(s, 0.0)),
            LocalBasis::Minus => (c(s, 0.0), c(-s, 0.0)),
            LocalBasis::Right => (c(s, 0.0), c(0.0, s)),
            LocalBasis::Left => (c(s, 0.0), c(0.0, -s)),
        }
    }

    pub fn product_vector(self, n: usize) -> Vec<Complex64> {
        let (a0, a1) = self.amplitudes();
        (0..1usize << n)
            .map(|idx| {
                let ones = idx.count_ones() as i32;
                a0.powi(n as i32 - ones) * a1.powi(ones)
            })
            .collect()
    }

    /// Closed form of `⟨GHZ_N|k⟩^⊗N`.
    pub fn ghz_overlap(self, n: usize) -> Complex64 {
        let n = n as i32;
        let half_pow = 2f64.powf(-(n as f64) / 2.0);
        let pattern = |phase: Complex64| (ONE + phase.powi(n)) * half_pow * FRAC_1_SQRT_2;
        match self {
            LocalBasis::Zero | LocalBasis::One => c(FRAC_1_SQRT_2, 0.0),
            LocalBasis::Plus => c(2f64.powf((1.0 - n as f64) / 2.0), 0.0),
            LocalBasis::Minus => pattern(c(-1.0, 0.0)),
            LocalBasis::Right => pattern(c(0.0, 1.0)),
            LocalBasis::Left => pattern(c(0.0, -1.0)),
        }
    }
}

impl fmt::Display for LocalBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LocalBasis::Zero => "0",
            LocalBasis::One => "1",
            LocalBasis::Plus => "+",
            LocalBasis::Minus => "-",
            LocalBasis::Right => "r",
            LocalBasis::Left => "l",
        };
        f.write_str(s)
    }
}

/// Squared normalisation `C(α,k)² = 1 + 2 sin α cos α Re⟨GHZ_N|k⟩^⊗N`.
pub fn k_superposition_norm_sq(alpha: f64, k: LocalBasis, n: usize) -> f64 {
    1.0 + 2.0 * alpha.sin() * alpha.cos() * k.ghz_overlap(n).re
}

/// Normalised `sin α |GHZ_N⟩ + cos α |k⟩^⊗N`.
pub fn k_superposition(alpha: f64, k: LocalBasis, n: usize) -> Result<DensityMatrix> {
    check_finite("alpha", alpha)?;
    check_n(n, 2, "k-superposition")?;
    let norm_sq = k_superposition_norm_sq(alpha, k, n);
    if !(norm_sq > 1e-12) {
        return Err(Error::Degenerate(format!(
            "k-superposition with alpha = {alpha}, k = {k} has vanishing norm"
        )));
    }
    let g = ghz_vector(n);
    let kv = k.product_vector(n);
    let (s, co) = (alpha.sin(), alpha.cos());
    let norm = norm_sq.sqrt();
    let psi: Vec<Complex64> = g.iter().zip(&kv).map(|(a, b)| (a * s + b * co) / norm).collect();
    DensityMatrix::from_pure(&psi)
}

/// Collective spin operators `(J_x, J_y, J_z)` with `J_a = Σ σ_a^{(i)} / 2`.
pub fn collective_spin(n: usize) -> (Operator, Operator, Operator) {
    let h = 0.5;
    let sx = mat2(ZERO, c(h, 0.0), c(h, 0.0), ZERO);
    let sy = mat2(ZERO, c(0.0, -h), c(0.0, h), ZERO);
    let sz = diag(&[h, -h]);
    let d = 1 << n;
    let mut jx = Operator::zeros(d, d);
    let mut jy = Operator::zeros(d, d);
    let mut jz = Operator::zeros(d, d);
    for q in 0..n {
        jx += embed_local(&sx, n, q);
        jy += embed_local(&sy, n, q);
        jz += embed_local(&sz, n, q);
    }
    (jx, jy, jz)
}

/// Pure state `e^{−iθJ_y} e^{−iχJ_z²} |+⟩^⊗N`.
pub fn squeezed_vector(chi: f64, theta: f64, n: usize) -> Result<Vec<Complex64>> {
    check_finite("chi", chi)?;
    check_finite("theta", theta)?;
    check_n(n, 1, "squeezed state")?;
    let d = 1usize << n;
    let amp = 2f64.powf(-(n as f64) / 2.0);
    // J_z is diagonal: eigenvalue (n_zeros − n_ones)/2 on each basis state.
    let twisted: Vec<Complex64> = (0..d)
        .map(|idx| {
            let jz = (n as f64 - 2.0 * idx.count_ones() as f64) / 2.0;
            Complex64::from_polar(amp, -chi * jz * jz)
        })
        .collect();
    if theta == 0.0 {
        return Ok(twisted);
    }
    let (_, jy, _) = collective_spin(n);
    let eig = herm_eig(&jy)?;
    let v = &eig.eigenvectors;
    let phases: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&l| Complex64::from_polar(1.0, -theta * l))
        .collect();
    let rotation = Operator::from_fn(d, d, |i, j| {
        (0..d).map(|k| v[(i, k)] * phases[k] * v[(j, k)].conj()).sum()
    });
    let psi = nalgebra::DVector::from_vec(twisted);
    Ok((rotation * psi).iter().copied().collect())
}

pub fn squeezed(chi: f64, theta: f64, n: usize) -> Result<DensityMatrix> {
    DensityMatrix::from_pure(&squeezed_vector(chi, theta, n)?)
}

/// Closed-form single-qubit reduction of [`squeezed`]:
/// `½ [[1 − c sin θ, c cos θ], [c cos θ, 1 + c sin θ]]` with `c = cos^{N−1} χ`.
pub fn reduced_squeezed_closed_form(chi: f64, theta: f64, n: usize) -> Result<DensityMatrix> {
    check_finite("chi", chi)?;
    check_finite("theta", theta)?;
    check_n(n, 1, "squeezed state")?;
    let cn = chi.cos().powi(n as i32 - 1);
    let (s, co) = theta.sin_cos();
    DensityMatrix::from_parts(mat2(
        c(0.5 * (1.0 - cn * s), 0.0),
        c(0.5 * cn * co, 0.0),
        c(0.5 * cn * co, 0.0),
        c(0.5 * (1.0 + cn * s), 0.0),
    ))
}

/// Tagged description of an initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Product {
        a: f64,
        r: f64,
        #[serde(default)]
        phi: f64,
        n_qubits: usize,
    },
    Ghz {
        n_qubits: usize,
    },
    IdentityMixture {
        eta: f64,
        n_qubits: usize,
    },
    ThermalMixture {
        eta: f64,
        mu: f64,
        n_qubits: usize,
    },
    KSuperposition {
        alpha: f64,
        k: LocalBasis,
        n_qubits: usize,
    },
    Squeezed {
        chi: f64,
        #[serde(default)]
        theta: f64,
        n_qubits: usize,
    },
    MaximallyMixed {
        n_qubits: usize,
    },
    Ground {
        n_qubits: usize,
    },
}

impl StateSpec {
    pub fn family(&self) -> &'static str {
        match self {
            StateSpec::Product { .. } => "product",
            StateSpec::Ghz { .. } => "ghz",
            StateSpec::IdentityMixture { .. } => "identity_mixture",
            StateSpec::ThermalMixture { .. } => "thermal_mixture",
            StateSpec::KSuperposition { .. } => "k_superposition",
            StateSpec::Squeezed { .. } => "squeezed",
            StateSpec::MaximallyMixed { .. } => "maximally_mixed",
            StateSpec::Ground { .. } => "ground",
        }
    }

    pub fn n_qubits(&self) -> usize {
        match *self {
            StateSpec::Product { n_qubits, .. }
            | StateSpec::Ghz { n_qubits }
            | StateSpec::IdentityMixture { n_qubits, .. }
            | StateSpec::ThermalMixture { n_qubits, .. }
            | StateSpec::KSuperposition { n_qubits, .. }
            | StateSpec::Squeezed { n_qubits, .. }
            | StateSpec::MaximallyMixed { n_qubits }
            | StateSpec::Ground { n_qubits } => n_qubits,
        }
    }

    /// True for families whose states are tensor products of one qubit state.
    pub fn is_product_family(&self) -> bool {
        matches!(
            self,
            StateSpec::Product { .. } | StateSpec::MaximallyMixed { .. } | StateSpec::Ground { .. }
        ) || matches!(self, StateSpec::IdentityMixture { eta, .. } if *eta == 0.0)
            || matches!(self, StateSpec::ThermalMixture { eta, .. } if *eta == 0.0)
    }

    pub fn build(&self) -> Result<DensityMatrix> {
        match *self {
            StateSpec::Product { a, r, phi, n_qubits } => product_state(a, r, phi, n_qubits),
            StateSpec::Ghz { n_qubits } => ghz(n_qubits),
            StateSpec::IdentityMixture { eta, n_qubits } => identity_mixture(eta, n_qubits),
            StateSpec::ThermalMixture { eta, mu, n_qubits } => thermal_mixture(eta, mu, n_qubits),
            StateSpec::KSuperposition { alpha, k, n_qubits } => k_superposition(alpha, k, n_qubits),
            StateSpec::Squeezed { chi, theta, n_qubits } => squeezed(chi, theta, n_qubits),
            StateSpec::MaximallyMixed { n_qubits } => maximally_mixed(n_qubits),
            StateSpec::Ground { n_qubits } => ground(n_qubits),
        }
    }

    /// Names of the continuous parameters consulted by this family.
    pub fn parameter_names(&self) -> &'static [&'static str] {
        match self {
            StateSpec::Product { .. } => &["a", "r", "phi"],
            StateSpec::IdentityMixture { .. } => &["eta"],
            StateSpec::ThermalMixture { .. } => &["eta", "mu"],
            StateSpec::KSuperposition { .. } => &["alpha"],
            StateSpec::Squeezed { .. } => &["chi", "theta"],
            StateSpec::Ghz { .. } | StateSpec::MaximallyMixed { .. } | StateSpec::Ground { .. } => &[],
        }
    }

    /// Copy of `self` with one named parameter replaced. `n_qubits` is accepted
    /// for every family (the value must be a nonnegative integer).
    pub fn with_param(&self, name: &str, value: f64) -> Result<StateSpec> {
        let mut out = self.clone();
        if name == "n_qubits" {
            if !(value >= 0.0 && value.fract() == 0.0 && value <= 64.0) {
                return Err(Error::Config(format!("n_qubits = {value} is not a valid qubit count")));
            }
            let nv = value as usize;
            match &mut out {
                StateSpec::Product { n_qubits, .. }
                | StateSpec::Ghz { n_qubits }
                | StateSpec::IdentityMixture { n_qubits, .. }
                | StateSpec::ThermalMixture { n_qubits, .. }
                | StateSpec::KSuperposition { n_qubits, .. }
                | StateSpec::Squeezed { n_qubits, .. }
                | StateSpec::MaximallyMixed { n_qubits }
                | StateSpec::Ground { n_qubits } => *n_qubits = nv,
            }
            return Ok(out);
        }
        let slot: Option<&mut f64> = match (&mut out, name) {
            (StateSpec::Product { a, .. }, "a") => Some(a),
            (StateSpec::Product { r, .. }, "r") => Some(r),
            (StateSpec::Product { phi, .. }, "phi") => Some(phi),
            (StateSpec::IdentityMixture { eta, .. }, "eta") => Some(eta),
            (StateSpec::ThermalMixture { eta, .. }, "eta") => Some(eta),
            (StateSpec::ThermalMixture { mu, .. }, "mu") => Some(mu),
            (StateSpec::KSuperposition { alpha, .. }, "alpha") => Some(alpha),
            (StateSpec::Squeezed { chi, .. }, "chi") => Some(chi),
            (StateSpec::Squeezed { theta, .. }, "theta") => Some(theta),
            _ => None,
        };
        match slot {
            Some(s) => {
                *s = value;
                Ok(out)
            }
            None => Err(Error::Config(format!(
                "parameter `{name}` is not used by family `{}`",
                self.family()
            ))),
        }
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        match (self, name) {
            (_, "n_qubits") => Some(self.n_qubits() as f64),
            (StateSpec::Product { a, .. }, "a") => Some(*a),
            (StateSpec::Product { r, .. }, "r") => Some(*r),
            (StateSpec::Product { phi, .. }, "phi") => Some(*phi),
            (StateSpec::IdentityMixture { eta, .. }, "eta") => Some(*eta),
            (StateSpec::ThermalMixture { eta, .. }, "eta") => Some(*eta),
            (StateSpec::ThermalMixture { mu, .. }, "mu") => Some(*mu),
            (StateSpec::KSuperposition { alpha, .. }, "alpha") => Some(*alpha),
            (StateSpec::Squeezed { chi, .. }, "chi") => Some(*chi),
            (StateSpec::Squeezed { theta, .. }, "theta") => Some(*theta),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{max_abs_diff, partial_trace, purity_of};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn thermal_qubit_examples() {
        let t = thermal_qubit(0.0).unwrap();
        assert!(max_abs_diff(t.matrix(), &diag(&[0.5, 0.5])) < 1e-15);
        let t = thermal_qubit(0.5).unwrap();
        assert!((t.matrix()[(0, 0)].re - 0.622459).abs() < 1e-6);
        assert!((t.matrix()[(1, 1)].re - 0.377541).abs() < 1e-6);
        let t = thermal_qubit(50.0).unwrap();
        assert!(max_abs_diff(t.matrix(), &diag(&[1.0, 0.0])) < 1e-10);
        assert!(matches!(thermal_qubit(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(thermal_qubit(f64::INFINITY), Err(Error::Domain(_))));
    }

    #[test]
    fn product_state_examples() {
        let g = product_state(0.0, 0.7, 0.3, 2).unwrap();
        assert!(max_abs_diff(g.matrix(), ground(2).unwrap().matrix()) < 1e-15);
        let p = product_state(0.5, 1.0, 0.0, 1).unwrap();
        assert!(max_abs_diff(p.matrix(), &mat2(c(0.5, 0.), c(0.5, 0.), c(0.5, 0.), c(0.5, 0.))) < 1e-15);
        let p = product_state(0.25, 0.5, 1.1, 1).unwrap();
        assert!((p.matrix()[(0, 1)].norm() - 0.216506).abs() < 1e-6);
        assert!(matches!(product_state(1.5, 0.5, 0.0, 1), Err(Error::Domain(_))));
        assert!(matches!(product_state(0.5, -0.1, 0.0, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn ghz_examples() {
        let g = ghz(2).unwrap();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((g.matrix()[(i, j)].re - 0.5).abs() < 1e-15);
        }
        for n in 2..=6 {
            assert!((purity_of(ghz(n).unwrap().matrix()) - 1.0).abs() < 1e-14);
        }
        assert!(matches!(ghz(1), Err(Error::Domain(_))));
    }

    #[test]
    fn identity_mixture_examples() {
        let m = identity_mixture(0.0, 3).unwrap();
        assert!(max_abs_diff(m.matrix(), maximally_mixed(3).unwrap().matrix()) < 1e-15);
        let m = identity_mixture(1.0, 2).unwrap();
        assert!(max_abs_diff(m.matrix(), ghz(2).unwrap().matrix()) < 1e-15);
        assert!(identity_mixture(1.2, 2).is_err());
    }

    #[test]
    fn thermal_mixture_limits() {
        for eta in [0.0, 0.3, 1.0] {
            let a = thermal_mixture(eta, 0.0, 3).unwrap();
            let b = identity_mixture(eta, 3).unwrap();
            assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-14);
            let g = thermal_mixture(eta, 50.0, 3).unwrap();
            assert!(max_abs_diff(g.matrix(), ground(3).unwrap().matrix()) < 1e-10);
        }
        let m = thermal_mixture(0.5, 1.0, 2).unwrap();
        let r = partial_trace(&m, &[0]).unwrap();
        assert!((r.matrix()[(0, 0)].re - 0.731059).abs() < 1e-6);
        assert!((r.matrix()[(1, 1)].re - 0.268941).abs() < 1e-6);
        assert!(thermal_mixture(0.5, -1.0, 2).is_err());
    }

    #[test]
    fn k_superposition_examples() {
        for k in [LocalBasis::Zero, LocalBasis::Plus, LocalBasis::Right, LocalBasis::Minus] {
            let s = k_superposition(FRAC_PI_2, k, 3).unwrap();
            assert!(max_abs_diff(s.matrix(), ghz(3).unwrap().matrix()) < 1e-14);
        }
        let s = k_superposition(0.0, LocalBasis::Plus, 3).unwrap();
        let plus = product_state(0.5, 1.0, 0.0, 3).unwrap();
        assert!(max_abs_diff(s.matrix(), plus.matrix()) < 1e-14);
        let c2 = k_superposition_norm_sq(FRAC_PI_4, LocalBasis::Zero, 2);
        assert!((c2 - 1.707107).abs() < 1e-6);
        assert!(matches!(k_superposition(0.3, LocalBasis::One, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn ghz_overlap_matches_dot_product() {
        for k in [
            LocalBasis::Zero,
            LocalBasis::One,
            LocalBasis::Plus,
            LocalBasis::Minus,
            LocalBasis::Right,
            LocalBasis::Left,
        ] {
            for n in 1..=7 {
                let g = ghz_vector(n);
                let kv = k.product_vector(n);
                let dot: Complex64 = g.iter().zip(&kv).map(|(a, b)| a.conj() * b).sum();
                assert!((dot - k.ghz_overlap(n)).norm() < 1e-14, "k={k} n={n}");
            }
        }
    }

    #[test]
    fn k_superposition_is_normalised_pure() {
        for k in [LocalBasis::Minus, LocalBasis::Left, LocalBasis::One] {
            for alpha in [0.1, 1.0, 2.3, 3.0, 4.5] {
                for n in 2..=4 {
                    let s = k_superposition(alpha, k, n).unwrap();
                    assert!((s.matrix().trace().re - 1.0).abs() < 1e-13);
                    assert!((purity_of(s.matrix()) - 1.0).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn k_superposition_local_claims_for_three_or_more_qubits() {
        for n in 3..=5 {
            for alpha in [0.2, 0.9, 1.4, 2.5] {
                for k in [LocalBasis::Zero, LocalBasis::One] {
                    let s = k_superposition(alpha, k, n).unwrap();
                    for q in 0..n {
                        let r = partial_trace(&s, &[q]).unwrap();
                        assert!(r.matrix()[(0, 1)].norm() < 1e-14);
                    }
                }
                for k in [LocalBasis::Plus, LocalBasis::Minus] {
                    let s = k_superposition(alpha, k, n).unwrap();
                    // |−⟩^⊗N is orthogonal to GHZ for odd N, but the cross
                    // term still shifts the local populations there.
                    let sc = 2.0 * alpha.sin() * alpha.cos() * 2f64.powf(-(n as f64 + 1.0) / 2.0);
                    let expected = match (k, n % 2) {
                        (LocalBasis::Minus, 1) => 0.5 + sc,
                        _ => 0.5,
                    };
                    for q in 0..n {
                        let r = partial_trace(&s, &[q]).unwrap();
                        assert!((r.matrix()[(0, 0)].re - expected).abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn squeezed_examples() {
        let s = squeezed(0.0, 0.0, 3).unwrap();
        let plus = product_state(0.5, 1.0, 0.0, 3).unwrap();
        assert!(max_abs_diff(s.matrix(), plus.matrix()) < 1e-14);
        // odd N revives at χ = π
        let s = squeezed(PI, 0.0, 3).unwrap();
        assert!(max_abs_diff(s.matrix(), plus.matrix()) < 1e-13);
        for n in 1..=5 {
            for (chi, theta) in [(0.3f64, 0.0f64), (1.2, 0.7), (2.9, 2.0)] {
                let s = squeezed(chi, theta, n).unwrap();
                assert!((purity_of(s.matrix()) - 1.0).abs() < 1e-12);
                let p = squeezed(chi + 2.0 * PI, theta, n).unwrap();
                assert!(max_abs_diff(s.matrix(), p.matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn rotation_by_eigendecomposition_matches_local_product() {
        // e^{−iθJ_y} = ⊗ e^{−iθσ_y/2}; the local factor is [[cos, −sin], [sin, cos]](θ/2).
        for n in 1..=4 {
            for (chi, theta) in [(0.4f64, 0.3f64), (1.9, 2.2), (0.0, 1.0)] {
                let (cs, sn) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                let local = mat2(c(cs, 0.0), c(-sn, 0.0), c(sn, 0.0), c(cs, 0.0));
                let rot = kron_all(std::iter::repeat_n(&local, n));
                let twisted = nalgebra::DVector::from_vec(squeezed_vector(chi, 0.0, n).unwrap());
                let expect = rot * twisted;
                let got = squeezed_vector(chi, theta, n).unwrap();
                let err = expect.iter().zip(&got).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                assert!(err < 1e-13, "n={n} chi={chi} theta={theta}: {err}");
            }
        }
    }

    #[test]
    fn reduced_squeezed_closed_form_examples() {
        let r = reduced_squeezed_closed_form(0.7, 0.0, 4).unwrap();
        assert!((r.matrix()[(0, 1)].re - 0.7f64.cos().powi(3) / 2.0).abs() < 1e-15);
        assert!((r.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        let r = reduced_squeezed_closed_form(FRAC_PI_2, 0.4, 3).unwrap();
        assert!(max_abs_diff(r.matrix(), &diag(&[0.5, 0.5])) < 1e-15);
        let brute = partial_trace(&squeezed(0.7, 0.3, 4).unwrap(), &[2]).unwrap();
        let closed = reduced_squeezed_closed_form(0.7, 0.3, 4).unwrap();
        assert!(max_abs_diff(brute.matrix(), closed.matrix()) < 1e-12);
    }

    #[test]
    fn spec_parameters_roundtrip() {
        let s: StateSpec = toml::from_str("family = \"k_superposition\"\nalpha = 0.5\nk = \"+\"\nn_qubits = 2").unwrap();
        assert_eq!(s, StateSpec::KSuperposition { alpha: 0.5, k: LocalBasis::Plus, n_qubits: 2 });
        let s2 = s.with_param("alpha", 1.0).unwrap();
        assert_eq!(s2.param("alpha"), Some(1.0));
        assert!(matches!(s.with_param("eta", 0.1), Err(Error::Config(_))));
        let s3 = s.with_param("n_qubits", 4.0).unwrap();
        assert_eq!(s3.n_qubits(), 4);
        assert!(toml::from_str::<StateSpec>("family = \"ghz\"\nn_qubits = 2\neta = 1.0").is_err());
    }
}
