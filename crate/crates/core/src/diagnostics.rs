//! Purity, negativity and single-qubit diagnostics of an ensemble state.

use std::fmt;

use crate::error::{domain, Result};
use crate::opalg::{herm_eig, partial_transpose, purity_of, reduce_to_qubit, DensityMatrix};

/// Eigenvalues of the partial transpose in `(−NEGATIVITY_FLOOR, 0)` count as zero.
pub const NEGATIVITY_FLOOR: f64 = 1e-12;

/// Excited populations within this distance of ½ read as infinite temperature.
pub const BALANCED_POPULATION_TOL: f64 = 1e-12;

/// `|Σ λ_i|` over the negative eigenvalues of the partial transpose on `qubit`.
///
/// For more than two qubits this is the one-vs-rest value for that qubit.
pub fn negativity(rho: &DensityMatrix, qubit: usize) -> Result<f64> {
    let pt = partial_transpose(rho, qubit)?;
    let eig = herm_eig(&pt)?;
    let neg: f64 = eig.eigenvalues.iter().filter(|&&x| x <= -NEGATIVITY_FLOOR).sum();
    Ok(neg.abs())
}

/// `Tr ρ²`
pub fn purity(rho: &DensityMatrix) -> f64 {
    purity_of(rho.matrix())
}

/// Temperature of a single qubit read off its excited-state population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalTemperature {
    Finite(f64),
    /// `ρ₂₂ = ½`
    Infinite,
    /// `ρ₂₂ = 0`: approached from positive temperatures.
    ZeroPositive,
    /// `ρ₂₂ = 1`: approached from negative temperatures.
    ZeroNegative,
}

impl LocalTemperature {
    /// Numeric value with the sentinels mapped to `±0` and `+∞`.
    pub fn value(self) -> f64 {
        match self {
            LocalTemperature::Finite(t) => t,
            LocalTemperature::Infinite => f64::INFINITY,
            LocalTemperature::ZeroPositive => 0.0,
            LocalTemperature::ZeroNegative => -0.0,
        }
    }
}

impl fmt::Display for LocalTemperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalTemperature::Finite(t) => write!(f, "{t}"),
            LocalTemperature::Infinite => f.write_str("inf"),
            LocalTemperature::ZeroPositive => f.write_str("0"),
            LocalTemperature::ZeroNegative => f.write_str("-0"),
        }
    }
}

fn single(rho1: &DensityMatrix) -> Result<()> {
    if rho1.n_qubits() != 1 {
        return domain(format!("expected a single-qubit state, got {} qubits", rho1.n_qubits()));
    }
    Ok(())
}

/// `T = 1 / ln((1 − ρ₂₂)/ρ₂₂)` with unit level splitting.
pub fn local_temperature(rho1: &DensityMatrix) -> Result<LocalTemperature> {
    single(rho1)?;
    let r = rho1.matrix()[(1, 1)].re;
    if r <= 0.0 {
        return Ok(LocalTemperature::ZeroPositive);
    }
    if r >= 1.0 {
        return Ok(LocalTemperature::ZeroNegative);
    }
    if (r - 0.5).abs() <= BALANCED_POPULATION_TOL {
        return Ok(LocalTemperature::Infinite);
    }
    let log_ratio = ((1.0 - r) / r).ln();
    Ok(LocalTemperature::Finite(1.0 / log_ratio))
}

/// `|ρ₀₁|`
pub fn local_coherence(rho1: &DensityMatrix) -> Result<f64> {
    single(rho1)?;
    Ok(rho1.matrix()[(0, 1)].norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub purity: f64,
    pub negativity: f64,
    pub local_temperature: LocalTemperature,
    pub local_coherence: f64,
}

/// Diagnostics of `rho`, with the single-qubit quantities taken on qubit 0.
pub fn diagnostics(rho: &DensityMatrix, t: f64) -> Result<DiagnosticsRow> {
    let local = reduce_to_qubit(rho, 0)?;
    let negativity = if rho.n_qubits() >= 2 { negativity(rho, 0)? } else { 0.0 };
    Ok(DiagnosticsRow {
        t,
        purity: purity(rho),
        negativity,
        local_temperature: local_temperature(&local)?,
        local_coherence: local_coherence(&local)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{c, diag, mat2, Operator};
    use crate::states::{
        ghz, identity_mixture, maximally_mixed, product_state, reduced_squeezed_closed_form, squeezed,
        thermal_populations, thermal_qubit,
    };

    /// Partial transpose on qubit 0 of a two-qubit matrix by explicit index swap.
    fn pt_first_by_index(m: &Operator) -> Operator {
        Operator::from_fn(4, 4, |r, col| {
            let (a, b) = (r >> 1, r & 1);
            let (a2, b2) = (col >> 1, col & 1);
            m[((a2 << 1) | b, (a << 1) | b2)]
        })
    }

    #[test]
    fn negativity_examples() {
        assert!((negativity(&ghz(2).unwrap(), 0).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(negativity(&product_state(0.3, 0.9, 0.4, 2).unwrap(), 0).unwrap(), 0.0);
        assert_eq!(negativity(&maximally_mixed(3).unwrap(), 2).unwrap(), 0.0);
        assert!(negativity(&ghz(2).unwrap(), 2).is_err());
    }

    #[test]
    fn identity_mixture_negativity_matches_pt_spectrum() {
        for k in 0..=30 {
            let eta = k as f64 / 30.0;
            let rho = identity_mixture(eta, 2).unwrap();
            let oracle: f64 = herm_eig(&pt_first_by_index(rho.matrix()))
                .unwrap()
                .eigenvalues
                .iter()
                .filter(|&&x| x < 0.0)
                .sum::<f64>()
                .abs();
            let closed = ((3.0 * eta - 1.0) / 4.0).max(0.0);
            let n = negativity(&rho, 0).unwrap();
            assert!((n - closed).abs() < 1e-10);
            assert!((n - oracle).abs() < 1e-10);
            if eta <= 1.0 / 3.0 {
                assert!(n < 1e-10);
            } else {
                assert!(n > 0.0);
            }
        }
        assert!(negativity(&identity_mixture(1.0 / 3.0, 2).unwrap(), 0).unwrap() < 1e-10);
    }

    #[test]
    fn negativity_independent_of_transposed_qubit_for_symmetric_states() {
        for rho in [ghz(2).unwrap(), identity_mixture(0.7, 2).unwrap(), squeezed(0.9, 0.3, 2).unwrap()] {
            let a = negativity(&rho, 0).unwrap();
            let b = negativity(&rho, 1).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn purity_examples() {
        assert!((purity(&ghz(3).unwrap()) - 1.0).abs() < 1e-14);
        assert!((purity(&maximally_mixed(2).unwrap()) - 0.25).abs() < 1e-15);
        let (p0, p1) = thermal_populations(0.5);
        let th = crate::opalg::kron(thermal_qubit(0.5).unwrap().matrix(), thermal_qubit(0.5).unwrap().matrix());
        let th = DensityMatrix::new(th).unwrap();
        let expected = (p0 * p0 + p1 * p1).powi(2);
        assert!((purity(&th) - expected).abs() < 1e-15);
        assert!((purity(&th) - 0.280892).abs() < 1e-6);
    }

    #[test]
    fn local_temperature_examples() {
        let q = |r22: f64| DensityMatrix::new(diag(&[1.0 - r22, r22])).unwrap();
        match local_temperature(&q(0.25)).unwrap() {
            LocalTemperature::Finite(t) => assert!((t - 0.910239).abs() < 1e-6),
            other => panic!("{other:?}"),
        }
        assert_eq!(local_temperature(&q(0.5)).unwrap(), LocalTemperature::Infinite);
        assert_eq!(local_temperature(&q(0.0)).unwrap(), LocalTemperature::ZeroPositive);
        assert_eq!(local_temperature(&q(1.0)).unwrap(), LocalTemperature::ZeroNegative);
        match local_temperature(&q(0.8)).unwrap() {
            LocalTemperature::Finite(t) => assert!(t < 0.0),
            other => panic!("{other:?}"),
        }
        for beta in [0.3, 0.5, 2.0] {
            let t = local_temperature(&thermal_qubit(beta).unwrap()).unwrap().value();
            assert!((t - 1.0 / beta).abs() < 1e-12 / beta);
        }
        assert!(local_temperature(&ghz(2).unwrap()).is_err());
        assert_eq!(LocalTemperature::Infinite.to_string(), "inf");
        assert_eq!(LocalTemperature::ZeroNegative.to_string(), "-0");
    }

    #[test]
    fn local_coherence_examples() {
        let plus = product_state(0.5, 1.0, 0.0, 1).unwrap();
        assert!((local_coherence(&plus).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(local_coherence(&thermal_qubit(0.5).unwrap()).unwrap(), 0.0);
        let red = reduced_squeezed_closed_form(0.7, 0.0, 4).unwrap();
        assert!((local_coherence(&red).unwrap() - 0.223710).abs() < 1e-6);
        let phased = DensityMatrix::new(mat2(c(0.5, 0.0), c(0.0, 0.3), c(0.0, -0.3), c(0.5, 0.0))).unwrap();
        assert!((local_coherence(&phased).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn corner_case_maximally_entangled() {
        let d = diagnostics(&identity_mixture(1.0, 2).unwrap(), 0.0).unwrap();
        assert!((d.negativity - 0.5).abs() < 1e-12);
        assert!((d.purity - 1.0).abs() < 1e-14);
        assert_eq!(d.local_temperature, LocalTemperature::Infinite);
        assert!(d.local_coherence < 1e-15);
    }
}
