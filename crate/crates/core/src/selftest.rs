//! Quick invariant corpus run by `qthermo selftest`.

use crate::channel::{d_evolve_dbeta, evolve_with_derivative, BathSpec, DerivativeMethod, Picture};
use crate::diagnostics::negativity;
use crate::error::Result;
use crate::metrology::{m1_m2, qfi_at, qfi_of_state, sld, thermal_asymptote, DEFAULT_SLD_CUTOFF};
use crate::opalg::{hermiticity_defect, max_abs_diff, partial_trace, trace};
use crate::states::{ghz, reduced_squeezed_closed_form, squeezed, LocalBasis, StateSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn corpus(n: usize) -> Vec<StateSpec> {
    vec![
        StateSpec::Product { a: 0.3, r: 0.7, phi: 0.4, n_qubits: n },
        StateSpec::Ghz { n_qubits: n },
        StateSpec::IdentityMixture { eta: 0.6, n_qubits: n },
        StateSpec::ThermalMixture { eta: 0.5, mu: 1.0, n_qubits: n },
        StateSpec::KSuperposition { alpha: 0.8, k: LocalBasis::Plus, n_qubits: n },
        StateSpec::Squeezed { chi: 0.9, theta: 0.4, n_qubits: n },
        StateSpec::MaximallyMixed { n_qubits: n },
        StateSpec::Ground { n_qubits: n },
    ]
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

pub fn run() -> Vec<Check> {
    let bath = BathSpec { beta: 0.5, gamma: 1.0 };
    let times = [0.05, 0.2, 0.7];
    vec![
        check("thermal asymptote", || {
            let mut worst: f64 = 0.0;
            for spec in corpus(2) {
                let f = qfi_at(&spec, &bath, bath.thermalization_time())?;
                worst = worst.max((f - thermal_asymptote(&bath, 2)).abs());
            }
            Ok((worst <= 1e-6, format!("max deviation {worst:.3e}")))
        }),
        check("zero-time QFI", || {
            let mut worst: f64 = 0.0;
            for spec in corpus(2) {
                worst = worst.max(qfi_at(&spec, &bath, 0.0)?);
            }
            Ok((worst <= 1e-12, format!("max QFI {worst:.3e}")))
        }),
        check("additivity", || {
            let mut worst: f64 = 0.0;
            for &t in &times {
                let one = qfi_at(&StateSpec::Product { a: 0.2, r: 0.9, phi: 1.0, n_qubits: 1 }, &bath, t)?;
                let three = qfi_at(&StateSpec::Product { a: 0.2, r: 0.9, phi: 1.0, n_qubits: 3 }, &bath, t)?;
                worst = worst.max((three - 3.0 * one).abs() / (3.0 * one));
            }
            Ok((worst <= 1e-9, format!("max relative deviation {worst:.3e}")))
        }),
        check("M2 nullity", || {
            let mut worst: f64 = 0.0;
            for beta in [0.2, 1.0, 4.0] {
                let b = BathSpec { beta, gamma: 1.3 };
                for x in [0.01, 0.5, 3.0] {
                    worst = worst.max(m1_m2(&b, -x / b.lambda())?.m2_norm);
                }
            }
            Ok((worst <= 1e-12, format!("max ||M2|| {worst:.3e}")))
        }),
        check("evolution preserves trace and Hermiticity", || {
            let mut worst: f64 = 0.0;
            for spec in corpus(3) {
                for &t in &times {
                    let (rho, d) = evolve_with_derivative(&spec.build()?, &bath, t, Picture::Kraus)?;
                    worst = worst
                        .max((trace(rho.matrix()).re - 1.0).abs())
                        .max(hermiticity_defect(rho.matrix()))
                        .max(trace(&d).norm());
                }
            }
            Ok((worst <= 1e-12, format!("max defect {worst:.3e}")))
        }),
        check("SLD residual", || {
            let mut worst: f64 = 0.0;
            for spec in corpus(2) {
                for &t in &times {
                    let (rho, d) = evolve_with_derivative(&spec.build()?, &bath, t, Picture::Kraus)?;
                    worst = worst.max(sld(&rho, &d, DEFAULT_SLD_CUTOFF)?.residual);
                }
            }
            Ok((worst <= 1e-8, format!("max residual {worst:.3e}")))
        }),
        check("analytic vs finite-difference derivative", || {
            let mut worst: f64 = 0.0;
            for spec in corpus(2) {
                let rho = spec.build()?;
                let a = d_evolve_dbeta(&rho, &bath, 0.3, DerivativeMethod::Analytic)?;
                let f = d_evolve_dbeta(&rho, &bath, 0.3, DerivativeMethod::FiniteDifference { step: 1e-6 })?;
                let scale = a.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(1e-3);
                worst = worst.max(max_abs_diff(&a, &f) / scale);
            }
            Ok((worst <= 1e-6, format!("max relative deviation {worst:.3e}")))
        }),
        check("reduced squeezed closed form", || {
            let mut worst: f64 = 0.0;
            for n in 1..=4 {
                for (chi, theta) in [(0.3, 0.0), (1.1, 0.7), (2.5, 2.0)] {
                    let brute = partial_trace(&squeezed(chi, theta, n)?, &[0])?;
                    let closed = reduced_squeezed_closed_form(chi, theta, n)?;
                    worst = worst.max(max_abs_diff(brute.matrix(), closed.matrix()));
                }
            }
            Ok((worst <= 1e-12, format!("max deviation {worst:.3e}")))
        }),
        check("Kraus/Lindblad QFI agreement", || {
            let mut worst: f64 = 0.0;
            for spec in corpus(2) {
                let rho = spec.build()?;
                for &t in &times {
                    let k = qfi_of_state(&rho, &bath, t, Picture::Kraus)?;
                    let l = qfi_of_state(&rho, &bath, t, Picture::Lindblad)?;
                    worst = worst.max((k - l).abs());
                }
            }
            Ok((worst <= 1e-9, format!("max deviation {worst:.3e}")))
        }),
        check("negativity of GHZ", || {
            let n = negativity(&ghz(2)?, 0)?;
            Ok(((n - 0.5).abs() <= 1e-12, format!("negativity {n}")))
        }),
    ]
}
