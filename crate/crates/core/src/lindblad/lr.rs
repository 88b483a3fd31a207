// SPDX-License-Identifier: Apache-2.0

//! Numerical Lieb-Robinson commutator `C_B(x,t) = sup_A ‖[A_x, B(t)]‖ / ‖A_x‖`.
//!
//! The supremum is sampled over the three Pauli matrices and a fixed set of
//! random single-site Hermitian operators, so the result is a lower bound.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::evolve::{heisenberg_evolve_scaled, ScaledOperator};
use super::generator::Superoperator;
use super::pauli::{pauli_commutator, Pauli, PauliOperatorRep};
use crate::error::{Error, Result};

/// Largest qubit count for which commutator norms are evaluated densely.
pub const MAX_LR_QUBITS: usize = 5;
/// Random probes added to the three Pauli matrices.
pub const RANDOM_PROBES: usize = 20;
const PROBE_SEED: u64 = 0x5eed_1b;

/// Unit-norm single-site probes `A = a₀ + a·σ` with `|a₀| + |a| = 1`.
pub fn probe_operators() -> Vec<[f64; 4]> {
    let mut probes = vec![
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    for _ in 0..RANDOM_PROBES {
        let a: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        let norm = a[0].abs() + (a[1] * a[1] + a[2] * a[2] + a[3] * a[3]).sqrt();
        probes.push(a.map(|x| x / norm));
    }
    probes
}

fn probe_at(n: usize, site: usize, a: &[f64; 4]) -> Result<PauliOperatorRep> {
    let mut op = PauliOperatorRep::zeros(n)?;
    for p in Pauli::ALL {
        let single = PauliOperatorRep::single_site(n, site, p, Complex64::new(a[p.index()], 0.0))?;
        op = op.add(&single)?;
    }
    Ok(op)
}

/// `ln C_B(x)` for an already evolved operator; `-∞` when it commutes with
/// every probe.
pub fn lr_log_commutator_of(b: &ScaledOperator, x: usize) -> Result<f64> {
    let n = b.traceless.n();
    if n > MAX_LR_QUBITS {
        return Err(Error::arg(
            "n",
            format!("commutator norms need n ≤ {MAX_LR_QUBITS}, got {n}"),
        ));
    }
    if x >= n {
        return Err(Error::arg("x", format!("site {x} outside {n} qubits")));
    }
    let mut best = 0.0f64;
    for a in probe_operators() {
        let c = pauli_commutator(&probe_at(n, x, &a)?, &b.traceless)?;
        best = best.max(c.operator_norm());
    }
    Ok(b.log_scale + best.ln())
}

/// `C_B(x, t)` for `B(t)` evolved with the adjoint of `gen`. Sites are 0-based.
pub fn lr_commutator(gen: &Superoperator, b0: &PauliOperatorRep, x: usize, t: f64) -> Result<f64> {
    Ok(lr_log_commutator(gen, b0, x, &[t])?[0].exp())
}

/// `ln C_B(x, t)` on a time grid, robust to underflow of strongly damped runs.
pub fn lr_log_commutator(
    gen: &Superoperator,
    b0: &PauliOperatorRep,
    x: usize,
    t_grid: &[f64],
) -> Result<Vec<f64>> {
    if gen.n() > MAX_LR_QUBITS {
        return Err(Error::arg(
            "n",
            format!("commutator norms need n ≤ {MAX_LR_QUBITS}, got {}", gen.n()),
        ));
    }
    heisenberg_evolve_scaled(gen, b0, t_grid)?
        .iter()
        .map(|b| lr_log_commutator_of(b, x))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::generator::{build_generator, H0Spec, NoiseKind};

    fn z_at(n: usize, site: usize) -> PauliOperatorRep {
        PauliOperatorRep::single_site(n, site, Pauli::Z, Complex64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn probes_have_unit_norm() {
        let probes = probe_operators();
        assert_eq!(probes.len(), 3 + RANDOM_PROBES);
        for a in probes {
            let op = probe_at(1, 0, &a).unwrap();
            assert!((op.operator_norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn disjoint_support_commutes_at_time_zero() {
        let gen = build_generator(&H0Spec::xx(4).unwrap(), NoiseKind::Isotropic, 1.0, 4).unwrap();
        assert_eq!(lr_commutator(&gen, &z_at(4, 3), 0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn same_site_pauli_commutator_is_two() {
        let gen = build_generator(&H0Spec::xx(3).unwrap(), NoiseKind::Isotropic, 1.0, 3).unwrap();
        let c = lr_commutator(&gen, &z_at(3, 1), 1, 0.0).unwrap();
        assert!((c - 2.0).abs() < 1e-12);
    }

    #[test]
    fn signal_reaches_far_site_without_noise() {
        let gen = build_generator(&H0Spec::xx(4).unwrap(), NoiseKind::Isotropic, 0.0, 4).unwrap();
        let c = lr_commutator(&gen, &z_at(4, 3), 0, 1.0).unwrap();
        assert!(c > 1e-3 && c <= 2.0 + 1e-12);
    }

    #[test]
    fn rejects_large_systems() {
        let gen = build_generator(&H0Spec::xx(6).unwrap(), NoiseKind::Isotropic, 0.1, 6).unwrap();
        assert!(lr_commutator(&gen, &z_at(6, 0), 0, 0.1).is_err());
    }
}
