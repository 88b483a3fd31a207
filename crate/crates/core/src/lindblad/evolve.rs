// SPDX-License-Identifier: Apache-2.0

//! Time evolution of Pauli coefficient vectors under a [`Superoperator`].
//!
//! The action `e^{tG} v` is evaluated by a truncated Taylor series on
//! substeps with `h·‖G‖ ≤ 1`. Heisenberg evolution factors out the slowest
//! traceless decay so that strongly damped operators keep full precision.

use num_complex::Complex64;

use super::generator::Superoperator;
use super::pauli::PauliOperatorRep;
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigenvalues;

const STATE_TOL: f64 = 1e-10;
const MAX_TAYLOR_TERMS: usize = 80;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Picture {
    Schrodinger,
    Heisenberg,
}

/// `v ← e^{t(G + s)} v` in the requested picture.
fn expm_action(gen: &Superoperator, picture: Picture, shift: f64, t: f64, v: &mut [f64]) {
    if t == 0.0 {
        return;
    }
    let norm = gen.norm_bound() + shift.abs();
    let steps = (t.abs() * norm).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let dim = v.len();
    let (mut term, mut next) = (vec![0.0; dim], vec![0.0; dim]);
    for _ in 0..steps {
        term.copy_from_slice(v);
        for k in 1..=MAX_TAYLOR_TERMS {
            match picture {
                Picture::Schrodinger => gen.apply_schrodinger(&term, &mut next),
                Picture::Heisenberg => gen.apply_heisenberg(&term, &mut next),
            }
            let c = h / k as f64;
            let mut term_max = 0.0f64;
            for ((t_i, n_i), v_i) in term.iter_mut().zip(&next).zip(v.iter_mut()) {
                *t_i = c * (n_i + shift * *t_i);
                *v_i += *t_i;
                term_max = term_max.max(t_i.abs());
            }
            let v_max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if term_max <= 1e-17 * v_max || term_max == 0.0 {
                break;
            }
        }
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    let mut prev = 0.0;
    for &t in t_grid {
        if !t.is_finite() || t < prev {
            return Err(Error::TimeGrid(format!(
                "times must be finite, non-negative and non-decreasing (got {t} after {prev})"
            )));
        }
        prev = t;
    }
    Ok(())
}

fn check_size(gen: &Superoperator, op: &PauliOperatorRep) -> Result<()> {
    if gen.n() != op.n() {
        return Err(Error::Dimension(format!(
            "operator on {} qubits, generator on {}",
            op.n(),
            gen.n()
        )));
    }
    Ok(())
}

/// Checks that `rho` is Hermitian with unit trace and no negative eigenvalue.
pub fn validate_density(rho: &PauliOperatorRep) -> Result<()> {
    if !rho.is_hermitian(STATE_TOL) {
        return Err(Error::InvalidState(
            "density operator is not Hermitian".into(),
        ));
    }
    let tr = rho.coeffs()[0] * (1u64 << rho.n()) as f64;
    if (tr - Complex64::new(1.0, 0.0)).norm() > STATE_TOL {
        return Err(Error::InvalidState(format!("trace {tr} is not 1")));
    }
    let lowest = hermitian_eigenvalues(&rho.densify())[0];
    if lowest < -STATE_TOL {
        return Err(Error::InvalidState(format!(
            "density operator has negative eigenvalue {lowest:e}"
        )));
    }
    Ok(())
}

/// `ρ(t)` at every time of `t_grid`.
pub fn evolve_density(
    gen: &Superoperator,
    rho0: &PauliOperatorRep,
    t_grid: &[f64],
) -> Result<Vec<PauliOperatorRep>> {
    check_size(gen, rho0)?;
    check_grid(t_grid)?;
    validate_density(rho0)?;
    let mut v = rho0.real_coeffs();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        expm_action(gen, Picture::Schrodinger, 0.0, t - now, &mut v);
        now = t;
        out.push(PauliOperatorRep::from_real(gen.n(), &v)?);
    }
    Ok(out)
}

/// `B(t) = identity·1 + e^{log_scale}·traceless`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledOperator {
    pub t: f64,
    pub identity: Complex64,
    pub log_scale: f64,
    pub traceless: PauliOperatorRep,
}

impl ScaledOperator {
    pub fn to_operator(&self) -> PauliOperatorRep {
        let mut op = self
            .traceless
            .scale(Complex64::new(self.log_scale.exp(), 0.0));
        op.coeffs_mut()[0] = self.identity;
        op
    }
}

/// Heisenberg-picture `B(t)` on a grid with the decay kept in `log_scale`.
pub fn heisenberg_evolve_scaled(
    gen: &Superoperator,
    b0: &PauliOperatorRep,
    t_grid: &[f64],
) -> Result<Vec<ScaledOperator>> {
    check_size(gen, b0)?;
    check_grid(t_grid)?;
    let n = gen.n();
    let shift = gen.min_traceless_decay();
    let identity = b0.coeffs()[0];
    let mut re: Vec<f64> = b0.coeffs().iter().map(|c| c.re).collect();
    let mut im: Vec<f64> = b0.coeffs().iter().map(|c| c.im).collect();
    re[0] = 0.0;
    im[0] = 0.0;
    let mut log_scale = 0.0;
    let mut now = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let dt = t - now;
        expm_action(gen, Picture::Heisenberg, shift, dt, &mut re);
        expm_action(gen, Picture::Heisenberg, shift, dt, &mut im);
        log_scale -= shift * dt;
        now = t;
        let peak = re.iter().chain(&im).fold(0.0f64, |m, x| m.max(x.abs()));
        if peak > 0.0 {
            re.iter_mut().chain(im.iter_mut()).for_each(|x| *x /= peak);
            log_scale += peak.ln();
        }
        let coeffs = re
            .iter()
            .zip(&im)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        out.push(ScaledOperator {
            t,
            identity,
            log_scale,
            traceless: PauliOperatorRep::from_coeffs(n, coeffs)?,
        });
    }
    Ok(out)
}

/// Heisenberg-picture `B(t)` under the adjoint generator.
pub fn heisenberg_evolve(
    gen: &Superoperator,
    b0: &PauliOperatorRep,
    t: f64,
) -> Result<PauliOperatorRep> {
    let mut path = heisenberg_evolve_scaled(gen, b0, &[t])?;
    Ok(path.remove(0).to_operator())
}

/// `tr(A B)` from Pauli coefficients, `2ⁿ Σ_α a_α b_α`.
pub fn pauli_trace_product(a: &PauliOperatorRep, b: &PauliOperatorRep) -> Complex64 {
    let sum: Complex64 = a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| x * y).sum();
    sum * (1u64 << a.n()) as f64
}
