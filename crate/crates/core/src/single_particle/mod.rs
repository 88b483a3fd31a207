// SPDX-License-Identifier: Apache-2.0

//! The noisy XX chain in its one-fermion sector.
//!
//! After the Jordan-Wigner map the chain is a single particle hopping on `R`
//! with a fluctuating on-site potential. Trajectories sample the potential,
//! the ensemble engine averages them, and the exact evaluators give the
//! averaged amplitude and the averaged density matrix in closed or ODE form.

mod density;
mod ensemble;
mod exact;
mod trajectory;

pub use density::{
    evolve_dephasing_density, evolve_dephasing_density_with, DensityOptions, SingleParticleDensity,
    DEFAULT_DENSITY_STEP,
};
pub use ensemble::{
    run_ensemble, run_ensemble_with, EnsembleRequest, EnsembleStats, InitialStates,
    MAX_TRAJECTORIES,
};
pub use exact::{exact_averaged_correlation, infinite_chain_correlation, matrix_exponential_check};
pub use trajectory::{
    evolve_static_exact, evolve_trajectory, grid_steps, site_states, TrajectoryEvolver,
    TrajectoryState,
};

use num_complex::Complex64;

use crate::model::{Boundary, HoppingMatrix};

/// Signed distance from `origin` to `j`; minimal image on a ring.
pub fn displacement(j: usize, origin: usize, n: usize, boundary: Option<Boundary>) -> f64 {
    let d = j as i64 - origin as i64;
    if boundary == Some(Boundary::Ring) {
        let n = n as i64;
        let wrapped = d.rem_euclid(n);
        return if wrapped > n / 2 {
            (wrapped - n) as f64
        } else {
            wrapped as f64
        };
    }
    d as f64
}

/// Oriented bonds `(j, j+1)` of the momentum operator `p = Σ i(|j+1⟩⟨j| − |j⟩⟨j+1|)`.
pub(crate) fn momentum_bonds(hopping: &HoppingMatrix) -> Vec<(usize, usize)> {
    let n = hopping.n();
    let mut bonds: Vec<(usize, usize)> = (0..n - 1).map(|j| (j, j + 1)).collect();
    if hopping.boundary() == Some(Boundary::Ring) {
        bonds.push((n - 1, 0));
    }
    bonds
}

/// `⟨ψ|p|ψ⟩ = 2 Σ_bonds Im(ψ_j* ψ_{j+1})`.
pub(crate) fn momentum_expectation(psi: &[Complex64], bonds: &[(usize, usize)]) -> f64 {
    2.0 * bonds
        .iter()
        .map(|&(a, b)| (psi[a].conj() * psi[b]).im)
        .sum::<f64>()
}
