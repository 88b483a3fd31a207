// SPDX-License-Identifier: Apache-2.0

//! Split-step evolution of single noise realisations.
//!
//! One timestep applies the free hopping propagator `e^{-iR dt}` followed by
//! the diagonal kick `e^{-iφ_j}`. Static disorder is evolved exactly with the
//! eigenbasis of `R + diag(ξ)` instead, since the field never changes.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ZERO;
use crate::model::{ChainSpec, HoppingMatrix, NoiseMode, NoiseRealization};

/// Amplitudes at time `t`; column `c` evolves the `c`-th initial state.
///
/// With the site basis as initial states column `k` holds `c_{j,k}(ξ,t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryState {
    pub t: f64,
    pub amplitudes: DMatrix<Complex64>,
}

impl TrajectoryState {
    pub fn column_norms(&self) -> Vec<f64> {
        self.amplitudes
            .column_iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }
}

/// Maps a time grid onto step counts of the `dt` lattice.
pub fn grid_steps(t_grid: &[f64], dt: f64) -> Result<Vec<usize>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::arg("dt", format!("must be positive, got {dt}")));
    }
    if t_grid.is_empty() {
        return Err(Error::TimeGrid("empty time grid".into()));
    }
    let mut steps = Vec::with_capacity(t_grid.len());
    for (i, &t) in t_grid.iter().enumerate() {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::TimeGrid(format!(
                "t[{i}] = {t} is not a finite non-negative time"
            )));
        }
        if i > 0 && t <= t_grid[i - 1] {
            return Err(Error::TimeGrid(format!(
                "grid not strictly increasing at index {i}"
            )));
        }
        let m = (t / dt).round();
        if (t / dt - m).abs() > 1e-6 {
            return Err(Error::TimeGrid(format!(
                "t[{i}] = {t} is not a multiple of dt = {dt}"
            )));
        }
        steps.push(m as usize);
    }
    Ok(steps)
}

/// Reusable split-step propagator for a fixed hopping matrix and timestep.
#[derive(Clone, Debug)]
pub struct TrajectoryEvolver {
    hopping: HoppingMatrix,
    dt: f64,
    /// `e^{-iR dt}`, row-major.
    step: Vec<Complex64>,
}

impl TrajectoryEvolver {
    pub fn new(hopping: HoppingMatrix, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::arg("dt", format!("must be positive, got {dt}")));
        }
        let u = hopping.propagator(dt);
        let n = hopping.n();
        let step = (0..n * n).map(|i| u[(i / n, i % n)]).collect();
        Ok(TrajectoryEvolver { hopping, dt, step })
    }

    pub fn for_chain(chain: &ChainSpec, dt: f64) -> Result<Self> {
        Self::new(HoppingMatrix::build(chain)?, dt)
    }

    pub fn n(&self) -> usize {
        self.hopping.n()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn hopping(&self) -> &HoppingMatrix {
        &self.hopping
    }

    /// Evolves `initial` (n × m, one state per column) along `noise` and
    /// returns the states at every time of `t_grid`.
    pub fn evolve(
        &self,
        noise: &NoiseRealization,
        t_grid: &[f64],
        initial: &DMatrix<Complex64>,
    ) -> Result<Vec<TrajectoryState>> {
        let n = self.n();
        if initial.nrows() != n || noise.n != n {
            return Err(Error::Dimension(format!(
                "chain has {n} sites, initial state {} rows, noise {} sites",
                initial.nrows(),
                noise.n
            )));
        }
        if (noise.dt - self.dt).abs() > 1e-15 * self.dt {
            return Err(Error::arg(
                "dt",
                "noise path and propagator use different timesteps",
            ));
        }
        let steps = grid_steps(t_grid, self.dt)?;
        let last = *steps.last().unwrap();
        if last > noise.steps {
            return Err(Error::TimeGrid(format!(
                "t = {} exceeds the noise path length {}",
                t_grid[t_grid.len() - 1],
                noise.duration()
            )));
        }
        if noise.mode == NoiseMode::Static {
            return Ok(evolve_static_exact(
                &self.hopping,
                &noise.static_field,
                t_grid,
                initial,
            ));
        }

        let m = initial.ncols();
        let mut psi: Vec<Complex64> = initial.as_slice().to_vec();
        let mut scratch = vec![ZERO; n];
        let mut out = Vec::with_capacity(t_grid.len());
        let mut done = 0usize;
        for (&target, &t) in steps.iter().zip(t_grid) {
            while done < target {
                let phases = noise.step_phases(done);
                let kicks: Vec<Complex64> = phases
                    .iter()
                    .map(|&p| Complex64::from_polar(1.0, -p))
                    .collect();
                for col in psi.chunks_exact_mut(n) {
                    self.apply_step(col, &mut scratch);
                    for (z, k) in col.iter_mut().zip(&kicks) {
                        *z *= k;
                    }
                }
                done += 1;
            }
            out.push(TrajectoryState {
                t,
                amplitudes: DMatrix::from_column_slice(n, m, &psi),
            });
        }
        Ok(out)
    }

    fn apply_step(&self, col: &mut [Complex64], scratch: &mut [Complex64]) {
        let n = col.len();
        for (j, s) in scratch.iter_mut().enumerate() {
            let row = &self.step[j * n..(j + 1) * n];
            let mut acc = ZERO;
            for (u, z) in row.iter().zip(col.iter()) {
                acc += u * z;
            }
            *s = acc;
        }
        col.copy_from_slice(scratch);
    }
}

/// Exact evolution under the time-independent `R + diag(field)`.
pub fn evolve_static_exact(
    hopping: &HoppingMatrix,
    field: &[f64],
    t_grid: &[f64],
    initial: &DMatrix<Complex64>,
) -> Vec<TrajectoryState> {
    let mut h = hopping.matrix().clone();
    for (j, xi) in field.iter().enumerate() {
        h[(j, j)] += xi;
    }
    let eig = SymmetricEigen::new(h);
    let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let coeffs = v.transpose() * initial;
    t_grid
        .iter()
        .map(|&t| {
            let mut rotated = coeffs.clone();
            for (q, mut row) in rotated.row_iter_mut().enumerate() {
                let phase = Complex64::from_polar(1.0, -eig.eigenvalues[q] * t);
                row *= phase;
            }
            TrajectoryState {
                t,
                amplitudes: &v * rotated,
            }
        })
        .collect()
}

/// Evolves the full propagator (identity initial state) along one noise path.
pub fn evolve_trajectory(
    chain: &ChainSpec,
    noise: &NoiseRealization,
    t_grid: &[f64],
) -> Result<Vec<TrajectoryState>> {
    let evolver = TrajectoryEvolver::for_chain(chain, noise.dt)?;
    evolver.evolve(noise, t_grid, &DMatrix::identity(chain.n, chain.n))
}

/// Column `k` is the site basis vector `e_k`.
pub fn site_states(n: usize, sites: &[usize]) -> Result<DMatrix<Complex64>> {
    let mut m = DMatrix::from_element(n, sites.len(), ZERO);
    for (c, &k) in sites.iter().enumerate() {
        if k >= n {
            return Err(Error::arg(
                "source",
                format!("site {k} outside a chain of {n} sites"),
            ));
        }
        m[(k, c)] = Complex64::new(1.0, 0.0);
    }
    Ok(m)
}
