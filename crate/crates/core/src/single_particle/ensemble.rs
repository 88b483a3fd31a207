// SPDX-License-Identifier: Apache-2.0

//! Monte Carlo averaging over independent noise paths.
//!
//! Trajectory `i` always draws from stream `i` of the master seed, and the
//! per-trajectory samples are folded into the running sums in index order.
//! The schedule of the parallel workers therefore never changes a single bit
//! of the result.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::trajectory::{grid_steps, site_states, TrajectoryEvolver, TrajectoryState};
use super::{displacement, momentum_bonds, momentum_expectation};
use crate::error::{Error, Result};
use crate::linalg::ZERO;
use crate::model::{sample_noise_path, ChainSpec, RngStreamSpec};

/// Upper limit on the trajectory count; beyond it the sums stop being meaningful.
pub const MAX_TRAJECTORIES: usize = 1 << 32;

const DEFAULT_CHUNK: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub enum InitialStates {
    /// Particle initially on each listed site; column `c` is `e_{sites[c]}`.
    Sites(Vec<usize>),
    /// Arbitrary normalised states (columns) with the origin used for `⟨x²⟩`.
    Custom {
        states: DMatrix<Complex64>,
        origins: Vec<usize>,
    },
}

#[derive(Clone, Debug)]
pub struct EnsembleRequest {
    pub traj_count: usize,
    pub master_seed: u64,
    pub t_grid: Vec<f64>,
    pub dt: f64,
    /// `None` tracks every site as a source (the full averaged propagator).
    pub initial: Option<InitialStates>,
    /// Trajectories simulated concurrently before each ordered reduction.
    pub chunk: usize,
}

impl EnsembleRequest {
    pub fn new(traj_count: usize, master_seed: u64, t_grid: Vec<f64>, dt: f64) -> Self {
        EnsembleRequest {
            traj_count,
            master_seed,
            t_grid,
            dt,
            initial: None,
            chunk: DEFAULT_CHUNK,
        }
    }

    pub fn with_sources(mut self, sites: Vec<usize>) -> Self {
        self.initial = Some(InitialStates::Sites(sites));
        self
    }

    pub fn with_states(mut self, states: DMatrix<Complex64>, origins: Vec<usize>) -> Self {
        self.initial = Some(InitialStates::Custom { states, origins });
        self
    }

    pub fn with_chunk(mut self, chunk: usize) -> Self {
        self.chunk = chunk.max(1);
        self
    }
}

/// Ensemble statistics. Matrix-valued fields are indexed `[time](site, column)`,
/// scalar series `[time][column]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleStats {
    pub traj_count: usize,
    pub t_grid: Vec<f64>,
    pub origins: Vec<usize>,
    pub mean_c: Vec<DMatrix<Complex64>>,
    pub mean_abs2: Vec<DMatrix<f64>>,
    /// `E|c|² − |E c|²`.
    pub var_c: Vec<DMatrix<f64>>,
    /// Standard error of `mean_c` (modulus of the complex error, total variance).
    pub stderr_c: Vec<DMatrix<f64>>,
    pub stderr_abs2: Vec<DMatrix<f64>>,
    pub stderr_var: Vec<DMatrix<f64>>,
    pub msd: Vec<Vec<f64>>,
    pub msd_stderr: Vec<Vec<f64>>,
    pub momentum: Vec<Vec<f64>>,
    pub momentum_stderr: Vec<Vec<f64>>,
}

impl EnsembleStats {
    pub fn n(&self) -> usize {
        self.mean_c.first().map_or(0, |m| m.nrows())
    }

    pub fn columns(&self) -> usize {
        self.origins.len()
    }
}

struct Sample {
    states: Vec<TrajectoryState>,
    msd: Vec<Vec<f64>>,
    momentum: Vec<Vec<f64>>,
}

struct Sums {
    c: Vec<Vec<Complex64>>,
    abs2: Vec<Vec<f64>>,
    abs4: Vec<Vec<f64>>,
    msd: Vec<Vec<f64>>,
    msd2: Vec<Vec<f64>>,
    p: Vec<Vec<f64>>,
    p2: Vec<Vec<f64>>,
}

impl Sums {
    fn new(times: usize, cells: usize, cols: usize) -> Self {
        let z = |len: usize| vec![vec![0.0; len]; times];
        Sums {
            c: vec![vec![ZERO; cells]; times],
            abs2: z(cells),
            abs4: z(cells),
            msd: z(cols),
            msd2: z(cols),
            p: z(cols),
            p2: z(cols),
        }
    }

    fn add(&mut self, s: &Sample) {
        for (ti, state) in s.states.iter().enumerate() {
            for (idx, z) in state.amplitudes.iter().enumerate() {
                let a2 = z.norm_sqr();
                self.c[ti][idx] += z;
                self.abs2[ti][idx] += a2;
                self.abs4[ti][idx] += a2 * a2;
            }
            for col in 0..s.msd[ti].len() {
                let m = s.msd[ti][col];
                let p = s.momentum[ti][col];
                self.msd[ti][col] += m;
                self.msd2[ti][col] += m * m;
                self.p[ti][col] += p;
                self.p2[ti][col] += p * p;
            }
        }
    }
}

fn stderr(mean: f64, mean_sq: f64, count: usize) -> f64 {
    if count < 2 {
        return 0.0;
    }
    ((mean_sq - mean * mean).max(0.0) / (count as f64 - 1.0)).sqrt()
}

/// Averages `traj_count` trajectories, tracking every site as a source.
pub fn run_ensemble(
    chain: &ChainSpec,
    traj_count: usize,
    master_seed: u64,
    t_grid: &[f64],
    dt: f64,
) -> Result<EnsembleStats> {
    run_ensemble_with(
        chain,
        &EnsembleRequest::new(traj_count, master_seed, t_grid.to_vec(), dt),
    )
}

pub fn run_ensemble_with(chain: &ChainSpec, req: &EnsembleRequest) -> Result<EnsembleStats> {
    chain.validate()?;
    if req.traj_count == 0 {
        return Err(Error::arg(
            "trajectories",
            "at least one trajectory is required",
        ));
    }
    if req.traj_count > MAX_TRAJECTORIES {
        return Err(Error::arg(
            "trajectories",
            format!(
                "{} exceeds the supported maximum {MAX_TRAJECTORIES}",
                req.traj_count
            ),
        ));
    }
    let n = chain.n;
    let (initial, origins) = match &req.initial {
        None => (DMatrix::identity(n, n), (0..n).collect::<Vec<_>>()),
        Some(InitialStates::Sites(sites)) => (site_states(n, sites)?, sites.clone()),
        Some(InitialStates::Custom { states, origins }) => {
            if states.nrows() != n || origins.len() != states.ncols() {
                return Err(Error::Dimension(format!(
                    "custom states are {}x{} with {} origins for a {n}-site chain",
                    states.nrows(),
                    states.ncols(),
                    origins.len()
                )));
            }
            if let Some(&o) = origins.iter().find(|&&o| o >= n) {
                return Err(Error::arg("origin", format!("site {o} outside the chain")));
            }
            (states.clone(), origins.clone())
        }
    };
    let steps = grid_steps(&req.t_grid, req.dt)?;
    let total_steps = (*steps.last().unwrap()).max(1);
    let evolver = TrajectoryEvolver::for_chain(chain, req.dt)?;
    let bonds = momentum_bonds(evolver.hopping());
    let boundary = evolver.hopping().boundary();
    let times = req.t_grid.len();
    let cols = initial.ncols();

    let simulate = |i: usize| -> Result<Sample> {
        let stream = RngStreamSpec::new(req.master_seed, i as u64);
        let noise = sample_noise_path(chain, stream, req.dt, total_steps)?;
        let states = evolver.evolve(&noise, &req.t_grid, &initial)?;
        let mut msd = vec![vec![0.0; cols]; times];
        let mut momentum = vec![vec![0.0; cols]; times];
        for (ti, s) in states.iter().enumerate() {
            for col in 0..cols {
                let psi = s.amplitudes.column(col);
                let psi = psi.as_slice();
                msd[ti][col] = psi
                    .iter()
                    .enumerate()
                    .map(|(j, z)| displacement(j, origins[col], n, boundary).powi(2) * z.norm_sqr())
                    .sum();
                momentum[ti][col] = momentum_expectation(psi, &bonds);
            }
        }
        Ok(Sample {
            states,
            msd,
            momentum,
        })
    };

    let mut sums = Sums::new(times, n * cols, cols);
    let mut start = 0;
    while start < req.traj_count {
        let end = (start + req.chunk).min(req.traj_count);
        let batch: Vec<Result<Sample>> = (start..end).into_par_iter().map(simulate).collect();
        for sample in batch {
            sums.add(&sample?);
        }
        start = end;
    }

    let count = req.traj_count;
    let inv = 1.0 / count as f64;
    let mut stats = EnsembleStats {
        traj_count: count,
        t_grid: req.t_grid.clone(),
        origins,
        mean_c: Vec::with_capacity(times),
        mean_abs2: Vec::with_capacity(times),
        var_c: Vec::with_capacity(times),
        stderr_c: Vec::with_capacity(times),
        stderr_abs2: Vec::with_capacity(times),
        stderr_var: Vec::with_capacity(times),
        msd: Vec::with_capacity(times),
        msd_stderr: Vec::with_capacity(times),
        momentum: Vec::with_capacity(times),
        momentum_stderr: Vec::with_capacity(times),
    };
    for ti in 0..times {
        let mean_c: Vec<Complex64> = sums.c[ti].iter().map(|z| z * inv).collect();
        let mean_abs2: Vec<f64> = sums.abs2[ti].iter().map(|v| v * inv).collect();
        let mean_abs4: Vec<f64> = sums.abs4[ti].iter().map(|v| v * inv).collect();
        let var: Vec<f64> = mean_c
            .iter()
            .zip(&mean_abs2)
            .map(|(m, a2)| a2 - m.norm_sqr())
            .collect();
        let se_c: Vec<f64> = if count < 2 {
            vec![0.0; var.len()]
        } else {
            var.iter()
                .map(|v| (v.max(0.0) / (count as f64 - 1.0)).sqrt())
                .collect()
        };
        let se_abs2: Vec<f64> = mean_abs2
            .iter()
            .zip(&mean_abs4)
            .map(|(a2, a4)| stderr(*a2, *a4, count))
            .collect();
        let se_var: Vec<f64> = (0..var.len())
            .map(|i| (se_abs2[i].powi(2) + (2.0 * mean_c[i].norm() * se_c[i]).powi(2)).sqrt())
            .collect();
        stats.mean_c.push(DMatrix::from_vec(n, cols, mean_c));
        stats.mean_abs2.push(DMatrix::from_vec(n, cols, mean_abs2));
        stats.var_c.push(DMatrix::from_vec(n, cols, var));
        stats.stderr_c.push(DMatrix::from_vec(n, cols, se_c));
        stats.stderr_abs2.push(DMatrix::from_vec(n, cols, se_abs2));
        stats.stderr_var.push(DMatrix::from_vec(n, cols, se_var));

        let series = |s: &[f64], s2: &[f64]| -> (Vec<f64>, Vec<f64>) {
            s.iter()
                .zip(s2)
                .map(|(a, b)| (a * inv, stderr(a * inv, b * inv, count)))
                .unzip()
        };
        let (msd, msd_se) = series(&sums.msd[ti], &sums.msd2[ti]);
        let (p, p_se) = series(&sums.p[ti], &sums.p2[ti]);
        stats.msd.push(msd);
        stats.msd_stderr.push(msd_se);
        stats.momentum.push(p);
        stats.momentum_stderr.push(p_se);
    }
    Ok(stats)
}
