// SPDX-License-Identifier: Apache-2.0

//! Averaged one-particle density matrix under dephasing,
//! `∂ρ/∂t = −i[R, ρ] − 2γ(ρ − diag ρ)`.
//!
//! The diagonal `ρ_{j,j}(t)` started from `|k⟩⟨k|` equals `E|c_{j,k}(ξ,t)|²`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{displacement, momentum_bonds};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermiticity_defect, trace, ZERO};
use crate::model::{Boundary, ChainSpec, HoppingMatrix};

/// Largest RK4 step used by default; halving it moves results by < 1e-8.
pub const DEFAULT_DENSITY_STEP: f64 = 0.0025;

const STATE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct SingleParticleDensity {
    pub t: f64,
    pub rho: DMatrix<Complex64>,
}

impl SingleParticleDensity {
    /// `|k⟩⟨k|` on `n` sites.
    pub fn site(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::arg(
                "origin",
                format!("site {k} outside a chain of {n} sites"),
            ));
        }
        let mut rho = DMatrix::from_element(n, n, ZERO);
        rho[(k, k)] = Complex64::new(1.0, 0.0);
        Ok(SingleParticleDensity { t: 0.0, rho })
    }

    /// `|ψ⟩⟨ψ|` for a normalised `ψ`.
    pub fn pure(psi: &DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("state norm {norm} is not 1")));
        }
        Ok(SingleParticleDensity {
            t: 0.0,
            rho: psi * psi.adjoint(),
        })
    }

    pub fn n(&self) -> usize {
        self.rho.nrows()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|j| self.rho[(j, j)].re).collect()
    }

    /// Checks Hermiticity, unit trace and positivity (within 1e-10).
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.rho.ncols() != n {
            return Err(Error::InvalidState("density matrix is not square".into()));
        }
        let herm = hermiticity_defect(&self.rho);
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (defect {herm:e})"
            )));
        }
        let tr = trace(&self.rho);
        if (tr - Complex64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let lowest = hermitian_eigenvalues(&self.rho)[0];
        if lowest < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix has negative eigenvalue {lowest:e}"
            )));
        }
        Ok(())
    }

    /// `Σ_j (j − origin)² ρ_{j,j}`.
    pub fn second_moment(&self, origin: usize, boundary: Option<Boundary>) -> f64 {
        let n = self.n();
        (0..n)
            .map(|j| displacement(j, origin, n, boundary).powi(2) * self.rho[(j, j)].re)
            .sum()
    }

    /// `tr(p ρ)` with the bond orientation of `hopping`.
    pub fn momentum(&self, hopping: &HoppingMatrix) -> f64 {
        // tr(pρ) = Σ_bonds i(ρ_{j,j+1} − ρ_{j+1,j}) = −2 Σ Im ρ_{j,j+1}
        momentum_bonds(hopping)
            .iter()
            .map(|&(a, b)| -2.0 * self.rho[(a, b)].im)
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityOptions {
    /// Upper bound on the RK4 step; each grid interval is split evenly.
    pub max_step: f64,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions {
            max_step: DEFAULT_DENSITY_STEP,
        }
    }
}

struct Generator {
    n: usize,
    /// CSR neighbour structure of `R` (all hopping entries are 1).
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    dephasing: f64,
}

impl Generator {
    fn new(hopping: &HoppingMatrix, gamma: f64) -> Self {
        let lists = hopping.neighbors();
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for l in &lists {
            neighbors.extend_from_slice(l);
            offsets.push(neighbors.len());
        }
        Generator {
            n: hopping.n(),
            offsets,
            neighbors,
            dephasing: 2.0 * gamma,
        }
    }

    fn nb(&self, j: usize) -> &[usize] {
        &self.neighbors[self.offsets[j]..self.offsets[j + 1]]
    }

    /// `out = L(rho)` on column-major storage.
    fn apply(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        out.par_chunks_mut(n)
            .with_min_len(16)
            .enumerate()
            .for_each(|(l, dst)| {
                let col = &rho[l * n..(l + 1) * n];
                for (j, d) in dst.iter_mut().enumerate() {
                    let mut comm = ZERO;
                    for &a in self.nb(j) {
                        comm += col[a];
                    }
                    for &b in self.nb(l) {
                        comm -= rho[b * n + j];
                    }
                    // −i·comm
                    let mut v = Complex64::new(comm.im, -comm.re);
                    if j != l {
                        v -= col[j] * self.dephasing;
                    }
                    *d = v;
                }
            });
    }
}

struct Rk4 {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4 {
    fn new(len: usize) -> Self {
        let z = || vec![ZERO; len];
        Rk4 {
            k1: z(),
            k2: z(),
            k3: z(),
            k4: z(),
            tmp: z(),
        }
    }

    fn step(&mut self, g: &Generator, y: &mut [Complex64], h: f64) {
        g.apply(y, &mut self.k1);
        axpy(&mut self.tmp, y, &self.k1, 0.5 * h);
        g.apply(&self.tmp, &mut self.k2);
        axpy(&mut self.tmp, y, &self.k2, 0.5 * h);
        g.apply(&self.tmp, &mut self.k3);
        axpy(&mut self.tmp, y, &self.k3, h);
        g.apply(&self.tmp, &mut self.k4);
        let w = h / 6.0;
        for i in 0..y.len() {
            y[i] += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * w;
        }
    }
}

fn axpy(out: &mut [Complex64], y: &[Complex64], k: &[Complex64], a: f64) {
    for ((o, y), k) in out.iter_mut().zip(y).zip(k) {
        *o = y + k * a;
    }
}

/// Integrates the dephasing master equation on the chain's hopping matrix.
pub fn evolve_dephasing_density(
    chain: &ChainSpec,
    rho0: &SingleParticleDensity,
    t_grid: &[f64],
) -> Result<Vec<SingleParticleDensity>> {
    let hopping = HoppingMatrix::build(chain)?;
    evolve_dephasing_density_with(
        &hopping,
        chain.effective_gamma(),
        rho0,
        t_grid,
        DensityOptions::default(),
    )
}

/// Same as [`evolve_dephasing_density`] with an explicit hopping matrix and step bound.
pub fn evolve_dephasing_density_with(
    hopping: &HoppingMatrix,
    gamma: f64,
    rho0: &SingleParticleDensity,
    t_grid: &[f64],
    options: DensityOptions,
) -> Result<Vec<SingleParticleDensity>> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::arg(
            "gamma",
            format!("must be finite and >= 0, got {gamma}"),
        ));
    }
    if !(options.max_step.is_finite() && options.max_step > 0.0) {
        return Err(Error::arg("max_step", "must be positive"));
    }
    if rho0.n() != hopping.n() {
        return Err(Error::Dimension(format!(
            "density is {}x{} but the chain has {} sites",
            rho0.n(),
            rho0.n(),
            hopping.n()
        )));
    }
    rho0.validate()?;
    for (i, w) in t_grid.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(Error::TimeGrid(format!(
                "grid not strictly increasing at index {}",
                i + 1
            )));
        }
    }
    if let Some(&t) = t_grid.first() {
        if !(t.is_finite() && t >= rho0.t) {
            return Err(Error::TimeGrid(format!(
                "first time {t} precedes the initial state"
            )));
        }
    }

    let g = Generator::new(hopping, gamma);
    let n = hopping.n();
    let mut y: Vec<Complex64> = rho0.rho.as_slice().to_vec();
    let mut rk = Rk4::new(n * n);
    let mut now = rho0.t;
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let span = t - now;
        if span > 0.0 {
            let substeps = (span / options.max_step).ceil().max(1.0) as usize;
            let h = span / substeps as f64;
            for _ in 0..substeps {
                rk.step(&g, &mut y, h);
            }
        }
        now = t;
        out.push(SingleParticleDensity {
            t,
            rho: DMatrix::from_column_slice(n, n, &y),
        });
    }
    Ok(out)
}
