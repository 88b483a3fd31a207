// SPDX-License-Identifier: Apache-2.0

//! Chain geometry, noise model and reproducible random streams.
//!
//! The single-particle hopping matrix is `R_{j,k} = δ_{j,k+1} + δ_{j+1,k}`
//! with unit hopping amplitude. The on-site field enters only through the
//! per-step phase increments stored in a [`NoiseRealization`].

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hopping amplitude of the chain. Every energy and time is measured in these units.
pub const HOPPING: f64 = 1.0;

/// Default width of the static disorder distribution.
pub const DEFAULT_DISORDER_WIDTH: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Open,
    Ring,
    /// Infinite chain evaluated through closed forms only; no matrix is built.
    InfiniteAnalytic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// White-noise field, redrawn independently every timestep.
    Dynamic,
    /// Field drawn once per trajectory and held fixed (Anderson disorder).
    Static,
    None,
}

/// Chain length, boundary and noise parameters.
///
/// `gamma` is the decay rate of the averaged amplitude `E c_{j,k}(t)`; one
/// timestep of length `dt` accumulates a phase of variance `2 γ dt` per site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n: usize,
    pub boundary: Boundary,
    pub gamma: f64,
    pub noise_mode: NoiseMode,
    /// Standard deviation of the static field, used only in static mode.
    pub disorder_width: f64,
}

impl ChainSpec {
    pub fn new(n: usize, boundary: Boundary, gamma: f64, noise_mode: NoiseMode) -> Result<Self> {
        let spec = ChainSpec {
            n,
            boundary,
            gamma,
            noise_mode,
            disorder_width: DEFAULT_DISORDER_WIDTH,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn open(n: usize, gamma: f64) -> Result<Self> {
        Self::new(n, Boundary::Open, gamma, NoiseMode::Dynamic)
    }

    pub fn with_disorder_width(mut self, width: f64) -> Result<Self> {
        self.disorder_width = width;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidChain(format!(
                "n = {} but at least 2 sites are required",
                self.n
            )));
        }
        if self.boundary == Boundary::Ring && self.n < 3 {
            return Err(Error::InvalidChain("a ring needs at least 3 sites".into()));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidChain(format!(
                "gamma = {} must be finite and >= 0",
                self.gamma
            )));
        }
        if !(self.disorder_width.is_finite() && self.disorder_width >= 0.0) {
            return Err(Error::InvalidChain(format!(
                "disorder_width = {} must be finite and >= 0",
                self.disorder_width
            )));
        }
        Ok(())
    }

    /// Noise strength that actually drives the dynamics (zero when noise is off).
    pub fn effective_gamma(&self) -> f64 {
        match self.noise_mode {
            NoiseMode::None => 0.0,
            _ => self.gamma,
        }
    }
}

/// Orthonormal eigenbasis of a real symmetric matrix; column `q` of `vectors`
/// belongs to `values[q]`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    /// `V diag(f(λ)) Vᵀ` for a complex-valued spectral function.
    pub fn apply_complex(&self, f: impl Fn(f64) -> Complex64) -> DMatrix<Complex64> {
        let n = self.values.len();
        let weights: Vec<Complex64> = self.values.iter().map(|&l| f(l)).collect();
        DMatrix::from_fn(n, n, |j, k| {
            (0..n)
                .map(|q| weights[q] * (self.vectors[(j, q)] * self.vectors[(k, q)]))
                .sum()
        })
    }

    pub fn apply_real(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.values.len();
        let weights: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        DMatrix::from_fn(n, n, |j, k| {
            (0..n)
                .map(|q| weights[q] * self.vectors[(j, q)] * self.vectors[(k, q)])
                .sum()
        })
    }
}

/// Nearest-neighbour hopping matrix `R` of an open chain or a ring.
#[derive(Clone, Debug, PartialEq)]
pub struct HoppingMatrix {
    matrix: DMatrix<f64>,
    boundary: Option<Boundary>,
}

impl HoppingMatrix {
    pub fn build(spec: &ChainSpec) -> Result<Self> {
        build_hopping_matrix(spec)
    }

    /// All-zero hopping on `n` sites. Only meant for testing pure dephasing.
    pub fn suppressed(n: usize) -> Self {
        HoppingMatrix {
            matrix: DMatrix::zeros(n, n),
            boundary: None,
        }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn boundary(&self) -> Option<Boundary> {
        self.boundary
    }

    /// Neighbour list of every site (indices where `R_{j,k} != 0`).
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        (0..n)
            .map(|j| (0..n).filter(|&k| self.matrix[(j, k)] != 0.0).collect())
            .collect()
    }

    /// Eigen-decomposition of `R`, in closed form for open chains and rings.
    pub fn spectrum(&self) -> Spectrum {
        let n = self.n();
        match self.boundary {
            Some(Boundary::Open) => {
                let norm = (2.0 / (n as f64 + 1.0)).sqrt();
                let values = DVector::from_fn(n, |q, _| {
                    2.0 * HOPPING * ((q + 1) as f64 * PI / (n as f64 + 1.0)).cos()
                });
                let vectors = DMatrix::from_fn(n, n, |j, q| {
                    norm * ((j + 1) as f64 * (q + 1) as f64 * PI / (n as f64 + 1.0)).sin()
                });
                Spectrum { values, vectors }
            }
            Some(Boundary::Ring) => ring_spectrum(n),
            _ => {
                let eig = SymmetricEigen::new(self.matrix.clone());
                Spectrum {
                    values: eig.eigenvalues,
                    vectors: eig.eigenvectors,
                }
            }
        }
    }

    /// `e^{-iRt}` from the eigen-decomposition.
    pub fn propagator(&self, t: f64) -> DMatrix<Complex64> {
        self.spectrum()
            .apply_complex(|l| Complex64::from_polar(1.0, -l * t))
    }

    /// Largest singular value, from a dense eigensolve.
    pub fn spectral_norm(&self) -> f64 {
        SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .fold(0.0_f64, |m, l| m.max(l.abs()))
    }
}

/// Real Fourier basis of the ring: cos/sin pairs plus the q = 0 and q = n/2 modes.
fn ring_spectrum(n: usize) -> Spectrum {
    let mut values = Vec::with_capacity(n);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n);
    let nf = n as f64;
    values.push(2.0 * HOPPING);
    columns.push(vec![1.0 / nf.sqrt(); n]);
    let half = (n - 1) / 2;
    for q in 1..=half {
        let k = 2.0 * PI * q as f64 / nf;
        let lambda = 2.0 * HOPPING * k.cos();
        let norm = (2.0 / nf).sqrt();
        values.push(lambda);
        columns.push((0..n).map(|j| norm * (k * j as f64).cos()).collect());
        values.push(lambda);
        columns.push((0..n).map(|j| norm * (k * j as f64).sin()).collect());
    }
    if n % 2 == 0 {
        values.push(-2.0 * HOPPING);
        columns.push(
            (0..n)
                .map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } / nf.sqrt())
                .collect(),
        );
    }
    Spectrum {
        values: DVector::from_vec(values),
        vectors: DMatrix::from_fn(n, n, |j, q| columns[q][j]),
    }
}

/// Builds `R` for an open chain or a ring.
pub fn build_hopping_matrix(spec: &ChainSpec) -> Result<HoppingMatrix> {
    spec.validate()?;
    let n = spec.n;
    if spec.boundary == Boundary::InfiniteAnalytic {
        return Err(Error::Unsupported(
            "the infinite-analytic boundary has no hopping matrix".into(),
        ));
    }
    let mut matrix = DMatrix::zeros(n, n);
    for j in 0..n - 1 {
        matrix[(j, j + 1)] = HOPPING;
        matrix[(j + 1, j)] = HOPPING;
    }
    if spec.boundary == Boundary::Ring {
        matrix[(0, n - 1)] = HOPPING;
        matrix[(n - 1, 0)] = HOPPING;
    }
    Ok(HoppingMatrix {
        matrix,
        boundary: Some(spec.boundary),
    })
}

/// Identifies one independent random stream.
///
/// Streams with the same master seed and different indices never overlap:
/// the index selects the ChaCha stream, the seed selects the key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStreamSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStreamSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        RngStreamSpec {
            master_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

#[derive(Clone, Debug, PartialEq)]
enum PhaseField {
    /// Row-major `steps × n`.
    PerStep(Vec<f64>),
    /// One row reused for every step.
    Constant(Vec<f64>),
}

/// One sampled disorder path: phase increments `φ_j` for every site and step.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseRealization {
    pub stream: RngStreamSpec,
    pub dt: f64,
    pub steps: usize,
    pub n: usize,
    pub mode: NoiseMode,
    /// Static field `ξ_j` (zero except in static mode).
    pub static_field: Vec<f64>,
    phases: PhaseField,
}

impl NoiseRealization {
    /// Phase increments of step `step` (0-based), one per site.
    pub fn step_phases(&self, step: usize) -> &[f64] {
        assert!(
            step < self.steps,
            "step {step} beyond noise path of {} steps",
            self.steps
        );
        match &self.phases {
            PhaseField::PerStep(v) => &v[step * self.n..(step + 1) * self.n],
            PhaseField::Constant(v) => v,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.steps, self.n)
    }

    pub fn duration(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    /// Same phases, tagged with another mode (selects the evolution path).
    #[cfg(test)]
    pub(crate) fn with_mode(mut self, mode: NoiseMode) -> Self {
        self.mode = mode;
        self
    }
}

/// Draws one noise path of `steps` timesteps of length `dt`.
pub fn sample_noise_path(
    spec: &ChainSpec,
    stream: RngStreamSpec,
    dt: f64,
    steps: usize,
) -> Result<NoiseRealization> {
    spec.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::arg("dt", format!("must be positive, got {dt}")));
    }
    if steps == 0 {
        return Err(Error::arg("steps", "at least one step is required"));
    }
    let n = spec.n;
    let mut rng = stream.rng();
    let (phases, static_field) = match spec.noise_mode {
        NoiseMode::None => (PhaseField::Constant(vec![0.0; n]), vec![0.0; n]),
        NoiseMode::Dynamic if spec.gamma == 0.0 => {
            (PhaseField::Constant(vec![0.0; n]), vec![0.0; n])
        }
        NoiseMode::Dynamic => {
            let normal = Normal::new(0.0, (2.0 * spec.gamma * dt).sqrt())
                .map_err(|e| Error::arg("gamma", e.to_string()))?;
            let v = (0..steps * n).map(|_| normal.sample(&mut rng)).collect();
            (PhaseField::PerStep(v), vec![0.0; n])
        }
        NoiseMode::Static => {
            let normal = Normal::new(0.0, spec.disorder_width)
                .map_err(|e| Error::arg("disorder_width", e.to_string()))?;
            let field: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
            (
                PhaseField::Constant(field.iter().map(|xi| xi * dt).collect()),
                field,
            )
        }
    };
    Ok(NoiseRealization {
        stream,
        dt,
        steps,
        n,
        mode: spec.noise_mode,
        static_field,
        phases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn open_and_ring_matrices() {
        let open = build_hopping_matrix(&ChainSpec::open(3, 0.0).unwrap()).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[0., 1., 0., 1., 0., 1., 0., 1., 0.]);
        assert_eq!(open.matrix(), &expected);

        let ring_spec = ChainSpec::new(3, Boundary::Ring, 0.0, NoiseMode::None).unwrap();
        let ring = build_hopping_matrix(&ring_spec).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                assert_eq!(ring.matrix()[(j, k)], if j == k { 0.0 } else { 1.0 });
            }
        }
    }

    #[test]
    fn rejects_bad_chains() {
        assert!(ChainSpec::open(1, 0.1).is_err());
        assert!(ChainSpec::open(4, -0.1).is_err());
        let inf = ChainSpec::new(10, Boundary::InfiniteAnalytic, 0.1, NoiseMode::Dynamic).unwrap();
        assert!(matches!(
            build_hopping_matrix(&inf),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn largest_open_eigenvalue_n50() {
        let r = build_hopping_matrix(&ChainSpec::open(50, 0.0).unwrap()).unwrap();
        let closed = 2.0 * (PI / 51.0).cos();
        assert_abs_diff_eq!(closed, 1.996206, epsilon = 1e-5);
        let dense = SymmetricEigen::new(r.matrix().clone()).eigenvalues.max();
        assert_abs_diff_eq!(dense, closed, epsilon = 1e-12);
        assert_abs_diff_eq!(r.spectrum().values.max(), closed, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_spectrum_reconstructs_matrix() {
        for (n, boundary) in [
            (7, Boundary::Open),
            (7, Boundary::Ring),
            (8, Boundary::Ring),
        ] {
            let spec = ChainSpec::new(n, boundary, 0.0, NoiseMode::None).unwrap();
            let r = build_hopping_matrix(&spec).unwrap();
            let rebuilt = r.spectrum().apply_real(|l| l);
            assert!((rebuilt - r.matrix()).amax() < 1e-12, "{boundary:?} n={n}");
        }
    }

    #[test]
    fn zero_gamma_gives_zero_phases() {
        let spec = ChainSpec::open(5, 0.0).unwrap();
        let noise = sample_noise_path(&spec, RngStreamSpec::new(3, 0), 0.01, 100).unwrap();
        assert!((0..100).all(|s| noise.step_phases(s).iter().all(|&p| p == 0.0)));
    }

    #[test]
    fn dynamic_phase_variance() {
        let spec = ChainSpec::open(4, 0.5).unwrap();
        let steps = 25_000;
        let noise = sample_noise_path(&spec, RngStreamSpec::new(11, 2), 0.01, steps).unwrap();
        for site in 0..4 {
            let x: Vec<f64> = (0..steps).map(|s| noise.step_phases(s)[site]).collect();
            let mean = x.iter().sum::<f64>() / steps as f64;
            let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (steps as f64 - 1.0);
            // standard error of a normal sample variance: σ² √(2/(N-1))
            let se = 0.01 * (2.0 / (steps as f64 - 1.0)).sqrt();
            assert!((var - 0.01).abs() < 3.0 * se, "site {site}: var {var}");
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let spec = ChainSpec::open(6, 0.3).unwrap();
        let a = sample_noise_path(&spec, RngStreamSpec::new(42, 7), 0.01, 50).unwrap();
        let b = sample_noise_path(&spec, RngStreamSpec::new(42, 7), 0.01, 50).unwrap();
        let c = sample_noise_path(&spec, RngStreamSpec::new(42, 8), 0.01, 50).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.step_phases(0), c.step_phases(0));
    }

    #[test]
    fn static_path_is_constant() {
        let spec = ChainSpec::new(5, Boundary::Open, 0.0, NoiseMode::Static).unwrap();
        let noise = sample_noise_path(&spec, RngStreamSpec::new(1, 0), 0.02, 10).unwrap();
        let first = noise.step_phases(0).to_vec();
        assert_eq!(noise.shape(), (10, 5));
        for s in 1..10 {
            assert_eq!(noise.step_phases(s), first.as_slice());
        }
        for (p, xi) in first.iter().zip(&noise.static_field) {
            assert_abs_diff_eq!(*p, xi * 0.02, epsilon = 1e-15);
        }
    }
}
