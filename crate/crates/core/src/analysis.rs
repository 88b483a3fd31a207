// SPDX-License-Identifier: Apache-2.0

//! Observables extracted from simulation output: mean squared displacement,
//! momentum, light-cone fronts, and power-law or exponential fits over them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Boundary, HoppingMatrix};
use crate::single_particle::{EnsembleStats, SingleParticleDensity};

/// Front threshold relative to the initial peak.
pub const DEFAULT_FRONT_EPS: f64 = 1e-3;
/// Samples earlier than this are excluded from exponent fits.
pub const MIN_FIT_TIME: f64 = 3.0;
/// Fewest samples a fit accepts.
pub const MIN_FIT_SAMPLES: usize = 8;
/// Absolute floor on standard errors when a mean is compared with an exact
/// value; propagator roundoff sits at this level.
pub const STDERR_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesName {
    Msd,
    Momentum,
    FrontRadius,
    /// `√⟨x²⟩`, the Chebyshev radius at `δ = 1`.
    RmsRadius,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableSeries {
    pub name: SeriesName,
    pub source: String,
    pub samples: Vec<Sample>,
}

impl ObservableSeries {
    pub fn new(name: SeriesName, source: impl Into<String>, samples: Vec<Sample>) -> Result<Self> {
        for w in samples.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(Error::TimeGrid(format!(
                    "series times must increase strictly ({} then {})",
                    w[0].t, w[1].t
                )));
            }
        }
        if let Some(s) = samples.iter().find(|s| !(s.stderr >= 0.0)) {
            return Err(Error::arg(
                "stderr",
                format!("negative or NaN at t = {}", s.t),
            ));
        }
        Ok(ObservableSeries {
            name,
            source: source.into(),
            samples,
        })
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.value).collect()
    }

    /// `√value` with first-order error propagation.
    pub fn rms(&self) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .map(|s| {
                let r = s.value.max(0.0).sqrt();
                let err = if r > 0.0 { s.stderr / (2.0 * r) } else { 0.0 };
                Sample {
                    t: s.t,
                    value: r,
                    stderr: err,
                }
            })
            .collect();
        Self::new(SeriesName::RmsRadius, self.source.clone(), samples)
    }
}

fn check_origin(origin: usize, n: usize) -> Result<()> {
    if origin >= n {
        return Err(Error::arg(
            "origin",
            format!("site {origin} outside {n} sites"),
        ));
    }
    Ok(())
}

/// `Σ_j (j − origin)² ρ_jj(t)` from an exact density sequence.
pub fn msd_series_from_density(
    rhos: &[SingleParticleDensity],
    origin: usize,
    boundary: Option<Boundary>,
) -> Result<ObservableSeries> {
    let n = rhos.first().map_or(0, |r| r.n());
    check_origin(origin, n)?;
    let samples = rhos
        .iter()
        .map(|r| Sample {
            t: r.t,
            value: r.second_moment(origin, boundary),
            stderr: 0.0,
        })
        .collect();
    ObservableSeries::new(SeriesName::Msd, "density", samples)
}

fn ensemble_column(stats: &EnsembleStats, column: usize) -> Result<()> {
    if column >= stats.columns() {
        return Err(Error::arg(
            "column",
            format!(
                "column {column} outside {} ensemble sources",
                stats.columns()
            ),
        ));
    }
    Ok(())
}

/// Ensemble mean squared displacement of source `column` with its standard error.
pub fn msd_series_from_ensemble(stats: &EnsembleStats, column: usize) -> Result<ObservableSeries> {
    ensemble_column(stats, column)?;
    let samples = stats
        .t_grid
        .iter()
        .enumerate()
        .map(|(i, &t)| Sample {
            t,
            value: stats.msd[i][column],
            stderr: stats.msd_stderr[i][column],
        })
        .collect();
    ObservableSeries::new(
        SeriesName::Msd,
        format!("ensemble[{}]", stats.traj_count),
        samples,
    )
}

/// `tr(p ρ(t))` from an exact density sequence.
pub fn momentum_series_from_density(
    rhos: &[SingleParticleDensity],
    hopping: &HoppingMatrix,
) -> Result<ObservableSeries> {
    let samples = rhos
        .iter()
        .map(|r| Sample {
            t: r.t,
            value: r.momentum(hopping),
            stderr: 0.0,
        })
        .collect();
    ObservableSeries::new(SeriesName::Momentum, "density", samples)
}

/// Ensemble momentum of source `column` with its standard error.
pub fn momentum_series_from_ensemble(
    stats: &EnsembleStats,
    column: usize,
) -> Result<ObservableSeries> {
    ensemble_column(stats, column)?;
    let samples = stats
        .t_grid
        .iter()
        .enumerate()
        .map(|(i, &t)| Sample {
            t,
            value: stats.momentum[i][column],
            stderr: stats.momentum_stderr[i][column],
        })
        .collect();
    ObservableSeries::new(
        SeriesName::Momentum,
        format!("ensemble[{}]", stats.traj_count),
        samples,
    )
}

/// Largest `|j − origin|` with `field[t][j] ≥ eps`, per time; 0 when no site
/// reaches `eps`.
pub fn front_radius(
    field: &[Vec<f64>],
    t_grid: &[f64],
    origin: usize,
    eps: f64,
) -> Result<ObservableSeries> {
    if field.len() != t_grid.len() {
        return Err(Error::Dimension(format!(
            "{} field rows for {} times",
            field.len(),
            t_grid.len()
        )));
    }
    let n = field.first().map_or(0, |row| row.len());
    if field.iter().any(|row| row.len() != n) {
        return Err(Error::Dimension("field rows differ in length".into()));
    }
    check_origin(origin, n)?;
    if !(eps > 0.0) {
        return Err(Error::arg("eps", format!("must be positive, got {eps}")));
    }
    if let Some(bad) = field.iter().flatten().find(|v| !(**v >= 0.0)) {
        return Err(Error::arg(
            "field",
            format!("values must be non-negative, got {bad}"),
        ));
    }
    let samples = field
        .iter()
        .zip(t_grid)
        .map(|(row, &t)| {
            let radius = row
                .iter()
                .enumerate()
                .filter(|(_, v)| **v >= eps)
                .map(|(j, _)| j.abs_diff(origin))
                .max()
                .unwrap_or(0);
            Sample {
                t,
                value: radius as f64,
                stderr: 0.0,
            }
        })
        .collect();
    ObservableSeries::new(SeriesName::FrontRadius, "field", samples)
}

/// [`front_radius`] with the threshold set to `rel` times the initial peak.
pub fn front_radius_relative(
    field: &[Vec<f64>],
    t_grid: &[f64],
    origin: usize,
    rel: f64,
) -> Result<ObservableSeries> {
    let peak = field
        .first()
        .map_or(0.0, |row| row.iter().copied().fold(0.0, f64::max));
    if !(peak > 0.0) {
        return Err(Error::arg("field", "initial field has no positive entry"));
    }
    front_radius(field, t_grid, origin, rel * peak)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub alpha: f64,
    pub alpha_err: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub rate_err: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub samples: usize,
}

struct LineFit {
    slope: f64,
    slope_err: f64,
    r_squared: f64,
}

fn least_squares(x: &[f64], y: &[f64]) -> LineFit {
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ssr / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    LineFit {
        slope,
        slope_err: (ssr / (m - 2.0) / sxx).sqrt(),
        r_squared,
    }
}

fn window_samples(
    series: &ObservableSeries,
    window: (f64, f64),
    t_floor: f64,
) -> Result<Vec<Sample>> {
    let (lo, hi) = window;
    if !(lo <= hi) {
        return Err(Error::arg("window", format!("empty window ({lo}, {hi})")));
    }
    let picked: Vec<Sample> = series
        .samples
        .iter()
        .filter(|s| s.t >= lo.max(t_floor) && s.t <= hi)
        .copied()
        .collect();
    if picked.len() < MIN_FIT_SAMPLES {
        return Err(Error::arg(
            "window",
            format!(
                "{} samples in ({lo}, {hi}); a fit needs at least {MIN_FIT_SAMPLES}",
                picked.len()
            ),
        ));
    }
    Ok(picked)
}

/// Least-squares `alpha` of `value ~ t^alpha` over `window`, ignoring
/// `t < MIN_FIT_TIME`. A zero value inside the window is reported as
/// [`Error::Localised`].
pub fn fit_exponent(series: &ObservableSeries, window: (f64, f64)) -> Result<ExponentFit> {
    let picked = window_samples(series, window, MIN_FIT_TIME)?;
    if let Some(s) = picked.iter().find(|s| !(s.value > 0.0)) {
        return Err(Error::Localised { t: s.t });
    }
    let x: Vec<f64> = picked.iter().map(|s| s.t.ln()).collect();
    let y: Vec<f64> = picked.iter().map(|s| s.value.ln()).collect();
    let fit = least_squares(&x, &y);
    Ok(ExponentFit {
        alpha: fit.slope,
        alpha_err: fit.slope_err,
        window: (picked[0].t, picked[picked.len() - 1].t),
        r_squared: fit.r_squared,
        samples: picked.len(),
    })
}

/// Least-squares rate of `|value| ~ e^{−rate·t}` over `window`.
pub fn fit_decay_rate(series: &ObservableSeries, window: (f64, f64)) -> Result<DecayFit> {
    let picked = window_samples(series, window, f64::NEG_INFINITY)?;
    if let Some(s) = picked
        .iter()
        .find(|s| s.value == 0.0 || !s.value.is_finite())
    {
        return Err(Error::arg(
            "series",
            format!("value {} at t = {} has no logarithm", s.value, s.t),
        ));
    }
    let x: Vec<f64> = picked.iter().map(|s| s.t).collect();
    let y: Vec<f64> = picked.iter().map(|s| s.value.abs().ln()).collect();
    let fit = least_squares(&x, &y);
    Ok(DecayFit {
        rate: -fit.slope,
        rate_err: fit.slope_err,
        window: (picked[0].t, picked[picked.len() - 1].t),
        r_squared: fit.r_squared,
        samples: picked.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::msd_f;
    use crate::model::ChainSpec;
    use crate::single_particle::{evolve_dephasing_density, exact_averaged_correlation};
    use approx::assert_relative_eq;
    use nalgebra::DVector;
    use num_complex::Complex64;

    fn series(name: SeriesName, pts: &[(f64, f64)]) -> ObservableSeries {
        let samples = pts
            .iter()
            .map(|&(t, v)| Sample {
                t,
                value: v,
                stderr: 0.0,
            })
            .collect();
        ObservableSeries::new(name, "test", samples).unwrap()
    }

    #[test]
    fn series_invariants_enforced() {
        let bad = vec![
            Sample {
                t: 1.0,
                value: 0.0,
                stderr: 0.0,
            },
            Sample {
                t: 1.0,
                value: 0.0,
                stderr: 0.0,
            },
        ];
        assert!(ObservableSeries::new(SeriesName::Msd, "x", bad).is_err());
        let neg = vec![Sample {
            t: 1.0,
            value: 0.0,
            stderr: -1.0,
        }];
        assert!(ObservableSeries::new(SeriesName::Msd, "x", neg).is_err());
    }

    #[test]
    fn noiseless_msd_is_ballistic() {
        let n = 81;
        let chain = ChainSpec::open(n, 0.0).unwrap();
        let rho0 = SingleParticleDensity::site(n, 40).unwrap();
        let ts: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let rhos = evolve_dephasing_density(&chain, &rho0, &ts).unwrap();
        let msd = msd_series_from_density(&rhos, 40, Some(Boundary::Open)).unwrap();
        assert_eq!(msd.samples[0].value, 0.0);
        for s in &msd.samples {
            assert!(
                (s.value - 2.0 * s.t * s.t).abs() < 1e-6 * (1.0 + s.value),
                "t={} {}",
                s.t,
                s.value
            );
        }
        assert!(msd_series_from_density(&rhos, 81, None).is_err());
    }

    #[test]
    fn dephased_msd_tracks_closed_form() {
        let n = 101;
        let gamma = 0.3;
        let chain = ChainSpec::open(n, gamma).unwrap();
        let rho0 = SingleParticleDensity::site(n, 50).unwrap();
        let ts: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let rhos = evolve_dephasing_density(&chain, &rho0, &ts).unwrap();
        let msd = msd_series_from_density(&rhos, 50, Some(Boundary::Open)).unwrap();
        for s in &msd.samples {
            assert_relative_eq!(s.value, msd_f(gamma, s.t).unwrap(), max_relative = 1e-6);
        }
    }

    #[test]
    fn momentum_series_behaviour() {
        let n = 61;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi = DVector::from_element(n, Complex64::new(0.0, 0.0));
        psi[30] = Complex64::new(s, 0.0);
        psi[31] = Complex64::new(0.0, s);
        let ts: Vec<f64> = (0..=8).map(|i| i as f64).collect();
        let free = ChainSpec::open(n, 0.0).unwrap();
        let hopping = HoppingMatrix::build(&free).unwrap();
        let rho0 = SingleParticleDensity::pure(&psi).unwrap();
        let rhos = evolve_dephasing_density(&free, &rho0, &ts).unwrap();
        let p = momentum_series_from_density(&rhos, &hopping).unwrap();
        assert!(p.samples.iter().all(|s| (s.value - 1.0).abs() < 1e-8));

        let gamma = 0.2;
        let noisy = ChainSpec::open(n, gamma).unwrap();
        let rhos = evolve_dephasing_density(&noisy, &rho0, &ts).unwrap();
        let p = momentum_series_from_density(&rhos, &hopping).unwrap();
        let fit = fit_decay_rate(&p, (0.0, 8.0)).unwrap();
        assert_relative_eq!(fit.rate, 2.0 * gamma, max_relative = 1e-6);

        let site =
            evolve_dephasing_density(&noisy, &SingleParticleDensity::site(n, 30).unwrap(), &ts)
                .unwrap();
        let p0 = momentum_series_from_density(&site, &hopping).unwrap();
        assert!(p0.samples.iter().all(|s| s.value.abs() < 1e-12));
    }

    #[test]
    fn front_radius_basics() {
        let field = vec![
            vec![0.0, 0.0, 1.0, 0.0, 0.0],
            vec![0.2, 0.3, 0.4, 0.01, 0.0],
        ];
        let r = front_radius(&field, &[0.0, 1.0], 2, 0.5).unwrap();
        assert_eq!(r.values(), vec![0.0, 0.0]);
        let r = front_radius(&field, &[0.0, 1.0], 2, 0.1).unwrap();
        assert_eq!(r.values(), vec![0.0, 2.0]);
        let r = front_radius(&field, &[0.0, 1.0], 2, 2.0).unwrap();
        assert_eq!(r.values(), vec![0.0, 0.0]);
        assert!(front_radius(&field, &[0.0], 2, 0.1).is_err());
        assert!(front_radius(&[vec![-0.1]], &[0.0], 0, 0.1).is_err());
    }

    #[test]
    fn noiseless_front_moves_at_twice_the_hopping() {
        let n = 121;
        let chain = ChainSpec::open(n, 0.0).unwrap();
        let ts: Vec<f64> = (5..=20).map(|i| i as f64).collect();
        let field: Vec<Vec<f64>> = ts
            .iter()
            .map(|&t| {
                let c = exact_averaged_correlation(&chain, t).unwrap();
                (0..n).map(|j| c[(j, 60)].norm()).collect()
            })
            .collect();
        let r = front_radius(&field, &ts, 60, 1e-3).unwrap();
        let v = r.values();
        for s in &r.samples {
            assert!(s.value >= 2.0 * s.t - 1.0, "t={} r={}", s.t, s.value);
        }
        // the Bessel tail adds a sublinear excess over 2t
        let velocity = (v[15] - v[5]) / 10.0;
        assert!((2.0..=2.3).contains(&velocity), "velocity {velocity}");
        let fit = fit_exponent(&r, (5.0, 20.0)).unwrap();
        assert!(fit.alpha > 0.8 && fit.alpha < 1.0, "alpha {}", fit.alpha);
    }

    #[test]
    fn averaged_front_stays_bounded_under_strong_noise() {
        let n = 81;
        let chain = ChainSpec::open(n, 0.5).unwrap();
        let ts: Vec<f64> = (0..=40).map(|i| i as f64).collect();
        let field: Vec<Vec<f64>> = ts
            .iter()
            .map(|&t| {
                let c = exact_averaged_correlation(&chain, t).unwrap();
                (0..n).map(|j| c[(j, 40)].norm()).collect()
            })
            .collect();
        let r = front_radius(&field, &ts, 40, 1e-3).unwrap();
        // |E c_jk| ≤ e^{−γt}, so nothing reaches eps once e^{−γt} < eps
        let t_dead = (1e3f64).ln() / 0.5;
        assert!(r
            .samples
            .iter()
            .filter(|s| s.t > t_dead)
            .all(|s| s.value == 0.0));
        assert!(r.samples[10].value > 0.0);
    }

    #[test]
    fn exponent_fit_recovers_power_law() {
        let pts: Vec<(f64, f64)> = (1..=20)
            .map(|i| (i as f64, 3.0 * (i as f64).powf(0.5)))
            .collect();
        let fit = fit_exponent(&series(SeriesName::FrontRadius, &pts), (0.0, 100.0)).unwrap();
        assert_relative_eq!(fit.alpha, 0.5, max_relative = 1e-12);
        assert_eq!(fit.samples, 18);
        assert!(fit.r_squared > 0.999_999);
        assert_eq!(fit.window.0, 3.0);
    }

    #[test]
    fn exponent_fit_errors() {
        let few: Vec<(f64, f64)> = (3..8).map(|i| (i as f64, 1.0)).collect();
        assert!(fit_exponent(&series(SeriesName::FrontRadius, &few), (0.0, 100.0)).is_err());
        let zeros: Vec<(f64, f64)> = (3..20)
            .map(|i| (i as f64, if i > 10 { 0.0 } else { 1.0 }))
            .collect();
        match fit_exponent(&series(SeriesName::FrontRadius, &zeros), (0.0, 100.0)) {
            Err(Error::Localised { t }) => assert_eq!(t, 11.0),
            other => panic!("expected localised, got {other:?}"),
        }
    }

    #[test]
    fn rms_transform() {
        let s = ObservableSeries::new(
            SeriesName::Msd,
            "x",
            vec![Sample {
                t: 1.0,
                value: 4.0,
                stderr: 0.4,
            }],
        )
        .unwrap();
        let r = s.rms().unwrap();
        assert_eq!(r.samples[0].value, 2.0);
        assert_relative_eq!(r.samples[0].stderr, 0.1);
    }
}
