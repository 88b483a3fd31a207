// SPDX-License-Identifier: Apache-2.0

//! Experiment dispatch and the run record.

use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::config::{AnalysisSource, Experiment, RunConfig};
use super::output::{OutputRecord, OutputSet, Table};
use crate::analysis::{
    fit_exponent, front_radius_relative, msd_series_from_density, msd_series_from_ensemble,
    ExponentFit, ObservableSeries, STDERR_FLOOR,
};
use crate::bounds::{
    chebyshev_radius, lr_bound_log_profile, msd_f, regime_classify, variance_bound, RegimeReport,
};
use crate::error::{Error, Result};
use crate::linalg::{kron, trace_distance};
use crate::lindblad::{
    build_generator, build_structure_matrix, evolve_density, lr_log_commutator,
    rank_condition_report, relaxation_check, Pauli, PauliOperatorRep, RankReport, Superoperator,
};
use crate::model::{
    sample_noise_path, Boundary, ChainSpec, HoppingMatrix, NoiseMode, RngStreamSpec,
};
use crate::single_particle::{
    evolve_dephasing_density, exact_averaged_correlation, grid_steps, run_ensemble_with,
    site_states, EnsembleRequest, EnsembleStats, SingleParticleDensity, TrajectoryEvolver,
};

pub const RUN_RECORD_FILE: &str = "run.json";

/// Everything needed to repeat a run.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    pub experiment: Experiment,
    pub seed: u64,
    pub config: RunConfig,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputRecord>,
}

/// Runs `config` and writes its outputs and [`RUN_RECORD_FILE`] into `out_dir`.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunRecord> {
    config.validate()?;
    let started = Instant::now();
    let mut out = OutputSet::create(out_dir)?;
    let experiment = config.experiment;
    match experiment {
        Experiment::Ensemble => run_ensemble_experiment(config, &mut out),
        Experiment::Exact => run_exact(config, &mut out),
        Experiment::Lindblad => run_lindblad(config, &mut out),
        Experiment::Bounds => run_bounds(config, &mut out),
        Experiment::Analyze => run_analyze(config, &mut out),
        Experiment::Mixing => run_mixing(config, &mut out),
    }
    .map_err(|e| e.context(format!("{experiment} experiment")))?;
    let record = RunRecord {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        experiment,
        seed: config.seed,
        config: config.clone(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        outputs: out.records().to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&record)?;
    text.push('\n');
    let path = out.dir().join(RUN_RECORD_FILE);
    std::fs::write(&path, text)
        .map_err(|e| Error::from(e).context(format!("writing {}", path.display())))?;
    Ok(record)
}

fn column_abs(m: &DMatrix<Complex64>, col: usize) -> Vec<f64> {
    m.column(col).iter().map(|z| z.norm()).collect()
}

fn last_value(series: &ObservableSeries) -> f64 {
    series.samples.last().map_or(0.0, |s| s.value)
}

fn gamma_tag(g: f64) -> String {
    format!("gamma{g}")
}

#[derive(Serialize)]
struct ClosedFormCheck {
    /// `max |mean − exact| / max(stderr, STDERR_FLOOR)` over sites and times.
    max_ratio: f64,
    fraction_within_2se: f64,
    points: usize,
}

fn closed_form_check(
    spec: &ChainSpec,
    stats: &EnsembleStats,
    col: usize,
) -> Result<ClosedFormCheck> {
    let source = stats.origins[col];
    let (mut max_ratio, mut within, mut points) = (0.0f64, 0usize, 0usize);
    for (ti, &t) in stats.t_grid.iter().enumerate() {
        let exact = exact_averaged_correlation(spec, t)?;
        for j in 0..stats.n() {
            let err = stats.stderr_c[ti][(j, col)].max(STDERR_FLOOR);
            let diff = (stats.mean_c[ti][(j, col)] - exact[(j, source)]).norm();
            max_ratio = max_ratio.max(diff / err);
            points += 1;
            within += (diff <= 2.0 * err) as usize;
        }
    }
    Ok(ClosedFormCheck {
        max_ratio,
        fraction_within_2se: within as f64 / points as f64,
        points,
    })
}

#[derive(Serialize)]
struct EnsembleSummary {
    gamma: f64,
    trajectories: usize,
    source: usize,
    /// Front radius at the final time of one realisation and of the mean.
    single_front_final: f64,
    mean_front_final: f64,
    closed_form: Option<ClosedFormCheck>,
}

fn run_ensemble_experiment(cfg: &RunConfig, out: &mut OutputSet) -> Result<()> {
    let e = &cfg.ensemble;
    let gammas = if e.gammas.is_empty() {
        vec![cfg.chain.gamma]
    } else {
        e.gammas.clone()
    };
    let t_grid = cfg.time.grid();
    let dt = cfg.time.dt;
    let source = e.sources[0];
    let mut summaries = Vec::with_capacity(gammas.len());
    for &g in &gammas {
        let spec = cfg.chain.spec_with_gamma(g)?;
        let req = EnsembleRequest::new(e.trajectories, cfg.seed, t_grid.clone(), dt)
            .with_sources(e.sources.clone())
            .with_chunk(e.chunk);
        let stats =
            run_ensemble_with(&spec, &req).map_err(|err| err.context(format!("gamma = {g}")))?;

        // stream 0 is also the first trajectory of the ensemble
        let steps = (*grid_steps(&t_grid, dt)?.last().unwrap()).max(1);
        let noise = sample_noise_path(&spec, RngStreamSpec::new(cfg.seed, 0), dt, steps)?;
        let single = TrajectoryEvolver::for_chain(&spec, dt)?.evolve(
            &noise,
            &t_grid,
            &site_states(spec.n, &[source])?,
        )?;

        let tag = gamma_tag(g);
        let single_field: Vec<Vec<f64>> = single
            .iter()
            .map(|s| column_abs(&s.amplitudes, 0))
            .collect();
        let mean_field: Vec<Vec<f64>> = stats.mean_c.iter().map(|m| column_abs(m, 0)).collect();
        out.write_heatmap(&format!("single_{tag}"), &single_field, &t_grid)?;
        out.write_heatmap(&format!("mean_{tag}"), &mean_field, &t_grid)?;

        let eps = cfg.analysis.front_eps;
        let single_front = front_radius_relative(&single_field, &t_grid, source, eps)?;
        let mean_front = front_radius_relative(&mean_field, &t_grid, source, eps)?;
        let msd = msd_series_from_ensemble(&stats, 0)?;
        let dynamic = spec.noise_mode == NoiseMode::Dynamic;
        let mut table = Table::new(&[
            "msd",
            "msd_stderr",
            "msd_f",
            "momentum",
            "momentum_stderr",
            "front_single",
            "front_mean",
        ]);
        for (ti, &t) in t_grid.iter().enumerate() {
            let f = if dynamic { msd_f(g, t)? } else { f64::NAN };
            table.push(
                t,
                &[
                    msd.samples[ti].value,
                    msd.samples[ti].stderr,
                    f,
                    stats.momentum[ti][0],
                    stats.momentum_stderr[ti][0],
                    single_front.samples[ti].value,
                    mean_front.samples[ti].value,
                ],
            );
        }
        out.write_csv(&format!("ensemble_{tag}.csv"), &table)?;

        let closed_form = match spec.noise_mode {
            NoiseMode::Static => None,
            _ => Some(closed_form_check(&spec, &stats, 0)?),
        };
        summaries.push(EnsembleSummary {
            gamma: g,
            trajectories: stats.traj_count,
            source,
            single_front_final: last_value(&single_front),
            mean_front_final: last_value(&mean_front),
            closed_form,
        });
    }
    out.write_json("ensemble_summary.json", &summaries)
}

#[derive(Serialize)]
struct ExactSummary {
    gamma: f64,
    origin: usize,
    /// Largest `|⟨x²⟩ − f| / f` over `t > 0`.
    max_msd_rel_err: Option<f64>,
}

fn run_exact(cfg: &RunConfig, out: &mut OutputSet) -> Result<()> {
    let spec = cfg.chain.spec()?;
    let t_grid = cfg.time.grid();
    let source = cfg.ensemble.sources[0];
    let field = t_grid
        .iter()
        .map(|&t| Ok(column_abs(&exact_averaged_correlation(&spec, t)?, source)))
        .collect::<Result<Vec<_>>>()?;
    out.write_heatmap("exact_mean", &field, &t_grid)?;

    let origin = cfg.analysis.origin(spec.n);
    let mut max_rel = None;
    if spec.boundary != Boundary::InfiniteAnalytic {
        let rhos = evolve_dephasing_density(
            &spec,
            &SingleParticleDensity::site(spec.n, origin)?,
            &t_grid,
        )?;
        let hopping = HoppingMatrix::build(&spec)?;
        let mut table = Table::new(&["msd", "msd_f", "momentum"]);
        let mut worst = 0.0f64;
        for r in &rhos {
            let msd = r.second_moment(origin, hopping.boundary());
            let f = msd_f(spec.effective_gamma(), r.t)?;
            if f > 0.0 {
                worst = worst.max((msd - f).abs() / f);
            }
            table.push(r.t, &[msd, f, r.momentum(&hopping)]);
        }
        out.write_csv("exact_density.csv", &table)?;
        max_rel = Some(worst);
    }
    out.write_json(
        "exact_summary.json",
        &ExactSummary {
            gamma: spec.effective_gamma(),
            origin,
            max_msd_rel_err: max_rel,
        },
    )
}

/// `|b⟩⟨b|` for a computational basis state (`true` = spin down).
pub fn basis_density(bits: &[bool]) -> Result<PauliOperatorRep> {
    let one = Complex64::new(1.0, 0.0);
    let mut m = DMatrix::from_element(1, 1, one);
    for &down in bits {
        let mut site = DMatrix::from_element(2, 2, Complex64::new(0.0, 0.0));
        site[(down as usize, down as usize)] = one;
        m = kron(&m, &site);
    }
    PauliOperatorRep::from_dense(bits.len(), &m)
}

fn maximally_mixed(n: usize) -> DMatrix<Complex64> {
    let d = 1usize << n;
    DMatrix::from_diagonal_element(d, d, Complex64::new(1.0 / d as f64, 0.0))
}

fn lindblad_generator(cfg: &RunConfig) -> Result<(Superoperator, f64)> {
    let n = cfg.chain.n;
    let h0 = cfg.lindblad.h0(n)?;
    let gen = build_generator(&h0, cfg.lindblad.noise.kind(), cfg.chain.gamma, n)?;
    let norm = gen.h0_norm();
    Ok((gen, norm))
}

/// Writes `name`: trace distance to `I/2ⁿ`, purity and `⟨σ^z_j⟩`. Returns the
/// final trace distance.
fn density_table(
    gen: &Superoperator,
    rho0: &PauliOperatorRep,
    t_grid: &[f64],
    out: &mut OutputSet,
    name: &str,
) -> Result<f64> {
    let n = gen.n();
    let mixed = maximally_mixed(n);
    let mut columns = vec!["trace_distance_mixed".to_string(), "purity".to_string()];
    columns.extend((0..n).map(|j| format!("z{j}")));
    let mut header = vec!["t".to_string()];
    header.extend(columns);
    let mut table = Table::with_header(header);
    let scale = (1u64 << n) as f64;
    let mut last = f64::NAN;
    for (rho, &t) in evolve_density(gen, rho0, t_grid)?.iter().zip(t_grid) {
        let dist = trace_distance(&rho.densify(), &mixed);
        let purity = scale * rho.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>();
        let mut row = vec![dist, purity];
        for j in 0..n {
            let mut paulis = vec![Pauli::I; n];
            paulis[j] = Pauli::Z;
            row.push(scale * rho.coeff(&paulis).re);
        }
        table.push(t, &row);
        last = dist;
    }
    out.write_csv(name, &table)?;
    Ok(last)
}

#[derive(Serialize)]
struct CommutatorSummary {
    probe_site: usize,
    /// Grid points where `ln C_B(x,t)` exceeds the log envelope by more than 1e-12.
    bound_violations: usize,
}

#[derive(Serialize)]
struct LindbladSummary {
    n: usize,
    h0: String,
    h0_norm: f64,
    noise: String,
    gamma: f64,
    final_trace_distance_mixed: f64,
    commutators: Option<CommutatorSummary>,
}

fn probe_z(n: usize, site: usize) -> Result<PauliOperatorRep> {
    PauliOperatorRep::single_site(n, site, Pauli::Z, Complex64::new(1.0, 0.0))
}

fn lr_chain(n: usize, boundary: Boundary) -> Result<HoppingMatrix> {
    HoppingMatrix::build(&ChainSpec::new(n, boundary, 0.0, NoiseMode::None)?)
}

fn run_lindblad(cfg: &RunConfig, out: &mut OutputSet) -> Result<()> {
    let n = cfg.chain.n;
    let t_grid = cfg.time.grid();
    let (gen, h0_norm) = lindblad_generator(cfg)?;
    let rho0 = basis_density(&cfg.lindblad.initial_bits(n))?;
    let final_dist = density_table(&gen, &rho0, &t_grid, out, "lindblad_density.csv")?;

    let commutators = if cfg.lindblad.commutators && n >= 2 {
        let probe = cfg.lindblad.probe(n);
        let b0 = probe_z(n, probe)?;
        let logs = (0..n)
            .map(|x| lr_log_commutator(&gen, &b0, x, &t_grid))
            .collect::<Result<Vec<_>>>()?;
        let c0: Vec<f64> = logs.iter().map(|l| l[0].exp()).collect();
        let r = lr_chain(n, cfg.chain.boundary)?;
        let mut header = vec!["t".to_string()];
        header.extend((0..n).map(|x| format!("log_c{x}")));
        header.extend((0..n).map(|x| format!("log_bound{x}")));
        let mut table = Table::with_header(header);
        let mut violations = 0;
        for (ti, &t) in t_grid.iter().enumerate() {
            let bound = lr_bound_log_profile(t, gen.gamma(), h0_norm, &c0, &r)?;
            let measured: Vec<f64> = logs.iter().map(|l| l[ti]).collect();
            violations += measured
                .iter()
                .zip(&bound)
                .filter(|(m, b)| **m > **b + 1e-12)
                .count();
            let mut row = measured.clone();
            row.extend(&bound);
            table.push(t, &row);
        }
        out.write_csv("lindblad_commutators.csv", &table)?;
        Some(CommutatorSummary {
            probe_site: probe,
            bound_violations: violations,
        })
    } else {
        None
    };
    out.write_json(
        "lindblad_summary.json",
        &LindbladSummary {
            n,
            h0: gen.h0_label().to_string(),
            h0_norm,
            noise: gen.kind().to_string(),
            gamma: gen.gamma(),
            final_trace_distance_mixed: final_dist,
            commutators,
        },
    )
}

#[derive(Serialize)]
struct BoundsSummary {
    gamma: f64,
    delta: f64,
    separations: Vec<u64>,
    regime: Option<RegimeReport>,
}

fn run_bounds(cfg: &RunConfig, out: &mut OutputSet) -> Result<()> {
    let t_grid = cfg.time.grid();
    let gamma = cfg.chain.gamma;
    let b = &cfg.bounds;
    let mut header = vec![
        "t".to_string(),
        "msd_f".to_string(),
        "chebyshev_radius".to_string(),
    ];
    header.extend(
        b.separations
            .iter()
            .map(|s| format!("variance_bound_sep{s}")),
    );
    let mut table = Table::with_header(header);
    for &t in &t_grid {
        let mut row = vec![msd_f(gamma, t)?, chebyshev_radius(gamma, t, b.delta)?];
        for &s in &b.separations {
            row.push(variance_bound(s as i64, gamma, t)?);
        }
        table.push(t, &row);
    }
    out.write_csv("bounds.csv", &table)?;

    let n = cfg.chain.n;
    let mut regime = None;
    if n <= crate::lindblad::MAX_LR_QUBITS && gamma > 0.0 {
        let (gen, h0_norm) = lindblad_generator(cfg)?;
        let b0 = probe_z(n, cfg.lindblad.probe(n))?;
        let c0: Vec<f64> = (0..n)
            .map(|x| Ok(lr_log_commutator(&gen, &b0, x, &[0.0])?[0].exp()))
            .collect::<Result<_>>()?;
        let r = lr_chain(n, cfg.chain.boundary)?;
        let mut header = vec!["t".to_string()];
        header.extend((0..n).map(|x| format!("log_envelope{x}")));
        let mut lr = Table::with_header(header);
        for &t in &t_grid {
            lr.push(t, &lr_bound_log_profile(t, gamma, h0_norm, &c0, &r)?);
        }
        out.write_csv("lr_envelope.csv", &lr)?;
        regime = Some(regime_classify(gamma, h0_norm, c0.iter().sum(), b.eps)?);
    }
    out.write_json(
        "bounds_summary.json",
        &BoundsSummary {
            gamma,
            delta: b.delta,
            separations: b.separations.clone(),
            regime,
        },
    )
}

#[derive(Serialize)]
struct FitOutcome {
    fit: Option<ExponentFit>,
    localised_at: Option<f64>,
    error: Option<String>,
}

fn fit_outcome(series: &ObservableSeries, window: (f64, f64)) -> FitOutcome {
    match fit_exponent(series, window) {
        Ok(fit) => FitOutcome {
            fit: Some(fit),
            localised_at: None,
            error: None,
        },
        Err(Error::Localised { t }) => FitOutcome {
            fit: None,
            localised_at: Some(t),
            error: None,
        },
        Err(e) => FitOutcome {
            fit: None,
            localised_at: None,
            error: Some(e.to_string()),
        },
    }
}

#[derive(Serialize)]
struct AnalysisSummary {
    source: AnalysisSource,
    origin: usize,
    window: (f64, f64),
    msd: FitOutcome,
    rms_radius: FitOutcome,
    front_radius: FitOutcome,
}

fn run_analyze(cfg: &RunConfig, out: &mut OutputSet) -> Result<()> {
    let spec = cfg.chain.spec()?;
    let t_grid = cfg.time.grid();
    let origin = cfg.analysis.origin(spec.n);
    let (msd, field) = match cfg.analysis.source {
        AnalysisSource::Density => {
            let rhos = evolve_dephasing_density(
                &spec,
                &SingleParticleDensity::site(spec.n, origin)?,
                &t_grid,
            )?;
            let boundary = HoppingMatrix::build(&spec)?.boundary();
            let field: Vec<Vec<f64>> = rhos.iter().map(|r| r.diagonal()).collect();
            (msd_series_from_density(&rhos, origin, boundary)?, field)
        }
        AnalysisSource::Ensemble => {
            let req = EnsembleRequest::new(
                cfg.ensemble.trajectories,
                cfg.seed,
                t_grid.clone(),
                cfg.time.dt,
            )
            .with_sources(vec![origin])
            .with_chunk(cfg.ensemble.chunk);
            let stats = run_ensemble_with(&spec, &req)?;
            let field = stats
                .mean_abs2
                .iter()
                .map(|m| m.column(0).iter().copied().collect())
                .collect();
            (msd_series_from_ensemble(&stats, 0)?, field)
        }
    };
    let rms = msd.rms()?;
    let front = front_radius_relative(&field, &t_grid, origin, cfg.analysis.front_eps)?;
    let mut table = Table::new(&["msd", "msd_stderr", "rms_radius", "front_radius"]);
    for (ti, &t) in t_grid.iter().enumerate() {
        table.push(
            t,
            &[
                msd.samples[ti].value,
                msd.samples[ti].stderr,
                rms.samples[ti].value,
                front.samples[ti].value,
            ],
        );
    }
    out.write_csv("analysis.csv", &table)?;
    let window = cfg.analysis.window(cfg.time.t_max);
    out.write_json(
        "analysis_summary.json",
        &AnalysisSummary {
            source: cfg.analysis.source,
            origin,
            window,
            msd: fit_outcome(&msd, window),
            rms_radius: fit_outcome(&rms, window),
            front_radius: fit_outcome(&front, window),
        },
    )
}

#[derive(Serialize)]
struct MixingSummary {
    n: usize,
    h0: String,
    noise: String,
    gamma: f64,
    rank: RankReport,
    gap: f64,
    kernel_dim: usize,
    maximally_mixing: bool,
    verdict: &'static str,
    final_trace_distance_mixed: f64,
    eigenvalues: Vec<[f64; 2]>,
}

fn run_mixing(cfg: &RunConfig, out: &mut OutputSet) -> Result<()> {
    let n = cfg.chain.n;
    let (gen, _) = lindblad_generator(cfg)?;
    let h0 = cfg.lindblad.h0(n)?;
    let f = build_structure_matrix(&h0, n)?;
    let mut text = format!(
        "# F[alpha, beta], {0} x {0}, Pauli strings in base-4 order\n",
        f.f.nrows()
    );
    for row in f.f.row_iter() {
        let cells: Vec<String> = row
            .iter()
            .map(|v| super::output::format_number(*v))
            .collect();
        text.push_str(&cells.join(" "));
        text.push('\n');
    }
    out.write_bytes("structure_matrix.txt", text.as_bytes())?;

    let rank = rank_condition_report(&f);
    let report = relaxation_check(&gen)?;
    let rho0 = basis_density(&cfg.lindblad.initial_bits(n))?;
    let final_dist = density_table(&gen, &rho0, &cfg.time.grid(), out, "mixing_density.csv")?;
    let mut eigenvalues: Vec<[f64; 2]> = report.eigenvalues.iter().map(|z| [z.re, z.im]).collect();
    eigenvalues.sort_by(|a, b| b[0].total_cmp(&a[0]).then(a[1].total_cmp(&b[1])));
    out.write_json(
        "mixing_summary.json",
        &MixingSummary {
            n,
            h0: gen.h0_label().to_string(),
            noise: gen.kind().to_string(),
            gamma: gen.gamma(),
            rank,
            gap: report.gap,
            kernel_dim: report.kernel_dim,
            maximally_mixing: report.maximally_mixing,
            verdict: if report.maximally_mixing {
                "mixing"
            } else {
                "not mixing"
            },
            final_trace_distance_mixed: final_dist,
            eigenvalues,
        },
    )
}
