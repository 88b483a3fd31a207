// SPDX-License-Identifier: Apache-2.0

//! Configuration-driven experiment runner and its output files.
//!
//! A run reads a TOML [`RunConfig`], dispatches to one experiment, writes CSV
//! tables (first column `t`), heatmaps (plain text plus binary PGM) and JSON
//! summaries, and finishes with a [`RunRecord`] listing SHA-256 checksums of
//! every output.

mod config;
mod output;
mod run;

pub use config::{
    parse_config, parse_with_overrides, resolve_config, AnalysisConfig, AnalysisSource,
    BoundsConfig, ChainConfig, EnsembleConfig, Experiment, H0Preset, LindbladConfig, LindbladNoise,
    RunConfig, TimeConfig,
};
pub use output::{
    format_number, heatmap_pgm, heatmap_text, sha256_hex, OutputRecord, OutputSet, Table,
};
pub use run::{basis_density, run, RunRecord, RUN_RECORD_FILE};
