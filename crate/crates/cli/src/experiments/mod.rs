//! Experiment implementations, one per config kind.

mod continuity;
mod convergence;
mod energy;
mod oracle;
mod support;
mod weyl;

use std::collections::BTreeMap;

use anyhow::Result;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::record::{Check, Table};
use gaugelab::gauge::GroupTag;
use gaugelab::spectrum::ModeBasis;

pub use oracle::{gaussian_overlap_quadrature, random_frame_state};

pub struct Outcome {
    pub checks: Vec<Check>,
    pub tables: BTreeMap<String, Table>,
}

pub fn run(config: &ExperimentConfig, workers: usize) -> Result<Outcome> {
    match config.kind {
        ExperimentKind::OracleCheck => oracle::run(config, workers),
        ExperimentKind::Convergence => convergence::run(config, workers),
        ExperimentKind::Continuity => continuity::run(config, workers),
        ExperimentKind::Energy => energy::run(config, workers),
        ExperimentKind::Support => support::run(config, workers),
        ExperimentKind::Weyl => weyl::run(config, workers),
    }
}

pub(crate) fn build_basis(d: usize, group: GroupTag, p: f64, k: usize) -> Result<ModeBasis> {
    Ok(ModeBasis::build(d, group, p, k)?)
}
