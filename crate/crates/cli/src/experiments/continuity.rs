//! Strong-continuity experiments: the small-shift quadratic law for
//! translations, and holonomy matrix elements along a shrinking curve
//! perturbation family.

use std::collections::BTreeMap;

use anyhow::Result;

use crate::config::ExperimentConfig;
use crate::record::{Check, Table};
use gaugelab::expectation::{continuity_experiment, McParams};
use gaugelab::gauge::{ConnectionSample, GroupTag};
use gaugelab::geometry::{PathCurve, Segment, Trig1d, TAU};
use gaugelab::hilbert::{e_quadratic_form, u_matrix_element};
use gaugelab::rng;
use gaugelab::spectrum::sobolev_norm_sq;

use super::{build_basis, random_frame_state, Outcome};

const STREAM_CONT: u64 = 0x434F_4E54;

pub fn run(config: &ExperimentConfig, workers: usize) -> Result<Outcome> {
    let mut checks = Vec::new();
    let mut tables = BTreeMap::new();
    let seed = config.seed;

    // (a) translations: ‖(U_μ − 1)s‖² against the quadratic small-shift law
    let mut table_t = Table::new(&["scale", "defect", "predicted"]);
    let mut worst_rel: f64 = 0.0;
    for trial in 0..20u64 {
        let state = random_frame_state(seed, STREAM_CONT, trial, 2, 4)
            .normalized()
            .map_err(anyhow::Error::from)?;
        let raw: Vec<f64> = (0..4)
            .map(|i| 2.0 * rng::uniform(seed, STREAM_CONT ^ 1, trial, i) - 1.0)
            .collect();
        let norm = sobolev_norm_sq(&raw).sqrt();
        let unit: Vec<f64> = raw.iter().map(|x| x / norm).collect();
        let coeff = e_quadratic_form(&state, &unit).map_err(anyhow::Error::from)?;
        for &scale in &[0.1f64, 0.05, 0.025] {
            let mu: Vec<f64> = unit.iter().map(|x| x * scale).collect();
            let defect = 2.0 - 2.0 * u_matrix_element(&state, &mu, &state).re;
            let predicted = coeff * scale * scale;
            if predicted > 1e-14 {
                worst_rel = worst_rel.max((defect - predicted).abs() / predicted);
            }
            table_t.push(vec![scale, defect, predicted]);
        }
    }
    tables.insert("translation".into(), table_t);
    checks.push(Check::le(
        "translation_quadratic_law",
        worst_rel,
        0.05,
        format!("worst relative deviation from ‖μ‖² law = {worst_rel:.4}"),
    ));

    // (b) holonomy continuity along a shrinking perturbation family on T²
    let k = config.k.unwrap_or(10);
    let basis = build_basis(2, GroupTag::U1, config.p, k)?;
    let n = config.n_samples.unwrap_or(20_000);
    let y0 = 0.7;
    let curve = PathCurve::circle_loop(2, 0, &[0.0, y0])?;
    let eps_list = [0.3, 0.03, 0.003, 0.0003];
    let family: Vec<PathCurve> = eps_list
        .iter()
        .map(|&eps| {
            PathCurve::from_segments(vec![Segment::trig1(
                vec![
                    Trig1d {
                        c0: 0.0,
                        c1: 1.0,
                        harmonics: vec![],
                    },
                    Trig1d {
                        c0: y0,
                        c1: 0.0,
                        harmonics: vec![(1.0, 0.0, eps)],
                    },
                ],
                0.0,
                TAU,
            )])
        })
        .collect::<gaugelab::Result<_>>()?;
    let params = McParams::new(n, seed).with_workers(workers);
    let rows = continuity_experiment(
        &basis,
        &ConnectionSample::zero(),
        &gaugelab::hilbert::FrameState::ground(),
        &curve,
        &family,
        k,
        &params,
    )?;
    let mut table_h = Table::new(&["curve_distance", "measured", "stderr", "closed_form"]);
    for row in &rows {
        table_h.push(vec![
            row.curve_distance,
            row.measured,
            row.mc_stderr,
            row.closed_form.unwrap_or(f64::NAN),
        ]);
    }
    tables.insert("holonomy".into(), table_h);

    let mut monotone_ok = true;
    for w in rows.windows(2) {
        let noise = 3.0 * (w[0].mc_stderr + w[1].mc_stderr);
        monotone_ok &= w[1].measured <= w[0].measured + noise;
    }
    checks.push(Check::new(
        "holonomy_monotone_decrease",
        monotone_ok,
        if monotone_ok { 0.0 } else { 1.0 },
        0.0,
        "matrix-element differences decrease along the family (within 3σ)".into(),
    ));
    let mut worst_gap = f64::NEG_INFINITY;
    for row in &rows {
        let gap = (row.measured - row.closed_form.unwrap()).abs() - 3.0 * row.mc_stderr;
        worst_gap = worst_gap.max(gap);
    }
    checks.push(Check::le(
        "holonomy_closed_form_match",
        worst_gap,
        0.0,
        format!("worst |measured − closed| − 3σ = {worst_gap:.3e}"),
    ));
    Ok(Outcome { checks, tables })
}
