//! Electric/magnetic energy experiments: series identities for the
//! quadratic electric operators and an energy table over diffusion times.

use std::collections::BTreeMap;

use anyhow::Result;

use crate::config::ExperimentConfig;
use crate::record::{Check, Table};
use gaugelab::expectation::ExMethod;
use gaugelab::gauge::{ConnectionSample, GroupTag};
use gaugelab::hilbert::FrameState;
use gaugelab::operators::{e_squared_g_expectation, e_squared_t_expectation, yang_mills_energy};

use super::{build_basis, Outcome};

pub fn run(config: &ExperimentConfig, _workers: usize) -> Result<Outcome> {
    let mut checks = Vec::new();
    let mut tables = BTreeMap::new();
    let phi = FrameState::ground();

    // (a) series identity across a (t, K) grid for the configured basis
    let k = config.k.unwrap_or(12);
    let basis = build_basis(config.d, config.group, config.p, k)?;
    let mut worst: f64 = 0.0;
    for &t in &[0.25, 1.0, 4.0] {
        for &kk in &[1usize, k / 2, k] {
            let v = e_squared_t_expectation(&basis, &phi, t, kk)?;
            let oracle: f64 = basis.modes()[..kk.min(basis.len())]
                .iter()
                .map(|m| {
                    0.5 * (1.0 + m.lambda.powf(basis.p)).powi(2) * (-2.0 * t * m.lambda).exp()
                })
                .sum();
            worst = worst.max((v - oracle).abs());
        }
    }
    checks.push(Check::le(
        "electric_series_identity",
        worst,
        1e-10,
        format!("worst |operator route − series| over the (t, K) grid = {worst:.3e}"),
    ));

    // (b) worked values on the d=1, p=1, K=3 basis
    let small = build_basis(1, GroupTag::U1, 1.0, 3)?;
    let vt = e_squared_t_expectation(&small, &phi, 1.0, 3)?;
    let vt_exact = 0.5 * (1.0 + 8.0 * (-2.0f64).exp());
    checks.push(Check::le(
        "electric_worked_value",
        (vt - vt_exact).abs(),
        1e-10,
        format!("heat-kernel value {vt:.6} vs ½(1 + 8e⁻²) = {vt_exact:.6} (≈ 1.04134)"),
    ));
    let vg = e_squared_g_expectation(&small, &phi, 3)?;
    checks.push(Check::le(
        "weighted_worked_value",
        (vg - 0.75).abs(),
        1e-12,
        format!("weighted value {vg} vs ¾"),
    ));

    // (c) energy reports over diffusion times (abelian closed plaquettes)
    if config.d >= 2 && config.group == GroupTag::U1 {
        let t_list = config.t_list.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
        let eps = config.epsilon.unwrap_or(0.25);
        let grid = config.plaquette_grid.unwrap_or(4);
        let mut table = Table::new(&[
            "t",
            "epsilon",
            "k",
            "electric",
            "magnetic",
            "total",
            "magnetic_err",
        ]);
        let mut prev_electric = f64::INFINITY;
        let mut monotone = true;
        let mut sorted_t = t_list.clone();
        sorted_t.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for &t in &sorted_t {
            let report = yang_mills_energy(
                &basis,
                &ConnectionSample::zero(),
                &phi,
                t,
                eps,
                k,
                grid,
                &ExMethod::ClosedU1,
            )?;
            monotone &= report.electric <= prev_electric + 1e-12;
            prev_electric = report.electric;
            table.push(vec![
                t,
                eps,
                k as f64,
                report.electric,
                report.magnetic,
                report.total,
                report.magnetic_err,
            ]);
        }
        tables.insert("energy".into(), table);
        checks.push(Check::new(
            "electric_monotone_in_t",
            monotone,
            if monotone { 0.0 } else { 1.0 },
            0.0,
            "electric part decreases as t grows".into(),
        ));
    }
    Ok(Outcome { checks, tables })
}
