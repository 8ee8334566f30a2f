//! Spectral counting and summability: eigenvalue-count ratios against the
//! d/2 power law, condition-tail Cauchy behavior, and the exponent criteria.

use std::collections::BTreeMap;

use anyhow::Result;

use crate::config::ExperimentConfig;
use crate::record::{Check, Table};
use gaugelab::spectrum::p_criterion;

use super::{build_basis, Outcome};

pub fn run(config: &ExperimentConfig, _workers: usize) -> Result<Outcome> {
    let mut checks = Vec::new();
    let mut tables = BTreeMap::new();
    let k = config.k.unwrap_or(match config.d {
        3 => 20_000,
        _ => 4_000,
    });
    let basis = build_basis(config.d, config.group, config.p, k)?;

    // (a) counting ratios flat over the top decade of λ
    let rows = basis.weyl_check()?;
    let mut table = Table::new(&["lambda", "count", "ratio"]);
    for r in &rows {
        table.push(vec![r.lambda, r.count as f64, r.ratio]);
    }
    tables.insert("weyl".into(), table);
    let lam_max = rows.last().map(|r| r.lambda).unwrap_or(0.0);
    let decade: Vec<f64> = rows
        .iter()
        .filter(|r| r.lambda >= lam_max / 10.0)
        .map(|r| r.ratio)
        .collect();
    let mean = decade.iter().sum::<f64>() / decade.len() as f64;
    let flatness = decade
        .iter()
        .map(|r| (r - mean).abs() / mean)
        .fold(0.0f64, f64::max);
    checks.push(Check::le(
        "weyl_flatness",
        flatness,
        0.15,
        format!(
            "max deviation from the decade-mean ratio {mean:.3} is {:.1}% over λ ∈ [{:.1}, {lam_max:.1}]",
            100.0 * flatness,
            lam_max / 10.0
        ),
    ));

    // (b) exponent criteria
    let crit = p_criterion(config.d, config.p);
    let mut crit_table = Table::new(&["generic", "torus"]);
    crit_table.push(vec![crit.generic as u8 as f64, crit.torus as u8 as f64]);
    tables.insert("criteria".into(), crit_table);

    // (c) condition-tail behavior matching the criteria
    let from = config.tail_from.unwrap_or(1 + 4 * k / 5);
    let bound = config.tail_bound.unwrap_or(1e-3);
    let tail = basis.condition_tail(from)?;
    let mut tail_table = Table::new(&["from_index", "built", "unbuilt_bound"]);
    tail_table.push(vec![from as f64, tail.built, tail.unbuilt_bound]);
    tables.insert("tail".into(), tail_table);
    if crit.torus {
        checks.push(Check::le(
            "condition_tail_cauchy",
            tail.built,
            bound,
            format!("Σ‖e‖²_∞ over built modes {from}..{k} = {:.3e}", tail.built),
        ));
        checks.push(Check::new(
            "unbuilt_tail_bound_finite",
            tail.unbuilt_bound.is_finite(),
            tail.unbuilt_bound,
            f64::MAX,
            format!("closed tail bound {:.3e}", tail.unbuilt_bound),
        ));
    } else {
        checks.push(Check::new(
            "unbuilt_tail_bound_diverges",
            tail.unbuilt_bound.is_infinite(),
            tail.unbuilt_bound,
            f64::INFINITY,
            "below the summability exponent the tail bound is infinite".into(),
        ));
    }
    Ok(Outcome { checks, tables })
}
