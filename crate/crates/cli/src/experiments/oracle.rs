//! Oracle checks: abelian loop expectations against closed forms, overlap
//! formulas against direct Gaussian quadrature, infinitesimal elements
//! against finite differences, translation covariance of holonomy matrix
//! elements, and the second-order expansion bounds on random SU(2) data.

use std::collections::BTreeMap;

use anyhow::Result;
use num_complex::Complex64;

use crate::config::ExperimentConfig;
use crate::record::{Check, Table};
use gaugelab::expectation::{expect_holonomy, h_matrix_element, McParams};
use gaugelab::gauge::{
    dyson_remainder_bound, dyson_terms, holonomy, term_bounds, ConnectionSample, GroupTag,
};
use gaugelab::geometry::PathCurve;
use gaugelab::hilbert::{
    apply_translation, coherent_overlap, e_matrix_element, u_matrix_element, FrameState,
};
use gaugelab::quad;
use gaugelab::rng;
use gaugelab::spectrum::ModeBasis;

use super::{build_basis, Outcome};

const STREAM_ORACLE: u64 = 0x4F52_4143;

pub fn run(config: &ExperimentConfig, workers: usize) -> Result<Outcome> {
    let mut checks = Vec::new();
    let mut tables = BTreeMap::new();
    let seed = config.seed;
    let n = config.n_samples.unwrap_or(100_000);
    let k_list = config.k_list.clone().unwrap_or_else(|| vec![1, 8, 32]);
    let k_max = *k_list.iter().max().unwrap();
    let basis = build_basis(1, GroupTag::U1, config.p, k_max)?;

    // (a) ground-state loop expectation vs the Gaussian characteristic
    // function e^{−¼Σc_k²}
    let path = match &config.path {
        Some(spec) => spec.build()?,
        None => PathCurve::circle_loop(1, 0, &[])?,
    };
    let mut loop_table = Table::new(&["k", "mc_re", "mc_im", "closed_re", "closed_im", "stderr"]);
    for &k in &k_list {
        let params = McParams::new(n, seed).with_workers(workers);
        let r = expect_holonomy(
            &basis,
            &ConnectionSample::zero(),
            &FrameState::ground(),
            &path,
            k,
            &params,
        )?;
        let lines = basis.line_integrals(k, &path, 1e-12);
        let closed = Complex64::new(0.0, 0.0).exp()
            * (-0.25 * lines.iter().map(|c| c[0] * c[0]).sum::<f64>()).exp();
        let err = (r.value.a[0][0] - closed).norm();
        let tol = (3.0 * r.mc_stderr).max(1e-3);
        checks.push(Check::le(
            &format!("abelian_loop_k{k}"),
            err,
            tol,
            format!("|MC − closed| = {err:.3e}, 3σ = {:.3e}", 3.0 * r.mc_stderr),
        ));
        loop_table.push(vec![
            k as f64,
            r.value.a[0][0].re,
            r.value.a[0][0].im,
            closed.re,
            closed.im,
            r.mc_stderr,
        ]);
    }
    tables.insert("loop".into(), loop_table);

    // (b) coherent overlaps vs direct 1-D/2-D Gaussian quadrature
    let mut worst_overlap: f64 = 0.0;
    for trial in 0..20u64 {
        let two_coord = trial % 2 == 1;
        let a0 = 3.0 * (rng::uniform(seed, STREAM_ORACLE, trial, 0) - 0.5);
        let b0 = 3.0 * (rng::uniform(seed, STREAM_ORACLE, trial, 1) - 0.5);
        let a1 = 3.0 * (rng::uniform(seed, STREAM_ORACLE, trial, 2) - 0.5);
        let b1 = 3.0 * (rng::uniform(seed, STREAM_ORACLE, trial, 3) - 0.5);
        let (omega, nu): (Vec<f64>, Vec<f64>) = if two_coord {
            (vec![a0, a1], vec![b0, b1])
        } else {
            (vec![a0], vec![b0])
        };
        let direct = gaussian_overlap_quadrature(&omega, &nu);
        let closed = coherent_overlap(&omega, &nu);
        worst_overlap = worst_overlap.max((direct - closed).abs());
    }
    checks.push(Check::le(
        "overlap_quadrature",
        worst_overlap,
        1e-10,
        format!("worst |closed − quadrature| over 20 pairs = {worst_overlap:.3e}"),
    ));

    // (c) infinitesimal elements vs central differences; exact ground zero
    let mut worst_fd: f64 = 0.0;
    for trial in 0..50u64 {
        let s1 = random_frame_state(seed, STREAM_ORACLE ^ 1, trial, 2, 3);
        let s2 = random_frame_state(seed, STREAM_ORACLE ^ 2, trial, 2, 3);
        let mu: Vec<f64> = (0..3)
            .map(|i| 2.0 * rng::uniform(seed, STREAM_ORACLE ^ 3, trial, i) - 1.0)
            .collect();
        let h = 1e-5;
        let scaled = |t: f64| -> Vec<f64> { mu.iter().map(|&m| m * t).collect() };
        let fd = (u_matrix_element(&s1, &scaled(h), &s2)
            - u_matrix_element(&s1, &scaled(-h), &s2))
            / (2.0 * h);
        let exact = e_matrix_element(&s1, &mu, &s2);
        worst_fd = worst_fd.max((fd - exact).norm());
    }
    checks.push(Check::le(
        "infinitesimal_fd",
        worst_fd,
        1e-8,
        format!("worst |analytic − central difference| over 50 = {worst_fd:.3e}"),
    ));
    let phi = FrameState::ground();
    let ground_zero = e_matrix_element(&phi, &[0.9, -1.3, 0.4], &phi).norm();
    checks.push(Check::new(
        "infinitesimal_ground_zero",
        ground_zero == 0.0,
        ground_zero,
        0.0,
        "⟨Φ, E_μΦ⟩ must vanish identically".into(),
    ));

    // (d) translation covariance: conjugated matrix elements equal
    // background-shifted expectations
    let k_conj = 8.min(k_max);
    let conj_path = PathCurve::axis_arc(1, 0, &[0.3], 2.0)?;
    let mut worst_conj: f64 = 0.0;
    let mut conj_bound: f64 = 0.0;
    for trial in 0..20u64 {
        let omega: Vec<f64> = (0..k_conj)
            .map(|i| 1.5 * (rng::uniform(seed, STREAM_ORACLE ^ 4, trial, i as u64) - 0.5))
            .collect();
        let minus: Vec<f64> = omega.iter().map(|x| -x).collect();
        let translated = apply_translation(&minus, &phi);
        let params = McParams::new(n / 10, seed ^ trial).with_workers(workers);
        let lhs = h_matrix_element(
            &basis,
            &ConnectionSample::zero(),
            &translated,
            &translated,
            &conj_path,
            k_conj,
            &params,
        )?;
        let params2 = McParams::new(n / 10, seed ^ trial ^ 0xFFFF).with_workers(workers);
        let rhs = expect_holonomy(
            &basis,
            &ConnectionSample::from_base(minus),
            &phi,
            &conj_path,
            k_conj,
            &params2,
        )?;
        let diff = lhs.value.sub(&rhs.value).op_norm();
        let tol = 3.0 * (lhs.mc_stderr.powi(2) + rhs.mc_stderr.powi(2)).sqrt();
        worst_conj = worst_conj.max(diff - tol);
        conj_bound = conj_bound.max(tol);
    }
    checks.push(Check::le(
        "translation_covariance",
        worst_conj,
        0.0,
        format!("worst (diff − 3σ) over 20 random shifts = {worst_conj:.3e}"),
    ));

    // (e) expansion remainder and term bounds on random SU(2) instances
    let su2 = ModeBasis::build(1, GroupTag::Su2, config.p, 9)?;
    let path_len = 1.6;
    let dyson_path = PathCurve::axis_arc(1, 0, &[], path_len)?;
    let mut dyson_table = Table::new(&["x", "remainder", "remainder_bound", "t1", "t1_bound", "t2", "t2_bound"]);
    let mut bounds_ok = true;
    for trial in 0..100u64 {
        let r = |k: u64, s: u64| 2.0 * rng::uniform(seed, STREAM_ORACLE ^ s, trial, k) - 1.0;
        let conn = ConnectionSample::from_fluct((0..9).map(|i| 0.8 * r(i, 5)).collect());
        let raw: Vec<f64> = (0..9).map(|i| r(i, 6)).collect();
        let sup_raw = su2.sup_norm_one_form(&raw, 8192);
        let target = 0.1 + 0.9 * rng::uniform(seed, STREAM_ORACLE ^ 7, trial, 0);
        let scale = target / (sup_raw * path_len);
        let omega: Vec<f64> = raw.iter().map(|c| c * scale).collect();
        let sup = su2.sup_norm_one_form(&omega, 8192);
        let terms = dyson_terms(&su2, &conn, &omega, &dyson_path, 1e-10)?;
        let mut perturbed = conn.clone();
        perturbed
            .fluct
            .iter_mut()
            .zip(&omega)
            .for_each(|(c, o)| *c += o);
        let h = holonomy(&su2, &perturbed, &dyson_path, 1e-11)?;
        let remainder = h
            .matrix
            .sub(&terms[0])
            .sub(&terms[1])
            .sub(&terms[2])
            .op_norm();
        let bound = dyson_remainder_bound(sup, path_len);
        let (b1, b2) = term_bounds(sup, path_len);
        let t1 = terms[1].op_norm();
        let t2 = terms[2].op_norm();
        bounds_ok &= remainder <= bound && t1 <= b1 && t2 <= b2;
        dyson_table.push(vec![sup * path_len, remainder, bound, t1, b1, t2, b2]);
    }
    checks.push(Check::new(
        "dyson_bounds_su2",
        bounds_ok,
        if bounds_ok { 0.0 } else { 1.0 },
        0.0,
        "remainder ≤ ½x³ and term norms within bounds on 100 instances".into(),
    ));
    tables.insert("dyson".into(), dyson_table);

    Ok(Outcome { checks, tables })
}

/// ∫∫ Π π^{-1/2, per coord} e^{-(x-a)²/2} e^{-(x-b)²/2} dx by tensor-product
/// Gauss-Legendre panels over [-12, 12] per differing coordinate.
pub fn gaussian_overlap_quadrature(omega: &[f64], nu: &[f64]) -> f64 {
    let dim = omega.len().max(nu.len());
    let mut total = 1.0;
    for i in 0..dim {
        let a = omega.get(i).copied().unwrap_or(0.0);
        let b = nu.get(i).copied().unwrap_or(0.0);
        let one_dim = quad::gl16_panels(
            |x| {
                (std::f64::consts::PI).sqrt().recip()
                    * (-(x - a) * (x - a) / 2.0 - (x - b) * (x - b) / 2.0).exp()
            },
            -12.0,
            12.0,
            48,
        );
        total *= one_dim;
    }
    total
}

/// Seeded random frame state with `terms` components over `k` modes.
pub fn random_frame_state(seed: u64, stream: u64, trial: u64, terms: usize, k: usize) -> FrameState {
    let mut list = Vec::with_capacity(terms);
    for a in 0..terms {
        let base = (a * (k + 2)) as u64;
        let re = 2.0 * rng::uniform(seed, stream, trial, base) - 1.0;
        let im = 2.0 * rng::uniform(seed, stream, trial, base + 1) - 1.0;
        let shift: Vec<f64> = (0..k)
            .map(|i| 1.4 * (rng::uniform(seed, stream, trial, base + 2 + i as u64) - 0.5))
            .collect();
        list.push((Complex64::new(re, im), shift));
    }
    FrameState::new(list)
}
