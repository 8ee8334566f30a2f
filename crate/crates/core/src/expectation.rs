//! Holonomy expectation values on frame states with error budgets.
//!
//! The measure is the product Gaussian e^{−x²}/√π per mode coefficient.
//! Sampling is counter-based: every draw is a pure function of
//! (seed, stream, sample, mode), and accumulation uses fixed-shape pairwise
//! summation, so results are bit-identical for any worker count. For U(1)
//! the path-ordered exponential collapses to a phase linear in the
//! coefficients and each sample costs O(K); other groups integrate the
//! holonomy ODE per sample.

mod sections;

pub use sections::{covariant_derivative_element, ex_matrix_element, ExMethod, SectionGrid};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::cmat::CMat;
use crate::error::{Error, Result};
use crate::gauge::{holonomy, ConnectionSample, GroupTag};
use crate::geometry::{curve_distance, PathCurve, CURVE_DISTANCE_GRID};
use crate::hilbert::{coherent_overlap, FrameState};
use crate::rng;
use crate::spectrum::ModeBasis;

/// How mode coefficients are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TruncationMode {
    /// Draws from the untruncated Gaussian (the actual measure).
    FullGaussian,
    /// Rejects draws with |x_k| > √(2 log k) for 1-based mode index
    /// k ≥ from_index; reproduces the envelope bookkeeping.
    EnvelopeTruncated { from_index: usize },
}

/// Monte Carlo controls.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McParams {
    pub n_samples: usize,
    pub seed: u64,
    pub workers: usize,
    pub mode: TruncationMode,
    /// Per-sample holonomy tolerance when the ODE route is needed.
    pub ode_tol: f64,
}

impl McParams {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        McParams {
            n_samples,
            seed,
            workers: 1,
            mode: TruncationMode::FullGaussian,
            ode_tol: 1e-8,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn with_mode(mut self, mode: TruncationMode) -> Self {
        self.mode = mode;
        self
    }
}

/// Matrix-valued expectation estimate with statistical and truncation errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpectationResult {
    pub value: CMat,
    /// Frobenius-aggregated standard error of the mean.
    pub mc_stderr: f64,
    pub samples: usize,
    pub cutoff: usize,
    /// Tail bound Σ_{k>K}(2/k² + ½(‖e_k‖_∞|p|)² + k^{−5/4}).
    pub budget: f64,
    pub mode: TruncationMode,
    pub seed: u64,
}

const STREAM_PAIR_BASE: u64 = 0x4841_5221; // h-element pair streams
const STREAM_MIX: u64 = 0x4D49_5821; // mixture component selection
const COMPONENT_PICK: u64 = 1 << 40; // component index reserved for selection

/// Truncation error budget for cutoff `k` and a path of length `path_len`:
/// the built-mode sum of the displayed summand plus closed tail bounds.
pub fn error_budget(basis: &ModeBasis, path_len: f64, k: usize) -> f64 {
    let built: f64 = rng::pairwise_sum(
        &basis.modes()[k.min(basis.len())..]
            .iter()
            .map(|m| {
                let idx = m.index as f64;
                2.0 / (idx * idx)
                    + 0.5 * (m.sup_norm * path_len).powi(2)
                    + idx.powf(-1.25)
            })
            .collect::<Vec<_>>(),
    );
    let m = basis.len();
    let unbuilt = 2.0 * zeta_tail(2.0, m)
        + zeta_tail(1.25, m)
        + 0.5
            * path_len
            * path_len
            * crate::spectrum::unbuilt_tail_bound(basis.d, basis.group.algebra_dim(), basis.p, m);
    built + unbuilt
}

/// Σ_{k>m} k^{-s} by explicit summation into the Euler–Maclaurin regime.
pub fn zeta_tail(s: f64, m: usize) -> f64 {
    let mut total = 0.0;
    let mut a = m + 1;
    while a < 64 {
        total += (a as f64).powf(-s);
        a += 1;
    }
    let x = a as f64;
    total += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s) + s * x.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * x.powf(-s - 3.0) / 720.0;
    total
}

/// Expectation of the holonomy on a (normalized) frame state:
/// mixture-importance sampling against the state's own Gaussian components
/// with exact Radon-Nikodym weights.
pub fn expect_holonomy(
    basis: &ModeBasis,
    base: &ConnectionSample,
    state: &FrameState,
    path: &PathCurve,
    k: usize,
    params: &McParams,
) -> Result<ExpectationResult> {
    let engine = SampleEngine::prepare(basis, base, path, k, params)?;
    let norm_sq = state.norm_sq();
    if norm_sq <= 0.0 {
        return Err(Error::Domain("null state".into()));
    }
    let terms = state.terms();
    let total_weight: f64 = terms.iter().map(|(c, _)| c.norm_sqr()).sum();
    let probs: Vec<f64> = terms
        .iter()
        .map(|(c, _)| c.norm_sqr() / total_weight)
        .collect();
    let n = params.n_samples;
    let seed = params.seed;
    let mode = params.mode;
    let j = basis.group.rep_dim();
    let samples: Vec<CMat> = parallel_map(n, params.workers, |s| {
        // pick a mixture component, then draw around its shift
        let u = rng::uniform(seed, STREAM_MIX, s as u64, COMPONENT_PICK);
        let mut alpha = 0;
        let mut acc = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            acc += p;
            if u <= acc {
                alpha = i;
                break;
            }
            alpha = i;
        }
        let shift = &terms[alpha].1;
        let mut x = vec![0.0; k];
        for (i, xi) in x.iter_mut().enumerate() {
            let mean = shift.get(i).copied().unwrap_or(0.0);
            *xi = mean + draw(seed, STREAM_MIX, s as u64, i, mode);
        }
        // Radon-Nikodym weight |Σ c_a h_a|² / (‖s‖² Σ p_a h_a²),
        // h_a = exp(−‖x − ω_a‖²/2), stabilized by the dominant exponent.
        let exps: Vec<f64> = terms
            .iter()
            .map(|(_, w)| {
                let mut e = 0.0;
                for (i, &xi) in x.iter().enumerate() {
                    let d = xi - w.get(i).copied().unwrap_or(0.0);
                    e += d * d;
                }
                -0.5 * e
            })
            .collect();
        let e_max = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut num = Complex64::ZERO;
        let mut den = 0.0;
        for (i, (c, _)) in terms.iter().enumerate() {
            let h = (exps[i] - e_max).exp();
            num += c * h;
            den += probs[i] * h * h;
        }
        let w = num.norm_sqr() / (norm_sq * den);
        engine.holonomy_at(&x).scale(w)
    });
    let (value, mc_stderr) = mean_and_stderr(&samples, j);
    Ok(ExpectationResult {
        value,
        mc_stderr,
        samples: n,
        cutoff: k,
        budget: engine.budget,
        mode,
        seed,
    })
}

/// Sesquilinear matrix element ⟨s1, h_p s2⟩ by importance sampling against
/// the pairwise Gaussian products with closed-form overlap prefactors.
pub fn h_matrix_element(
    basis: &ModeBasis,
    base: &ConnectionSample,
    s1: &FrameState,
    s2: &FrameState,
    path: &PathCurve,
    k: usize,
    params: &McParams,
) -> Result<ExpectationResult> {
    let engine = SampleEngine::prepare(basis, base, path, k, params)?;
    let j = basis.group.rep_dim();
    let n = params.n_samples;
    let mut value = CMat::zero(j);
    let mut var_sum = 0.0;
    for (a, (ca, oa)) in s1.terms().iter().enumerate() {
        for (b, (cb, ob)) in s2.terms().iter().enumerate() {
            let pref = ca.conj() * cb * coherent_overlap(oa, ob);
            if pref.norm() == 0.0 {
                continue;
            }
            let mean: Vec<f64> = (0..k)
                .map(|i| {
                    0.5 * (oa.get(i).copied().unwrap_or(0.0) + ob.get(i).copied().unwrap_or(0.0))
                })
                .collect();
            let stream = STREAM_PAIR_BASE ^ ((a as u64) << 32 | b as u64);
            let seed = params.seed;
            let mode = params.mode;
            let samples: Vec<CMat> = parallel_map(n, params.workers, |s| {
                let mut x = vec![0.0; k];
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi = mean[i] + draw(seed, stream, s as u64, i, mode);
                }
                engine.holonomy_at(&x)
            });
            let (pair_mean, pair_err) = mean_and_stderr(&samples, j);
            value = value.add(&pair_mean.scale_c(pref));
            var_sum += pref.norm_sqr() * pair_err * pair_err;
        }
    }
    Ok(ExpectationResult {
        value,
        mc_stderr: var_sum.sqrt(),
        samples: n,
        cutoff: k,
        budget: engine.budget,
        mode: params.mode,
        seed: params.seed,
    })
}

/// Closed form of ⟨s1, h_p s2⟩ for U(1): shifted-Gaussian characteristic
/// functions against the per-mode line integrals (no Monte Carlo error).
pub fn h_matrix_element_closed_u1(
    basis: &ModeBasis,
    base: &ConnectionSample,
    s1: &FrameState,
    s2: &FrameState,
    path: &PathCurve,
    k: usize,
) -> Result<Complex64> {
    if basis.group != GroupTag::U1 {
        return Err(Error::Domain("closed form requires the abelian group".into()));
    }
    let k = k.min(basis.len());
    let support = base.support().max(k).min(basis.len());
    let lines = basis.line_integrals(support, path, 1e-12);
    let base_phase: f64 = (0..support).map(|i| base.coeff(i) * lines[i][0]).sum();
    let damp: f64 = (-0.25 * lines[..k].iter().map(|c| c[0] * c[0]).sum::<f64>()).exp();
    let mut out = Complex64::ZERO;
    for (ca, oa) in s1.terms() {
        for (cb, ob) in s2.terms() {
            let pref = ca.conj() * cb * coherent_overlap(oa, ob);
            let mean_phase: f64 = (0..k)
                .map(|i| {
                    0.5 * (oa.get(i).copied().unwrap_or(0.0) + ob.get(i).copied().unwrap_or(0.0))
                        * lines[i][0]
                })
                .sum();
            out += pref * Complex64::new(0.0, base_phase + mean_phase).exp() * damp;
        }
    }
    Ok(out)
}

/// One row of a holonomy strong-continuity experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub curve_distance: f64,
    /// |⟨s, (h_γ − h_{γ_k}) s⟩| measured with shared draws.
    pub measured: f64,
    pub mc_stderr: f64,
    /// Abelian closed form of the same difference, when available.
    pub closed_form: Option<f64>,
}

/// Measures |⟨s, (h_γ − h_{γ_k}) s⟩| along a perturbation family, using
/// common random numbers so the difference estimator tightens as γ_k → γ.
pub fn continuity_experiment(
    basis: &ModeBasis,
    base: &ConnectionSample,
    state: &FrameState,
    curve: &PathCurve,
    family: &[PathCurve],
    k: usize,
    params: &McParams,
) -> Result<Vec<ContinuityRow>> {
    let norm_sq = state.norm_sq();
    if norm_sq <= 0.0 {
        return Err(Error::Domain("null state".into()));
    }
    let engine_base = SampleEngine::prepare(basis, base, curve, k, params)?;
    let j = basis.group.rep_dim();
    let mut rows = Vec::with_capacity(family.len());
    for member in family {
        let dist = curve_distance(curve, member, CURVE_DISTANCE_GRID)?;
        let engine_k = SampleEngine::prepare(basis, base, member, k, params)?;
        let n = params.n_samples;
        let mut diff = Complex64::ZERO;
        let mut var_sum = 0.0;
        for (a, (ca, oa)) in state.terms().iter().enumerate() {
            for (b, (cb, ob)) in state.terms().iter().enumerate() {
                let pref = ca.conj() * cb * coherent_overlap(oa, ob) / norm_sq;
                if pref.norm() == 0.0 {
                    continue;
                }
                let mean: Vec<f64> = (0..k)
                    .map(|i| {
                        0.5 * (oa.get(i).copied().unwrap_or(0.0)
                            + ob.get(i).copied().unwrap_or(0.0))
                    })
                    .collect();
                let stream = STREAM_PAIR_BASE ^ ((a as u64) << 32 | b as u64);
                let seed = params.seed;
                let mode = params.mode;
                let samples: Vec<CMat> = parallel_map(n, params.workers, |s| {
                    let mut x = vec![0.0; k];
                    for (i, xi) in x.iter_mut().enumerate() {
                        *xi = mean[i] + draw(seed, stream, s as u64, i, mode);
                    }
                    engine_base.holonomy_at(&x).sub(&engine_k.holonomy_at(&x))
                });
                let (pair_mean, pair_err) = mean_and_stderr(&samples, j);
                diff += pref * pair_mean.trace() / j as f64;
                var_sum += pref.norm_sqr() * pair_err * pair_err;
            }
        }
        let closed_form = if basis.group == GroupTag::U1 {
            let c0 = h_matrix_element_closed_u1(basis, base, state, state, curve, k)?;
            let c1 = h_matrix_element_closed_u1(basis, base, state, state, member, k)?;
            Some(((c0 - c1) / norm_sq).norm())
        } else {
            None
        };
        rows.push(ContinuityRow {
            curve_distance: dist,
            measured: diff.norm(),
            mc_stderr: var_sum.sqrt(),
            closed_form,
        });
    }
    Ok(rows)
}

/// Per-path sampling engine: precomputes what a sample needs.
struct SampleEngine<'a> {
    basis: &'a ModeBasis,
    base: &'a ConnectionSample,
    path: &'a PathCurve,
    k: usize,
    ode_tol: f64,
    budget: f64,
    /// U(1) fast path: per-mode line integrals and the base phase.
    abelian: Option<(Vec<f64>, f64)>,
}

impl<'a> SampleEngine<'a> {
    fn prepare(
        basis: &'a ModeBasis,
        base: &'a ConnectionSample,
        path: &'a PathCurve,
        k: usize,
        params: &McParams,
    ) -> Result<Self> {
        if k > basis.len() {
            return Err(Error::Config(format!(
                "cutoff {k} exceeds basis size {}",
                basis.len()
            )));
        }
        if params.n_samples == 0 {
            return Err(Error::Config("need at least one sample".into()));
        }
        if let TruncationMode::EnvelopeTruncated { from_index } = params.mode {
            if from_index < 2 {
                return Err(Error::Config(
                    "envelope truncation needs from_index ≥ 2 (√(2 log 1) = 0 rejects all draws)"
                        .into(),
                ));
            }
            // analytic rejection rate; the envelope keeps it below ~10%
            let mut worst: f64 = 0.0;
            for idx in from_index..=k {
                worst = worst.max(1.0 - erf((2.0 * (idx as f64).ln()).sqrt()));
            }
            if worst > 0.5 {
                return Err(Error::Config(format!(
                    "envelope rejection rate {worst:.2} exceeds 0.5"
                )));
            }
        }
        let path_len = path.arc_length(1e-10);
        let budget = error_budget(basis, path_len, k);
        let abelian = if basis.group == GroupTag::U1 {
            let support = base.support().max(k).min(basis.len());
            let lines = basis.line_integrals(support, path, 1e-12);
            let base_phase: f64 = (0..support).map(|i| base.coeff(i) * lines[i][0]).sum();
            Some((lines[..k].iter().map(|c| c[0]).collect(), base_phase))
        } else {
            None
        };
        Ok(SampleEngine {
            basis,
            base,
            path,
            k,
            ode_tol: params.ode_tol,
            budget,
            abelian,
        })
    }

    fn holonomy_at(&self, x: &[f64]) -> CMat {
        if let Some((lines, base_phase)) = &self.abelian {
            let phase: f64 =
                base_phase + x.iter().zip(lines).map(|(xi, ci)| xi * ci).sum::<f64>();
            return CMat::scalar(Complex64::new(0.0, phase).exp());
        }
        let mut conn = self.base.clone();
        if conn.fluct.len() < self.k {
            conn.fluct.resize(self.k, 0.0);
        }
        for (i, &xi) in x.iter().enumerate() {
            conn.fluct[i] += xi;
        }
        holonomy(self.basis, &conn, self.path, self.ode_tol)
            .map(|h| h.matrix)
            .unwrap_or_else(|_| CMat::identity(self.basis.group.rep_dim()))
    }
}

fn draw(seed: u64, stream: u64, sample: u64, mode_idx: usize, mode: TruncationMode) -> f64 {
    match mode {
        TruncationMode::FullGaussian => rng::gaussian_half(seed, stream, sample, mode_idx as u64),
        TruncationMode::EnvelopeTruncated { from_index } => {
            let k1 = mode_idx + 1;
            if k1 >= from_index {
                let bound = (2.0 * (k1 as f64).ln()).sqrt();
                rng::gaussian_half_truncated(seed, stream, sample, mode_idx as u64, bound)
            } else {
                rng::gaussian_half(seed, stream, sample, mode_idx as u64)
            }
        }
    }
}

/// Deterministic map over sample indices; worker count affects scheduling
/// only, never values.
pub fn parallel_map<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if workers <= 1 {
        (0..n).map(f).collect()
    } else {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        pool.install(|| (0..n).into_par_iter().map(|i| f(i)).collect())
    }
}

/// Entry-wise mean and Frobenius-aggregated standard error of the mean,
/// both reduced by fixed-shape pairwise summation.
fn mean_and_stderr(samples: &[CMat], dim: usize) -> (CMat, f64) {
    let n = samples.len();
    let mut mean = CMat::zero(dim);
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    for r in 0..dim {
        for c in 0..dim {
            for (s, m) in samples.iter().enumerate() {
                re[s] = m.a[r][c].re;
                im[s] = m.a[r][c].im;
            }
            mean.a[r][c] = Complex64::new(
                rng::pairwise_sum(&re) / n as f64,
                rng::pairwise_sum(&im) / n as f64,
            );
        }
    }
    if n < 2 {
        return (mean, f64::INFINITY);
    }
    let mut var_total = 0.0;
    for r in 0..dim {
        for c in 0..dim {
            for (s, m) in samples.iter().enumerate() {
                let dr = m.a[r][c].re - mean.a[r][c].re;
                let di = m.a[r][c].im - mean.a[r][c].im;
                re[s] = dr * dr;
                im[s] = di * di;
            }
            var_total += rng::pairwise_sum(&re) + rng::pairwise_sum(&im);
        }
    }
    let stderr = (var_total / (n as f64 * (n - 1) as f64)).sqrt();
    (mean, stderr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TAU;

    fn u1_basis(k: usize) -> ModeBasis {
        ModeBasis::build(1, GroupTag::U1, 1.0, k).unwrap()
    }

    #[test]
    fn trivial_path_gives_exact_identity() {
        let basis = u1_basis(4);
        let path = PathCurve::point(&[0.3]).unwrap();
        let r = expect_holonomy(
            &basis,
            &ConnectionSample::zero(),
            &FrameState::ground(),
            &path,
            4,
            &McParams::new(200, 7),
        )
        .unwrap();
        assert_eq!(r.value.a[0][0], Complex64::ONE);
    }

    #[test]
    fn ground_state_loop_matches_gaussian_characteristic_function() {
        // Full circle on T¹: only the harmonic mode has a nonzero line
        // integral c₁ = √(2π); E[e^{ic₁x}] = e^{−c₁²/4} = e^{−π/2}.
        let basis = u1_basis(1);
        let path = PathCurve::circle_loop(1, 0, &[]).unwrap();
        let r = expect_holonomy(
            &basis,
            &ConnectionSample::zero(),
            &FrameState::ground(),
            &path,
            1,
            &McParams::new(200_000, 11),
        )
        .unwrap();
        let exact = (-std::f64::consts::FRAC_PI_2).exp();
        let err = (r.value.a[0][0] - Complex64::new(exact, 0.0)).norm();
        assert!(err < 3.0 * r.mc_stderr + 1e-4, "err {err} stderr {}", r.mc_stderr);
        assert!(r.value.op_norm() <= 1.0 + 3.0 * r.mc_stderr);
    }

    #[test]
    fn coherent_state_adds_mean_phase() {
        let basis = u1_basis(1);
        let path = PathCurve::circle_loop(1, 0, &[]).unwrap();
        let shift = 0.8;
        let state = FrameState::coherent(vec![shift]);
        let r = expect_holonomy(
            &basis,
            &ConnectionSample::zero(),
            &state,
            &path,
            1,
            &McParams::new(100_000, 3),
        )
        .unwrap();
        let c1 = TAU.sqrt();
        let exact = Complex64::new(0.0, c1 * shift).exp() * (-c1 * c1 / 4.0).exp();
        assert!((r.value.a[0][0] - exact).norm() < 3.0 * r.mc_stderr + 1e-3);
    }

    #[test]
    fn closed_form_agrees_with_mc_for_frame_states() {
        let basis = u1_basis(6);
        let path = PathCurve::axis_arc(1, 0, &[0.2], 2.5).unwrap();
        let base = ConnectionSample::from_base(vec![0.3, -0.2, 0.1, 0.0, 0.25, -0.15]);
        let s1 = FrameState::new(vec![
            (Complex64::new(0.8, 0.1), vec![0.4]),
            (Complex64::new(-0.3, 0.2), vec![0.0, -0.5]),
        ]);
        let s2 = FrameState::coherent(vec![0.2, 0.6]);
        let mc = h_matrix_element(&basis, &base, &s1, &s2, &path, 6, &McParams::new(60_000, 5))
            .unwrap();
        let closed = h_matrix_element_closed_u1(&basis, &base, &s1, &s2, &path, 6).unwrap();
        assert!(
            (mc.value.a[0][0] - closed).norm() < 3.0 * mc.mc_stderr + 1e-3,
            "mc {} closed {closed}",
            mc.value.a[0][0]
        );
        // Cauchy-Schwarz with statistical slack
        let bound = s1.norm_sq().sqrt() * s2.norm_sq().sqrt();
        assert!(mc.value.op_norm() <= bound + 3.0 * mc.mc_stderr);
    }

    #[test]
    fn diagonal_h_element_matches_normalized_expectation() {
        let basis = u1_basis(4);
        let path = PathCurve::axis_arc(1, 0, &[], 1.8).unwrap();
        let state = FrameState::new(vec![
            (Complex64::new(1.0, 0.0), vec![0.5]),
            (Complex64::new(0.0, 0.6), vec![-0.4, 0.3]),
        ]);
        let h = h_matrix_element(
            &basis,
            &ConnectionSample::zero(),
            &state,
            &state,
            &path,
            4,
            &McParams::new(40_000, 9),
        )
        .unwrap();
        let e = expect_holonomy(
            &basis,
            &ConnectionSample::zero(),
            &state,
            &path,
            4,
            &McParams::new(40_000, 10),
        )
        .unwrap();
        let diff = (h.value.a[0][0] / state.norm_sq() - e.value.a[0][0]).norm();
        let tol = 3.0 * (h.mc_stderr / state.norm_sq() + e.mc_stderr);
        assert!(diff < tol, "diff {diff} tol {tol}");
    }

    #[test]
    fn identical_seed_different_workers_bitwise_equal() {
        let basis = u1_basis(8);
        let path = PathCurve::circle_loop(1, 0, &[]).unwrap();
        let state = FrameState::new(vec![
            (Complex64::new(0.6, 0.0), vec![0.3]),
            (Complex64::new(0.0, 0.8), vec![-0.2, 0.4]),
        ]);
        let r1 = expect_holonomy(
            &basis,
            &ConnectionSample::zero(),
            &state,
            &path,
            8,
            &McParams::new(5_000, 123).with_workers(1),
        )
        .unwrap();
        let r4 = expect_holonomy(
            &basis,
            &ConnectionSample::zero(),
            &state,
            &path,
            8,
            &McParams::new(5_000, 123).with_workers(4),
        )
        .unwrap();
        assert_eq!(r1.value.a[0][0], r4.value.a[0][0]);
        assert_eq!(r1.mc_stderr, r4.mc_stderr);
    }

    #[test]
    fn budget_decreases_by_exactly_the_summand() {
        let basis = u1_basis(16);
        let len = TAU;
        for k in [0usize, 3, 7, 15] {
            let b0 = error_budget(&basis, len, k);
            let b1 = error_budget(&basis, len, k + 1);
            let m = basis.mode(k);
            let idx = (k + 1) as f64;
            let summand =
                2.0 / (idx * idx) + 0.5 * (m.sup_norm * len).powi(2) + idx.powf(-1.25);
            assert!(b1 >= 0.0 && b1 <= b0);
            assert!(((b0 - b1) - summand).abs() < 1e-12);
        }
    }

    #[test]
    fn budget_built_range_matches_independent_summation() {
        // oracle: re-derive sup norms from amplitudes and sum in reverse
        let basis = u1_basis(32);
        let len = TAU;
        let k = 4;
        let budget = error_budget(&basis, len, k);
        let mut oracle = 0.0;
        for idx in ((k + 1)..=32).rev() {
            let m = basis.mode(idx - 1);
            let amp = if m.lambda == 0.0 {
                TAU.powf(-0.5)
            } else {
                (2.0 / TAU).sqrt()
            };
            let sup = amp / (1.0 + m.lambda);
            oracle +=
                2.0 / (idx as f64).powi(2) + 0.5 * (sup * len).powi(2) + (idx as f64).powf(-1.25);
        }
        // identical closed tail expressions beyond the built range
        oracle += 2.0 * zeta_tail(2.0, 32)
            + zeta_tail(1.25, 32)
            + 0.5 * len * len * crate::spectrum::unbuilt_tail_bound(1, 1, 1.0, 32);
        assert!((budget - oracle).abs() < 1e-12, "budget {budget} oracle {oracle}");
    }

    #[test]
    fn envelope_mode_needs_from_index_at_least_two() {
        let basis = u1_basis(4);
        let path = PathCurve::circle_loop(1, 0, &[]).unwrap();
        let params = McParams::new(100, 1)
            .with_mode(TruncationMode::EnvelopeTruncated { from_index: 1 });
        let err = expect_holonomy(
            &basis,
            &ConnectionSample::zero(),
            &FrameState::ground(),
            &path,
            4,
            &params,
        );
        assert!(err.is_err());
    }

    #[test]
    fn envelope_mode_stays_close_to_full_gaussian() {
        let basis = u1_basis(8);
        let path = PathCurve::axis_arc(1, 0, &[], 2.0).unwrap();
        let full = expect_holonomy(
            &basis,
            &ConnectionSample::zero(),
            &FrameState::ground(),
            &path,
            8,
            &McParams::new(50_000, 21),
        )
        .unwrap();
        let env = expect_holonomy(
            &basis,
            &ConnectionSample::zero(),
            &FrameState::ground(),
            &path,
            8,
            &McParams::new(50_000, 21)
                .with_mode(TruncationMode::EnvelopeTruncated { from_index: 2 }),
        )
        .unwrap();
        // the envelope removes Gaussian tails; differences sit inside the
        // 2/k² bookkeeping allowance plus noise
        let allowance: f64 = (1..=8).map(|k| 2.0 / (k as f64 * k as f64)).sum();
        let diff = full.value.sub(&env.value).op_norm();
        assert!(diff < allowance + 3.0 * (full.mc_stderr + env.mc_stderr));
    }

    #[test]
    fn continuity_rows_shrink_with_curve_distance() {
        let basis = ModeBasis::build(2, GroupTag::U1, 1.0, 10).unwrap();
        let y0 = 0.7;
        let curve = PathCurve::circle_loop(2, 0, &[0.0, y0]).unwrap();
        let family: Vec<PathCurve> = [0.3, 0.03]
            .iter()
            .map(|&eps| {
                PathCurve::from_segments(vec![crate::geometry::Segment::trig1(
                    vec![
                        crate::geometry::Trig1d {
                            c0: 0.0,
                            c1: 1.0,
                            harmonics: vec![],
                        },
                        crate::geometry::Trig1d {
                            c0: y0,
                            c1: 0.0,
                            harmonics: vec![(1.0, 0.0, eps)],
                        },
                    ],
                    0.0,
                    TAU,
                )])
                .unwrap()
            })
            .collect();
        let rows = continuity_experiment(
            &basis,
            &ConnectionSample::zero(),
            &FrameState::ground(),
            &curve,
            &family,
            10,
            &McParams::new(20_000, 17),
        )
        .unwrap();
        assert!(rows[0].curve_distance > rows[1].curve_distance);
        assert!(rows[1].measured <= rows[0].measured + 3.0 * (rows[0].mc_stderr + rows[1].mc_stderr));
        for row in &rows {
            let closed = row.closed_form.unwrap();
            assert!(
                (row.measured - closed).abs() < 3.0 * row.mc_stderr + 1e-4,
                "measured {} closed {closed}",
                row.measured
            );
        }
    }
}
