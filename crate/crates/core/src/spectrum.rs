//! Laplace eigenmode basis for Lie-algebra valued one-forms on the flat torus.
//!
//! On T^d the Hodge Laplacian on one-forms acts component-wise as −Σ∂², so the
//! eigenforms are trigonometric monomials cos(n·x), sin(n·x) times a
//! coordinate differential and a Lie generator, with eigenvalue λ = |n|². The
//! Sobolev-type product ⟨u,v⟩_s = ∫((1+Δ^p)u, (1+Δ^p)v) is diagonal on these
//! modes, which makes the normalized basis e_i = f_i/(1+λ_i^p) exact: no
//! spectral approximation error enters anywhere downstream.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::GroupTag;
use crate::geometry::{PathCurve, Phase, TrigScalar, TrigTerm, TAU};
use crate::quad;

/// Coefficient vector in the normalized e-basis (ω = Σ aᵢ eᵢ).
pub type OneFormCoeffs = Vec<f64>;

/// ⟨u, v⟩_s for coefficient vectors: the basis is s-orthonormal.
pub fn sobolev_dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    (0..n).map(|i| a[i] * b[i]).sum()
}

pub fn sobolev_norm_sq(a: &[f64]) -> f64 {
    sobolev_dot(a, a)
}

/// One additive piece of a (possibly eigenspace-mixed) basis one-form:
/// a trig monomial times dx^dir ⊗ T_gen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub term: TrigTerm,
    pub dir: usize,
    pub gen: usize,
}

/// One normalized basis one-form e_i with its bookkeeping.
///
/// Freshly built modes consist of a single atom; eigenspace rotations produce
/// modes with several atoms sharing the eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    /// 1-based position after sorting.
    pub index: usize,
    pub n: [i32; 3],
    pub phase: Phase,
    pub dir: usize,
    pub gen: usize,
    pub lambda: f64,
    /// L² normalization amplitude of the unnormalized eigenform f_i.
    pub amp: f64,
    /// Sobolev weight w = 1/(1+λ^p); e_i = w·f_i.
    pub weight: f64,
    /// ‖e_i‖_∞ = sup over the torus of the fiberwise norm.
    pub sup_norm: f64,
    /// Atoms of e_i (amplitudes include normalization and weight).
    pub atoms: Vec<Atom>,
}

/// Ordered truncated eigenbasis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeBasis {
    pub d: usize,
    pub group: GroupTag,
    pub p: f64,
    modes: Vec<Mode>,
    /// All eigenvalues ≤ this ceiling were enumerated before truncation.
    lambda_window: f64,
}

/// Paper-margin default for the Sobolev exponent.
pub fn default_p(d: usize) -> f64 {
    (2.0 * d as f64 - 1.0) / 4.0 + 0.05
}

/// Summability criteria for the exponent p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PCriterion {
    /// Generic-manifold sufficient condition p > (2d−1)/4.
    pub generic: bool,
    /// Torus-specific sufficient condition 4p/d > 1 (constant sup norms).
    pub torus: bool,
}

/// Evaluates both summability criteria.
pub fn p_criterion(d: usize, p: f64) -> PCriterion {
    let lhs = (1.0 / d as f64) * ((d as f64 - 1.0) / 2.0 - 2.0 * p);
    PCriterion {
        generic: lhs < -0.5,
        torus: 4.0 * p / d as f64 > 1.0,
    }
}

/// Built-range tail sum plus a closed bound on the un-built remainder.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConditionTail {
    /// Σ ‖e_i‖_∞² over built modes i ≥ from_index.
    pub built: f64,
    /// Upper bound on Σ ‖e_i‖_∞² over all modes beyond the built range;
    /// infinite when the torus criterion 4p > d fails.
    pub unbuilt_bound: f64,
}

impl ConditionTail {
    pub fn total(&self) -> f64 {
        self.built + self.unbuilt_bound
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeylRow {
    pub lambda: f64,
    pub count: usize,
    pub ratio: f64,
}

impl ModeBasis {
    /// Builds the first `k` modes, enumerating a large enough eigenvalue
    /// window automatically.
    pub fn build(d: usize, group: GroupTag, p: f64, k: usize) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::Config(format!("dimension {d} not in 1..=3")));
        }
        if !(p > 0.0) {
            return Err(Error::Config("p must be positive".into()));
        }
        let per_lambda = (d * group.algebra_dim()) as f64;
        // Rough inversion of the counting function, then grow until enough.
        let mut window = ((k as f64 / per_lambda).powf(2.0 / d as f64) + 4.0).ceil();
        loop {
            let basis = Self::build_with_window(d, group, p, k, window)?;
            if basis.len() >= k {
                return Ok(basis);
            }
            window *= 2.0;
        }
    }

    /// Builds with an explicit enumeration ceiling; errors when the window
    /// holds fewer than `k` modes.
    pub fn build_with_window(
        d: usize,
        group: GroupTag,
        p: f64,
        k: usize,
        lambda_window: f64,
    ) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::Config(format!("dimension {d} not in 1..=3")));
        }
        let g_dim = group.algebra_dim();
        let mut modes = Vec::new();
        let m = lambda_window.sqrt().floor() as i64;
        let vol_norm = (TAU).powf(-(d as f64) / 2.0);
        let mut n = [0i64; 3];
        enumerate_box(d, m, &mut n, &mut |n| {
            let lam: i64 = n.iter().take(d).map(|&c| c * c).sum();
            if lam as f64 > lambda_window {
                return;
            }
            // Half lattice: keep n = 0 and vectors whose first nonzero entry
            // is positive; the two phases supply the other half.
            let first_nonzero = n.iter().take(d).find(|&&c| c != 0);
            let harmonic = first_nonzero.is_none();
            if let Some(&c) = first_nonzero {
                if c < 0 {
                    return;
                }
            }
            let amp = if harmonic {
                vol_norm
            } else {
                std::f64::consts::SQRT_2 * vol_norm
            };
            let lambda = lam as f64;
            let weight = 1.0 / (1.0 + lambda.powf(p));
            let phases: &[Phase] = if harmonic {
                &[Phase::Cos]
            } else {
                &[Phase::Cos, Phase::Sin]
            };
            for &phase in phases {
                for dir in 0..d {
                    for gen in 0..g_dim {
                        let n32 = [n[0] as i32, n[1] as i32, n[2] as i32];
                        modes.push(Mode {
                            index: 0,
                            n: n32,
                            phase,
                            dir,
                            gen,
                            lambda,
                            amp,
                            weight,
                            sup_norm: amp * weight,
                            atoms: vec![Atom {
                                term: TrigTerm {
                                    amp: amp * weight,
                                    n: n32,
                                    phase,
                                },
                                dir,
                                gen,
                            }],
                        });
                    }
                }
            }
        });
        modes.sort_by(|a, b| {
            (a.lambda, a.n, a.dir, a.phase, a.gen)
                .partial_cmp(&(b.lambda, b.n, b.dir, b.phase, b.gen))
                .unwrap()
        });
        if modes.len() < k {
            return Err(Error::Config(format!(
                "window λ ≤ {lambda_window} holds {} modes, fewer than K = {k}",
                modes.len()
            )));
        }
        modes.truncate(k);
        for (i, mode) in modes.iter_mut().enumerate() {
            mode.index = i + 1;
        }
        Ok(ModeBasis {
            d,
            group,
            p,
            modes,
            lambda_window,
        })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn mode(&self, i: usize) -> &Mode {
        &self.modes[i]
    }

    /// Generator coefficients of e_i(x)(v) (dense over the algebra basis).
    pub fn eval_pairing(&self, i: usize, x: &[f64], v: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for atom in &self.modes[i].atoms {
            out[atom.gen] += atom.term.eval(x) * v[atom.dir];
        }
        out
    }

    /// Fiberwise coefficient table e_i(x) over (direction, generator).
    pub fn eval_fiber(&self, i: usize, x: &[f64]) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for atom in &self.modes[i].atoms {
            out[atom.dir][atom.gen] += atom.term.eval(x);
        }
        out
    }

    /// Fiberwise coefficients of ω = Σ aᵢeᵢ at x.
    pub fn one_form_fiber(&self, coeffs: &[f64], x: &[f64]) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (i, &a) in coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for atom in &self.modes[i].atoms {
                out[atom.dir][atom.gen] += a * atom.term.eval(x);
            }
        }
        out
    }

    /// Sup over a uniform grid of the fiberwise norm of Σ aᵢeᵢ.
    pub fn sup_norm_one_form(&self, coeffs: &[f64], res: usize) -> f64 {
        let mut sup: f64 = 0.0;
        let mut idx = vec![0usize; self.d];
        let step = TAU / res as f64;
        loop {
            let x: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
            let fib = self.one_form_fiber(coeffs, &x);
            let norm_sq: f64 = fib
                .iter()
                .flat_map(|row| row.iter())
                .map(|c| c * c)
                .sum();
            sup = sup.max(norm_sq.sqrt());
            let mut k = 0;
            loop {
                idx[k] += 1;
                if idx[k] < res {
                    break;
                }
                idx[k] = 0;
                k += 1;
                if k == self.d {
                    return sup;
                }
            }
        }
    }

    /// Generator coefficients of ∫ e_i(γ(t))(γ'(t)) dt along the path.
    pub fn line_integral(&self, i: usize, path: &PathCurve, rel_tol: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        let boundaries = path.boundaries_in_domain();
        for atom in &self.modes[i].atoms {
            let mut total = 0.0;
            for w in boundaries.windows(2) {
                total += quad::adaptive_gl(
                    |t| {
                        let x = path.lift(t);
                        let v = path.deriv(t);
                        atom.term.eval(&x) * v[atom.dir]
                    },
                    w[0],
                    w[1],
                    rel_tol,
                );
            }
            out[atom.gen] += total;
        }
        out
    }

    /// Line integrals of all modes up to cutoff `k`, as a (k × 3) table.
    pub fn line_integrals(&self, k: usize, path: &PathCurve, rel_tol: f64) -> Vec<[f64; 3]> {
        (0..k.min(self.len()))
            .map(|i| self.line_integral(i, path, rel_tol))
            .collect()
    }

    /// Tail of Σ‖e_i‖_∞² from a 1-based index, plus the un-built bound.
    pub fn condition_tail(&self, from_index: usize) -> Result<ConditionTail> {
        if from_index == 0 || from_index > self.len() + 1 {
            return Err(Error::Domain(format!(
                "from_index {from_index} outside 1..={}",
                self.len() + 1
            )));
        }
        let built = crate::rng::pairwise_sum(
            &self.modes[from_index - 1..]
                .iter()
                .map(|m| m.sup_norm * m.sup_norm)
                .collect::<Vec<_>>(),
        );
        Ok(ConditionTail {
            built,
            unbuilt_bound: unbuilt_tail_bound(
                self.d,
                self.group.algebra_dim(),
                self.p,
                self.len(),
            ),
        })
    }

    /// Eigenvalue counting data (λ, N(λ), N(λ)/λ^{d/2}) at each distinct
    /// eigenvalue of the built spectrum.
    pub fn weyl_check(&self) -> Result<Vec<WeylRow>> {
        let lam_max = self.modes.last().map(|m| m.lambda).unwrap_or(0.0);
        if lam_max < 4.0 {
            return Err(Error::Config(
                "weyl check needs λ_max ≥ 4; increase K".into(),
            ));
        }
        let mut rows: Vec<WeylRow> = Vec::new();
        for (i, m) in self.modes.iter().enumerate() {
            if m.lambda == 0.0 {
                continue;
            }
            match rows.last_mut() {
                Some(r) if r.lambda == m.lambda => {
                    r.count = i + 1;
                }
                _ => rows.push(WeylRow {
                    lambda: m.lambda,
                    count: i + 1,
                    ratio: 0.0,
                }),
            }
        }
        // Keep only complete eigenvalue blocks: the last λ may be truncated.
        if self
            .modes
            .last()
            .map(|m| {
                let full = count_modes_at(self.d, self.group.algebra_dim(), m.lambda);
                let seen = self.modes.iter().filter(|x| x.lambda == m.lambda).count();
                seen < full
            })
            .unwrap_or(false)
        {
            rows.pop();
        }
        for r in &mut rows {
            r.ratio = r.count as f64 / r.lambda.powf(self.d as f64 / 2.0);
        }
        Ok(rows)
    }

    /// Mix the eigenspace of `lambda` by a random orthogonal matrix drawn
    /// from the given seed; external structure is unchanged.
    pub fn rotate_eigenspace(&self, lambda: f64, seed: u64) -> Result<ModeBasis> {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| self.modes[i].lambda == lambda)
            .collect();
        if idx.len() < 2 {
            return Err(Error::Domain(format!(
                "eigenspace of λ = {lambda} has fewer than 2 built modes"
            )));
        }
        if idx.len() < count_modes_at(self.d, self.group.algebra_dim(), lambda) {
            return Err(Error::Domain(
                "eigenspace truncated by K; rotation would leave the span".into(),
            ));
        }
        let m = idx.len();
        let q = random_orthogonal(m, seed);
        let mut modes = self.modes.clone();
        for (r, &i) in idx.iter().enumerate() {
            let mut atoms = Vec::new();
            for (c, &j) in idx.iter().enumerate() {
                for atom in &self.modes[j].atoms {
                    if q[r][c] != 0.0 {
                        atoms.push(Atom {
                            term: TrigTerm {
                                amp: atom.term.amp * q[r][c],
                                n: atom.term.n,
                                phase: atom.term.phase,
                            },
                            dir: atom.dir,
                            gen: atom.gen,
                        });
                    }
                }
            }
            modes[i].atoms = atoms;
            modes[i].sup_norm = mixed_sup_norm(self.d, &modes[i].atoms, 256);
        }
        Ok(ModeBasis {
            d: self.d,
            group: self.group,
            p: self.p,
            modes,
            lambda_window: self.lambda_window,
        })
    }

    /// The unnormalized eigenform f_i as a closed-form one-form.
    pub fn f_mode_as_trig(&self, i: usize) -> TrigOneForm {
        let m = &self.modes[i];
        let scale = 1.0 / m.weight;
        TrigOneForm {
            comps: m
                .atoms
                .iter()
                .map(|a| {
                    (
                        TrigScalar::single(a.term.amp * scale, a.term.n, a.term.phase),
                        a.dir,
                        a.gen,
                    )
                })
                .collect(),
        }
    }

    /// The normalized mode e_i as a closed-form one-form.
    pub fn e_mode_as_trig(&self, i: usize) -> TrigOneForm {
        let m = &self.modes[i];
        TrigOneForm {
            comps: m
                .atoms
                .iter()
                .map(|a| {
                    (
                        TrigScalar::single(a.term.amp, a.term.n, a.term.phase),
                        a.dir,
                        a.gen,
                    )
                })
                .collect(),
        }
    }

    /// Expansion coefficients aᵢ = ⟨ω, eᵢ⟩_s by quadrature, with the L²
    /// norm of the out-of-span residual.
    pub fn expand(&self, omega: &TrigOneForm) -> (OneFormCoeffs, f64) {
        let res = self.quad_resolution(omega);
        // aᵢ = ∫ ((1+Δ^p)ω, fᵢ): apply the weight to ω analytically,
        // then take the plain L² pairing with the unnormalized mode.
        let weighted = omega.apply_sobolev_weight(self.p);
        let coeffs: Vec<f64> = (0..self.len())
            .map(|i| l2_inner(self.d, &weighted, &self.f_mode_as_trig(i), res))
            .collect();
        // residual² = ‖ω‖₂² − Σ aᵢaⱼ⟨eᵢ,eⱼ⟩₂ evaluated on the grid directly
        let mut residual_sq = 0.0;
        let step = TAU / res as f64;
        let cell = step.powi(self.d as i32);
        let mut idx = vec![0usize; self.d];
        'outer: loop {
            let x: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
            let mut fib = omega.eval_fiber(&x);
            for (i, &a) in coeffs.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for atom in &self.modes[i].atoms {
                    fib[atom.dir][atom.gen] -= a * atom.term.eval(&x);
                }
            }
            residual_sq += cell
                * fib
                    .iter()
                    .flat_map(|r| r.iter())
                    .map(|c| c * c)
                    .sum::<f64>();
            let mut k = 0;
            loop {
                idx[k] += 1;
                if idx[k] < res {
                    break;
                }
                idx[k] = 0;
                k += 1;
                if k == self.d {
                    break 'outer;
                }
            }
        }
        (coeffs, residual_sq.max(0.0).sqrt())
    }

    /// ⟨u, v⟩_s for closed-form one-forms by quadrature.
    pub fn sobolev_inner_closed(&self, u: &TrigOneForm, v: &TrigOneForm) -> f64 {
        let res = self.quad_resolution(u).max(self.quad_resolution(v));
        l2_inner(
            self.d,
            &u.apply_sobolev_weight(self.p),
            &v.apply_sobolev_weight(self.p),
            res,
        )
    }

    fn quad_resolution(&self, omega: &TrigOneForm) -> usize {
        let mut max_freq = 1i32;
        for (s, _, _) in &omega.comps {
            for t in &s.terms {
                for &c in &t.n {
                    max_freq = max_freq.max(c.abs());
                }
            }
        }
        for m in &self.modes {
            for &c in &m.n {
                max_freq = max_freq.max(c.abs());
            }
        }
        (4 * max_freq as usize + 4).max(8)
    }

    /// CSV summary: one row per mode.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,n1,n2,n3,dir,phase,gen,lambda,weight,sup_norm\n");
        for m in &self.modes {
            let phase = match m.phase {
                Phase::Cos => "cos",
                Phase::Sin => "sin",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{:.17e},{:.17e}\n",
                m.index, m.n[0], m.n[1], m.n[2], m.dir, phase, m.gen, m.lambda, m.weight,
                m.sup_norm
            ));
        }
        out
    }
}

fn enumerate_box<F: FnMut(&[i64; 3])>(d: usize, m: i64, n: &mut [i64; 3], f: &mut F) {
    fn rec<F: FnMut(&[i64; 3])>(d: usize, m: i64, axis: usize, n: &mut [i64; 3], f: &mut F) {
        if axis == d {
            f(n);
            return;
        }
        for c in -m..=m {
            n[axis] = c;
            rec(d, m, axis + 1, n, f);
        }
        n[axis] = 0;
    }
    rec(d, m, 0, n, f);
}

/// Number of modes sharing eigenvalue λ (full eigenspace dimension).
pub fn count_modes_at(d: usize, g_dim: usize, lambda: f64) -> usize {
    let lam = lambda.round() as i64;
    let m = (lambda.sqrt() as i64) + 1;
    let mut lattice = 0usize;
    let mut n = [0i64; 3];
    enumerate_box(d, m, &mut n, &mut |n| {
        let s: i64 = n.iter().take(d).map(|&c| c * c).sum();
        if s == lam {
            lattice += 1;
        }
    });
    lattice * d * g_dim
}

/// Closed upper bound on Σ‖e_i‖_∞² over un-built modes i > k.
///
/// Uses the counting bound N(λ) ≤ dg(2√λ+1)^d to get λ_i ≥ ((i/dg)^{1/d}−1)²/4
/// and an integral comparison; infinite when 4p ≤ d.
pub fn unbuilt_tail_bound(d: usize, g_dim: usize, p: f64, k: usize) -> f64 {
    let dd = d as f64;
    if 4.0 * p <= dd {
        return f64::INFINITY;
    }
    let dg = (d * g_dim) as f64;
    let amp_sq = 2.0 * TAU.powf(-dd); // largest mode amplitude squared
    let mut bound = 0.0;
    let mut start = k as f64;
    if start < dg {
        bound += (dg - start) * amp_sq;
        start = dg;
    }
    // ∫_start^∞ amp²(1+λ_lb(x)^p)^{-2} dx with x = dg·u^d
    let u0 = (start / dg).powf(1.0 / dd).max(1.0);
    let u_star = (2.0 * u0).max(4.0);
    let integrand = |u: f64| {
        let lam = ((u - 1.0).max(0.0)).powi(2) / 4.0;
        dg * dd * u.powf(dd - 1.0) / (1.0 + lam.powf(p)).powi(2)
    };
    bound += amp_sq * quad::gl16_panels(integrand, u0, u_star, 64);
    // analytic continuation past u*: (1+λ^p)^{-2} ≤ (u²/16)^{-2p} for u ≥ 2
    bound += amp_sq * dg * dd * 16f64.powf(2.0 * p) * u_star.powf(dd - 4.0 * p)
        / (4.0 * p - dd);
    bound
}

fn mixed_sup_norm(d: usize, atoms: &[Atom], res: usize) -> f64 {
    let mut sup: f64 = 0.0;
    let mut idx = vec![0usize; d];
    let step = TAU / res as f64;
    loop {
        let x: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
        let mut fib = [[0.0f64; 3]; 3];
        for a in atoms {
            fib[a.dir][a.gen] += a.term.eval(&x);
        }
        let norm_sq: f64 = fib.iter().flat_map(|r| r.iter()).map(|c| c * c).sum();
        sup = sup.max(norm_sq.sqrt());
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < res {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == d {
                return sup;
            }
        }
    }
}

const ROTATION_STREAM: u64 = 0x5057_4f52;

fn random_orthogonal(m: usize, seed: u64) -> Vec<Vec<f64>> {
    // Gram-Schmidt on counter-seeded Gaussian entries.
    let mut q: Vec<Vec<f64>> = (0..m)
        .map(|r| {
            (0..m)
                .map(|c| crate::rng::gaussian_half(seed, ROTATION_STREAM, r as u64, c as u64))
                .collect()
        })
        .collect();
    for r in 0..m {
        for prev in 0..r {
            let dot: f64 = (0..m).map(|c| q[r][c] * q[prev][c]).sum();
            for c in 0..m {
                q[r][c] -= dot * q[prev][c];
            }
        }
        let norm: f64 = (0..m).map(|c| q[r][c] * q[r][c]).sum::<f64>().sqrt();
        for c in 0..m {
            q[r][c] /= norm;
        }
    }
    q
}

/// Closed-form (trig polynomial) one-form: components over (direction,
/// generator) slots.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigOneForm {
    pub comps: Vec<(TrigScalar, usize, usize)>,
}

impl TrigOneForm {
    pub fn eval_fiber(&self, x: &[f64]) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (s, dir, gen) in &self.comps {
            out[*dir][*gen] += s.eval(x);
        }
        out
    }

    /// Applies (1+Δ^p) term-wise: each monomial scales by (1+|n|^{2p}).
    pub fn apply_sobolev_weight(&self, p: f64) -> TrigOneForm {
        TrigOneForm {
            comps: self
                .comps
                .iter()
                .map(|(s, dir, gen)| {
                    (
                        TrigScalar {
                            terms: s
                                .terms
                                .iter()
                                .map(|t| TrigTerm {
                                    amp: t.amp * (1.0 + t.lambda().powf(p)),
                                    n: t.n,
                                    phase: t.phase,
                                })
                                .collect(),
                        },
                        *dir,
                        *gen,
                    )
                })
                .collect(),
        }
    }

    /// Linear combination Σ aᵢeᵢ of basis modes as a closed form.
    pub fn from_coeffs(basis: &ModeBasis, coeffs: &[f64]) -> TrigOneForm {
        let mut comps = Vec::new();
        for (i, &a) in coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for atom in &basis.modes[i].atoms {
                comps.push((
                    TrigScalar::single(a * atom.term.amp, atom.term.n, atom.term.phase),
                    atom.dir,
                    atom.gen,
                ));
            }
        }
        TrigOneForm { comps }
    }
}

/// Plain L² pairing of closed-form one-forms by periodic-grid quadrature
/// (exact for band-limited integrands once the grid resolves all frequencies).
pub fn l2_inner(d: usize, u: &TrigOneForm, v: &TrigOneForm, res: usize) -> f64 {
    let step = TAU / res as f64;
    let cell = step.powi(d as i32);
    let mut idx = vec![0usize; d];
    let mut total = 0.0;
    loop {
        let x: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
        let fu = u.eval_fiber(&x);
        let fv = v.eval_fiber(&x);
        let mut s = 0.0;
        for dir in 0..3 {
            for gen in 0..3 {
                s += fu[dir][gen] * fv[dir][gen];
            }
        }
        total += s * cell;
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < res {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == d {
                return total;
            }
        }
    }
}
