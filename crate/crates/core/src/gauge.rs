//! Structure groups, connection evaluation, and holonomy.
//!
//! Holonomies solve the matrix ODE U′(t) = A(γ(t))(γ′(t))·U(t), U(a) = 1, by
//! classical fourth-order steps with step doubling until the result is stable
//! and unitary at the requested tolerance. A perturbing one-form ω admits an
//! expansion of the holonomy to second order with explicit remainder bounds;
//! the expansion terms are integrated alongside the propagator so that both
//! sides of every bound check share one integration route.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cmat::CMat;
use crate::error::{Error, Result};
use crate::geometry::PathCurve;
use crate::spectrum::ModeBasis;

/// Structure group tag: U(1) in the defining 1-dim representation or SU(2)
/// in the defining 2-dim representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupTag {
    U1,
    Su2,
}

impl GroupTag {
    /// Representation dimension j.
    pub fn rep_dim(self) -> usize {
        match self {
            GroupTag::U1 => 1,
            GroupTag::Su2 => 2,
        }
    }

    /// Lie algebra dimension.
    pub fn algebra_dim(self) -> usize {
        match self {
            GroupTag::U1 => 1,
            GroupTag::Su2 => 3,
        }
    }
}

/// Generators orthonormal under tr(υ(g₁*)υ(g₂)).
///
/// U(1): T = i·1. SU(2): T_a = (i/√2)σ_a, a = 1, 2, 3.
#[derive(Debug, Clone)]
pub struct GroupSpec {
    pub tag: GroupTag,
    pub generators: Vec<CMat>,
}

impl GroupSpec {
    pub fn new(tag: GroupTag) -> Self {
        let i = Complex64::new(0.0, 1.0);
        let generators = match tag {
            GroupTag::U1 => vec![CMat::scalar(i)],
            GroupTag::Su2 => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let mut t1 = CMat::zero(2);
                t1.a[0][1] = Complex64::new(0.0, s);
                t1.a[1][0] = Complex64::new(0.0, s);
                let mut t2 = CMat::zero(2);
                t2.a[0][1] = Complex64::new(s, 0.0);
                t2.a[1][0] = Complex64::new(-s, 0.0);
                let mut t3 = CMat::zero(2);
                t3.a[0][0] = Complex64::new(0.0, s);
                t3.a[1][1] = Complex64::new(0.0, -s);
                vec![t1, t2, t3]
            }
        };
        GroupSpec { tag, generators }
    }

    pub fn rep_dim(&self) -> usize {
        self.tag.rep_dim()
    }

    /// Assemble Σ c_a T_a.
    pub fn algebra_element(&self, coeffs: &[f64; 3]) -> CMat {
        let mut m = CMat::zero(self.rep_dim());
        for (a, t) in self.generators.iter().enumerate() {
            if coeffs[a] != 0.0 {
                m = m.add(&t.scale(coeffs[a]));
            }
        }
        m
    }
}

/// A point of connection space: base coefficients for the reference
/// connection plus fluctuation coefficients, both in the e-basis.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConnectionSample {
    pub base: Vec<f64>,
    pub fluct: Vec<f64>,
}

impl ConnectionSample {
    pub fn zero() -> Self {
        ConnectionSample::default()
    }

    pub fn from_base(base: Vec<f64>) -> Self {
        ConnectionSample {
            base,
            fluct: Vec::new(),
        }
    }

    pub fn from_fluct(fluct: Vec<f64>) -> Self {
        ConnectionSample {
            base: Vec::new(),
            fluct,
        }
    }

    pub fn coeff(&self, i: usize) -> f64 {
        self.base.get(i).copied().unwrap_or(0.0) + self.fluct.get(i).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> usize {
        self.base.len().max(self.fluct.len())
    }
}

/// Pointwise evaluation Σᵢ xᵢ eᵢ(x)(v) as a Lie-algebra matrix.
pub fn evaluate_connection(
    basis: &ModeBasis,
    group: &GroupSpec,
    conn: &ConnectionSample,
    x: &[f64],
    v: &[f64],
) -> CMat {
    let mut coeffs = [0.0; 3];
    for i in 0..conn.support().min(basis.len()) {
        let c = conn.coeff(i);
        if c == 0.0 {
            continue;
        }
        let g = basis.eval_pairing(i, x, v);
        for a in 0..3 {
            coeffs[a] += c * g[a];
        }
    }
    group.algebra_element(&coeffs)
}

/// Group-valued holonomy along a path with integration diagnostics.
#[derive(Debug, Clone)]
pub struct HolonomyValue {
    pub matrix: CMat,
    pub path_length: f64,
    pub achieved_tol: f64,
    /// Whether a polar projection was applied (unitarity defect > 1e−12).
    pub projected: bool,
}

const HOLONOMY_MAX_STEPS: usize = 1 << 18;

/// Holonomy of the connection along the path, solved as a matrix ODE.
pub fn holonomy(
    basis: &ModeBasis,
    conn: &ConnectionSample,
    path: &PathCurve,
    tol: f64,
) -> Result<HolonomyValue> {
    let group = GroupSpec::new(basis.group);
    let rhs = |t: f64, u: &CMat| -> CMat {
        let x = path.lift(t);
        let v = path.deriv(t);
        evaluate_connection(basis, &group, conn, &x, &v).mul(u)
    };
    let boundaries = path.boundaries_in_domain();
    let mut n = 32usize;
    let mut prev = propagate(&rhs, &boundaries, group.rep_dim(), n);
    loop {
        n *= 2;
        if n > HOLONOMY_MAX_STEPS {
            return Err(Error::Integration(format!(
                "holonomy integration at tol {tol} exceeded {HOLONOMY_MAX_STEPS} steps"
            )));
        }
        let next = propagate(&rhs, &boundaries, group.rep_dim(), n);
        let diff = next.sub(&prev).op_norm();
        let defect = next.unitarity_defect();
        if diff < tol && defect < tol.max(1e-12) {
            let projected = defect > 1e-12;
            let matrix = if projected { next.polar_unitary() } else { next };
            return Ok(HolonomyValue {
                matrix,
                path_length: path.arc_length(1e-10),
                achieved_tol: diff,
                projected,
            });
        }
        prev = next;
    }
}

/// RK4 over each inter-boundary interval with steps pro-rated by length.
fn propagate<F: Fn(f64, &CMat) -> CMat>(
    rhs: &F,
    boundaries: &[f64],
    dim: usize,
    total_steps: usize,
) -> CMat {
    let total_len: f64 = boundaries.last().unwrap() - boundaries.first().unwrap();
    let mut u = CMat::identity(dim);
    for w in boundaries.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let frac = if total_len > 0.0 {
            (b - a) / total_len
        } else {
            1.0
        };
        let n = ((total_steps as f64 * frac).ceil() as usize).max(4);
        let h = (b - a) / n as f64;
        for s in 0..n {
            let t = a + s as f64 * h;
            let k1 = rhs(t, &u);
            let k2 = rhs(t + 0.5 * h, &u.add(&k1.scale(0.5 * h)));
            let k3 = rhs(t + 0.5 * h, &u.add(&k2.scale(0.5 * h)));
            let k4 = rhs(t + h, &u.add(&k3.scale(h)));
            u = u.add(
                &k1.add(&k2.scale(2.0))
                    .add(&k3.scale(2.0))
                    .add(&k4)
                    .scale(h / 6.0),
            );
        }
    }
    u
}

/// For U(1) connections the path-ordered exponential collapses: returns the
/// real phase φ with Hol = e^{iφ}, computed from per-mode line integrals.
pub fn abelian_phase(line_integrals: &[[f64; 3]], conn: &ConnectionSample) -> f64 {
    line_integrals
        .iter()
        .enumerate()
        .map(|(i, c)| conn.coeff(i) * c[0])
        .sum()
}

/// The three leading expansion terms of Hol(p, ∇+ω) in powers of ω:
/// order 0 the unperturbed holonomy, order 1 the single insertion integral,
/// order 2 the ordered double insertion.
pub fn dyson_terms(
    basis: &ModeBasis,
    conn: &ConnectionSample,
    omega: &[f64],
    path: &PathCurve,
    tol: f64,
) -> Result<[CMat; 3]> {
    if !path.is_arc_length(1e-8) {
        return Err(Error::Domain(
            "expansion terms require an arc-length parametrized path".into(),
        ));
    }
    let group = GroupSpec::new(basis.group);
    let j = group.rep_dim();
    let omega_conn = ConnectionSample::from_fluct(omega.to_vec());
    let a_mat = |t: f64| -> (CMat, CMat) {
        let x = path.lift(t);
        let v = path.deriv(t);
        (
            evaluate_connection(basis, &group, conn, &x, &v),
            evaluate_connection(basis, &group, &omega_conn, &x, &v),
        )
    };
    // Augmented system over (U, S, Y):
    //   U' = A U,  S' = W,  Y' = W S,  with W = U⁻¹ ω(γ') U.
    // Then T1 = U(b)·S(b) and T2 = U(b)·Y(b).
    let rhs = |t: f64, state: &[CMat; 3]| -> [CMat; 3] {
        let (a, w_raw) = a_mat(t);
        let u_inv = state[0].inverse();
        let w = u_inv.mul(&w_raw).mul(&state[0]);
        [a.mul(&state[0]), w, w.mul(&state[1])]
    };
    let boundaries = path.boundaries_in_domain();
    let mut n = 32usize;
    let mut prev = propagate3(&rhs, &boundaries, j, n);
    loop {
        n *= 2;
        if n > HOLONOMY_MAX_STEPS {
            return Err(Error::Integration(
                "expansion-term integration did not converge".into(),
            ));
        }
        let next = propagate3(&rhs, &boundaries, j, n);
        let diff = (0..3)
            .map(|k| next[k].sub(&prev[k]).op_norm())
            .fold(0.0f64, f64::max);
        if diff < tol {
            let u_end = next[0];
            return Ok([
                u_end,
                u_end.mul(&next[1]),
                u_end.mul(&next[2]),
            ]);
        }
        prev = next;
    }
}

fn propagate3<F: Fn(f64, &[CMat; 3]) -> [CMat; 3]>(
    rhs: &F,
    boundaries: &[f64],
    dim: usize,
    total_steps: usize,
) -> [CMat; 3] {
    let total_len: f64 = boundaries.last().unwrap() - boundaries.first().unwrap();
    let mut y = [CMat::identity(dim), CMat::zero(dim), CMat::zero(dim)];
    let add = |a: &[CMat; 3], b: &[CMat; 3], s: f64| -> [CMat; 3] {
        [
            a[0].add(&b[0].scale(s)),
            a[1].add(&b[1].scale(s)),
            a[2].add(&b[2].scale(s)),
        ]
    };
    for w in boundaries.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let frac = if total_len > 0.0 {
            (b - a) / total_len
        } else {
            1.0
        };
        let n = ((total_steps as f64 * frac).ceil() as usize).max(4);
        let h = (b - a) / n as f64;
        for s in 0..n {
            let t = a + s as f64 * h;
            let k1 = rhs(t, &y);
            let k2 = rhs(t + 0.5 * h, &add(&y, &k1, 0.5 * h));
            let k3 = rhs(t + 0.5 * h, &add(&y, &k2, 0.5 * h));
            let k4 = rhs(t + h, &add(&y, &k3, h));
            for i in 0..3 {
                y[i] = y[i].add(
                    &k1[i]
                        .add(&k2[i].scale(2.0))
                        .add(&k3[i].scale(2.0))
                        .add(&k4[i])
                        .scale(h / 6.0),
                );
            }
        }
    }
    y
}

/// Remainder bound for truncating the expansion after second order.
///
/// For x = ‖ω‖_∞|p| ≤ 1 the cubic bound ½x³ applies; outside that regime the
/// always-valid Taylor bound x³e^x/6 is returned instead.
pub fn dyson_remainder_bound(omega_sup: f64, path_len: f64) -> f64 {
    let x = omega_sup * path_len;
    if x <= 1.0 {
        0.5 * x.powi(3)
    } else {
        x.powi(3) * x.exp() / 6.0
    }
}

/// Norm bounds for the order-1 and order-2 expansion terms:
/// (‖ω‖_∞|p|, ½(‖ω‖_∞|p|)²).
pub fn term_bounds(omega_sup: f64, path_len: f64) -> (f64, f64) {
    let x = omega_sup * path_len;
    (x, 0.5 * x * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TAU;

    fn u1_basis(k: usize) -> ModeBasis {
        ModeBasis::build(1, GroupTag::U1, 1.0, k).unwrap()
    }

    fn su2_basis(k: usize) -> ModeBasis {
        ModeBasis::build(1, GroupTag::Su2, 1.0, k).unwrap()
    }

    #[test]
    fn zero_connection_gives_identity() {
        let basis = u1_basis(4);
        let path = PathCurve::circle_loop(1, 0, &[]).unwrap();
        let h = holonomy(&basis, &ConnectionSample::zero(), &path, 1e-10).unwrap();
        assert!(h.matrix.sub(&CMat::identity(1)).op_norm() < 1e-12);
    }

    #[test]
    fn constant_u1_connection_matches_closed_form() {
        // A = α T dθ realized as the harmonic mode with coefficient α√(2π).
        let basis = u1_basis(1);
        let alpha = 0.25;
        let conn = ConnectionSample::from_fluct(vec![alpha * TAU.sqrt()]);
        let path = PathCurve::circle_loop(1, 0, &[]).unwrap();
        let h = holonomy(&basis, &conn, &path, 1e-12).unwrap();
        // full-circle holonomy exp(2πα T); α = 1/4 multiplies by i
        assert!((h.matrix.a[0][0] - Complex64::new(0.0, 1.0)).norm() < 1e-11);
    }

    #[test]
    fn constant_su2_connection_matches_commuting_closed_form() {
        let basis = su2_basis(3);
        // generators are ordered per mode `gen`; pick T₃ via gen = 2
        let idx = basis
            .modes()
            .iter()
            .position(|m| m.lambda == 0.0 && m.gen == 2)
            .unwrap();
        let beta = 0.37;
        let mut fluct = vec![0.0; basis.len()];
        fluct[idx] = beta * TAU.sqrt();
        let conn = ConnectionSample::from_fluct(fluct);
        let path = PathCurve::circle_loop(1, 0, &[]).unwrap();
        let h = holonomy(&basis, &conn, &path, 1e-12).unwrap();
        let ang = std::f64::consts::PI * beta * std::f64::consts::SQRT_2;
        let expect = CMat::from_rows(
            2,
            [
                [Complex64::new(ang.cos(), ang.sin()), Complex64::ZERO],
                [Complex64::ZERO, Complex64::new(ang.cos(), -ang.sin())],
            ],
        );
        assert!(h.matrix.sub(&expect).op_norm() < 1e-11);
        assert!(h.matrix.unitarity_defect() < 1e-11);
    }

    #[test]
    fn abelian_holonomy_equals_exponential_of_line_integral() {
        let basis = u1_basis(8);
        let path = PathCurve::axis_arc(1, 0, &[0.3], 2.4).unwrap();
        let conn = ConnectionSample::from_fluct(vec![0.4, -0.9, 0.55, 0.2, -0.3, 0.8, 0.1, -0.6]);
        let h = holonomy(&basis, &conn, &path, 1e-11).unwrap();
        let phase = abelian_phase(&basis.line_integrals(8, &path, 1e-12), &conn);
        assert!((h.matrix.a[0][0] - Complex64::new(0.0, phase).exp()).norm() < 1e-10);
    }

    #[test]
    fn reversal_gives_adjoint_and_composition_is_ordered() {
        let basis = su2_basis(9);
        let conn = ConnectionSample::from_fluct(
            (0..9).map(|i| 0.3 * ((i * 7 % 5) as f64 - 2.0)).collect(),
        );
        let path = PathCurve::axis_arc(1, 0, &[], 3.0).unwrap();
        let h = holonomy(&basis, &conn, &path, 1e-11).unwrap();
        let rev = holonomy(&basis, &conn, &path.reversed().unwrap(), 1e-11).unwrap();
        assert!(rev.matrix.sub(&h.matrix.adjoint()).op_norm() < 1e-10);

        // composition: splitting the arc multiplies later-part · earlier-part
        let first = holonomy(
            &basis,
            &conn,
            &PathCurve::axis_arc(1, 0, &[], 1.7).unwrap(),
            1e-11,
        )
        .unwrap();
        let second = holonomy(
            &basis,
            &conn,
            &PathCurve::axis_arc(1, 0, &[1.7], 1.3).unwrap(),
            1e-11,
        )
        .unwrap();
        assert!(second.matrix.mul(&first.matrix).sub(&h.matrix).op_norm() < 1e-10);
    }

    #[test]
    fn holonomy_is_reparametrization_invariant() {
        let basis = su2_basis(9);
        let conn = ConnectionSample::from_fluct(
            (0..9).map(|i| 0.25 * (((i * 11) % 7) as f64 - 3.0)).collect(),
        );
        let path = PathCurve::from_segments(vec![crate::geometry::Segment::trig1(
            vec![crate::geometry::Trig1d {
                c0: 0.0,
                c1: 1.0,
                harmonics: vec![(1.0, 0.3, 0.0)],
            }],
            0.0,
            TAU,
        )])
        .unwrap();
        let h = holonomy(&basis, &conn, &path, 1e-11).unwrap();
        // analytic monotone reparametrization m(u) = u + 0.1 sin u
        let rep = path
            .reparametrized(crate::geometry::Trig1d {
                c0: 0.0,
                c1: 1.0,
                harmonics: vec![(1.0, 0.0, 0.1)],
            })
            .unwrap();
        let h_rep = holonomy(&basis, &conn, &rep, 1e-11).unwrap();
        assert!(h.matrix.sub(&h_rep.matrix).op_norm() < 1e-8);
        // arc-length reparametrization
        let al = path.to_arc_length(512).unwrap();
        let h_al = holonomy(&basis, &conn, &al, 1e-10).unwrap();
        assert!(h.matrix.sub(&h_al.matrix).op_norm() < 1e-8);
    }

    #[test]
    fn expansion_with_zero_perturbation_is_bare_holonomy() {
        let basis = su2_basis(6);
        let conn = ConnectionSample::from_fluct(vec![0.3, -0.2, 0.5, 0.0, 0.1, -0.4]);
        let path = PathCurve::axis_arc(1, 0, &[], 2.0).unwrap();
        let omega = vec![0.0; 6];
        let terms = dyson_terms(&basis, &conn, &omega, &path, 1e-10).unwrap();
        let h = holonomy(&basis, &conn, &path, 1e-10).unwrap();
        assert!(terms[0].sub(&h.matrix).op_norm() < 1e-9);
        assert!(terms[1].op_norm() < 1e-12);
        assert!(terms[2].op_norm() < 1e-12);
    }

    #[test]
    fn abelian_expansion_collapses_to_powers() {
        let basis = u1_basis(1);
        let alpha = 0.15;
        let omega = vec![alpha * TAU.sqrt()];
        let path = PathCurve::circle_loop(1, 0, &[]).unwrap();
        let terms = dyson_terms(&basis, &ConnectionSample::zero(), &omega, &path, 1e-11).unwrap();
        let x = Complex64::new(0.0, TAU * alpha); // 2πα T
        assert!((terms[0].a[0][0] - Complex64::ONE).norm() < 1e-10);
        assert!((terms[1].a[0][0] - x).norm() < 1e-10);
        assert!((terms[2].a[0][0] - 0.5 * x * x).norm() < 1e-10);
    }

    #[test]
    fn order_one_term_is_odd_in_omega() {
        let basis = su2_basis(6);
        let conn = ConnectionSample::from_fluct(vec![0.2, 0.0, -0.3, 0.1, 0.0, 0.25]);
        let omega: Vec<f64> = vec![0.05, -0.1, 0.2, 0.0, 0.15, -0.05];
        let neg: Vec<f64> = omega.iter().map(|x| -x).collect();
        let path = PathCurve::axis_arc(1, 0, &[], 1.5).unwrap();
        let t_pos = dyson_terms(&basis, &conn, &omega, &path, 1e-10).unwrap();
        let t_neg = dyson_terms(&basis, &conn, &neg, &path, 1e-10).unwrap();
        assert!(t_pos[1].add(&t_neg[1]).op_norm() < 1e-9);
        assert!(t_pos[2].sub(&t_neg[2]).op_norm() < 1e-9);
    }

    #[test]
    fn remainder_bound_formula_values() {
        assert!((dyson_remainder_bound(0.25, 2.0) - 0.0625).abs() < 1e-15);
        assert_eq!(dyson_remainder_bound(0.0, 5.0), 0.0);
        assert!((dyson_remainder_bound(0.5, 2.0) - 0.5).abs() < 1e-15);
        // out of regime: Taylor bound x³e^x/6
        let x: f64 = 1.5;
        assert!((dyson_remainder_bound(1.5, 1.0) - x.powi(3) * x.exp() / 6.0).abs() < 1e-12);
    }

    #[test]
    fn term_bounds_formula_values() {
        let (b1, b2) = term_bounds(0.3, 2.0);
        assert!((b1 - 0.6).abs() < 1e-15);
        assert!((b2 - 0.18).abs() < 1e-15);
        assert_eq!(term_bounds(0.0, 7.0), (0.0, 0.0));
    }

    #[test]
    fn connection_evaluation_is_linear_and_normalized() {
        let basis = u1_basis(1);
        let group = GroupSpec::new(GroupTag::U1);
        let zero = evaluate_connection(
            &basis,
            &group,
            &ConnectionSample::zero(),
            &[0.0],
            &[1.0],
        );
        assert_eq!(zero.op_norm(), 0.0);
        let one = evaluate_connection(
            &basis,
            &group,
            &ConnectionSample::from_fluct(vec![1.0]),
            &[0.5],
            &[1.0],
        );
        // single harmonic mode at x₁ = 1 against ∂_θ: (2π)^{-1/2}·T
        assert!((one.a[0][0] - Complex64::new(0.0, TAU.powf(-0.5))).norm() < 1e-14);
        let two = evaluate_connection(
            &basis,
            &group,
            &ConnectionSample::from_fluct(vec![2.0]),
            &[0.5],
            &[1.0],
        );
        assert!(two.sub(&one.scale(2.0)).op_norm() < 1e-15);
    }

    #[test]
    fn expansion_obeys_remainder_and_term_bounds_on_random_su2() {
        let basis = su2_basis(9);
        let path_len = 1.6;
        let path = PathCurve::axis_arc(1, 0, &[], path_len).unwrap();
        for trial in 0..20u64 {
            let r = |k: u64| {
                2.0 * crate::rng::uniform(0xD150, trial, k, 0) - 1.0
            };
            let conn =
                ConnectionSample::from_fluct((0..9).map(|i| 0.8 * r(i as u64)).collect());
            let raw: Vec<f64> = (9..18).map(|i| r(i as u64)).collect();
            let sup_raw = basis.sup_norm_one_form(&raw, 4096);
            // scale so that x = ‖ω‖_∞ |p| lands in (0.1, 1)
            let target = 0.1 + 0.9 * crate::rng::uniform(0xD151, trial, 0, 0);
            let scale = target / (sup_raw * path_len);
            let omega: Vec<f64> = raw.iter().map(|c| c * scale).collect();
            let sup = basis.sup_norm_one_form(&omega, 4096);
            let x = sup * path_len;

            let terms = dyson_terms(&basis, &conn, &omega, &path, 1e-10).unwrap();
            let mut perturbed = conn.clone();
            perturbed
                .fluct
                .iter_mut()
                .zip(&omega)
                .for_each(|(c, o)| *c += o);
            let h = holonomy(&basis, &perturbed, &path, 1e-11).unwrap();
            let remainder = h
                .matrix
                .sub(&terms[0])
                .sub(&terms[1])
                .sub(&terms[2])
                .op_norm();
            assert!(
                remainder <= dyson_remainder_bound(sup, path_len) + 1e-9,
                "trial {trial}: remainder {remainder} > bound {} (x = {x})",
                dyson_remainder_bound(sup, path_len)
            );
            let (b1, b2) = term_bounds(sup, path_len);
            assert!(terms[1].op_norm() <= b1 + 1e-9);
            assert!(terms[2].op_norm() <= b2 + 1e-9);
        }
    }
}
