//! Vector fields on the torus and their flows.

use serde::{Deserialize, Serialize};

use super::trig::TrigScalar;
use super::TorusPoint;
use crate::error::{Error, Result};

/// Vector field: constant (exact flows) or closed-form trig components.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorFieldSpec {
    Constant(Vec<f64>),
    ClosedForm(Vec<TrigScalar>),
}

impl VectorFieldSpec {
    pub fn dim(&self) -> usize {
        match self {
            VectorFieldSpec::Constant(v) => v.len(),
            VectorFieldSpec::ClosedForm(c) => c.len(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        match self {
            VectorFieldSpec::Constant(v) => v.clone(),
            VectorFieldSpec::ClosedForm(c) => c.iter().map(|f| f.eval(x)).collect(),
        }
    }

    /// Jacobian entries ∂X^μ/∂x^ν.
    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let d = self.dim();
        match self {
            VectorFieldSpec::Constant(_) => vec![vec![0.0; d]; d],
            VectorFieldSpec::ClosedForm(c) => (0..d)
                .map(|mu| (0..d).map(|nu| c[mu].partial(nu).eval(x)).collect())
                .collect(),
        }
    }

    pub fn divergence(&self, x: &[f64]) -> f64 {
        match self {
            VectorFieldSpec::Constant(_) => 0.0,
            VectorFieldSpec::ClosedForm(c) => c
                .iter()
                .enumerate()
                .map(|(mu, f)| f.partial(mu).eval(x))
                .sum(),
        }
    }

    /// Sup norm ‖X‖_∞ (grid evaluation for closed-form fields).
    pub fn sup_norm(&self, res: usize) -> f64 {
        match self {
            VectorFieldSpec::Constant(v) => v.iter().map(|c| c * c).sum::<f64>().sqrt(),
            VectorFieldSpec::ClosedForm(c) => {
                let d = c.len();
                let mut sup: f64 = 0.0;
                let mut idx = vec![0usize; d];
                let step = super::TAU / res as f64;
                loop {
                    let x: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
                    let v: f64 = c.iter().map(|f| f.eval(&x).powi(2)).sum::<f64>().sqrt();
                    sup = sup.max(v);
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
        }
    }

    pub fn scaled(&self, s: f64) -> VectorFieldSpec {
        match self {
            VectorFieldSpec::Constant(v) => {
                VectorFieldSpec::Constant(v.iter().map(|&c| c * s).collect())
            }
            VectorFieldSpec::ClosedForm(c) => VectorFieldSpec::ClosedForm(
                c.iter()
                    .map(|f| TrigScalar {
                        terms: f
                            .terms
                            .iter()
                            .map(|t| super::trig::TrigTerm {
                                amp: t.amp * s,
                                n: t.n,
                                phase: t.phase,
                            })
                            .collect(),
                    })
                    .collect(),
            ),
        }
    }
}

const FLOW_MAX_STEPS: usize = 1 << 22;

/// Time-t flow map exp_t(X)(x). Exact for constant fields; classical
/// fourth-order integration with step halving otherwise.
pub fn flow_map(field: &VectorFieldSpec, x: &TorusPoint, t: f64, tol: f64) -> Result<TorusPoint> {
    if !t.is_finite() {
        return Err(Error::Domain("flow time must be finite".into()));
    }
    TorusPoint::new(&flow_map_lifted(field, x.coords(), t, tol)?)
}

/// Flow in lifted coordinates (no wrapping); used to build flow curves.
pub fn flow_map_lifted(
    field: &VectorFieldSpec,
    x: &[f64],
    t: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    if field.dim() != x.len() {
        return Err(Error::Domain("field/point dimension mismatch".into()));
    }
    match field {
        VectorFieldSpec::Constant(v) => {
            Ok(x.iter().zip(v).map(|(&c, &vc)| c + t * vc).collect())
        }
        VectorFieldSpec::ClosedForm(_) => {
            let rhs = |y: &[f64], dy: &mut [f64]| {
                let v = field.eval(y);
                dy.copy_from_slice(&v);
            };
            rk4_doubling(rhs, x, t, tol)
        }
    }
}

/// Jacobian determinant of the flow map at x (volume stretch factor).
///
/// Solved through the variational equation J' = DX(γ(t))·J alongside the
/// flow; the Liouville identity det J = exp ∫ div X serves as the test oracle.
pub fn flow_density(field: &VectorFieldSpec, x: &TorusPoint, t: f64, tol: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::Domain("flow time must be finite".into()));
    }
    match field {
        VectorFieldSpec::Constant(_) => Ok(1.0),
        VectorFieldSpec::ClosedForm(_) => {
            let d = field.dim();
            // State: position (d) followed by J in row-major order (d²).
            let mut y0 = x.coords().to_vec();
            for i in 0..d {
                for j in 0..d {
                    y0.push(if i == j { 1.0 } else { 0.0 });
                }
            }
            let rhs = |y: &[f64], dy: &mut [f64]| {
                let pos = &y[..d];
                let v = field.eval(pos);
                dy[..d].copy_from_slice(&v);
                let jac = field.jacobian(pos);
                for i in 0..d {
                    for j in 0..d {
                        let mut s = 0.0;
                        for k in 0..d {
                            s += jac[i][k] * y[d + k * d + j];
                        }
                        dy[d + i * d + j] = s;
                    }
                }
            };
            let y = rk4_doubling(rhs, &y0, t, tol)?;
            Ok(det(&y[d..], d))
        }
    }
}

fn det(j: &[f64], d: usize) -> f64 {
    match d {
        1 => j[0],
        2 => j[0] * j[3] - j[1] * j[2],
        3 => {
            j[0] * (j[4] * j[8] - j[5] * j[7]) - j[1] * (j[3] * j[8] - j[5] * j[6])
                + j[2] * (j[3] * j[7] - j[4] * j[6])
        }
        _ => unreachable!(),
    }
}

/// Fixed-step RK4 with step doubling until two refinements agree within tol.
fn rk4_doubling<F: Fn(&[f64], &mut [f64])>(
    rhs: F,
    y0: &[f64],
    t: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    if t == 0.0 {
        return Ok(y0.to_vec());
    }
    let mut n = 16usize;
    let mut prev = rk4_fixed(&rhs, y0, t, n);
    loop {
        n *= 2;
        if n > FLOW_MAX_STEPS {
            return Err(Error::Integration(format!(
                "flow integration did not reach tol {tol} within {FLOW_MAX_STEPS} steps"
            )));
        }
        let next = rk4_fixed(&rhs, y0, t, n);
        let diff = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if diff < tol {
            return Ok(next);
        }
        prev = next;
    }
}

fn rk4_fixed<F: Fn(&[f64], &mut [f64])>(rhs: &F, y0: &[f64], t: f64, n: usize) -> Vec<f64> {
    let m = y0.len();
    let h = t / n as f64;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; m];
    let mut k2 = vec![0.0; m];
    let mut k3 = vec![0.0; m];
    let mut k4 = vec![0.0; m];
    let mut tmp = vec![0.0; m];
    for _ in 0..n {
        rhs(&y, &mut k1);
        for i in 0..m {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        rhs(&tmp, &mut k2);
        for i in 0..m {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        rhs(&tmp, &mut k3);
        for i in 0..m {
            tmp[i] = y[i] + h * k3[i];
        }
        rhs(&tmp, &mut k4);
        for i in 0..m {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

/// Declarative JSON form of a vector field.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    Constant { components: Vec<f64> },
    Trig { components: Vec<TrigScalar> },
}

impl FieldSpec {
    pub fn build(&self) -> Result<VectorFieldSpec> {
        let f = match self {
            FieldSpec::Constant { components } => VectorFieldSpec::Constant(components.clone()),
            FieldSpec::Trig { components } => VectorFieldSpec::ClosedForm(components.clone()),
        };
        if f.dim() == 0 || f.dim() > 3 {
            return Err(Error::Domain("field dimension out of range".into()));
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::trig::Phase;
    use crate::geometry::TAU;
    use proptest::prelude::*;

    #[test]
    fn constant_flow_is_exact_translation() {
        let x = TorusPoint::new(&[0.0, 0.0]).unwrap();
        let f = VectorFieldSpec::Constant(vec![1.0, 0.0]);
        let y = flow_map(&f, &x, std::f64::consts::PI, 1e-12).unwrap();
        assert!((y.coords()[0] - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(y.coords()[1], 0.0);
        assert_eq!(flow_density(&f, &x, 2.0, 1e-12).unwrap(), 1.0);
    }

    #[test]
    fn zero_time_flow_is_identity() {
        let x = TorusPoint::new(&[1.2, 3.4]).unwrap();
        let f = VectorFieldSpec::ClosedForm(vec![
            TrigScalar::single(1.0, [0, 1, 0], Phase::Sin),
            TrigScalar::constant(0.0),
        ]);
        let y = flow_map(&f, &x, 0.0, 1e-12).unwrap();
        assert_eq!(x, y);
        assert_eq!(flow_density(&f, &x, 0.0, 1e-12).unwrap(), 1.0);
    }

    #[test]
    fn closed_form_flow_matches_fine_step_oracle() {
        // X = (sin θ₂, 0) on T²; straight-line motion with speed sin(start θ₂).
        let f = VectorFieldSpec::ClosedForm(vec![
            TrigScalar::single(1.0, [0, 1, 0], Phase::Sin),
            TrigScalar::constant(0.0),
        ]);
        for start in [[0.0, 0.0], [1.0, 1.0], [2.5, 4.0]] {
            let x = TorusPoint::new(&start).unwrap();
            let y = flow_map(&f, &x, 1.0, 1e-10).unwrap();
            // independent fine-step oracle: classic RK4 with 2^16 fixed steps
            let mut z = start.to_vec();
            let n = 1 << 16;
            let h = 1.0 / n as f64;
            for _ in 0..n {
                let k1 = [z[1].sin(), 0.0];
                let k2 = [(z[1] + 0.5 * h * k1[1]).sin(), 0.0];
                let k3 = [(z[1] + 0.5 * h * k2[1]).sin(), 0.0];
                let k4 = [(z[1] + h * k3[1]).sin(), 0.0];
                z[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
                z[1] += 0.0;
            }
            let oracle = TorusPoint::new(&z).unwrap();
            assert!(y.distance(&oracle) < 1e-8, "flow vs oracle at {start:?}");
        }
    }

    #[test]
    fn divergence_free_field_preserves_volume() {
        // X = (sin θ₂, cos θ₁) is divergence-free but has a nontrivial Jacobian.
        let f = VectorFieldSpec::ClosedForm(vec![
            TrigScalar::single(1.0, [0, 1, 0], Phase::Sin),
            TrigScalar::single(1.0, [1, 0, 0], Phase::Cos),
        ]);
        let x = TorusPoint::new(&[0.7, 1.9]).unwrap();
        let dens = flow_density(&f, &x, 1.3, 1e-11).unwrap();
        assert!((dens - 1.0).abs() < 1e-8, "density {dens}");
    }

    #[test]
    fn density_matches_liouville_oracle_for_compressible_field() {
        // X = (sin θ₁, 0): div X = cos θ₁ ≠ 0.
        let f = VectorFieldSpec::ClosedForm(vec![
            TrigScalar::single(1.0, [1, 0, 0], Phase::Sin),
            TrigScalar::constant(0.0),
        ]);
        let x = TorusPoint::new(&[1.0, 0.0]).unwrap();
        let t = 0.8;
        let dens = flow_density(&f, &x, t, 1e-11).unwrap();
        // Liouville: det J = exp ∫₀ᵗ div X(γ(s)) ds along the trajectory.
        let n = 1 << 14;
        let h = t / n as f64;
        let mut pos = 1.0f64;
        let mut logdet = 0.0;
        for _ in 0..n {
            // midpoint rule on div, RK4 on position
            let k1 = pos.sin();
            let k2 = (pos + 0.5 * h * k1).sin();
            let k3 = (pos + 0.5 * h * k2).sin();
            let k4 = (pos + h * k3).sin();
            let mid = pos + 0.5 * h * k1;
            logdet += h * mid.cos();
            pos += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        assert!((dens - logdet.exp()).abs() < 1e-6, "dens {dens} vs {}", logdet.exp());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn flow_satisfies_group_law(
            s in -2.0f64..2.0, t in -2.0f64..2.0,
            x0 in 0.0f64..TAU, x1 in 0.0f64..TAU,
        ) {
            let f = VectorFieldSpec::ClosedForm(vec![
                TrigScalar::single(0.8, [0, 1, 0], Phase::Sin),
                TrigScalar::single(0.5, [1, 0, 0], Phase::Cos),
            ]);
            let x = TorusPoint::new(&[x0, x1]).unwrap();
            let direct = flow_map(&f, &x, s + t, 1e-11).unwrap();
            let mid = flow_map(&f, &x, t, 1e-11).unwrap();
            let composed = flow_map(&f, &mid, s, 1e-11).unwrap();
            prop_assert!(direct.distance(&composed) < 1e-8);
        }
    }
}
