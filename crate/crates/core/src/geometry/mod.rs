//! Flat torus T^d = (ℝ/2πℤ)^d with the flat metric: points, closed-form
//! scalar fields, piecewise-C¹ curves, and vector-field flows.

mod curve;
mod field;
mod trig;

pub use curve::{ArcTable, CurveSpec, ParamMap, PathCurve, Segment, SegmentSpec, Trig1d};
pub use field::{flow_density, flow_map, flow_map_lifted, FieldSpec, VectorFieldSpec};
pub use trig::{Phase, TrigScalar, TrigTerm};

use crate::error::{Error, Result};

pub const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Point on the flat torus with coordinates reduced to [0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint {
    coords: Vec<f64>,
}

impl TorusPoint {
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() || coords.len() > 3 {
            return Err(Error::Domain(format!(
                "torus dimension must be 1..=3, got {}",
                coords.len()
            )));
        }
        Ok(TorusPoint {
            coords: coords.iter().map(|&c| wrap_angle(c)).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Shortest-path distance on the flat torus.
    pub fn distance(&self, other: &TorusPoint) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| {
                let d = minimal_angle(a - b);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Reduce an angle to [0, 2π).
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Minimal representative of an angle difference in (−π, π].
pub fn minimal_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > std::f64::consts::PI {
        r - TAU
    } else {
        r
    }
}

/// Sup over a configurable uniform grid of position-plus-derivative distance
/// between two curves sharing a parameter domain.
pub fn curve_distance(c1: &PathCurve, c2: &PathCurve, grid: usize) -> Result<f64> {
    let (a1, b1) = c1.domain();
    let (a2, b2) = c2.domain();
    if (a1 - a2).abs() > 1e-12 || (b1 - b2).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "parameter domains differ: [{a1}, {b1}] vs [{a2}, {b2}]"
        )));
    }
    if c1.dim() != c2.dim() {
        return Err(Error::Domain("curve dimensions differ".into()));
    }
    let mut sup: f64 = 0.0;
    for k in 0..=grid {
        let t = a1 + (b1 - a1) * k as f64 / grid as f64;
        let p = c1.eval(t).distance(&c2.eval(t));
        let d1 = c1.deriv(t);
        let d2 = c2.deriv(t);
        let dv = d1
            .iter()
            .zip(&d2)
            .map(|(&x, &y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        sup = sup.max(p + dv);
    }
    Ok(sup)
}

pub const CURVE_DISTANCE_GRID: usize = 2048;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wrap_reduces_into_fundamental_domain() {
        let p = TorusPoint::new(&[7.0, -1.0, 100.0]).unwrap();
        for &c in p.coords() {
            assert!((0.0..TAU).contains(&c));
        }
    }

    #[test]
    fn distance_uses_minimal_representative() {
        let a = TorusPoint::new(&[0.1]).unwrap();
        let b = TorusPoint::new(&[TAU - 0.1]).unwrap();
        assert!((a.distance(&b) - 0.2).abs() < 1e-14);
    }

    #[test]
    fn identical_curves_have_zero_distance() {
        let c = PathCurve::circle_loop(1, 0, &[]).unwrap();
        assert_eq!(curve_distance(&c, &c, 256).unwrap(), 0.0);
    }

    #[test]
    fn constant_offset_gives_offset_distance() {
        // θ(t) = t vs θ(t) = t + ε on [0, 2π]: equal derivatives, offset ε.
        let eps = 1e-3;
        let c1 = PathCurve::circle_loop(1, 0, &[]).unwrap();
        let c2 = PathCurve::circle_loop(1, 0, &[eps]).unwrap();
        let d = curve_distance(&c1, &c2, 512).unwrap();
        assert!((d - eps).abs() < 1e-12);
    }

    #[test]
    fn sinusoidal_perturbation_distance_matches_dense_grid_oracle() {
        // θ(t) = t vs θ(t) = t + ε sin t on [0, 2π]. The sup of
        // ε|sin t| + ε|cos t| over t is ε√2; the same dense-grid evaluation
        // with a much finer grid is the oracle.
        let eps = 1e-2;
        let c1 = PathCurve::circle_loop(1, 0, &[]).unwrap();
        let c2 = PathCurve::from_segments(vec![Segment::trig1(
            vec![Trig1d {
                c0: 0.0,
                c1: 1.0,
                harmonics: vec![(1.0, 0.0, eps)],
            }],
            0.0,
            TAU,
        )])
        .unwrap();
        let d = curve_distance(&c1, &c2, CURVE_DISTANCE_GRID).unwrap();
        // dense-grid oracle
        let mut oracle: f64 = 0.0;
        for k in 0..=65536 {
            let t = TAU * k as f64 / 65536.0;
            oracle = oracle.max(eps * (t.sin().abs() + t.cos().abs()));
        }
        assert!((d - oracle).abs() < 1e-6, "d={d} oracle={oracle}");
        assert!((oracle - eps * std::f64::consts::SQRT_2).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn triangle_inequality_on_sampled_loops(
            e1 in -0.5f64..0.5, e2 in -0.5f64..0.5, e3 in -0.5f64..0.5,
            p1 in 0.0f64..TAU, p2 in 0.0f64..TAU, p3 in 0.0f64..TAU,
        ) {
            let mk = |e: f64, p: f64| PathCurve::from_segments(vec![Segment::trig1(
                vec![Trig1d { c0: p, c1: 1.0, harmonics: vec![(2.0, e, 0.0)] }],
                0.0, TAU,
            )]).unwrap();
            let (a, b, c) = (mk(e1, p1), mk(e2, p2), mk(e3, p3));
            let dab = curve_distance(&a, &b, 128).unwrap();
            let dbc = curve_distance(&b, &c, 128).unwrap();
            let dac = curve_distance(&a, &c, 128).unwrap();
            prop_assert!(dac <= dab + dbc + 1e-12);
        }
    }
}
