//! Piecewise closed-form curves on the torus with arc-length machinery.
//!
//! Segments are either straight lines in lifted (un-wrapped) coordinates or
//! per-coordinate trigonometric polynomials in the parameter. Both have
//! analytic derivatives. A curve can carry a parameter map, which is how
//! arc-length reparametrization and test reparametrizations are realized.

use serde::{Deserialize, Serialize};

use super::TorusPoint;
use crate::error::{Error, Result};
use crate::quad;

/// One coordinate of a trig segment: u(t) = c0 + c1·t + Σ (a cos(ft) + b sin(ft)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trig1d {
    pub c0: f64,
    pub c1: f64,
    /// (frequency, cos amplitude, sin amplitude)
    pub harmonics: Vec<(f64, f64, f64)>,
}

impl Trig1d {
    pub fn eval(&self, t: f64) -> f64 {
        let mut u = self.c0 + self.c1 * t;
        for &(f, a, b) in &self.harmonics {
            u += a * (f * t).cos() + b * (f * t).sin();
        }
        u
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let mut u = self.c1;
        for &(f, a, b) in &self.harmonics {
            u += -a * f * (f * t).sin() + b * f * (f * t).cos();
        }
        u
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    /// Straight line in lifted coordinates over parameter range [t0, t1].
    Line {
        from: Vec<f64>,
        to: Vec<f64>,
        t0: f64,
        t1: f64,
    },
    /// Coordinates given by trig polynomials of the parameter.
    Trig {
        comps: Vec<Trig1d>,
        t0: f64,
        t1: f64,
    },
}

impl Segment {
    pub fn trig1(comps: Vec<Trig1d>, t0: f64, t1: f64) -> Segment {
        Segment::Trig { comps, t0, t1 }
    }

    fn range(&self) -> (f64, f64) {
        match self {
            Segment::Line { t0, t1, .. } | Segment::Trig { t0, t1, .. } => (*t0, *t1),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Segment::Line { from, .. } => from.len(),
            Segment::Trig { comps, .. } => comps.len(),
        }
    }

    fn lift(&self, t: f64) -> Vec<f64> {
        match self {
            Segment::Line { from, to, t0, t1 } => {
                let s = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
                from.iter()
                    .zip(to)
                    .map(|(&a, &b)| a + s * (b - a))
                    .collect()
            }
            Segment::Trig { comps, .. } => comps.iter().map(|c| c.eval(t)).collect(),
        }
    }

    fn deriv(&self, t: f64) -> Vec<f64> {
        match self {
            Segment::Line { from, to, t0, t1 } => {
                let inv = if t1 > t0 { 1.0 / (t1 - t0) } else { 0.0 };
                from.iter().zip(to).map(|(&a, &b)| (b - a) * inv).collect()
            }
            Segment::Trig { comps, .. } => comps.iter().map(|c| c.deriv(t)).collect(),
        }
    }
}

/// Monotone reparametrization applied on top of the segments.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamMap {
    /// New parameter is arc length in [0, |p|]; the table inverts s ↦ t.
    ArcLength(ArcTable),
    /// Analytic monotone map m: new domain → old domain.
    Trig(Trig1d),
}

/// Cumulative arc-length table with Newton refinement for the inverse map.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcTable {
    ts: Vec<f64>,
    ss: Vec<f64>,
}

impl ArcTable {
    fn total(&self) -> f64 {
        *self.ss.last().unwrap()
    }

    fn to_inner(&self, curve: &PathCurve, s: f64) -> f64 {
        let s = s.clamp(0.0, self.total());
        let idx = match self
            .ss
            .binary_search_by(|v| v.partial_cmp(&s).unwrap())
        {
            Ok(i) => i.min(self.ss.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.ss.len() - 2),
        };
        let (t_lo, t_hi) = (self.ts[idx], self.ts[idx + 1]);
        let s_lo = self.ss[idx];
        // Newton on g(t) = s_lo + ∫_{t_lo}^t |γ'| − s, with g'(t) = |γ'(t)|.
        let mut t = t_lo + (t_hi - t_lo) * (s - s_lo) / (self.ss[idx + 1] - s_lo).max(1e-300);
        for _ in 0..6 {
            let g = s_lo + quad::gl16(|u| curve.speed_raw(u), t_lo, t) - s;
            let sp = curve.speed_raw(t).max(1e-300);
            let step = g / sp;
            t -= step;
            t = t.clamp(t_lo, t_hi);
            if step.abs() < 1e-15 * (1.0 + t.abs()) {
                break;
            }
        }
        t
    }

    fn speed_factor(&self, curve: &PathCurve, t_inner: f64) -> f64 {
        1.0 / curve.speed_raw(t_inner).max(1e-300)
    }
}

/// Piecewise-C¹ parametrized curve on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct PathCurve {
    segments: Vec<Segment>,
    map: Option<ParamMap>,
}

impl PathCurve {
    pub fn from_segments(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Domain("curve needs at least one segment".into()));
        }
        let d = segments[0].dim();
        if d == 0 || d > 3 {
            return Err(Error::Domain(format!("curve dimension {d} out of range")));
        }
        for w in segments.windows(2) {
            let (_, b_prev) = w[0].range();
            let (a_next, _) = w[1].range();
            if (b_prev - a_next).abs() > 1e-12 {
                return Err(Error::Domain(
                    "segment parameter ranges are not contiguous".into(),
                ));
            }
            if w[1].dim() != d {
                return Err(Error::Domain("segment dimensions differ".into()));
            }
            let p = TorusPoint::new(&w[0].lift(b_prev))?;
            let q = TorusPoint::new(&w[1].lift(a_next))?;
            if p.distance(&q) > 1e-9 {
                return Err(Error::Domain(format!(
                    "discontinuity at segment joint: gap {:.3e}",
                    p.distance(&q)
                )));
            }
        }
        for s in &segments {
            let (a, b) = s.range();
            if !(b > a) && segments.len() > 1 {
                return Err(Error::Domain("empty segment range".into()));
            }
        }
        Ok(PathCurve {
            segments,
            map: None,
        })
    }

    /// Loop winding once around coordinate `axis`, other coordinates fixed.
    /// Parametrized at unit speed on [0, 2π].
    pub fn circle_loop(d: usize, axis: usize, base: &[f64]) -> Result<Self> {
        let tau = super::TAU;
        let mut from = vec![0.0; d];
        for (k, &b) in base.iter().enumerate() {
            if k < d {
                from[k] = b;
            }
        }
        let mut to = from.clone();
        to[axis] += tau;
        PathCurve::from_segments(vec![Segment::Line {
            from,
            to,
            t0: 0.0,
            t1: tau,
        }])
    }

    /// Open unit-speed arc of length `len` along coordinate `axis`.
    pub fn axis_arc(d: usize, axis: usize, base: &[f64], len: f64) -> Result<Self> {
        let mut from = vec![0.0; d];
        for (k, &b) in base.iter().enumerate() {
            if k < d {
                from[k] = b;
            }
        }
        let mut to = from.clone();
        to[axis] += len;
        PathCurve::from_segments(vec![Segment::Line {
            from,
            to,
            t0: 0.0,
            t1: len,
        }])
    }

    /// Trivial path sitting at a single point (parameter domain [0, 1]).
    pub fn point(x: &[f64]) -> Result<Self> {
        PathCurve::from_segments(vec![Segment::Line {
            from: x.to_vec(),
            to: x.to_vec(),
            t0: 0.0,
            t1: 1.0,
        }])
    }

    /// Axis-aligned square loop of side `eps` in the (mu, nu) plane at `x`,
    /// traversed at unit speed on [0, 4ε].
    pub fn square_loop(x: &[f64], mu: usize, nu: usize, eps: f64) -> Result<Self> {
        let p0 = x.to_vec();
        let mut p1 = x.to_vec();
        p1[mu] += eps;
        let mut p2 = p1.clone();
        p2[nu] += eps;
        let mut p3 = x.to_vec();
        p3[nu] += eps;
        let p4 = x.to_vec();
        PathCurve::from_segments(vec![
            Segment::Line {
                from: p0.clone(),
                to: p1.clone(),
                t0: 0.0,
                t1: eps,
            },
            Segment::Line {
                from: p1,
                to: p2.clone(),
                t0: eps,
                t1: 2.0 * eps,
            },
            Segment::Line {
                from: p2,
                to: p3.clone(),
                t0: 2.0 * eps,
                t1: 3.0 * eps,
            },
            Segment::Line {
                from: p3,
                to: p4,
                t0: 3.0 * eps,
                t1: 4.0 * eps,
            },
        ])
    }

    pub fn dim(&self) -> usize {
        self.segments[0].dim()
    }

    pub fn domain(&self) -> (f64, f64) {
        match &self.map {
            Some(ParamMap::ArcLength(tab)) => (0.0, tab.total()),
            _ => {
                let a = self.segments.first().unwrap().range().0;
                let b = self.segments.last().unwrap().range().1;
                (a, b)
            }
        }
    }

    pub fn segment_boundaries(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.segments.iter().map(|s| s.range().0).collect();
        v.push(self.segments.last().unwrap().range().1);
        v
    }

    /// Segment breakpoints expressed in the curve's own parameter (inverts
    /// any parameter map); quadratures split here to keep integrands smooth.
    pub fn boundaries_in_domain(&self) -> Vec<f64> {
        let inner = self.segment_boundaries();
        match &self.map {
            None => inner,
            Some(_) => {
                let (a, b) = self.domain();
                let mut out = vec![a];
                for &t_star in &inner[1..inner.len() - 1] {
                    // bisection on the monotone map u ↦ inner(u)
                    let (mut lo, mut hi) = (a, b);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        if self.inner_param(mid).0 < t_star {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    out.push(0.5 * (lo + hi));
                }
                out.push(b);
                out
            }
        }
    }

    fn segment_at(&self, t: f64) -> &Segment {
        for s in &self.segments {
            if t <= s.range().1 {
                return s;
            }
        }
        self.segments.last().unwrap()
    }

    fn lift_raw(&self, t: f64) -> Vec<f64> {
        self.segment_at(t).lift(t)
    }

    fn deriv_raw(&self, t: f64) -> Vec<f64> {
        self.segment_at(t).deriv(t)
    }

    fn speed_raw(&self, t: f64) -> f64 {
        self.deriv_raw(t).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn inner_param(&self, t: f64) -> (f64, f64) {
        match &self.map {
            None => (t, 1.0),
            Some(ParamMap::ArcLength(tab)) => {
                let u = tab.to_inner(self, t);
                (u, tab.speed_factor(self, u))
            }
            Some(ParamMap::Trig(m)) => (m.eval(t), m.deriv(t)),
        }
    }

    pub fn eval(&self, t: f64) -> TorusPoint {
        let (u, _) = self.inner_param(t);
        TorusPoint::new(&self.lift_raw(u)).expect("dimension validated at construction")
    }

    /// Lifted (un-wrapped) coordinates; useful for plotting and oracles.
    pub fn lift(&self, t: f64) -> Vec<f64> {
        let (u, _) = self.inner_param(t);
        self.lift_raw(u)
    }

    pub fn deriv(&self, t: f64) -> Vec<f64> {
        let (u, factor) = self.inner_param(t);
        self.deriv_raw(u).iter().map(|v| v * factor).collect()
    }

    /// Total arc length by panel-doubling quadrature of |γ'|.
    pub fn arc_length(&self, rel_tol: f64) -> f64 {
        let mut total = 0.0;
        for s in &self.segments {
            let (a, b) = s.range();
            total += quad::adaptive_gl(|t| s.deriv(t).iter().map(|v| v * v).sum::<f64>().sqrt(),
                a, b, rel_tol);
        }
        total
    }

    pub fn is_arc_length(&self, tol: f64) -> bool {
        let (a, b) = self.domain();
        let n = 64;
        (0..=n).all(|k| {
            let t = a + (b - a) * k as f64 / n as f64;
            (self.deriv(t).iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs() < tol
        })
    }

    /// Reparametrize by arc length; the result has domain [0, |p|].
    pub fn to_arc_length(&self, knots_per_segment: usize) -> Result<Self> {
        if self.map.is_some() {
            return Err(Error::Domain(
                "curve already carries a parameter map".into(),
            ));
        }
        let mut ts = Vec::new();
        let mut ss = Vec::new();
        let mut acc = 0.0;
        for (si, seg) in self.segments.iter().enumerate() {
            let (a, b) = seg.range();
            let n = knots_per_segment.max(8);
            for k in 0..=n {
                if si > 0 && k == 0 {
                    continue;
                }
                let t = a + (b - a) * k as f64 / n as f64;
                if k > 0 {
                    let t_prev = a + (b - a) * (k - 1) as f64 / n as f64;
                    acc += quad::gl16(
                        |u| seg.deriv(u).iter().map(|v| v * v).sum::<f64>().sqrt(),
                        t_prev,
                        t,
                    );
                }
                ts.push(t);
                ss.push(acc);
            }
        }
        Ok(PathCurve {
            segments: self.segments.clone(),
            map: Some(ParamMap::ArcLength(ArcTable { ts, ss })),
        })
    }

    /// Apply an analytic strictly monotone reparametrization (for invariance
    /// tests). The map must send the stated new domain onto the old one.
    pub fn reparametrized(&self, map: Trig1d) -> Result<Self> {
        if self.map.is_some() {
            return Err(Error::Domain(
                "curve already carries a parameter map".into(),
            ));
        }
        Ok(PathCurve {
            segments: self.segments.clone(),
            map: Some(ParamMap::Trig(map)),
        })
    }

    /// Reversed curve (same domain, opposite orientation).
    pub fn reversed(&self) -> Result<Self> {
        let (a, b) = self.domain();
        if self.map.is_some() {
            return Err(Error::Domain("reverse before reparametrizing".into()));
        }
        let mut segs = Vec::new();
        for s in self.segments.iter().rev() {
            let (sa, sb) = s.range();
            // new parameter u on [a + b − sb, a + b − sa], old t = a + b − u
            match s {
                Segment::Line { from, to, .. } => segs.push(Segment::Line {
                    from: to.clone(),
                    to: from.clone(),
                    t0: a + b - sb,
                    t1: a + b - sa,
                }),
                Segment::Trig { comps, .. } => {
                    // u(t) built from t = a + b − u: cos(f(a+b−u)), expand into
                    // cos/sin of fu with shifted phases.
                    let mut new_comps = Vec::with_capacity(comps.len());
                    for c in comps {
                        let mut h = Vec::with_capacity(c.harmonics.len());
                        for &(f, ca, sa_) in &c.harmonics {
                            let phi = f * (a + b);
                            // ca·cos(f t)+sa·sin(f t) with t = (a+b)−u
                            // = [ca·cos φ + sa·sin φ]·cos(f u) + [ca·sin φ − sa·cos φ]·sin(f u)
                            h.push((
                                f,
                                ca * phi.cos() + sa_ * phi.sin(),
                                ca * phi.sin() - sa_ * phi.cos(),
                            ));
                        }
                        new_comps.push(Trig1d {
                            c0: c.c0 + c.c1 * (a + b),
                            c1: -c.c1,
                            harmonics: h,
                        });
                    }
                    segs.push(Segment::Trig {
                        comps: new_comps,
                        t0: a + b - sb,
                        t1: a + b - sa,
                    });
                }
            }
        }
        PathCurve::from_segments(segs)
    }
}

/// Declarative JSON form of a curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveSpec {
    pub segments: Vec<SegmentSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentSpec {
    Line {
        from: Vec<f64>,
        to: Vec<f64>,
        t0: f64,
        t1: f64,
    },
    Trig {
        components: Vec<Trig1d>,
        t0: f64,
        t1: f64,
    },
}

impl CurveSpec {
    pub fn build(&self) -> Result<PathCurve> {
        let segments = self
            .segments
            .iter()
            .map(|s| match s {
                SegmentSpec::Line { from, to, t0, t1 } => Segment::Line {
                    from: from.clone(),
                    to: to.clone(),
                    t0: *t0,
                    t1: *t1,
                },
                SegmentSpec::Trig {
                    components,
                    t0,
                    t1,
                } => Segment::Trig {
                    comps: components.clone(),
                    t0: *t0,
                    t1: *t1,
                },
            })
            .collect();
        PathCurve::from_segments(segments)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TAU;

    #[test]
    fn circle_loop_has_length_two_pi() {
        let c = PathCurve::circle_loop(2, 0, &[0.0, 1.0]).unwrap();
        assert!((c.arc_length(1e-12) - TAU).abs() < 1e-10);
        assert!(c.is_arc_length(1e-12));
    }

    #[test]
    fn arc_length_matches_integral_for_wavy_loop() {
        // γ(t) = (t, 0.3 sin t): |γ'| = √(1 + 0.09 cos² t)
        let c = PathCurve::from_segments(vec![Segment::trig1(
            vec![
                Trig1d {
                    c0: 0.0,
                    c1: 1.0,
                    harmonics: vec![],
                },
                Trig1d {
                    c0: 0.0,
                    c1: 0.0,
                    harmonics: vec![(1.0, 0.0, 0.3)],
                },
            ],
            0.0,
            TAU,
        )])
        .unwrap();
        let oracle = quad::gl16_panels(
            |t| (1.0f64 + 0.09 * t.cos() * t.cos()).sqrt(),
            0.0,
            TAU,
            64,
        );
        assert!((c.arc_length(1e-12) - oracle).abs() < 1e-10 * oracle);
    }

    #[test]
    fn arc_length_reparametrization_gives_unit_speed() {
        let c = PathCurve::from_segments(vec![Segment::trig1(
            vec![
                Trig1d {
                    c0: 0.0,
                    c1: 1.0,
                    harmonics: vec![],
                },
                Trig1d {
                    c0: 2.0,
                    c1: 0.0,
                    harmonics: vec![(1.0, 0.4, 0.0)],
                },
            ],
            0.0,
            TAU,
        )])
        .unwrap();
        let al = c.to_arc_length(256).unwrap();
        let (a, b) = al.domain();
        assert!((b - c.arc_length(1e-12)).abs() < 1e-9);
        for k in 0..=50 {
            let s = a + (b - a) * k as f64 / 50.0;
            let sp = al.deriv(s).iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((sp - 1.0).abs() < 1e-9, "speed {sp} at {s}");
        }
        // positions agree with the original curve at matched parameters
        let p = al.eval(0.0);
        let q = c.eval(0.0);
        assert!(p.distance(&q) < 1e-12);
    }

    #[test]
    fn reversal_retraces_the_same_points() {
        let c = PathCurve::from_segments(vec![Segment::trig1(
            vec![Trig1d {
                c0: 0.5,
                c1: 1.0,
                harmonics: vec![(2.0, 0.1, -0.2)],
            }],
            0.0,
            TAU,
        )])
        .unwrap();
        let r = c.reversed().unwrap();
        for k in 0..=40 {
            let t = TAU * k as f64 / 40.0;
            assert!(c.eval(t).distance(&r.eval(TAU - t)) < 1e-10);
        }
    }

    #[test]
    fn square_loop_is_closed_and_unit_speed() {
        let c = PathCurve::square_loop(&[0.3, 0.4], 0, 1, 0.2).unwrap();
        let (a, b) = c.domain();
        assert!(c.eval(a).distance(&c.eval(b)) < 1e-12);
        assert!(c.is_arc_length(1e-12));
        assert!((c.arc_length(1e-12) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn curve_spec_round_trips_through_json() {
        let spec = CurveSpec {
            segments: vec![SegmentSpec::Trig {
                components: vec![Trig1d {
                    c0: 0.0,
                    c1: 1.0,
                    harmonics: vec![(1.0, 0.0, 0.05)],
                }],
                t0: 0.0,
                t1: TAU,
            }],
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: CurveSpec = serde_json::from_str(&json).unwrap();
        let c = back.build().unwrap();
        assert!((c.eval(1.0).coords()[0] - (1.0 + 0.05 * 1.0f64.sin())).abs() < 1e-14);
    }

    #[test]
    fn unit_parameter_loops_match_sup_metric_oracle() {
        // θ(t) = 2πt vs 2πt + ε sin(2πt) on [0, 1]: the sup of
        // ε|sin u| + 2πε|cos u| is ε√(1+4π²) (dense-grid oracle).
        let eps = 1e-3;
        let mk = |e: f64| {
            PathCurve::from_segments(vec![Segment::trig1(
                vec![Trig1d {
                    c0: 0.0,
                    c1: TAU,
                    harmonics: vec![(TAU, 0.0, e)],
                }],
                0.0,
                1.0,
            )])
            .unwrap()
        };
        let d = crate::geometry::curve_distance(&mk(0.0), &mk(eps), 8192).unwrap();
        let expect = eps * (1.0 + 4.0 * std::f64::consts::PI * std::f64::consts::PI).sqrt();
        assert!((d - expect).abs() < 1e-7, "d={d} expect={expect}");
    }
}
