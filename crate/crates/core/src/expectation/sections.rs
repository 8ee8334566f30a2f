//! Sections of the trivial ℂʲ bundle on a periodic grid, and matrix elements
//! of the flow-transport operator that moves sections along a vector field
//! while multiplying by holonomy and volume factors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{h_matrix_element, h_matrix_element_closed_u1, McParams};
use crate::error::{Error, Result};
use crate::gauge::ConnectionSample;
use crate::geometry::{flow_density, flow_map_lifted, PathCurve, Segment, TorusPoint,
    VectorFieldSpec, TAU};
use crate::hilbert::FrameState;
use crate::rng;
use crate::spectrum::ModeBasis;

/// ℂʲ-valued section sampled on a uniform periodic grid, with spectral
/// (trigonometric) interpolation for off-grid evaluation — exact for
/// band-limited sections.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionGrid {
    pub d: usize,
    pub res: usize,
    pub j: usize,
    values: Vec<Complex64>,
    coeffs: Vec<Complex64>,
}

impl SectionGrid {
    pub fn from_fn<F: FnMut(&[f64]) -> Vec<Complex64>>(
        d: usize,
        res: usize,
        j: usize,
        mut f: F,
    ) -> Result<Self> {
        if !(1..=3).contains(&d) || res < 2 || j == 0 || j > 2 {
            return Err(Error::Config("bad section grid parameters".into()));
        }
        let sites = res.pow(d as u32);
        let mut values = vec![Complex64::ZERO; sites * j];
        let step = TAU / res as f64;
        for site in 0..sites {
            let x = site_coords(site, d, res, step);
            let v = f(&x);
            if v.len() != j {
                return Err(Error::Config("section component count mismatch".into()));
            }
            values[site * j..site * j + j].copy_from_slice(&v);
        }
        let coeffs = forward_dft(&values, d, res, j);
        Ok(SectionGrid {
            d,
            res,
            j,
            values,
            coeffs,
        })
    }

    pub fn value_at_site(&self, site: usize) -> &[Complex64] {
        &self.values[site * self.j..(site + 1) * self.j]
    }

    pub fn sites(&self) -> usize {
        self.res.pow(self.d as u32)
    }

    pub fn cell_volume(&self) -> f64 {
        (TAU / self.res as f64).powi(self.d as i32)
    }

    /// Periodic-grid L² pairing ⟨u, v⟩ (trapezoid rule; exact for
    /// band-limited integrands).
    pub fn l2_inner(&self, other: &SectionGrid) -> Result<Complex64> {
        if self.d != other.d || self.res != other.res || self.j != other.j {
            return Err(Error::Domain("section grids differ in shape".into()));
        }
        let mut s = Complex64::ZERO;
        for (a, b) in self.values.iter().zip(&other.values) {
            s += a.conj() * b;
        }
        Ok(s * self.cell_volume())
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell_volume()
    }

    /// Trigonometric interpolation at an arbitrary point.
    pub fn eval(&self, x: &[f64]) -> Vec<Complex64> {
        // per-axis phase tables e^{i k̃ x_a}
        let g = self.res;
        let mut phases = Vec::with_capacity(self.d);
        for a in 0..self.d {
            let mut row = Vec::with_capacity(g);
            for k in 0..g {
                let freq = signed_freq(k, g);
                row.push(Complex64::new(0.0, freq * x[a]).exp());
            }
            phases.push(row);
        }
        let mut out = vec![Complex64::ZERO; self.j];
        for site in 0..self.sites() {
            let mut phase = Complex64::ONE;
            let mut rest = site;
            for a in 0..self.d {
                phase *= phases[a][rest % g];
                rest /= g;
            }
            for c in 0..self.j {
                out[c] += self.coeffs[site * self.j + c] * phase;
            }
        }
        out
    }

    /// Spectral partial derivative along an axis, as a new section.
    pub fn spectral_derivative(&self, axis: usize) -> SectionGrid {
        let g = self.res;
        let mut coeffs = self.coeffs.clone();
        for site in 0..self.sites() {
            let mut rest = site;
            for a in 0..self.d {
                let k = rest % g;
                rest /= g;
                if a == axis {
                    let freq = signed_freq(k, g);
                    for c in 0..self.j {
                        coeffs[site * self.j + c] *= Complex64::new(0.0, freq);
                    }
                }
            }
        }
        let values = inverse_dft(&coeffs, self.d, g, self.j);
        SectionGrid {
            d: self.d,
            res: g,
            j: self.j,
            values,
            coeffs,
        }
    }
}

fn site_coords(site: usize, d: usize, res: usize, step: f64) -> Vec<f64> {
    let mut x = Vec::with_capacity(d);
    let mut rest = site;
    for _ in 0..d {
        x.push((rest % res) as f64 * step);
        rest /= res;
    }
    x
}

fn signed_freq(k: usize, g: usize) -> f64 {
    if k <= g / 2 {
        k as f64
    } else {
        k as f64 - g as f64
    }
}

fn forward_dft(values: &[Complex64], d: usize, g: usize, j: usize) -> Vec<Complex64> {
    let mut data = values.to_vec();
    let sites = g.pow(d as u32);
    for axis in 0..d {
        let stride = g.pow(axis as u32);
        let mut out = vec![Complex64::ZERO; data.len()];
        for site in 0..sites {
            let line_pos = (site / stride) % g;
            let line_base = site - line_pos * stride;
            for k in 0..g {
                let w = Complex64::new(0.0, -TAU * (k * line_pos) as f64 / g as f64).exp();
                let dst = line_base + k * stride;
                for c in 0..j {
                    out[dst * j + c] += data[site * j + c] * w;
                }
            }
        }
        for v in &mut out {
            *v /= g as f64;
        }
        data = out;
    }
    data
}

fn inverse_dft(coeffs: &[Complex64], d: usize, g: usize, j: usize) -> Vec<Complex64> {
    let mut data = coeffs.to_vec();
    let sites = g.pow(d as u32);
    for axis in 0..d {
        let stride = g.pow(axis as u32);
        let mut out = vec![Complex64::ZERO; data.len()];
        for site in 0..sites {
            let line_pos = (site / stride) % g;
            let line_base = site - line_pos * stride;
            for k in 0..g {
                let w = Complex64::new(0.0, TAU * (k * line_pos) as f64 / g as f64).exp();
                let dst = line_base + k * stride;
                for c in 0..j {
                    out[dst * j + c] += data[site * j + c] * w;
                }
            }
        }
        data = out;
    }
    data
}

/// How the per-site holonomy matrix elements are computed.
#[derive(Debug, Clone)]
pub enum ExMethod {
    /// Exact abelian characteristic functions (U(1) only).
    ClosedU1,
    /// Monte Carlo with per-site streams.
    Mc(McParams),
}

const STREAM_SITE: u64 = 0x5349_5445;

/// Matrix element ⟨s1 ⊗ η1, e^X (s2 ⊗ η2)⟩: grid quadrature of the section
/// pairing against flow transport, volume factor, and the holonomy matrix
/// element along each integral curve. Returns (value, propagated error).
pub fn ex_matrix_element(
    basis: &ModeBasis,
    base: &ConnectionSample,
    field: &VectorFieldSpec,
    s1: &FrameState,
    eta1: &SectionGrid,
    s2: &FrameState,
    eta2: &SectionGrid,
    k: usize,
    flow_tol: f64,
    method: &ExMethod,
) -> Result<(Complex64, f64)> {
    let j = basis.group.rep_dim();
    if eta1.d != basis.d || eta2.d != basis.d || eta1.res != eta2.res || eta1.j != j
        || eta2.j != j
    {
        return Err(Error::Domain(
            "section grids incompatible with basis/group".into(),
        ));
    }
    if field.dim() != basis.d {
        return Err(Error::Domain("field dimension mismatch".into()));
    }
    let cell = eta2.cell_volume();
    let mut total = Complex64::ZERO;
    let mut var_sum = 0.0;
    let step = TAU / eta2.res as f64;
    for site in 0..eta2.sites() {
        let x = site_coords(site, basis.d, eta2.res, step);
        let y = flow_map_lifted(field, &x, 1.0, flow_tol)?;
        let density = flow_density(field, &TorusPoint::new(&x)?, 1.0, flow_tol)?;
        let curve = flow_curve(field, &x, &y, flow_tol)?;
        let (h, h_err) = match method {
            ExMethod::ClosedU1 => (
                {
                    let z = h_matrix_element_closed_u1(basis, base, s1, s2, &curve, k)?;
                    let mut m = crate::cmat::CMat::zero(1);
                    m.a[0][0] = z;
                    m
                },
                0.0,
            ),
            ExMethod::Mc(params) => {
                let site_params = McParams {
                    seed: rng::counter_word(params.seed, STREAM_SITE, site as u64, 0),
                    ..*params
                };
                let r = h_matrix_element(basis, base, s1, s2, &curve, k, &site_params)?;
                (r.value, r.mc_stderr)
            }
        };
        let eta1_y = eta1.eval(&y);
        let eta2_x = eta2.value_at_site(site);
        let mut pairing = Complex64::ZERO;
        for r in 0..j {
            for c in 0..j {
                pairing += eta1_y[r].conj() * h.a[r][c] * eta2_x[c];
            }
        }
        total += pairing * density * density * cell;
        if h_err > 0.0 {
            let a1: f64 = eta1_y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let a2: f64 = eta2_x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let scale = a1 * a2 * density * density * cell;
            var_sum += (scale * h_err).powi(2);
        }
    }
    Ok((total, var_sum.sqrt()))
}

/// Integral curve of the field from x to its time-1 image.
fn flow_curve(
    field: &VectorFieldSpec,
    x: &[f64],
    y: &[f64],
    flow_tol: f64,
) -> Result<PathCurve> {
    match field {
        VectorFieldSpec::Constant(_) => PathCurve::from_segments(vec![Segment::Line {
            from: x.to_vec(),
            to: y.to_vec(),
            t0: 0.0,
            t1: 1.0,
        }]),
        VectorFieldSpec::ClosedForm(_) => {
            // chord polyline through the integrated flow; resolution trades
            // accuracy for cost (holonomy error O(h²) along the chords)
            let n = 64;
            let mut pts = Vec::with_capacity(n + 1);
            pts.push(x.to_vec());
            for i in 1..=n {
                pts.push(flow_map_lifted(field, x, i as f64 / n as f64, flow_tol)?);
            }
            let segs: Vec<Segment> = (0..n)
                .map(|i| Segment::Line {
                    from: pts[i].clone(),
                    to: pts[i + 1].clone(),
                    t0: i as f64 / n as f64,
                    t1: (i + 1) as f64 / n as f64,
                })
                .collect();
            PathCurve::from_segments(segs)
        }
    }
}

/// Central finite difference of t ↦ ⟨s1⊗η1, e^{tX}(s2⊗η2)⟩ at 0 with one
/// Richardson halving; returns (derivative, error report).
#[allow(clippy::too_many_arguments)]
pub fn covariant_derivative_element(
    basis: &ModeBasis,
    base: &ConnectionSample,
    field: &VectorFieldSpec,
    s1: &FrameState,
    eta1: &SectionGrid,
    s2: &FrameState,
    eta2: &SectionGrid,
    k: usize,
    h_step: f64,
    flow_tol: f64,
    method: &ExMethod,
) -> Result<(Complex64, f64)> {
    if !(1e-4..=1e-1).contains(&h_step) {
        return Err(Error::Domain(format!(
            "finite-difference step {h_step} outside [1e-4, 1e-1]"
        )));
    }
    let ex_at = |t: f64| -> Result<(Complex64, f64)> {
        ex_matrix_element(
            basis,
            base,
            &field.scaled(t),
            s1,
            eta1,
            s2,
            eta2,
            k,
            flow_tol,
            method,
        )
    };
    let central = |h: f64| -> Result<(Complex64, f64)> {
        let (p, ep) = ex_at(h)?;
        let (m, em) = ex_at(-h)?;
        Ok(((p - m) / (2.0 * h), (ep + em) / (2.0 * h)))
    };
    let (d1, e1) = central(h_step)?;
    let (d2, e2) = central(0.5 * h_step)?;
    let value = (4.0 * d2 - d1) / 3.0;
    let richardson = (d2 - d1).norm() / 3.0;
    let noise = e1.max(e2);
    if noise > value.norm() && noise > 1e-6 {
        return Err(Error::InsufficientPrecision {
            estimate: value.norm(),
            stderr: noise,
        });
    }
    Ok((value, richardson + noise))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::GroupTag;

    fn band_limited(d: usize, res: usize, seed: u64) -> SectionGrid {
        SectionGrid::from_fn(d, res, 1, |x| {
            let mut v = Complex64::ZERO;
            for (t, freq) in [(0u64, 1.0), (1, 2.0), (2, 3.0)] {
                let a = rng::uniform(seed, 77, t, 0) - 0.5;
                let b = rng::uniform(seed, 77, t, 1) - 0.5;
                let arg: f64 = x.iter().sum::<f64>() * freq;
                v += Complex64::new(a * arg.cos(), b * arg.sin());
            }
            vec![v]
        })
        .unwrap()
    }

    #[test]
    fn interpolation_is_exact_for_band_limited_sections() {
        let grid = band_limited(1, 32, 5);
        // off-grid check against the defining function
        for t in [0.123, 1.77, 4.01] {
            let direct = {
                let mut v = Complex64::ZERO;
                for (tt, freq) in [(0u64, 1.0), (1, 2.0), (2, 3.0)] {
                    let a = rng::uniform(5, 77, tt, 0) - 0.5;
                    let b = rng::uniform(5, 77, tt, 1) - 0.5;
                    let arg: f64 = t * freq;
                    v += Complex64::new(a * arg.cos(), b * arg.sin());
                }
                v
            };
            let interp = grid.eval(&[t])[0];
            assert!((interp - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn spectral_derivative_matches_analytic() {
        let grid = SectionGrid::from_fn(1, 16, 1, |x| {
            vec![Complex64::new((2.0 * x[0]).cos(), x[0].sin())]
        })
        .unwrap();
        let d = grid.spectral_derivative(0);
        for t in [0.3f64, 2.1] {
            let expect = Complex64::new(-2.0 * (2.0 * t).sin(), t.cos());
            assert!((d.eval(&[t])[0] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_field_factorizes_into_state_and_section_pairings() {
        let basis = ModeBasis::build(1, GroupTag::U1, 1.0, 4).unwrap();
        let eta1 = band_limited(1, 32, 1);
        let eta2 = band_limited(1, 32, 2);
        let s1 = FrameState::coherent(vec![0.4]);
        let s2 = FrameState::new(vec![
            (Complex64::new(0.6, -0.2), vec![0.0, 0.3]),
            (Complex64::new(0.1, 0.5), vec![-0.2]),
        ]);
        let (v, err) = ex_matrix_element(
            &basis,
            &ConnectionSample::zero(),
            &VectorFieldSpec::Constant(vec![0.0]),
            &s1,
            &eta1,
            &s2,
            &eta2,
            4,
            1e-10,
            &ExMethod::ClosedU1,
        )
        .unwrap();
        let expect = crate::hilbert::u_matrix_element(&s1, &[], &s2)
            * eta1.l2_inner(&eta2).unwrap();
        assert_eq!(err, 0.0);
        assert!((v - expect).norm() < 1e-10, "{v} vs {expect}");
    }

    #[test]
    fn constant_field_without_modes_is_pure_translation() {
        let basis = ModeBasis::build(1, GroupTag::U1, 1.0, 4).unwrap();
        let eta1 = band_limited(1, 32, 3);
        let eta2 = band_limited(1, 32, 4);
        let shift = 0.83;
        let (v, _) = ex_matrix_element(
            &basis,
            &ConnectionSample::zero(),
            &VectorFieldSpec::Constant(vec![shift]),
            &FrameState::ground(),
            &eta1,
            &FrameState::ground(),
            &eta2,
            0,
            1e-10,
            &ExMethod::ClosedU1,
        )
        .unwrap();
        // Fourier-space oracle: ∫ conj(η₁(u)) η₂(u − X) du
        //   = (2π) Σ_k conj(c1_k) c2_k e^{−ik X}
        let mut oracle = Complex64::ZERO;
        for k in 0..eta1.res {
            let freq = signed_freq(k, eta1.res);
            oracle += eta1.coeffs[k].conj()
                * eta2.coeffs[k]
                * Complex64::new(0.0, -freq * shift).exp();
        }
        oracle *= TAU;
        assert!((v - oracle).norm() < 1e-10, "{v} vs {oracle}");
    }

    #[test]
    fn full_revolution_factorizes_through_the_loop_expectation() {
        let basis = ModeBasis::build(1, GroupTag::U1, 1.0, 8).unwrap();
        let eta1 = band_limited(1, 32, 6);
        let eta2 = band_limited(1, 32, 7);
        let (v, _) = ex_matrix_element(
            &basis,
            &ConnectionSample::zero(),
            &VectorFieldSpec::Constant(vec![TAU]),
            &FrameState::ground(),
            &eta1,
            &FrameState::ground(),
            &eta2,
            8,
            1e-10,
            &ExMethod::ClosedU1,
        )
        .unwrap();
        // loop holonomy expectation from the harmonic line integral only
        let loop_damp = (-0.25 * TAU).exp(); // e^{−¼ c₁²}, c₁ = √(2π)
        let expect = eta1.l2_inner(&eta2).unwrap() * loop_damp;
        assert!((v - expect).norm() < 1e-9, "{v} vs {expect}");
    }

    #[test]
    fn derivative_matches_spectral_transport_oracle() {
        // K = 0, constant X: d/dt ⟨η₁, η₂(· − tX)⟩ = ⟨η₁, −X ∂η₂⟩.
        let basis = ModeBasis::build(1, GroupTag::U1, 1.0, 2).unwrap();
        let eta1 = band_limited(1, 32, 8);
        let eta2 = band_limited(1, 32, 9);
        let x_speed = 0.9;
        let (v, err) = covariant_derivative_element(
            &basis,
            &ConnectionSample::zero(),
            &VectorFieldSpec::Constant(vec![x_speed]),
            &FrameState::ground(),
            &eta1,
            &FrameState::ground(),
            &eta2,
            0,
            1e-2,
            1e-10,
            &ExMethod::ClosedU1,
        )
        .unwrap();
        let minus_x_deta2 = eta2.spectral_derivative(0);
        let oracle = eta1.l2_inner(&minus_x_deta2).unwrap() * (-x_speed);
        assert!((v - oracle).norm() < err.max(1e-8), "{v} vs {oracle} (err {err})");
    }

    #[test]
    fn transport_is_antisymmetric_for_volume_preserving_flows() {
        let basis = ModeBasis::build(1, GroupTag::U1, 1.0, 2).unwrap();
        let eta = band_limited(1, 32, 10);
        let s = FrameState::ground();
        let (v, err) = covariant_derivative_element(
            &basis,
            &ConnectionSample::zero(),
            &VectorFieldSpec::Constant(vec![0.5]),
            &s,
            &eta,
            &s,
            &eta,
            2,
            1e-2,
            1e-10,
            &ExMethod::ClosedU1,
        )
        .unwrap();
        // ⟨ψ, ∇̂_X ψ⟩ + conj = d/dt ‖e^{tX}ψ‖² = 0
        assert!((v + v.conj()).norm() < 2.0 * err + 1e-8);
    }
}
