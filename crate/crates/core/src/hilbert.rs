//! Coherent-state frame over the connection-space Gaussian measure.
//!
//! The ground state Φ is the product Gaussian (density e^{−x²}/√π per mode,
//! variance ½); translations act by shifting mode coefficients. States kept
//! here are finite combinations Σ cₐ U_{ωₐ}Φ, for which every operator in the
//! library has closed-form or single-integral matrix elements. A shift
//! touching only modes ≤ n is the same state at every larger cutoff, so no
//! truncation error arises inside the state space itself.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{sobolev_dot, sobolev_norm_sq};

/// Gaussian overlap ⟨U_ωΦ, U_νΦ⟩ = exp(−¼‖ν−ω‖_s²).
pub fn coherent_overlap(omega: &[f64], nu: &[f64]) -> f64 {
    let n = omega.len().max(nu.len());
    let mut s = 0.0;
    for i in 0..n {
        let d = nu.get(i).copied().unwrap_or(0.0) - omega.get(i).copied().unwrap_or(0.0);
        s += d * d;
    }
    (-0.25 * s).exp()
}

/// Finite complex combination of shifted ground states Σ cₐ U_{ωₐ}Φ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<(f64, f64, Vec<f64>)>", from = "Vec<(f64, f64, Vec<f64>)>")]
pub struct FrameState {
    terms: Vec<(Complex64, Vec<f64>)>,
}

const MERGE_TOL: f64 = 1e-12;

impl FrameState {
    /// The ground state Φ.
    pub fn ground() -> Self {
        FrameState {
            terms: vec![(Complex64::ONE, Vec::new())],
        }
    }

    /// A single coherent state U_ωΦ.
    pub fn coherent(shift: Vec<f64>) -> Self {
        FrameState::new(vec![(Complex64::ONE, shift)])
    }

    /// General combination; shifts within 1e−12 in Sobolev distance merge by
    /// amplitude addition. Trailing zero coefficients are trimmed so that a
    /// shift means the same state at every cutoff.
    pub fn new(terms: Vec<(Complex64, Vec<f64>)>) -> Self {
        let mut merged: Vec<(Complex64, Vec<f64>)> = Vec::new();
        'outer: for (amp, mut shift) in terms {
            while shift.last() == Some(&0.0) {
                shift.pop();
            }
            for (m_amp, m_shift) in &mut merged {
                let n = shift.len().max(m_shift.len());
                let mut dist_sq = 0.0;
                for i in 0..n {
                    let d = shift.get(i).copied().unwrap_or(0.0)
                        - m_shift.get(i).copied().unwrap_or(0.0);
                    dist_sq += d * d;
                }
                if dist_sq.sqrt() < MERGE_TOL {
                    *m_amp += amp;
                    continue 'outer;
                }
            }
            merged.push((amp, shift));
        }
        FrameState { terms: merged }
    }

    pub fn terms(&self) -> &[(Complex64, Vec<f64>)] {
        &self.terms
    }

    pub fn norm_sq(&self) -> f64 {
        let mut s = Complex64::ZERO;
        for (ca, oa) in &self.terms {
            for (cb, ob) in &self.terms {
                s += ca.conj() * cb * coherent_overlap(oa, ob);
            }
        }
        s.re.max(0.0)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sq();
        if n <= 0.0 {
            return Err(Error::Domain("cannot normalize a null state".into()));
        }
        let scale = 1.0 / n.sqrt();
        Ok(FrameState {
            terms: self
                .terms
                .iter()
                .map(|(c, s)| (c * scale, s.clone()))
                .collect(),
        })
    }
}

impl From<FrameState> for Vec<(f64, f64, Vec<f64>)> {
    fn from(s: FrameState) -> Self {
        s.terms
            .into_iter()
            .map(|(c, shift)| (c.re, c.im, shift))
            .collect()
    }
}

impl From<Vec<(f64, f64, Vec<f64>)>> for FrameState {
    fn from(v: Vec<(f64, f64, Vec<f64>)>) -> Self {
        FrameState::new(
            v.into_iter()
                .map(|(re, im, shift)| (Complex64::new(re, im), shift))
                .collect(),
        )
    }
}

/// Translation U_μ applied to a frame state: every shift moves by μ,
/// amplitudes unchanged (norm preserved).
pub fn apply_translation(mu: &[f64], state: &FrameState) -> FrameState {
    let terms = state
        .terms
        .iter()
        .map(|(c, shift)| {
            let n = shift.len().max(mu.len());
            let mut new_shift = Vec::with_capacity(n);
            for i in 0..n {
                new_shift
                    .push(shift.get(i).copied().unwrap_or(0.0) + mu.get(i).copied().unwrap_or(0.0));
            }
            while new_shift.last() == Some(&0.0) {
                new_shift.pop();
            }
            (*c, new_shift)
        })
        .collect();
    FrameState { terms }
}

/// ⟨s1, U_μ s2⟩ from the closed-form pairwise overlaps.
pub fn u_matrix_element(s1: &FrameState, mu: &[f64], s2: &FrameState) -> Complex64 {
    let mut out = Complex64::ZERO;
    for (ca, oa) in &s1.terms {
        for (cb, ob) in &s2.terms {
            let n = oa.len().max(ob.len()).max(mu.len());
            let mut dist_sq = 0.0;
            for i in 0..n {
                let d = ob.get(i).copied().unwrap_or(0.0) + mu.get(i).copied().unwrap_or(0.0)
                    - oa.get(i).copied().unwrap_or(0.0);
                dist_sq += d * d;
            }
            out += ca.conj() * cb * (-0.25 * dist_sq).exp();
        }
    }
    out
}

/// ⟨s1, E_μ s2⟩: the analytic t-derivative at 0 of ⟨s1, U_{tμ} s2⟩,
/// additive in μ.
pub fn e_matrix_element(s1: &FrameState, mu: &[f64], s2: &FrameState) -> Complex64 {
    let mut out = Complex64::ZERO;
    for (ca, oa) in &s1.terms {
        for (cb, ob) in &s2.terms {
            let n = oa.len().max(ob.len()).max(mu.len());
            let mut dist_sq = 0.0;
            let mut delta_dot_mu = 0.0;
            for i in 0..n {
                let d = ob.get(i).copied().unwrap_or(0.0) - oa.get(i).copied().unwrap_or(0.0);
                dist_sq += d * d;
                delta_dot_mu += d * mu.get(i).copied().unwrap_or(0.0);
            }
            out += ca.conj() * cb * (-0.5 * delta_dot_mu) * (-0.25 * dist_sq).exp();
        }
    }
    out
}

/// Ground-state two-point function ⟨E_{ω₁}Φ, E_{ω₂}Φ⟩ = ½⟨ω₁, ω₂⟩_s
/// (positive-energy sign convention).
pub fn quadratic_e_expectation(omega1: &[f64], omega2: &[f64]) -> f64 {
    0.5 * sobolev_dot(omega1, omega2)
}

/// Normalized quadratic form ⟨E_f s, E_f s⟩ / ‖s‖² for a frame state and a
/// direction f given by Sobolev coefficients; the ground-state case reduces
/// to ½⟨f, f⟩_s.
pub fn e_quadratic_form(state: &FrameState, f_coeffs: &[f64]) -> Result<f64> {
    let norm_sq = state.norm_sq();
    if norm_sq <= 0.0 {
        return Err(Error::Domain("null state".into()));
    }
    let f_norm_sq = sobolev_norm_sq(f_coeffs);
    let mut out = Complex64::ZERO;
    for (ca, oa) in &state.terms {
        for (cb, ob) in &state.terms {
            let n = oa.len().max(ob.len()).max(f_coeffs.len());
            let mut dist_sq = 0.0;
            let mut delta_dot_f = 0.0;
            for i in 0..n {
                let d = ob.get(i).copied().unwrap_or(0.0) - oa.get(i).copied().unwrap_or(0.0);
                dist_sq += d * d;
                delta_dot_f += d * f_coeffs.get(i).copied().unwrap_or(0.0);
            }
            let m = 0.5 * f_norm_sq - 0.25 * delta_dot_f * delta_dot_f;
            out += ca.conj() * cb * m * (-0.25 * dist_sq).exp();
        }
    }
    Ok(out.re / norm_sq)
}

/// Gram matrix of coherent overlaps with a spectral health report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OverlapMatrix {
    pub matrix: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub condition: f64,
    pub ill_conditioned: bool,
}

pub const GRAM_CONDITION_LIMIT: f64 = 1e12;

/// Gram matrix G_ab = exp(−¼‖ω_b − ωₐ‖_s²) over a list of shifts.
pub fn gram(shifts: &[Vec<f64>]) -> OverlapMatrix {
    let n = shifts.len();
    let mut g = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in 0..n {
            g[a][b] = coherent_overlap(&shifts[a], &shifts[b]);
        }
    }
    let mut eig = jacobi_eigenvalues(&g);
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let max = eig.last().copied().unwrap_or(1.0);
    let min = eig.first().copied().unwrap_or(1.0);
    let condition = if min.abs() < 1e-300 {
        f64::INFINITY
    } else {
        (max / min).abs()
    };
    OverlapMatrix {
        matrix: g,
        eigenvalues: eig,
        condition,
        ill_conditioned: !(condition < GRAM_CONDITION_LIMIT),
    }
}

/// Cyclic Jacobi sweeps; ample for the small symmetric matrices here.
fn jacobi_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    if n == 0 {
        return Vec::new();
    }
    let mut a: Vec<Vec<f64>> = m.to_vec();
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}
