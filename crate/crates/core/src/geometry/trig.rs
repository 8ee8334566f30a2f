//! Trigonometric polynomials on the torus: finite sums of a·cos(n·x) and
//! a·sin(n·x) with integer wavevectors. Closed under partial derivatives and
//! the flat Laplacian, which keeps all field/flow calculus analytic.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Cos,
    Sin,
}

/// One monomial a·cos(n·x) or a·sin(n·x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub amp: f64,
    pub n: [i32; 3],
    pub phase: Phase,
}

impl TrigTerm {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let arg: f64 = x
            .iter()
            .enumerate()
            .map(|(mu, &c)| self.n[mu] as f64 * c)
            .sum();
        match self.phase {
            Phase::Cos => self.amp * arg.cos(),
            Phase::Sin => self.amp * arg.sin(),
        }
    }

    /// ∂/∂x_μ of the monomial, again a monomial.
    pub fn partial(&self, mu: usize) -> TrigTerm {
        let k = self.n[mu] as f64;
        match self.phase {
            Phase::Cos => TrigTerm {
                amp: -self.amp * k,
                n: self.n,
                phase: Phase::Sin,
            },
            Phase::Sin => TrigTerm {
                amp: self.amp * k,
                n: self.n,
                phase: Phase::Cos,
            },
        }
    }

    /// |n|², the (positive) flat-Laplacian eigenvalue of the monomial.
    pub fn lambda(&self) -> f64 {
        self.n.iter().map(|&k| (k as f64) * (k as f64)).sum()
    }
}

/// Finite trigonometric polynomial Σ terms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrigScalar {
    pub terms: Vec<TrigTerm>,
}

impl TrigScalar {
    pub fn constant(c: f64) -> Self {
        TrigScalar {
            terms: vec![TrigTerm {
                amp: c,
                n: [0, 0, 0],
                phase: Phase::Cos,
            }],
        }
    }

    pub fn single(amp: f64, n: [i32; 3], phase: Phase) -> Self {
        TrigScalar {
            terms: vec![TrigTerm { amp, n, phase }],
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn partial(&self, mu: usize) -> TrigScalar {
        TrigScalar {
            terms: self.terms.iter().map(|t| t.partial(mu)).collect(),
        }
    }

    /// Sup of |f| over a uniform grid with `res` points per dimension.
    pub fn sup_norm_grid(&self, d: usize, res: usize) -> f64 {
        let mut sup: f64 = 0.0;
        let mut idx = vec![0usize; d];
        let step = super::TAU / res as f64;
        loop {
            let x: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
            sup = sup.max(self.eval(&x).abs());
            // odometer increment
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_derivative_matches_finite_difference() {
        let f = TrigScalar {
            terms: vec![
                TrigTerm {
                    amp: 0.7,
                    n: [2, -1, 0],
                    phase: Phase::Cos,
                },
                TrigTerm {
                    amp: -0.3,
                    n: [0, 3, 0],
                    phase: Phase::Sin,
                },
            ],
        };
        let x = [0.4, 1.3, 0.0];
        let h = 1e-6;
        for mu in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[mu] += h;
            xm[mu] -= h;
            let fd = (f.eval(&xp) - f.eval(&xm)) / (2.0 * h);
            assert!((f.partial(mu).eval(&x) - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn sup_norm_of_single_mode_is_amplitude() {
        let f = TrigScalar::single(1.4, [3, 0, 0], Phase::Sin);
        let s = f.sup_norm_grid(1, 4096);
        assert!((s - 1.4).abs() < 1e-5);
    }
}
