//! Small complex matrices for structure-group numerics (dimensions 1 and 2).
//!
//! Holonomies and Lie-algebra elements here are at most 2×2, so everything is
//! stored in a fixed 2×2 array with an explicit dimension tag. Matrix
//! exponentials of anti-hermitian arguments and spectral norms have closed
//! forms at these sizes; no external linear algebra is needed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Complex matrix of dimension `dim` ∈ {1, 2} stored in a fixed 2×2 block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CMat {
    pub dim: usize,
    pub a: [[Complex64; 2]; 2],
}

impl CMat {
    pub fn zero(dim: usize) -> Self {
        assert!(dim == 1 || dim == 2, "only 1x1 and 2x2 supported");
        CMat {
            dim,
            a: [[Complex64::ZERO; 2]; 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMat::zero(dim);
        for i in 0..dim {
            m.a[i][i] = Complex64::ONE;
        }
        m
    }

    pub fn scalar(z: Complex64) -> Self {
        let mut m = CMat::zero(1);
        m.a[0][0] = z;
        m
    }

    pub fn from_rows(dim: usize, rows: [[Complex64; 2]; 2]) -> Self {
        CMat { dim, a: rows }
    }

    pub fn mul(&self, rhs: &CMat) -> CMat {
        debug_assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = CMat::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::ZERO;
                for k in 0..n {
                    s += self.a[i][k] * rhs.a[k][j];
                }
                out.a[i][j] = s;
            }
        }
        out
    }

    pub fn add(&self, rhs: &CMat) -> CMat {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut out = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.a[i][j] += rhs.a[i][j];
            }
        }
        out
    }

    pub fn sub(&self, rhs: &CMat) -> CMat {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut out = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.a[i][j] -= rhs.a[i][j];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> CMat {
        self.scale_c(Complex64::new(s, 0.0))
    }

    pub fn scale_c(&self, z: Complex64) -> CMat {
        let mut out = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.a[i][j] *= z;
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMat {
        let n = self.dim;
        let mut out = CMat::zero(n);
        for i in 0..n {
            for j in 0..n {
                out.a[i][j] = self.a[j][i].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.a[i][i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.a[i][j].norm_sqr();
            }
        }
        s.sqrt()
    }

    /// Operator (spectral) norm: largest singular value.
    ///
    /// For 2×2 the singular values come from the eigenvalues of M*M via the
    /// quadratic formula.
    pub fn op_norm(&self) -> f64 {
        if self.dim == 1 {
            return self.a[0][0].norm();
        }
        let h = self.adjoint().mul(self); // hermitian PSD
        let t = h.a[0][0].re + h.a[1][1].re;
        let det = (h.a[0][0] * h.a[1][1] - h.a[0][1] * h.a[1][0]).re;
        let half = 0.5 * t;
        let disc = (half * half - det).max(0.0).sqrt();
        (half + disc).max(0.0).sqrt()
    }

    /// ‖U*U − 1‖ in operator norm; zero for exactly unitary matrices.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint()
            .mul(self)
            .sub(&CMat::identity(self.dim))
            .op_norm()
    }

    /// Exponential of an anti-hermitian matrix (closed form).
    ///
    /// dim 1: e^{iθ}. dim 2: write A = i(c·1 + v·σ) with real c, v and use the
    /// axis-angle formula exp(A) = e^{ic}(cos|v| + i sin|v| v̂·σ).
    pub fn exp_antihermitian(&self) -> CMat {
        if self.dim == 1 {
            return CMat::scalar(self.a[0][0].exp());
        }
        // A anti-hermitian: A = i H with H hermitian. H = c·1 + v·σ.
        let h00 = (self.a[0][0] * Complex64::new(0.0, -1.0)).re;
        let h11 = (self.a[1][1] * Complex64::new(0.0, -1.0)).re;
        let h01 = self.a[0][1] * Complex64::new(0.0, -1.0);
        let c = 0.5 * (h00 + h11);
        let v3 = 0.5 * (h00 - h11);
        let v1 = h01.re;
        let v2 = -h01.im;
        let vn = (v1 * v1 + v2 * v2 + v3 * v3).sqrt();
        let (cos_v, sinc_v) = if vn < 1e-100 {
            (1.0, 1.0)
        } else {
            (vn.cos(), vn.sin() / vn)
        };
        let phase = Complex64::new(0.0, c).exp();
        let i = Complex64::new(0.0, 1.0);
        let mut out = CMat::zero(2);
        out.a[0][0] = phase * (Complex64::new(cos_v, 0.0) + i * sinc_v * v3);
        out.a[1][1] = phase * (Complex64::new(cos_v, 0.0) - i * sinc_v * v3);
        out.a[0][1] = phase * i * sinc_v * Complex64::new(v1, -v2);
        out.a[1][0] = phase * i * sinc_v * Complex64::new(v1, v2);
        out
    }

    /// Nearest unitary via polar decomposition M(M*M)^{-1/2}.
    pub fn polar_unitary(&self) -> CMat {
        if self.dim == 1 {
            let z = self.a[0][0];
            let n = z.norm();
            return CMat::scalar(if n == 0.0 { Complex64::ONE } else { z / n });
        }
        // Newton iteration X ← (X + X^{-*})/2 converges quadratically to the
        // unitary polar factor for well-conditioned input.
        let mut x = *self;
        for _ in 0..40 {
            let xi = x.inverse().adjoint();
            let next = x.add(&xi).scale(0.5);
            let step = next.sub(&x).frobenius_norm();
            x = next;
            if step < 1e-16 {
                break;
            }
        }
        x
    }

    pub fn inverse(&self) -> CMat {
        if self.dim == 1 {
            return CMat::scalar(Complex64::ONE / self.a[0][0]);
        }
        let det = self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0];
        let mut out = CMat::zero(2);
        out.a[0][0] = self.a[1][1] / det;
        out.a[1][1] = self.a[0][0] / det;
        out.a[0][1] = -self.a[0][1] / det;
        out.a[1][0] = -self.a[1][0] / det;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn su2_gen(k: usize) -> CMat {
        // (i/√2)σ_k
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let i = Complex64::new(0.0, s);
        let mut m = CMat::zero(2);
        match k {
            1 => {
                m.a[0][1] = i;
                m.a[1][0] = i;
            }
            2 => {
                m.a[0][1] = Complex64::new(s, 0.0);
                m.a[1][0] = Complex64::new(-s, 0.0);
            }
            _ => {
                m.a[0][0] = i;
                m.a[1][1] = -i;
            }
        }
        m
    }

    #[test]
    fn exp_of_diagonal_generator_is_diagonal_phase() {
        let beta = 0.37;
        let u = su2_gen(3).scale(beta * 2.0 * std::f64::consts::PI).exp_antihermitian();
        let expect = (std::f64::consts::PI * beta * std::f64::consts::SQRT_2).sin();
        assert!((u.a[0][0].im - expect).abs() < 1e-14);
        assert!(u.unitarity_defect() < 1e-14);
    }

    #[test]
    fn exp_matches_taylor_series_for_random_antihermitian() {
        // exp via closed form vs scaled-and-squared Taylor
        for seed in 0..20u64 {
            let r = |k: u64| ((seed * 37 + k * 101) % 1000) as f64 / 500.0 - 1.0;
            let a = su2_gen(1)
                .scale(r(1))
                .add(&su2_gen(2).scale(r(2)))
                .add(&su2_gen(3).scale(r(3)));
            let closed = a.exp_antihermitian();
            // Taylor with scaling by 2^10
            let small = a.scale(1.0 / 1024.0);
            let mut term = CMat::identity(2);
            let mut sum = CMat::identity(2);
            for k in 1..20 {
                term = term.mul(&small).scale(1.0 / k as f64);
                sum = sum.add(&term);
            }
            let mut sq = sum;
            for _ in 0..10 {
                sq = sq.mul(&sq);
            }
            assert!(closed.sub(&sq).op_norm() < 1e-12);
        }
    }

    #[test]
    fn op_norm_agrees_with_power_iteration() {
        let m = CMat::from_rows(
            2,
            [
                [Complex64::new(1.0, 2.0), Complex64::new(-0.3, 0.4)],
                [Complex64::new(0.0, -1.1), Complex64::new(0.7, 0.0)],
            ],
        );
        // power iteration on M*M
        let h = m.adjoint().mul(&m);
        let mut v = [Complex64::ONE, Complex64::new(0.3, 0.1)];
        let mut lam = 0.0;
        for _ in 0..200 {
            let w = [
                h.a[0][0] * v[0] + h.a[0][1] * v[1],
                h.a[1][0] * v[0] + h.a[1][1] * v[1],
            ];
            lam = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
            v = [w[0] / lam, w[1] / lam];
        }
        assert!((m.op_norm() - lam.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn polar_projection_restores_unitarity() {
        let u = su2_gen(2).scale(0.9).exp_antihermitian();
        let perturbed = u.scale(1.0 + 1e-4);
        let proj = perturbed.polar_unitary();
        assert!(proj.unitarity_defect() < 1e-13);
        assert!(proj.sub(&u).op_norm() < 1e-3);
    }
}
