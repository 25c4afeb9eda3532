//! Rational functions of one complex variable kept in factored form,
//! `scale * Π (s - zero) / Π (s - pole)`.
//!
//! These are the weights `w(A)` of the functional calculus: resolvents,
//! shifts `(A - λ)`, the regularizing factor `A (A² + 1)⁻¹` and products
//! thereof.

use crate::C64;

/// Relative distance below which a zero and a pole are treated as equal.
pub const CANCEL_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct RationalFn {
    scale: C64,
    zeros: Vec<C64>,
    poles: Vec<C64>,
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

impl RationalFn {
    pub fn new(scale: C64, zeros: Vec<C64>, poles: Vec<C64>) -> Self {
        let mut r = RationalFn {
            scale,
            zeros,
            poles,
        };
        r.cancel();
        r
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    pub fn zero() -> Self {
        Self::constant(C64::new(0.0, 0.0))
    }

    pub fn constant(c: C64) -> Self {
        RationalFn {
            scale: c,
            zeros: Vec::new(),
            poles: Vec::new(),
        }
    }

    /// `(s - z)⁻¹`
    pub fn resolvent(z: C64) -> Self {
        RationalFn {
            scale: C64::new(1.0, 0.0),
            zeros: Vec::new(),
            poles: vec![z],
        }
    }

    /// `s - λ`
    pub fn shift(lambda: C64) -> Self {
        RationalFn {
            scale: C64::new(1.0, 0.0),
            zeros: vec![lambda],
            poles: Vec::new(),
        }
    }

    /// `s / (s² + 1)`
    pub fn tau_weight() -> Self {
        RationalFn {
            scale: C64::new(1.0, 0.0),
            zeros: vec![C64::new(0.0, 0.0)],
            poles: vec![C64::new(0.0, 1.0), C64::new(0.0, -1.0)],
        }
    }

    /// `(1 + z s) / ((s - z)(s² + 1))`, the regularized resolvent weight.
    pub fn regularized_resolvent(z: C64) -> Self {
        let poles = vec![z, C64::new(0.0, 1.0), C64::new(0.0, -1.0)];
        if z.norm() == 0.0 {
            RationalFn::new(C64::new(1.0, 0.0), Vec::new(), poles)
        } else {
            RationalFn::new(z, vec![-z.inv()], poles)
        }
    }

    /// `(1 + λ s) / (s² + 1)` for real or complex λ; the numerator left after
    /// the singular factor `(s - λ)⁻¹` is split off.
    pub fn regularized_numerator(lambda: C64) -> Self {
        let poles = vec![C64::new(0.0, 1.0), C64::new(0.0, -1.0)];
        if lambda.norm() == 0.0 {
            RationalFn::new(C64::new(1.0, 0.0), Vec::new(), poles)
        } else {
            RationalFn::new(lambda, vec![-lambda.inv()], poles)
        }
    }

    pub fn scale(&self) -> C64 {
        self.scale
    }

    pub fn zeros(&self) -> &[C64] {
        &self.zeros
    }

    pub fn poles(&self) -> &[C64] {
        &self.poles
    }

    pub fn is_zero(&self) -> bool {
        self.scale.norm() == 0.0
    }

    /// Degree at infinity (`#zeros - #poles`); `None` for the zero function.
    pub fn degree(&self) -> Option<i32> {
        if self.is_zero() {
            None
        } else {
            Some(self.zeros.len() as i32 - self.poles.len() as i32)
        }
    }

    fn cancel(&mut self) {
        if self.is_zero() {
            self.zeros.clear();
            self.poles.clear();
            return;
        }
        let mut i = 0;
        while i < self.zeros.len() {
            let z = self.zeros[i];
            if let Some(j) = self.poles.iter().position(|p| close(*p, z, CANCEL_TOL)) {
                self.poles.swap_remove(j);
                self.zeros.swap_remove(i);
            } else {
                i += 1;
            }
        }
    }

    pub fn mul(&self, other: &RationalFn) -> RationalFn {
        if self.is_zero() || other.is_zero() {
            return RationalFn::zero();
        }
        let mut zeros = self.zeros.clone();
        zeros.extend_from_slice(&other.zeros);
        let mut poles = self.poles.clone();
        poles.extend_from_slice(&other.poles);
        RationalFn::new(self.scale * other.scale, zeros, poles)
    }

    pub fn scaled(&self, c: C64) -> RationalFn {
        let mut r = self.clone();
        r.scale *= c;
        if r.is_zero() {
            return RationalFn::zero();
        }
        r
    }

    /// `s ↦ conj(w(conj s))`; equals `conj ∘ w` on the real axis.
    pub fn conj(&self) -> RationalFn {
        RationalFn {
            scale: self.scale.conj(),
            zeros: self.zeros.iter().map(|z| z.conj()).collect(),
            poles: self.poles.iter().map(|p| p.conj()).collect(),
        }
    }

    pub fn eval(&self, s: C64) -> C64 {
        let mut v = self.scale;
        for z in &self.zeros {
            v *= s - z;
        }
        for p in &self.poles {
            v /= s - p;
        }
        v
    }

    pub fn eval_real(&self, s: f64) -> C64 {
        self.eval(C64::new(s, 0.0))
    }

    /// Coefficients `c_i` with `w(s) = scale · s^deg · Σ_i c_i s^{-i}` as `s → ∞`.
    pub fn series_at_infinity(&self, order: usize) -> Vec<C64> {
        // Π (1 - z u) Π (1 - p u)^{-1}, u = 1/s
        let mut coeffs = vec![C64::new(0.0, 0.0); order];
        if order == 0 {
            return coeffs;
        }
        coeffs[0] = C64::new(1.0, 0.0);
        for z in &self.zeros {
            for k in (1..order).rev() {
                let prev = coeffs[k - 1];
                coeffs[k] -= z * prev;
            }
        }
        for p in &self.poles {
            for k in 1..order {
                let prev = coeffs[k - 1];
                coeffs[k] += p * prev;
            }
        }
        coeffs
    }

    /// Principal parts of the partial-fraction expansion. Each entry is a pole
    /// `p` with coefficients `[c_1, .., c_m]` of `(s - p)^{-j}`. Poles closer
    /// than `merge_tol` (relative) are merged.
    pub fn principal_parts(&self) -> Vec<(C64, Vec<C64>)> {
        let merge_tol = 1e-12;
        let mut groups: Vec<(C64, usize)> = Vec::new();
        for p in &self.poles {
            if let Some(g) = groups.iter_mut().find(|g| close(g.0, *p, merge_tol)) {
                g.1 += 1;
            } else {
                groups.push((*p, 1));
            }
        }
        let mut out = Vec::with_capacity(groups.len());
        for (gi, &(p, m)) in groups.iter().enumerate() {
            // Taylor coefficients of h(t) = (s - p)^m w(s) at s = p + t
            let mut h = vec![C64::new(0.0, 0.0); m];
            h[0] = self.scale;
            for z in &self.zeros {
                // multiply by (p - z) + t
                let a = p - z;
                for k in (0..m).rev() {
                    let lower = if k > 0 { h[k - 1] } else { C64::new(0.0, 0.0) };
                    h[k] = h[k] * a + lower;
                }
            }
            for (gj, &(q, mq)) in groups.iter().enumerate() {
                if gj == gi {
                    continue;
                }
                // divide by ((p - q) + t)^{mq}
                let d = p - q;
                for _ in 0..mq {
                    // h / (d + t): g_k = (h_k - g_{k-1}) / d
                    let mut prev = C64::new(0.0, 0.0);
                    for k in 0..m {
                        let g = (h[k] - prev) / d;
                        h[k] = g;
                        prev = g;
                    }
                }
            }
            // coefficient of t^{-j} is h_{m-j}
            let coeffs: Vec<C64> = (1..=m).map(|j| h[m - j]).collect();
            out.push((p, coeffs));
        }
        out
    }

    /// Polynomial part coefficients `[a_0, a_1, ..]` (`a_k` multiplies `s^k`).
    pub fn polynomial_part(&self) -> Vec<C64> {
        let deg = match self.degree() {
            Some(d) if d >= 0 => d as usize,
            _ => return Vec::new(),
        };
        // w(s) - Σ principal parts is a polynomial of degree `deg`; its
        // coefficients follow from the expansion at infinity, corrected by
        // the principal parts' contributions to nonnegative powers (none).
        let series = self.series_at_infinity(deg + 1);
        (0..=deg).map(|k| self.scale * series[deg - k]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complex(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn partial_fractions_reconstruct_the_function() {
        let r = RationalFn::new(
            complex(2.0, 1.0),
            vec![complex(0.5, 0.0)],
            vec![complex(-1.0, 0.0), complex(-1.0, 0.0), complex(0.0, 2.0)],
        );
        let parts = r.principal_parts();
        for s in [complex(0.3, 0.7), complex(-4.0, 1.0), complex(10.0, -3.0)] {
            let mut v = C64::new(0.0, 0.0);
            for (p, cs) in &parts {
                for (j, c) in cs.iter().enumerate() {
                    v += c / (s - p).powi(j as i32 + 1);
                }
            }
            assert!((v - r.eval(s)).norm() < 1e-12 * (1.0 + v.norm()));
        }
    }

    #[test]
    fn polynomial_part_of_improper_function() {
        // (s - 1)(s - 2)/(s + 1) = s - 4 + 6/(s + 1)
        let r = RationalFn::new(
            C64::new(1.0, 0.0),
            vec![complex(1.0, 0.0), complex(2.0, 0.0)],
            vec![complex(-1.0, 0.0)],
        );
        let poly = r.polynomial_part();
        assert!((poly[0] - complex(-4.0, 0.0)).norm() < 1e-14);
        assert!((poly[1] - complex(1.0, 0.0)).norm() < 1e-14);
        let parts = r.principal_parts();
        assert!((parts[0].1[0] - complex(6.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn cancellation_on_multiply() {
        let shift = RationalFn::shift(complex(2.0, 0.0));
        let res = RationalFn::resolvent(complex(2.0, 0.0));
        let prod = shift.mul(&res);
        assert_eq!(prod.degree(), Some(0));
        assert!(prod.poles().is_empty());
    }

    #[test]
    fn regularized_split_identity() {
        // 1/(s - z) = s/(s² + 1) + (1 + z s)/((s - z)(s² + 1))
        let z = complex(-0.7, 0.4);
        for s in [0.5, 3.0, 40.0] {
            let lhs = RationalFn::resolvent(z).eval_real(s);
            let rhs = RationalFn::tau_weight().eval_real(s)
                + RationalFn::regularized_resolvent(z).eval_real(s);
            assert!((lhs - rhs).norm() < 1e-14);
        }
    }

    #[test]
    fn series_matches_direct_evaluation() {
        let r = RationalFn::new(
            complex(1.0, 0.0),
            vec![complex(3.0, 1.0)],
            vec![complex(-2.0, 0.0), complex(0.0, 1.0)],
        );
        let c = r.series_at_infinity(4);
        let s = complex(1e3, 0.0);
        let approx: C64 = c
            .iter()
            .enumerate()
            .map(|(i, ci)| ci * s.powi(-(i as i32)))
            .sum::<C64>()
            * s.powi(-1);
        assert!((approx - r.eval(s)).norm() < 1e-12);
    }
}
