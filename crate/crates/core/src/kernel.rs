//! Closed-form kernels of rational functions of the free Laplacian.
//!
//! The resolvent kernel of `-Δ` at `z = -κ²` (`Re κ > 0`) is
//! `e^{-κr}/(2κ)` on the line and `e^{-κr}/(4πr)` in space. Higher powers
//! `(A - z)^{-j}` are `z`-derivatives of it, which stay in the finite family
//! `r^a κ^b e^{-κr}` because `d/dz = -(2κ)^{-1} d/dκ`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rational::RationalFn;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    One,
    Three,
}

/// `coef · r^a · κ^b · e^{-κr}`
#[derive(Debug, Clone, Copy)]
struct Term {
    coef: f64,
    a: i32,
    b: i32,
}

fn green_terms(dim: Dim, order: usize) -> Vec<Term> {
    let mut terms = match dim {
        Dim::One => vec![Term {
            coef: 0.5,
            a: 0,
            b: -1,
        }],
        Dim::Three => vec![Term {
            coef: 1.0 / (4.0 * PI),
            a: -1,
            b: 0,
        }],
    };
    for j in 1..order {
        let mut next = Vec::with_capacity(terms.len() * 2);
        for t in &terms {
            if t.b != 0 {
                next.push(Term {
                    coef: -0.5 * t.b as f64 * t.coef,
                    a: t.a,
                    b: t.b - 2,
                });
            }
            next.push(Term {
                coef: 0.5 * t.coef,
                a: t.a + 1,
                b: t.b - 1,
            });
        }
        // fold the 1/j from the Taylor coefficient in as we go
        for t in &mut next {
            t.coef /= j as f64;
        }
        terms = merge(next);
    }
    terms
}

fn merge(mut terms: Vec<Term>) -> Vec<Term> {
    terms.sort_by_key(|t| (t.a, t.b));
    let mut out: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms {
        match out.last_mut() {
            Some(l) if l.a == t.a && l.b == t.b => l.coef += t.coef,
            _ => out.push(t),
        }
    }
    out
}

fn factorial(n: i32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Kernel of `w(-Δ)` at distance `r`.
///
/// For `r > 0` only `value` is meaningful. For `r = 0` the result carries the
/// coefficient of `r^{-1}` (space only) and the polynomial-part coefficients;
/// both must cancel across everything summed at that distance before
/// `value` (the `r⁰` coefficient) is the pairing.
#[derive(Debug, Clone, Default)]
pub(crate) struct Contraction {
    pub value: C64,
    pub singular: C64,
    pub polynomial: Vec<C64>,
    /// Sum of magnitudes of everything added, for relative cancellation tests.
    pub magnitude: f64,
}

impl Contraction {
    pub fn add(&mut self, other: &Contraction, c: C64) {
        self.value += other.value * c;
        self.singular += other.singular * c;
        if self.polynomial.len() < other.polynomial.len() {
            self.polynomial
                .resize(other.polynomial.len(), C64::new(0.0, 0.0));
        }
        for (k, p) in other.polynomial.iter().enumerate() {
            self.polynomial[k] += p * c;
        }
        self.magnitude += other.magnitude * c.norm();
    }

    /// The finite pairing, or `NonIntegrable` when the `r = 0` singular parts
    /// survive.
    pub fn finish(&self, what: &str) -> Result<C64> {
        let tol = 1e-9 * self.magnitude.max(f64::MIN_POSITIVE);
        if self.singular.norm() > tol {
            return Err(Error::NonIntegrable(format!(
                "{what}: coincident-point kernel singularity does not cancel"
            )));
        }
        if self.polynomial.iter().any(|p| p.norm() > tol) {
            return Err(Error::NonIntegrable(format!(
                "{what}: weight grows too fast at high energy for point masses"
            )));
        }
        Ok(self.value)
    }
}

/// Distance from `p` to the branch cut `[0, ∞)` of `κ = √(-s)`.
fn cut_distance(p: C64) -> f64 {
    if p.re >= 0.0 {
        p.im.abs()
    } else {
        p.norm()
    }
}

/// Groups of distinct poles closer to each other than to the cut; their
/// partial-fraction coefficients would cancel catastrophically.
fn clusters(groups: &[C64]) -> Vec<Vec<usize>> {
    let n = groups.len();
    let mut label: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            let near = 0.1 * cut_distance(groups[i]).min(cut_distance(groups[j]));
            if (groups[i] - groups[j]).norm() < near {
                let (a, b) = (label[i], label[j]);
                label.iter_mut().filter(|l| **l == b).for_each(|l| *l = a);
            }
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if let Some(g) = out.iter_mut().find(|g| label[g[0]] == label[i]) {
            g.push(i);
        } else {
            out.push(vec![i]);
        }
    }
    out
}

const CONTOUR_NODES: usize = 96;

/// `(1/2πi) ∮ w(s) G_s(r) ds` around `center`, trapezoidal rule. Returns the
/// finite part and, in space at `r = 0`, the coefficient of `1/r`.
fn contour_part(dim: Dim, w: &RationalFn, r: f64, center: C64, radius: f64) -> (C64, C64, f64) {
    let mut value = C64::new(0.0, 0.0);
    let mut singular = C64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    let n = CONTOUR_NODES as f64;
    for k in 0..CONTOUR_NODES {
        let e = C64::from_polar(1.0, 2.0 * PI * k as f64 / n);
        let s = center + e * radius;
        // ds/(2πi) = radius·e dθ/(2π), dθ = 2π/n
        let ws = w.eval(s) * e * (radius / n);
        let kappa = (-s).sqrt();
        let g = match (dim, r > 0.0) {
            (Dim::One, _) => (-kappa * r).exp() / (2.0 * kappa),
            (Dim::Three, true) => (-kappa * r).exp() / (4.0 * PI * r),
            (Dim::Three, false) => {
                singular += ws / (4.0 * PI);
                -kappa / (4.0 * PI)
            }
        };
        value += ws * g;
        magnitude += (ws * g).norm();
    }
    (value, singular, magnitude)
}

/// Clusters tight enough to integrate over a circle: members, centre and
/// radius.
fn contour_groups(poles: &[C64]) -> Vec<(Vec<usize>, C64, f64)> {
    let mut out = Vec::new();
    for cl in clusters(poles) {
        if cl.len() < 2 {
            continue;
        }
        let center = cl.iter().map(|&i| poles[i]).sum::<C64>() / cl.len() as f64;
        let spread = cl
            .iter()
            .map(|&i| (poles[i] - center).norm())
            .fold(0.0, f64::max);
        let outer = poles
            .iter()
            .enumerate()
            .filter(|(i, _)| !cl.contains(i))
            .map(|(_, p)| (p - center).norm())
            .fold(cut_distance(center), f64::min);
        if spread < 0.25 * outer {
            out.push((cl, center, 0.5 * outer));
        }
    }
    out
}

/// Whether partial fractions of `w` would cancel catastrophically.
pub(crate) fn needs_contour(w: &RationalFn) -> bool {
    let poles: Vec<C64> = w.principal_parts().iter().map(|(p, _)| *p).collect();
    !contour_groups(&poles).is_empty()
}

pub(crate) fn contract(dim: Dim, w: &RationalFn, r: f64) -> Result<Contraction> {
    let mut out = Contraction::default();
    if w.is_zero() {
        return Ok(out);
    }
    for p in w.poles() {
        if p.im == 0.0 && p.re >= 0.0 {
            return Err(Error::PoleOnSpectrum(format!("{p}")));
        }
    }
    let parts = w.principal_parts();
    let poles: Vec<C64> = parts.iter().map(|(p, _)| *p).collect();
    let mut by_contour = vec![false; parts.len()];
    for (cl, center, radius) in contour_groups(&poles) {
        let (value, singular, magnitude) = contour_part(dim, w, r, center, radius);
        out.value += value;
        out.singular += singular;
        out.magnitude += magnitude;
        for &i in &cl {
            by_contour[i] = true;
        }
    }
    for (idx, (pole, coeffs)) in parts.iter().enumerate() {
        if by_contour[idx] {
            continue;
        }
        let kappa = (-pole).sqrt();
        for (j, c) in coeffs.iter().enumerate() {
            for t in green_terms(dim, j + 1) {
                let kb = kappa.powi(t.b) * t.coef * c;
                out.magnitude += kb.norm();
                if r > 0.0 {
                    out.value += kb * r.powi(t.a) * (-kappa * r).exp();
                } else {
                    if t.a == -1 {
                        out.singular += kb;
                    }
                    if t.a <= 0 {
                        let n = -t.a;
                        out.value += kb * (-kappa).powi(n) / factorial(n);
                    }
                }
            }
        }
    }
    if r == 0.0 {
        out.polynomial = w.polynomial_part();
        out.magnitude += out.polynomial.iter().map(|p| p.norm()).sum::<f64>();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn resolvent_kernels_at_minus_one() {
        let w = RationalFn::resolvent(c(-1.0, 0.0));
        let v = contract(Dim::Three, &w, 1.0).unwrap().value;
        assert!((v - c((-1.0f64).exp() / (4.0 * PI), 0.0)).norm() < 1e-15);
        let v = contract(Dim::One, &w, 2.0).unwrap().value;
        assert!((v - c(0.5 * (-2.0f64).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn squared_resolvent_on_the_line() {
        // (A + 1)^{-2} kernel is (1 + r) e^{-r} / 4
        let w = RationalFn::new(c(1.0, 0.0), vec![], vec![c(-1.0, 0.0), c(-1.0, 0.0)]);
        for r in [0.0, 0.5, 3.0] {
            let k = contract(Dim::One, &w, r).unwrap();
            let expect = (1.0 + r) * (-r).exp() / 4.0;
            assert!((k.value.re - expect).abs() < 1e-14, "{r}");
        }
    }

    #[test]
    fn nearly_coincident_poles() {
        // (A + 1)^{-1}(A + 1 + ε)^{-1} tends to the squared resolvent
        let eps = 1e-9;
        let w = RationalFn::new(c(1.0, 0.0), vec![], vec![c(-1.0, 0.0), c(-1.0 - eps, 0.0)]);
        for r in [0.0, 0.5, 3.0] {
            let k = contract(Dim::One, &w, r).unwrap();
            let expect = (1.0 + r) * (-r).exp() / 4.0;
            assert!((k.value.re - expect).abs() < 1e-8, "{r}: {}", k.value);
        }
        let k = contract(Dim::Three, &w, 0.0).unwrap();
        let v = k.finish("test").unwrap();
        // (A+1)^{-2} at r = 0 in space: 1/(8π)
        assert!((v.re - 1.0 / (8.0 * PI)).abs() < 1e-8, "{v}");
    }

    #[test]
    fn coincident_points_in_space() {
        // (A+1)^{-1} - (A+4)^{-1}: 1/r cancels, r⁰ term (2 - 1)/(4π)
        let w = RationalFn::new(c(3.0, 0.0), vec![], vec![c(-1.0, 0.0), c(-4.0, 0.0)]);
        let k = contract(Dim::Three, &w, 0.0).unwrap();
        let v = k.finish("test").unwrap();
        assert!((v.re - 1.0 / (4.0 * PI)).abs() < 1e-14);
        let r = RationalFn::resolvent(c(-1.0, 0.0));
        assert!(matches!(
            contract(Dim::Three, &r, 0.0).unwrap().finish("test"),
            Err(Error::NonIntegrable(_))
        ));
    }

    #[test]
    fn outgoing_branch_on_the_spectrum() {
        let lam: f64 = 4.0;
        let w = RationalFn::resolvent(c(lam, 1e-300));
        let v = contract(Dim::One, &w, 1.0).unwrap().value;
        // i e^{ik r} / (2k), k = 2
        let k = lam.sqrt();
        let expect = c(0.0, 1.0) * c(0.0, k).exp() / (2.0 * k);
        assert!((v - expect).norm() < 1e-14);
    }
}
