//! Pairings, resolvents and regularity classes of A-scale vectors.
//!
//! `⟨w(A) f, g⟩` is conjugate-linear in `g`. Under the multiplication backend
//! it is a one-dimensional integral `∫ w(m(x)) f(x) conj(g(x)) dx`; under the
//! Laplace backends every vector reduces to point masses acted on by
//! rational functions of `A`, so pairings are sums of closed-form kernels.

use std::fmt;

use crate::error::{Error, Result};
use crate::kernel::{self, Contraction, Dim};
use crate::operator::{Backend, Domain, OperatorModel};
use crate::quadrature::{self, Piece};
use crate::rational::RationalFn;
use crate::vector::{Atom, Base, ScaleVector};
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Finest space of the scale containing a vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Regularity {
    Outside,
    /// `H₋₂ ∖ H₋₁`
    MinusTwo,
    /// `H₋₁ ∖ H`
    MinusOne,
    /// `H ∖ H₊₁`
    Zero,
    /// `H₊₁ ∖ H₊₂`
    PlusOne,
    /// `H₊₂`
    PlusTwo,
}

impl Regularity {
    pub fn index(self) -> i32 {
        match self {
            Regularity::Outside => -3,
            Regularity::MinusTwo => -2,
            Regularity::MinusOne => -1,
            Regularity::Zero => 0,
            Regularity::PlusOne => 1,
            Regularity::PlusTwo => 2,
        }
    }

    pub fn from_index(k: i32) -> Self {
        match k {
            i32::MIN..=-3 => Regularity::Outside,
            -2 => Regularity::MinusTwo,
            -1 => Regularity::MinusOne,
            0 => Regularity::Zero,
            1 => Regularity::PlusOne,
            _ => Regularity::PlusTwo,
        }
    }

    /// Class after applying a resolvent of `A`.
    pub fn lifted(self) -> Self {
        if self == Regularity::Outside {
            return self;
        }
        Self::from_index(self.index() + 2)
    }

    pub fn label(self) -> &'static str {
        match self {
            Regularity::Outside => "outside",
            Regularity::MinusTwo => "H-2\\H-1",
            Regularity::MinusOne => "H-1\\H",
            Regularity::Zero => "H\\H+1",
            Regularity::PlusOne => "H+1\\H+2",
            Regularity::PlusTwo => "H+2",
        }
    }
}

impl fmt::Display for Regularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// `⟨w(A) f, g⟩`.
pub fn pairing(op: &OperatorModel, f: &ScaleVector, g: &ScaleVector, w: &RationalFn) -> Result<C64> {
    f.validate()?;
    g.validate()?;
    if w.is_zero() {
        return Ok(ZERO);
    }
    match op.backend() {
        Backend::Multiplication { .. } => {
            let prep = Prepared::new(op, f, g, w)?;
            prep.integrate(op)
        }
        Backend::LaplaceLine => laplace_pairing(Dim::One, f, g, w),
        Backend::LaplaceSpace3D => laplace_pairing(Dim::Three, f, g, w),
    }
}

/// `(f, g) = ∫ f conj(g)`.
pub fn inner(op: &OperatorModel, f: &ScaleVector, g: &ScaleVector) -> Result<C64> {
    pairing(op, f, g, &RationalFn::one())
}

/// Decide whether `⟨w(A) f, g⟩` converges without computing it.
pub fn check_pairing(op: &OperatorModel, f: &ScaleVector, g: &ScaleVector, w: &RationalFn) -> Result<()> {
    f.validate()?;
    g.validate()?;
    if w.is_zero() {
        return Ok(());
    }
    match op.backend() {
        Backend::Multiplication { .. } => Prepared::new(op, f, g, w).map(|_| ()),
        Backend::LaplaceLine => laplace_pairing(Dim::One, f, g, w).map(|_| ()),
        Backend::LaplaceSpace3D => laplace_pairing(Dim::Three, f, g, w).map(|_| ()),
    }
}

/// `(A - z)⁻¹ v`.
pub fn resolvent_apply(op: &OperatorModel, z: C64, v: &ScaleVector) -> Result<ScaleVector> {
    weight_apply(op, RationalFn::resolvent(z), v)
}

/// `w(A) v`, refusing weights with poles where `v` has spectral mass. Poles
/// cancelled by zeros already carried by `v` are fine.
pub fn weight_apply(op: &OperatorModel, w: RationalFn, v: &ScaleVector) -> Result<ScaleVector> {
    v.validate()?;
    let atoms = v.atoms();
    if atoms.is_empty() {
        for p in w.poles() {
            if op.in_spectrum(*p) {
                return Err(Error::PoleOnSpectrum(format!("{p}")));
            }
        }
    }
    for a in &atoms {
        let combined = w.mul(&a.weight);
        for p in combined.poles() {
            let hits = op.in_spectrum(*p)
                && match a.window {
                    None => true,
                    Some((u, v)) => p.re >= u && p.re <= v,
                };
            if hits {
                return Err(Error::PoleOnSpectrum(format!("{p}")));
            }
        }
    }
    if op.is_laplace() {
        let dim = laplace_dim(op);
        for a in &atoms {
            to_point_mass(dim, a)?;
        }
    }
    Ok(v.clone().apply(w))
}

/// `A⁻¹ ω`.
pub fn eta(op: &OperatorModel, omega: &ScaleVector) -> Result<ScaleVector> {
    resolvent_apply(op, ZERO, omega)
}

/// `‖v‖ₖ² = ⟨(A + 1)^k v, v⟩`, `k ∈ [-2, 2]`.
pub fn scale_norm(op: &OperatorModel, v: &ScaleVector, k: i32) -> Result<f64> {
    let val = pairing(op, v, v, &scale_weight(k))?;
    Ok(val.re.max(0.0).sqrt())
}

pub fn l2_norm(op: &OperatorModel, v: &ScaleVector) -> Result<f64> {
    scale_norm(op, v, 0)
}

fn scale_weight(k: i32) -> RationalFn {
    let one = C64::new(1.0, 0.0);
    let m1 = C64::new(-1.0, 0.0);
    let n = k.unsigned_abs() as usize;
    if k >= 0 {
        RationalFn::new(one, vec![m1; n], Vec::new())
    } else {
        RationalFn::new(one, Vec::new(), vec![m1; n])
    }
}

/// Finest `k ∈ {2, 1, 0, -1, -2}` with `‖v‖ₖ < ∞`, decided from exponent
/// arithmetic (multiplication) or the closed-form kernel at zero distance
/// (Laplace); no quadrature involved.
pub fn classify_regularity(op: &OperatorModel, v: &ScaleVector) -> Result<Regularity> {
    v.validate()?;
    let atoms = v.atoms();
    if atoms.is_empty() {
        return Ok(Regularity::PlusTwo);
    }
    for a in &atoms {
        if let Base::Tabulated { values, .. } = &a.base {
            if a.window.is_none() && values.last().map_or(false, |x| x.norm() != 0.0) {
                return Err(Error::Undecidable(
                    "tabulated vector does not vanish at the end of its grid".into(),
                ));
            }
        }
    }
    for k in (-2..=2).rev() {
        match check_pairing(op, v, v, &scale_weight(k)) {
            Ok(()) => return Ok(Regularity::from_index(k)),
            Err(Error::NonIntegrable(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(Regularity::Outside)
}

/// Pointwise value of a function-valued vector on the line or half-line.
pub fn evaluate(op: &OperatorModel, v: &ScaleVector, x: f64) -> Result<C64> {
    match op.backend() {
        Backend::Multiplication { .. } => {
            let line = op.domain() == Some(Domain::Line);
            let m = op.symbol(x);
            let mut acc = ZERO;
            for a in v.atoms() {
                if let Base::Delta(_) = a.base {
                    return Err(Error::InvalidInput(
                        "point masses are not functions under the multiplication backend".into(),
                    ));
                }
                if let Some((u, w)) = a.window {
                    if m < u || m > w {
                        continue;
                    }
                }
                acc += a.coeff * a.weight.eval_real(m) * a.base.eval(x, line);
            }
            Ok(acc)
        }
        Backend::LaplaceLine => pairing(op, v, &ScaleVector::delta_line(x), &RationalFn::one()),
        Backend::LaplaceSpace3D => Err(Error::InvalidInput(
            "use evaluate_3d for the three-dimensional backend".into(),
        )),
    }
}

pub fn evaluate_3d(op: &OperatorModel, v: &ScaleVector, point: [f64; 3]) -> Result<C64> {
    match op.backend() {
        Backend::LaplaceSpace3D => pairing(op, v, &ScaleVector::delta_3d(point), &RationalFn::one()),
        _ => Err(Error::InvalidInput("evaluate_3d needs the three-dimensional backend".into())),
    }
}

// ---------------------------------------------------------------------------
// Laplace backends

fn laplace_dim(op: &OperatorModel) -> Dim {
    match op.backend() {
        Backend::LaplaceSpace3D => Dim::Three,
        _ => Dim::One,
    }
}

fn to_point_mass(dim: Dim, a: &Atom) -> Result<(C64, RationalFn, [f64; 3])> {
    if a.window.is_some() {
        return Err(Error::UnsupportedBackend(
            "spectral windows need the multiplication backend".into(),
        ));
    }
    match (&a.base, dim) {
        (Base::Delta(p), _) => Ok((a.coeff, a.weight.clone(), *p)),
        (Base::ExpAbs { c, x0 }, Dim::One) => {
            // e^{-c|x-x0|} = 2c (A + c²)⁻¹ δ_{x0}
            let w = RationalFn::new(C64::new(2.0 * c, 0.0), Vec::new(), vec![C64::new(-c * c, 0.0)]);
            Ok((a.coeff, a.weight.mul(&w), [*x0, 0.0, 0.0]))
        }
        (Base::ExpAbs { .. }, Dim::Three) => Err(Error::UnrepresentableConvolution(
            "one-dimensional exponential under the three-dimensional Laplacian".into(),
        )),
        (Base::PowerLaw { .. }, _) => Err(Error::UnrepresentableConvolution(
            "power laws have no closed-form Laplace convolution".into(),
        )),
        (Base::Tabulated { .. }, _) => Err(Error::UnrepresentableConvolution(
            "tabulated vectors have no closed-form Laplace convolution".into(),
        )),
    }
}

fn distance(dim: Dim, a: [f64; 3], b: [f64; 3]) -> f64 {
    match dim {
        Dim::One => (a[0] - b[0]).abs(),
        Dim::Three => ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt(),
    }
}

/// A point mass `coef · w(A) δ_point`.
type PointMass = (C64, RationalFn, [f64; 3]);

/// The point masses of `v`, with every weight split into partial fractions
/// and terms sharing point, pole and order merged. Differences of vectors
/// that agree analytically (resolvent identities) then cancel in the
/// coefficients rather than across the quadratic form of a pairing, which
/// would leave an error of order √ε in a norm. Weights with clustered poles
/// are kept whole.
fn point_masses(dim: Dim, v: &ScaleVector) -> Result<Vec<PointMass>> {
    struct Term {
        point: [f64; 3],
        /// `None` for the polynomial part.
        pole: Option<C64>,
        order: usize,
        coef: C64,
        size: f64,
    }
    let mut terms: Vec<Term> = Vec::new();
    let mut whole = Vec::new();
    let mut add = |point: [f64; 3], pole: Option<C64>, order: usize, coef: C64| {
        let same = |t: &Term| {
            t.point == point
                && t.order == order
                && match (t.pole, pole) {
                    (None, None) => true,
                    (Some(a), Some(b)) => (a - b).norm() <= 1e-12 * (1.0 + a.norm().max(b.norm())),
                    _ => false,
                }
        };
        match terms.iter_mut().find(|t| same(t)) {
            Some(t) => {
                t.coef += coef;
                t.size += coef.norm();
            }
            None => terms.push(Term {
                point,
                pole,
                order,
                coef,
                size: coef.norm(),
            }),
        }
    };
    for a in v.atoms() {
        let (c, w, point) = to_point_mass(dim, &a)?;
        if c.norm() == 0.0 || w.is_zero() {
            continue;
        }
        if kernel::needs_contour(&w) {
            whole.push((c, w, point));
            continue;
        }
        for (pole, coeffs) in w.principal_parts() {
            for (j, a) in coeffs.iter().enumerate() {
                add(point, Some(pole), j + 1, c * a);
            }
        }
        for (k, a) in w.polynomial_part().iter().enumerate() {
            add(point, None, k, c * a);
        }
    }
    let one = C64::new(1.0, 0.0);
    for t in terms {
        if t.coef.norm() <= 64.0 * f64::EPSILON * t.size {
            continue;
        }
        let w = match t.pole {
            Some(p) => RationalFn::new(one, Vec::new(), vec![p; t.order]),
            None => RationalFn::new(one, vec![ZERO; t.order], Vec::new()),
        };
        whole.push((t.coef, w, t.point));
    }
    Ok(whole)
}

fn laplace_pairing(dim: Dim, f: &ScaleVector, g: &ScaleVector, w: &RationalFn) -> Result<C64> {
    let fs = point_masses(dim, f)?;
    let gs = point_masses(dim, g)?;
    let mut far = ZERO;
    let mut near = Contraction::default();
    for (cf, wf, pf) in &fs {
        for (cg, wg, pg) in &gs {
            let weight = w.mul(wf).mul(&wg.conj());
            let coef = cf * cg.conj();
            let r = distance(dim, *pf, *pg);
            let k = kernel::contract(dim, &weight, r)?;
            if r > 0.0 {
                far += k.value * coef;
            } else {
                near.add(&k, coef);
            }
        }
    }
    Ok(far + near.finish("point-mass pairing")?)
}

// ---------------------------------------------------------------------------
// Multiplication backend

struct Pair {
    coef: C64,
    weight: RationalFn,
    window: Option<(f64, f64)>,
    i: usize,
    j: usize,
}

struct Prepared {
    f: Vec<Atom>,
    g: Vec<Atom>,
    pairs: Vec<Pair>,
    line: bool,
    lower: f64,
    upper: f64,
    breakpoints: Vec<f64>,
}

fn intersect(a: Option<(f64, f64)>, b: Option<(f64, f64)>) -> Option<Option<(f64, f64)>> {
    match (a, b) {
        (None, w) | (w, None) => Some(w),
        (Some((u1, v1)), Some((u2, v2))) => {
            let (u, v) = (u1.max(u2), v1.min(v2));
            if u < v {
                Some(Some((u, v)))
            } else {
                None
            }
        }
    }
}

/// Largest `|x|` where a base can be nonzero, if bounded.
fn base_extent(b: &Base) -> Option<f64> {
    match b {
        Base::Tabulated { grid, .. } => Some(grid[0].abs().max(grid[grid.len() - 1].abs())),
        _ => None,
    }
}

/// Coefficients of `x^{q-k}` in the expansion of `(x + s)^q` at ∞.
fn tail_series(b: &Base, order: usize) -> Option<Vec<f64>> {
    match b {
        Base::PowerLaw { q, s } => {
            let mut c = Vec::with_capacity(order);
            let mut binom = 1.0;
            let mut sk = 1.0;
            for k in 0..order {
                c.push(binom * sk);
                binom *= (q - k as f64) / (k as f64 + 1.0);
                sk *= s;
            }
            Some(c)
        }
        _ => None,
    }
}

impl Prepared {
    /// Atom pairs, support and breakpoints; no convergence checks.
    fn build(op: &OperatorModel, f: &ScaleVector, g: &ScaleVector, w: &RationalFn) -> Result<Self> {
        let p = op.power().expect("multiplication backend");
        let domain = op.domain().expect("multiplication backend");
        let (line, a) = match domain {
            Domain::Line => (true, 0.0),
            Domain::HalfLine(a) => (false, a),
        };
        let fa = f.atoms();
        let ga = g.atoms();
        for at in fa.iter().chain(ga.iter()) {
            match &at.base {
                Base::Delta(_) => {
                    return Err(Error::InvalidInput(
                        "point masses need a Laplace backend".into(),
                    ))
                }
                Base::PowerLaw { q, s } => {
                    if a + s < 0.0 && (q.fract() != 0.0 || *q < 0.0) {
                        return Err(Error::InvalidInput(format!(
                            "power law (x{s:+})^{q} is singular inside the domain"
                        )));
                    }
                }
                _ => {}
            }
        }
        let bottom = op.lower_bound();
        let mut pairs = Vec::new();
        for (i, fi) in fa.iter().enumerate() {
            for (j, gj) in ga.iter().enumerate() {
                let window = match intersect(fi.window, gj.window) {
                    Some(wdw) => wdw,
                    None => continue,
                };
                let weight = w.mul(&fi.weight).mul(&gj.weight.conj());
                if weight.is_zero() {
                    continue;
                }
                for pole in weight.poles() {
                    if pole.im == 0.0 && pole.re >= bottom {
                        let inside = match window {
                            None => true,
                            Some((u, v)) => pole.re >= u && pole.re <= v,
                        };
                        if inside {
                            return Err(Error::PoleOnSpectrum(format!("{pole}")));
                        }
                    }
                }
                pairs.push(Pair {
                    coef: fi.coeff * gj.coeff.conj(),
                    weight,
                    window,
                    i,
                    j,
                });
            }
        }

        // support
        let mut upper: f64 = 0.0;
        let mut bounded = true;
        for pr in &pairs {
            let from_window = pr
                .window
                .map(|(_, v)| v.powf(1.0 / p))
                .filter(|x| x.is_finite());
            let ext = [from_window, base_extent(&fa[pr.i].base), base_extent(&ga[pr.j].base)]
                .into_iter()
                .flatten()
                .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |y| y.min(x))));
            match ext {
                Some(x) => upper = upper.max(x),
                None => bounded = false,
            }
        }
        let upper = if bounded { upper.max(a) } else { f64::INFINITY };

        let prep = Prepared {
            f: fa,
            g: ga,
            pairs,
            line,
            lower: a,
            upper,
            breakpoints: Vec::new(),
        };
        let breakpoints = prep.collect_breakpoints(op, bottom);
        Ok(Prepared {
            breakpoints,
            ..prep
        })
    }

    fn new(op: &OperatorModel, f: &ScaleVector, g: &ScaleVector, w: &RationalFn) -> Result<Self> {
        let prep = Self::build(op, f, g, w)?;
        let p = op.power().expect("multiplication backend");
        prep.check_tail(p)?;
        prep.check_endpoint(p)?;
        Ok(prep)
    }

    fn check_tail(&self, p: f64) -> Result<()> {
        if self.upper.is_finite() {
            return Ok(());
        }
        // (exponent, coefficient, magnitude) of every expansion term that is
        // not integrable at infinity on its own
        let mut terms: Vec<(f64, C64, f64)> = Vec::new();
        let cutoff = -1.0 - 1e-9;
        for pr in &self.pairs {
            if pr.window.is_some() {
                continue;
            }
            let (qi, qj) = match (&self.f[pr.i].base, &self.g[pr.j].base) {
                (Base::PowerLaw { q: qi, .. }, Base::PowerLaw { q: qj, .. }) => (*qi, *qj),
                _ => continue,
            };
            let deg = pr.weight.degree().unwrap_or(i32::MIN) as f64;
            let top = qi + qj + p * deg;
            if top < cutoff {
                continue;
            }
            let span = top - cutoff;
            let kmax = span.floor() as usize + 1;
            let lmax = (span / p).floor() as usize + 1;
            let ci = tail_series(&self.f[pr.i].base, kmax).unwrap();
            let cj = tail_series(&self.g[pr.j].base, kmax).unwrap();
            let cw = pr.weight.series_at_infinity(lmax);
            let scale = pr.weight.scale() * pr.coef;
            for (ki, a) in ci.iter().enumerate() {
                for (kj, b) in cj.iter().enumerate() {
                    for (l, c) in cw.iter().enumerate() {
                        let e = top - ki as f64 - kj as f64 - p * l as f64;
                        if e < cutoff {
                            continue;
                        }
                        let v = scale * c * (a * b);
                        terms.push((e, v, v.norm()));
                    }
                }
            }
        }
        terms.sort_by(|x, y| y.0.total_cmp(&x.0));
        let mut idx = 0;
        while idx < terms.len() {
            let e = terms[idx].0;
            let mut sum = ZERO;
            let mut mag = 0.0;
            while idx < terms.len() && (terms[idx].0 - e).abs() < 1e-9 {
                sum += terms[idx].1;
                mag += terms[idx].2;
                idx += 1;
            }
            if mag > 0.0 && sum.norm() > 1e-9 * mag {
                return Err(Error::NonIntegrable(format!(
                    "integrand decays like x^{e:.4} at infinity"
                )));
            }
        }
        Ok(())
    }

    /// Power laws may only blow up at the left end of the domain (or at the
    /// origin of the line); there the local exponents must stay above -1.
    fn check_endpoint(&self, p: f64) -> Result<()> {
        let local = |b: &Base| match b {
            Base::PowerLaw { q, s } if (self.lower + s).abs() < 1e-14 && *q < 0.0 => *q,
            _ => 0.0,
        };
        let m0 = self.lower.powf(p);
        for pr in &self.pairs {
            let e = local(&self.f[pr.i].base) + local(&self.g[pr.j].base);
            let excluded = matches!(pr.window, Some((u, _)) if u > m0);
            if e <= -1.0 && !excluded {
                return Err(Error::NonIntegrable(format!(
                    "integrand behaves like |x - x₀|^{e:.4} at the domain endpoint"
                )));
            }
        }
        Ok(())
    }

    fn collect_breakpoints(&self, op: &OperatorModel, bottom: f64) -> Vec<f64> {
        let mut bp = Vec::new();
        let add_level = |lam: f64, bp: &mut Vec<f64>| {
            for x in op.preimages(lam) {
                bp.push(x.abs());
            }
        };
        for pr in &self.pairs {
            if let Some((u, v)) = pr.window {
                add_level(u, &mut bp);
                add_level(v, &mut bp);
            }
            for pole in pr.weight.poles() {
                if pole.re >= bottom {
                    add_level(pole.re, &mut bp);
                }
            }
        }
        for at in self.f.iter().chain(self.g.iter()) {
            match &at.base {
                Base::ExpAbs { x0, .. } => bp.push(*x0),
                Base::Tabulated { grid, .. } => {
                    if grid.len() <= 256 {
                        bp.extend(grid.iter().copied());
                    } else {
                        bp.push(grid[0]);
                        bp.push(grid[grid.len() - 1]);
                    }
                }
                _ => {}
            }
        }
        if self.line {
            // folded onto [0, ∞): both signs of a breakpoint map to |x|
            bp.iter_mut().for_each(|x| *x = x.abs());
        }
        bp
    }

    fn integrand(&self, op: &OperatorModel, x: f64) -> C64 {
        let m = op.symbol(x);
        let mut fv = vec![None; self.f.len()];
        let mut gv = vec![None; self.g.len()];
        let mut acc = ZERO;
        for pr in &self.pairs {
            if let Some((u, v)) = pr.window {
                if m < u || m > v {
                    continue;
                }
            }
            let a = *fv[pr.i].get_or_insert_with(|| self.f[pr.i].base.eval(x, self.line));
            let b = *gv[pr.j].get_or_insert_with(|| self.g[pr.j].base.eval(x, self.line));
            acc += pr.coef * pr.weight.eval_real(m) * a * b.conj();
        }
        acc
    }

    fn integrate(&self, op: &OperatorModel) -> Result<C64> {
        if self.pairs.is_empty() {
            return Ok(ZERO);
        }
        let pieces: Vec<Piece> = quadrature::split_pieces(self.lower, self.upper, &self.breakpoints);
        let cfg = &op.quadrature;
        let est = if self.line {
            quadrature::integrate(|x| self.integrand(op, x) + self.integrand(op, -x), &pieces, cfg)?
        } else {
            quadrature::integrate(|x| self.integrand(op, x), &pieces, cfg)?
        };
        Ok(est.value)
    }
}

/// Boundary values of `⟨w(A)(A - λ ∓ i0)⁻¹ f, g⟩` split as
/// `PV ∫ w(m) f ḡ / (m - λ) dx` and the density `Σ w(m) f ḡ / |m′|` over the
/// preimages of `λ`, so that the two limits are `PV ± iπ·density`.
///
/// The principal value is taken on a symmetric neighbourhood `x_r ± d` of the
/// preimage by folding `t ↦ g(x_r + t) + g(x_r - t)`, which cancels the simple
/// pole; `d` stays clear of every breakpoint, so a kink or window edge at the
/// preimage itself is refused.
pub fn plemelj_parts(
    op: &OperatorModel,
    f: &ScaleVector,
    g: &ScaleVector,
    w: &RationalFn,
    lambda: f64,
) -> Result<(C64, C64)> {
    f.validate()?;
    g.validate()?;
    let p = match op.power() {
        Some(p) => p,
        None => {
            return Err(Error::UnsupportedBackend(
                "principal values need the multiplication backend".into(),
            ))
        }
    };
    if !(lambda > op.lower_bound()) {
        return Err(Error::OnSpectrumEdge(lambda));
    }
    // convergence of the full integrand decides admissibility
    Prepared::new(op, f, g, &w.mul(&RationalFn::resolvent(C64::new(lambda, 1.0))))?;
    let prep = Prepared::build(op, f, g, w)?;
    if prep.pairs.is_empty() {
        return Ok((ZERO, ZERO));
    }
    let cfg = &op.quadrature;
    let dens = |x: f64| {
        if prep.line {
            prep.integrand(op, x) + prep.integrand(op, -x)
        } else {
            prep.integrand(op, x)
        }
    };
    let ratio = |x: f64| dens(x) / (op.symbol(x) - lambda);
    let xr = lambda.powf(1.0 / p);
    if xr >= prep.upper {
        let pieces = quadrature::split_pieces(prep.lower, prep.upper, &prep.breakpoints);
        return Ok((quadrature::integrate(ratio, &pieces, cfg)?.value, ZERO));
    }
    let mut d = (xr - prep.lower).min(0.5 * xr.max(1e-300));
    if prep.upper.is_finite() {
        d = d.min(prep.upper - xr);
    }
    for &b in &prep.breakpoints {
        let gap = (b - xr).abs();
        if gap <= 1e-12 * (1.0 + xr) {
            return Err(Error::DensityNondifferentiable(lambda));
        }
        d = d.min(gap);
    }
    d *= 0.5;
    if !(d > 1e-10 * (1.0 + xr)) {
        return Err(Error::DensityNondifferentiable(lambda));
    }
    let density = dens(xr) / op.symbol_derivative(xr).abs();
    let near = quadrature::integrate(
        |t| ratio(xr + t) + ratio(xr - t),
        &[Piece::Finite(0.0, d)],
        cfg,
    )?;
    let mut total = near.value;
    let left = quadrature::split_pieces(prep.lower, xr - d, &prep.breakpoints);
    if xr - d > prep.lower {
        total += quadrature::integrate(ratio, &left, cfg)?.value;
    }
    let right = quadrature::split_pieces(xr + d, prep.upper, &prep.breakpoints);
    total += quadrature::integrate(ratio, &right, cfg)?.value;
    Ok((total, density))
}
