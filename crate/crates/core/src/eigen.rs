//! Eigenvalues of the perturbed operator: direct search, the inverse problem
//! (prescribe `λ, φ, ψ`, recover `ω₁, ω₂, α, τ`) and dual pairs.
//!
//! `λ` is an eigenvalue exactly when `α⁻¹ + τ + F(λ) = 0`; the eigenvectors are
//! then `φ = R_λ ω₂` and, for the adjoint at `λ̄`, `ψ = R_λ̄ ω₁`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::krein::{self, Alpha, Coefficient, PerturbationSpec, TauPolicy};
use crate::operator::OperatorModel;
use crate::rational::RationalFn;
use crate::rootfind::{self, RootConfig};
use crate::spectral::{self, classify_regularity, Regularity};
use crate::vector::ScaleVector;
use crate::C64;

/// Roots are reported only when the condition is this small.
pub const ROOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// Real segment, which must lie below the spectrum.
    Interval { lo: f64, hi: f64 },
    Rectangle { re: (f64, f64), im: (f64, f64) },
}

impl Region {
    fn touches(&self, op: &OperatorModel) -> bool {
        let bottom = op.lower_bound();
        match *self {
            Region::Interval { hi, .. } => hi >= bottom,
            Region::Rectangle { re, im } => im.0 <= 0.0 && im.1 >= 0.0 && re.1 >= bottom,
        }
    }

    fn contains(&self, z: C64) -> bool {
        let pad = 1e-9;
        match *self {
            Region::Interval { lo, hi } => {
                z.im.abs() <= pad * (1.0 + z.norm()) && z.re >= lo - pad && z.re <= hi + pad
            }
            Region::Rectangle { re, im } => {
                z.re >= re.0 - pad && z.re <= re.1 + pad && z.im >= im.0 - pad && z.im <= im.1 + pad
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Scan points along an interval (per side for rectangles).
    pub grid: usize,
    pub root: RootConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            grid: 64,
            root: RootConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda: C64,
    /// Eigenvector of the perturbed operator, unit L² norm.
    pub phi: ScaleVector,
    /// Eigenvector of the adjoint at `conj λ`, unit norm, `(φ, ψ) ≥ 0`.
    pub psi: ScaleVector,
    /// `|α⁻¹ + τ + F(λ)|`.
    pub residual: f64,
}

/// `α⁻¹ + τ + F(λ)` with `α⁻¹` and `τ` evaluated once.
struct Condition<'a> {
    spec: &'a PerturbationSpec,
    offset: Option<C64>,
}

impl<'a> Condition<'a> {
    fn new(spec: &'a PerturbationSpec) -> Result<Self> {
        let offset = match spec.alpha.inverse() {
            None => None,
            Some(a) => Some(a + krein::tau_value(spec)?),
        };
        Ok(Condition { spec, offset })
    }

    fn eval(&self, lambda: C64) -> Result<C64> {
        match self.offset {
            None => Ok(C64::new(f64::INFINITY, 0.0)),
            Some(o) => Ok(o + krein::regularized_f(self.spec, lambda)?),
        }
    }
}

/// `α⁻¹ + τ + F(λ)`; infinite for the unperturbed operator. Points of the
/// spectrum are accepted when the pole of `F` cancels against the vectors.
pub fn eigen_condition(spec: &PerturbationSpec, lambda: C64) -> Result<C64> {
    Condition::new(spec)?.eval(lambda)
}

fn normalized(op: &OperatorModel, v: ScaleVector) -> Result<(ScaleVector, f64)> {
    let n = spectral::l2_norm(op, &v)?;
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::NonIntegrable(
            "eigenvector is not square integrable".into(),
        ));
    }
    Ok((v.scaled(C64::new(1.0 / n, 0.0)), n))
}

/// Eigenvectors attached to a (verified) eigenvalue.
pub fn eigen_pair_at(spec: &PerturbationSpec, lambda: C64) -> Result<EigenPair> {
    let residual = eigen_condition(spec, lambda)?.norm();
    let phi = spectral::resolvent_apply(&spec.op, lambda, &spec.omega2)?;
    let psi = spectral::resolvent_apply(&spec.op, lambda.conj(), &spec.omega1)?;
    let (phi, _) = normalized(&spec.op, phi)?;
    let (mut psi, _) = normalized(&spec.op, psi)?;
    let overlap = spectral::inner(&spec.op, &phi, &psi)?;
    if overlap.norm() > 1e-14 {
        // (φ, e^{iθ}ψ) = e^{-iθ}(φ, ψ) is real positive for θ = arg (φ, ψ)
        psi = psi.scaled(C64::from_polar(1.0, overlap.arg()));
    }
    Ok(EigenPair {
        lambda,
        phi,
        psi,
        residual,
    })
}

fn snap_to_axis(cond: &Condition, z: C64) -> C64 {
    if z.im == 0.0 || z.im.abs() > 1e-10 * (1.0 + z.norm()) {
        return z;
    }
    let real = C64::new(z.re, 0.0);
    match (cond.eval(real), cond.eval(z)) {
        (Ok(a), Ok(b)) if a.norm() <= b.norm().max(ROOT_TOL) => real,
        (Ok(_), Err(_)) => real,
        _ => z,
    }
}

fn grid_points(region: &Region, n: usize) -> Vec<C64> {
    let n = n.max(3);
    match *region {
        Region::Interval { lo, hi } => (0..n)
            .map(|i| C64::new(lo + (hi - lo) * i as f64 / (n - 1) as f64, 0.0))
            .collect(),
        Region::Rectangle { re, im } => {
            let side = ((n as f64).sqrt().ceil() as usize).max(3);
            let mut pts = Vec::with_capacity(side * side);
            for j in 0..side {
                for i in 0..side {
                    pts.push(C64::new(
                        re.0 + (re.1 - re.0) * i as f64 / (side - 1) as f64,
                        im.0 + (im.1 - im.0) * j as f64 / (side - 1) as f64,
                    ));
                }
            }
            pts
        }
    }
}

/// Indices of local minima of `|g|` on the scan grid.
fn local_minima(region: &Region, vals: &[Option<C64>]) -> Vec<usize> {
    let mag = |i: usize| vals[i].map_or(f64::INFINITY, |v| v.norm());
    let n = vals.len();
    let mut out = Vec::new();
    match region {
        Region::Interval { .. } => {
            for i in 0..n {
                let m = mag(i);
                let left = if i > 0 { mag(i - 1) } else { f64::INFINITY };
                let right = if i + 1 < n { mag(i + 1) } else { f64::INFINITY };
                if m.is_finite() && m <= left && m <= right {
                    out.push(i);
                }
            }
        }
        Region::Rectangle { .. } => {
            let side = (n as f64).sqrt().round() as usize;
            for j in 0..side {
                for i in 0..side {
                    let k = j * side + i;
                    let m = mag(k);
                    if !m.is_finite() {
                        continue;
                    }
                    let mut is_min = true;
                    for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                        let (ii, jj) = (i as i64 + di, j as i64 + dj);
                        if ii < 0 || jj < 0 || ii >= side as i64 || jj >= side as i64 {
                            continue;
                        }
                        if mag(jj as usize * side + ii as usize) < m {
                            is_min = false;
                        }
                    }
                    if is_min {
                        out.push(k);
                    }
                }
            }
        }
    }
    out
}

fn dedupe(mut roots: Vec<C64>) -> Vec<C64> {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut out: Vec<C64> = Vec::new();
    for r in roots {
        if !out.iter().any(|q| (q - r).norm() < 1e-8 * (1.0 + r.norm())) {
            out.push(r);
        }
    }
    out
}

/// Eigenvalues in `region`, plus wherever explicit `seeds` converge.
pub fn find_eigenvalues(
    spec: &PerturbationSpec,
    region: &Region,
    seeds: &[C64],
) -> Result<Vec<EigenPair>> {
    find_eigenvalues_with(spec, region, seeds, &SearchConfig::default())
}

pub fn find_eigenvalues_with(
    spec: &PerturbationSpec,
    region: &Region,
    seeds: &[C64],
    cfg: &SearchConfig,
) -> Result<Vec<EigenPair>> {
    if spec.alpha == Alpha::Zero {
        return Ok(Vec::new());
    }
    if region.touches(&spec.op) {
        return Err(Error::RegionTouchesSpectrum);
    }
    let cond = Condition::new(spec)?;
    let g = |z: C64| cond.eval(z);
    let pts = grid_points(region, cfg.grid);
    let vals: Vec<Option<C64>> = pts.par_iter().map(|z| g(*z).ok()).collect();

    let mut roots = Vec::new();
    let mut auto_seeds = Vec::new();
    let real_valued = matches!(region, Region::Interval { .. })
        && vals
            .iter()
            .all(|v| v.map_or(false, |v| v.im.abs() <= 1e-12 * (1.0 + v.norm())));
    if real_valued {
        let gr = |x: f64| g(C64::new(x, 0.0)).map(|v| v.re);
        for i in 0..pts.len() - 1 {
            let (a, b) = (vals[i].unwrap().re, vals[i + 1].unwrap().re);
            if a == 0.0 {
                roots.push(pts[i]);
            } else if a.signum() != b.signum() && b != 0.0 {
                let r = rootfind::bisect(&gr, pts[i].re, pts[i + 1].re, &cfg.root)?;
                roots.push(C64::new(r, 0.0));
            }
        }
        if vals[pts.len() - 1].unwrap().re == 0.0 {
            roots.push(pts[pts.len() - 1]);
        }
    } else {
        for i in local_minima(region, &vals) {
            auto_seeds.push(pts[i]);
        }
    }

    let step = match *region {
        Region::Interval { lo, hi } => (hi - lo) / cfg.grid.max(3) as f64,
        Region::Rectangle { re, im } => (re.1 - re.0).max(im.1 - im.0) / cfg.grid.max(3) as f64,
    };
    let perturb = |z: C64| {
        let h = step.max(1e-6 * (1.0 + z.norm()));
        z + C64::new(0.5 * h, 0.25 * h)
    };

    let from_seeds: Vec<Result<C64>> = seeds
        .par_iter()
        .map(|s| rootfind::secant(g, *s, perturb(*s), &cfg.root))
        .collect();
    for r in from_seeds {
        roots.push(r?);
    }
    let from_auto: Vec<Option<C64>> = auto_seeds
        .par_iter()
        .map(|s| {
            let z = rootfind::secant(g, *s, perturb(*s), &cfg.root).ok()?;
            let z = snap_to_axis(&cond, z);
            region.contains(z).then_some(z)
        })
        .collect();
    roots.extend(from_auto.into_iter().flatten());

    let roots: Vec<C64> = roots.into_iter().map(|z| snap_to_axis(&cond, z)).collect();
    let mut out = Vec::new();
    for z in dedupe(roots) {
        let v = match g(z) {
            Ok(v) => v,
            Err(_) => continue,
        };
        if v.norm() < ROOT_TOL {
            out.push(eigen_pair_at(spec, z)?);
        }
    }
    Ok(out)
}

/// Largest deviation from `(λ - z) b_z (φ, n_z̄) = 1` over `test_points`,
/// plus the L² distance between `φ` and `(A - z)(A - λ)⁻¹ m_z`.
pub fn verify_eigen(spec: &PerturbationSpec, pair: &EigenPair, test_points: &[C64]) -> Result<f64> {
    let op = &spec.op;
    let phi0 = spectral::resolvent_apply(op, pair.lambda, &spec.omega2)?;
    let mut worst: f64 = 0.0;
    for &z in test_points {
        let b = match krein::b_of_z(spec, z)? {
            Coefficient::Finite(b) => b,
            Coefficient::Infinity => return Err(Error::PerturbedEigenvalue(format!("{z}"))),
        };
        let pairing = krein::defect_pairing(spec, z, &phi0)?;
        let dev = ((pair.lambda - z) * b * pairing - C64::new(1.0, 0.0)).norm();
        let m_z = spectral::resolvent_apply(op, z, &spec.omega2)?;
        let w = RationalFn::shift(z).mul(&RationalFn::resolvent(pair.lambda));
        let rebuilt = spectral::weight_apply(op, w, &m_z)?;
        let diff = phi0.clone().plus(C64::new(-1.0, 0.0), rebuilt);
        let scale = spectral::l2_norm(op, &phi0)?;
        let dist = spectral::l2_norm(op, &diff)? / scale.max(f64::MIN_POSITIVE);
        worst = worst.max(dev + dist);
    }
    Ok(worst)
}

/// Whether the recovered perturbation needs a prescribed `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationClass {
    /// `⟨ω₂, A(A²+1)⁻¹ω₁⟩` converges; `τ` is computed.
    Regular,
    /// The pairing diverges; `τ = 0` is prescribed and `α` absorbs the rest.
    Parametric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseSolution {
    pub spec: PerturbationSpec,
    pub lambda: C64,
    pub phi: ScaleVector,
    pub psi: ScaleVector,
    pub class: PerturbationClass,
}

impl InverseSolution {
    /// `(φ, n_z̄)`.
    pub fn defect(&self, z: C64) -> Result<C64> {
        krein::defect_pairing(&self.spec, z, &self.phi)
    }

    /// `b_z = 1 / ((λ - z)(φ, n_z̄))`.
    pub fn b_of_z(&self, z: C64) -> Result<Coefficient> {
        let d = (self.lambda - z) * self.defect(z)?;
        if d.norm() == 0.0 {
            Ok(Coefficient::Infinity)
        } else {
            Ok(Coefficient::Finite(d.inv()))
        }
    }

    /// `m_z = (A - λ)(A - z)⁻¹ φ`.
    pub fn m_z(&self, z: C64) -> Result<ScaleVector> {
        let w = RationalFn::shift(self.lambda).mul(&RationalFn::resolvent(z));
        spectral::weight_apply(&self.spec.op, w, &self.phi)
    }

    /// `n_z̄ = (A - λ̄)(A - z̄)⁻¹ ψ`.
    pub fn n_conj(&self, z: C64) -> Result<ScaleVector> {
        let w = RationalFn::shift(self.lambda.conj()).mul(&RationalFn::resolvent(z.conj()));
        spectral::weight_apply(&self.spec.op, w, &self.psi)
    }
}

fn require_finite_energy(op: &OperatorModel, name: &str, v: &ScaleVector) -> Result<Regularity> {
    let r = classify_regularity(op, v)?;
    match r {
        Regularity::Zero | Regularity::PlusOne | Regularity::PlusTwo => Ok(r),
        _ => Err(Error::RegularityViolation(format!("{name} is not in H"))),
    }
}

/// Recover the perturbation having `λ` as eigenvalue with eigenvectors `φ`
/// (of the operator) and `ψ` (of its adjoint at `conj λ`).
pub fn inverse_problem(op: &OperatorModel, lambda: C64, phi: &ScaleVector, psi: &ScaleVector) -> Result<InverseSolution> {
    let rphi = require_finite_energy(op, "phi", phi)?;
    let rpsi = require_finite_energy(op, "psi", psi)?;
    if rphi == Regularity::PlusTwo && rpsi == Regularity::PlusTwo {
        // ω₁, ω₂ ∈ H: a bounded rank-one perturbation
        return Err(Error::RegularityViolation(
            "phi and psi both lie in H+2, the perturbation would be regular".into(),
        ));
    }
    let omega2 = spectral::weight_apply(op, RationalFn::shift(lambda), phi)?;
    let omega1 = spectral::weight_apply(op, RationalFn::shift(lambda.conj()), psi)?;
    for w in [&omega2, &omega1] {
        if w.atoms().is_empty() || spectral::scale_norm(op, w, -2)? == 0.0 {
            return Err(Error::EigenvectorOfA);
        }
    }
    let probe = PerturbationSpec {
        op: op.clone(),
        omega1,
        omega2,
        alpha: Alpha::Zero,
        tau: TauPolicy::Auto,
    };
    let (class, ainv, tau) = match krein::tau_auto(&probe) {
        Ok(_) => {
            let c = spectral::inner(op, phi, &probe.omega1)?;
            (PerturbationClass::Regular, -c, TauPolicy::Auto)
        }
        Err(Error::NonIntegrable(_)) => {
            // α⁻¹ + τ = -F(λ) with τ = 0, F(λ) = ∫ φ ψ̄ (m-λ)(1+λm)/(m²+1)
            let w = RationalFn::shift(lambda).mul(&RationalFn::regularized_numerator(lambda));
            let c = spectral::pairing(op, phi, psi, &w)?;
            (PerturbationClass::Parametric, -c, TauPolicy::Explicit(C64::new(0.0, 0.0)))
        }
        Err(e) => return Err(e),
    };
    if ainv.norm() < 1e-300 || !ainv.re.is_finite() || !ainv.im.is_finite() {
        return Err(Error::DegenerateDenominator(
            "(phi, omega1) vanishes, no finite coupling".into(),
        ));
    }
    let spec = PerturbationSpec {
        alpha: Alpha::Value(ainv.inv()),
        tau,
        ..probe
    };
    Ok(InverseSolution {
        spec,
        lambda,
        phi: phi.clone(),
        psi: psi.clone(),
        class,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualPair {
    pub mu: C64,
    pub lambda: C64,
    pub phi_lambda: ScaleVector,
    pub phi_mu: ScaleVector,
    pub psi_lambda: ScaleVector,
    pub psi_mu: ScaleVector,
    pub alpha: C64,
    pub omega1: ScaleVector,
    pub omega2: ScaleVector,
    pub spec: PerturbationSpec,
    /// `(φ_λ, ψ_λ)`
    pub overlap: C64,
    /// `((A - μ)⁻¹ φ_λ, ψ_λ)`
    pub resolvent_overlap: C64,
    /// `|(λ - μ)((A - μ)⁻¹φ_λ, ψ_λ) - (φ_λ, ψ_λ)|`
    pub closure_residual: f64,
    pub condition_mu: f64,
    pub condition_lambda: f64,
}

/// Given one eigenvalue `μ` and eigenvector data `φ_λ, ψ_λ` of its partner,
/// find the partner `λ` and the perturbation having both.
pub fn dual_pair(op: &OperatorModel, mu: C64, phi_lambda: &ScaleVector, psi_lambda: &ScaleVector) -> Result<DualPair> {
    if op.in_spectrum(mu) {
        return Err(Error::PoleOnSpectrum(format!("{mu}")));
    }
    let overlap = spectral::inner(op, phi_lambda, psi_lambda)?;
    let resolvent_overlap = spectral::pairing(op, phi_lambda, psi_lambda, &RationalFn::resolvent(mu))?;
    if resolvent_overlap.norm() <= 1e-14 * (1.0 + overlap.norm()) {
        return Err(Error::DegenerateDenominator(
            "((A - mu)^-1 phi, psi) vanishes".into(),
        ));
    }
    let lambda = mu + overlap / resolvent_overlap;
    let sol = inverse_problem(op, lambda, phi_lambda, psi_lambda)?;
    let phi_mu = spectral::weight_apply(
        op,
        RationalFn::shift(lambda).mul(&RationalFn::resolvent(mu)),
        phi_lambda,
    )?;
    let psi_mu = spectral::weight_apply(
        op,
        RationalFn::shift(lambda.conj()).mul(&RationalFn::resolvent(mu.conj())),
        psi_lambda,
    )?;
    let closure_residual = ((lambda - mu) * resolvent_overlap - overlap).norm();
    let cond = Condition::new(&sol.spec)?;
    let condition_mu = cond.eval(mu)?.norm();
    let condition_lambda = cond.eval(lambda)?.norm();
    let alpha = match sol.spec.alpha {
        Alpha::Value(a) => a,
        Alpha::Zero => unreachable!("inverse problem yields a finite coupling"),
    };
    Ok(DualPair {
        mu,
        lambda,
        phi_lambda: phi_lambda.clone(),
        phi_mu,
        psi_lambda: psi_lambda.clone(),
        psi_mu,
        alpha,
        omega1: sol.spec.omega1.clone(),
        omega2: sol.spec.omega2.clone(),
        spec: sol.spec,
        overlap,
        resolvent_overlap,
        closure_residual,
        condition_mu,
        condition_lambda,
    })
}
