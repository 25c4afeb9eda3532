//! Scalar root finders for analytic functions that may fail to evaluate.

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootConfig {
    pub max_iterations: usize,
    /// Stop once `|Δλ| < step_tol · (1 + |λ|)`.
    pub step_tol: f64,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig {
            max_iterations: 200,
            step_tol: 1e-12,
        }
    }
}

/// Bisection on `[lo, hi]` for a real-valued restriction with a sign change.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, cfg: &RootConfig) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoConvergence(format!(
            "no sign change on [{lo}, {hi}]"
        )));
    }
    for _ in 0..cfg.max_iterations.max(1100) {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) < cfg.step_tol * (1.0 + mid.abs()) || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Secant iteration in ℂ. A step that raises `|f|` or lands where `f` cannot
/// be evaluated is halved (up to 30 times) before it is taken.
pub fn secant<F>(f: F, x0: C64, x1: C64, cfg: &RootConfig) -> Result<C64>
where
    F: Fn(C64) -> Result<C64>,
{
    let mut a = x0;
    let mut fa = f(a)?;
    let mut b = x1;
    let mut fb = f(b)?;
    for _ in 0..cfg.max_iterations {
        if fb.norm() == 0.0 {
            return Ok(b);
        }
        let denom = fb - fa;
        let mut step = if denom.norm() == 0.0 {
            // flat secant: nudge
            (b - a) * 0.5
        } else {
            -fb * (b - a) / denom
        };
        if !(step.re.is_finite() && step.im.is_finite()) {
            return Err(Error::NoConvergence("non-finite secant step".into()));
        }
        let mut accepted = None;
        for _ in 0..30 {
            let c = b + step;
            match f(c) {
                Ok(fc) if fc.norm() <= 4.0 * fb.norm() || step.norm() < cfg.step_tol * (1.0 + b.norm()) => {
                    accepted = Some((c, fc));
                    break;
                }
                _ => step *= 0.5,
            }
        }
        let (c, fc) = accepted.ok_or_else(|| {
            Error::NoConvergence(format!("damping exhausted near {b}"))
        })?;
        let moved = (c - b).norm();
        a = b;
        fa = fb;
        b = c;
        fb = fc;
        if moved < cfg.step_tol * (1.0 + b.norm()) {
            return Ok(b);
        }
    }
    Err(Error::NoConvergence(format!(
        "secant did not settle after {} iterations (last {b}, |f| = {:e})",
        cfg.max_iterations,
        fb.norm()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_cube_root() {
        let r = bisect(|x| Ok(x * x * x - 2.0), 0.0, 2.0, &RootConfig::default()).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn secant_finds_complex_root() {
        let f = |z: C64| Ok(z * z + C64::new(1.0, 0.0));
        let r = secant(f, C64::new(0.3, 0.5), C64::new(0.4, 0.6), &RootConfig::default()).unwrap();
        assert!((r - C64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn secant_reports_failure() {
        let f = |z: C64| Ok(z.exp());
        let cfg = RootConfig {
            max_iterations: 20,
            ..RootConfig::default()
        };
        assert!(secant(f, C64::new(0.0, 0.0), C64::new(0.1, 0.0), &cfg).is_err());
    }
}
