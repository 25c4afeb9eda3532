//! Vectors of the A-scale as a small algebra of closed-form primitives.
//!
//! Every vector flattens to a finite sum of [`Atom`]s,
//! `coeff · w(A) · 1_{[u,v]}(A) · base`, where `w` is rational and `base`
//! is a catalog primitive. Resolvents, shifts and spectral windows only
//! touch `w` and the window, so arbitrary compositions stay exact.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rational::RationalFn;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub enum ScaleVector {
    /// `(x + shift)^exponent`; on the whole line `(|x| + shift)^exponent`.
    PowerLaw { exponent: f64, shift: f64 },
    /// `exp(-rate |x - center|)`.
    ExpAbs { rate: f64, center: f64 },
    /// Point mass; the line uses `point[0]`.
    Delta { point: [f64; 3] },
    /// `scale · E_{[u,v]} base`.
    Windowed {
        base: Box<ScaleVector>,
        window: (f64, f64),
        scale: C64,
    },
    Sum(Vec<(C64, ScaleVector)>),
    /// Piecewise linear through `(grid, values)`, zero outside the grid.
    Tabulated { grid: Arc<Vec<f64>>, values: Arc<Vec<C64>> },
    /// `weight(A) base`.
    Spectral { weight: RationalFn, base: Box<ScaleVector> },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Base {
    PowerLaw { q: f64, s: f64 },
    ExpAbs { c: f64, x0: f64 },
    Delta([f64; 3]),
    Tabulated {
        grid: Arc<Vec<f64>>,
        values: Arc<Vec<C64>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Atom {
    pub coeff: C64,
    pub weight: RationalFn,
    pub window: Option<(f64, f64)>,
    pub base: Base,
}

impl ScaleVector {
    pub fn zero() -> Self {
        ScaleVector::Sum(Vec::new())
    }

    pub fn power_law(exponent: f64) -> Self {
        ScaleVector::PowerLaw {
            exponent,
            shift: 0.0,
        }
    }

    pub fn shifted_power_law(exponent: f64, shift: f64) -> Self {
        ScaleVector::PowerLaw { exponent, shift }
    }

    pub fn exp_abs(rate: f64, center: f64) -> Self {
        ScaleVector::ExpAbs { rate, center }
    }

    pub fn delta_line(x: f64) -> Self {
        ScaleVector::Delta {
            point: [x, 0.0, 0.0],
        }
    }

    pub fn delta_3d(point: [f64; 3]) -> Self {
        ScaleVector::Delta { point }
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::InvalidInput(
                "tabulated vector needs at least two points and matching lengths".into(),
            ));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "tabulated grid must be strictly increasing".into(),
            ));
        }
        Ok(ScaleVector::Tabulated {
            grid: Arc::new(grid),
            values: Arc::new(values),
        })
    }

    pub fn windowed(self, u: f64, v: f64, scale: C64) -> Self {
        ScaleVector::Windowed {
            base: Box::new(self),
            window: (u, v),
            scale,
        }
    }

    pub fn apply(self, weight: RationalFn) -> Self {
        ScaleVector::Spectral {
            weight,
            base: Box::new(self),
        }
    }

    pub fn scaled(self, c: C64) -> Self {
        ScaleVector::Sum(vec![(c, self)])
    }

    pub fn plus(self, c: C64, other: ScaleVector) -> Self {
        let mut terms = match self {
            ScaleVector::Sum(t) => t,
            v => vec![(C64::new(1.0, 0.0), v)],
        };
        terms.push((c, other));
        ScaleVector::Sum(terms)
    }

    pub fn linear_combination(terms: Vec<(C64, ScaleVector)>) -> Self {
        ScaleVector::Sum(terms)
    }

    /// Structural checks that do not depend on the operator.
    pub fn validate(&self) -> Result<()> {
        match self {
            ScaleVector::PowerLaw { exponent, shift } => {
                if !exponent.is_finite() || !shift.is_finite() {
                    return Err(Error::InvalidInput("non-finite power-law parameters".into()));
                }
            }
            ScaleVector::ExpAbs { rate, center } => {
                if !(*rate > 0.0) || !rate.is_finite() || !center.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "exponential rate must be positive, got {rate}"
                    )));
                }
            }
            ScaleVector::Delta { point } => {
                if point.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidInput("non-finite delta location".into()));
                }
            }
            ScaleVector::Windowed {
                base,
                window: (u, v),
                scale,
            } => {
                if !(u < v) || !scale.re.is_finite() || !scale.im.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "window [{u}, {v}] must satisfy u < v"
                    )));
                }
                base.validate()?;
            }
            ScaleVector::Sum(terms) => {
                for (_, v) in terms {
                    v.validate()?;
                }
            }
            ScaleVector::Tabulated { .. } => {}
            ScaleVector::Spectral { base, .. } => base.validate()?,
        }
        Ok(())
    }

    pub(crate) fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        self.collect(C64::new(1.0, 0.0), &RationalFn::one(), None, &mut out);
        out
    }

    fn collect(
        &self,
        coeff: C64,
        weight: &RationalFn,
        window: Option<(f64, f64)>,
        out: &mut Vec<Atom>,
    ) {
        if coeff.norm() == 0.0 || weight.is_zero() {
            return;
        }
        let mut push = |base: Base| {
            out.push(Atom {
                coeff,
                weight: weight.clone(),
                window,
                base,
            })
        };
        match self {
            ScaleVector::PowerLaw { exponent, shift } => push(Base::PowerLaw {
                q: *exponent,
                s: *shift,
            }),
            ScaleVector::ExpAbs { rate, center } => push(Base::ExpAbs {
                c: *rate,
                x0: *center,
            }),
            ScaleVector::Delta { point } => push(Base::Delta(*point)),
            ScaleVector::Tabulated { grid, values } => push(Base::Tabulated {
                grid: grid.clone(),
                values: values.clone(),
            }),
            ScaleVector::Windowed {
                base,
                window: (u, v),
                scale,
            } => {
                let w = match window {
                    None => (*u, *v),
                    Some((a, b)) => (a.max(*u), b.min(*v)),
                };
                if w.0 >= w.1 {
                    return;
                }
                base.collect(coeff * scale, weight, Some(w), out);
            }
            ScaleVector::Sum(terms) => {
                for (c, v) in terms {
                    v.collect(coeff * c, weight, window, out);
                }
            }
            ScaleVector::Spectral { weight: w, base } => {
                base.collect(coeff, &weight.mul(w), window, out);
            }
        }
    }

    /// True when every atom sits under a finite spectral window.
    pub fn is_spectrally_bounded(&self) -> bool {
        self.atoms().iter().all(|a| a.window.is_some())
    }
}

impl Base {
    /// Value of the primitive at `x` (multiplication backend only).
    pub fn eval(&self, x: f64, line: bool) -> C64 {
        match self {
            Base::PowerLaw { q, s } => {
                let t = if line { x.abs() + s } else { x + s };
                C64::new(t.powf(*q), 0.0)
            }
            Base::ExpAbs { c, x0 } => C64::new((-c * (x - x0).abs()).exp(), 0.0),
            Base::Delta(_) => C64::new(f64::NAN, 0.0),
            Base::Tabulated { grid, values } => interpolate(grid, values, x),
        }
    }
}

pub(crate) fn interpolate(grid: &[f64], values: &[C64], x: f64) -> C64 {
    let n = grid.len();
    if !(x >= grid[0]) || !(x <= grid[n - 1]) {
        return C64::new(0.0, 0.0);
    }
    let i = match grid.binary_search_by(|g| g.total_cmp(&x)) {
        Ok(i) => return values[i],
        Err(i) => i,
    };
    let (x0, x1) = (grid[i - 1], grid[i]);
    let t = (x - x0) / (x1 - x0);
    values[i - 1] * (1.0 - t) + values[i] * t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flattening_composes_weights_and_windows() {
        let v = ScaleVector::power_law(-1.0)
            .windowed(1.0, 10.0, C64::new(2.0, 0.0))
            .windowed(5.0, 20.0, C64::new(0.0, 1.0))
            .apply(RationalFn::resolvent(C64::new(-1.0, 0.0)));
        let atoms = v.atoms();
        assert_eq!(atoms.len(), 1);
        assert_eq!(atoms[0].window, Some((5.0, 10.0)));
        assert_eq!(atoms[0].coeff, C64::new(0.0, 2.0));
        assert_eq!(atoms[0].weight.poles().len(), 1);
    }

    #[test]
    fn disjoint_windows_vanish() {
        let v = ScaleVector::power_law(-1.0)
            .windowed(1.0, 2.0, C64::new(1.0, 0.0))
            .windowed(3.0, 4.0, C64::new(1.0, 0.0));
        assert!(v.atoms().is_empty());
    }

    #[test]
    fn interpolation_is_zero_outside_the_grid() {
        let g = [0.0, 1.0, 2.0];
        let v = [C64::new(1.0, 0.0), C64::new(3.0, 0.0), C64::new(5.0, 0.0)];
        assert_eq!(interpolate(&g, &v, 0.5), C64::new(2.0, 0.0));
        assert_eq!(interpolate(&g, &v, 2.0), C64::new(5.0, 0.0));
        assert_eq!(interpolate(&g, &v, 2.5), C64::new(0.0, 0.0));
    }
}
