//! Problem files: TOML with `[operator]`, `[vectors.*]`, `[perturbation]`
//! and an optional `[task]` table. Everything here is plain data; turning it
//! into library objects happens in [`Resolved::new`], which reports failures
//! with the path of the offending field.

use std::collections::BTreeMap;

use perturbkit::eigen::{dual_pair, inverse_problem, Region};
use perturbkit::krein::{Alpha, PerturbationSpec, TauPolicy};
use perturbkit::quadrature::QuadratureConfig;
use perturbkit::{Domain, OperatorModel, RationalFn, ScaleVector, C64};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Tolerances may be tightened down to this, never loosened.
pub const TOL_FLOOR: f64 = 1e-14;

/// `1.5` or `{ re = 1.5, im = -2 }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Complex {
    Real(f64),
    Parts {
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

impl Complex {
    pub fn value(self) -> C64 {
        match self {
            Complex::Real(re) => C64::new(re, 0.0),
            Complex::Parts { re, im } => C64::new(re, im),
        }
    }
}

impl From<C64> for Complex {
    fn from(z: C64) -> Self {
        Complex::Parts { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorConfig>,
    #[serde(default)]
    pub vectors: BTreeMap<String, VectorConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationConfig>,
    #[serde(default)]
    pub task: TaskConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendName {
    Multiplication,
    LaplaceLine,
    Laplace3d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainName {
    HalfLine,
    Line,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub backend: BackendName,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainName>,
    /// Left end of the half line.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureOverrides>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_subdivisions: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VectorConfig {
    PowerLaw {
        exponent: f64,
        #[serde(default)]
        shift: f64,
    },
    ExpAbs {
        rate: f64,
        #[serde(default)]
        center: f64,
    },
    Delta {
        point: Vec<f64>,
    },
    Tabulated {
        grid: Vec<f64>,
        re: Vec<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        im: Option<Vec<f64>>,
    },
    /// `Σ coef · vector`.
    Sum {
        terms: Vec<SumTerm>,
    },
    /// `(A - z)⁻¹ base`.
    Resolvent {
        base: String,
        z: Complex,
    },
    /// `scale · E_{[from, to]} base`.
    Window {
        base: String,
        from: f64,
        to: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        scale: Option<Complex>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumTerm {
    pub vector: String,
    pub coef: Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauConfig {
    Auto(AutoTag),
    Explicit(Complex),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

/// Either the vectors and coupling directly, or the eigen data they are
/// recovered from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "from", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PerturbationConfig {
    Vectors {
        omega1: String,
        omega2: String,
        alpha: Complex,
        #[serde(skip_serializing_if = "Option::is_none")]
        tau: Option<TauConfig>,
    },
    DualPair {
        mu: Complex,
        phi: String,
        psi: String,
    },
    Eigenvector {
        lambda: Complex,
        phi: String,
        psi: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Resolve,
    Eigen,
    Inverse,
    Dualpair,
    Approx,
    Scatter,
    VerifyExamples,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Resolve => "resolve",
            TaskKind::Eigen => "eigen",
            TaskKind::Inverse => "inverse",
            TaskKind::Dualpair => "dualpair",
            TaskKind::Approx => "approx",
            TaskKind::Scatter => "scatter",
            TaskKind::VerifyExamples => "verify-examples",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub re: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub im: Option<[f64; 2]>,
}

impl RegionConfig {
    pub fn region(&self) -> Region {
        match self.im {
            None => Region::Interval {
                lo: self.re[0],
                hi: self.re[1],
            },
            Some(im) => Region::Rectangle {
                re: (self.re[0], self.re[1]),
                im: (im[0], im[1]),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

impl GridConfig {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.from];
        }
        let step = (self.to - self.from) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.to } else { self.from + step * i as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    #[default]
    Auto,
    Plemelj,
    Eta,
}

/// Task parameters. Command-line flags are merged in before running, so a
/// report's copy of this table reproduces the run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<TaskKind>,
    /// Relative quadrature tolerance; may only tighten the default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// resolve: evaluation points.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Complex>>,
    /// resolve: vector the perturbed resolvent is applied to.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<String>,
    /// eigen: search region and extra starting points.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<Complex>>,
    /// inverse / dualpair: prescribed data.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Complex>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<Complex>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<String>,
    /// approx: cutoff ladder, target τ and the point where the gap is measured.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<Complex>,
    /// scatter: energy grid and boundary-value method.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodName>,
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let path = e.span().map(|s| format!("byte {}..{}", s.start, s.end)).unwrap_or_default();
            CliError::validation(path, e.message().to_string())
        })
    }
}

fn need<T: Clone>(v: &Option<T>, path: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| CliError::validation(path, "missing"))
}

fn lib(path: &str) -> impl Fn(perturbkit::Error) -> CliError + '_ {
    move |e| match e {
        perturbkit::Error::InvalidInput(msg) => CliError::validation(path, msg),
        other => other.into(),
    }
}

/// Library objects built from a config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub op: OperatorModel,
    pub vectors: BTreeMap<String, ScaleVector>,
}

impl Resolved {
    pub fn new(cfg: &ProblemConfig) -> Result<Self, CliError> {
        let op_cfg = need(&cfg.operator, "operator")?;
        let mut op = build_operator(&op_cfg)?;
        if let Some(tol) = cfg.task.tol {
            op.quadrature = tighten(op.quadrature, tol)?;
        }
        let mut vectors = BTreeMap::new();
        for name in cfg.vectors.keys() {
            let mut stack = Vec::new();
            let v = build_vector(cfg, name, &mut stack)?;
            vectors.insert(name.clone(), v);
        }
        Ok(Resolved { op, vectors })
    }

    pub fn vector(&self, name: &str, path: &str) -> Result<ScaleVector, CliError> {
        self.vectors
            .get(name)
            .cloned()
            .ok_or_else(|| CliError::validation(path, format!("no vector named `{name}`")))
    }

    pub fn perturbation(&self, cfg: &ProblemConfig) -> Result<PerturbationSpec, CliError> {
        let p = need(&cfg.perturbation, "perturbation")?;
        match p {
            PerturbationConfig::Vectors {
                omega1,
                omega2,
                alpha,
                tau,
            } => {
                let tau = match tau {
                    None | Some(TauConfig::Auto(_)) => TauPolicy::Auto,
                    Some(TauConfig::Explicit(t)) => TauPolicy::Explicit(t.value()),
                };
                PerturbationSpec::new(
                    self.op.clone(),
                    self.vector(&omega1, "perturbation.omega1")?,
                    self.vector(&omega2, "perturbation.omega2")?,
                    Alpha::new(alpha.value()),
                    tau,
                )
                .map_err(lib("perturbation"))
            }
            PerturbationConfig::DualPair { mu, phi, psi } => {
                let phi = self.vector(&phi, "perturbation.phi")?;
                let psi = self.vector(&psi, "perturbation.psi")?;
                Ok(dual_pair(&self.op, mu.value(), &phi, &psi).map_err(lib("perturbation"))?.spec)
            }
            PerturbationConfig::Eigenvector { lambda, phi, psi } => {
                let phi = self.vector(&phi, "perturbation.phi")?;
                let psi = self.vector(&psi, "perturbation.psi")?;
                Ok(inverse_problem(&self.op, lambda.value(), &phi, &psi)
                    .map_err(lib("perturbation"))?
                    .spec)
            }
        }
    }
}

fn tighten(q: QuadratureConfig, tol: f64) -> Result<QuadratureConfig, CliError> {
    if !(tol >= TOL_FLOOR) || !tol.is_finite() {
        return Err(CliError::validation("task.tol", format!("must be at least {TOL_FLOOR:e}, got {tol:e}")));
    }
    if tol > q.rel_tol {
        return Err(CliError::validation(
            "task.tol",
            format!("may only tighten the tolerance (current {:e}, got {tol:e})", q.rel_tol),
        ));
    }
    Ok(QuadratureConfig {
        rel_tol: tol,
        abs_tol: q.abs_tol.min(tol),
        ..q
    })
}

fn build_operator(cfg: &OperatorConfig) -> Result<OperatorModel, CliError> {
    let mut op = match cfg.backend {
        BackendName::LaplaceLine => OperatorModel::laplace_line(),
        BackendName::Laplace3d => OperatorModel::laplace_3d(),
        BackendName::Multiplication => {
            let power = need(&cfg.power, "operator.power")?;
            let domain = match need(&cfg.domain, "operator.domain")? {
                DomainName::Line => Domain::Line,
                DomainName::HalfLine => Domain::HalfLine(cfg.start.unwrap_or(0.0)),
            };
            OperatorModel::multiplication(power, domain).map_err(lib("operator"))?
        }
    };
    if let Some(q) = cfg.quadrature {
        let d = op.quadrature;
        let merged = QuadratureConfig {
            abs_tol: q.abs_tol.unwrap_or(d.abs_tol),
            rel_tol: q.rel_tol.unwrap_or(d.rel_tol),
            max_subdivisions: q.max_subdivisions.unwrap_or(d.max_subdivisions),
        };
        for (field, value, default) in [
            ("abs_tol", merged.abs_tol, d.abs_tol),
            ("rel_tol", merged.rel_tol, d.rel_tol),
        ] {
            if !(value >= TOL_FLOOR) || value > default {
                return Err(CliError::validation(
                    format!("operator.quadrature.{field}"),
                    format!("must lie in [{TOL_FLOOR:e}, {default:e}], got {value:e}"),
                ));
            }
        }
        merged.validate().map_err(lib("operator.quadrature"))?;
        op = op.with_quadrature(merged);
    }
    Ok(op)
}

fn build_vector(cfg: &ProblemConfig, name: &str, stack: &mut Vec<String>) -> Result<ScaleVector, CliError> {
    let path = format!("vectors.{name}");
    if stack.iter().any(|s| s == name) {
        return Err(CliError::validation(path, format!("cyclic reference through {}", stack.join(" -> "))));
    }
    let v = cfg
        .vectors
        .get(name)
        .ok_or_else(|| CliError::validation(stack.last().map_or(path.clone(), |s| format!("vectors.{s}")), format!("no vector named `{name}`")))?;
    stack.push(name.to_string());
    let out = match v {
        VectorConfig::PowerLaw { exponent, shift } => ScaleVector::shifted_power_law(*exponent, *shift),
        VectorConfig::ExpAbs { rate, center } => {
            if !(*rate > 0.0) {
                return Err(CliError::validation(format!("{path}.rate"), "must be positive"));
            }
            ScaleVector::exp_abs(*rate, *center)
        }
        VectorConfig::Delta { point } => match point.as_slice() {
            [x] => ScaleVector::delta_line(*x),
            [x, y, z] => ScaleVector::delta_3d([*x, *y, *z]),
            _ => return Err(CliError::validation(format!("{path}.point"), "needs 1 or 3 coordinates")),
        },
        VectorConfig::Tabulated { grid, re, im } => {
            let im = im.clone().unwrap_or_else(|| vec![0.0; re.len()]);
            if im.len() != re.len() {
                return Err(CliError::validation(format!("{path}.im"), "length differs from re"));
            }
            let values = re.iter().zip(&im).map(|(a, b)| C64::new(*a, *b)).collect();
            ScaleVector::tabulated(grid.clone(), values).map_err(lib(&path))?
        }
        VectorConfig::Sum { terms } => {
            let mut parts = Vec::with_capacity(terms.len());
            for t in terms {
                parts.push((t.coef.value(), build_vector(cfg, &t.vector, stack)?));
            }
            ScaleVector::linear_combination(parts)
        }
        VectorConfig::Resolvent { base, z } => build_vector(cfg, base, stack)?.apply(RationalFn::resolvent(z.value())),
        VectorConfig::Window { base, from, to, scale } => {
            if !(from < to) {
                return Err(CliError::validation(format!("{path}.to"), "window is empty"));
            }
            let s = scale.map_or(C64::new(1.0, 0.0), |s| s.value());
            build_vector(cfg, base, stack)?.windowed(*from, *to, s)
        }
    };
    stack.pop();
    out.validate().map_err(lib(&path))?;
    Ok(out)
}

/// `A:B`, `A:B:H` (rectangle `[A,B] × [-H,H]`) or `[A,B]`.
pub fn parse_region(s: &str) -> Result<RegionConfig, CliError> {
    let bad = || CliError::validation("--region", format!("expected A:B[:H] or [A,B], got `{s}`"));
    let t = s.trim();
    let parts: Vec<&str> = if t.starts_with('[') && t.ends_with(']') {
        t[1..t.len() - 1].split(',').collect()
    } else {
        t.split(':').collect()
    };
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| bad())?;
    match nums.as_slice() {
        [a, b] if a < b => Ok(RegionConfig { re: [*a, *b], im: None }),
        [a, b, h] if a < b && *h != 0.0 => Ok(RegionConfig {
            re: [*a, *b],
            im: Some([-h.abs(), h.abs()]),
        }),
        _ => Err(bad()),
    }
}

/// `A:B:N`.
pub fn parse_grid(s: &str) -> Result<GridConfig, CliError> {
    let bad = || CliError::validation("--grid", format!("expected A:B:N, got `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let from: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let to: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 || !(from <= to) || (count > 1 && from == to) {
        return Err(bad());
    }
    Ok(GridConfig { from, to, count })
}

/// `RE,IM` or `RE`.
pub fn parse_complex(s: &str) -> Result<Complex, CliError> {
    let bad = || CliError::validation("--seed", format!("expected RE,IM, got `{s}`"));
    let mut it = s.split(',');
    let re: f64 = it.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let im: f64 = match it.next() {
        Some(v) => v.trim().parse().map_err(|_| bad())?,
        None => 0.0,
    };
    if it.next().is_some() {
        return Err(bad());
    }
    Ok(Complex::Parts { re, im })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_forms() {
        assert_eq!(parse_region("[-2,-0.01]").unwrap().re, [-2.0, -0.01]);
        let r = parse_region("-3:-1:0.5").unwrap();
        assert_eq!(r.im, Some([-0.5, 0.5]));
        assert!(parse_region("1:0").is_err());
        assert!(parse_region("a:b").is_err());
    }

    #[test]
    fn grid_and_seed_forms() {
        let g = parse_grid("1:100:50").unwrap();
        assert_eq!(g.points().len(), 50);
        assert_eq!(g.points()[49], 100.0);
        assert!(parse_grid("1:2").is_err());
        assert_eq!(parse_complex("1.5,-2").unwrap().value(), C64::new(1.5, -2.0));
        assert_eq!(parse_complex("3").unwrap().value(), C64::new(3.0, 0.0));
    }

    #[test]
    fn tolerance_only_tightens() {
        let q = QuadratureConfig::default();
        assert!(tighten(q, 1e-12).is_ok());
        assert!(tighten(q, 1e-6).is_err());
        assert!(tighten(q, 1e-16).is_err());
    }

    #[test]
    fn cyclic_vectors_are_rejected() {
        let cfg = ProblemConfig::parse(
            r#"
[operator]
backend = "laplace-line"
[vectors.a]
kind = "sum"
terms = [{ vector = "b", coef = 1 }]
[vectors.b]
kind = "resolvent"
base = "a"
z = -1
"#,
        )
        .unwrap();
        let err = Resolved::new(&cfg).unwrap_err();
        assert!(err.to_string().contains("cyclic"), "{err}");
    }
}
