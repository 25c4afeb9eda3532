//! One function per subcommand. Each turns a validated config into a JSON
//! result, an optional table and a few summary lines for the terminal.

use perturbkit::approx::{build_sequence, default_probes, resolvent_gap, WindowPolicy};
use perturbkit::corpus;
use perturbkit::eigen::{
    dual_pair, eigen_condition, find_eigenvalues, inverse_problem, verify_eigen, PerturbationClass, Region,
};
use perturbkit::krein::{self, Alpha, PerturbationSpec, TauPolicy};
use perturbkit::scattering::{smatrix, smatrix_with, BoundaryMethod, SValue};
use perturbkit::spectral::{l2_norm, resolvent_apply};
use perturbkit::{Error, OperatorModel, ScaleVector, C64};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{MethodName, PerturbationConfig, ProblemConfig, Resolved, TaskKind};
use crate::report::{cell, coefficient, complex, num, Table};
use crate::CliError;

pub struct Outcome {
    pub result: Value,
    pub table: Option<Table>,
    /// Set when the run completed but disagrees with reference values.
    pub mismatch: Option<String>,
    pub summary: Vec<String>,
}

impl Outcome {
    fn ok(result: Value, table: Option<Table>, summary: Vec<String>) -> Self {
        Outcome {
            result,
            table,
            mismatch: None,
            summary,
        }
    }
}

pub fn run(kind: TaskKind, cfg: &ProblemConfig) -> Result<Outcome, CliError> {
    if kind == TaskKind::VerifyExamples {
        return verify_examples();
    }
    let res = Resolved::new(cfg)?;
    match kind {
        TaskKind::Resolve => resolve(cfg, &res),
        TaskKind::Eigen => eigen(cfg, &res),
        TaskKind::Inverse => inverse(cfg, &res),
        TaskKind::Dualpair => dualpair(cfg, &res),
        TaskKind::Approx => approx(cfg, &res),
        TaskKind::Scatter => scatter(cfg, &res),
        TaskKind::VerifyExamples => unreachable!(),
    }
}

fn need<T: Clone>(v: &Option<T>, path: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| CliError::validation(path, "missing"))
}

fn obj(pairs: Vec<(&str, Value)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}

/// Points used to verify eigenpairs: off the axis and away from the bottom.
fn test_points(op: &OperatorModel) -> [C64; 3] {
    let b = op.lower_bound();
    [C64::new(b - 2.5, 0.7), C64::new(b + 1.0, 1.3), C64::new(b + 0.5, -0.9)]
}

fn resolve(cfg: &ProblemConfig, res: &Resolved) -> Result<Outcome, CliError> {
    let spec = res.perturbation(cfg)?;
    let points: Vec<C64> = need(&cfg.task.points, "task.points")?.iter().map(|z| z.value()).collect();
    if points.is_empty() {
        return Err(CliError::validation("task.points", "empty"));
    }
    let probe = match &cfg.task.probe {
        Some(name) => Some(res.vector(name, "task.probe")?),
        None => None,
    };
    let tau = krein::tau_value(&spec)?;
    let probe_norm = probe.as_ref().map(|f| l2_norm(&spec.op, f)).transpose()?;

    let rows = points
        .par_iter()
        .enumerate()
        .map(|(k, &z)| -> Result<Value, Error> {
            let mut m = vec![
                ("z", complex(z)),
                ("f", complex(krein::regularized_f(&spec, z)?)),
                ("b", coefficient(krein::b_of_z(&spec, z)?)),
            ];
            if let (Some(f), Some(nf)) = (&probe, probe_norm) {
                let perturbed = krein::krein_apply(&spec, z, f)?;
                let plain = resolvent_apply(&spec.op, z, f)?;
                m.push(("perturbed_norm", num(l2_norm(&spec.op, &perturbed)? / nf)));
                m.push(("unperturbed_norm", num(l2_norm(&spec.op, &plain)? / nf)));
            }
            if let Some(&xi) = points.get(k + 1) {
                m.push(("cocycle_residual", num(krein::cocycle_residual(&spec, z, xi)?)));
            }
            Ok(obj(m))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new(&["z_re", "z_im", "b_re", "b_im", "f_re", "f_im"]);
    for r in &rows {
        let g = |k: &str, part: &str| match &r[k] {
            Value::Object(o) => o[part].to_string(),
            other => other.as_str().unwrap_or_default().to_string(),
        };
        table.push(vec![g("z", "re"), g("z", "im"), g("b", "re"), g("b", "im"), g("f", "re"), g("f", "im")]);
    }
    let summary = vec![format!("tau = {tau}"), format!("{} points evaluated", rows.len())];
    Ok(Outcome::ok(
        obj(vec![("tau", complex(tau)), ("points", Value::Array(rows))]),
        Some(table),
        summary,
    ))
}

fn eigen(cfg: &ProblemConfig, res: &Resolved) -> Result<Outcome, CliError> {
    let spec = res.perturbation(cfg)?;
    let region = need(&cfg.task.region, "task.region")?;
    let seeds: Vec<C64> = cfg.task.seeds.iter().flatten().map(|z| z.value()).collect();
    let mut found = find_eigenvalues(&spec, &region.region(), &seeds)?;
    found.sort_by(|a, b| a.lambda.re.total_cmp(&b.lambda.re).then(a.lambda.im.total_cmp(&b.lambda.im)));
    let tp = test_points(&spec.op);
    let checked = found
        .par_iter()
        .map(|p| verify_eigen(&spec, p, &tp).map(|d| (p, d)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new(&["lambda_re", "lambda_im", "residual", "eigen_deviation"]);
    let mut list = Vec::new();
    let mut summary = Vec::new();
    for (p, dev) in &checked {
        table.push(vec![cell(p.lambda.re), cell(p.lambda.im), cell(p.residual), cell(*dev)]);
        list.push(obj(vec![
            ("lambda", complex(p.lambda)),
            ("residual", num(p.residual)),
            ("eigen_deviation", num(*dev)),
        ]));
        summary.push(format!("lambda = {:.12} {:+.3e}i", p.lambda.re, p.lambda.im));
    }
    summary.push(format!("{} eigenvalue(s) in the region", list.len()));
    Ok(Outcome::ok(
        obj(vec![("eigenvalues", Value::Array(list)), ("tau", complex(krein::tau_value(&spec)?))]),
        Some(table),
        summary,
    ))
}

/// Prescribed eigen data: task fields first, then a `from = "eigenvector"` or
/// `from = "dual-pair"` perturbation block.
fn eigen_data(cfg: &ProblemConfig, res: &Resolved, point: &str) -> Result<(C64, ScaleVector, ScaleVector), CliError> {
    let (fallback_point, fallback_phi, fallback_psi) = match &cfg.perturbation {
        Some(PerturbationConfig::Eigenvector { lambda, phi, psi }) if point == "lambda" => {
            (Some(*lambda), Some(phi.clone()), Some(psi.clone()))
        }
        Some(PerturbationConfig::DualPair { mu, phi, psi }) if point == "mu" => {
            (Some(*mu), Some(phi.clone()), Some(psi.clone()))
        }
        _ => (None, None, None),
    };
    let z = if point == "lambda" { cfg.task.lambda } else { cfg.task.mu };
    let z = need(&z.or(fallback_point), &format!("task.{point}"))?.value();
    let phi = need(&cfg.task.phi.clone().or(fallback_phi), "task.phi")?;
    let psi = need(&cfg.task.psi.clone().or(fallback_psi), "task.psi")?;
    Ok((z, res.vector(&phi, "task.phi")?, res.vector(&psi, "task.psi")?))
}

/// Search box around a prescribed eigenvalue; embedded ones are approached
/// from just above the axis.
fn region_around(op: &OperatorModel, lambda: C64) -> (Region, Vec<C64>) {
    if lambda.im == 0.0 && lambda.re < op.lower_bound() {
        let hi = (lambda.re + 0.3).min(0.5 * (lambda.re + op.lower_bound()));
        (Region::Interval { lo: lambda.re - 0.3, hi }, Vec::new())
    } else {
        let r = Region::Rectangle {
            re: (lambda.re - 0.2, lambda.re + 0.2),
            im: (lambda.im + 0.01, lambda.im + 0.2),
        };
        (r, vec![lambda + C64::new(0.0, 0.05)])
    }
}

fn inverse(cfg: &ProblemConfig, res: &Resolved) -> Result<Outcome, CliError> {
    let (lambda, phi, psi) = eigen_data(cfg, res, "lambda")?;
    let sol = inverse_problem(&res.op, lambda, &phi, &psi)?;
    let spec = &sol.spec;
    let alpha = match spec.alpha {
        Alpha::Value(a) => a,
        Alpha::Zero => C64::new(0.0, 0.0),
    };
    let class = match sol.class {
        PerturbationClass::Regular => "regular",
        PerturbationClass::Parametric => "parametric",
    };
    let (region, seeds) = region_around(&res.op, lambda);
    let found = find_eigenvalues(spec, &region, &seeds)?;
    let nearest = found
        .iter()
        .min_by(|a, b| (a.lambda - lambda).norm().total_cmp(&(b.lambda - lambda).norm()));
    let round_trip = match nearest {
        Some(p) => {
            let unit = phi.clone().scaled(C64::new(1.0 / l2_norm(&res.op, &phi)?, 0.0));
            let dphi = l2_norm(&res.op, &p.phi.clone().plus(C64::new(-1.0, 0.0), unit))?;
            obj(vec![
                ("recovered", complex(p.lambda)),
                ("lambda_deviation", num((p.lambda - lambda).norm())),
                ("eigenvector_deviation", num(dphi)),
            ])
        }
        None => Value::Null,
    };
    let summary = vec![
        format!("{class} perturbation, alpha = {alpha}"),
        match nearest {
            Some(p) => format!("recovered lambda = {} (|dλ| = {:.2e})", p.lambda, (p.lambda - lambda).norm()),
            None => "lambda not recovered by the eigenvalue search".into(),
        },
    ];
    Ok(Outcome::ok(
        obj(vec![
            ("lambda", complex(lambda)),
            ("class", json!(class)),
            ("alpha", complex(alpha)),
            ("tau", complex(krein::tau_value(spec)?)),
            ("eigen_condition", complex(eigen_condition(spec, lambda)?)),
            ("round_trip", round_trip),
        ]),
        None,
        summary,
    ))
}

fn dualpair(cfg: &ProblemConfig, res: &Resolved) -> Result<Outcome, CliError> {
    let (mu, phi, psi) = eigen_data(cfg, res, "mu")?;
    let p = dual_pair(&res.op, mu, &phi, &psi)?;
    let summary = vec![
        format!("lambda = {}", p.lambda),
        format!("alpha = {}", p.alpha),
        format!("closure residual {:.2e}", p.closure_residual),
    ];
    Ok(Outcome::ok(
        obj(vec![
            ("mu", complex(p.mu)),
            ("lambda", complex(p.lambda)),
            ("alpha", complex(p.alpha)),
            ("tau", complex(krein::tau_value(&p.spec)?)),
            ("overlap", complex(p.overlap)),
            ("resolvent_overlap", complex(p.resolvent_overlap)),
            ("closure_residual", num(p.closure_residual)),
            ("condition_mu", num(p.condition_mu)),
            ("condition_lambda", num(p.condition_lambda)),
        ]),
        None,
        summary,
    ))
}

fn approx(cfg: &ProblemConfig, res: &Resolved) -> Result<Outcome, CliError> {
    let spec = res.perturbation(cfg)?;
    let tau = match (cfg.task.tau, spec.tau) {
        (Some(t), _) => C64::new(t, 0.0),
        (None, TauPolicy::Explicit(t)) => t,
        (None, TauPolicy::Auto) => {
            return Err(CliError::validation("task.tau", "missing; the limit needs a prescribed τ"))
        }
    };
    let limit = spec.with_tau(TauPolicy::Explicit(tau));
    let cutoffs = cfg.task.cutoffs.clone().unwrap_or_else(|| vec![1e2, 1e3, 1e4]);
    let z = cfg.task.z.map_or(C64::new(-1.0, 0.0), |z| z.value());
    let probes = default_probes(&res.op);
    let steps = build_sequence(&res.op, &spec.omega1, &spec.omega2, tau, &cutoffs, &WindowPolicy::default())
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new(&[
        "n", "window_lo", "window_hi", "a_n", "b_n", "eps1", "eps2", "realized", "gap", "pairing_gap",
    ]);
    let mut list = Vec::new();
    let mut summary = Vec::new();
    for s in &steps {
        let g = resolvent_gap(&s.spec(&limit), &limit, z, &probes)?;
        table.push(
            [s.n, s.window.0, s.window.1, s.a_n, s.b_n, s.eps1, s.eps2, s.realized, g.gap, g.pairing_gap]
                .map(cell)
                .to_vec(),
        );
        list.push(obj(vec![
            ("n", num(s.n)),
            ("window", json!([num(s.window.0), num(s.window.1)])),
            ("a_n", num(s.a_n)),
            ("b_n", num(s.b_n)),
            ("eps1", num(s.eps1)),
            ("eps2", num(s.eps2)),
            ("realized", num(s.realized)),
            ("gap", num(g.gap)),
            ("defect_norms", json!([num(g.defect_norms[0]), num(g.defect_norms[1])])),
            ("pairing_gap", num(g.pairing_gap)),
        ]));
        summary.push(format!("n = {:e}: realized {:.3e}, gap {:.3e}", s.n, s.realized, g.gap));
    }
    Ok(Outcome::ok(
        obj(vec![("tau", complex(tau)), ("z", complex(z)), ("steps", Value::Array(list))]),
        Some(table),
        summary,
    ))
}

fn scatter(cfg: &ProblemConfig, res: &Resolved) -> Result<Outcome, CliError> {
    let spec: PerturbationSpec = res.perturbation(cfg)?;
    let grid = need(&cfg.task.grid, "task.grid")?.points();
    let method = cfg.task.method.unwrap_or_default();
    let points = grid
        .par_iter()
        .map(|&l| match method {
            MethodName::Auto => smatrix(&spec, l),
            MethodName::Plemelj => smatrix_with(&spec, l, BoundaryMethod::Plemelj),
            MethodName::Eta => smatrix_with(&spec, l, BoundaryMethod::EtaExtrapolation),
        })
        .collect::<Vec<_>>();

    let mut table = Table::new(&["lambda", "s_re", "s_im", "abs_s", "method"]);
    let mut list = Vec::new();
    let mut skipped = Vec::new();
    for (&l, p) in grid.iter().zip(points) {
        let p = match p {
            Ok(p) => p,
            // S is only defined inside the continuous spectrum
            Err(e @ Error::OnSpectrumEdge(_)) => {
                skipped.push(obj(vec![("lambda", num(l)), ("error", json!(e.name()))]));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let (s, abs) = match p.s {
            SValue::Finite(s) => (complex(s), s.norm()),
            SValue::Infinity => (json!("Infinity"), f64::INFINITY),
        };
        let method = p.boundary.method.label();
        let (re, im) = match p.s {
            SValue::Finite(s) => (cell(s.re), cell(s.im)),
            SValue::Infinity => ("inf".into(), "inf".into()),
        };
        table.push(vec![cell(l), re, im, cell(abs), method.to_string()]);
        list.push(obj(vec![
            ("lambda", num(l)),
            ("s", s),
            ("abs_s", num(abs)),
            ("amplitude_plus", complex(p.amplitude_plus)),
            ("amplitude_minus", complex(p.amplitude_minus)),
            ("f_plus", complex(p.boundary.f_plus)),
            ("f_minus", complex(p.boundary.f_minus)),
            ("method", json!(method)),
        ]));
    }
    let worst = list
        .iter()
        .filter_map(|v| v["abs_s"].as_f64())
        .map(|a| (a - 1.0).abs())
        .fold(0.0, f64::max);
    let summary = vec![
        format!("{} energies, {} skipped at the spectrum edge", list.len(), skipped.len()),
        format!("max ||S| - 1| = {worst:.3e}"),
    ];
    Ok(Outcome::ok(
        obj(vec![("points", Value::Array(list)), ("skipped", Value::Array(skipped))]),
        Some(table),
        summary,
    ))
}

fn verify_examples() -> Result<Outcome, CliError> {
    let reports = corpus::run_all();
    let mut table = Table::new(&[
        "example", "check", "expected_re", "expected_im", "computed_re", "computed_im", "deviation", "tolerance",
        "provenance", "passed",
    ]);
    let mut list = Vec::new();
    let mut summary = Vec::new();
    let mut failed = Vec::new();
    for r in &reports {
        let mut checks = Vec::new();
        for c in &r.checks {
            let g = &c.golden;
            let (cre, cim) = c.computed.map_or((String::new(), String::new()), |z| (cell(z.re), cell(z.im)));
            table.push(vec![
                r.id.to_string(),
                g.name.clone(),
                cell(g.value.re),
                cell(g.value.im),
                cre,
                cim,
                c.deviation.map(cell).unwrap_or_default(),
                cell(g.tolerance),
                g.provenance.label().to_string(),
                c.passed.to_string(),
            ]);
            if !c.passed {
                failed.push(format!("example {} {}", r.id, g.name));
            }
            checks.push(obj(vec![
                ("name", json!(g.name)),
                ("operation", json!(g.operation)),
                ("expected", complex(g.value)),
                ("computed", c.computed.map_or(Value::Null, complex)),
                ("deviation", c.deviation.map_or(Value::Null, num)),
                ("tolerance", num(g.tolerance)),
                ("provenance", json!(g.provenance.label())),
                ("passed", json!(c.passed)),
                ("error", c.error.as_ref().map_or(Value::Null, |e| json!(e))),
                ("note", json!(g.note)),
            ]));
        }
        let passed = r.checks.iter().filter(|c| c.passed).count();
        summary.push(format!(
            "{} example {}: {} ({passed}/{})",
            if r.passed() { "PASS" } else { "FAIL" },
            r.id,
            r.title,
            r.checks.len()
        ));
        list.push(obj(vec![
            ("id", json!(r.id)),
            ("title", json!(r.title)),
            ("passed", json!(r.passed())),
            ("checks", Value::Array(checks)),
        ]));
    }
    let mut out = Outcome::ok(obj(vec![("examples", Value::Array(list))]), Some(table), summary);
    if !failed.is_empty() {
        out.mismatch = Some(format!("{} golden value(s) not reproduced: {}", failed.len(), failed.join(", ")));
    }
    Ok(out)
}

/// Independent residual checks on a stored result: reported eigenvalues must
/// still satisfy the eigenvalue condition of the rebuilt perturbation.
pub fn residual_checks(kind: TaskKind, cfg: &ProblemConfig, result: &Value) -> Result<Vec<String>, CliError> {
    let lambdas: Vec<Value> = match kind {
        TaskKind::Eigen => result["eigenvalues"]
            .as_array()
            .map(|a| a.iter().map(|e| e["lambda"].clone()).collect())
            .unwrap_or_default(),
        TaskKind::Dualpair => vec![result["mu"].clone(), result["lambda"].clone()],
        _ => return Ok(Vec::new()),
    };
    let res = Resolved::new(cfg)?;
    let spec = match kind {
        TaskKind::Dualpair => {
            let (mu, phi, psi) = eigen_data(cfg, &res, "mu")?;
            dual_pair(&res.op, mu, &phi, &psi)?.spec
        }
        _ => res.perturbation(cfg)?,
    };
    let mut out = Vec::new();
    for (i, v) in lambdas.iter().enumerate() {
        let (Some(re), Some(im)) = (v["re"].as_f64(), v["im"].as_f64()) else {
            out.push(format!("eigenvalue {i}: unreadable"));
            continue;
        };
        let lambda = C64::new(re, im);
        let r = eigen_condition(&spec, lambda)?.norm();
        if !(r < 1e-7) {
            out.push(format!("eigenvalue {lambda}: condition residual {r:e}"));
        }
    }
    Ok(out)
}
