//! One function per command. Each returns the JSON result and, where the
//! command produces a sweep, the rows of `sweep.csv`.

use nulab::coefficients::{compute_lambda, sup_over_ball, RadialCoefficient};
use nulab::counterexamples::{
    blowup_profile, eval_f, eval_u, eval_u_prime, membership, residual_check, source_sweep, ExampleId, ExamplePair,
    ExampleSpec, Kernels, SourceForm, EXAMPLE_DOMAIN_RADIUS, MEMBERSHIP_CACHE_TOL,
};
use nulab::exponents::{classify_regime, critical_source_exponent, derive_exponents, derive_exponents_float, Exponent, ProblemParams};
use nulab::harness::{
    harnack_sweep, holder_exponent, log_bound_check, log_nodes, moser_norm_chain, plateau_family, sup_bound_check,
    truncated_source_sweep, Profile,
};
use nulab::quadrature::{eval_kernel, integrate_radial_power_log, KernelCache, KernelSpec};
use nulab::solver::{
    max_principle_check, solve_2d_diagonal, solve_radial, DiscreteSolution, InnerBc, Mesh, RadialProblem, SolverConfig,
    SourceSign, Source, SquareDomain,
};
use nulab::{Error, Result};
use serde_json::{json, Value};

use crate::config::*;
use crate::output::{Cell, Table};

pub struct Outcome {
    pub result: Value,
    pub table: Option<Table>,
}

const DEFAULT_KERNEL_TOL: f64 = 1e-10;
const DEFAULT_QUADRATURE_TOL: f64 = 1e-10;
const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-9;
const DEFAULT_FIT_THRESHOLD: f64 = 0.9;
/// Relative residual bound reported by `example residual`.
pub const RESIDUAL_THRESHOLD: f64 = 1e-4;
/// Allowed relative spread of fitted constants across meshes.
pub const MESH_STABILITY_BAND: f64 = 0.2;

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result types serialize")
}

fn missing(name: &str) -> Error {
    Error::Parameter(format!("{name} is required"))
}

impl Run {
    fn n_or(&self, default: u32) -> u32 {
        self.params.n.unwrap_or(default)
    }

    fn exponent_or(&self, e: Option<Exponent>, default: Exponent) -> Exponent {
        e.unwrap_or(default)
    }

    fn gamma(&self) -> f64 {
        self.params.gamma.unwrap_or(2.0)
    }

    fn kernel_tol(&self) -> f64 {
        self.tolerances.kernel_tol.unwrap_or(DEFAULT_KERNEL_TOL)
    }

    fn quad_tol(&self, default: f64) -> f64 {
        self.tolerances.quadrature_tol.unwrap_or(default)
    }

    fn fit_threshold(&self) -> f64 {
        self.tolerances.fit_threshold.unwrap_or(DEFAULT_FIT_THRESHOLD)
    }

    fn solver(&self, base: SolverConfig) -> SolverConfig {
        self.solver.apply(base)
    }

    fn example(&self, args: &ExampleArgs) -> Result<ExampleSpec> {
        let id = args.id.ok_or_else(|| missing("example id"))?;
        let n = self.params.n.ok_or_else(|| missing("n"))?;
        let q = self.params.q.map(|q| q.to_f64());
        let mut spec = ExampleSpec::new(id, n, q)?;
        if let Some(t) = args.example_theta {
            spec = spec.with_theta(t)?;
        }
        Ok(spec.with_form(args.form.unwrap_or_default()))
    }
}

pub fn execute(run: &Run) -> Result<Outcome> {
    match &run.command {
        Command::Exponents(a) => exponents(run, a),
        Command::Coefficients(a) => coefficients(run, a),
        Command::Kernel(a) => kernel(run, a),
        Command::Norm(a) => norm(run, a),
        Command::Solve(a) => solve(run, a),
        Command::ExampleEval(a) => example_eval(run, a),
        Command::ExampleResidual(a) => example_residual(run, a),
        Command::ExampleBlowup(a) => example_blowup(run, a),
        Command::ExampleMembership(a) => example_membership(run, a),
        Command::ExampleSweep(a) => example_sweep(run, a),
        Command::VerifySupBound(a) => verify_sup_bound(run, a),
        Command::VerifyHarnack(a) => verify_harnack(run, a),
        Command::VerifyHolder(a) => verify_holder(run, a),
        Command::VerifyMoserChain(a) => verify_moser(run, a),
        Command::VerifyLogBound(a) => verify_log_bound(run, a),
        Command::Report(_) => Err(Error::Parameter("report runs are expanded by the runner".into())),
    }
}

fn exponents(run: &Run, a: &ExponentsArgs) -> Result<Outcome> {
    let p = &run.params;
    let params = ProblemParams::new(
        p.n.ok_or_else(|| missing("n"))?,
        p.p.ok_or_else(|| missing("p"))?,
        p.q.ok_or_else(|| missing("q"))?,
        p.s.ok_or_else(|| missing("s"))?,
    )
    .with_gamma(run.gamma());
    let table = if a.float { derive_exponents_float(&params)? } else { derive_exponents(&params)? };
    let regime = classify_regime(&params)?;
    let mut result = to_value(&table);
    let exact: serde_json::Map<String, Value> =
        table.exact_strings().into_iter().map(|(k, v)| (k.to_string(), Value::String(v))).collect();
    let obj = result.as_object_mut().expect("table is an object");
    obj.insert("params".into(), to_value(&params));
    obj.insert("exact".into(), Value::Object(exact));
    obj.insert("regime".into(), to_value(&regime));
    Ok(Outcome { result, table: None })
}

fn coefficients(run: &Run, a: &CoefficientsArgs) -> Result<Outcome> {
    let radius = a.radius.unwrap_or(EXAMPLE_DOMAIN_RADIUS);
    let beta = a.beta.ok_or_else(|| missing("beta"))?;
    let theta = a.theta.ok_or_else(|| missing("theta"))?;
    let coef = RadialCoefficient::with_radius(beta, theta, radius)?.scaled(a.scale.unwrap_or(1.0));
    let params = ProblemParams::new(
        run.n_or(3),
        run.exponent_or(run.params.p, Exponent::Infinite),
        run.exponent_or(run.params.q, Exponent::Infinite),
        run.exponent_or(run.params.s, Exponent::Infinite),
    );
    let report = compute_lambda(&coef, &coef, &params, radius)?;
    let samples = a.samples.unwrap_or(64).max(2);
    let mut table = Table::new(&[("r", "radius"), ("a", "coefficient a(r)"), ("inv_a", "1 / a(r)")]);
    for r in log_nodes(radius * 1e-8, radius, samples) {
        let v = coef.value(r);
        table.push(vec![r.into(), v.into(), (1.0 / v).into()]);
    }
    Ok(Outcome {
        result: json!({
            "coefficient": coef,
            "params": params,
            "turning_radius": coef.turning_radius(),
            "sup_a": sup_over_ball(&coef, radius, false),
            "sup_inv_a": sup_over_ball(&coef, radius, true),
            "ellipticity": report,
        }),
        table: Some(table),
    })
}

fn kernel(run: &Run, a: &KernelArgs) -> Result<Outcome> {
    let powers = if a.m.is_empty() { vec![1, 2, 3] } else { a.m.clone() };
    let tol = run.kernel_tol();
    let mut evals = Vec::new();
    let mut table = Table::new(&[
        ("m", "kernel power"),
        ("x", "radius |x|"),
        ("status", "finite or divergent"),
        ("value", "K_m(|x|)"),
        ("error_estimate", "quadrature error estimate"),
        ("split_consistent", "agreement with the split at |x|^(1/2)"),
    ]);
    for &m in &powers {
        for &x in &a.x {
            let e = eval_kernel(KernelSpec::new(m, x)?, tol)?;
            let (status, value, err) = match e.result.finite() {
                Some(r) => ("finite", r.value, r.error_estimate),
                None => ("divergent", f64::INFINITY, f64::NAN),
            };
            let split = e.split.as_ref().map(|s| s.consistent.to_string()).unwrap_or_else(|| "n/a".into());
            table.push(vec![(m as u32).into(), x.into(), status.into(), value.into(), err.into(), Cell::S(split)]);
            evals.push(e);
        }
    }
    Ok(Outcome { result: json!({ "tolerance": tol, "evaluations": evals }), table: Some(table) })
}

fn norm(run: &Run, a: &NormArgs) -> Result<Outcome> {
    if let (Some(pa), Some(pb)) = (a.a, a.b) {
        let radius = a.radius.unwrap_or(0.5);
        let tol = run.quad_tol(DEFAULT_QUADRATURE_TOL);
        let integral = integrate_radial_power_log(pa, pb, 0.0, radius, tol)?;
        return Ok(Outcome {
            result: json!({ "a": pa, "b": pb, "r_lo": 0.0, "r_hi": radius, "tolerance": tol, "integral": integral }),
            table: None,
        });
    }
    let spec = run.example(&a.example)?;
    let s = run.params.s.ok_or_else(|| missing("s"))?.to_f64();
    let cutoff = a.cutoff.unwrap_or(1e-8);
    let m = membership(&spec, &[s], cutoff, run.quad_tol(DEFAULT_MEMBERSHIP_TOL))?;
    let table = ladder_table(&m);
    Ok(Outcome { result: json!({ "spec": spec, "norm": m.rows[0] }), table: Some(table) })
}

fn ladder_table(m: &nulab::counterexamples::MembershipMatrix) -> Table {
    let mut table = Table::new(&[
        ("s", "norm exponent"),
        ("cutoff", "inner cutoff radius"),
        ("partial", "integral of |f|^s over cutoff < |x| < R"),
        ("increment", "contribution of the last dyadic shell"),
        ("relative_increment", "increment / partial"),
        ("verdict", "CONVERGENT, DIVERGENT or INCONCLUSIVE"),
    ]);
    for row in &m.rows {
        let verdict = serde_json::to_value(row.table.verdict).expect("verdict");
        for r in &row.table.rows {
            table.push(vec![
                row.s.into(),
                r.cutoff.into(),
                r.partial.into(),
                r.increment.into(),
                r.relative_increment.into(),
                Cell::S(verdict.as_str().unwrap_or_default().to_string()),
            ]);
        }
    }
    table
}

fn radial_table(sol: &DiscreteSolution) -> Table {
    let mut table = Table::new(&[("r", "mesh node"), ("u", "discrete solution")]);
    if let Mesh::Radial(m) = &sol.mesh {
        for (r, u) in m.nodes.iter().zip(&sol.values) {
            table.push(vec![(*r).into(), (*u).into()]);
        }
    }
    table
}

fn solution_summary(sol: &DiscreteSolution) -> Value {
    let (cells, r_min) = match &sol.mesh {
        Mesh::Radial(m) => (m.cells(), m.nodes[0]),
        Mesh::Grid(g) => (g.n, 0.0),
    };
    json!({
        "sup": sol.max(),
        "min": sol.min(),
        "cells": cells,
        "r_min": r_min,
        "solver_stats": sol.solver_stats,
        "config_hash": sol.config_hash,
        "boundary_range": sol.boundary_range,
    })
}

/// `-Δu = f` on `B_R` with `u(R) = 0`.
fn poisson_solution(n: u32, radius: f64, source: f64, outer: f64, cfg: &SolverConfig) -> Result<DiscreteSolution> {
    let f = move |_: f64| Ok(source);
    let a = |_: f64| 1.0;
    let problem = RadialProblem {
        n,
        radius,
        a1: &a,
        source: Source { f: &f, breakpoints: &[] },
        outer_value: outer,
        inner_value: None,
    };
    solve_radial(&problem, cfg)
}

fn solve(run: &Run, a: &SolveArgs) -> Result<Outcome> {
    let case = a.case.unwrap_or(SolveCase::Poisson);
    let dim = a.dim.unwrap_or(1);
    let source = a.source.unwrap_or(1.0);
    let outer = a.outer.unwrap_or(0.0);
    let cfg = run.solver(SolverConfig::default());
    if dim == 2 {
        let radius = a.radius.unwrap_or(1.0);
        let coef = match case {
            SolveCase::Poisson => RadialCoefficient::identity(),
            SolveCase::Coefficient => RadialCoefficient::with_radius(
                a.beta.ok_or_else(|| missing("beta"))?,
                a.theta.ok_or_else(|| missing("theta"))?,
                radius.min(0.5),
            )?,
            SolveCase::Example => return Err(Error::Parameter("examples are solved radially (dim = 1)".into())),
        };
        let a1 = move |p: [f64; 2]| coef.value((p[0] * p[0] + p[1] * p[1]).sqrt());
        let f = move |_: [f64; 2]| Ok(source);
        let bc = move |_: [f64; 2]| outer;
        let domain = SquareDomain { center: [0.0, 0.0], half_width: radius };
        let sol = solve_2d_diagonal(&a1, &f, domain, &bc, &cfg)?;
        let mp = (source >= 0.0).then(|| max_principle_check(&sol, if source == 0.0 { SourceSign::Zero } else { SourceSign::NonNegative }));
        let mut table = Table::new(&[("x", "cell centre x"), ("y", "cell centre y"), ("u", "discrete solution")]);
        for (p, u) in sol.points().iter().zip(&sol.values) {
            table.push(vec![p[0].into(), p[1].into(), (*u).into()]);
        }
        return Ok(Outcome {
            result: json!({
                "case": case, "dim": 2, "half_width": radius, "source": source, "outer": outer,
                "config": cfg, "solution": solution_summary(&sol), "max_principle": mp,
            }),
            table: Some(table),
        });
    }
    match case {
        SolveCase::Poisson | SolveCase::Coefficient => {
            let n = run.n_or(3);
            let (radius, coef) = if case == SolveCase::Poisson {
                (a.radius.unwrap_or(1.0), RadialCoefficient::identity())
            } else {
                let r = a.radius.unwrap_or(EXAMPLE_DOMAIN_RADIUS);
                (
                    r,
                    RadialCoefficient::with_radius(
                        a.beta.ok_or_else(|| missing("beta"))?,
                        a.theta.ok_or_else(|| missing("theta"))?,
                        r,
                    )?,
                )
            };
            let a1 = move |r: f64| coef.value(r);
            let f = move |_: f64| Ok(source);
            let problem = RadialProblem {
                n,
                radius,
                a1: &a1,
                source: Source { f: &f, breakpoints: &[] },
                outer_value: outer,
                inner_value: None,
            };
            let sol = solve_radial(&problem, &cfg)?;
            let mp = (source >= 0.0)
                .then(|| max_principle_check(&sol, if source == 0.0 { SourceSign::Zero } else { SourceSign::NonNegative }));
            let exact_sup = (case == SolveCase::Poisson).then(|| outer + source * radius * radius / (2.0 * n as f64));
            let sup = sol.max().max(sol.min().abs());
            Ok(Outcome {
                result: json!({
                    "case": case, "dim": 1, "n": n, "radius": radius, "coefficient": coef,
                    "source": source, "outer": outer, "config": cfg,
                    "solution": solution_summary(&sol),
                    "exact_sup": exact_sup,
                    "sup_error": exact_sup.map(|e| (sup - e).abs()),
                    "max_principle": mp,
                }),
                table: Some(radial_table(&sol)),
            })
        }
        SolveCase::Example => {
            let spec = run.example(&a.example)?.with_form(SourceForm::Consistent);
            let radius = EXAMPLE_DOMAIN_RADIUS;
            let tol = run.kernel_tol();
            let cache = KernelCache::build(&[2, 3], cfg.r_min * 0.5, 0.5, MEMBERSHIP_CACHE_TOL)?;
            let kernels = Kernels::Cached { cache: &cache, tol };
            let coef = spec.coefficient();
            let a1 = move |r: f64| coef.value(r);
            let f = move |r: f64| eval_f(&spec, r, kernels);
            let inner = match cfg.inner_bc {
                InnerBc::DirichletFromKernel => Some(eval_u(&spec, cfg.r_min, tol)?),
                InnerBc::NoFlux => None,
            };
            let problem = RadialProblem {
                n: spec.n,
                radius,
                a1: &a1,
                source: Source { f: &f, breakpoints: &[] },
                outer_value: eval_u(&spec, radius, tol)?,
                inner_value: inner,
            };
            let sol = solve_radial(&problem, &cfg)?;
            let mut table = Table::new(&[("r", "mesh node"), ("u", "discrete solution"), ("u_exact", "explicit solution")]);
            let mut max_err: f64 = 0.0;
            if let Mesh::Radial(m) = &sol.mesh {
                for (r, u) in m.nodes.iter().zip(&sol.values) {
                    let ex = eval_u(&spec, *r, tol)?;
                    max_err = max_err.max((u - ex).abs());
                    table.push(vec![(*r).into(), (*u).into(), ex.into()]);
                }
            }
            Ok(Outcome {
                result: json!({
                    "case": case, "dim": 1, "spec": spec, "radius": radius, "config": cfg,
                    "solution": solution_summary(&sol),
                    "max_nodal_error": max_err,
                    "kernel_cache": cache.info(),
                }),
                table: Some(table),
            })
        }
    }
}

fn example_eval(run: &Run, a: &EvalArgs) -> Result<Outcome> {
    let spec = run.example(&a.example)?;
    let tol = run.kernel_tol();
    let kernels = Kernels::Direct { tol };
    let mut table = Table::new(&[("r", "radius"), ("u", "u(r)"), ("u_prime", "u'(r)"), ("f", "source f(r)")]);
    let mut points = Vec::new();
    for &r in &a.r {
        let (u, up, f) = (eval_u(&spec, r, tol)?, eval_u_prime(&spec, r, kernels)?, eval_f(&spec, r, kernels)?);
        table.push(vec![r.into(), u.into(), up.into(), f.into()]);
        points.push(json!({ "r": r, "u": u, "u_prime": up, "f": f }));
    }
    Ok(Outcome {
        result: json!({ "spec": spec, "source_terms": spec.source_terms(), "kernel_tol": tol, "points": points }),
        table: Some(table),
    })
}

fn example_residual(run: &Run, a: &ResidualArgs) -> Result<Outcome> {
    let spec = run.example(&a.example)?;
    let tol = run.kernel_tol();
    let pair = ExamplePair { spec, kernels: Kernels::Direct { tol } };
    let window = [a.r_lo.unwrap_or(1e-2), a.r_hi.unwrap_or(EXAMPLE_DOMAIN_RADIUS)];
    let report = residual_check(
        &pair,
        window,
        a.nodes.unwrap_or(64),
        a.diff_step.unwrap_or(nulab::counterexamples::DEFAULT_DIFF_STEP),
    )?;
    let mut table = Table::new(&[("r", "node radius"), ("residual", "relative strong-form residual")]);
    for (r, v) in report.radii.iter().zip(&report.residuals) {
        table.push(vec![(*r).into(), (*v).into()]);
    }
    Ok(Outcome {
        result: json!({
            "spec": spec,
            "source_terms": spec.source_terms(),
            "kernel_tol": tol,
            "threshold": RESIDUAL_THRESHOLD,
            "within_threshold": report.residual_sup < RESIDUAL_THRESHOLD,
            "residual": report,
        }),
        table: Some(table),
    })
}

fn example_blowup(run: &Run, a: &BlowupArgs) -> Result<Outcome> {
    let spec = run.example(&a.example)?;
    let kmax = a.kmax.unwrap_or(30);
    let fit = [a.fit_from.unwrap_or(10.min(kmax.saturating_sub(3))), a.fit_to.unwrap_or(kmax)];
    let profile = blowup_profile(&spec, kmax, fit, run.kernel_tol())?;
    let mut table = Table::new(&[("k", "dyadic level"), ("eps", "radius 2^-k"), ("u", "u(2^-k)")]);
    for ((k, r), u) in profile.k.iter().zip(&profile.radii).zip(&profile.values) {
        table.push(vec![(*k).into(), (*r).into(), (*u).into()]);
    }
    Ok(Outcome { result: json!({ "spec": spec, "profile": profile }), table: Some(table) })
}

fn example_membership(run: &Run, a: &MembershipArgs) -> Result<Outcome> {
    let spec = run.example(&a.example)?;
    let s_list = if a.s_list.is_empty() {
        let s0 = critical_source_exponent(spec.n, spec.q)
            .ok_or_else(|| Error::Parameter("s0 is undefined; give s_list explicitly".into()))?;
        vec![s0, 1.2 * s0]
    } else {
        a.s_list.clone()
    };
    let m = membership(&spec, &s_list, a.cutoff.unwrap_or(1e-8), run.quad_tol(DEFAULT_MEMBERSHIP_TOL))?;
    let table = ladder_table(&m);
    let verdicts: serde_json::Map<String, Value> = m
        .rows
        .iter()
        .map(|r| (crate::output::format_float(r.s), to_value(&r.table.verdict)))
        .collect();
    Ok(Outcome { result: json!({ "verdicts": verdicts, "matrix": m }), table: Some(table) })
}

fn example_sweep(run: &Run, a: &SweepArgs) -> Result<Outcome> {
    let spec = run.example(&a.example)?;
    let sweep = source_sweep(&spec, a.kmax.unwrap_or(40), a.refine.unwrap_or(4), Kernels::Direct { tol: run.kernel_tol() })?;
    let mut table = Table::new(&[("r", "radius"), ("f", "source f(r)")]);
    for (r, f) in sweep.radii.iter().zip(&sweep.values) {
        table.push(vec![(*r).into(), (*f).into()]);
    }
    Ok(Outcome { result: json!({ "spec": spec, "sweep": sweep }), table: Some(table) })
}

fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    hi / lo
}

fn verify_sup_bound(run: &Run, a: &SupBoundArgs) -> Result<Outcome> {
    let theta = a.ball_fraction.unwrap_or(0.5);
    match a.case.unwrap_or(ProfileCase::Smooth) {
        ProfileCase::Smooth => {
            let n = run.n_or(3);
            let radius = a.radius.unwrap_or(1.0);
            let params = ProblemParams::new(
                n,
                run.exponent_or(run.params.p, Exponent::Infinite),
                run.exponent_or(run.params.q, Exponent::Infinite),
                run.exponent_or(run.params.s, Exponent::Infinite),
            )
            .with_gamma(run.gamma());
            let resolutions = if a.resolutions.is_empty() { vec![256, 512, 1024] } else { a.resolutions.clone() };
            let inputs = nulab::harness::BoundInputs {
                params,
                coefficient: RadialCoefficient::identity(),
                theta,
                radius,
            };
            let mut reports = Vec::new();
            let mut table = Table::new(&[
                ("cells", "radial cells"),
                ("lhs", "sup of |u| on B_(theta R)"),
                ("rhs_norm_term", "L^gamma term"),
                ("rhs_source_term", "L^s source term"),
                ("fitted_C", "lhs / (lambda_factor (rhs_norm_term + rhs_source_term))"),
            ]);
            for &cells in &resolutions {
                let sol = poisson_solution(n, radius, 1.0, 0.0, &run.solver(SolverConfig { cells, ..SolverConfig::default() }))?;
                let u = Profile::from_solution(&sol)?;
                let f = Profile::constant(1.0, radius);
                let r = sup_bound_check(&u, &f, &inputs)?;
                table.push(vec![
                    cells.into(),
                    r.lhs.into(),
                    r.rhs_norm_term.into(),
                    r.rhs_source_term.value().unwrap_or(f64::INFINITY).into(),
                    r.fitted_c.value().unwrap_or(f64::INFINITY).into(),
                ]);
                reports.push(r);
            }
            let cs: Vec<f64> = reports.iter().filter_map(|r| r.fitted_c.value()).collect();
            let band = spread(&cs);
            Ok(Outcome {
                result: json!({
                    "case": "smooth",
                    "resolutions": resolutions,
                    "reports": reports,
                    "fitted_C_spread": band,
                    "mesh_stable": cs.len() == reports.len() && band <= 1.0 + MESH_STABILITY_BAND,
                }),
                table: Some(table),
            })
        }
        ProfileCase::Example => {
            let spec = run.example(&a.example)?;
            let s = run.params.s.ok_or_else(|| missing("s"))?.to_f64();
            let p = run.exponent_or(run.params.p, Exponent::Infinite);
            let ks = if a.ks.is_empty() { vec![8, 12, 16, 20, 24, 28, 32] } else { a.ks.clone() };
            let cfg = run.solver(SolverConfig { cells: 4096, r_min: 1e-12, grading: 6.0, ..SolverConfig::default() });
            let sweep = truncated_source_sweep(&spec, p, s, &ks, &cfg)?;
            let mut table = Table::new(&[
                ("k", "truncation level"),
                ("cutoff", "2^-k"),
                ("lhs", "sup of |u_k| on B_(theta R)"),
                ("f_norm_s", "L^s norm of the truncated source"),
                ("fitted_C", "fitted constant"),
            ]);
            for row in &sweep.rows {
                table.push(vec![
                    row.k.into(),
                    row.cutoff.into(),
                    row.report.lhs.into(),
                    row.report.f_norm_s.value().unwrap_or(f64::INFINITY).into(),
                    row.report.fitted_c.value().unwrap_or(f64::INFINITY).into(),
                ]);
            }
            Ok(Outcome { result: json!({ "case": "example", "spec": spec, "config": cfg, "sweep": sweep }), table: Some(table) })
        }
    }
}

fn verify_harnack(run: &Run, a: &HarnackArgs) -> Result<Outcome> {
    let n = run.n_or(3);
    let q = run.exponent_or(run.params.q, Exponent::int(2)).to_f64();
    let s = run.exponent_or(run.params.s, Exponent::int(8)).to_f64();
    let radius = a.radius.unwrap_or(EXAMPLE_DOMAIN_RADIUS);
    let or = |v: &Vec<f64>, d: &[f64]| if v.is_empty() { d.to_vec() } else { v.clone() };
    let betas = or(&a.betas, &[0.5, 1.0, 1.4]);
    let thetas = or(&a.thetas, &[0.0, 0.5, 1.0]);
    let resolutions = if a.resolutions.is_empty() { vec![512, 1024, 2048] } else { a.resolutions.clone() };
    let base = run.solver(SolverConfig { r_min: 1e-8, ..SolverConfig::default() });
    let sweep = harnack_sweep(n, q, s, radius, &betas, &thetas, &resolutions, &base)?;
    let mut table = Table::new(&[
        ("beta", "coefficient power"),
        ("theta", "coefficient log power"),
        ("cells", "radial cells"),
        ("quotient", "sup_(R/2) u / (inf_(R/2) u + R^(2-n/s) |f|_s)"),
    ]);
    for e in &sweep.entries {
        for (cells, qv) in resolutions.iter().zip(&e.quotients) {
            table.push(vec![e.beta.into(), e.theta.into(), (*cells).into(), (*qv).into()]);
        }
    }
    Ok(Outcome { result: json!({ "config": base, "sweep": sweep }), table: Some(table) })
}

/// Radial profile of `-Δu = 1` on `B_1` in `R^n`.
fn smooth_profile_solution(run: &Run, n: u32) -> Result<DiscreteSolution> {
    poisson_solution(n, 1.0, 1.0, 0.0, &run.solver(SolverConfig { cells: 2048, ..SolverConfig::default() }))
}

fn example_profile(spec: ExampleSpec, tol: f64) -> Result<Profile<'static>> {
    Profile::from_fn(move |r| eval_u(&spec, r, tol), log_nodes(1e-40, 0.5, 300), true)
}

fn verify_holder(run: &Run, a: &HolderArgs) -> Result<Outcome> {
    let levels = a.levels.unwrap_or(8);
    let radius = a.radius.unwrap_or(0.25);
    let (report, context) = match a.case.unwrap_or(ProfileCase::Smooth) {
        ProfileCase::Smooth => {
            let sol = smooth_profile_solution(run, run.n_or(3))?;
            let u = Profile::from_solution(&sol)?;
            let center = a.center.unwrap_or(0.5);
            (holder_exponent(&u, center, radius, levels)?, json!({ "case": "smooth", "solution": solution_summary(&sol) }))
        }
        ProfileCase::Example => {
            let spec = run.example(&a.example)?;
            let u = example_profile(spec, run.kernel_tol())?;
            let center = a.center.unwrap_or(0.0);
            (holder_exponent(&u, center, radius, levels)?, json!({ "case": "example", "spec": spec }))
        }
    };
    let mut table = Table::new(&[("scale", "ball radius r_j"), ("oscillation", "osc of u on B_(r_j)(c)")]);
    for (r, o) in report.scales.iter().zip(&report.oscillations) {
        table.push(vec![(*r).into(), o.unwrap_or(f64::INFINITY).into()]);
    }
    Ok(Outcome { result: json!({ "context": context, "holder": report }), table: Some(table) })
}

fn verify_moser(run: &Run, a: &MoserArgs) -> Result<Outcome> {
    let gamma0 = a.gamma0.unwrap_or(run.gamma());
    let length = a.length.unwrap_or(10);
    let chain_params = |n: u32, q: Exponent| {
        ProblemParams::new(
            n,
            run.exponent_or(run.params.p, Exponent::Infinite),
            q,
            run.exponent_or(run.params.s, Exponent::Infinite),
        )
    };
    let delta_of = |params: &ProblemParams| -> Result<f64> {
        derive_exponents_float(params)?
            .delta
            .value()
            .filter(|d| *d > 1.0)
            .ok_or_else(|| Error::Parameter("δ > 1 is required for the chain".into()))
    };
    let (report, context) = match a.case.unwrap_or(ProfileCase::Smooth) {
        ProfileCase::Smooth => {
            let n = run.n_or(3);
            let params = chain_params(n, run.exponent_or(run.params.q, Exponent::Infinite));
            let delta = delta_of(&params)?;
            let sol = smooth_profile_solution(run, n)?;
            let u = Profile::from_solution(&sol)?;
            (
                moser_norm_chain(&u, n, gamma0, delta, length)?,
                json!({ "case": "smooth", "params": params, "solution": solution_summary(&sol) }),
            )
        }
        ProfileCase::Example => {
            let spec = run.example(&a.example)?;
            let params = chain_params(spec.n, Exponent::Real(spec.q));
            let delta = delta_of(&params)?;
            let u = example_profile(spec, run.kernel_tol())?;
            (moser_norm_chain(&u, spec.n, gamma0, delta, length)?, json!({ "case": "example", "params": params, "spec": spec }))
        }
    };
    let mut table = Table::new(&[
        ("m", "chain index"),
        ("rho", "ball radius 1/4 + 4^-(m+1)"),
        ("t", "exponent gamma0 delta^m"),
        ("norm", "L^t norm on B_rho"),
    ]);
    for (m, ((r, t), v)) in report.radii.iter().zip(&report.exponents).zip(&report.chain_norms).enumerate() {
        table.push(vec![m.into(), (*r).into(), (*t).into(), (*v).into()]);
    }
    Ok(Outcome { result: json!({ "context": context, "chain": report }), table: Some(table) })
}

fn verify_log_bound(run: &Run, a: &LogBoundArgs) -> Result<Outcome> {
    let n = run.n_or(3);
    let q = run.exponent_or(run.params.q, Exponent::int(2)).to_f64();
    let s = run.exponent_or(run.params.s, Exponent::int(8)).to_f64();
    let ms = if a.ms.is_empty() { (3..=10).map(|k| 2f64.powi(k)).collect() } else { a.ms.clone() };
    let c = a.plateau_radius.unwrap_or(0.25);
    let radius = a.radius.unwrap_or(EXAMPLE_DOMAIN_RADIUS);
    let family = plateau_family(n, q, s, c, &ms)?;
    let (coef, context) = match a.coefficient.unwrap_or(FamilyCoefficient::Uniform) {
        FamilyCoefficient::Uniform => (RadialCoefficient::identity(), json!({ "coefficient": "uniform" })),
        FamilyCoefficient::Example => {
            let mut args = a.example.clone();
            args.id.get_or_insert(ExampleId::Ex1);
            let spec = run.example(&args)?;
            (spec.coefficient(), json!({ "coefficient": "example", "spec": spec }))
        }
    };
    let cfg = run.solver(SolverConfig { cells: 4096, r_min: 1e-12, ..SolverConfig::default() });
    let report = log_bound_check(&family, coef, radius, &cfg)?;
    let threshold = run.fit_threshold();
    let mut table = Table::new(&[
        ("m", "plateau level M"),
        ("s0_norm", "L^s0 norm of f_M"),
        ("s_norm", "L^s norm of f_M"),
        ("sup", "sup of u_M"),
        ("log_term", "log(s_norm / s0_norm + 1)"),
        ("ratio", "sup / (s0_norm (log_term + 1))"),
    ]);
    for m in &report.members {
        table.push(vec![m.m.into(), m.s0_norm.into(), m.s_norm.into(), m.sup_norm.into(), m.log_term.into(), m.ratio.into()]);
    }
    Ok(Outcome {
        result: json!({
            "context": context,
            "family": family,
            "config": cfg,
            "fit_threshold": threshold,
            "fit_acceptable": report.fit_quality.map(|r| r >= threshold),
            "report": report,
        }),
        table: Some(table),
    })
}
