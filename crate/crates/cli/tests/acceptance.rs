//! Acceptance checks. Prints one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines reach stdout in order. The
//! process fails when a criterion's outcome differs from the expected one;
//! `EXPECTED_FAIL` lists criteria whose check is run faithfully but cannot
//! pass with the example data as displayed.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nulab::coefficients::{Measure, RadialCoefficient};
use nulab::counterexamples::{
    blowup_profile, eval_u, membership, residual_check, source_sweep, ExampleId, ExamplePair, ExampleSpec, Kernels,
    SourceForm, EXAMPLE_DOMAIN_RADIUS,
};
use nulab::exponents::{critical_source_exponent, derive_exponents, Exponent, ProblemParams, Quantity, Rational};
use nulab::harness::{
    harnack_quotient, harnack_sweep, log_bound_check, log_nodes, moser_norm_chain, plateau_family, Profile,
};
use nulab::quadrature::{integrate_radial_power_log, NormVerdict};
use nulab::solver::{solve_radial, DiscreteSolution, Mesh, RadialProblem, SolverConfig, Source};

/// The displayed EX1 source is not the one generated by `u` and `a_1`; see
/// the README section on source forms.
const EXPECTED_FAIL: &[u32] = &[4];

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
}

fn check(id: u32, budget: Option<Duration>, body: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (ok, mut detail) = body();
    let elapsed = start.elapsed();
    let mut pass = ok;
    if let Some(b) = budget {
        pass &= elapsed < b;
        detail.push_str(&format!("; runtime {:.3}s (budget {:.1}s)", elapsed.as_secs_f64(), b.as_secs_f64()));
    }
    println!("{} criterion {id:>2}: {detail}", if pass { "PASS" } else { "FAIL" });
    Outcome { id, pass, detail }
}

fn secs(s: f64) -> Option<Duration> {
    Some(Duration::from_secs_f64(s))
}

fn exact(q: &Quantity) -> Option<Rational> {
    q.exact()
}

fn poisson(n: u32, cells: usize) -> DiscreteSolution {
    let f = |_: f64| Ok(1.0);
    let a = |_: f64| 1.0;
    let problem = RadialProblem {
        n,
        radius: 1.0,
        a1: &a,
        source: Source { f: &f, breakpoints: &[] },
        outer_value: 0.0,
        inner_value: None,
    };
    solve_radial(&problem, &SolverConfig { cells, ..SolverConfig::default() }).expect("poisson solve")
}

fn nodal_error(sol: &DiscreteSolution, n: u32) -> f64 {
    let Mesh::Radial(mesh) = &sol.mesh else { unreachable!("radial solve") };
    mesh.nodes
        .iter()
        .zip(&sol.values)
        .map(|(r, v)| (v - (1.0 - r * r) / (2.0 * n as f64)).abs())
        .fold(0.0, f64::max)
}

fn spec(id: ExampleId, q: Option<f64>) -> ExampleSpec {
    ExampleSpec::new(id, 3, q).expect("admissible example")
}

fn c1() -> (bool, String) {
    let t = derive_exponents(&ProblemParams::new(3, Exponent::int(4), Exponent::int(2), Exponent::int(8))).unwrap();
    let want = [
        ("p*", &t.p_star, Rational::new(8, 7)),
        ("chi", &t.chi, Rational::new(7, 6)),
        ("delta", &t.delta, Rational::new(8, 7)),
        ("s0", &t.s0, Rational::from_integer(6)),
        ("q*", &t.q_star, Rational::new(12, 5)),
    ];
    let exact_ok = want.iter().all(|(_, q, w)| exact(q) == Some(*w));
    let qs = [1.6, 2.0, 2.5, 3.0, 10.0, 100.0, 1e3, 1e6];
    let s0: Vec<f64> = qs.iter().map(|&q| critical_source_exponent(3, q).unwrap()).collect();
    let decreasing = s0.windows(2).all(|w| w[1] < w[0]);
    let s0_big = derive_exponents(&ProblemParams::new(3, Exponent::int(4), Exponent::int(1_000_000), Exponent::int(8)))
        .unwrap()
        .s0
        .as_f64();
    let limit_gap = (s0_big - 1.5).abs();
    let ok = exact_ok && decreasing && limit_gap < 1e-5;
    let shown: Vec<String> = want.iter().map(|(k, q, _)| format!("{k}={}", q.as_f64())).collect();
    (ok, format!("exact={exact_ok} [{}], s0 decreasing={decreasing}, |s0(1e6)-1.5|={limit_gap:.2e}", shown.join(" ")))
}

fn c2() -> (bool, String) {
    let v = integrate_radial_power_log(-1.0, -2.0, 0.0, 0.5, 1e-10).unwrap().value().unwrap_or(f64::NAN);
    let want = 1.0 / 2f64.ln();
    let rel = ((v - want) / want).abs();
    let border = integrate_radial_power_log(-1.0, -1.0, 0.0, 0.5, 1e-10).unwrap().is_divergent();
    (rel < 5e-10 && border, format!("integral={v:.12} rel.err={rel:.1e} (<5e-10), (-1,-1) divergent={border}"))
}

fn c3() -> (bool, String) {
    let fine = poisson(3, 2048);
    let sup_gap = (fine.max() - 1.0 / 6.0).abs();
    let errors: Vec<f64> = [256, 512, 1024].iter().map(|&c| nodal_error(&poisson(3, c), 3)).collect();
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    (sup_gap < 1e-5 && order >= 1.9, format!("|sup u - 1/6|={sup_gap:.2e} (<1e-5), observed order={order:.3} (>=1.9)"))
}

fn residual(form: SourceForm) -> f64 {
    let s = spec(ExampleId::Ex1, Some(2.0)).with_form(form);
    let pair = ExamplePair { spec: s, kernels: Kernels::Direct { tol: 1e-10 } };
    residual_check(&pair, [1e-2, EXAMPLE_DOMAIN_RADIUS], 64, nulab::counterexamples::DEFAULT_DIFF_STEP)
        .unwrap()
        .residual_sup
}

fn c4() -> (bool, String) {
    let verbatim = residual(SourceForm::Verbatim);
    let consistent = residual(SourceForm::Consistent);
    (
        verbatim < 1e-4,
        format!("displayed-source residual sup={verbatim:.3e} (<1e-4); consistent-source residual sup={consistent:.3e}"),
    )
}

fn c5() -> (bool, String) {
    let m = membership(&spec(ExampleId::Ex1, Some(2.0)), &[6.0, 7.2], 1e-8, 1e-9).unwrap();
    let at6 = &m.rows[0].table;
    let last6 = at6.last();
    let converges = last6.cutoff <= 1e-8 * (1.0 + 1e-12) && last6.relative_increment < 0.01;
    let at72 = &m.rows[1].table;
    let tail: Vec<f64> = at72.rows[at72.rows.len() - 4..].iter().map(|r| r.increment).collect();
    let grows = tail.windows(2).all(|w| w[1] > w[0]);
    let verdicts = at6.verdict == NormVerdict::Convergent && at72.verdict == NormVerdict::Divergent;
    (
        converges && grows && verdicts,
        format!(
            "s=6 increment {:.2e} at cutoff {:.0e} (<1%), s=7.2 last-4 increments growing={grows}, verdicts {:?}/{:?}",
            last6.relative_increment, last6.cutoff, at6.verdict, at72.verdict
        ),
    )
}

fn examples() -> [(&'static str, ExampleSpec); 3] {
    [
        ("EX1", spec(ExampleId::Ex1, Some(2.0))),
        ("EX2", spec(ExampleId::Ex2, None)),
        ("EX3", spec(ExampleId::Ex3, Some(1.25))),
    ]
}

fn c6() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, s) in examples() {
        let p = blowup_profile(&s, 30, [10, 30], 1e-10).unwrap();
        ok &= p.strictly_increasing && p.fit_quality >= 0.95;
        parts.push(format!("{name}: increasing={} R2={:.4}", p.strictly_increasing, p.fit_quality));
    }
    (ok, parts.join(", "))
}

fn c7() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, s) in examples() {
        let sw = source_sweep(&s, 40, 4, Kernels::Direct { tol: 1e-10 }).unwrap();
        let want_bounded = name != "EX1";
        ok &= if want_bounded { sw.stabilized } else { !sw.stabilized && sw.growing_tail };
        parts.push(format!("{name}: stabilized={} growing={}", sw.stabilized, sw.growing_tail));
    }
    (ok, parts.join(", "))
}

fn c8() -> (bool, String) {
    let (n, radius, s) = (3, 0.25, Exponent::int(8));
    let nodes = log_nodes(1e-6, radius, 64);
    let constant = Profile::constant(7.0, radius);
    let zero = Profile::constant(0.0, radius);
    let q_const = harnack_quotient(&constant, &zero, n, radius, s).unwrap().quotient;

    let u = |r: f64| Ok(1.0 - r * r + 0.1 * r);
    let f = |r: f64| Ok(2.0 + r);
    let c = 37.25;
    let base = harnack_quotient(
        &Profile::from_fn(u, nodes.clone(), false).unwrap(),
        &Profile::from_fn(f, nodes.clone(), false).unwrap(),
        n,
        radius,
        s,
    )
    .unwrap()
    .quotient;
    let scaled = harnack_quotient(
        &Profile::from_fn(move |r| Ok(c * u(r)?), nodes.clone(), false).unwrap(),
        &Profile::from_fn(move |r| Ok(c * f(r)?), nodes, false).unwrap(),
        n,
        radius,
        s,
    )
    .unwrap()
    .quotient;
    let scale_gap = ((scaled - base) / base).abs();

    let cfg = SolverConfig { r_min: 1e-8, ..SolverConfig::default() };
    let sweep =
        harnack_sweep(n, 2.0, 8.0, radius, &[0.5, 1.0, 1.4], &[0.0, 0.5, 1.0], &[512, 1024, 2048], &cfg).unwrap();
    (
        q_const == 1.0 && scale_gap <= 1e-12 && sweep.spread < 10.0,
        format!(
            "constant quotient={q_const}, scaling change={scale_gap:.1e} (<=1e-12), 3x3 spread={:.3} (<10)",
            sweep.spread
        ),
    )
}

fn c9() -> (bool, String) {
    let ms: Vec<f64> = (3..=10).map(|k| 2f64.powi(k)).collect();
    let family = plateau_family(3, 2.0, 8.0, 0.25, &ms).unwrap();
    let cfg = SolverConfig { cells: 4096, r_min: 1e-12, ..SolverConfig::default() };
    let coef = spec(ExampleId::Ex1, Some(2.0)).coefficient();
    let r = log_bound_check(&family, coef, EXAMPLE_DOMAIN_RADIUS, &cfg).unwrap();
    let uniform = log_bound_check(&family, RadialCoefficient::identity(), EXAMPLE_DOMAIN_RADIUS, &cfg).unwrap();
    let r2 = r.fit_quality.unwrap_or(0.0);
    (
        r.s0_spread <= 1.02 && r2 >= 0.9 && r.ratio_band <= 3.0,
        format!(
            "degenerate coefficient: s0 spread={:.4} (<=1.02), R2={r2:.4} (>=0.9), ratio band={:.3} (<=3); uniform coefficient for reference: R2={:.3}, band={:.1}",
            r.s0_spread,
            r.ratio_band,
            uniform.fit_quality.unwrap_or(0.0),
            uniform.ratio_band
        ),
    )
}

fn c10() -> (bool, String) {
    let smooth = poisson(3, 2048);
    let u = Profile::from_solution(&smooth).unwrap();
    // p = q = s = ∞ for a ≡ 1.
    let delta_smooth = derive_exponents(&ProblemParams::new(3, Exponent::Infinite, Exponent::Infinite, Exponent::Infinite))
        .unwrap()
        .delta
        .as_f64();
    let chain = moser_norm_chain(&u, 3, 2.0, delta_smooth, 10).unwrap();
    let ratio = chain.ratio.unwrap_or(f64::NAN);

    let ex1 = spec(ExampleId::Ex1, Some(2.0));
    let delta_ex1 = derive_exponents(&ProblemParams::new(3, Exponent::Infinite, Exponent::int(2), Exponent::Infinite))
        .unwrap()
        .delta
        .as_f64();
    let singular = Profile::from_fn(move |r| eval_u(&ex1, r, 1e-10), log_nodes(1e-40, 0.5, 300), true).unwrap();
    let ex_chain = moser_norm_chain(&singular, 3, 2.0, delta_ex1, 10).unwrap();
    let sup_divergent = matches!(ex_chain.sup_quarter, Measure::Divergent);
    (
        (ratio - 1.0).abs() <= 0.05 && !ex_chain.stabilizing,
        format!(
            "smooth N_10/sup={ratio:.4} (within 5%), EX1 stabilizing={} (sup divergent={sup_divergent})",
            ex_chain.stabilizing
        ),
    )
}

fn run_cli(dir: &Path, args: &[&str]) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_nulab"))
        .env_remove("NULAB_OUTPUT_DIR")
        .arg("--out")
        .arg(dir)
        .args(args)
        .status()
        .expect("cli runs");
    assert!(status.success(), "nulab {args:?} exited with {status}");
    std::fs::read(dir.join("report.json")).expect("report written")
}

fn c11() -> (bool, String) {
    let cases: &[&[&str]] = &[
        &["--n", "3", "--p", "4", "--q", "2", "--s", "8", "exponents"],
        &["--n", "3", "--q", "2", "example", "blowup", "--id", "EX1"],
        &["verify", "harnack"],
        &["report"],
    ];
    let mut identical = 0;
    for args in cases {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        if run_cli(a.path(), args) == run_cli(b.path(), args) {
            identical += 1;
        }
    }
    (identical == cases.len(), format!("{identical}/{} subcommands byte-identical across two runs", cases.len()))
}

fn main() {
    let outcomes = [
        check(1, secs(0.1), c1),
        check(2, secs(0.5), c2),
        check(3, secs(2.0), c3),
        check(4, secs(30.0), c4),
        check(5, secs(60.0), c5),
        check(6, None, c6),
        check(7, None, c7),
        check(8, None, c8),
        check(9, None, c9),
        check(10, None, c10),
        check(11, None, c11),
    ];
    let unexpected: Vec<&Outcome> =
        outcomes.iter().filter(|o| o.pass == EXPECTED_FAIL.contains(&o.id)).collect();
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} criteria pass; expected failures: {EXPECTED_FAIL:?}", outcomes.len());
    if !unexpected.is_empty() {
        for o in &unexpected {
            eprintln!("unexpected outcome for criterion {}: {}", o.id, o.detail);
        }
        std::process::exit(1);
    }
}
