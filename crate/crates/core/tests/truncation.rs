use nulab::counterexamples::{ExampleId, ExampleSpec};
use nulab::exponents::Exponent;
use nulab::harness::truncated_source_sweep;
use nulab::solver::SolverConfig;

fn config() -> SolverConfig {
    SolverConfig { cells: 4096, r_min: 1e-12, grading: 6.0, ..SolverConfig::default() }
}

#[test]
fn truncated_ex1_constant_grows_at_the_critical_exponent() {
    let spec = ExampleSpec::new(ExampleId::Ex1, 3, Some(2.0)).unwrap();
    let ks = [8, 12, 16, 20, 24];
    for s in [6.0, 6.5] {
        let sweep = truncated_source_sweep(&spec, Exponent::Infinite, s, &ks, &config()).unwrap();
        assert!(sweep.constant_grows, "s = {s}");
        let lhs: Vec<f64> = sweep.rows.iter().map(|r| r.report.lhs).collect();
        assert!(lhs.windows(2).all(|w| w[1] > w[0]), "{lhs:?}");
    }
}
