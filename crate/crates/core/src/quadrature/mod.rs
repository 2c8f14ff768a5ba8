//! Controlled-accuracy radial integrals with logarithmic endpoint behaviour.
//!
//! Every radial integral over `(r_lo, r_hi] ⊂ (0, 1/2]` is rewritten with
//! `r = e^{-t}`, which turns `log(1/r)` into `t` and the origin into
//! `t → ∞`. The integrand in `t` is then a product of exponentials and powers
//! of `t`, integrated panel by panel with Gauss–Kronrod 7/15. Panels beyond
//! the last breakpoint double in width, so algebraic decay in `t` costs a
//! logarithmic number of panels. The semi-infinite remainder is bounded
//! analytically and the loop stops once that bound is below `1e-12` of the
//! accumulated value.

mod cache;
mod kernel;
mod norm;
mod pchip;
mod rule;

pub use cache::{KernelCache, KernelCacheInfo};
pub use kernel::{eval_kernel, KernelEvaluation, KernelSpec, SplitCheck, KERNEL_OUTER_RADIUS};
pub(crate) use kernel::kernel_value;
pub use norm::{
    geometric_ladder, nested_norm_integral, Asymptotics, NormOptions, NormRow, NormTable, NormVerdict,
};
pub use pchip::Pchip;
pub use rule::{adaptive, gk15, log_gauss_nodes, AdaptiveResult, Panel};

use serde::Serialize;

use crate::error::{domain, Result};

/// Relative size of the analytic tail bound at which the panel loop stops.
pub const TAIL_RELATIVE_BOUND: f64 = 1e-12;

/// Cap on `t`; beyond this every integrand here is below `f64` resolution.
const T_CAP: f64 = 1e290;

const MAX_PANELS_PER_SEGMENT: usize = 400;

/// Outcome of a convergent quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub nodes_used: usize,
    pub tail_bound: f64,
    /// `error_estimate + tail_bound <= tolerance`.
    pub converged: bool,
    /// Absolute accuracy target that was requested (`rel_tol · |value|`).
    pub tolerance: f64,
}

/// Why an integral was declared divergent.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Divergence {
    /// Decided from the exponents of the integrand at the origin.
    Structural { r_exponent: f64, log_exponent: f64 },
    /// Decided from increment growth along a cutoff ladder.
    Empirical { detail: String },
}

/// A radial integral: either a finite value or an explicit divergence state.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Integral {
    Finite(QuadratureResult),
    Divergent(Divergence),
}

impl Integral {
    pub fn value(&self) -> Option<f64> {
        match self {
            Integral::Finite(r) => Some(r.value),
            Integral::Divergent(_) => None,
        }
    }

    pub fn finite(&self) -> Option<&QuadratureResult> {
        match self {
            Integral::Finite(r) => Some(r),
            Integral::Divergent(_) => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, Integral::Divergent(_))
    }
}

/// Analytic bound on `∫_T^∞ g(t) dt`, or `None` when unavailable at this `T`.
pub type TailBound<'a> = &'a (dyn Fn(f64) -> Option<f64> + Sync);

/// Integrates `g` over `[t_start, t_end)` in `t`.
///
/// With `t_end = None` the range is semi-infinite and `tail` must bound the
/// remainder. Panels follow `breakpoints` first and then double in width
/// starting from `first_width`.
pub fn integrate_t<G: Fn(f64) -> f64>(
    g: &G,
    t_start: f64,
    t_end: Option<f64>,
    breakpoints: &[f64],
    first_width: f64,
    tail: Option<TailBound<'_>>,
    rel_tol: f64,
) -> QuadratureResult {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b > t_start && t_end.map_or(true, |e| b < e))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut value = 0.0;
    let mut error = 0.0;
    let mut nodes = 0;
    let mut lo = t_start;
    let mut panel_values: Vec<f64> = Vec::new();

    let run_panel = |a: f64, b: f64, value: &mut f64, error: &mut f64, nodes: &mut usize| {
        let abs_floor = rel_tol * 0.1 * value.abs();
        let r = adaptive(g, a, b, rel_tol * 0.1, abs_floor, MAX_PANELS_PER_SEGMENT);
        *value += r.value;
        *error += r.error;
        *nodes += r.evaluations;
        r.value
    };

    for &c in &cuts {
        panel_values.push(run_panel(lo, c, &mut value, &mut error, &mut nodes));
        lo = c;
    }

    let mut width = first_width.max(1e-3);
    let mut tail_bound = 0.0;
    match t_end {
        Some(end) => {
            while lo < end {
                let hi = (lo + width).min(end);
                panel_values.push(run_panel(lo, hi, &mut value, &mut error, &mut nodes));
                lo = hi;
                width *= 2.0;
            }
        }
        None => {
            let tail = tail.expect("semi-infinite range requires a tail bound");
            loop {
                let hi = lo + width;
                panel_values.push(run_panel(lo, hi, &mut value, &mut error, &mut nodes));
                lo = hi;
                width *= 2.0;
                if let Some(tb) = tail(lo) {
                    let small = tb <= TAIL_RELATIVE_BOUND * value.abs() || tb == 0.0;
                    if small || lo > T_CAP {
                        tail_bound = tb;
                        break;
                    }
                }
                if lo > T_CAP {
                    tail_bound = f64::INFINITY;
                    break;
                }
            }
        }
    }

    // Summation in panel order.
    let value: f64 = panel_values.iter().sum();
    let tolerance = rel_tol * value.abs();
    QuadratureResult {
        value,
        error_estimate: error,
        nodes_used: nodes,
        tail_bound,
        converged: error + tail_bound <= tolerance,
        tolerance,
    }
}

/// Exponent test for `∫_0 r^a (log 1/r)^b dr` at the origin.
pub fn power_log_converges_at_origin(a: f64, b: f64) -> bool {
    const EPS: f64 = 1e-12;
    if (a + 1.0).abs() <= EPS * (1.0 + a.abs()) {
        b < -1.0 - EPS
    } else {
        a > -1.0
    }
}

/// `∫_{r_lo}^{r_hi} r^a (log 1/r)^b dr` with `0 <= r_lo < r_hi <= 1/2`.
///
/// For `r_lo = 0` the exponent test runs first and a divergent pair returns
/// [`Integral::Divergent`] without any quadrature.
pub fn integrate_radial_power_log(a: f64, b: f64, r_lo: f64, r_hi: f64, tol: f64) -> Result<Integral> {
    if !(r_hi > 0.0 && r_hi <= 0.5) {
        return Err(domain(format!("upper radius {r_hi} must lie in (0, 1/2]")));
    }
    if !(r_lo >= 0.0 && r_lo < r_hi) {
        return Err(domain(format!("lower radius {r_lo} must lie in [0, {r_hi})")));
    }
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance {tol} must be positive")));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(domain("exponents must be finite"));
    }
    if r_lo == 0.0 && !power_log_converges_at_origin(a, b) {
        return Ok(Integral::Divergent(Divergence::Structural { r_exponent: a, log_exponent: b }));
    }

    let c = a + 1.0;
    // r^a L^b dr = e^{-c t} t^b dt
    let g = move |t: f64| (-c * t + b * t.ln()).exp();
    let t_start = -r_hi.ln();
    let first_width = if c > 0.0 { (1.0 / c).min(4.0) } else { 1.0 };

    if r_lo > 0.0 {
        let t_end = -r_lo.ln();
        return Ok(Integral::Finite(integrate_t(&g, t_start, Some(t_end), &[], first_width, None, tol)));
    }

    let tail = move |t: f64| -> Option<f64> { power_log_tail_bound(c, b, t) };
    Ok(Integral::Finite(integrate_t(&g, t_start, None, &[], first_width, Some(&tail), tol)))
}

/// Bound on `∫_T^∞ e^{-ct} t^b dt` for a convergent pair.
fn power_log_tail_bound(c: f64, b: f64, t: f64) -> Option<f64> {
    if c.abs() <= 1e-12 {
        // Exact: T^{b+1} / (-(b+1)).
        return Some(t.powf(b + 1.0) / (-(b + 1.0)));
    }
    if b <= 0.0 {
        return Some((b * t.ln() - c * t).exp() / c);
    }
    // log-derivative b/t - c <= -c/2 once t >= 2b/c.
    (t >= 2.0 * b / c).then(|| 2.0 * (b * t.ln() - c * t).exp() / c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_squared_reciprocal() {
        // d/dr [1/log(1/r)] = 1/(r log²(1/r))
        let r = integrate_radial_power_log(-1.0, -2.0, 0.0, 0.5, 1e-10).unwrap();
        let q = r.finite().unwrap();
        let exact = 1.0 / 2f64.ln();
        assert!((q.value - exact).abs() < 1e-10 * exact, "{q:?}");
        assert!(q.converged);
        assert!(q.tail_bound <= TAIL_RELATIVE_BOUND * q.value);
    }

    #[test]
    fn constant_integrand() {
        let r = integrate_radial_power_log(0.0, 0.0, 0.0, 0.5, 1e-12).unwrap();
        assert!((r.value().unwrap() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn divergent_pairs() {
        for (a, b) in [(-1.0, -1.0), (-1.0, 0.0), (-1.5, -3.0), (-1.0, 2.0)] {
            let r = integrate_radial_power_log(a, b, 0.0, 0.5, 1e-8).unwrap();
            assert!(r.is_divergent(), "({a},{b})");
        }
    }

    #[test]
    fn truncated_divergent_pair_is_finite() {
        // ∫_ε^{1/2} dr/(r log(1/r)) = log log(1/ε) - log log 2
        let eps: f64 = 1e-6;
        let r = integrate_radial_power_log(-1.0, -1.0, eps, 0.5, 1e-12).unwrap();
        let exact = (-eps.ln()).ln() - 2f64.ln().ln();
        assert!((r.value().unwrap() - exact).abs() < 1e-11);
    }

    #[test]
    fn positive_log_power() {
        // ∫_0^{1/2} r^2 log(1/r)^2 dr, antiderivative check against a fine
        // closed form: ∫_0^x r^2 L^2 = x^3 (L^2/3 + 2L/9 + 2/27) with L = log(1/x).
        let l = 2f64.ln();
        let exact = 0.125 * (l * l / 3.0 + 2.0 * l / 9.0 + 2.0 / 27.0);
        let r = integrate_radial_power_log(2.0, 2.0, 0.0, 0.5, 1e-12).unwrap();
        assert!((r.value().unwrap() - exact).abs() < 1e-13);
    }

    #[test]
    fn domain_errors() {
        assert!(integrate_radial_power_log(0.0, 0.0, 0.0, 0.75, 1e-8).is_err());
        assert!(integrate_radial_power_log(0.0, 0.0, 0.3, 0.2, 1e-8).is_err());
        assert!(integrate_radial_power_log(0.0, 0.0, 0.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn exponent_lattice() {
        for a in [-1.5, -1.0, -0.5] {
            for b in [-2.0, -1.0, 0.0] {
                let expected = a > -1.0 || (a == -1.0 && b < -1.0);
                assert_eq!(power_log_converges_at_origin(a, b), expected);
            }
        }
    }
}
