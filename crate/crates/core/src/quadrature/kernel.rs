//! The counterexample kernels
//! `K_m(ξ) = ∫_0^{1/2} (ξ + r)^{-m} (log 1/r)^{-1} dr`, `m ∈ {1, 2, 3}`.
//!
//! `K_m` is the radial reduction of `∫_{B_{1/2}} |y|^{1-n} (ξ + |y|)^{-m}
//! (log 1/|y|)^{-1} dy`; the ball integral equals `α_n K_m(ξ)`.

use serde::Serialize;

use super::{integrate_t, Divergence, Integral, QuadratureResult};
use crate::error::{domain, Result};

/// Outer radius of the kernel integrals.
pub const KERNEL_OUTER_RADIUS: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelSpec {
    pub m: u8,
    pub x_norm: f64,
}

impl KernelSpec {
    pub fn new(m: u8, x_norm: f64) -> Result<Self> {
        if !(1..=3).contains(&m) {
            return Err(domain(format!("kernel power m = {m} must be 1, 2 or 3")));
        }
        if !(x_norm >= 0.0 && x_norm.is_finite()) {
            return Err(domain(format!("|x| = {x_norm} must be a finite nonnegative radius")));
        }
        Ok(KernelSpec { m, x_norm })
    }
}

/// Cross-check of the direct value against the split at `r = |x|^{1/2}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitCheck {
    /// Part over `r < |x|^{1/2}`.
    pub i1: QuadratureResult,
    /// Part over `|x|^{1/2} <= r < 1/2`.
    pub i2: QuadratureResult,
    pub difference: f64,
    pub error_budget: f64,
    pub consistent: bool,
    /// For `m = 3`: `|x|^{-2} / log(1/|x|)`, the bound on `i1`.
    pub bound_i1: Option<f64>,
    /// For `m = 3`: `|x|^{-3/2} / (2 log 2)`, the bound on `i2`.
    pub bound_i2: Option<f64>,
    pub bounds_hold: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelEvaluation {
    pub spec: KernelSpec,
    pub result: Integral,
    /// Present when `0 < |x| < 1/4`, so that `|x|^{1/2}` splits `(0, 1/2)`.
    pub split: Option<SplitCheck>,
}

struct KernelIntegrand {
    m: i32,
    x: f64,
}

impl KernelIntegrand {
    // r = e^{-t}: (x + r)^{-m} / log(1/r) dr = e^{-t} (x + e^{-t})^{-m} / t dt
    fn eval(&self, t: f64) -> f64 {
        let e = (-t).exp();
        e / ((self.x + e).powi(self.m) * t)
    }

    fn peak(&self) -> f64 {
        -self.x.ln()
    }

    fn breakpoints(&self) -> Vec<f64> {
        let tp = self.peak();
        [-4.0, -1.5, 0.0, 1.5, 4.0].iter().map(|d| tp + d).collect()
    }

    // For T past the peak, (x + e^{-t})^{-m} <= x^{-m} and ∫_T^∞ e^{-t}/t <= e^{-T}/T.
    fn tail(&self, t: f64) -> Option<f64> {
        (t >= self.peak()).then(|| (-(self.m as f64) * self.x.ln() - t).exp() / t)
    }
}

fn integrate_kernel(k: &KernelIntegrand, t_lo: f64, t_hi: Option<f64>, tol: f64) -> QuadratureResult {
    let g = |t: f64| k.eval(t);
    let tail = |t: f64| k.tail(t);
    integrate_t(&g, t_lo, t_hi, &k.breakpoints(), 1.0, Some(&tail), tol)
}

/// Evaluates `K_m(|x|)` to relative tolerance `tol`.
///
/// `|x| = 0` yields the divergent state (`∫ dr / (r^m log 1/r)` diverges at
/// the origin for every `m >= 1`).
pub fn eval_kernel(spec: KernelSpec, tol: f64) -> Result<KernelEvaluation> {
    let spec = KernelSpec::new(spec.m, spec.x_norm)?;
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance {tol} must be positive")));
    }
    if spec.x_norm == 0.0 {
        return Ok(KernelEvaluation {
            spec,
            result: Integral::Divergent(Divergence::Structural {
                r_exponent: -(spec.m as f64),
                log_exponent: -1.0,
            }),
            split: None,
        });
    }
    let k = KernelIntegrand { m: spec.m as i32, x: spec.x_norm };
    let t0 = 2f64.ln();
    let direct = integrate_kernel(&k, t0, None, tol);

    let split = (spec.x_norm < 0.25).then(|| {
        let ts = 0.5 * k.peak();
        let i2 = integrate_kernel(&k, t0, Some(ts), tol);
        let i1 = integrate_kernel(&k, ts, None, tol);
        let difference = (direct.value - (i1.value + i2.value)).abs();
        // Rounding allowance of a few ulps on top of the quadrature estimates.
        let error_budget = 2.0
            * (direct.error_estimate
                + direct.tail_bound
                + i1.error_estimate
                + i1.tail_bound
                + i2.error_estimate
                + i2.tail_bound)
            + 8.0 * f64::EPSILON * direct.value.abs();
        let (bound_i1, bound_i2) = if spec.m == 3 {
            let x = spec.x_norm;
            (Some(x.powi(-2) / (1.0 / x).ln()), Some(x.powf(-1.5) / (2.0 * 2f64.ln())))
        } else {
            (None, None)
        };
        let bounds_hold = bound_i1.zip(bound_i2).map(|(b1, b2)| i1.value <= b1 && i2.value <= b2);
        SplitCheck {
            i1,
            i2,
            difference,
            error_budget,
            consistent: difference <= error_budget,
            bound_i1,
            bound_i2,
            bounds_hold,
        }
    });

    Ok(KernelEvaluation { spec, result: Integral::Finite(direct), split })
}

/// `K_m(ξ)` value or an error when the quadrature misses its tolerance.
pub(crate) fn kernel_value(m: u8, x: f64, tol: f64) -> Result<f64> {
    let ev = eval_kernel(KernelSpec::new(m, x)?, tol)?;
    match ev.result {
        Integral::Finite(r) if r.converged => Ok(r.value),
        Integral::Finite(r) => Err(crate::Error::Quadrature(format!(
            "K_{m}({x}) missed tolerance: estimate {} + tail {} > {}",
            r.error_estimate, r.tail_bound, r.tolerance
        ))),
        Integral::Divergent(_) => Err(domain(format!("K_{m} diverges at |x| = {x}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent oracle: composite Simpson in s = log r over [log 1e-300, log 1/2].
    // The piece below 1e-300 is below r·x^{-m}/690 and negligible.
    fn simpson_oracle(m: i32, x: f64) -> f64 {
        let a = 1e-300f64;
        let (lo, hi) = (a.ln(), 0.5f64.ln());
        let n = 400_000;
        let h = (hi - lo) / n as f64;
        let f = |s: f64| {
            let r = s.exp();
            r * (x + r).powi(-m) / (-s)
        };
        let mut acc = f(lo) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(lo + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn matches_independent_oracle() {
        for (m, x) in [(1, 0.5), (2, 0.01), (3, 0.1), (1, 1e-3)] {
            let v = eval_kernel(KernelSpec::new(m, x).unwrap(), 1e-12).unwrap();
            let q = v.result.finite().unwrap();
            let o = simpson_oracle(m as i32, x);
            assert!((q.value - o).abs() < 1e-9 * o, "m={m} x={x}: {} vs {o}", q.value);
            assert!(q.converged);
        }
    }

    #[test]
    fn origin_is_divergent() {
        let v = eval_kernel(KernelSpec::new(1, 0.0).unwrap(), 1e-10).unwrap();
        assert!(v.result.is_divergent());
    }

    #[test]
    fn reproducible_across_tolerances() {
        let a = eval_kernel(KernelSpec::new(1, 0.5).unwrap(), 1e-10).unwrap();
        let b = eval_kernel(KernelSpec::new(1, 0.5).unwrap(), 1e-13).unwrap();
        let (a, b) = (a.result.value().unwrap(), b.result.value().unwrap());
        assert!(a > 0.0 && a.is_finite());
        assert!((a - b).abs() <= 1e-10 * b);
    }

    #[test]
    fn split_bounds_for_cubic_kernel() {
        let v = eval_kernel(KernelSpec::new(3, 1e-4).unwrap(), 1e-10).unwrap();
        let s = v.split.unwrap();
        assert!(s.consistent, "{s:?}");
        assert_eq!(s.bounds_hold, Some(true));
        let total = v.result.value().unwrap();
        assert!(total <= s.bound_i1.unwrap() + s.bound_i2.unwrap());
    }

    #[test]
    fn decreasing_in_radius() {
        for m in 1..=3u8 {
            let mut prev = 0.0;
            for k in 1..=40 {
                let x = 0.5 * 2f64.powi(-k);
                let v = kernel_value(m, x, 1e-10).unwrap();
                assert!(v > prev, "m={m} k={k}");
                prev = v;
            }
        }
    }

    #[test]
    fn rejects_bad_power() {
        assert!(KernelSpec::new(0, 0.1).is_err());
        assert!(KernelSpec::new(4, 0.1).is_err());
        assert!(KernelSpec::new(2, -0.1).is_err());
    }
}
