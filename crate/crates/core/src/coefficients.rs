//! Radial coefficient fields `a(r) = c · r^β (log 1/r)^θ` and their
//! integrability diagnostics.

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{domain, Result};
use crate::exponents::{Exponent, ProblemParams};
use crate::quadrature::{integrate_radial_power_log, Integral, QuadratureResult};
use crate::special::{ball_volume, sphere_area};

/// Default radius of validity, the radius of the example domain.
pub const DEFAULT_DOMAIN_RADIUS: f64 = 0.25;

/// Quadrature tolerance used by the diagnostics unless overridden.
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialCoefficient {
    pub beta: f64,
    pub theta: f64,
    #[serde(default = "default_radius")]
    pub domain_radius: f64,
    /// Constant prefactor, 1 for the fields of the examples.
    #[serde(default = "unit")]
    pub scale: f64,
}

fn default_radius() -> f64 {
    DEFAULT_DOMAIN_RADIUS
}

fn unit() -> f64 {
    1.0
}

impl RadialCoefficient {
    pub fn new(beta: f64, theta: f64) -> Result<Self> {
        Self::with_radius(beta, theta, DEFAULT_DOMAIN_RADIUS)
    }

    pub fn with_radius(beta: f64, theta: f64, domain_radius: f64) -> Result<Self> {
        let c = RadialCoefficient { beta, theta, domain_radius, scale: 1.0 };
        c.validate()?;
        Ok(c)
    }

    /// The uniformly elliptic field `a ≡ 1`.
    pub fn identity() -> Self {
        RadialCoefficient { beta: 0.0, theta: 0.0, domain_radius: DEFAULT_DOMAIN_RADIUS, scale: 1.0 }
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.scale *= c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(domain(format!("beta = {} must be finite and >= 0", self.beta)));
        }
        if !self.theta.is_finite() {
            return Err(domain("theta must be finite"));
        }
        if !(self.domain_radius > 0.0 && self.domain_radius <= 0.5) {
            return Err(domain(format!("domain radius {} must lie in (0, 1/2]", self.domain_radius)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(domain(format!("scale {} must be positive", self.scale)));
        }
        Ok(())
    }

    pub fn is_uniform(&self) -> bool {
        self.beta == 0.0 && self.theta == 0.0
    }

    /// Point where `r^β (log 1/r)^θ` switches from increasing to decreasing
    /// (`β, θ > 0`).
    pub fn turning_radius(&self) -> Option<f64> {
        (self.beta > 0.0 && self.theta > 0.0).then(|| (-self.theta / self.beta).exp())
    }

    /// `a(r)` without the domain check; `r` must lie in `(0, 1)`.
    pub fn value(&self, r: f64) -> f64 {
        if self.is_uniform() {
            return self.scale;
        }
        let l = -r.ln();
        let log_part = if self.theta == 0.0 { 0.0 } else { self.theta * l.ln() };
        self.scale * (log_part - self.beta * l).exp()
    }

    /// `a'(r)`.
    pub fn derivative(&self, r: f64) -> f64 {
        let l = -r.ln();
        // d/dr [r^β L^θ] = r^{β-1} L^{θ-1} (β L - θ)
        self.value(r) * (self.beta * l - self.theta) / (r * l)
    }
}

/// Evaluates `a(r) = r^β (log 1/r)^θ` for `0 < r <= domain_radius`.
pub fn eval_a1(coef: &RadialCoefficient, r: f64) -> Result<f64> {
    coef.validate()?;
    if !(r > 0.0 && r <= coef.domain_radius) {
        return Err(domain(format!("radius {r} outside (0, {}]", coef.domain_radius)));
    }
    Ok(coef.value(r))
}

/// A finite number or an explicit divergence marker.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Measure {
    Finite(f64),
    Divergent,
}

impl Measure {
    pub fn value(&self) -> Option<f64> {
        match self {
            Measure::Finite(v) => Some(*v),
            Measure::Divergent => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, Measure::Divergent)
    }
}

impl Serialize for Measure {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Measure::Finite(v) => ser.serialize_f64(*v),
            Measure::Divergent => ser.serialize_str("divergent"),
        }
    }
}

/// `∫_{B_R} a^{σ k}` for a real power: the integral and its `1/k`-th root.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerIntegral {
    /// `α_n ∫_0^R r^{n-1} a(r)^{σk} dr`.
    pub integral: Measure,
    /// `(integral)^{1/k}`.
    pub norm: Measure,
    pub quadrature: Option<QuadratureResult>,
}

fn power_integral(coef: &RadialCoefficient, power: f64, n: u32, radius: f64, tol: f64) -> Result<PowerIntegral> {
    // a^σ = c^σ r^{βσ} L^{θσ}; σ = ±k
    let r_exp = n as f64 - 1.0 + coef.beta * power;
    let l_exp = coef.theta * power;
    match integrate_radial_power_log(r_exp, l_exp, 0.0, radius, tol)? {
        Integral::Divergent(_) => Ok(PowerIntegral {
            integral: Measure::Divergent,
            norm: Measure::Divergent,
            quadrature: None,
        }),
        Integral::Finite(q) => {
            let integral = sphere_area(n) * coef.scale.powf(power) * q.value;
            Ok(PowerIntegral {
                integral: Measure::Finite(integral),
                norm: Measure::Finite(integral.powf(1.0 / power.abs())),
                quadrature: Some(q),
            })
        }
    }
}

fn check_ball(coef: &RadialCoefficient, n: u32, radius: f64) -> Result<()> {
    coef.validate()?;
    if n < 1 {
        return Err(domain("dimension must be positive"));
    }
    if !(radius > 0.0 && radius <= coef.domain_radius) {
        return Err(domain(format!("ball radius {radius} must lie in (0, {}]", coef.domain_radius)));
    }
    Ok(())
}

/// `∫_{B_R} |1/λ|^q dx = α_n ∫_0^R r^{n-1-βq} (log 1/r)^{-θq} dr`.
pub fn lambda_inv_lq_norm(coef: &RadialCoefficient, q: f64, n: u32, radius: f64) -> Result<PowerIntegral> {
    check_ball(coef, n, radius)?;
    if !(q >= 1.0 && q.is_finite()) {
        return Err(domain(format!("q = {q} must be finite and >= 1")));
    }
    power_integral(coef, -q, n, radius, DEFAULT_TOL)
}

/// `∫_{B_R} μ^p dx`.
pub fn mu_lp_norm(coef: &RadialCoefficient, p: f64, n: u32, radius: f64) -> Result<PowerIntegral> {
    check_ball(coef, n, radius)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(domain(format!("p = {p} must be finite and >= 1")));
    }
    power_integral(coef, p, n, radius, DEFAULT_TOL)
}

/// `sup_{0<r<=R} a(r)` or, with `reciprocal`, `sup 1/a(r)`.
pub fn sup_over_ball(coef: &RadialCoefficient, radius: f64, reciprocal: bool) -> Measure {
    let (beta, theta) = if reciprocal { (-coef.beta, -coef.theta) } else { (coef.beta, coef.theta) };
    let scale = if reciprocal { 1.0 / coef.scale } else { coef.scale };
    let eval = |r: f64| {
        let c = RadialCoefficient { beta, theta, domain_radius: coef.domain_radius, scale };
        c.value(r)
    };
    if beta < 0.0 || (beta == 0.0 && theta > 0.0) {
        return Measure::Divergent;
    }
    if beta == 0.0 {
        // (log 1/r)^θ with θ <= 0 is largest at r = R.
        return Measure::Finite(eval(radius));
    }
    // β > 0: increasing on (0, r*] with r* = e^{-θ/β}, decreasing after.
    let r_star = if theta > 0.0 { (-theta / beta).exp() } else { f64::INFINITY };
    Measure::Finite(eval(radius.min(r_star)))
}

/// Integrability diagnostics of a coefficient pair over `B_R`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EllipticityReport {
    pub ball_radius: f64,
    pub n: u32,
    /// `‖λ^{-1}‖_{L^q(B_R)}`.
    pub lambda_inv_lq: Measure,
    /// `‖μ‖_{L^p(B_R)}`.
    pub mu_lp: Measure,
    /// `(⨍ λ^{-q})^{1/q}`, the essential sup of `1/λ` for `q = ∞`.
    pub lambda_inv_mean_root: Measure,
    /// `(⨍ μ^p)^{1/p}`, the essential sup of `μ` for `p = ∞`.
    pub mu_mean_root: Measure,
    /// `Λ(B_R) = (⨍λ^{-q})^{1/q} (⨍μ^p)^{1/p} + (⨍λ^{-q})^{2/q}`.
    #[serde(rename = "Lambda_BR")]
    pub lambda_br: Measure,
}

fn mean_root(coef: &RadialCoefficient, exponent: &Exponent, n: u32, radius: f64, reciprocal: bool) -> Result<(Measure, Measure)> {
    if exponent.is_infinite() {
        let sup = sup_over_ball(coef, radius, reciprocal);
        return Ok((sup, sup));
    }
    let k = exponent.to_f64();
    let pi = if reciprocal {
        lambda_inv_lq_norm(coef, k, n, radius)?
    } else {
        mu_lp_norm(coef, k, n, radius)?
    };
    let mean = match pi.integral {
        Measure::Finite(v) => Measure::Finite((v / ball_volume(n, radius)).powf(1.0 / k)),
        Measure::Divergent => Measure::Divergent,
    };
    Ok((pi.norm, mean))
}

/// Assembles `Λ(B_R)` from the mean integrals of `λ^{-q}` and `μ^p`.
pub fn compute_lambda(
    coef_lambda: &RadialCoefficient,
    coef_mu: &RadialCoefficient,
    params: &ProblemParams,
    radius: f64,
) -> Result<EllipticityReport> {
    params.validate()?;
    check_ball(coef_lambda, params.n, radius)?;
    check_ball(coef_mu, params.n, radius)?;
    let (lambda_inv_lq, lam) = mean_root(coef_lambda, &params.q, params.n, radius, true)?;
    let (mu_lp, mu) = mean_root(coef_mu, &params.p, params.n, radius, false)?;
    let lambda_br = match (lam, mu) {
        (Measure::Finite(l), Measure::Finite(m)) => Measure::Finite(l * m + l * l),
        _ => Measure::Divergent,
    };
    Ok(EllipticityReport {
        ball_radius: radius,
        n: params.n,
        lambda_inv_lq,
        mu_lp,
        lambda_inv_mean_root: lam,
        mu_mean_root: mu,
        lambda_br,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(n: u32, p: &str, q: &str) -> ProblemParams {
        ProblemParams::new(n, p.parse().unwrap(), q.parse().unwrap(), Exponent::Infinite)
    }

    #[test]
    fn identity_and_unit_log() {
        let one = RadialCoefficient::identity();
        assert_eq!(eval_a1(&one, 0.1).unwrap(), 1.0);
        let c = RadialCoefficient::with_radius(1.5, 2.0 / 3.0, 0.5).unwrap();
        let r = (-1.0f64).exp();
        assert!((eval_a1(&c, r).unwrap() - (-1.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn value_against_direct_formula() {
        // Direct evaluation in a different order: powf of r, powf of the log.
        let c = RadialCoefficient::with_radius(2.0, 5.0 / 6.0, 0.5).unwrap();
        let r: f64 = 0.01;
        let direct = r.powf(2.0) * (1.0 / r).ln().powf(5.0 / 6.0);
        assert!((eval_a1(&c, r).unwrap() / direct - 1.0).abs() < 1e-14);
        // 1e-4 · (log 100)^{5/6} = 3.5703e-4
        assert!((direct - 3.5703e-4).abs() < 1e-8);
    }

    #[test]
    fn domain_checks() {
        let c = RadialCoefficient::new(1.0, 1.0).unwrap();
        assert!(eval_a1(&c, 0.0).is_err());
        assert!(eval_a1(&c, 0.3).is_err());
        assert!(RadialCoefficient::with_radius(1.0, 0.0, 0.6).is_err());
        assert!(RadialCoefficient::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn derivative_matches_difference() {
        let c = RadialCoefficient::new(1.5, 2.0 / 3.0).unwrap();
        for r in [0.01, 0.1, 0.2] {
            let h = 1e-6 * r;
            let fd = (c.value(r + h) - c.value(r - h)) / (2.0 * h);
            assert!((c.derivative(r) - fd).abs() < 1e-6 * fd.abs().max(1e-3));
        }
    }

    #[test]
    fn monotone_around_turning_radius() {
        let c = RadialCoefficient::with_radius(1.0, 1.5, 0.5).unwrap();
        let rs = c.turning_radius().unwrap();
        assert!(rs < 0.5);
        let grid = |lo: f64, hi: f64| (0..=400).map(move |i| lo + (hi - lo) * i as f64 / 400.0);
        let inc: Vec<f64> = grid(1e-6, rs).map(|r| c.value(r)).collect();
        assert!(inc.windows(2).all(|w| w[1] >= w[0]));
        let dec: Vec<f64> = grid(rs, 0.5).map(|r| c.value(r)).collect();
        assert!(dec.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn uniform_norm_is_ball_volume() {
        let one = RadialCoefficient::identity();
        for q in [1.0, 2.0, 7.5] {
            let r = lambda_inv_lq_norm(&one, q, 3, 0.25).unwrap();
            let exact = 4.0 * PI * 0.25f64.powi(3) / 3.0;
            assert!((r.integral.value().unwrap() - exact).abs() < 1e-12 * exact);
        }
    }

    #[test]
    fn critical_weight_with_large_log_power_is_finite() {
        // β = n/q, θq = 2 > 1: ∫ r^{-1} L^{-2} dr = 1/log(1/R) on (0, R].
        let (n, q) = (3u32, 2.0);
        let c = RadialCoefficient::new(1.5, 1.0).unwrap();
        let r = lambda_inv_lq_norm(&c, q, n, 0.25).unwrap();
        let exact = 4.0 * PI / 4f64.ln();
        assert!((r.integral.value().unwrap() - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn borderline_log_power_diverges() {
        // β = n/q, θ = 1/q: ∫ dr / (r log 1/r) diverges.
        for q in [1.5, 2.0, 4.0] {
            let c = RadialCoefficient::new(3.0 / q, 1.0 / q).unwrap();
            assert!(lambda_inv_lq_norm(&c, q, 3, 0.25).unwrap().integral.is_divergent());
        }
    }

    #[test]
    fn divergence_lattice() {
        // β q ∈ {n-1, n-1/2, n, n+1/2, n+1}, θ q ∈ {-1, 0, 1, 3/2, 2}
        let (n, q) = (3u32, 2.0);
        for bq in [2.0, 2.5, 3.0, 3.5, 4.0] {
            for tq in [-1.0, 0.0, 1.0, 1.5, 2.0] {
                let c = RadialCoefficient::new(bq / q, tq / q).unwrap();
                let expected_div = bq > n as f64 || (bq == n as f64 && tq <= 1.0);
                let got = lambda_inv_lq_norm(&c, q, n, 0.25).unwrap().integral.is_divergent();
                assert_eq!(got, expected_div, "βq={bq} θq={tq}");
            }
        }
    }

    #[test]
    fn unit_weights_give_two() {
        let one = RadialCoefficient::identity();
        for (p, q) in [("4", "2"), ("inf", "inf"), ("3", "5/2")] {
            let rep = compute_lambda(&one, &one, &params(3, p, q), 0.2).unwrap();
            assert!((rep.lambda_br.value().unwrap() - 2.0).abs() < 1e-12, "{p} {q}");
        }
    }

    #[test]
    fn example_weights_finite_and_stable() {
        let (n, q) = (3u32, 2.0);
        let theta = 1.0 / q + 0.5 - 1.0 / n as f64;
        let c = RadialCoefficient::new(n as f64 / q, theta).unwrap();
        let pr = params(n, "inf", "2");
        for radius in [0.25, 0.1] {
            let a = compute_lambda(&c, &c, &pr, radius).unwrap();
            let v = a.lambda_br.value().unwrap();
            assert!(v > 0.0 && v.is_finite());
            // Independent route: the same mean integral with a loose tolerance.
            let loose = power_integral(&c, -q, n, radius, 1e-9).unwrap();
            let tight = lambda_inv_lq_norm(&c, q, n, radius).unwrap();
            let (l, t) = (loose.integral.value().unwrap(), tight.integral.value().unwrap());
            assert!((l - t).abs() <= 1e-8 * t);
        }
    }

    #[test]
    fn scaling_lambda_scales_mean_root() {
        let c = RadialCoefficient::new(1.0, 0.5).unwrap();
        let pr = params(3, "4", "2");
        let a = compute_lambda(&c, &c, &pr, 0.25).unwrap();
        let b = compute_lambda(&c.scaled(3.0), &c, &pr, 0.25).unwrap();
        let (la, lb) = (a.lambda_inv_mean_root.value().unwrap(), b.lambda_inv_mean_root.value().unwrap());
        assert!((lb - la / 3.0).abs() < 1e-13 * la);
    }

    #[test]
    fn sup_norms() {
        let c = RadialCoefficient::new(1.5, 2.0 / 3.0).unwrap();
        assert!(sup_over_ball(&c, 0.25, true).is_divergent());
        let sup = sup_over_ball(&c, 0.25, false).value().unwrap();
        let sampled = (1..=10000).map(|i| c.value(0.25 * i as f64 / 10000.0)).fold(0.0, f64::max);
        assert!((sup - sampled).abs() < 1e-6 * sup);
        assert!(sup_over_ball(&RadialCoefficient::new(0.0, 1.0).unwrap(), 0.25, false).is_divergent());
    }
}
