//! Sup bound, Harnack quotient and logarithmic bound.

use rayon::prelude::*;
use serde::Serialize;

use super::{log_nodes, measure_from, Profile};
use crate::coefficients::{compute_lambda, lambda_inv_lq_norm, Measure, RadialCoefficient};
use crate::counterexamples::{eval_f, ExampleSpec, Kernels, SourceForm, EXAMPLE_DOMAIN_RADIUS, MEMBERSHIP_CACHE_TOL};
use crate::error::{Error, Result};
use crate::exponents::{critical_source_exponent, derive_exponents_float, Exponent, ProblemParams};
use crate::fit::{linear_fit, LinearFit};
use crate::quadrature::KernelCache;
use crate::solver::{solve_radial, RadialProblem, SolverConfig, Source};

/// Data of the sup bound on `B_R` with coefficients `λ = μ = a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundInputs {
    pub params: ProblemParams,
    pub coefficient: RadialCoefficient,
    /// Ball fraction `θ` of `B_{θR}`.
    pub theta: f64,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheckReport {
    pub theta: f64,
    pub radius: f64,
    pub gamma: f64,
    /// `sup_{B_{θR}} |u|` from the samples.
    pub lhs: f64,
    pub sup_refinement_delta: f64,
    pub u_norm_gamma: f64,
    pub f_norm_s: Measure,
    /// `((1-θ)R)^{-(n/γ)(m*+1)} ‖u‖_{L^γ(B_R)}`.
    pub rhs_norm_term: f64,
    /// `((1-θ)R)^{-(n/γ)m* - n/s + 2} ‖f‖_{L^s(B_R)}`.
    pub rhs_source_term: Measure,
    #[serde(rename = "Lambda_BR")]
    pub lambda_br: Measure,
    /// `δ p' / (γ (δ - 1))`.
    pub lambda_exponent: f64,
    pub lambda_factor: Measure,
    #[serde(rename = "fitted_C")]
    pub fitted_c: Measure,
    pub m_star: f64,
    pub delta: f64,
    pub p_prime: f64,
}

/// `Λ(B_R)`, in closed form for a constant coefficient.
fn lambda_of(coef: &RadialCoefficient, params: &ProblemParams, radius: f64) -> Result<Measure> {
    if coef.is_uniform() {
        let c = coef.scale;
        return Ok(Measure::Finite(1.0 + 1.0 / (c * c)));
    }
    Ok(compute_lambda(coef, coef, params, radius)?.lambda_br)
}

/// Evaluates both sides of the sup bound and the constant that would make it
/// an equality.
pub fn sup_bound_check(u: &Profile<'_>, f: &Profile<'_>, inputs: &BoundInputs) -> Result<BoundCheckReport> {
    let BoundInputs { params, coefficient, theta, radius } = *inputs;
    params.validate()?;
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Parameter(format!("ball fraction θ = {theta} must lie in (0, 1)")));
    }
    if !(radius > 0.0) {
        return Err(Error::Parameter("radius must be positive".into()));
    }
    let table = derive_exponents_float(&params)?;
    let (m_star, delta, p_prime) = match (table.m_star.value(), table.delta.value(), table.p_prime.value()) {
        (Some(m), Some(d), Some(p)) if d > 1.0 => (m, d, p),
        _ => {
            return Err(Error::Parameter(
                "m*, δ > 1 and p' must be defined; the structural condition fails for these exponents".into(),
            ))
        }
    };
    let n = params.n as f64;
    let gamma = params.gamma;
    let (lhs, delta_sup) = u.sup_abs(theta * radius)?;
    let u_norm = u.norm(gamma, params.n, radius)?;
    let s = params.s.to_f64();
    let f_norm = measure_from(f.norm(s, params.n, radius)?);
    let shrink = (1.0 - theta) * radius;
    let rhs_norm_term = shrink.powf(-(n / gamma) * (m_star + 1.0)) * u_norm;
    let inv_s = params.s.recip_f64();
    let rhs_source_term = match f_norm {
        Measure::Finite(v) => Measure::Finite(shrink.powf(-(n / gamma) * m_star - n * inv_s + 2.0) * v),
        Measure::Divergent => Measure::Divergent,
    };
    let lambda_br = lambda_of(&coefficient, &params, radius)?;
    let lambda_exponent = delta * p_prime / (gamma * (delta - 1.0));
    let lambda_factor = match lambda_br {
        Measure::Finite(l) => Measure::Finite(l.powf(lambda_exponent)),
        Measure::Divergent => Measure::Divergent,
    };
    let fitted_c = match (lambda_factor, rhs_source_term) {
        _ if lhs == 0.0 => Measure::Finite(0.0),
        (Measure::Finite(l), Measure::Finite(src)) => measure_from(lhs / (l * (rhs_norm_term + src))),
        _ => Measure::Divergent,
    };
    Ok(BoundCheckReport {
        theta,
        radius,
        gamma,
        lhs,
        sup_refinement_delta: delta_sup,
        u_norm_gamma: u_norm,
        f_norm_s: f_norm,
        rhs_norm_term,
        rhs_source_term,
        lambda_br,
        lambda_exponent,
        lambda_factor,
        fitted_c,
        m_star,
        delta,
        p_prime,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarnackReport {
    pub radius: f64,
    pub sup_half: f64,
    pub inf_half: f64,
    pub f_norm_s: f64,
    /// `R^{2-n/s} ‖f‖_{L^s(B_R)}`.
    pub source_term: f64,
    /// `sup_half / (inf_half + source_term)`.
    pub quotient: f64,
    pub sup_refinement_delta: f64,
}

/// The Harnack quotient of a nonnegative profile on `B_R`.
pub fn harnack_quotient(u: &Profile<'_>, f: &Profile<'_>, n: u32, radius: f64, s: Exponent) -> Result<HarnackReport> {
    if !(radius > 0.0) {
        return Err(Error::Parameter("radius must be positive".into()));
    }
    let whole = u.range(0.0, radius)?;
    let scale = whole.max.abs().max(whole.min.abs()).max(f64::MIN_POSITIVE);
    if whole.min < -1e-12 * scale {
        return Err(Error::Precondition(format!(
            "u must be nonnegative on B_R; sampled minimum {:e}",
            whole.min
        )));
    }
    let half = u.range(0.0, radius / 2.0)?;
    let f_norm = f.norm(s.to_f64(), n, radius)?;
    let source_term = radius.powf(2.0 - n as f64 * s.recip_f64()) * f_norm;
    let inf_half = half.min.max(0.0);
    let denom = inf_half + source_term;
    if denom == 0.0 {
        return Err(Error::Precondition("inf u and f both vanish; the quotient is undefined".into()));
    }
    Ok(HarnackReport {
        radius,
        sup_half: half.max,
        inf_half,
        f_norm_s: f_norm,
        source_term,
        quotient: half.max / denom,
        sup_refinement_delta: half.refinement_delta,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarnackSweepEntry {
    pub beta: f64,
    pub theta: f64,
    /// One quotient per mesh resolution, coarsest first.
    pub quotients: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarnackSweep {
    pub n: u32,
    pub q: f64,
    pub s: f64,
    pub radius: f64,
    pub resolutions: Vec<usize>,
    pub entries: Vec<HarnackSweepEntry>,
    /// `max / min` of the finest quotients.
    pub spread: f64,
    pub max_quotient: f64,
    /// Largest relative change of a quotient between the two finest meshes.
    pub refinement_change: f64,
}

fn radial_solve_profile(
    coef: RadialCoefficient,
    source: &(dyn Fn(f64) -> Result<f64> + Sync),
    breakpoints: &[f64],
    n: u32,
    radius: f64,
    config: &SolverConfig,
) -> Result<crate::solver::DiscreteSolution> {
    let a = move |r: f64| coef.value(r);
    let problem = RadialProblem {
        n,
        radius,
        a1: &a,
        source: Source { f: source, breakpoints },
        outer_value: 0.0,
        inner_value: None,
    };
    solve_radial(&problem, config)
}

/// Harnack quotients of `-(r^{n-1} r^β L^θ u')' = r^{n-1}`, `u(R) = 0`, over
/// a grid of admissible `(β, θ)` (`λ^{-1} ∈ L^q`, `q > n/2`, `s > s0`).
pub fn harnack_sweep(
    n: u32,
    q: f64,
    s: f64,
    radius: f64,
    betas: &[f64],
    thetas: &[f64],
    resolutions: &[usize],
    base: &SolverConfig,
) -> Result<HarnackSweep> {
    let s0 = critical_source_exponent(n, q)
        .ok_or_else(|| Error::Parameter(format!("q = {q} must exceed n/2 for the Harnack sweep")))?;
    if !(s > s0) {
        return Err(Error::Parameter(format!("s = {s} must exceed s0 = {s0}")));
    }
    if resolutions.is_empty() {
        return Err(Error::Parameter("at least one mesh resolution is required".into()));
    }
    let pairs: Vec<(f64, f64)> = betas.iter().flat_map(|&b| thetas.iter().map(move |&t| (b, t))).collect();
    let one = |_: f64| Ok(1.0);
    let entries: Vec<HarnackSweepEntry> = pairs
        .par_iter()
        .map(|&(beta, theta)| {
            let coef = RadialCoefficient::with_radius(beta, theta, radius)?;
            if lambda_inv_lq_norm(&coef, q, n, radius)?.integral.is_divergent() {
                return Err(Error::Parameter(format!("λ^(-1) ∉ L^q for β = {beta}, θ = {theta}")));
            }
            let quotients = resolutions
                .iter()
                .map(|&cells| {
                    let cfg = SolverConfig { cells, ..*base };
                    let sol = radial_solve_profile(coef, &one, &[], n, radius, &cfg)?;
                    let u = Profile::from_solution(&sol)?;
                    let f = Profile::constant(1.0, radius);
                    Ok(harnack_quotient(&u, &f, n, radius, Exponent::Real(s))?.quotient)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(HarnackSweepEntry { beta, theta, quotients })
        })
        .collect::<Result<_>>()?;
    let finest: Vec<f64> = entries.iter().map(|e| *e.quotients.last().expect("resolutions")).collect();
    let max = finest.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = finest.iter().copied().fold(f64::INFINITY, f64::min);
    let refinement_change = entries
        .iter()
        .filter(|e| e.quotients.len() >= 2)
        .map(|e| {
            let k = e.quotients.len();
            ((e.quotients[k - 1] - e.quotients[k - 2]) / e.quotients[k - 1]).abs()
        })
        .fold(0.0, f64::max);
    Ok(HarnackSweep {
        n,
        q,
        s,
        radius,
        resolutions: resolutions.to_vec(),
        entries,
        spread: max / min,
        max_quotient: max,
        refinement_change,
    })
}

/// Plateaus `f_M = M^{n/s0} 1{r < c/M}`; `‖f_M‖_{s0}` does not depend on `M`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlateauFamily {
    pub tag: String,
    pub n: u32,
    pub s0: f64,
    pub s: f64,
    pub c: f64,
    pub ms: Vec<f64>,
}

pub fn plateau_family(n: u32, q: f64, s: f64, c: f64, ms: &[f64]) -> Result<PlateauFamily> {
    let s0 = critical_source_exponent(n, q)
        .ok_or_else(|| Error::Family(format!("q = {q} <= n/2 leaves s0 undefined")))?;
    if !(s > s0) {
        return Err(Error::Family(format!("s = {s} must exceed s0 = {s0}")));
    }
    if !(c > 0.0) || ms.iter().any(|m| !(*m >= 1.0)) {
        return Err(Error::Family("plateau radius c and levels M >= 1 must be positive".into()));
    }
    Ok(PlateauFamily { tag: "radial_plateau".into(), n, s0, s, c, ms: ms.to_vec() })
}

impl PlateauFamily {
    fn height(&self, m: f64) -> f64 {
        m.powf(self.n as f64 / self.s0)
    }

    fn profile(&self, m: f64, radius: f64) -> Result<Profile<'static>> {
        let (h, edge) = (self.height(m), self.c / m);
        Profile::from_fn(move |r| Ok(if r < edge { h } else { 0.0 }), vec![edge * 1e-3, edge, radius], false)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyMember {
    pub m: f64,
    pub s0_norm: f64,
    pub s_norm: f64,
    pub sup_norm: f64,
    /// Change of the sup between the configured mesh and half as many cells.
    pub sup_refinement_delta: f64,
    /// `log(‖f‖_s / ‖f‖_{s0} + 1)`.
    pub log_term: f64,
    /// `sup / (‖f‖_{s0} (log_term + 1))`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogBoundReport {
    pub family_tag: String,
    pub radius: f64,
    pub members: Vec<FamilyMember>,
    /// `max / min` of the `s0` norms.
    pub s0_spread: f64,
    /// `sup ≈ a + b · log_term`; absent for fewer than three members.
    pub fitted_model: Option<LinearFit>,
    pub fit_quality: Option<f64>,
    /// `max / min` of the ratios.
    pub ratio_band: f64,
    pub flags: Vec<String>,
}

/// Tolerance on the constancy of `‖f_M‖_{s0}` across the family.
pub const FAMILY_S0_TOLERANCE: f64 = 0.02;

/// Solves the family with coefficient `a` on `B_R`, `u(R) = 0`, and fits the
/// sup norms against the logarithmic term.
pub fn log_bound_check(
    family: &PlateauFamily,
    coefficient: RadialCoefficient,
    radius: f64,
    config: &SolverConfig,
) -> Result<LogBoundReport> {
    let n = family.n;
    let members: Vec<FamilyMember> = family
        .ms
        .par_iter()
        .map(|&m| {
            let fp = family.profile(m, radius)?;
            let s0_norm = fp.norm(family.s0, n, radius)?;
            let s_norm = fp.norm(family.s, n, radius)?;
            let (h, edge) = (family.height(m), family.c / m);
            let f = move |r: f64| Ok(if r < edge { h } else { 0.0 });
            let sup_at = |cells: usize| -> Result<f64> {
                let cfg = SolverConfig { cells, ..*config };
                let sol = radial_solve_profile(coefficient, &f, &[edge], n, radius, &cfg)?;
                Ok(sol.max())
            };
            let sup_norm = sup_at(config.cells)?;
            let coarse = sup_at((config.cells / 2).max(2))?;
            let log_term = (s_norm / s0_norm + 1.0).ln();
            Ok(FamilyMember {
                m,
                s0_norm,
                s_norm,
                sup_norm,
                sup_refinement_delta: (sup_norm - coarse).abs(),
                log_term,
                ratio: sup_norm / (s0_norm * (log_term + 1.0)),
            })
        })
        .collect::<Result<_>>()?;
    let s0s: Vec<f64> = members.iter().map(|m| m.s0_norm).collect();
    let s0_spread = s0s.iter().copied().fold(f64::NEG_INFINITY, f64::max) / s0s.iter().copied().fold(f64::INFINITY, f64::min);
    if s0_spread - 1.0 > FAMILY_S0_TOLERANCE {
        return Err(Error::Family(format!(
            "s0 norms vary by a factor {s0_spread}, beyond {FAMILY_S0_TOLERANCE}"
        )));
    }
    let mut flags = Vec::new();
    let fitted_model = if members.len() < 3 {
        flags.push("INSUFFICIENT_FAMILY".to_string());
        None
    } else {
        let x: Vec<f64> = members.iter().map(|m| m.log_term).collect();
        let y: Vec<f64> = members.iter().map(|m| m.sup_norm).collect();
        Some(linear_fit(&x, &y)?)
    };
    let ratios: Vec<f64> = members.iter().map(|m| m.ratio).collect();
    let ratio_band =
        ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max) / ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(LogBoundReport {
        family_tag: family.tag.clone(),
        radius,
        fit_quality: fitted_model.map(|f| f.r_squared),
        fitted_model,
        members,
        s0_spread,
        ratio_band,
        flags,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationRow {
    pub k: u32,
    pub cutoff: f64,
    pub report: BoundCheckReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationSweep {
    pub s: f64,
    pub rows: Vec<TruncationRow>,
    /// Fitted constants strictly increase with `k`.
    pub constant_grows: bool,
}

/// Sup-bound constants for `f_k = f · 1{r > 2^{-k}}` of an example, with the
/// consistent source so that `u_k` solves the truncated problem.
pub fn truncated_source_sweep(
    spec: &ExampleSpec,
    p: Exponent,
    s: f64,
    ks: &[u32],
    config: &SolverConfig,
) -> Result<TruncationSweep> {
    let kmax = *ks.iter().max().ok_or_else(|| Error::Parameter("no truncation levels".into()))?;
    let radius = EXAMPLE_DOMAIN_RADIUS;
    let spec = spec.with_form(SourceForm::Consistent);
    let cache = KernelCache::build(&[2, 3], 2f64.powi(-(kmax as i32)) * 0.5, 0.5, MEMBERSHIP_CACHE_TOL)?;
    let kernels = Kernels::Cached { cache: &cache, tol: 1e-10 };
    let coef = spec.coefficient();
    let params = ProblemParams::new(spec.n, p, Exponent::Real(spec.q), Exponent::Real(s));
    let rows: Vec<TruncationRow> = ks
        .par_iter()
        .map(|&k| {
            let cut = 2f64.powi(-(k as i32));
            let f = move |r: f64| if r > cut { eval_f(&spec, r, kernels) } else { Ok(0.0) };
            let sol = radial_solve_profile(coef, &f, &[cut], spec.n, radius, config)?;
            let u = Profile::from_solution(&sol)?;
            let mut nodes = log_nodes(cut, radius, 40 * k as usize);
            nodes.push(cut * 1e-3);
            let fp = Profile::from_fn(f, nodes, false)?;
            let inputs = BoundInputs { params, coefficient: coef, theta: 0.5, radius };
            Ok(TruncationRow { k, cutoff: cut, report: sup_bound_check(&u, &fp, &inputs)? })
        })
        .collect::<Result<_>>()?;
    let cs: Vec<f64> = rows.iter().map(|r| r.report.fitted_c.value().unwrap_or(f64::NAN)).collect();
    Ok(TruncationSweep { s, constant_grows: cs.windows(2).all(|w| w[1] > w[0]), rows })
}
