//! Explicit unbounded solutions and their sources.
//!
//! Every example shares `u(x) = α_n K_1(|x|)` and differs only in the
//! coefficient `a_1(r) = r^β (log 1/r)^θ` and the source `f`. With
//! `u' = -α_n K_2` and `K_2' = -2 K_3`, the source that makes
//! `-(r^{n-1} a_1 u')' / r^{n-1} = f` hold exactly is
//!
//! `α_n [(n-1+β) r^{β-1} L^θ K_2 - θ r^{β-1} L^{θ-1} K_2 - 2 r^β L^θ K_3]`
//!
//! with `L = log 1/r`. The printed sources are kept as a separate form so the
//! residual check can report their defect.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::RadialCoefficient;
use crate::error::{domain, Error, Result};
use crate::fit::{linear_fit, LinearFit};
use crate::quadrature::{
    geometric_ladder, kernel_value, nested_norm_integral, Asymptotics, KernelCache, NormOptions, NormTable,
    NormVerdict,
};
use crate::special::sphere_area;

/// Radius of the example domain `B_{1/4}`.
pub const EXAMPLE_DOMAIN_RADIUS: f64 = 0.25;

/// Outer tolerance of the kernel table used for membership studies.
pub const MEMBERSHIP_CACHE_TOL: f64 = 1e-6;

/// Relative differencing step of the flux derivative.
pub const DEFAULT_DIFF_STEP: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExampleId {
    Ex1,
    Ex2,
    Ex3,
    Borderline,
}

impl std::str::FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "EX1" => Ok(ExampleId::Ex1),
            "EX2" => Ok(ExampleId::Ex2),
            "EX3" => Ok(ExampleId::Ex3),
            "BORDERLINE" => Ok(ExampleId::Borderline),
            other => Err(Error::Parameter(format!("unknown example '{other}'"))),
        }
    }
}

/// Which source to pair with `u`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceForm {
    /// The three-term source exactly as displayed for the example.
    #[default]
    Verbatim,
    /// The source derived from `u` and `a_1`.
    Consistent,
}

impl std::str::FromStr for SourceForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "verbatim" => Ok(SourceForm::Verbatim),
            "consistent" => Ok(SourceForm::Consistent),
            other => Err(Error::Parameter(format!("unknown source form '{other}'"))),
        }
    }
}

/// `f = α_n [c_1 r^{β-1} L^ϑ K_2 + c_2 r^{β-1} L^{ϑ-1} K_2 - 2 r^β L^ϑ K_3]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SourceTerms {
    pub c1: f64,
    pub c2: f64,
    pub log_power: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExampleSpec {
    pub example_id: ExampleId,
    pub n: u32,
    pub q: f64,
    pub beta: f64,
    /// Log power of the coefficient.
    pub theta: f64,
    /// Log power in the displayed source (differs from `theta` only for the
    /// default third example and the borderline case).
    pub source_theta: f64,
    pub form: SourceForm,
    /// A user-chosen `θ` for the third example, outside the displayed construction.
    pub extrapolated: bool,
}

impl ExampleSpec {
    /// The example with its derived `β, θ`. `q` is ignored for `EX2` and
    /// `BORDERLINE`, where it is fixed by `n`.
    pub fn new(id: ExampleId, n: u32, q: Option<f64>) -> Result<Self> {
        let nf = n as f64;
        let need_q = || q.ok_or_else(|| Error::Parameter(format!("{id:?} needs q")));
        let spec = match id {
            ExampleId::Ex1 => {
                let q = need_q()?;
                if n < 2 || !(q > nf / 2.0) {
                    return Err(domain(format!("EX1 needs n >= 2 and q > n/2, got n = {n}, q = {q}")));
                }
                let theta = 1.0 / q + 0.5 - 1.0 / nf;
                ExampleSpec::raw(id, n, q, nf / q, theta, theta)
            }
            ExampleId::Ex2 => {
                if n < 2 {
                    return Err(domain("EX2 needs n >= 2"));
                }
                if let Some(q) = q {
                    if (q - nf / 2.0).abs() > 1e-12 * nf {
                        return Err(domain(format!("EX2 fixes q = n/2, got {q}")));
                    }
                }
                let theta = 5.0 / (2.0 * nf);
                ExampleSpec::raw(id, n, nf / 2.0, 2.0, theta, theta)
            }
            ExampleId::Ex3 => {
                let q = need_q()?;
                if n < 3 || !(q > (nf - 1.0) / 2.0 && q < nf / 2.0) {
                    return Err(domain(format!("EX3 needs n >= 3 and (n-1)/2 < q < n/2, got n = {n}, q = {q}")));
                }
                ExampleSpec::raw(id, n, q, nf / q, 2.0 / q, 1.0)
            }
            ExampleId::Borderline => {
                if n < 3 {
                    return Err(domain("the borderline case needs n >= 3"));
                }
                let q = (nf - 1.0) / 2.0;
                ExampleSpec::raw(id, n, q, nf / q, 2.0 / q, 1.0)
            }
        };
        Ok(spec)
    }

    fn raw(id: ExampleId, n: u32, q: f64, beta: f64, theta: f64, source_theta: f64) -> Self {
        ExampleSpec {
            example_id: id,
            n,
            q,
            beta,
            theta,
            source_theta,
            form: SourceForm::Verbatim,
            extrapolated: false,
        }
    }

    pub fn with_form(mut self, form: SourceForm) -> Self {
        self.form = form;
        self
    }

    /// Overrides `θ` of the third example (`θ > 1/q`); coefficient and
    /// source then share it and the spec is flagged as extrapolated.
    pub fn with_theta(mut self, theta: f64) -> Result<Self> {
        if self.example_id != ExampleId::Ex3 {
            return Err(Error::Parameter("θ is only free for EX3".into()));
        }
        if !(theta > 1.0 / self.q && theta.is_finite()) {
            return Err(domain(format!("EX3 needs θ > 1/q = {}, got {theta}", 1.0 / self.q)));
        }
        self.theta = theta;
        self.source_theta = theta;
        self.extrapolated = true;
        Ok(self)
    }

    pub fn coefficient(&self) -> RadialCoefficient {
        RadialCoefficient {
            beta: self.beta,
            theta: self.theta,
            domain_radius: EXAMPLE_DOMAIN_RADIUS,
            scale: 1.0,
        }
    }

    pub fn source_terms(&self) -> SourceTerms {
        let nf = self.n as f64;
        match self.form {
            SourceForm::Consistent => SourceTerms { c1: nf - 1.0 + self.beta, c2: -self.theta, log_power: self.theta },
            SourceForm::Verbatim => {
                let t = self.source_theta;
                let c2 = if self.example_id == ExampleId::Ex2 { t } else { -t };
                SourceTerms { c1: nf + 1.0, c2, log_power: t }
            }
        }
    }

    /// `f ~ C r^{β-2} (log 1/r)^{ϑ-1}` at the origin.
    pub fn source_asymptotics(&self) -> Asymptotics {
        Asymptotics { r_exponent: self.beta - 2.0, log_exponent: self.source_terms().log_power - 1.0 }
    }
}

/// Where kernel values come from.
#[derive(Clone, Copy, Debug)]
pub enum Kernels<'a> {
    Direct { tol: f64 },
    /// Interpolated inside the table range, direct outside it.
    Cached { cache: &'a KernelCache, tol: f64 },
}

impl Kernels<'_> {
    pub fn value(&self, m: u8, x: f64) -> Result<f64> {
        match *self {
            Kernels::Direct { tol } => kernel_value(m, x, tol),
            Kernels::Cached { cache, tol } => match cache.covers(x).then(|| cache.eval(m, x)).flatten() {
                Some(v) => Ok(v),
                None => kernel_value(m, x, tol),
            },
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r == 0.0 {
        return Err(Error::Domain("u and f diverge at the origin".into()));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(domain(format!("radius {r} must be positive")));
    }
    Ok(())
}

/// `u(r) = α_n K_1(r)`, identical for every example.
pub fn eval_u(spec: &ExampleSpec, r: f64, tol: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(sphere_area(spec.n) * kernel_value(1, r, tol)?)
}

/// `u'(r) = -α_n K_2(r)`.
pub fn eval_u_prime(spec: &ExampleSpec, r: f64, kernels: Kernels<'_>) -> Result<f64> {
    check_radius(r)?;
    Ok(-sphere_area(spec.n) * kernels.value(2, r)?)
}

/// The source of the example's form at radius `r`.
pub fn eval_f(spec: &ExampleSpec, r: f64, kernels: Kernels<'_>) -> Result<f64> {
    check_radius(r)?;
    if r >= 1.0 {
        return Err(domain(format!("radius {r} must be below 1 for log(1/r) > 0")));
    }
    let st = spec.source_terms();
    let l = -r.ln();
    let k2 = kernels.value(2, r)?;
    let k3 = kernels.value(3, r)?;
    let rb1 = r.powf(spec.beta - 1.0);
    let lt = l.powf(st.log_power);
    let v = st.c1 * rb1 * lt * k2 + st.c2 * rb1 * (lt / l) * k2 - 2.0 * rb1 * r * lt * k3;
    Ok(sphere_area(spec.n) * v)
}

/// A radial pair `(a_1, u)` with source `f` for the strong-form check.
pub trait RadialPair: Sync {
    fn n(&self) -> u32;
    fn a1(&self, r: f64) -> f64;
    fn u_prime(&self, r: f64) -> Result<f64>;
    fn f(&self, r: f64) -> Result<f64>;
}

/// An example together with its kernel source.
pub struct ExamplePair<'a> {
    pub spec: ExampleSpec,
    pub kernels: Kernels<'a>,
}

impl RadialPair for ExamplePair<'_> {
    fn n(&self) -> u32 {
        self.spec.n
    }
    fn a1(&self, r: f64) -> f64 {
        self.spec.coefficient().value(r)
    }
    fn u_prime(&self, r: f64) -> Result<f64> {
        eval_u_prime(&self.spec, r, self.kernels)
    }
    fn f(&self, r: f64) -> Result<f64> {
        eval_f(&self.spec, r, self.kernels)
    }
}

/// `a_1 ≡ 1`, `u = (1 - r²)/(2n)`, `f ≡ 1`.
#[derive(Clone, Copy, Debug)]
pub struct ManufacturedPoisson {
    pub n: u32,
}

impl RadialPair for ManufacturedPoisson {
    fn n(&self) -> u32 {
        self.n
    }
    fn a1(&self, _r: f64) -> f64 {
        1.0
    }
    fn u_prime(&self, r: f64) -> Result<f64> {
        Ok(-r / self.n as f64)
    }
    fn f(&self, _r: f64) -> Result<f64> {
        Ok(1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakResidualReport {
    pub window: [f64; 2],
    /// `sup |-(r^{n-1} a_1 u')'/r^{n-1} - f| / (1 + |f|)` over the nodes.
    pub residual_sup: f64,
    /// Node where the sup is attained.
    pub worst_radius: f64,
    pub node_count: usize,
    pub diff_step: f64,
    pub radii: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Strong-form residual at `node_count` log-spaced radii of `[r_a, r_b]`.
///
/// The flux `r^{n-1} a_1 u'` is differenced with the relative step
/// `h = diff_step · r`.
pub fn residual_check(pair: &dyn RadialPair, window: [f64; 2], node_count: usize, diff_step: f64) -> Result<WeakResidualReport> {
    let [ra, rb] = window;
    if !(ra > 0.0) {
        return Err(domain("residual window must stay away from the origin"));
    }
    if !(rb > ra && rb < 1.0) {
        return Err(domain(format!("residual window [{ra}, {rb}] must satisfy r_a < r_b < 1")));
    }
    if node_count < 16 {
        return Err(Error::Parameter(format!("node_count = {node_count} must be at least 16")));
    }
    if !(diff_step > 0.0 && diff_step < 0.1) {
        return Err(Error::Parameter(format!("differencing step {diff_step} must lie in (0, 0.1)")));
    }
    let n1 = pair.n() as i32 - 1;
    let flux = |r: f64| -> Result<f64> { Ok(r.powi(n1) * pair.a1(r) * pair.u_prime(r)?) };
    let ratio = (rb / ra).powf(1.0 / (node_count - 1) as f64);
    let radii: Vec<f64> =
        (0..node_count).map(|i| if i + 1 == node_count { rb } else { ra * ratio.powi(i as i32) }).collect();
    let residuals: Vec<f64> = radii
        .par_iter()
        .map(|&r| {
            let h = diff_step * r;
            let d = (flux(r + h)? - flux(r - h)?) / (2.0 * h);
            let f = pair.f(r)?;
            Ok((-d / r.powi(n1) - f).abs() / (1.0 + f.abs()))
        })
        .collect::<Result<_>>()?;
    let (worst, sup) = residuals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    Ok(WeakResidualReport {
        window,
        residual_sup: sup,
        worst_radius: radii[worst],
        node_count,
        diff_step,
        radii,
        residuals,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceProfile {
    pub k: Vec<u32>,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub strictly_increasing: bool,
    /// `u ≈ a + b · log log(1/ε)`.
    pub growth_model: &'static str,
    pub fit: LinearFit,
    pub fit_range: [u32; 2],
    pub fit_quality: f64,
}

/// `u(2^{-k})` for `k = 2..=k_max`, with the log-log model fitted on
/// `fit_range` (clipped to the computed range).
pub fn blowup_profile(spec: &ExampleSpec, k_max: u32, fit_range: [u32; 2], tol: f64) -> Result<DivergenceProfile> {
    if k_max < 4 {
        return Err(Error::Parameter(format!("k_max = {k_max} must be at least 4")));
    }
    let k: Vec<u32> = (2..=k_max).collect();
    let radii: Vec<f64> = k.iter().map(|&k| 2f64.powi(-(k as i32))).collect();
    let values: Vec<f64> = radii.par_iter().map(|&r| eval_u(spec, r, tol)).collect::<Result<_>>()?;
    let strictly_increasing = values.windows(2).all(|w| w[1] > w[0]);
    let lo = fit_range[0].max(2);
    let hi = fit_range[1].min(k_max);
    let (xs, ys): (Vec<f64>, Vec<f64>) = k
        .iter()
        .zip(&radii)
        .zip(&values)
        .filter(|((kk, _), _)| **kk >= lo && **kk <= hi)
        .map(|((_, r), v)| ((-r.ln()).ln(), *v))
        .unzip();
    let fit = linear_fit(&xs, &ys)?;
    Ok(DivergenceProfile {
        k,
        radii,
        values,
        strictly_increasing,
        growth_model: "log_log",
        fit,
        fit_range: [lo, hi],
        fit_quality: fit.r_squared,
    })
}

/// Values of `f` on a dyadic sweep and the running sup by depth.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SourceSweep {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// `sup |f(2^{-j/refine})|` over `j <= k · refine`, per depth `k`.
    pub sup_by_depth: Vec<f64>,
    /// The sup over the deeper half of the sweep exceeds the sup over the
    /// shallower half by less than `stabilization_tol` (relative).
    pub stabilized: bool,
    pub stabilization_tol: f64,
    /// `|f|` grows strictly over the last quarter of the sweep.
    pub growing_tail: bool,
}

/// `f(2^{-j/refine})` for `j = 2·refine ..= k_max·refine`.
pub fn source_sweep(spec: &ExampleSpec, k_max: u32, refine: u32, kernels: Kernels<'_>) -> Result<SourceSweep> {
    if k_max < 8 || refine == 0 {
        return Err(Error::Parameter("source sweep needs k_max >= 8 and refine >= 1".into()));
    }
    let js: Vec<u32> = (2 * refine..=k_max * refine).collect();
    let radii: Vec<f64> = js.iter().map(|&j| 2f64.powf(-(j as f64) / refine as f64)).collect();
    let values: Vec<f64> = radii.par_iter().map(|&r| eval_f(spec, r, kernels)).collect::<Result<_>>()?;
    let mut sup_by_depth = Vec::new();
    let mut running = 0.0f64;
    for (i, v) in values.iter().enumerate() {
        running = running.max(v.abs());
        if (js[i] % refine) == 0 {
            sup_by_depth.push(running);
        }
    }
    let half = values.len() / 2;
    let shallow = values[..half].iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let full = running;
    let stabilization_tol = 1e-2;
    let quarter = &values[values.len() - values.len() / 4..];
    Ok(SourceSweep {
        stabilized: full <= shallow * (1.0 + stabilization_tol),
        growing_tail: quarter.windows(2).all(|w| w[1].abs() > w[0].abs()),
        radii,
        values,
        sup_by_depth,
        stabilization_tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipRow {
    pub s: f64,
    pub table: NormTable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipMatrix {
    pub spec: ExampleSpec,
    pub radius: f64,
    pub rows: Vec<MembershipRow>,
}

impl MembershipMatrix {
    pub fn verdict(&self, s: f64) -> Option<NormVerdict> {
        self.rows.iter().find(|r| r.s == s).map(|r| r.table.verdict)
    }
}

/// Nested `L^s(B_{1/4})` norms of the example source along a dyadic ladder
/// from `1/8` down to `cutoff`.
pub fn membership(spec: &ExampleSpec, exponents: &[f64], cutoff: f64, tol: f64) -> Result<MembershipMatrix> {
    if !(cutoff > 0.0 && cutoff < 0.125) {
        return Err(domain(format!("cutoff {cutoff} must lie in (0, 1/8)")));
    }
    let ladder = geometric_ladder(0.125, cutoff, 0.5);
    // Interpolated kernels carry 1e-7 relative error, far below the 1%
    // increments the verdicts are based on.
    let cache = KernelCache::build(&[2, 3], cutoff * 0.5, 0.5, tol.max(MEMBERSHIP_CACHE_TOL))?;
    let kernels = Kernels::Cached { cache: &cache, tol: tol * 1e-2 };
    let f = |r: f64| eval_f(spec, r, kernels);
    let options = NormOptions { tol, asymptotics: Some(spec.source_asymptotics()), ..NormOptions::default() };
    let rows = exponents
        .iter()
        .map(|&s| {
            let table = nested_norm_integral(&f, s, spec.n, EXAMPLE_DOMAIN_RADIUS, &ladder, &options)?;
            Ok(MembershipRow { s, table })
        })
        .collect::<Result<_>>()?;
    Ok(MembershipMatrix { spec: *spec, radius: EXAMPLE_DOMAIN_RADIUS, rows })
}
