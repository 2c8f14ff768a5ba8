//! Cutoff-ladder study of `α_n ∫_ε^R |f(r)|^s r^{n-1} dr` as `ε → 0`.

use std::cell::RefCell;

use serde::Serialize;

use super::{adaptive, power_log_converges_at_origin};
use crate::error::{Error, Result};
use crate::special::sphere_area;

/// Behaviour `f(r) ~ C r^a (log 1/r)^b` at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Asymptotics {
    pub r_exponent: f64,
    pub log_exponent: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NormVerdict {
    Convergent,
    Divergent,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormOptions {
    /// Relative tolerance of each ladder piece.
    pub tol: f64,
    /// Empirical convergence: last increment relative to the partial norm.
    pub convergence_threshold: f64,
    /// Empirical divergence: this many consecutive increments grow.
    pub growth_window: usize,
    pub asymptotics: Option<Asymptotics>,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions { tol: 1e-9, convergence_threshold: 0.01, growth_window: 4, asymptotics: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormRow {
    pub cutoff: f64,
    /// `α_n ∫_cutoff^R |f|^s r^{n-1} dr`.
    pub partial: f64,
    /// Contribution of `[cutoff, previous cutoff]`.
    pub increment: f64,
    pub relative_increment: f64,
    /// `increment / previous increment`.
    pub increment_ratio: Option<f64>,
    pub error_estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormTable {
    pub s: f64,
    pub n: u32,
    pub radius: f64,
    pub rows: Vec<NormRow>,
    pub structural: Option<NormVerdict>,
    pub empirical: NormVerdict,
    /// Structural verdict when available, empirical otherwise.
    pub verdict: NormVerdict,
    pub all_pieces_converged: bool,
}

impl NormTable {
    pub fn last(&self) -> &NormRow {
        self.rows.last().expect("non-empty ladder")
    }
}

/// Partial norms of `f` along a strictly decreasing cutoff ladder.
pub fn nested_norm_integral(
    f_eval: &(dyn Fn(f64) -> Result<f64> + Sync),
    s: f64,
    n: u32,
    radius: f64,
    cutoffs: &[f64],
    options: &NormOptions,
) -> Result<NormTable> {
    if !(s >= 1.0 && s.is_finite()) {
        return Err(Error::Parameter(format!("exponent s = {s} must be finite and >= 1")));
    }
    if n < 1 || !(radius > 0.0) {
        return Err(Error::Parameter("dimension and radius must be positive".into()));
    }
    if cutoffs.is_empty() {
        return Err(Error::Parameter("cutoff ladder is empty".into()));
    }
    if !(cutoffs[0] > 0.0 && cutoffs[0] < radius) {
        return Err(Error::Parameter(format!("first cutoff {} must lie in (0, R)", cutoffs[0])));
    }
    if cutoffs.windows(2).any(|w| !(w[1] < w[0] && w[1] > 0.0)) {
        return Err(Error::Parameter("cutoff ladder must be strictly decreasing and positive".into()));
    }

    let alpha = sphere_area(n);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |t: f64| {
        let r = (-t).exp();
        match f_eval(r) {
            Ok(v) => alpha * v.abs().powf(s) * (-(n as f64) * t).exp(),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };

    let mut rows = Vec::with_capacity(cutoffs.len());
    let mut partial = 0.0;
    let mut upper = radius;
    let mut prev_inc: Option<f64> = None;
    let mut all_converged = true;
    for &eps in cutoffs {
        let piece = adaptive(&integrand, -upper.ln(), -eps.ln(), options.tol, 0.0, 2000);
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        all_converged &= piece.converged;
        partial += piece.value;
        rows.push(NormRow {
            cutoff: eps,
            partial,
            increment: piece.value,
            relative_increment: if partial > 0.0 { piece.value / partial } else { 0.0 },
            increment_ratio: prev_inc.filter(|p| *p > 0.0).map(|p| piece.value / p),
            error_estimate: piece.error,
        });
        prev_inc = Some(piece.value);
        upper = eps;
    }

    let structural = options.asymptotics.map(|a| {
        // |f|^s r^{n-1} ~ r^{a s + n - 1} (log 1/r)^{b s}
        let re = a.r_exponent * s + n as f64 - 1.0;
        let le = a.log_exponent * s;
        if power_log_converges_at_origin(re, le) {
            NormVerdict::Convergent
        } else {
            NormVerdict::Divergent
        }
    });
    let empirical = empirical_verdict(&rows, options);
    Ok(NormTable {
        s,
        n,
        radius,
        structural,
        empirical,
        verdict: structural.unwrap_or(empirical),
        rows,
        all_pieces_converged: all_converged,
    })
}

fn empirical_verdict(rows: &[NormRow], options: &NormOptions) -> NormVerdict {
    let w = options.growth_window.max(2);
    if rows.len() >= w {
        let tail = &rows[rows.len() - w..];
        if tail.windows(2).all(|p| p[1].increment > p[0].increment) {
            return NormVerdict::Divergent;
        }
    }
    match rows.last() {
        Some(r) if r.relative_increment < options.convergence_threshold => NormVerdict::Convergent,
        _ => NormVerdict::Inconclusive,
    }
}

/// Geometric ladder `first, first·ratio, …` ending exactly at `last`.
pub fn geometric_ladder(first: f64, last: f64, ratio: f64) -> Vec<f64> {
    let steps = ((last / first).ln() / ratio.ln()).round().max(1.0) as usize;
    let q = (last / first).powf(1.0 / steps as f64);
    (0..=steps).map(|k| if k == steps { last } else { first * q.powi(k as i32) }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ball_volume;

    #[test]
    fn constant_function_ball_volume() {
        let one = |_r: f64| Ok(1.0);
        let ladder = geometric_ladder(0.1, 1e-8, 0.5);
        let t = nested_norm_integral(&one, 2.0, 3, 0.25, &ladder, &NormOptions::default()).unwrap();
        let exact = ball_volume(3, 0.25);
        assert!((t.last().partial - exact).abs() < 1e-9 * exact);
        assert!(t.last().increment < 1e-20);
        assert_eq!(t.empirical, NormVerdict::Convergent);
    }

    #[test]
    fn power_law_verdicts() {
        // |r^{-1}|^s r^2 with s = 3 is r^{-1}: divergent, increments constant
        // per geometric step; s = 2.5 gives r^{-1/2}: convergent.
        let f = |r: f64| Ok(1.0 / r);
        let ladder = geometric_ladder(0.1, 1e-8, 0.5);
        let asym = Asymptotics { r_exponent: -1.0, log_exponent: 0.0 };
        let opts = NormOptions { asymptotics: Some(asym), ..NormOptions::default() };
        let div = nested_norm_integral(&f, 3.5, 3, 0.25, &ladder, &opts).unwrap();
        assert_eq!(div.structural, Some(NormVerdict::Divergent));
        assert_eq!(div.empirical, NormVerdict::Divergent);
        let conv = nested_norm_integral(&f, 2.5, 3, 0.25, &ladder, &opts).unwrap();
        assert_eq!(conv.verdict, NormVerdict::Convergent);
        // Closed form: 4π ∫_ε^{1/4} r^{-1/2} dr = 8π (1/2 - sqrt ε)
        let exact = 8.0 * std::f64::consts::PI * (0.5 - 1e-4);
        assert!((conv.last().partial - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn rejects_bad_ladders() {
        let one = |_r: f64| Ok(1.0);
        let o = NormOptions::default();
        assert!(nested_norm_integral(&one, 2.0, 3, 0.25, &[0.1, 0.2], &o).is_err());
        assert!(nested_norm_integral(&one, 2.0, 3, 0.25, &[0.3, 0.1], &o).is_err());
        assert!(nested_norm_integral(&one, 2.0, 3, 0.25, &[], &o).is_err());
        assert!(nested_norm_integral(&one, 2.0, 3, 0.25, &[0.1, 0.1], &o).is_err());
    }

    #[test]
    fn ladder_endpoints() {
        let l = geometric_ladder(0.125, 1e-8, 0.5);
        assert_eq!(l[0], 0.125);
        assert_eq!(*l.last().unwrap(), 1e-8);
        assert!(l.windows(2).all(|w| w[1] < w[0]));
    }
}
