//! The Moser iteration chain `‖u‖_{L^{γ₀δ^m}(B_{ρ_m})}`.

use serde::Serialize;

use super::{measure_from, Profile};
use crate::coefficients::Measure;
use crate::error::{Error, Result};

/// Longest chain; `γ₀ δ^m` stays well inside the log-domain range.
pub const MAX_CHAIN_LENGTH: usize = 12;

/// Mean of the last increment ratios below which the chain counts as
/// converging geometrically.
pub const STABILIZING_RATIO: f64 = 0.9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MoserChainReport {
    pub gamma0: f64,
    pub delta: f64,
    /// `ρ_m = 1/4 + 4^{-(m+1)}`.
    pub radii: Vec<f64>,
    pub exponents: Vec<f64>,
    pub chain_norms: Vec<f64>,
    /// `log N_m - log N_{m-1}`.
    pub increments: Vec<f64>,
    /// `|inc_m| / |inc_{m-1}|`.
    pub increment_ratios: Vec<f64>,
    /// Sampled `sup_{B_{1/4}} |u|`; divergent for a singular profile.
    pub sup_quarter: Measure,
    /// `N_M / sup`.
    pub ratio: Option<f64>,
    /// `|N_M - sup| / sup`.
    pub limit_gap: Option<f64>,
    pub stabilizing: bool,
}

pub fn moser_norm_chain(profile: &Profile<'_>, n: u32, gamma0: f64, delta: f64, length: usize) -> Result<MoserChainReport> {
    if !(gamma0 > 0.0 && gamma0.is_finite()) || !(delta > 1.0 && delta.is_finite()) {
        return Err(Error::Parameter(format!("need γ₀ > 0 and δ > 1, got {gamma0}, {delta}")));
    }
    if !(2..=MAX_CHAIN_LENGTH).contains(&length) {
        return Err(Error::Parameter(format!("chain length {length} must lie in 2..={MAX_CHAIN_LENGTH}")));
    }
    let radii: Vec<f64> = (0..=length).map(|m| 0.25 + 0.25f64.powi(m as i32 + 1)).collect();
    let exponents: Vec<f64> = (0..=length).map(|m| gamma0 * delta.powi(m as i32)).collect();
    let log_norms: Vec<f64> = radii
        .iter()
        .zip(&exponents)
        .map(|(&rho, &t)| Ok(profile.log_power_integral(t, n, rho)? / t))
        .collect::<Result<_>>()?;
    let chain_norms: Vec<f64> = log_norms.iter().map(|l| l.exp()).collect();
    let increments: Vec<f64> = log_norms.windows(2).map(|w| w[1] - w[0]).collect();
    let increment_ratios: Vec<f64> = increments
        .windows(2)
        .map(|w| if w[0] == 0.0 { 0.0 } else { (w[1] / w[0]).abs() })
        .collect();
    let tail = &increment_ratios[increment_ratios.len().saturating_sub(3)..];
    let stabilizing = !tail.is_empty() && tail.iter().sum::<f64>() / (tail.len() as f64) < STABILIZING_RATIO;
    let sup_quarter = if profile.singular_center() {
        Measure::Divergent
    } else {
        measure_from(profile.sup_abs(0.25)?.0)
    };
    let last = *chain_norms.last().expect("non-empty chain");
    let (ratio, limit_gap) = match sup_quarter {
        Measure::Finite(s) if s > 0.0 => (Some(last / s), Some((last - s).abs() / s)),
        _ => (None, None),
    };
    Ok(MoserChainReport {
        gamma0,
        delta,
        radii,
        exponents,
        chain_norms,
        increments,
        increment_ratios,
        sup_quarter,
        ratio,
        limit_gap,
        stabilizing,
    })
}
