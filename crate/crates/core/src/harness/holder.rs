//! Oscillation decay on shrinking balls.

use serde::Serialize;

use super::Profile;
use crate::error::{Error, Result};
use crate::fit::{linear_fit, LinearFit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HolderFlag {
    Regular,
    /// The ball contains a point where the profile is unbounded.
    IrregularAtCenter,
    /// Every sampled oscillation vanishes.
    Flat,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderReport {
    /// Distance from the ball centre to the origin.
    pub center_distance: f64,
    /// Dyadic radii `r_j`.
    pub scales: Vec<f64>,
    /// `osc_{B_r(c)} u`; `null` where the ball meets the singular point.
    pub oscillations: Vec<Option<f64>>,
    /// Slope of `log osc` against `log r`; `0` when irregular, `1` when flat.
    pub fitted_alpha: f64,
    pub fit: Option<LinearFit>,
    pub fit_quality: Option<f64>,
    pub flag: HolderFlag,
}

/// Fits `osc_{B_{r_j}(c)} u ≈ C r_j^α` over `r_j = R 2^{-j}`, `j = 0..=levels`,
/// for a ball centred at distance `center_distance` from the origin.
pub fn holder_exponent(profile: &Profile<'_>, center_distance: f64, radius: f64, levels: usize) -> Result<HolderReport> {
    if !(center_distance >= 0.0) || !(radius > 0.0) {
        return Err(Error::Parameter("centre distance and radius must be nonnegative and positive".into()));
    }
    let radii: Vec<f64> = (0..=levels).map(|j| radius * 0.5f64.powi(j as i32)).collect();
    let oscillations: Vec<Option<f64>> = radii
        .iter()
        .map(|&r| {
            let lo = (center_distance - r).max(0.0);
            if profile.singular_center() && lo == 0.0 {
                return Ok(None);
            }
            let s = profile.range(lo, center_distance + r)?;
            Ok(Some(s.max - s.min))
        })
        .collect::<Result<_>>()?;

    let singular_hits = oscillations.iter().filter(|o| o.is_none()).count();
    if singular_hits == radii.len() {
        return Ok(HolderReport {
            center_distance,
            scales: radii,
            oscillations,
            fitted_alpha: 0.0,
            fit: None,
            fit_quality: None,
            flag: HolderFlag::IrregularAtCenter,
        });
    }
    let usable: Vec<(f64, f64)> = radii
        .iter()
        .zip(&oscillations)
        .filter_map(|(&r, o)| o.filter(|v| *v > 0.0).map(|v| (r.ln(), v.ln())))
        .collect();
    let flat = oscillations.iter().flatten().all(|v| *v == 0.0);
    if flat && oscillations.iter().flatten().count() >= 3 {
        return Ok(HolderReport {
            center_distance,
            scales: radii,
            oscillations,
            fitted_alpha: 1.0,
            fit: None,
            fit_quality: None,
            flag: HolderFlag::Flat,
        });
    }
    if usable.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable oscillation levels; at least 3 are needed",
            usable.len()
        )));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = usable.into_iter().unzip();
    let fit = linear_fit(&x, &y)?;
    let flag = if singular_hits > 0 { HolderFlag::IrregularAtCenter } else { HolderFlag::Regular };
    Ok(HolderReport {
        center_distance,
        scales: radii,
        oscillations,
        fitted_alpha: fit.slope,
        fit_quality: Some(fit.r_squared),
        fit: Some(fit),
        flag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::log_nodes;

    #[test]
    fn power_profile_exponent() {
        let p = Profile::from_fn(|r| Ok(r.powf(0.3)), log_nodes(1e-40, 1.0, 600), false).unwrap();
        let rep = holder_exponent(&p, 0.0, 0.5, 12).unwrap();
        assert_eq!(rep.flag, HolderFlag::Regular);
        assert!((rep.fitted_alpha - 0.3).abs() < 1e-6, "{}", rep.fitted_alpha);
    }

    #[test]
    fn affine_profile_is_lipschitz() {
        let p = Profile::from_fn(|r| Ok(2.0 * r + 1.0), log_nodes(1e-30, 1.0, 100), false).unwrap();
        let rep = holder_exponent(&p, 0.0, 1.0, 10).unwrap();
        assert!((rep.fitted_alpha - 1.0).abs() < 0.02);
        let osc: Vec<f64> = rep.oscillations.iter().flatten().copied().collect();
        assert!(osc.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn smooth_off_center_is_lipschitz() {
        let p = Profile::from_fn(|r| Ok(r * r), log_nodes(1e-6, 1.0, 2000), false).unwrap();
        let rep = holder_exponent(&p, 0.5, 0.2, 8).unwrap();
        assert!((rep.fitted_alpha - 1.0).abs() < 0.02, "{}", rep.fitted_alpha);
    }

    #[test]
    fn singular_center() {
        let p = Profile::from_fn(|r| Ok((-r.ln()).ln()), log_nodes(1e-12, 0.25, 50), true).unwrap();
        let rep = holder_exponent(&p, 0.0, 0.25, 6).unwrap();
        assert_eq!(rep.flag, HolderFlag::IrregularAtCenter);
        assert_eq!(rep.fitted_alpha, 0.0);
        assert!(rep.oscillations.iter().all(Option::is_none));
    }

    #[test]
    fn constant_is_flat_and_short_ladder_errors() {
        let p = Profile::constant(2.0, 1.0);
        assert_eq!(holder_exponent(&p, 0.0, 1.0, 5).unwrap().flag, HolderFlag::Flat);
        let q = Profile::from_fn(|r| Ok(r), log_nodes(1e-3, 1.0, 20), false).unwrap();
        assert!(matches!(holder_exponent(&q, 0.0, 1.0, 1), Err(Error::InsufficientData(_))));
    }
}
