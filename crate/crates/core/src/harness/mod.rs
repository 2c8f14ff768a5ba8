//! Empirical checks of the regularity estimates on radial profiles.
//!
//! A [`Profile`] is a radial function on `B_R ⊂ R^n` with a list of sampling
//! radii. Sup norms come from the samples plus the midpoints between them
//! (one halving), and the difference between the two is reported as the
//! refinement delta. `L^t` norms are radial Gauss–Legendre sums in `log r`,
//! accumulated in the log domain so that large exponents cannot overflow.

mod bounds;
mod holder;
mod moser;

pub use bounds::{
    harnack_quotient, harnack_sweep, log_bound_check, plateau_family, sup_bound_check, truncated_source_sweep,
    BoundCheckReport, BoundInputs, FamilyMember, HarnackReport, HarnackSweep, HarnackSweepEntry, LogBoundReport,
    PlateauFamily, TruncationRow, TruncationSweep,
};
pub use holder::{holder_exponent, HolderFlag, HolderReport};
pub use moser::{moser_norm_chain, MoserChainReport};

use crate::coefficients::Measure;
use crate::error::{Error, Result};
use crate::quadrature::log_gauss_nodes;
use crate::solver::{DiscreteSolution, Mesh};
use crate::special::sphere_area;

type Eval<'a> = Box<dyn Fn(f64) -> Result<f64> + Sync + 'a>;

pub struct Profile<'a> {
    eval: Eval<'a>,
    /// Sorted sampling radii; also the integration breakpoints.
    nodes: Vec<f64>,
    /// The profile is unbounded at the origin.
    singular_center: bool,
}

impl<'a> Profile<'a> {
    /// Wraps a radial function sampled at `nodes`.
    pub fn from_fn(eval: impl Fn(f64) -> Result<f64> + Sync + 'a, mut nodes: Vec<f64>, singular_center: bool) -> Result<Self> {
        nodes.retain(|r| *r > 0.0);
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        if nodes.len() < 2 {
            return Err(Error::InsufficientData("a profile needs at least two positive sampling radii".into()));
        }
        Ok(Profile { eval: Box::new(eval), nodes, singular_center })
    }

    pub fn constant(c: f64, radius: f64) -> Self {
        Profile { eval: Box::new(move |_| Ok(c)), nodes: vec![radius * 1e-3, radius], singular_center: false }
    }

    /// Piecewise-linear interpolant of a radial solution, extended by its
    /// innermost value below `r_min`.
    pub fn from_solution(sol: &'a DiscreteSolution) -> Result<Self> {
        let Mesh::Radial(mesh) = &sol.mesh else {
            return Err(Error::Parameter("profiles are built from radial solutions".into()));
        };
        let r = &mesh.nodes;
        let v = &sol.values;
        let eval = move |x: f64| -> Result<f64> {
            if x <= r[0] {
                return Ok(v[0]);
            }
            let last = r[r.len() - 1];
            if x >= last && x <= last * (1.0 + 1e-12) {
                return Ok(v[v.len() - 1]);
            }
            let k = r.partition_point(|&ri| ri <= x);
            if k >= r.len() {
                return Err(Error::Domain(format!("radius {x} beyond the mesh ({})", r[r.len() - 1])));
            }
            let t = (x - r[k - 1]) / (r[k] - r[k - 1]);
            Ok(v[k - 1] + t * (v[k] - v[k - 1]))
        };
        Ok(Profile { eval: Box::new(eval), nodes: r.clone(), singular_center: false })
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if r == 0.0 && self.singular_center {
            return Err(Error::Domain("profile is unbounded at the origin".into()));
        }
        (self.eval)(r.max(f64::MIN_POSITIVE))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn singular_center(&self) -> bool {
        self.singular_center
    }

    pub fn outer(&self) -> f64 {
        *self.nodes.last().expect("non-empty")
    }

    /// Sample radii in `[lo, hi]`: the nodes inside plus both ends.
    fn samples(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut s: Vec<f64> = vec![lo.max(self.nodes[0].min(hi)), hi];
        s.extend(self.nodes.iter().copied().filter(|&r| r > lo && r < hi));
        s.sort_by(f64::total_cmp);
        s.dedup();
        s
    }

    /// `(min, max)` of the samples in `[lo, hi]` and with midpoints added.
    pub fn range(&self, lo: f64, hi: f64) -> Result<SampledRange> {
        let s = self.samples(lo, hi);
        let coarse: Vec<f64> = s.iter().map(|&r| self.eval(r)).collect::<Result<_>>()?;
        let mids: Vec<f64> = s.windows(2).map(|w| self.eval(0.5 * (w[0] + w[1]))).collect::<Result<_>>()?;
        let fold = |v: &[f64]| v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let (cmin, cmax) = fold(&coarse);
        let (mmin, mmax) = fold(&mids);
        let (min, max) = (cmin.min(mmin), cmax.max(mmax));
        Ok(SampledRange { min, max, refinement_delta: (max - cmax).max(cmin - min), samples: s.len() + mids.len() })
    }

    /// `sup |u|` over `B_hi`.
    pub fn sup_abs(&self, hi: f64) -> Result<(f64, f64)> {
        let r = self.range(0.0, hi)?;
        let sup = r.max.abs().max(r.min.abs());
        Ok((sup, r.refinement_delta))
    }

    /// `log ∫_{B_R} |u|^t dx`; `-∞` for `u ≡ 0`.
    pub fn log_power_integral(&self, t: f64, n: u32, radius: f64) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Parameter(format!("exponent {t} must be positive and finite")));
        }
        let mut cuts: Vec<f64> = self.nodes.iter().copied().filter(|&r| r < radius).collect();
        cuts.push(radius);
        let mut terms: Vec<f64> = Vec::new();
        // Inner ball below the first node, at the innermost value.
        let r0 = cuts[0];
        let u0 = self.eval(r0)?.abs();
        if u0 > 0.0 {
            terms.push(t * u0.ln() + (r0.powi(n as i32) / n as f64).ln());
        }
        let n1 = n as f64 - 1.0;
        for w in cuts.windows(2) {
            for (r, wt) in log_gauss_nodes(w[0], w[1]) {
                let u = self.eval(r)?.abs();
                if u > 0.0 {
                    terms.push(t * u.ln() + wt.ln() + n1 * r.ln());
                }
            }
        }
        if terms.is_empty() {
            return Ok(f64::NEG_INFINITY);
        }
        let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = terms.iter().map(|x| (x - m).exp()).sum();
        Ok(m + s.ln() + sphere_area(n).ln())
    }

    /// `‖u‖_{L^t(B_R)}`; `t = ∞` gives the sampled sup.
    pub fn norm(&self, t: f64, n: u32, radius: f64) -> Result<f64> {
        if t.is_infinite() {
            return Ok(self.sup_abs(radius)?.0);
        }
        Ok((self.log_power_integral(t, n, radius)? / t).exp())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct SampledRange {
    pub min: f64,
    pub max: f64,
    /// Change of the extreme values when midpoints are added.
    pub refinement_delta: f64,
    pub samples: usize,
}

/// `count` radii log-spaced on `[lo, hi]`.
pub fn log_nodes(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let q = (hi / lo).powf(1.0 / (count.max(2) - 1) as f64);
    (0..count.max(2)).map(|i| if i + 1 == count.max(2) { hi } else { lo * q.powi(i as i32) }).collect()
}

pub(crate) fn measure_from(v: f64) -> Measure {
    if v.is_finite() {
        Measure::Finite(v)
    } else {
        Measure::Divergent
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ball_volume;

    #[test]
    fn constant_norms() {
        let p = Profile::constant(3.0, 0.5);
        for t in [1.0, 2.0, 40.0] {
            let v = p.norm(t, 3, 0.5).unwrap();
            assert!((v - 3.0 * ball_volume(3, 0.5).powf(1.0 / t)).abs() < 1e-12 * v);
        }
        assert_eq!(p.norm(f64::INFINITY, 3, 0.5).unwrap(), 3.0);
    }

    #[test]
    fn power_profile_norm() {
        // ∫_{B_1} |x|^{-1} dx in R^3 = 4π/2 = 2π
        let p = Profile::from_fn(|r| Ok(1.0 / r), log_nodes(1e-12, 1.0, 60), true).unwrap();
        let v = p.norm(1.0, 3, 1.0).unwrap();
        assert!((v - 2.0 * std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn large_exponent_does_not_overflow() {
        let p = Profile::constant(1e10, 0.25);
        let v = p.norm(1000.0, 3, 0.25).unwrap();
        assert!(v.is_finite() && v > 9e9);
    }

    #[test]
    fn refinement_delta_detects_interior_peak() {
        let p = Profile::from_fn(|r| Ok(-(r - 0.5).powi(2)), vec![0.1, 0.4, 0.7, 1.0], false).unwrap();
        let s = p.range(0.0, 1.0).unwrap();
        assert!(s.refinement_delta > 0.0);
        assert!(s.max <= 0.0);
    }

    #[test]
    fn singular_center_is_reported() {
        let p = Profile::from_fn(|r| Ok(-r.ln()), log_nodes(1e-8, 1.0, 20), true).unwrap();
        assert!(p.eval(0.0).is_err());
    }
}
