//! Tabulated kernels for nested integrals.
//!
//! `log K_m` is tabulated against `log ξ` on a uniform grid and interpolated
//! with monotone cubics. The table is built once (node evaluations run in
//! parallel, results are collected in grid order) and is read-only
//! afterwards, so a shared reference can serve concurrent readers.
//!
//! The interpolation error is measured at every cell midpoint against a
//! direct evaluation; the grid is refined until that error is below one tenth
//! of the outer tolerance.

use rayon::prelude::*;
use serde::Serialize;

use super::kernel::kernel_value;
use super::pchip::Pchip;
use crate::error::{domain, Error, Result};

const START_NODES_PER_DECADE: usize = 32;
const MAX_REFINEMENTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelCacheInfo {
    pub x_min: f64,
    pub x_max: f64,
    pub nodes_per_decade: usize,
    pub nodes_per_kernel: usize,
    /// Kernel quadrature tolerance used for the nodes.
    pub node_tolerance: f64,
    /// Interpolation accuracy budget (relative).
    pub budget: f64,
    /// Largest relative midpoint error observed.
    pub max_midpoint_error: f64,
}

#[derive(Clone, Debug)]
pub struct KernelCache {
    tables: Vec<(u8, Pchip)>,
    info: KernelCacheInfo,
}

impl KernelCache {
    /// Tabulates `K_m` for every `m` in `powers` on `[x_min, x_max]` so that
    /// interpolation meets `outer_tol / 10` relative accuracy.
    pub fn build(powers: &[u8], x_min: f64, x_max: f64, outer_tol: f64) -> Result<Self> {
        if !(x_min > 0.0 && x_max > x_min && x_max <= 0.5) {
            return Err(domain(format!("cache range [{x_min}, {x_max}] must lie in (0, 1/2]")));
        }
        if !(outer_tol > 0.0 && outer_tol < 1.0) {
            return Err(domain(format!("outer tolerance {outer_tol} must lie in (0, 1)")));
        }
        let budget = outer_tol / 10.0;
        let node_tolerance = (budget / 10.0).max(1e-14);
        let (lmin, lmax) = (x_min.ln(), x_max.ln());
        let decades = (lmax - lmin) / std::f64::consts::LN_10;

        let mut per_decade = START_NODES_PER_DECADE;
        for _ in 0..=MAX_REFINEMENTS {
            let cells = ((decades * per_decade as f64).ceil() as usize).max(4);
            let grid: Vec<f64> = (0..=cells).map(|i| lmin + (lmax - lmin) * i as f64 / cells as f64).collect();
            let mids: Vec<f64> = grid.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();

            let mut tables = Vec::with_capacity(powers.len());
            let mut worst: f64 = 0.0;
            for &m in powers {
                let values = tabulate(m, &grid, node_tolerance)?;
                let table = Pchip::new(grid.clone(), values)?;
                let direct = tabulate(m, &mids, node_tolerance)?;
                for (t, ld) in mids.iter().zip(&direct) {
                    let li = table.eval(*t).expect("midpoint inside grid");
                    worst = worst.max(((li - ld).exp() - 1.0).abs());
                }
                tables.push((m, table));
            }
            let info = KernelCacheInfo {
                x_min,
                x_max,
                nodes_per_decade: per_decade,
                nodes_per_kernel: grid.len(),
                node_tolerance,
                budget,
                max_midpoint_error: worst,
            };
            if worst <= budget {
                return Ok(KernelCache { tables, info });
            }
            per_decade *= 2;
        }
        Err(Error::Quadrature(format!(
            "kernel cache could not reach relative accuracy {budget} with {per_decade} nodes per decade"
        )))
    }

    pub fn info(&self) -> KernelCacheInfo {
        self.info
    }

    /// Interpolated `K_m(ξ)`; `None` outside the table or for an untabulated `m`.
    pub fn eval(&self, m: u8, x: f64) -> Option<f64> {
        if !(x > 0.0) {
            return None;
        }
        let (_, table) = self.tables.iter().find(|(k, _)| *k == m)?;
        table.eval(x.ln()).map(f64::exp)
    }

    pub fn covers(&self, x: f64) -> bool {
        x >= self.info.x_min && x <= self.info.x_max
    }
}

fn tabulate(m: u8, log_x: &[f64], tol: f64) -> Result<Vec<f64>> {
    log_x
        .par_iter()
        .map(|&lx| kernel_value(m, lx.exp(), tol).map(f64::ln))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_meets_budget_and_matches_direct() {
        let cache = KernelCache::build(&[1, 2, 3], 1e-9, 0.25, 1e-7).unwrap();
        let info = cache.info();
        assert!(info.max_midpoint_error <= info.budget);
        for &x in &[3.3e-9, 1.7e-5, 0.0123, 0.2] {
            for m in 1..=3u8 {
                let c = cache.eval(m, x).unwrap();
                let d = kernel_value(m, x, 1e-13).unwrap();
                assert!((c / d - 1.0).abs() < 1e-8, "m={m} x={x}: {c} vs {d}");
            }
        }
        assert!(cache.eval(1, 0.3).is_none());
        assert!(cache.eval(4, 0.1).is_none());
    }

    #[test]
    fn shared_reads_are_consistent() {
        let cache = std::sync::Arc::new(KernelCache::build(&[2], 1e-4, 0.25, 1e-6).unwrap());
        let xs: Vec<f64> = (0..64).map(|i| 1e-4 * 1.1f64.powi(i)).filter(|x| *x <= 0.25).collect();
        let serial: Vec<f64> = xs.iter().map(|&x| cache.eval(2, x).unwrap()).collect();
        let parallel: Vec<f64> = xs.par_iter().map(|&x| cache.eval(2, x).unwrap()).collect();
        assert_eq!(serial, parallel);
    }
}
