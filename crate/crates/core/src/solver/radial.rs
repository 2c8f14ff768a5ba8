//! Radial finite volumes.
//!
//! Nodes `r_0 = r_min < … < r_N = R`; node `i` owns `[m_{i-1}, m_i]` with
//! `m_i` the cell midpoints. Between two nodes the flux of a source-free
//! solution is constant, so the face transmissibility is the series
//! resistance `T_i = 1 / ∫_{r_i}^{r_{i+1}} dρ / (ρ^{n-1} a(ρ))`, the
//! harmonic mean of `ρ^{n-1} a` over the cell.

use serde::Serialize;

use super::{DiscreteSolution, InnerBc, Mesh, SolverConfig, SolverStats};
use crate::error::{Error, Result};
use crate::quadrature::log_gauss_nodes;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialMesh {
    pub nodes: Vec<f64>,
    pub grading: f64,
    pub n: u32,
}

impl RadialMesh {
    /// `r_i = r_min + (R - r_min) (i/N)^g`.
    pub fn graded(r_min: f64, radius: f64, cells: usize, grading: f64, n: u32) -> Result<Self> {
        if !(r_min > 0.0 && radius > r_min) {
            return Err(Error::Parameter(format!("need 0 < r_min < R, got r_min = {r_min}, R = {radius}")));
        }
        if !(grading >= 1.0) {
            return Err(Error::Parameter(format!("grading {grading} must be >= 1")));
        }
        let nodes: Vec<f64> = (0..=cells)
            .map(|i| {
                if i == cells {
                    radius
                } else {
                    r_min + (radius - r_min) * (i as f64 / cells as f64).powf(grading)
                }
            })
            .collect();
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter("mesh nodes are not strictly increasing; reduce grading or cells".into()));
        }
        Ok(RadialMesh { nodes, grading, n })
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// A source with optional discontinuity radii, so that control-volume
/// integrals can be split there.
#[derive(Clone, Copy)]
pub struct Source<'a> {
    pub f: &'a (dyn Fn(f64) -> Result<f64> + Sync),
    pub breakpoints: &'a [f64],
}

#[derive(Clone, Copy)]
pub struct RadialProblem<'a> {
    pub n: u32,
    pub radius: f64,
    pub a1: &'a (dyn Fn(f64) -> f64 + Sync),
    pub source: Source<'a>,
    pub outer_value: f64,
    /// Required when the inner condition is Dirichlet.
    pub inner_value: Option<f64>,
}

fn log_gauss<G: FnMut(f64) -> Result<f64>>(mut g: G, a: f64, b: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (r, w) in log_gauss_nodes(a, b) {
        acc += w * g(r)?;
    }
    Ok(acc)
}

fn ellipticity(a: &(dyn Fn(f64) -> f64 + Sync), r: f64) -> Result<f64> {
    let v = a(r);
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Ellipticity { r, value: v });
    }
    Ok(v)
}

/// Solves `-(r^{n-1} a u')' = r^{n-1} f` on `[r_min, R]` with `u(R) =
/// outer_value` and the configured inner condition.
pub fn solve_radial(problem: &RadialProblem<'_>, config: &SolverConfig) -> Result<DiscreteSolution> {
    config.validate()?;
    let RadialProblem { n, radius, a1, source, outer_value, inner_value } = *problem;
    if n < 1 {
        return Err(Error::Parameter("dimension must be positive".into()));
    }
    if !(config.r_min <= radius / 10.0) {
        return Err(Error::Parameter(format!("r_min = {} must lie in (0, R/10]", config.r_min)));
    }
    let inner = match (config.inner_bc, inner_value) {
        (InnerBc::NoFlux, _) => None,
        (InnerBc::DirichletFromKernel, Some(v)) => Some(v),
        (InnerBc::DirichletFromKernel, None) => {
            return Err(Error::Parameter("Dirichlet inner condition needs an inner value".into()))
        }
    };
    let mesh = RadialMesh::graded(config.r_min, radius, config.cells, config.grading, n)?;
    let r = &mesh.nodes;
    let cells = mesh.cells();
    let n1 = n as i32 - 1;

    let mut trans = Vec::with_capacity(cells);
    for i in 0..cells {
        let resistance = log_gauss(|p| Ok(1.0 / (p.powi(n1) * ellipticity(a1, p)?)), r[i], r[i + 1])?;
        trans.push(1.0 / resistance);
    }

    let volume_source = |lo: f64, hi: f64| -> Result<f64> {
        let mut cuts = vec![lo];
        cuts.extend(source.breakpoints.iter().copied().filter(|&b| b > lo && b < hi));
        cuts.push(hi);
        let mut acc = 0.0;
        for w in cuts.windows(2) {
            acc += log_gauss(|p| Ok(p.powi(n1) * (source.f)(p)?), w[0], w[1])?;
        }
        Ok(acc)
    };

    let size = cells + 1;
    let (mut lower, mut diag, mut upper, mut rhs) = (vec![0.0; size], vec![0.0; size], vec![0.0; size], vec![0.0; size]);
    for i in 0..size {
        if i == cells {
            diag[i] = 1.0;
            rhs[i] = outer_value;
            continue;
        }
        if i == 0 {
            if let Some(g) = inner {
                diag[0] = 1.0;
                rhs[0] = g;
                continue;
            }
        }
        let lo = if i == 0 { r[0] } else { 0.5 * (r[i - 1] + r[i]) };
        let hi = 0.5 * (r[i] + r[i + 1]);
        rhs[i] = volume_source(lo, hi)?;
        if i > 0 {
            lower[i] = -trans[i - 1];
            diag[i] += trans[i - 1];
        }
        upper[i] = -trans[i];
        diag[i] += trans[i];
    }

    let values = thomas(&lower, &diag, &upper, &rhs)?;
    let relative_residual = backward_error(&lower, &diag, &upper, &rhs, &values);
    if !(relative_residual <= config.linear_tolerance) {
        return Err(Error::Solver(format!(
            "tridiagonal residual {relative_residual:e} exceeds tolerance {:e}",
            config.linear_tolerance
        )));
    }
    let boundary = match inner {
        Some(g) => [g.min(outer_value), g.max(outer_value)],
        None => [outer_value, outer_value],
    };
    Ok(DiscreteSolution {
        mesh: Mesh::Radial(mesh),
        values,
        solver_stats: SolverStats { iterations: 1, relative_residual, residual_history: Vec::new() },
        config_hash: config.digest(),
        boundary_range: boundary,
        linear_tolerance: config.linear_tolerance,
    })
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 0..n {
        let pivot = diag[i] - if i > 0 { lower[i] * c[i - 1] } else { 0.0 };
        if !(pivot.abs() > 0.0 && pivot.is_finite()) {
            return Err(Error::Solver(format!("zero or non-finite pivot {pivot} in row {i} of {n}")));
        }
        c[i] = upper[i] / pivot;
        d[i] = (rhs[i] - if i > 0 { lower[i] * d[i - 1] } else { 0.0 }) / pivot;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

/// Normwise backward error `‖b - Ax‖∞ / (‖A‖∞ ‖x‖∞ + ‖b‖∞)`.
fn backward_error(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64], x: &[f64]) -> f64 {
    let n = x.len();
    let mut res: f64 = 0.0;
    let mut a_norm: f64 = 0.0;
    for i in 0..n {
        let mut ax = diag[i] * x[i];
        if i > 0 {
            ax += lower[i] * x[i - 1];
        }
        if i + 1 < n {
            ax += upper[i] * x[i + 1];
        }
        res = res.max((rhs[i] - ax).abs());
        a_norm = a_norm.max(lower[i].abs() + diag[i].abs() + upper[i].abs());
    }
    let xn = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let bn = rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let denom = a_norm * xn + bn;
    if denom == 0.0 {
        0.0
    } else {
        res / denom
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(_: f64) -> f64 {
        1.0
    }

    fn poisson(n: u32, cells: usize, grading: f64) -> DiscreteSolution {
        let f = |_: f64| Ok(1.0);
        let p = RadialProblem {
            n,
            radius: 1.0,
            a1: &one,
            source: Source { f: &f, breakpoints: &[] },
            outer_value: 0.0,
            inner_value: None,
        };
        let cfg = SolverConfig { cells, grading, r_min: 1e-6, ..SolverConfig::default() };
        solve_radial(&p, &cfg).unwrap()
    }

    fn max_error(sol: &DiscreteSolution, n: u32) -> f64 {
        let Mesh::Radial(m) = &sol.mesh else { unreachable!() };
        m.nodes
            .iter()
            .zip(&sol.values)
            .map(|(r, v)| (v - (1.0 - r * r) / (2.0 * n as f64)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn poisson_sup_and_order() {
        let s = poisson(3, 2048, 3.0);
        assert!((s.max() - 1.0 / 6.0).abs() < 1e-5);
        let e: Vec<f64> = [256, 512, 1024].iter().map(|&c| max_error(&poisson(3, c, 3.0), 3)).collect();
        let order = (e[0] / e[2]).log2() / 2.0;
        assert!(order >= 1.9, "errors {e:?}");
    }

    #[test]
    fn constants_are_reproduced() {
        let f = |_: f64| Ok(0.0);
        let p = RadialProblem {
            n: 3,
            radius: 1.0,
            a1: &one,
            source: Source { f: &f, breakpoints: &[] },
            outer_value: 2.5,
            inner_value: None,
        };
        let s = solve_radial(&p, &SolverConfig::default()).unwrap();
        let dev = s.values.iter().map(|v| (v - 2.5).abs()).fold(0.0, f64::max);
        // Round-off through the elimination is of order N · eps.
        assert!(dev < 1e-11, "{dev}");
    }

    #[test]
    fn simultaneous_scaling_invariance() {
        let a = |r: f64| 1.0 + r;
        let a3 = |r: f64| 3.0 * (1.0 + r);
        let f = |r: f64| Ok(r.cos());
        let f3 = |r: f64| Ok(3.0 * r.cos());
        fn mk(a: &(dyn Fn(f64) -> f64 + Sync), f: &(dyn Fn(f64) -> Result<f64> + Sync)) -> DiscreteSolution {
            let p = RadialProblem {
                n: 2,
                radius: 0.5,
                a1: a,
                source: Source { f, breakpoints: &[] },
                outer_value: 0.0,
                inner_value: None,
            };
            solve_radial(&p, &SolverConfig { cells: 200, r_min: 1e-3, linear_tolerance: 1e-10, ..SolverConfig::default() })
                .unwrap()
        }
        let (s1, s3) = (mk(&a, &f), mk(&a3, &f3));
        let scale = s1.max();
        for (x, y) in s1.values.iter().zip(&s3.values) {
            assert!((x - y).abs() <= s1.linear_tolerance * scale, "{x} {y}");
        }
    }

    #[test]
    fn rejects_nonpositive_coefficient() {
        let bad = |r: f64| r - 0.5;
        let f = |_: f64| Ok(1.0);
        let p = RadialProblem {
            n: 3,
            radius: 1.0,
            a1: &bad,
            source: Source { f: &f, breakpoints: &[] },
            outer_value: 0.0,
            inner_value: None,
        };
        assert!(matches!(solve_radial(&p, &SolverConfig::default()), Err(Error::Ellipticity { .. })));
    }

    #[test]
    fn config_invariants() {
        let f = |_: f64| Ok(1.0);
        let p = RadialProblem {
            n: 3,
            radius: 1.0,
            a1: &one,
            source: Source { f: &f, breakpoints: &[] },
            outer_value: 0.0,
            inner_value: None,
        };
        for cfg in [
            SolverConfig { linear_tolerance: 1e-3, ..SolverConfig::default() },
            SolverConfig { r_min: 0.2, ..SolverConfig::default() },
            SolverConfig { grading: 0.5, ..SolverConfig::default() },
            SolverConfig { inner_bc: InnerBc::DirichletFromKernel, ..SolverConfig::default() },
        ] {
            assert!(solve_radial(&p, &cfg).is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn discontinuous_source_is_split() {
        // f = 1 on r < 0.3 and 0 outside, n = 1, a = 1.
        let f = |r: f64| Ok(if r < 0.3 { 1.0 } else { 0.0 });
        let p = RadialProblem {
            n: 1,
            radius: 1.0,
            a1: &one,
            source: Source { f: &f, breakpoints: &[0.3] },
            outer_value: 0.0,
            inner_value: None,
        };
        let s = solve_radial(&p, &SolverConfig { cells: 397, grading: 1.0, r_min: 1e-3, ..SolverConfig::default() }).unwrap();
        // u(r_min) = ∫_{r_min}^{1} (min(ρ,0.3) - r_min) dρ
        let rm: f64 = 1e-3;
        let exact = (0.3f64.powi(2) - rm * rm) / 2.0 - rm * (0.3 - rm) + (0.3 - rm) * 0.7;
        assert!((s.values[0] - exact).abs() < 1e-5, "{} vs {exact}", s.values[0]);
    }
}
