//! Cell-centred five-point scheme on a square.
//!
//! Interior faces carry the harmonic mean of the two cell coefficients;
//! boundary faces couple the cell to the Dirichlet value at the face midpoint
//! over half a cell. The operator is applied matrix-free.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DiscreteSolution, Mesh, SolverConfig, SolverStats};
use crate::error::{Error, Result};

/// Reductions run over fixed chunks so that sums are order-stable.
const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareDomain {
    pub center: [f64; 2],
    pub half_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid2D {
    pub domain: SquareDomain,
    /// Cells per side.
    pub n: usize,
    pub h: f64,
}

impl Grid2D {
    pub fn center(&self, i: usize, j: usize) -> [f64; 2] {
        let [cx, cy] = self.domain.center;
        let l = self.domain.half_width;
        [cx - l + (i as f64 + 0.5) * self.h, cy - l + (j as f64 + 0.5) * self.h]
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }
}

struct Operator {
    n: usize,
    /// Face between `(i, j)` and `(i+1, j)`, indexed `j (n-1) + i`.
    tx: Vec<f64>,
    /// Face between `(i, j)` and `(i, j+1)`, indexed `j n + i`.
    ty: Vec<f64>,
    diag: Vec<f64>,
}

impl Operator {
    fn apply_row(&self, k: usize, u: &[f64]) -> f64 {
        let n = self.n;
        let (i, j) = (k % n, k / n);
        let mut v = self.diag[k] * u[k];
        if i > 0 {
            v -= self.tx[j * (n - 1) + i - 1] * u[k - 1];
        }
        if i + 1 < n {
            v -= self.tx[j * (n - 1) + i] * u[k + 1];
        }
        if j > 0 {
            v -= self.ty[(j - 1) * n + i] * u[k - n];
        }
        if j + 1 < n {
            v -= self.ty[j * n + i] * u[k + n];
        }
        v
    }

    fn apply(&self, u: &[f64], out: &mut [f64]) {
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            for (o, slot) in chunk.iter_mut().enumerate() {
                *slot = self.apply_row(c * CHUNK + o, u);
            }
        });
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let parts: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum())
        .collect();
    parts.iter().sum()
}

fn harmonic(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

/// Solves `-div(a ∇u) = f` on the square with `u = bc` on its boundary.
pub fn solve_2d_diagonal(
    a1: &(dyn Fn([f64; 2]) -> f64 + Sync),
    f: &(dyn Fn([f64; 2]) -> Result<f64> + Sync),
    domain: SquareDomain,
    bc: &(dyn Fn([f64; 2]) -> f64 + Sync),
    config: &SolverConfig,
) -> Result<DiscreteSolution> {
    config.validate()?;
    let n = config.cells;
    if n < 16 {
        return Err(Error::Parameter(format!("grid resolution {n} must be at least 16")));
    }
    if !(domain.half_width > 0.0) {
        return Err(Error::Parameter("square half width must be positive".into()));
    }
    let grid = Grid2D { domain, n, h: 2.0 * domain.half_width / n as f64 };
    let size = n * n;

    let coef: Vec<f64> = (0..size)
        .into_par_iter()
        .map(|k| {
            let p = grid.center(k % n, k / n);
            let v = a1(p);
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Ellipticity { r: (p[0] * p[0] + p[1] * p[1]).sqrt(), value: v })
            }
        })
        .collect::<Result<_>>()?;

    let mut tx = vec![0.0; n * (n - 1)];
    let mut ty = vec![0.0; n * (n - 1)];
    for j in 0..n {
        for i in 0..n - 1 {
            tx[j * (n - 1) + i] = harmonic(coef[grid.index(i, j)], coef[grid.index(i + 1, j)]);
        }
    }
    for j in 0..n - 1 {
        for i in 0..n {
            ty[j * n + i] = harmonic(coef[grid.index(i, j)], coef[grid.index(i, j + 1)]);
        }
    }

    let h = grid.h;
    let mut diag = vec![0.0; size];
    let mut rhs: Vec<f64> = (0..size)
        .into_par_iter()
        .map(|k| Ok(h * h * f(grid.center(k % n, k / n))?))
        .collect::<Result<_>>()?;
    let (mut bmin, mut bmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..n {
        for i in 0..n {
            let k = grid.index(i, j);
            let [x, y] = grid.center(i, j);
            let mut d = 0.0;
            if i > 0 {
                d += tx[j * (n - 1) + i - 1];
            }
            if i + 1 < n {
                d += tx[j * (n - 1) + i];
            }
            if j > 0 {
                d += ty[(j - 1) * n + i];
            }
            if j + 1 < n {
                d += ty[j * n + i];
            }
            let mut boundary = |p: [f64; 2]| {
                let g = bc(p);
                bmin = bmin.min(g);
                bmax = bmax.max(g);
                let t = 2.0 * coef[k];
                d += t;
                rhs[k] += t * g;
            };
            if i == 0 {
                boundary([x - 0.5 * h, y]);
            }
            if i + 1 == n {
                boundary([x + 0.5 * h, y]);
            }
            if j == 0 {
                boundary([x, y - 0.5 * h]);
            }
            if j + 1 == n {
                boundary([x, y + 0.5 * h]);
            }
            diag[k] = d;
        }
    }
    let op = Operator { n, tx, ty, diag };
    let (values, iterations, history) = pcg(&op, &rhs, config)?;
    Ok(DiscreteSolution {
        mesh: Mesh::Grid(grid),
        values,
        solver_stats: SolverStats {
            iterations,
            relative_residual: *history.last().unwrap_or(&0.0),
            residual_history: history,
        },
        config_hash: config.digest(),
        boundary_range: [bmin, bmax],
        linear_tolerance: config.linear_tolerance,
    })
}

fn pcg(op: &Operator, b: &[f64], config: &SolverConfig) -> Result<(Vec<f64>, usize, Vec<f64>)> {
    let size = b.len();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return Ok((vec![0.0; size], 0, vec![0.0]));
    }
    let mut x = vec![0.0; size];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&op.diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; size];
    let mut rz = dot(&r, &z);
    let mut history = Vec::new();
    for it in 1..=config.max_iterations {
        op.apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        x.par_iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.par_iter_mut().zip(&ap).for_each(|(ri, ai)| *ri -= alpha * ai);
        let rel = dot(&r, &r).sqrt() / bnorm;
        history.push(rel);
        if rel <= config.linear_tolerance {
            // Report the true residual of the returned iterate.
            op.apply(&x, &mut ap);
            let true_r: Vec<f64> = b.iter().zip(&ap).map(|(bi, ai)| bi - ai).collect();
            let true_rel = dot(&true_r, &true_r).sqrt() / bnorm;
            history.push(true_rel);
            return Ok((x, it, history));
        }
        z.par_iter_mut().zip(&r).zip(&op.diag).for_each(|((zi, ri), d)| *zi = ri / d);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    let tail: Vec<String> = history.iter().rev().take(5).map(|v| format!("{v:.3e}")).collect();
    Err(Error::Solver(format!(
        "conjugate gradients stagnated after {} iterations; last residuals {}",
        config.max_iterations,
        tail.join(", ")
    )))
}
