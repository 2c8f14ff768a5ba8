//! Discrete solvers for `-div(a ∇u) = f` with a scalar (diagonal) coefficient.
//!
//! * [`solve_radial`]: conservative vertex-centred finite volumes for
//!   `-(r^{n-1} a u')' = r^{n-1} f` on a graded mesh of `[r_min, R]`.
//! * [`solve_2d_diagonal`]: cell-centred five-point scheme on a square with
//!   harmonic face coefficients, solved by Jacobi-preconditioned CG.

mod planar;
mod radial;

pub use planar::{solve_2d_diagonal, Grid2D, SquareDomain};
pub use radial::{solve_radial, RadialMesh, RadialProblem, Source};

use serde::{Deserialize, Serialize};

use crate::digest::json_digest;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InnerBc {
    NoFlux,
    /// Dirichlet value at `r_min` supplied by the caller, taken from the
    /// explicit solution for counterexample runs.
    DirichletFromKernel,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Radial cells, or cells per side in 2-D.
    pub cells: usize,
    pub r_min: f64,
    pub grading: f64,
    pub linear_tolerance: f64,
    pub max_iterations: usize,
    pub inner_bc: InnerBc,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            cells: 512,
            r_min: 1e-6,
            grading: 3.0,
            linear_tolerance: 1e-12,
            max_iterations: 20_000,
            inner_bc: InnerBc::NoFlux,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.linear_tolerance > 0.0 && self.linear_tolerance <= 1e-4) {
            return Err(Error::Parameter(format!(
                "linear_tolerance = {} must lie in (0, 1e-4]",
                self.linear_tolerance
            )));
        }
        if !(self.grading >= 1.0 && self.grading.is_finite()) {
            return Err(Error::Parameter(format!("grading = {} must be >= 1", self.grading)));
        }
        if self.cells < 2 {
            return Err(Error::Parameter("at least two cells are required".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Parameter("max_iterations must be positive".into()));
        }
        if !(self.r_min > 0.0) {
            return Err(Error::Parameter(format!("r_min = {} must be positive", self.r_min)));
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        json_digest(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverStats {
    pub iterations: usize,
    /// `‖b - A u‖₂ / ‖b‖₂` of the assembled system.
    pub relative_residual: f64,
    /// Relative residual after each CG iteration (2-D only).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub residual_history: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mesh {
    Radial(RadialMesh),
    Grid(Grid2D),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteSolution {
    pub mesh: Mesh,
    /// Nodal values (radial) or cell values in row-major order (2-D).
    pub values: Vec<f64>,
    pub solver_stats: SolverStats,
    pub config_hash: String,
    /// Range of the Dirichlet data.
    pub boundary_range: [f64; 2],
    pub linear_tolerance: f64,
}

impl DiscreteSolution {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Position of every value: `[r, 0]` for radial nodes, cell centres in 2-D.
    pub fn points(&self) -> Vec<[f64; 2]> {
        match &self.mesh {
            Mesh::Radial(m) => m.nodes.iter().map(|&r| [r, 0.0]).collect(),
            Mesh::Grid(g) => (0..g.n * g.n).map(|k| g.center(k % g.n, k / g.n)).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceSign {
    NonNegative,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxPrincipleReport {
    pub holds: bool,
    pub min_value: f64,
    pub max_value: f64,
    pub threshold: f64,
    /// Points where the bound fails.
    pub violations: Vec<[f64; 2]>,
}

/// Discrete maximum principle: for `f >= 0` with nonnegative data the minimum
/// stays above `-tol · scale`; for `f = 0` the values stay inside the data range.
pub fn max_principle_check(sol: &DiscreteSolution, f_sign: SourceSign) -> MaxPrincipleReport {
    let scale = sol.values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let slack = sol.linear_tolerance * scale;
    let [bmin, bmax] = sol.boundary_range;
    let (lo, hi) = match f_sign {
        SourceSign::NonNegative => (bmin.min(0.0) - slack, f64::INFINITY),
        SourceSign::Zero => (bmin - slack, bmax + slack),
    };
    let violations: Vec<[f64; 2]> = sol
        .points()
        .into_iter()
        .zip(&sol.values)
        .filter(|(_, &v)| v < lo || v > hi)
        .map(|(p, _)| p)
        .collect();
    MaxPrincipleReport {
        holds: violations.is_empty(),
        min_value: sol.min(),
        max_value: sol.max(),
        threshold: lo,
        violations,
    }
}
