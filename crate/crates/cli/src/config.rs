//! Run configuration: command-line flags and `--config` files resolve to the
//! same [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nulab::counterexamples::{ExampleId, SourceForm};
use nulab::exponents::Exponent;
use nulab::solver::{InnerBc, SolverConfig};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Overrides the output directory from flags and config files.
pub const OUTPUT_DIR_ENV: &str = "NULAB_OUTPUT_DIR";

pub const DEFAULT_OUTPUT_DIR: &str = "nulab-out";

#[derive(Parser, Debug)]
#[command(name = "nulab", version, about = "Numerical laboratory for nonuniformly elliptic equations")]
pub struct Cli {
    /// JSON run configuration; when given it supersedes every other flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Output directory (overridden by NULAB_OUTPUT_DIR).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(flatten)]
    pub params: ParamsArgs,

    #[command(flatten)]
    pub solver: SolverArgs,

    #[command(flatten)]
    pub tolerances: Tolerances,

    #[command(subcommand)]
    pub command: Option<CliCommand>,
}

/// `(n, p, q, s, γ)`; each command documents which entries it reads.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsArgs {
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Exponent: integer, fraction `a/b`, decimal or `inf`.
    #[arg(long, global = true)]
    pub p: Option<Exponent>,
    #[arg(long, global = true)]
    pub q: Option<Exponent>,
    #[arg(long, global = true)]
    pub s: Option<Exponent>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverArgs {
    #[arg(long, global = true)]
    pub cells: Option<usize>,
    #[arg(long, global = true)]
    pub r_min: Option<f64>,
    #[arg(long, global = true)]
    pub grading: Option<f64>,
    #[arg(long, global = true)]
    pub linear_tolerance: Option<f64>,
    #[arg(long, global = true)]
    pub max_iterations: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub inner_bc: Option<InnerBcArg>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerBcArg {
    NoFlux,
    DirichletFromKernel,
}

impl SolverArgs {
    /// Applies the overrides on top of a command's defaults.
    pub fn apply(&self, base: SolverConfig) -> SolverConfig {
        SolverConfig {
            cells: self.cells.unwrap_or(base.cells),
            r_min: self.r_min.unwrap_or(base.r_min),
            grading: self.grading.unwrap_or(base.grading),
            linear_tolerance: self.linear_tolerance.unwrap_or(base.linear_tolerance),
            max_iterations: self.max_iterations.unwrap_or(base.max_iterations),
            inner_bc: match self.inner_bc {
                Some(InnerBcArg::NoFlux) => InnerBc::NoFlux,
                Some(InnerBcArg::DirichletFromKernel) => InnerBc::DirichletFromKernel,
                None => base.inner_bc,
            },
        }
    }
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance of radial quadratures and norm ladders.
    #[arg(long, global = true)]
    pub quadrature_tol: Option<f64>,
    /// Relative tolerance of kernel evaluations.
    #[arg(long, global = true)]
    pub kernel_tol: Option<f64>,
    /// Minimum fit quality (R²) reported as acceptable.
    #[arg(long, global = true)]
    pub fit_threshold: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum CliCommand {
    /// Derived exponents and regime classification.
    Exponents(ExponentsArgs),
    /// Integrability of a radial coefficient and Λ(B_R).
    Coefficients(CoefficientsArgs),
    /// Kernel integrals K_m(|x|).
    Kernel(KernelArgs),
    /// Radial power-log integrals or nested source norms.
    Norm(NormArgs),
    /// Discrete solve of -div(a ∇u) = f.
    Solve(SolveArgs),
    /// Explicit unbounded solutions.
    #[command(subcommand)]
    Example(ExampleCommand),
    /// Empirical checks of the regularity estimates.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Runs a bundle of commands into one manifest.
    Report(ReportArgs),
}

#[derive(Subcommand, Debug)]
pub enum ExampleCommand {
    /// u, u' and f at given radii.
    Eval(EvalArgs),
    /// Strong-form residual of the (u, f) pair.
    Residual(ResidualArgs),
    /// u(2^-k) growth and log-log fit.
    Blowup(BlowupArgs),
    /// L^s membership of the source along a cutoff ladder.
    Membership(MembershipArgs),
    /// Source values on dyadic radii with refinement.
    Sweep(SweepArgs),
}

#[derive(Subcommand, Debug)]
pub enum VerifyCommand {
    SupBound(SupBoundArgs),
    Harnack(HarnackArgs),
    Holder(HolderArgs),
    MoserChain(MoserArgs),
    LogBound(LogBoundArgs),
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExponentsArgs {
    /// Use floating arithmetic even for rational inputs.
    #[arg(long)]
    pub float: bool,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoefficientsArgs {
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Ball radius R of the norms; default 1/4.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Constant factor c in c r^β L^θ.
    #[arg(long)]
    pub scale: Option<f64>,
    /// Sample radii written to the CSV.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelArgs {
    /// Kernel powers; default 1,2,3.
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<u8>,
    /// Evaluation radii |x|.
    #[arg(long, value_delimiter = ',')]
    pub x: Vec<f64>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExampleArgs {
    /// EX1, EX2, EX3 or BORDERLINE.
    #[arg(long)]
    pub id: Option<ExampleId>,
    /// Coefficient log power for EX3 (outside the displayed construction).
    #[arg(long)]
    pub example_theta: Option<f64>,
    /// verbatim or consistent.
    #[arg(long)]
    pub form: Option<SourceForm>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormArgs {
    /// r-exponent a of ∫ r^a (log 1/r)^b dr.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Log exponent b.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Upper limit; default 1/2 for power-log integrals, 1/4 for sources.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Innermost cutoff of the source ladder.
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[command(flatten)]
    pub example: ExampleArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveCase {
    /// a ≡ 1 with a constant source.
    Poisson,
    /// a = c r^β L^θ with a constant source.
    Coefficient,
    /// An explicit example with its consistent source.
    Example,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub case: Option<SolveCase>,
    /// 1 (radial) or 2 (square).
    #[arg(long)]
    pub dim: Option<u8>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Constant source value.
    #[arg(long, allow_hyphen_values = true)]
    pub source: Option<f64>,
    /// Dirichlet value on the outer boundary.
    #[arg(long, allow_hyphen_values = true)]
    pub outer: Option<f64>,
    #[command(flatten)]
    pub example: ExampleArgs,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalArgs {
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<f64>,
    #[command(flatten)]
    pub example: ExampleArgs,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResidualArgs {
    #[arg(long)]
    pub r_lo: Option<f64>,
    #[arg(long)]
    pub r_hi: Option<f64>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub diff_step: Option<f64>,
    #[command(flatten)]
    pub example: ExampleArgs,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlowupArgs {
    #[arg(long)]
    pub kmax: Option<u32>,
    #[arg(long)]
    pub fit_from: Option<u32>,
    #[arg(long)]
    pub fit_to: Option<u32>,
    #[command(flatten)]
    pub example: ExampleArgs,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MembershipArgs {
    /// Exponents s to test; default s0 and 1.2 s0.
    #[arg(long, value_delimiter = ',')]
    pub s_list: Vec<f64>,
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[command(flatten)]
    pub example: ExampleArgs,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepArgs {
    #[arg(long)]
    pub kmax: Option<u32>,
    /// Sub-dyadic refinement levels.
    #[arg(long)]
    pub refine: Option<u32>,
    #[command(flatten)]
    pub example: ExampleArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileCase {
    /// Discrete solve of -Δu = 1 on B_1, u = 0 on the boundary.
    Smooth,
    /// The explicit example solution.
    Example,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SupBoundArgs {
    /// smooth: a ≡ 1, f ≡ 1 on three meshes; example: truncated sources.
    #[arg(long, value_enum)]
    pub case: Option<ProfileCase>,
    #[arg(long)]
    pub radius: Option<f64>,
    /// Ball fraction θ of B_{θR}.
    #[arg(long)]
    pub ball_fraction: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub resolutions: Vec<usize>,
    /// Truncation levels k of 1{r > 2^-k}.
    #[arg(long, value_delimiter = ',')]
    pub ks: Vec<u32>,
    #[command(flatten)]
    pub example: ExampleArgs,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnackArgs {
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub betas: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub thetas: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub resolutions: Vec<usize>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolderArgs {
    #[arg(long, value_enum)]
    pub case: Option<ProfileCase>,
    /// Distance of the ball centre from the origin.
    #[arg(long)]
    pub center: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[command(flatten)]
    pub example: ExampleArgs,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MoserArgs {
    #[arg(long, value_enum)]
    pub case: Option<ProfileCase>,
    #[arg(long)]
    pub gamma0: Option<f64>,
    /// Chain length M.
    #[arg(long)]
    pub length: Option<usize>,
    #[command(flatten)]
    pub example: ExampleArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyCoefficient {
    Uniform,
    Example,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogBoundArgs {
    #[arg(long, value_enum)]
    pub coefficient: Option<FamilyCoefficient>,
    /// Plateau levels M.
    #[arg(long, value_delimiter = ',')]
    pub ms: Vec<f64>,
    /// Plateau radius c of 1{r < c/M}.
    #[arg(long)]
    pub plateau_radius: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[command(flatten)]
    pub example: ExampleArgs,
}

/// `runs` is only settable from a config file; empty means the default suite.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportArgs {
    #[arg(skip)]
    pub runs: Vec<RunConfig>,
}

/// A fully parsed command.
#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Exponents(ExponentsArgs),
    Coefficients(CoefficientsArgs),
    Kernel(KernelArgs),
    Norm(NormArgs),
    Solve(SolveArgs),
    ExampleEval(EvalArgs),
    ExampleResidual(ResidualArgs),
    ExampleBlowup(BlowupArgs),
    ExampleMembership(MembershipArgs),
    ExampleSweep(SweepArgs),
    VerifySupBound(SupBoundArgs),
    VerifyHarnack(HarnackArgs),
    VerifyHolder(HolderArgs),
    VerifyMoserChain(MoserArgs),
    VerifyLogBound(LogBoundArgs),
    Report(ReportArgs),
}

impl From<CliCommand> for Command {
    fn from(c: CliCommand) -> Self {
        match c {
            CliCommand::Exponents(a) => Command::Exponents(a),
            CliCommand::Coefficients(a) => Command::Coefficients(a),
            CliCommand::Kernel(a) => Command::Kernel(a),
            CliCommand::Norm(a) => Command::Norm(a),
            CliCommand::Solve(a) => Command::Solve(a),
            CliCommand::Example(ExampleCommand::Eval(a)) => Command::ExampleEval(a),
            CliCommand::Example(ExampleCommand::Residual(a)) => Command::ExampleResidual(a),
            CliCommand::Example(ExampleCommand::Blowup(a)) => Command::ExampleBlowup(a),
            CliCommand::Example(ExampleCommand::Membership(a)) => Command::ExampleMembership(a),
            CliCommand::Example(ExampleCommand::Sweep(a)) => Command::ExampleSweep(a),
            CliCommand::Verify(VerifyCommand::SupBound(a)) => Command::VerifySupBound(a),
            CliCommand::Verify(VerifyCommand::Harnack(a)) => Command::VerifyHarnack(a),
            CliCommand::Verify(VerifyCommand::Holder(a)) => Command::VerifyHolder(a),
            CliCommand::Verify(VerifyCommand::MoserChain(a)) => Command::VerifyMoserChain(a),
            CliCommand::Verify(VerifyCommand::LogBound(a)) => Command::VerifyLogBound(a),
            CliCommand::Report(a) => Command::Report(a),
        }
    }
}

fn parse_args<T: for<'de> Deserialize<'de>>(v: serde_json::Value) -> Result<T, String> {
    serde_json::from_value(v).map_err(|e| format!("args: {e}"))
}

impl Command {
    /// Command name as written on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Command::Exponents(_) => "exponents",
            Command::Coefficients(_) => "coefficients",
            Command::Kernel(_) => "kernel",
            Command::Norm(_) => "norm",
            Command::Solve(_) => "solve",
            Command::ExampleEval(_) => "example eval",
            Command::ExampleResidual(_) => "example residual",
            Command::ExampleBlowup(_) => "example blowup",
            Command::ExampleMembership(_) => "example membership",
            Command::ExampleSweep(_) => "example sweep",
            Command::VerifySupBound(_) => "verify sup-bound",
            Command::VerifyHarnack(_) => "verify harnack",
            Command::VerifyHolder(_) => "verify holder",
            Command::VerifyMoserChain(_) => "verify moser-chain",
            Command::VerifyLogBound(_) => "verify log-bound",
            Command::Report(_) => "report",
        }
    }

    pub fn args_value(&self) -> serde_json::Value {
        let v = match self {
            Command::Exponents(a) => serde_json::to_value(a),
            Command::Coefficients(a) => serde_json::to_value(a),
            Command::Kernel(a) => serde_json::to_value(a),
            Command::Norm(a) => serde_json::to_value(a),
            Command::Solve(a) => serde_json::to_value(a),
            Command::ExampleEval(a) => serde_json::to_value(a),
            Command::ExampleResidual(a) => serde_json::to_value(a),
            Command::ExampleBlowup(a) => serde_json::to_value(a),
            Command::ExampleMembership(a) => serde_json::to_value(a),
            Command::ExampleSweep(a) => serde_json::to_value(a),
            Command::VerifySupBound(a) => serde_json::to_value(a),
            Command::VerifyHarnack(a) => serde_json::to_value(a),
            Command::VerifyHolder(a) => serde_json::to_value(a),
            Command::VerifyMoserChain(a) => serde_json::to_value(a),
            Command::VerifyLogBound(a) => serde_json::to_value(a),
            Command::Report(a) => serde_json::to_value(a),
        };
        v.expect("argument structs serialize")
    }

    pub fn from_parts(name: &str, args: serde_json::Value) -> Result<Self, String> {
        let args = if args.is_null() { serde_json::Value::Object(Default::default()) } else { args };
        Ok(match name {
            "exponents" => Command::Exponents(parse_args(args)?),
            "coefficients" => Command::Coefficients(parse_args(args)?),
            "kernel" => Command::Kernel(parse_args(args)?),
            "norm" => Command::Norm(parse_args(args)?),
            "solve" => Command::Solve(parse_args(args)?),
            "example eval" => Command::ExampleEval(parse_args(args)?),
            "example residual" => Command::ExampleResidual(parse_args(args)?),
            "example blowup" => Command::ExampleBlowup(parse_args(args)?),
            "example membership" => Command::ExampleMembership(parse_args(args)?),
            "example sweep" => Command::ExampleSweep(parse_args(args)?),
            "verify sup-bound" => Command::VerifySupBound(parse_args(args)?),
            "verify harnack" => Command::VerifyHarnack(parse_args(args)?),
            "verify holder" => Command::VerifyHolder(parse_args(args)?),
            "verify moser-chain" => Command::VerifyMoserChain(parse_args(args)?),
            "verify log-bound" => Command::VerifyLogBound(parse_args(args)?),
            "report" => Command::Report(parse_args(args)?),
            other => return Err(format!("command: unknown command {other:?}")),
        })
    }
}

/// Serialized form of a run; the digest of this value identifies the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub command: String,
    #[serde(default)]
    pub args: serde_json::Value,
    #[serde(default)]
    pub params: ParamsArgs,
    #[serde(default)]
    pub solver: SolverArgs,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

/// A validated run.
#[derive(Clone, Debug, PartialEq)]
pub struct Run {
    pub command: Command,
    pub params: ParamsArgs,
    pub solver: SolverArgs,
    pub tolerances: Tolerances,
    pub seed: u64,
}

impl Run {
    /// The canonical config: output location is not part of the identity.
    pub fn to_config(&self) -> RunConfig {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            command: self.command.name().to_string(),
            args: self.command.args_value(),
            params: self.params.clone(),
            solver: self.solver.clone(),
            tolerances: self.tolerances.clone(),
            output_dir: None,
            seed: self.seed,
        }
    }

    pub fn digest(&self) -> String {
        nulab::digest::json_digest(&self.to_config())
    }
}

impl RunConfig {
    /// Schema checks; every problem is reported, one per line.
    pub fn validate(&self) -> Result<Run, Vec<String>> {
        let mut errors = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            errors.push(format!(
                "schema_version: expected {SCHEMA_VERSION}, found {}",
                self.schema_version
            ));
        }
        let command = Command::from_parts(&self.command, self.args.clone()).map_err(|e| errors.push(e)).ok();
        let run = command.map(|command| Run {
            command,
            params: self.params.clone(),
            solver: self.solver.clone(),
            tolerances: self.tolerances.clone(),
            seed: self.seed,
        });
        if let Some(run) = &run {
            errors.extend(validate_run(run));
        }
        match run {
            Some(run) if errors.is_empty() => Ok(run),
            _ => Err(errors),
        }
    }
}

fn positive(errors: &mut Vec<String>, name: &str, v: Option<f64>) {
    if let Some(x) = v {
        if !(x > 0.0 && x.is_finite()) {
            errors.push(format!("{name}: must be positive and finite, got {x}"));
        }
    }
}

/// Field-level checks that do not need any computation.
pub fn validate_run(run: &Run) -> Vec<String> {
    let mut e = Vec::new();
    let p = &run.params;
    if let Some(n) = p.n {
        if n < 2 {
            e.push(format!("params.n: must be at least 2, got {n}"));
        }
    }
    positive(&mut e, "params.gamma", p.gamma);
    let s = &run.solver;
    if let Some(c) = s.cells {
        if c < 2 {
            e.push(format!("solver.cells: must be at least 2, got {c}"));
        }
    }
    positive(&mut e, "solver.r_min", s.r_min);
    if let Some(g) = s.grading {
        if !(g >= 1.0 && g.is_finite()) {
            e.push(format!("solver.grading: must be >= 1, got {g}"));
        }
    }
    if let Some(t) = s.linear_tolerance {
        if !(t > 0.0 && t <= 1e-4) {
            e.push(format!("solver.linear_tolerance: must lie in (0, 1e-4], got {t}"));
        }
    }
    let t = &run.tolerances;
    for (name, v) in [("tolerances.quadrature_tol", t.quadrature_tol), ("tolerances.kernel_tol", t.kernel_tol)] {
        if let Some(x) = v {
            if !(x > 0.0 && x < 1.0) {
                e.push(format!("{name}: must lie in (0, 1), got {x}"));
            }
        }
    }
    if let Some(x) = t.fit_threshold {
        if !(0.0..=1.0).contains(&x) {
            e.push(format!("tolerances.fit_threshold: must lie in [0, 1], got {x}"));
        }
    }
    let need_example = |e: &mut Vec<String>, ex: &ExampleArgs| {
        if ex.id.is_none() {
            e.push(format!("args.example.id: required by '{}'", run.command.name()));
        }
        if p.n.is_none() {
            e.push(format!("params.n: required by '{}'", run.command.name()));
        }
    };
    let need = |e: &mut Vec<String>, field: &str, ok: bool| {
        if !ok {
            e.push(format!("{field}: required by '{}'", run.command.name()));
        }
    };
    match &run.command {
        Command::Exponents(_) => {
            need(&mut e, "params.n", p.n.is_some());
            need(&mut e, "params.p", p.p.is_some());
            need(&mut e, "params.q", p.q.is_some());
            need(&mut e, "params.s", p.s.is_some());
        }
        Command::Coefficients(a) => {
            need(&mut e, "args.beta", a.beta.is_some());
            need(&mut e, "args.theta", a.theta.is_some());
            positive(&mut e, "args.radius", a.radius);
            positive(&mut e, "args.scale", a.scale);
        }
        Command::Kernel(a) => {
            need(&mut e, "args.x", !a.x.is_empty());
            if let Some(m) = a.m.iter().find(|m| !(1..=3).contains(*m)) {
                e.push(format!("args.m: kernel powers are 1, 2 or 3, got {m}"));
            }
        }
        Command::Norm(a) => {
            let power = a.a.is_some() || a.b.is_some();
            if power && a.example.id.is_some() {
                e.push("args: give either a/b or an example id, not both".into());
            }
            if power {
                need(&mut e, "args.a", a.a.is_some());
                need(&mut e, "args.b", a.b.is_some());
            } else {
                need(&mut e, "args.id (or args.a, args.b)", a.example.id.is_some());
                need(&mut e, "params.s", p.s.is_some());
            }
            positive(&mut e, "args.radius", a.radius);
            positive(&mut e, "args.cutoff", a.cutoff);
        }
        Command::Solve(a) => {
            if let Some(d) = a.dim {
                if d != 1 && d != 2 {
                    e.push(format!("args.dim: must be 1 or 2, got {d}"));
                }
            }
            match a.case.unwrap_or(SolveCase::Poisson) {
                SolveCase::Coefficient => {
                    need(&mut e, "args.beta", a.beta.is_some());
                    need(&mut e, "args.theta", a.theta.is_some());
                }
                SolveCase::Example => need(&mut e, "args.id", a.example.id.is_some()),
                SolveCase::Poisson => {}
            }
            positive(&mut e, "args.radius", a.radius);
        }
        Command::ExampleEval(a) => {
            need_example(&mut e, &a.example);
            need(&mut e, "args.r", !a.r.is_empty());
            if a.r.iter().any(|r| !(*r > 0.0)) {
                e.push("args.r: radii must be positive".into());
            }
        }
        Command::ExampleResidual(a) => {
            need_example(&mut e, &a.example);
            positive(&mut e, "args.r_lo", a.r_lo);
            positive(&mut e, "args.r_hi", a.r_hi);
            positive(&mut e, "args.diff_step", a.diff_step);
        }
        Command::ExampleMembership(a) => {
            need_example(&mut e, &a.example);
            positive(&mut e, "args.cutoff", a.cutoff);
            if a.s_list.iter().any(|s| !(*s >= 1.0)) {
                e.push("args.s_list: exponents must be >= 1".into());
            }
        }
        Command::VerifySupBound(a) => {
            positive(&mut e, "args.radius", a.radius);
            if let Some(t) = a.ball_fraction {
                if !(t > 0.0 && t < 1.0) {
                    e.push(format!("args.ball_fraction: must lie in (0, 1), got {t}"));
                }
            }
        }
        Command::VerifyHarnack(a) => positive(&mut e, "args.radius", a.radius),
        Command::VerifyHolder(a) => {
            positive(&mut e, "args.radius", a.radius);
            if let Some(c) = a.center {
                if !(c >= 0.0) {
                    e.push(format!("args.center: must be nonnegative, got {c}"));
                }
            }
        }
        Command::VerifyMoserChain(a) => positive(&mut e, "args.gamma0", a.gamma0),
        Command::VerifyLogBound(a) => {
            positive(&mut e, "args.plateau_radius", a.plateau_radius);
            positive(&mut e, "args.radius", a.radius);
        }
        Command::Report(a) => {
            for (i, r) in a.runs.iter().enumerate() {
                if r.command == "report" {
                    e.push(format!("args.runs[{i}]: reports cannot nest"));
                    continue;
                }
                if let Err(errs) = r.validate() {
                    e.extend(errs.into_iter().map(|m| format!("args.runs[{i}].{m}")));
                }
            }
        }
        Command::ExampleBlowup(a) => need_example(&mut e, &a.example),
        Command::ExampleSweep(a) => need_example(&mut e, &a.example),
    }
    e
}

/// The output directory: environment first, then the config file, then `--out`.
pub fn output_dir(config_dir: Option<PathBuf>, flag: Option<PathBuf>) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .or(config_dir)
        .or(flag)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

impl Cli {
    /// Resolves flags or the config file into a config plus its output location.
    pub fn into_config(self) -> Result<(RunConfig, PathBuf), Vec<String>> {
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| vec![format!("config: cannot read {}: {e}", path.display())])?;
            let cfg: RunConfig =
                serde_json::from_str(&text).map_err(|e| vec![format!("config: {}: {e}", path.display())])?;
            let dir = output_dir(cfg.output_dir.clone(), self.out);
            return Ok((cfg, dir));
        }
        let Some(command) = self.command else {
            return Err(vec!["command: a subcommand or --config is required".into()]);
        };
        let command = Command::from(command);
        let cfg = RunConfig {
            schema_version: SCHEMA_VERSION,
            command: command.name().to_string(),
            args: command.args_value(),
            params: self.params,
            solver: self.solver,
            tolerances: self.tolerances,
            output_dir: None,
            seed: self.seed,
        };
        Ok((cfg, output_dir(None, self.out)))
    }
}
