//! `dpskit`: separability queries, block tables, copositive tests, PPT²
//! experiments and SDPA export from the command line.
//!
//! Machine-readable results go to standard output (JSON or CSV); one-line
//! summaries go to standard error. [`run`] returns the process exit code.

pub mod input;

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hermitian_core::par::Exec;
use hermitian_core::HermitianMatrix;
use patterns::{block_size_table, format_seq, moment_block_layout, tensor_block_layout, write_table_csv, Regime};
use relax::{build, check_membership, compile, lower, Formalism, Hierarchy, MembershipReport, ModelOptions};
use sdp::{SolveOptions, Verdict};
use serde::Serialize;

use input::Family;

pub const EXIT_FEASIBLE: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_MARGINAL: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dpskit", version, about = "DPS hierarchy toolkit for structured bipartite states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tests membership of a state in DPS^(t); exit code 0/1/2 for feasible/infeasible/marginal.
    Check(CheckArgs),
    /// Prints the moment block layout (or tensor cliques) for one (n, t).
    Blocks(BlocksArgs),
    /// Moment block sizes with multiplicities, as CSV.
    Tables(TablesArgs),
    /// Copositive cone tests.
    #[command(subcommand)]
    Cop(CopCommand),
    /// PPT² experiments.
    #[command(subcommand)]
    Ppt2(Ppt2Command),
    /// Writes the SDPA file of a membership problem.
    Export(ExportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum HierarchyArg {
    Dps,
    Bose,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormalismArg {
    Moment,
    Tensor,
}

impl From<HierarchyArg> for Hierarchy {
    fn from(h: HierarchyArg) -> Self {
        match h {
            HierarchyArg::Dps => Hierarchy::Dps,
            HierarchyArg::Bose => Hierarchy::Bose,
        }
    }
}

impl From<FormalismArg> for Formalism {
    fn from(f: FormalismArg) -> Self {
        match f {
            FormalismArg::Moment => Formalism::Moment,
            FormalismArg::Tensor => Formalism::Tensor,
        }
    }
}

fn parse_regime(s: &str) -> Result<Regime, String> {
    s.parse().map_err(|e: patterns::PatternError| e.to_string())
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct StateSource {
    /// JSON file with a Hermitian matrix or a triple.
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// rho_aap:a,a' | rho_ab:a,b | dicke:n,i,j (1-based indices).
    #[arg(long)]
    pub family: Option<Family>,
}

impl StateSource {
    pub fn load(&self) -> Result<HermitianMatrix> {
        match (&self.state, &self.family) {
            (Some(p), _) => input::read_state(p),
            (None, Some(f)) => Ok(f.state()),
            (None, None) => bail!("one of --state or --family is required"),
        }
    }

    fn describe(&self) -> String {
        match (&self.state, &self.family) {
            (Some(p), _) => p.display().to_string(),
            (None, Some(f)) => f.to_string(),
            (None, None) => String::new(),
        }
    }
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    #[command(flatten)]
    pub source: StateSource,
    /// Hierarchy level.
    #[arg(long, default_value_t = 1)]
    pub t: usize,
    #[arg(long, default_value = "generic", value_parser = parse_regime)]
    pub regime: Regime,
    #[arg(long, value_enum, default_value_t = HierarchyArg::Dps)]
    pub hierarchy: HierarchyArg,
    #[arg(long, value_enum, default_value_t = FormalismArg::Moment)]
    pub formalism: FormalismArg,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
}

#[derive(Debug, Args)]
pub struct BlocksArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub t: usize,
    #[arg(long, default_value = "generic", value_parser = parse_regime)]
    pub regime: Regime,
    /// Show tensor cliques of the certificate with `s` transposed B-registers instead.
    #[arg(long)]
    pub tensor_s: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    /// `3-5` or `3,4,5`.
    #[arg(long, default_value = "3-5")]
    pub n_range: String,
    #[arg(long, default_value = "2-7")]
    pub t_range: String,
    /// A regime, or `all` for Generic, LDOI and CLDUI.
    #[arg(long, default_value = "all")]
    pub regime: String,
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Subcommand)]
pub enum CopCommand {
    /// The Horn matrix against K^(0) and K^(1).
    Horn,
    /// Tests A ∈ K^(t).
    K {
        /// `horn` or a `{"n", "entries"}` JSON file.
        #[arg(long)]
        matrix: String,
        #[arg(long, default_value_t = 0)]
        t: usize,
    },
    /// min <C, X> over X with rho_(X,X)^{T_B} ∈ DPS^(t).
    Search {
        #[arg(long)]
        matrix: String,
        #[arg(long, default_value_t = 1)]
        t: usize,
    },
    /// DPS̃^(t) of rho_(X,X)^{T_B} against the DNN test (t = 1) or witnesses.
    Bridge {
        #[arg(long)]
        matrix: String,
        #[arg(long, default_value_t = 1)]
        t: usize,
        /// Witness matrices for t >= 2.
        #[arg(long)]
        witness: Vec<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum Ppt2Command {
    /// Runs the composed-state experiment and prints CSV rows.
    Run(Ppt2RunArgs),
}

#[derive(Debug, Args)]
pub struct Ppt2RunArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_t: Option<usize>,
    #[arg(long, value_parser = parse_regime)]
    pub regime: Option<Regime>,
    /// Comma-separated a-values.
    #[arg(long, value_delimiter = ',')]
    pub a_values: Option<Vec<f64>>,
    #[arg(long)]
    pub num_z: Option<usize>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Feasible => EXIT_FEASIBLE,
        Verdict::Infeasible => EXIT_INFEASIBLE,
        Verdict::Marginal => EXIT_MARGINAL,
    }
}

#[derive(Debug, Serialize)]
pub struct CheckOutput {
    pub input: String,
    pub t: usize,
    pub regime: Regime,
    pub hierarchy: Hierarchy,
    pub formalism: Formalism,
    #[serde(flatten)]
    pub report: MembershipReport,
}

/// Solves a membership problem; the solver tolerance comes from `DPSKIT_TOL` when set.
pub fn cmd_check(args: &ProblemArgs) -> Result<CheckOutput> {
    let rho = args.source.load()?;
    let report = check_membership(
        &rho,
        args.t,
        args.regime,
        args.hierarchy.into(),
        args.formalism.into(),
        &ModelOptions::default(),
        &SolveOptions::from_env(),
    )?;
    Ok(CheckOutput {
        input: args.source.describe(),
        t: args.t,
        regime: args.regime,
        hierarchy: args.hierarchy.into(),
        formalism: args.formalism.into(),
        report,
    })
}

pub fn cmd_tables(args: &TablesArgs) -> Result<Vec<patterns::TableRow>> {
    let ns = input::parse_range(&args.n_range)?;
    let ts = input::parse_range(&args.t_range)?;
    let regimes = if args.regime == "all" {
        vec![Regime::Generic, Regime::Ldoi, Regime::Cldui]
    } else {
        vec![parse_regime(&args.regime).map_err(anyhow::Error::msg)?]
    };
    let exec = if args.sequential { Exec::Sequential } else { Exec::Parallel };
    Ok(regimes.into_iter().flat_map(|r| block_size_table(exec, &ns, &ts, r)).collect())
}

#[derive(Debug, Serialize)]
struct MomentSummary {
    s_prime: i64,
    depth: usize,
    basis: usize,
    sizes: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct CliqueSummary {
    size: usize,
    members: Vec<String>,
}

fn cmd_blocks(args: &BlocksArgs) -> Result<serde_json::Value> {
    if args.n == 0 || args.t == 0 {
        bail!("n and t must be positive");
    }
    Ok(match args.tensor_s {
        Some(s) => {
            let layout = tensor_block_layout(args.n, args.t, s, args.regime)?;
            let cliques: Vec<CliqueSummary> = layout
                .cliques
                .iter()
                .map(|c| CliqueSummary {
                    size: c.members.len(),
                    members: c.members.iter().map(|m| format_seq(m)).collect(),
                })
                .collect();
            serde_json::json!({ "n": args.n, "t": args.t, "s": s, "regime": args.regime, "cliques": cliques })
        }
        None => {
            let layouts: Vec<MomentSummary> = moment_block_layout(args.n, args.t, args.regime)
                .iter()
                .map(|l| MomentSummary { s_prime: l.s_prime, depth: l.depth(), basis: l.basis_len(), sizes: l.sizes() })
                .collect();
            serde_json::json!({ "n": args.n, "t": args.t, "regime": args.regime, "layouts": layouts })
        }
    })
}

/// `K0` and `K1` verdicts of the Horn matrix, in that order.
pub fn cmd_cop_horn(opts: &SolveOptions) -> Result<(Verdict, Verdict)> {
    let h = cop::horn();
    Ok((cop::kt_membership(&h, 0, opts)?.verdict, cop::kt_membership(&h, 1, opts)?.verdict))
}

fn cmd_cop(cmd: &CopCommand, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let opts = SolveOptions::from_env();
    match cmd {
        CopCommand::Horn => {
            let (k0, k1) = cmd_cop_horn(&opts)?;
            writeln!(out, "K0: {k0:?}, K1: {k1:?}")?;
            let min = cop::copositive_brute_oracle(&cop::horn(), 24, Exec::Parallel);
            writeln!(err, "simplex grid minimum (depth 24): {min:?}")?;
            Ok(0)
        }
        CopCommand::K { matrix, t } => {
            let a = input::read_symmetric(matrix)?;
            let r = cop::kt_membership(&a, *t, &opts)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&r)?)?;
            writeln!(err, "K^({t}): {:?} (margin {:e})", r.verdict, r.margin)?;
            Ok(exit_code(r.verdict))
        }
        CopCommand::Search { matrix, t } => {
            let c = input::read_symmetric(matrix)?;
            let r = cop::search_objective(&c, *t, &opts)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&r)?)?;
            writeln!(err, "p* = {:e} ({:?}, bounded value {:e})", r.value, r.status, r.bounded_value)?;
            Ok(0)
        }
        CopCommand::Bridge { matrix, t, witness } => {
            let x = input::read_symmetric(matrix)?;
            let ws = witness.iter().map(|w| input::read_symmetric(w)).collect::<Result<Vec<_>>>()?;
            let r = cop::dps_cp_bridge_check(&x, *t, &ws, &opts)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&r)?)?;
            writeln!(err, "DPS̃^({t}): {:?}, agree: {}", r.dps_verdict, r.agree)?;
            Ok(0)
        }
    }
}

pub fn ppt2_config(args: &Ppt2RunArgs) -> Result<ppt2::ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            ppt2::ExperimentConfig::from_json_str(&text)?
        }
        None => ppt2::ExperimentConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.max_t {
        cfg.max_t = t;
    }
    if let Some(r) = args.regime {
        cfg.regime = r;
    }
    if let Some(a) = &args.a_values {
        cfg.a_values = a.clone();
    }
    if let Some(z) = args.num_z {
        cfg.num_z = z;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_ppt2(cmd: &Ppt2Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let Ppt2Command::Run(args) = cmd;
    let cfg = ppt2_config(args)?;
    let exec = if args.sequential { Exec::Sequential } else { Exec::Parallel };
    let report = ppt2::run_experiment(&cfg, &SolveOptions::from_env(), exec)?;
    match &args.out {
        Some(p) => report.write_csv(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)?,
        None => report.write_csv(&mut *out)?,
    }
    let feasible = report.rows.iter().filter(|r| r.verdict == Some(Verdict::Feasible)).count();
    writeln!(
        err,
        "{} rows, {feasible} feasible; {} factors ({} marginal), {} resamples",
        report.rows.len(),
        report.factors,
        report.marginal_factors,
        report.resamples
    )?;
    for r in report.rows.iter().filter(|r| r.error.is_some()) {
        writeln!(err, "a={} i={} j={} t={}: {}", r.a, r.i, r.j, r.t, r.error.as_deref().unwrap_or(""))?;
    }
    Ok(0)
}

/// Writes the compiled feasibility LMI of a membership problem.
pub fn cmd_export(args: &ExportArgs) -> Result<sdp::LmiProblem> {
    let p = &args.problem;
    let rho = p.source.load()?;
    let mopts = ModelOptions::default();
    let model = build(&rho, p.t, p.regime, p.hierarchy.into(), p.formalism.into(), &mopts)?;
    let compiled = compile(&lower(&model, &mopts));
    if let Some(r) = compiled.inconsistent {
        bail!("the equality constraints are inconsistent (residual {r:e}); the problem is infeasible");
    }
    let mut problem = compiled.problem;
    // Every entry is fixed at t = 1. SDPA needs m >= 1, so an unused
    // variable is added; it does not change the feasible set.
    problem.num_vars = problem.num_vars.max(1);
    sdp::export_sdpa(&problem, None, &args.out)?;
    Ok(problem)
}

/// Runs one command, writing results to `out` and summaries to `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Check(a) => {
            let r = cmd_check(&a.problem)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&r)?)?;
            writeln!(
                err,
                "{}: {:?} at t={} (margin {:e}, {:.3} s)",
                r.input, r.report.verdict, r.t, r.report.margin, r.report.seconds
            )?;
            Ok(exit_code(r.report.verdict))
        }
        Command::Blocks(a) => {
            writeln!(out, "{}", serde_json::to_string_pretty(&cmd_blocks(a)?)?)?;
            Ok(0)
        }
        Command::Tables(a) => {
            write_table_csv(&cmd_tables(a)?, &mut *out)?;
            Ok(0)
        }
        Command::Cop(c) => cmd_cop(c, out, err),
        Command::Ppt2(c) => cmd_ppt2(c, out, err),
        Command::Export(a) => {
            let p = cmd_export(a)?;
            let sizes: Vec<usize> = p.blocks.iter().map(|b| b.dim).collect();
            writeln!(err, "wrote {} ({} variables, blocks {:?})", a.out.display(), p.num_vars, sizes)?;
            Ok(0)
        }
    }
}

/// Parses `args` and runs; any error becomes exit code 3 with a message on `err`.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_ERROR } else { 0 };
        }
    };
    match run(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_ERROR
        }
    }
}
