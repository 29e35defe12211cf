pub mod output;

use std::io;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use copoly_core::blocks::{
    criterion_pointwise, criterion_supercritical, psi_diag, psi_offdiag, s_diag, s_offdiag, BlockPairKind, PhaseVerdict,
    Verdict,
};
use copoly_core::deloc::{f_of_rho, solve_deloc, DelocParams};
use copoly_core::entropy::{kappa, kappa_hat, model_constants, CrossingParams};
use copoly_core::interface::{
    phi_annealed_upper, phi_interface, phi_lower_bounds, phi_upper_bound, BoundsOnly, InterfaceParams, MonteCarloPhi,
    PhiSource,
};
use copoly_core::optimize::ARG_TOL;
use copoly_core::oracle::verify_kacomb_asymptotics;
use copoly_core::percolation::{estimate_pc, extrapolate, extrapolation_lengths, rho_star_multi, PC, PC_TOLERANCE};
use copoly_core::phase::{alpha_star_p, beta_c_envelope, sweep, SweepSettings, ALPHA_STAR_TOL, CURVE_TOL, ESTIMATE_TOL};
use copoly_core::Error;

use output::{emit, manifest, Table};

#[derive(Debug, Parser)]
#[command(name = "copoly", version, about = "Copolymer in a random emulsion: free energies, criteria and phase curves")]
pub struct Cli {
    /// Worker threads (default: all cores); output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write BASE.csv and BASE.json instead of CSV on stdout and the manifest on stderr.
    #[arg(long, global = true, value_name = "BASE")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Crossing entropy κ(a,b) (with --a, --b) or interface entropy κ̂(μ) (with --mu).
    #[command(after_help = "Columns with --a: a,b,kappa,delta,epsilon\nColumns with --mu: mu,kappa_hat,delta")]
    Entropy(EntropyArgs),
    /// Model constants.
    #[command(after_help = "Columns: name,value\nRows: kappa_star, a_star, slope_const, mu_sup, mu_sup_value, alpha0, alpha1")]
    Constants(NoArgs),
    /// Interface free energy φ^I(α,β;μ): rigorous bounds, and a quenched Monte Carlo estimate with --L.
    #[command(after_help = "Columns: alpha,beta,mu,lower_bound,upper_bound,annealed_upper,mean,stderr,cv_mean,cv_stderr,\
raw_mean,spread,entropic_shift,L,steps,mu_realized,replicas,seed\nThe Monte Carlo columns are empty without --L.")]
    Interface(InterfaceArgs),
    /// Block-pair suprema and the supercritical criterion, or ψ_kl(a) and the pointwise criterion with --a.
    #[command(after_help = "Columns: alpha,beta,s_aa,s_bb,s_ab_lower,s_ab_upper,s_ba_lower,s_ba_upper,\
state,evidence,gap,threshold,lower_sup,upper_sup,estimate_sup,estimate_state\n\
Columns with --a: alpha,beta,kind,a,psi_diag,psi_lower,psi_value,psi_upper,b_arg,boundary,\
state,evidence,gap,threshold,lower_sup,upper_sup,estimate_sup,estimate_state")]
    Blocks(BlocksArgs),
    /// Maximisers (x̄, ȳ) and value of the delocalized variational formula F(α,β;ρ).
    #[command(after_help = "Columns: alpha,beta,rho,x_bar,y_bar,F,residual1,residual2,x_unbounded\n\
At rho = 0 or 1 only F is filled in.")]
    Deloc(DelocArgs),
    /// Oriented percolation of A-blocks: ρ*(p) at N/4, N/2, N, its 1/N extrapolation and the threshold.
    #[command(after_help = "Columns: p,steps,replicas,seed,rho_quarter,rho_half,rho_full,stderr_full,intercept,slope,residual,is_pc\n\
is_pc marks the largest density whose extrapolated ρ* is below 1 - 1e-3.")]
    Percolation(PercolationArgs),
    /// Phase diagram sweep, the supercritical curve envelope (--curve) or α*(p) (--alpha-star).
    #[command(after_help = "Sweep columns: alpha,beta,p,cone_alpha,cone_beta,cone_p,regime,rho,state,evidence,gap,\
f_lower,f_upper,exact,strict_lower,estimate_state,error\n\
Curve columns: alpha,beta_lower,beta_upper,beta_estimate,beta_estimate_err,diagonal\n\
Alpha-star columns: p,rho,alpha_star\n\
Grid points are the multiples of --res in [min, max]. Subcritical cells need rho*: give --rho/--rho-q, \
or --steps with --seed to measure it; cells without it carry an error. With --strict the exit code is 3 \
when every evaluated cell is Undecided.")]
    Phase(PhaseArgs),
    /// Exact crossing path counts against the closed-form crossing entropy.
    #[command(after_help = "Columns: a,b,L,rate,restricted_rate,band_gap,formula_rate,kappa,extrapolated,\
extrapolated_restricted,rel_error\nband_gap is |rate - restricted_rate| / rate.")]
    Oracle(OracleArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct NoArgs {}

#[derive(Debug, Args, Serialize)]
pub struct EntropyArgs {
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub a: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub mu: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct InterfaceArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub mu: Vec<f64>,
    /// Interface length in blocks; switches on the Monte Carlo estimate.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<u32>,
    #[arg(long, default_value_t = 100)]
    pub replicas: u32,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct BlocksArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    /// Block aspect ratio for the pointwise criterion.
    #[arg(long)]
    pub a: Option<f64>,
    /// AB or BA.
    #[arg(long, default_value = "AB")]
    pub kind: String,
    /// Interface length for Monte Carlo point estimates of φ^I.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<u32>,
    #[arg(long, default_value_t = 16)]
    pub replicas: u32,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct DelocArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub rho: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct PercolationArgs {
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub p: Vec<f64>,
    /// Density grid from --p-min to --p-max in steps of --res when --p is absent.
    #[arg(long)]
    pub p_min: Option<f64>,
    #[arg(long)]
    pub p_max: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub res: f64,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    #[arg(long, default_value_t = 20)]
    pub replicas: u32,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct PhaseArgs {
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub alpha_max: f64,
    /// Default: -beta-max.
    #[arg(long, allow_negative_numbers = true)]
    pub beta_min: Option<f64>,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub beta_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub res: f64,
    /// ρ*(p); a list in --alpha-star mode.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub rho: Vec<f64>,
    /// ρ*(1-p), used by cells with β > α.
    #[arg(long)]
    pub rho_q: Option<f64>,
    /// Percolation length for measuring ρ*.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, default_value_t = 20)]
    pub perc_replicas: u32,
    /// Interface length for Monte Carlo point estimates of φ^I.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<u32>,
    #[arg(long, default_value_t = 16)]
    pub replicas: u32,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = PC)]
    pub pc: f64,
    #[arg(long, conflicts_with = "alpha_star")]
    pub curve: bool,
    #[arg(long)]
    pub alpha_star: bool,
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [2.0, 2.5, 3.0])]
    pub a: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[serde(rename = "L")]
    #[arg(long = "L", value_delimiter = ',', num_args = 1.., default_values_t = [20, 40, 80])]
    pub l: Vec<u32>,
}

#[derive(Debug)]
pub enum CliError {
    Param(String),
    Convergence(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Param(_) | CliError::Io(_) => 1,
            CliError::Convergence(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Param(m) => write!(f, "error: {m}"),
            CliError::Convergence(m) => write!(f, "error: no convergence: {m}"),
            CliError::Io(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Convergence(m) => CliError::Convergence(m),
            e => CliError::Param(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type Res<T> = std::result::Result<T, CliError>;

/// Ratios at which Monte Carlo φ^I values are computed for blocks and phase; the
/// estimate is interpolated in between and is the bound midpoint beyond 3.
fn phi_mu_grid() -> Vec<f64> {
    (0..=8).map(|i| 1.0 + 0.25 * i as f64).collect()
}

fn need_seed(seed: Option<u64>, what: &str) -> Res<u64> {
    seed.ok_or_else(|| CliError::Param(format!("{what} is random and needs an explicit --seed")))
}

fn phi_source(l: Option<u32>, replicas: u32, seed: Option<u64>) -> Res<Box<dyn PhiSource>> {
    match l {
        Some(l) => Ok(Box::new(MonteCarloPhi::with_grid(l, replicas, need_seed(seed, "--L")?, phi_mu_grid()))),
        None => Ok(Box::new(BoundsOnly)),
    }
}

/// Multiples of `res` in `[lo, hi]`, so grids with the same `res` share values.
pub fn lattice(lo: f64, hi: f64, res: f64) -> Res<Vec<f64>> {
    if !(res > 0.0 && lo.is_finite() && hi.is_finite() && hi >= lo) {
        return Err(CliError::Param(format!("bad range [{lo}, {hi}] with resolution {res}")));
    }
    let (i0, i1) = ((lo / res - 1e-9).ceil() as i64, (hi / res + 1e-9).floor() as i64);
    if i1 < i0 || i1 - i0 > 100_000 {
        return Err(CliError::Param(format!("range [{lo}, {hi}] with resolution {res} has no or too many points")));
    }
    Ok((i0..=i1).map(|i| i as f64 * res).collect())
}

fn tolerances() -> Value {
    json!({
        "arg_tol": ARG_TOL,
        "curve_tol": CURVE_TOL,
        "estimate_tol": ESTIMATE_TOL,
        "alpha_star_tol": ALPHA_STAR_TOL,
        "pc_tolerance": PC_TOLERANCE,
    })
}

fn params_of<T: Serialize>(args: &T) -> Value {
    let mut v = serde_json::to_value(args).expect("serialisable arguments");
    v["tolerances"] = tolerances();
    v
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return 1;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return 1;
        }
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Res<i32> {
    let start = Instant::now();
    let (name, params, seed, table, code) = match &cli.command {
        Command::Entropy(a) => ("entropy", params_of(a), None, entropy(a)?, 0),
        Command::Constants(a) => ("constants", params_of(a), None, constants()?, 0),
        Command::Interface(a) => ("interface", params_of(a), a.seed, interface(a)?, 0),
        Command::Blocks(a) => ("blocks", params_of(a), a.seed, blocks(a)?, 0),
        Command::Deloc(a) => ("deloc", params_of(a), None, deloc(a)?, 0),
        Command::Percolation(a) => ("percolation", params_of(a), a.seed, percolation(a)?, 0),
        Command::Phase(a) => {
            let (t, code) = phase(a)?;
            ("phase", params_of(a), a.seed, t, code)
        }
        Command::Oracle(a) => ("oracle", params_of(a), None, oracle(a)?, 0),
    };
    let m = manifest(name, params, seed, start.elapsed().as_secs_f64());
    emit(&table, &m, cli.out.as_ref())?;
    Ok(code)
}

fn entropy(args: &EntropyArgs) -> Res<Table> {
    match (args.a.is_empty(), args.mu.is_empty()) {
        (false, true) => {
            let mut t = Table::new(&["a", "b", "kappa", "delta", "epsilon"]);
            for &a in &args.a {
                let e = kappa(CrossingParams::new(a, args.b)?)?;
                t.push(row![a, args.b, e.kappa, e.delta, e.epsilon]);
            }
            Ok(t)
        }
        (true, false) => {
            let mut t = Table::new(&["mu", "kappa_hat", "delta"]);
            for &mu in &args.mu {
                let e = kappa_hat(mu)?;
                t.push(row![mu, e.kappahat, e.delta]);
            }
            Ok(t)
        }
        _ => Err(CliError::Param("entropy needs exactly one of --a and --mu".into())),
    }
}

fn constants() -> Res<Table> {
    let c = model_constants()?;
    let mut t = Table::new(&["name", "value"]);
    for (name, v) in [
        ("kappa_star", c.kappa_star),
        ("a_star", c.a_star),
        ("slope_const", c.slope_const),
        ("mu_sup", c.mu_sup),
        ("mu_sup_value", c.mu_sup_value),
        ("alpha0", c.alpha0),
        ("alpha1", c.alpha1),
    ] {
        t.push(row![name, v]);
    }
    Ok(t)
}

fn interface(args: &InterfaceArgs) -> Res<Table> {
    let mut t = Table::new(&[
        "alpha", "beta", "mu", "lower_bound", "upper_bound", "annealed_upper", "mean", "stderr", "cv_mean",
        "cv_stderr", "raw_mean", "spread", "entropic_shift", "L", "steps", "mu_realized", "replicas", "seed",
    ]);
    let seed = match args.l {
        Some(_) => Some(need_seed(args.seed, "the Monte Carlo estimate")?),
        None => None,
    };
    for &mu in &args.mu {
        let p = InterfaceParams::new(args.alpha, args.beta, mu)?;
        let (lo, hi, ann) = (phi_lower_bounds(p)?, phi_upper_bound(p)?, phi_annealed_upper(p)?);
        let mut r = row![args.alpha, args.beta, mu, lo, hi, ann];
        match (args.l, seed) {
            (Some(l), Some(seed)) => {
                let e = phi_interface(p, l, args.replicas, seed)?;
                r.extend(row![
                    e.mean,
                    e.stderr,
                    e.cv_mean,
                    e.cv_stderr,
                    e.raw_mean,
                    e.spread,
                    e.entropic_shift,
                    e.l,
                    e.steps,
                    e.mu_realized,
                    e.replicas,
                    e.seed
                ]);
            }
            _ => r.extend((0..12).map(|_| output::Cell::Empty)),
        }
        t.push(r);
    }
    Ok(t)
}

fn verdict_cells(v: &PhaseVerdict) -> Vec<output::Cell> {
    row![
        v.state.to_string(),
        v.evidence.to_string(),
        v.gap,
        v.threshold,
        v.lower_sup,
        v.upper_sup,
        v.estimate_sup,
        v.estimate_state().map_or(String::new(), |s| s.to_string())
    ]
}

fn blocks(args: &BlocksArgs) -> Res<Table> {
    let src = phi_source(args.l, args.replicas, args.seed)?;
    let (alpha, beta) = (args.alpha, args.beta);
    match args.a {
        None => {
            let mut t = Table::new(&[
                "alpha", "beta", "s_aa", "s_bb", "s_ab_lower", "s_ab_upper", "s_ba_lower", "s_ba_upper", "state",
                "evidence", "gap", "threshold", "lower_sup", "upper_sup", "estimate_sup", "estimate_state",
            ]);
            let ab = s_offdiag(BlockPairKind::AB, alpha, beta, src.as_ref())?;
            let ba = s_offdiag(BlockPairKind::BA, alpha, beta, src.as_ref())?;
            let v = criterion_supercritical(alpha, beta, src.as_ref())?;
            let mut r = row![
                alpha,
                beta,
                s_diag(BlockPairKind::AA, alpha, beta)?.0,
                s_diag(BlockPairKind::BB, alpha, beta)?.0,
                ab.lower,
                ab.upper,
                ba.lower,
                ba.upper
            ];
            r.extend(verdict_cells(&v));
            t.push(r);
            Ok(t)
        }
        Some(a) => {
            let kind: BlockPairKind = args.kind.parse()?;
            if kind.is_diagonal() {
                return Err(CliError::Param(format!("--kind {kind}: the pointwise criterion needs AB or BA")));
            }
            let mut t = Table::new(&[
                "alpha", "beta", "kind", "a", "psi_diag", "psi_lower", "psi_value", "psi_upper", "b_arg", "boundary",
                "state", "evidence", "gap", "threshold", "lower_sup", "upper_sup", "estimate_sup", "estimate_state",
            ]);
            let diag = BlockPairKind::new(kind.crossed(), kind.crossed());
            let psi = psi_offdiag(kind, a, alpha, beta, src.as_ref())?;
            let v = criterion_pointwise(kind, a, alpha, beta, src.as_ref())?;
            let mut r = row![
                alpha,
                beta,
                kind.to_string(),
                a,
                psi_diag(diag, a, alpha, beta)?,
                psi.lower,
                psi.value,
                psi.upper,
                psi.b_arg,
                psi.boundary
            ];
            r.extend(verdict_cells(&v));
            t.push(r);
            Ok(t)
        }
    }
}

fn deloc(args: &DelocArgs) -> Res<Table> {
    let mut t = Table::new(&["alpha", "beta", "rho", "x_bar", "y_bar", "F", "residual1", "residual2", "x_unbounded"]);
    for &rho in &args.rho {
        let p = DelocParams::new(args.alpha, args.beta, rho)?;
        if rho == 0.0 || rho == 1.0 {
            let none = Option::<f64>::None;
            t.push(row![args.alpha, args.beta, rho, none, none, f_of_rho(p)?, none, none, ""]);
            continue;
        }
        let s = solve_deloc(p)?;
        t.push(row![args.alpha, args.beta, rho, s.x_bar, s.y_bar, s.f, s.residual1, s.residual2, s.x_unbounded]);
    }
    Ok(t)
}

fn percolation(args: &PercolationArgs) -> Res<Table> {
    let seed = need_seed(args.seed, "percolation")?;
    let grid = match (args.p.is_empty(), args.p_min, args.p_max) {
        (false, None, None) => args.p.clone(),
        (true, Some(lo), Some(hi)) => lattice(lo, hi, args.res)?,
        _ => return Err(CliError::Param("percolation needs either --p or both --p-min and --p-max".into())),
    };
    let est = estimate_pc(&grid, args.steps, args.replicas, seed)?;
    let mut t = Table::new(&[
        "p", "steps", "replicas", "seed", "rho_quarter", "rho_half", "rho_full", "stderr_full", "intercept", "slope",
        "residual", "is_pc",
    ]);
    for r in &est.rows {
        let e = &r.estimates;
        t.push(row![
            r.p,
            args.steps,
            args.replicas,
            seed,
            e[0].mean,
            e[1].mean,
            e[2].mean,
            e[2].stderr,
            r.intercept,
            r.slope,
            r.residual,
            est.p_c == Some(r.p)
        ]);
    }
    Ok(t)
}

/// Extrapolated `ρ*(p)`, kept inside `[p, 1]`.
fn measure_rho(p: f64, steps: usize, replicas: u32, seed: u64) -> Res<f64> {
    let ex = extrapolate(rho_star_multi(p, &extrapolation_lengths(steps), replicas, seed)?)?;
    Ok(ex.intercept.clamp(p, 1.0))
}

fn single_p(args: &PhaseArgs) -> Res<f64> {
    match args.p.as_slice() {
        [p] => Ok(*p),
        _ => Err(CliError::Param("this phase mode needs exactly one --p".into())),
    }
}

fn phase(args: &PhaseArgs) -> Res<(Table, i32)> {
    if args.alpha_star {
        return Ok((alpha_star_rows(args)?, 0));
    }
    let src = phi_source(args.l, args.replicas, args.seed)?;
    if args.curve {
        let alphas = lattice(args.alpha_min.max(0.0), args.alpha_max, args.res)?;
        let points = alphas.par_iter().map(|&a| beta_c_envelope(a, src.as_ref())).collect::<Vec<_>>();
        let mut t = Table::new(&["alpha", "beta_lower", "beta_upper", "beta_estimate", "beta_estimate_err", "diagonal"]);
        for c in points {
            let c = c?;
            t.push(row![c.alpha, c.beta_lower, c.beta_upper, c.beta_estimate, c.beta_estimate_err, c.diagonal]);
        }
        return Ok((t, 0));
    }
    let p = single_p(args)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(CliError::Param(format!("--p {p} must lie in (0, 1)")));
    }
    let alphas = lattice(args.alpha_min, args.alpha_max, args.res)?;
    let betas = lattice(args.beta_min.unwrap_or(-args.beta_max), args.beta_max, args.res)?;
    let rho_for = |q: f64, given: Option<f64>| -> Res<Option<f64>> {
        if q >= args.pc {
            return Ok(None);
        }
        match (given, args.steps) {
            (Some(r), _) => Ok(Some(r)),
            (None, Some(n)) => Ok(Some(measure_rho(q, n, args.perc_replicas, need_seed(args.seed, "--steps")?)?)),
            (None, None) => Ok(None),
        }
    };
    if args.rho.len() > 1 {
        return Err(CliError::Param("the sweep takes a single --rho".into()));
    }
    let settings =
        SweepSettings { pc: args.pc, rho_p: rho_for(p, args.rho.first().copied())?, rho_q: rho_for(1.0 - p, args.rho_q)? };
    let rows = sweep(&alphas, &betas, p, settings, src.as_ref());
    let mut t = Table::new(&[
        "alpha", "beta", "p", "cone_alpha", "cone_beta", "cone_p", "regime", "rho", "state", "evidence", "gap", "f_lower",
        "f_upper", "exact", "strict_lower", "estimate_state", "error",
    ]);
    let (mut evaluated, mut undecided, mut diverged) = (0usize, 0usize, 0usize);
    for r in &rows {
        match &r.result {
            Ok((red, fe)) => {
                let pt = red.point;
                let rho = match (pt.supercritical, red.swapped) {
                    (true, _) => None,
                    (false, false) => settings.rho_p,
                    (false, true) => settings.rho_q,
                };
                let v = &fe.verdict;
                evaluated += 1;
                undecided += (v.state == Verdict::Undecided) as usize;
                t.push(row![
                    r.alpha,
                    r.beta,
                    r.p,
                    pt.alpha,
                    pt.beta,
                    pt.p,
                    if pt.supercritical { "supercritical" } else { "subcritical" },
                    rho,
                    v.state.to_string(),
                    v.evidence.to_string(),
                    v.gap,
                    fe.lower,
                    fe.upper,
                    fe.exact,
                    fe.strict_lower,
                    v.estimate_state().map_or(String::new(), |s| s.to_string()),
                    ""
                ]);
            }
            Err(e) => {
                diverged += matches!(e, Error::Convergence(_)) as usize;
                let mut cells = row![r.alpha, r.beta, r.p];
                cells.extend((0..13).map(|_| output::Cell::Empty));
                cells.push(e.to_string().into());
                t.push(cells);
            }
        }
    }
    let failed = rows.len() - evaluated;
    if failed > 0 {
        eprintln!("warning: {failed} of {} cells were not evaluated (see the error column)", rows.len());
    }
    let code = if diverged > 0 {
        2
    } else if args.strict && evaluated > 0 && undecided == evaluated {
        3
    } else {
        0
    };
    Ok((t, code))
}

fn alpha_star_rows(args: &PhaseArgs) -> Res<Table> {
    let mut t = Table::new(&["p", "rho", "alpha_star"]);
    if !args.rho.is_empty() {
        for &rho in &args.rho {
            t.push(row![Option::<f64>::None, rho, alpha_star_p(rho)?]);
        }
        return Ok(t);
    }
    if args.p.is_empty() {
        return Err(CliError::Param("--alpha-star needs --rho, or --p with --steps and --seed".into()));
    }
    let steps = args.steps.ok_or_else(|| CliError::Param("--alpha-star with --p needs --steps to measure rho*".into()))?;
    let seed = need_seed(args.seed, "measuring rho*")?;
    for &p in &args.p {
        if !(p > 0.0 && p < args.pc) {
            return Err(CliError::Param(format!("alpha* is defined for subcritical p; got {p} with pc = {}", args.pc)));
        }
        let rho = measure_rho(p, steps, args.perc_replicas, seed)?;
        t.push(row![p, rho, alpha_star_p(rho)?]);
    }
    Ok(t)
}

fn oracle(args: &OracleArgs) -> Res<Table> {
    let mut t = Table::new(&[
        "a", "b", "L", "rate", "restricted_rate", "band_gap", "formula_rate", "kappa", "extrapolated",
        "extrapolated_restricted", "rel_error",
    ]);
    for &a in &args.a {
        let r = verify_kacomb_asymptotics(a, args.b, &args.l)?;
        for (i, &l) in r.ls.iter().enumerate() {
            let (u, b) = (r.rates[i], r.restricted_rates[i]);
            t.push(row![
                a,
                args.b,
                l,
                u,
                b,
                (u - b).abs() / u,
                r.formula_rates[i],
                r.kappa,
                r.extrapolated,
                r.extrapolated_restricted,
                r.rel_error
            ]);
        }
    }
    Ok(t)
}
