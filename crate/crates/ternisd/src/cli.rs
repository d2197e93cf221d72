//! Command-line front end.
//!
//! Exit codes: 0 success, 1 no solution within budget, 2 usage or format
//! error, 3 infeasible parameters.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use ternisd_core::estimator::{
    self, bjmm_q2_reference, hardest_weight, Algorithm, ExponentResult, MinSize, RepSearch,
};
use ternisd_core::instances::{self, DoomInstance, SdInstance};
use ternisd_core::pgess::{prange_best_p, success_prob_log2, PgessParams, PrangeEngine, Problem, SubsetSumEngine};
use ternisd_core::reps::{self, Density, RepEngine};
use ternisd_core::wagner::{theorem1_ok, WagnerEngine};
use ternisd_core::Error;

use crate::format::{self, Instance};
use crate::parallel::{rep_exponent_parallel, run_parallel};
use crate::report::{self, round6, ExponentJson, MinSizeJson, OracleJson, RepCountJson, SolveJson, WaveJson};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_SOLUTION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ternisd", version, about = "Ternary syndrome decoding in large weight: solvers and cost estimates")]
pub struct Cli {
    /// Seed; falls back to TERNISD_SEED, then 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineKind {
    Prange,
    Wagner,
    Rep,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgKind {
    Prange,
    Wagner,
    Rep,
}

impl From<AlgKind> for Algorithm {
    fn from(a: AlgKind) -> Self {
        match a {
            AlgKind::Prange => Algorithm::Prange,
            AlgKind::Wagner => Algorithm::Wagner,
            AlgKind::Rep => Algorithm::Representations,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate an SD instance with a planted solution.
    Gen(GenArgs),
    /// Generate a DOOM instance with one planted syndrome.
    GenDoom(GenDoomArgs),
    /// Solve an instance file.
    Solve(SolveArgs),
    /// Enumerate all solutions of a small instance.
    Oracle(OracleArgs),
    /// Asymptotic exponent at one point.
    Estimate(EstimateArgs),
    /// Exponent along a weight grid.
    Curve(CurveArgs),
    /// Minimum input size for a security level.
    MinSize(MinSizeArgs),
    /// Security audit of Wave-style parameters.
    WaveCheck(WaveArgs),
    /// Typical decomposition and representation exponent.
    RepCount(RepCountArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub w: usize,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenDoomArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub w: usize,
    #[arg(long)]
    pub z: usize,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long = "in")]
    pub input: std::path::PathBuf,
    #[arg(long, value_enum, default_value = "wagner")]
    pub engine: EngineKind,
    /// Tree depth for wagner and rep.
    #[arg(long, default_value_t = 2)]
    pub a: usize,
    #[arg(long)]
    pub ell: Option<usize>,
    /// Weight of e'' (prange only; the tree engines use k + ell).
    #[arg(long)]
    pub p: Option<usize>,
    /// Treat the instance as multi-syndrome.
    #[arg(long)]
    pub doom: bool,
    #[arg(long)]
    pub max_restarts: Option<u64>,
    /// Merge operations allowed in total.
    #[arg(long, default_value_t = 1_000_000_000)]
    pub budget: u64,
    /// Leaf list size, log2 (wagner and rep).
    #[arg(long)]
    pub leaf_log2: Option<f64>,
    /// Report elapsed seconds (breaks byte-identical output).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long = "in")]
    pub input: std::path::PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub cap: usize,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[arg(long, default_value_t = 3)]
    pub q: u32,
    #[arg(long = "R")]
    pub rate: f64,
    #[arg(long = "W")]
    pub weight: f64,
    #[arg(long, value_enum)]
    pub alg: AlgKind,
    /// log2 of the number of syndromes, per coordinate.
    #[arg(long)]
    pub doom_z_log2: Option<f64>,
    /// Random restarts per template (rep).
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    #[arg(long, default_value_t = 3)]
    pub q: u32,
    #[arg(long = "R")]
    pub rate: f64,
    #[arg(long, value_enum)]
    pub alg: AlgKind,
    #[arg(long, default_value_t = 0.6667)]
    pub w_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub w_max: f64,
    #[arg(long, default_value_t = 21)]
    pub steps: usize,
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
}

#[derive(Args, Debug)]
pub struct MinSizeArgs {
    #[arg(long, default_value_t = 3)]
    pub q: u32,
    #[arg(long, value_enum)]
    pub alg: AlgKind,
    #[arg(long, default_value_t = 128.0)]
    pub bits: f64,
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
}

#[derive(Args, Debug)]
pub struct WaveArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub w: usize,
    /// log2 of the number of syndromes the attacker can query.
    #[arg(long, default_value_t = 64.0)]
    pub z_log2: f64,
    /// Random restarts per template of the representation search (0 skips it).
    #[arg(long, default_value_t = 1)]
    pub rep_restarts: usize,
}

#[derive(Args, Debug)]
pub struct RepCountArgs {
    #[arg(long)]
    pub alpha0: f64,
    #[arg(long)]
    pub beta0: f64,
    #[arg(long)]
    pub alpha1: f64,
    #[arg(long)]
    pub beta1: f64,
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Infeasible(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible(_) | Error::RankDeficient => Failure::Infeasible(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

/// Rendered output and exit code.
pub struct Output {
    pub stdout: String,
    pub code: i32,
}

fn resolve_seed(seed: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = seed {
        return Ok(s);
    }
    match std::env::var("TERNISD_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| Failure::Usage(format!("TERNISD_SEED is not a u64: {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn render<T: Serialize>(value: &T, fmt: OutputFormat) -> Result<String, Failure> {
    match fmt {
        OutputFormat::Json => Ok(report::to_json(value)),
        OutputFormat::Text => {
            let v = serde_json::to_value(value).map_err(|e| Failure::Usage(e.to_string()))?;
            let mut out = String::new();
            if let serde_json::Value::Object(map) = v {
                for (k, v) in map {
                    match v {
                        serde_json::Value::String(s) => out.push_str(&format!("{k}={s}\n")),
                        other => out.push_str(&format!("{k}={other}\n")),
                    }
                }
            }
            Ok(out)
        }
        OutputFormat::Csv => Err(Failure::Usage("csv output is only available for `curve`".into())),
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> (Output, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                (Output { stdout: text, code }, String::new())
            } else {
                (Output { stdout: String::new(), code }, text)
            };
        }
    };
    let threads = cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
        Ok(p) => p,
        Err(e) => return (Output { stdout: String::new(), code: EXIT_USAGE }, format!("error: {e}\n")),
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(out) => (out, String::new()),
        Err(Failure::Usage(m)) => (Output { stdout: String::new(), code: EXIT_USAGE }, format!("error: {m}\n")),
        Err(Failure::Infeasible(m)) => (Output { stdout: String::new(), code: EXIT_INFEASIBLE }, format!("infeasible: {m}\n")),
    }
}

/// Entry point for the binary: writes the streams and returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (out, err) = run(argv);
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(err.as_bytes());
    out.code
}

fn ok(stdout: String) -> Result<Output, Failure> {
    Ok(Output { stdout, code: EXIT_OK })
}

fn write_or_print(text: String, out: &Option<std::path::PathBuf>) -> Result<Output, Failure> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            ok(String::new())
        }
        None => ok(text),
    }
}

fn dispatch(cli: &Cli) -> Result<Output, Failure> {
    let fmt = cli.format.unwrap_or(OutputFormat::Json);
    match &cli.command {
        Command::Gen(a) => {
            let inst = instances::gen_sd(a.n, a.k, a.w, resolve_seed(cli.seed)?)?;
            write_or_print(format::serialize_sd(&inst), &a.out)
        }
        Command::GenDoom(a) => {
            let inst = instances::gen_doom(a.n, a.k, a.w, a.z, resolve_seed(cli.seed)?)?;
            write_or_print(format::serialize_doom(&inst), &a.out)
        }
        Command::Solve(a) => solve(a, resolve_seed(cli.seed)?, fmt),
        Command::Oracle(a) => oracle(a, fmt),
        Command::Estimate(a) => {
            let search = RepSearch { restarts: a.restarts, seed: resolve_seed(cli.seed)?, ..RepSearch::default() };
            let r = estimate_one(a.q, a.alg.into(), a.rate, a.weight, a.doom_z_log2, &search)?;
            ok(render(&ExponentJson::from(&r), fmt)?)
        }
        Command::Curve(a) => curve(a, resolve_seed(cli.seed)?, cli.format.unwrap_or(OutputFormat::Csv)),
        Command::MinSize(a) => min_size(a, resolve_seed(cli.seed)?, fmt),
        Command::WaveCheck(a) => {
            let search = RepSearch { restarts: a.rep_restarts.max(1), seed: resolve_seed(cli.seed)?, ..RepSearch::default() };
            let nf = a.n as f64;
            let rep = if a.rep_restarts > 0 && a.k < a.n && a.n > 0 {
                rep_exponent_parallel(a.k as f64 / nf, a.w as f64 / nf, &search).ok()
            } else {
                None
            };
            let audit = estimator::wave_security(a.n, a.k, a.w, Some(a.z_log2), rep.as_ref())?;
            ok(render(&WaveJson::from(&audit), fmt)?)
        }
        Command::RepCount(a) => {
            let d0 = Density::new(a.alpha0, a.beta0);
            let d1 = Density::new(a.alpha1, a.beta1);
            let z = reps::solve_typical_z(d0, d1)?;
            let shape = reps::table_shape(d0, d1);
            let mut table = reps::decomposition_table(d0, d1, z, 0.0);
            for row in &mut table {
                for x in row.iter_mut() {
                    *x = round6(*x);
                }
            }
            let j = RepCountJson {
                z: round6(z),
                nrep_log2: round6(reps::nrep_at(d0, d1, z, 0.0)),
                z_lo: round6(shape.z_lo),
                z_hi: round6(shape.z_hi),
                table,
            };
            ok(render(&j, fmt)?)
        }
    }
}

fn estimate_one(q: u32, alg: Algorithm, rate: f64, weight: f64, z: Option<f64>, search: &RepSearch) -> Result<ExponentResult, Failure> {
    Ok(match alg {
        Algorithm::Representations if q == 3 => {
            if weight < 2.0 / 3.0 {
                return Err(Failure::Infeasible("the representation path needs W >= 2/3".into()));
            }
            rep_exponent_parallel(rate, weight, search)?
        }
        Algorithm::Representations => {
            return Err(Failure::Infeasible("binary representations are shipped as reference values only".into()))
        }
        _ => estimator::exponent(q, alg, rate, weight, z, search)?,
    })
}

fn read_instance(path: &std::path::Path) -> Result<Instance, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    format::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Largest `ell <= min(n-k, w-k)` meeting the tree constraint at depth `a`.
pub fn default_ell(n: usize, k: usize, w: usize, a: usize) -> Option<usize> {
    let hi = (n - k).min(w.checked_sub(k)?);
    (1..=hi).rev().find(|&ell| theorem1_ok((k + ell) as f64, ell as f64, a))
}

fn solve(a: &SolveArgs, seed: u64, fmt: OutputFormat) -> Result<Output, Failure> {
    let inst = read_instance(&a.input)?;
    let doom_inst: Option<DoomInstance> = match (&inst, a.doom) {
        (Instance::Doom(d), _) => Some(d.clone()),
        (Instance::Sd(s), true) => Some(DoomInstance {
            n: s.n,
            k: s.k,
            w: s.w,
            h: s.h.clone(),
            syndromes: vec![s.s.clone()],
            planted_index: s.planted.as_ref().map(|_| 0),
            planted: s.planted.clone(),
            seed: s.seed,
        }),
        (Instance::Sd(_), false) => None,
    };
    let sd_inst: Option<SdInstance> = match &inst {
        Instance::Sd(s) if doom_inst.is_none() => Some(s.clone()),
        _ => None,
    };
    let problem = match (&sd_inst, &doom_inst) {
        (Some(s), _) => Problem::sd(s),
        (None, Some(d)) => Problem::doom(d),
        _ => unreachable!("one of the instance kinds is set"),
    };
    let (n, k, w) = (problem.n, problem.k, problem.w);
    let ell = match (a.engine, a.ell) {
        (_, Some(l)) => l,
        (EngineKind::Prange, None) => 0,
        (_, None) => default_ell(n, k, w, a.a).ok_or_else(|| Failure::Infeasible("no ell satisfies the tree constraint".into()))?,
    };
    if ell > n - k {
        return Err(Failure::Usage("ell exceeds n-k".into()));
    }
    let (engine, p): (Box<dyn SubsetSumEngine>, usize) = match a.engine {
        EngineKind::Prange => {
            let p = a.p.unwrap_or_else(|| if ell == 0 { prange_best_p(n, k, w) } else { (k + ell).min(w) });
            let samples = (3f64.powi(ell as i32).ceil() as u64).max(1);
            (Box::new(PrangeEngine { p, samples }), p)
        }
        EngineKind::Wagner => {
            let mut e = WagnerEngine::new(a.a);
            e.leaf_size_log2 = a.leaf_log2;
            (Box::new(e), k + ell)
        }
        EngineKind::Rep => {
            let mut e = RepEngine::new(a.a);
            e.leaf_size_log2 = a.leaf_log2;
            (Box::new(e), k + ell)
        }
    };
    if p > w || p > k + ell {
        return Err(Failure::Infeasible(format!("p = {p} exceeds w = {w} or k + ell = {}", k + ell)));
    }
    let sp = success_prob_log2(n, k, ell, p, w, 3);
    if !sp.is_finite() {
        return Err(Failure::Infeasible("zero success probability for these parameters".into()));
    }
    let max_restarts = a.max_restarts.unwrap_or_else(|| (8.0 / sp.min(0.0).exp2()).ceil().clamp(1.0, 1e6) as u64);
    let params = PgessParams { ell, p, max_restarts, target_solutions_per_restart: 1 };
    let report = run_parallel(&problem, &params, engine.as_ref(), seed, a.budget)?;
    let verified = report
        .solution
        .as_ref()
        .map(|e| match (&sd_inst, &doom_inst) {
            (Some(s), _) => s.is_solution(e),
            (None, Some(d)) => d.matching_index(e).is_some(),
            _ => false,
        })
        .unwrap_or(false);
    let solved = report.solution.is_some() && verified;
    let j = SolveJson {
        status: if solved { "solved" } else { "no-solution" },
        engine: engine.name(),
        solution: report.solution.as_ref().filter(|_| verified).map(|e| e.to_string()),
        syndrome_index: if doom_inst.is_some() && solved { report.syndrome_index.map(|i| i + 1) } else { None },
        weight: w,
        verified,
        ell,
        p,
        restarts_used: report.restarts_used,
        candidates_tested: report.subset_sum_candidates_tested,
        wall_time: if a.timing { report.wall_time.map(round6) } else { None },
    };
    Ok(Output { stdout: render(&j, fmt)?, code: if solved { EXIT_OK } else { EXIT_NO_SOLUTION } })
}

fn oracle(a: &OracleArgs, fmt: OutputFormat) -> Result<Output, Failure> {
    let inst = read_instance(&a.input)?;
    let sd = match inst {
        Instance::Sd(s) => s,
        Instance::Doom(_) => return Err(Failure::Usage("oracle takes sd3 instances".into())),
    };
    let sols = instances::brute_force_solutions(&sd, a.cap.saturating_add(1)).map_err(|e| match e {
        Error::TooLarge => Failure::Infeasible("instance too large for exhaustive enumeration".into()),
        other => other.into(),
    })?;
    let truncated = sols.len() > a.cap;
    let sols = &sols[..sols.len().min(a.cap)];
    let j = OracleJson {
        count: sols.len(),
        truncated,
        planted_found: sd.planted.as_ref().map(|p| sols.contains(p)),
        expected_solutions_log2: round6(instances::expected_solutions_log2(sd.n, sd.k, sd.w, 3)),
        solutions: sols.iter().map(|e| e.to_string()).collect(),
    };
    ok(render(&j, fmt)?)
}

fn curve(a: &CurveArgs, seed: u64, fmt: OutputFormat) -> Result<Output, Failure> {
    if a.steps < 2 || a.w_max < a.w_min {
        return Err(Failure::Usage("need steps >= 2 and w-max >= w-min".into()));
    }
    let alg: Algorithm = a.alg.into();
    let search = RepSearch { restarts: a.restarts, seed, ..RepSearch::default() };
    let mut points = Vec::new();
    for i in 0..a.steps {
        let w = a.w_min + (a.w_max - a.w_min) * i as f64 / (a.steps - 1) as f64;
        if let Ok(r) = estimate_one(a.q, alg, a.rate, w, None, &search) {
            points.push((w, r.exponent));
        }
    }
    match fmt {
        OutputFormat::Csv => ok(report::curve_csv(&points, alg.name(), a.rate, a.q).map_err(|e| Failure::Usage(e.to_string()))?),
        _ => {
            let rows: Vec<report::CurveRow> = points
                .iter()
                .map(|&(w, e)| report::CurveRow {
                    weight: format!("{w:.6}"),
                    exponent: format!("{e:.6}"),
                    algorithm: alg.name(),
                    rate: format!("{:.6}", a.rate),
                    q: a.q,
                })
                .collect();
            ok(report::to_json(&rows))
        }
    }
}

/// Minimum input size for `alg`; exposed for the acceptance suite.
pub fn min_size_for(q: u32, alg: Algorithm, bits: f64, search: &RepSearch) -> Result<(MinSize, bool), Failure> {
    match (q, alg) {
        (2, Algorithm::Representations) => Ok((
            MinSize {
                kbits: bjmm_q2_reference::MIN_SIZE_KBITS,
                rate: bjmm_q2_reference::MIN_SIZE_RATE,
                exponent: f64::NAN,
            },
            true,
        )),
        (2 | 3, Algorithm::Prange | Algorithm::Wagner) => {
            let f = |r: f64| {
                estimator::exponent(q, alg, r, hardest_weight(q, r), None, search)
                    .map(|x| x.exponent)
                    .unwrap_or(0.0)
            };
            Ok((estimator::min_input_size(f, q, bits, 0.05, 0.95, 180, 40), false))
        }
        (3, Algorithm::Representations) => {
            let f = |r: f64| {
                rep_exponent_parallel(r, hardest_weight(3, r), search)
                    .map(|x| x.exponent)
                    .unwrap_or(0.0)
            };
            Ok((estimator::min_input_size(f, 3, bits, 0.33, 0.41, 4, 12), false))
        }
        _ => Err(Failure::Usage("q must be 2 or 3".into())),
    }
}

fn min_size(a: &MinSizeArgs, seed: u64, fmt: OutputFormat) -> Result<Output, Failure> {
    let alg: Algorithm = a.alg.into();
    let search = RepSearch { restarts: a.restarts, seed, ..RepSearch::default() };
    let (m, reference) = min_size_for(a.q, alg, a.bits, &search)?;
    ok(render(&MinSizeJson::new(&m, alg.name(), a.q, a.bits, reference), fmt)?)
}

