//! `fcpp`: densities, expected waiting times, tree simulation and the
//! verification suites of the `feller-cpp` library.
//!
//! Model specs use `kind:key=value[,key=value]*`:
//!
//! * `bd:lambda=L,mu=M`, `bdsa:lambda=L,mu=M`
//! * `wiuf:delta=D,gamma=G`
//! * `bern:rho=R[,of=bd|bdsa|wiuf|feller],<base keys>`
//! * `feller:alpha=A[,nu=N]`; without `nu` the model needs a population `--x`
//!
//! Exit codes: 0 success, 2 usage, 3 numerical failure, 4 verification failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use feller_cpp::analytics::{
    cond_density_ti_given_tj, feller_cond_ti_given_tj, feller_marginal_tk, marginal_density_tk,
    FellerSetting, StemConditioning,
};
use feller_cpp::models::{ModelSpec, NodeHeightModel};
use feller_cpp::moments::{
    expected_wk_recursive, expected_wk_unif_recursive, fmt17, wiuf_unif_waiting_exact, MomentKind,
    MomentTable,
};
use feller_cpp::simulate::{
    run_replicates, simulate_cpp, simulate_cpp_given_n, simulate_feller_ksample,
    simulate_root_infinity, simulate_unif_prior, simulate_yule_transform, ReplicateRng, RngState,
};
use feller_cpp::stats::mean_se;
use feller_cpp::trees::CoalescentTree;
use feller_cpp::verify::{run_suite, McConfig, Suite, DEFAULT_SEED};
use feller_cpp::Error;
use serde_json::json;

const VERIFY_TOLERANCE: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "fcpp",
    version,
    about = "Coalescent point processes and their Feller limit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Density of a coalescent time on a grid of tau values (CSV `tau,value`).
    Density(DensityArgs),
    /// Expected waiting or coalescent times (CSV or JSON).
    Moments(MomentsArgs),
    /// Simulate trees (Newick or JSON lines) or summarise their waiting times.
    Simulate(SimulateArgs),
    /// Run a verification suite: moments, ksample, montecarlo or all.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long)]
    model: String,
    /// Stem age.
    #[arg(long)]
    t: f64,
    /// Scaled population at the present, for `feller:alpha=A` without `nu`.
    #[arg(long)]
    x: Option<f64>,
    /// Sample size, for node-height models.
    #[arg(long)]
    n: Option<usize>,
    /// Marginal density of `T_k`.
    #[arg(long, conflicts_with_all = ["i", "j", "s"])]
    k: Option<usize>,
    /// Conditional density of `T_i` given `T_j = s`.
    #[arg(long, requires_all = ["j", "s"])]
    i: Option<usize>,
    #[arg(long, requires = "i")]
    j: Option<usize>,
    #[arg(long, requires = "i")]
    s: Option<f64>,
    /// `start:end:count`, inclusive.
    #[arg(long, conflicts_with = "tau")]
    grid: Option<String>,
    /// Single evaluation points.
    #[arg(long, num_args = 1..)]
    tau: Vec<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Regime {
    Fixed,
    Unif,
    RootInf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Waiting,
    Coalescent,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct MomentsArgs {
    #[arg(long, conflicts_with_all = ["delta", "gamma"])]
    model: Option<String>,
    #[arg(long, requires = "gamma")]
    delta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "unif")]
    regime: Regime,
    /// Stem age (fixed) or prior horizon (unif, default infinite).
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, value_enum, default_value = "waiting")]
    kind: Kind,
    #[arg(long, value_enum, default_value = "csv")]
    format: TableFormat,
    /// Cross-check the waiting times against a recursion; exit 4 on a
    /// relative mismatch above 1e-9.
    #[arg(long)]
    verify: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Conditioning {
    Fixed,
    Unif,
    RootInf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TreeFormat {
    Newick,
    Json,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, conflicts_with = "gamma")]
    model: Option<String>,
    /// Wiuf-form trees rooted at infinity via the Yule transform; several
    /// values give one block of trees each.
    #[arg(long, value_delimiter = ',')]
    gamma: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    /// Scaled population, for `feller:alpha=A` without `nu`.
    #[arg(long)]
    x: Option<f64>,
    #[arg(long, value_enum, default_value = "fixed")]
    conditioning: Conditioning,
    #[arg(long, default_value_t = 1)]
    replicates: u64,
    #[arg(long, env = "CPPF_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "newick")]
    format: TreeFormat,
    /// Decimal places of Newick branch lengths.
    #[arg(long, default_value_t = 6)]
    precision: usize,
    /// Emit the empirical `E[W_k]` table (CSV `setting,k,mean,se`) instead of trees.
    #[arg(long)]
    summary: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_parser = parse_suite)]
    suite: Suite,
    /// Samples per Monte Carlo comparison; accepts `1e5`.
    #[arg(long, default_value = "1e5", value_parser = parse_count)]
    budget: usize,
    #[arg(long, env = "CPPF_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
}

enum Failure {
    Usage(String),
    Lib(Error),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CmdResult = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_count(s: &str) -> Result<usize, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !(v >= 0.0) || v.fract() != 0.0 || v > 1e15 {
        return Err(format!("`{s}` is not a non-negative integer"));
    }
    Ok(v as usize)
}

fn parse_grid(g: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = g.split(':').collect();
    let bad = || usage(format!("--grid expects start:end:count, got `{g}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].parse().map_err(|_| bad())?;
    let b: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    match n {
        0 => Err(bad()),
        1 => Ok(vec![a]),
        _ => Ok((0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()),
    }
}

fn parse_model(s: &str) -> Result<ModelSpec, Failure> {
    s.parse::<ModelSpec>()
        .map_err(|e| usage(format!("--model: {e}")))
}

fn log_config(config: serde_json::Value) {
    eprintln!("config: {config}");
}

fn write_out(text: &str) -> CmdResult {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| usage(format!("cannot write output: {e}")))
}

fn density(a: DensityArgs) -> CmdResult {
    let spec = parse_model(&a.model)?;
    let taus = match (&a.grid, a.tau.is_empty()) {
        (Some(g), _) => parse_grid(g)?,
        (None, false) => a.tau.clone(),
        (None, true) => return Err(usage("give --grid or --tau")),
    };
    log_config(json!({
        "command": "density", "model": a.model, "t": a.t, "x": a.x, "n": a.n,
        "k": a.k, "i": a.i, "j": a.j, "s": a.s, "points": taus.len(),
    }));
    let eval: Box<dyn Fn(f64) -> feller_cpp::Result<f64>> = match &spec {
        ModelSpec::Feller { alpha } => {
            let x =
                a.x.ok_or_else(|| usage("feller:alpha=.. without nu needs --x"))?;
            if a.n.is_some() {
                return Err(usage(
                    "--n does not apply to a Feller model conditioned on --x",
                ));
            }
            let setting = FellerSetting::new(*alpha, a.t)?.with_x(x)?;
            match (a.k, a.i, a.j, a.s) {
                (Some(k), None, None, None) => {
                    Box::new(move |tau| feller_marginal_tk(&setting, k, tau))
                }
                (None, Some(i), Some(j), Some(s)) => {
                    Box::new(move |tau| feller_cond_ti_given_tj(&setting, i, j, s, tau))
                }
                _ => return Err(usage("give --k, or --i with --j and --s")),
            }
        }
        ModelSpec::Node(model) => {
            if a.x.is_some() {
                return Err(usage(format!(
                    "--x only applies to feller:alpha=A without nu, not {model}"
                )));
            }
            let (model, t) = (model.clone(), a.t);
            match (a.k, a.i, a.j, a.s) {
                (Some(k), None, None, None) => {
                    let n =
                        a.n.ok_or_else(|| usage("--k needs --n for a node-height model"))?;
                    Box::new(move |tau| marginal_density_tk(&model, t, n, k, tau))
                }
                (None, Some(i), Some(j), Some(s)) => {
                    Box::new(move |tau| cond_density_ti_given_tj(&model, t, i, j, s, tau))
                }
                _ => return Err(usage("give --k, or --i with --j and --s")),
            }
        }
    };
    let mut out = String::from("tau,value\n");
    for tau in taus {
        out.push_str(&format!("{},{}\n", fmt17(tau), fmt17(eval(tau)?)));
    }
    write_out(&out)
}

fn regime_of(regime: Regime, t: Option<f64>) -> Result<StemConditioning, Failure> {
    Ok(match regime {
        Regime::Fixed => StemConditioning::FixedStem {
            t: t.ok_or_else(|| usage("--regime fixed needs --t"))?,
        },
        Regime::Unif => StemConditioning::UniformPrior {
            t: t.unwrap_or(f64::INFINITY),
        },
        Regime::RootInf => {
            if t.is_some() {
                return Err(usage("--t does not apply to --regime root-inf"));
            }
            StemConditioning::RootAtInfinity
        }
    })
}

fn moments(a: MomentsArgs) -> CmdResult {
    let model = match (&a.model, a.gamma) {
        (Some(s), None) => match parse_model(s)? {
            ModelSpec::Node(m) => m,
            ModelSpec::Feller { .. } => {
                return Err(usage(
                    "moments need a node-height model; add nu to the Feller spec",
                ))
            }
        },
        (None, Some(g)) => NodeHeightModel::wiuf(a.delta.unwrap_or(1.0), g)?,
        _ => return Err(usage("give --model or --gamma (with optional --delta)")),
    };
    let regime = regime_of(a.regime, a.t)?;
    let kind = match a.kind {
        Kind::Waiting => MomentKind::Waiting,
        Kind::Coalescent => MomentKind::Coalescent,
    };
    log_config(json!({
        "command": "moments", "model": model.to_string(), "n": a.n, "regime": regime,
        "kind": kind, "verify": a.verify,
    }));
    let table = MomentTable::for_model(&model, a.n, regime, kind)?;
    write_out(&match a.format {
        TableFormat::Csv => table.to_csv(),
        TableFormat::Json => table.to_json() + "\n",
    })?;
    if a.verify {
        let waiting = match kind {
            MomentKind::Waiting => table,
            MomentKind::Coalescent => {
                MomentTable::for_model(&model, a.n, regime, MomentKind::Waiting)?
            }
        };
        let (route, reference) = verification_route(&model, a.n, regime)?;
        let mut worst: f64 = 0.0;
        for (k, v) in &waiting.values {
            let r = reference(*k)?;
            worst = worst.max(((v - r) / r).abs());
        }
        eprintln!("verify: max relative mismatch {worst:.3e} against {route} (tolerance {VERIFY_TOLERANCE:e})");
        if !(worst <= VERIFY_TOLERANCE) {
            return Err(Failure::Verification(format!(
                "moments differ from {route} by {worst:.3e}"
            )));
        }
    }
    Ok(())
}

type Reference = Box<dyn Fn(usize) -> feller_cpp::Result<f64>>;

fn verification_route(
    model: &NodeHeightModel,
    n: usize,
    regime: StemConditioning,
) -> Result<(&'static str, Reference), Failure> {
    let m = model.clone();
    Ok(match regime {
        StemConditioning::FixedStem { t } => (
            "the fixed-stem recursion",
            Box::new(move |k| expected_wk_recursive(&m, t, n, k)),
        ),
        StemConditioning::UniformPrior { t } if t.is_infinite() => match model.to_wiuf_form() {
            Ok((delta, gamma)) if model.total_mass() == 1.0 => {
                let exact = wiuf_unif_waiting_exact(delta, gamma, n)?;
                (
                    "the exact-arithmetic recursion",
                    Box::new(move |k| Ok(exact[k - 1])),
                )
            }
            _ => (
                "the uniform-prior recursion",
                Box::new(move |k| expected_wk_unif_recursive(&m, n, k, t)),
            ),
        },
        StemConditioning::UniformPrior { t } => (
            "the uniform-prior recursion",
            Box::new(move |k| expected_wk_unif_recursive(&m, n, k, t)),
        ),
        StemConditioning::RootAtInfinity => {
            let times = MomentTable::for_model(model, n, regime, MomentKind::Coalescent)?;
            (
                "differences of quadrature coalescent times",
                Box::new(move |k| {
                    let next = if k == n {
                        0.0
                    } else {
                        times.get(k + 1).unwrap_or(f64::NAN)
                    };
                    Ok(times.get(k).unwrap_or(f64::NAN) - next)
                }),
            )
        }
    })
}

enum Setting {
    Node(NodeHeightModel),
    Feller(FellerSetting),
    Yule { delta: f64, gamma: f64 },
}

impl Setting {
    fn label(&self) -> String {
        match self {
            Setting::Node(m) => m.to_string(),
            Setting::Feller(s) => format!("feller:alpha={},x={}", s.alpha, s.x.unwrap_or(f64::NAN)),
            Setting::Yule { delta, gamma } => format!("wiuf:delta={delta},gamma={gamma}"),
        }
    }
}

fn simulate(a: SimulateArgs) -> CmdResult {
    let settings: Vec<Setting> = match (&a.model, a.gamma.is_empty()) {
        (Some(s), true) => vec![match parse_model(s)? {
            ModelSpec::Node(m) => {
                if a.x.is_some() {
                    return Err(usage(format!(
                        "--x only applies to feller:alpha=A without nu, not {m}"
                    )));
                }
                Setting::Node(m)
            }
            ModelSpec::Feller { alpha } => {
                let x =
                    a.x.ok_or_else(|| usage("feller:alpha=.. without nu needs --x"))?;
                let t = a.t.ok_or_else(|| usage("a Feller k-sample needs --t"))?;
                Setting::Feller(FellerSetting::new(alpha, t)?.with_x(x)?)
            }
        }],
        (None, false) => {
            if a.x.is_some() || a.t.is_some() {
                return Err(usage(
                    "--gamma simulates trees rooted at infinity; --x and --t do not apply",
                ));
            }
            a.gamma
                .iter()
                .map(|&gamma| Setting::Yule {
                    delta: a.delta,
                    gamma,
                })
                .collect()
        }
        _ => return Err(usage("give --model or --gamma")),
    };
    if a.summary && a.n.is_none() {
        return Err(usage("--summary needs a fixed sample size --n"));
    }
    if a.replicates == 0 {
        return Err(usage("--replicates must be at least 1"));
    }
    log_config(json!({
        "command": "simulate", "settings": settings.iter().map(Setting::label).collect::<Vec<_>>(),
        "n": a.n, "t": a.t, "conditioning": if a.gamma.is_empty() { a.conditioning.to_possible_value().map(|v| v.get_name().to_string()) } else { Some("root-inf".into()) },
        "replicates": a.replicates, "seed": a.seed, "summary": a.summary,
    }));
    let mut out = String::new();
    if a.summary {
        out.push_str("setting,k,mean,se\n");
    }
    for (block, setting) in settings.iter().enumerate() {
        let base = RngState::new(a.seed.wrapping_add(block as u64), 0);
        let trees = run_replicates(base, 0..a.replicates, |r| draw(setting, &a, r))?;
        if a.summary {
            summarise(&mut out, &setting.label(), &trees, a.n.unwrap_or(0));
            continue;
        }
        for (rep, tree) in trees.iter().enumerate() {
            match a.format {
                TreeFormat::Newick => {
                    out.push_str(&tree.to_newick(a.precision));
                    out.push('\n');
                }
                TreeFormat::Json => {
                    let line = json!({
                        "setting": setting.label(), "replicate": rep, "tree": tree,
                        "plot": tree.plot_coordinates(None)?,
                    });
                    out.push_str(&line.to_string());
                    out.push('\n');
                }
            }
        }
    }
    write_out(&out)
}

fn draw(
    setting: &Setting,
    a: &SimulateArgs,
    r: &mut ReplicateRng,
) -> feller_cpp::Result<CoalescentTree> {
    let need_n = || {
        a.n.ok_or(Error::Domain("this conditioning needs --n".into()))
    };
    match setting {
        Setting::Yule { delta, gamma } => simulate_yule_transform(*delta, *gamma, need_n()?, r),
        Setting::Feller(s) => simulate_feller_ksample(s, need_n()?, r),
        Setting::Node(m) => match a.conditioning {
            Conditioning::Fixed => {
                let t =
                    a.t.ok_or(Error::Domain("--conditioning fixed needs --t".into()))?;
                match a.n {
                    Some(n) => simulate_cpp_given_n(m, t, n, r),
                    None => simulate_cpp(m, t, r),
                }
            }
            Conditioning::Unif => simulate_unif_prior(m, need_n()?, r),
            Conditioning::RootInf => simulate_root_infinity(m, need_n()?, r),
        },
    }
}

fn summarise(out: &mut String, label: &str, trees: &[CoalescentTree], n: usize) {
    let first = if trees.iter().any(|t| t.stem_age().is_infinite()) {
        2
    } else {
        1
    };
    for k in first..=n {
        let w: Vec<f64> = trees.iter().map(|t| t.waiting_time(k)).collect();
        let (mean, se) = if w.len() > 1 {
            mean_se(&w)
        } else {
            (w[0], f64::NAN)
        };
        out.push_str(&format!("\"{label}\",{k},{},{}\n", fmt17(mean), fmt17(se)));
    }
}

fn verify(a: VerifyArgs) -> CmdResult {
    let mc = McConfig {
        seed: a.seed,
        budget: a.budget,
    };
    log_config(
        json!({"command": "verify", "suite": format!("{:?}", a.suite), "budget": a.budget, "seed": a.seed}),
    );
    let reports = run_suite(a.suite, &mc)?;
    let mut out = String::new();
    for r in &reports {
        out.push_str(&r.summary());
        out.push('\n');
        for c in &r.checks {
            out.push_str(&c.line());
            out.push('\n');
        }
    }
    write_out(&out)?;
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.criterion)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "failed: {}",
            failed.join(", ")
        )))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numerical { .. } | Error::DegeneratePole(..) | Error::CapExceeded { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Density(a) => density(a),
        Command::Moments(a) => moments(a),
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(4)
        }
    }
}
