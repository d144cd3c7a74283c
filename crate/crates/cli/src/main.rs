use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use keller_core::chart::{blowup_demo, ChartError, Truncation, DEFAULT_WORKING_ORDER};
use keller_core::flow::{integrate_batch, FlowSpec, Integrator, RunStatus, Trajectory};
use keller_core::galois::{check_equivariance, derive_sigma};
use keller_core::jacrep::{perturb, verify_identity_hh, verify_lemma100, verify_theorem_k, Driven, Status, Verification};
use keller_core::json::{parse_map, parse_registry, ExperimentConfig};
use keller_core::registry::Registry;
use keller_core::{fmt_rat, trajcsv, PolyMap, CF};

#[derive(Parser)]
#[command(name = "keller", version, about = "Polynomial maps, u-gamma representations and inverse-dynamics flows")]
struct Cli {
    /// Registry file whose entries are added to the built-in examples.
    #[arg(long, global = true, value_name = "PATH")]
    registry: Option<PathBuf>,
    /// Start from an empty registry instead of the built-in one.
    #[arg(long, global = true)]
    no_builtin: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the Jacobian matrix and determinant of a map and whether it is Keller.
    Check {
        /// Registry name or path to a map JSON file.
        map: String,
    },
    /// Integrate one or more experiments and write their trajectories as CSV.
    Simulate(SimulateArgs),
    /// Check a symbolic identity on a registry example.
    Verify(VerifyArgs),
    /// Series demonstrations.
    Series {
        #[command(subcommand)]
        cmd: SeriesCmd,
    },
    /// List registry examples and experiments.
    ListExamples,
}

#[derive(Args)]
struct SimulateArgs {
    /// Registry experiment names.
    experiments: Vec<String>,
    /// Experiment config JSON file (repeatable).
    #[arg(long, value_name = "PATH")]
    config: Vec<PathBuf>,
    /// Output CSV path; a directory when several experiments run.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    max_steps: Option<u64>,
    /// Record every k-th step.
    #[arg(long)]
    stride: Option<u64>,
    #[arg(long, value_parser = parse_integrator)]
    integrator: Option<Integrator>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Identity {
    Hh,
    TheoremK,
    Lemma100,
    Galois,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    identity: Identity,
    /// Registry example with a u-gamma representation.
    example: String,
    /// Add gamma*u^-I to the first image component before checking.
    #[arg(long, value_name = "I", allow_hyphen_values = true)]
    perturb: Option<i64>,
    /// Expansion order in 1/u.
    #[arg(long, default_value_t = 16)]
    order: i64,
    /// Power of the root of unity used by the galois check.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    sigma: i64,
    /// Print the verification record as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum SeriesCmd {
    /// Resolve the planar blowup example and print its chart limits.
    DemoBlowup {
        /// Feed the full composed series instead of the truncated one.
        #[arg(long, conflicts_with = "truncate_at")]
        no_truncate: bool,
        /// Truncate after this exponent instead of the first parameter-dependent one.
        #[arg(long, value_name = "K")]
        truncate_at: Option<i64>,
        /// Working order of the reversion.
        #[arg(long, default_value_t = DEFAULT_WORKING_ORDER)]
        order: i64,
    },
}

fn parse_integrator(s: &str) -> Result<Integrator, String> {
    s.parse()
}

/// Error carrying its exit code.
struct Failure {
    code: u8,
    msg: String,
}

fn input_error(msg: impl ToString) -> Failure {
    Failure { code: 2, msg: msg.to_string() }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    // die quietly on a closed pipe, like other command-line tools
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let out = run(cli);
    match out {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    let registry = load_registry(cli.registry.as_deref(), cli.no_builtin)?;
    match cli.cmd {
        Cmd::Check { map } => cmd_check(&registry, &map),
        Cmd::Simulate(args) => cmd_simulate(&registry, args),
        Cmd::Verify(args) => cmd_verify(&registry, args),
        Cmd::Series { cmd: SeriesCmd::DemoBlowup { no_truncate, truncate_at, order } } => {
            let t = match (no_truncate, truncate_at) {
                (true, _) => Truncation::None,
                (false, Some(k)) => Truncation::At(k),
                (false, None) => Truncation::FirstDependent,
            };
            cmd_demo(t, order)
        }
        Cmd::ListExamples => cmd_list(&registry),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load_registry(path: Option<&Path>, no_builtin: bool) -> Result<Registry, Failure> {
    let mut reg = if no_builtin { Registry::empty() } else { Registry::builtin() };
    if let Some(p) = path {
        let file = parse_registry(&read_file(p)?).map_err(|e| input_error(format!("{}: {e}", p.display())))?;
        reg.extend(&file).map_err(|e| input_error(format!("{}: {e}", p.display())))?;
    }
    Ok(reg)
}

fn write_atomic(path: &Path, data: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(data)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn fmt_cf(z: CF) -> String {
    if z.im.abs() <= 1e-12 * (1.0 + z.re.abs()) {
        format!("{:.6}", z.re)
    } else {
        format!("{:.6}{:+.6}i", z.re, z.im)
    }
}

fn map_lines(f: &PolyMap) -> String {
    let comps: Vec<String> = f.components().iter().map(|p| p.display_with(f.vars()).to_string()).collect();
    format!("({})", comps.join(", "))
}

fn cmd_check(reg: &Registry, map: &str) -> CmdResult {
    let path = Path::new(map);
    let f = if path.is_file() {
        parse_map(&read_file(path)?).map_err(|e| input_error(format!("{map}: {e}")))?
    } else if let Some(ex) = reg.example(map) {
        ex.map.clone()
    } else {
        return Err(input_error(format!("`{map}` is neither a file nor a registry example")));
    };
    let det = f.jacobian_det().map_err(input_error)?;
    let shown = det.display_with(f.vars()).to_string();
    println!("map: {}", map_lines(&f));
    println!("jacobian:\n{}", f.jacobian().display_with(f.vars()));
    println!("Keller: {}, |J| = {shown}", det.is_one());
    Ok(0)
}

fn cmd_simulate(reg: &Registry, args: SimulateArgs) -> CmdResult {
    let mut configs: Vec<(ExperimentConfig, Option<PathBuf>)> = Vec::new();
    for name in &args.experiments {
        let cfg = reg.experiment(name).ok_or_else(|| input_error(format!("unknown experiment `{name}`")))?;
        configs.push((cfg.clone(), None));
    }
    for path in &args.config {
        let cfg = ExperimentConfig::parse(&read_file(path)?).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        configs.push((cfg, path.parent().map(Path::to_path_buf)));
    }
    if configs.is_empty() {
        return Err(input_error("nothing to simulate: name an experiment or pass --config"));
    }
    let batch = configs.len() > 1;
    let mut jobs = Vec::with_capacity(configs.len());
    let mut outputs = Vec::with_capacity(configs.len());
    for (mut cfg, base) in configs {
        if let Some(s) = args.step {
            cfg.step = s;
        }
        if let Some(n) = args.max_steps {
            cfg.max_steps = n;
        }
        if let Some(k) = args.stride {
            cfg.stride = k;
            cfg.schedule = None;
        }
        if let Some(i) = args.integrator {
            cfg.integrator = i;
        }
        let exp = cfg.resolve(reg, base.as_deref()).map_err(|e| input_error(format!("{}: {e}", cfg.name)))?;
        exp.spec.validate().map_err(|e| input_error(format!("{}: {e}", exp.name)))?;
        let default_name = PathBuf::from(format!("{}.csv", exp.name));
        let out = match (&args.out, batch) {
            (Some(p), false) => p.clone(),
            (Some(dir), true) => dir.join(&default_name),
            (None, _) => exp.out.clone().unwrap_or(default_name),
        };
        outputs.push((exp.name.clone(), out));
        jobs.push((exp.spec, exp.x0));
    }
    if batch {
        if let Some(dir) = &args.out {
            fs::create_dir_all(dir).map_err(|e| input_error(format!("{}: {e}", dir.display())))?;
        }
    }
    let results = integrate_batch(&jobs);
    let mut code = 0;
    for (((name, out), (spec, _)), res) in outputs.iter().zip(&jobs).zip(results) {
        match res {
            Ok(traj) => {
                let csv = trajcsv::to_string(&traj);
                write_atomic(out, csv.as_bytes()).map_err(|e| input_error(format!("{}: {e}", out.display())))?;
                print!("{}", summary(name, spec, &traj));
                println!("  wrote {} ({} records)", out.display(), traj.records.len());
            }
            Err(e) => {
                eprintln!("error: {name}: {e}");
                code = 2;
            }
        }
    }
    Ok(code)
}

fn summary(name: &str, spec: &FlowSpec, traj: &Trajectory) -> String {
    let last = traj.last();
    let mut s = String::new();
    let status = match traj.status {
        RunStatus::Completed => "completed".to_string(),
        other => format!("stopped ({other})"),
    };
    let _ = writeln!(s, "{name}: {status} after {} steps, r = {:.6}", traj.steps_taken, last.r);
    let x: Vec<String> = last.x.iter().map(|&z| fmt_cf(z)).collect();
    let _ = writeln!(s, "  x = ({})", x.join(", "));
    let drift = &traj.step_drift;
    for (j, y) in last.y.iter().enumerate() {
        if j == spec.driven {
            let _ = writeln!(s, "  y{} = {} (driven, from {})", j + 1, fmt_cf(*y), fmt_cf(traj.records[0].y[j]));
        } else {
            let d = drift[j].map_or("n/a".to_string(), |d| format!("{d:.3e}"));
            let _ = writeln!(s, "  y{} = {} (conserved, max drift {d})", j + 1, fmt_cf(*y));
        }
    }
    if let (Some(u), Some(g)) = (last.u, last.gamma) {
        let _ = writeln!(s, "  u = {}, gamma = {}", fmt_cf(u), fmt_cf(g));
    }
    s
}

fn report(v: &Verification, json: bool) -> String {
    if json {
        return v.to_json();
    }
    let mut s = format!("{}: {}\n  residual: {}", v.identity, v.status, v.residual);
    for n in &v.notes {
        s.push_str("\n  ");
        s.push_str(n);
    }
    s
}

fn cmd_verify(reg: &Registry, args: VerifyArgs) -> CmdResult {
    let ex = reg.example(&args.example).ok_or_else(|| input_error(format!("unknown example `{}`", args.example)))?;
    let rep = ex.rep.as_ref().ok_or_else(|| input_error(format!("`{}` has no u-gamma representation", ex.name)))?;
    if args.order < 1 {
        return Err(input_error("--order must be positive"));
    }
    let mut exp = rep.expand_image(&ex.map, args.order).map_err(input_error)?;
    if let Some(i) = args.perturb {
        exp = perturb(&exp, i);
    }
    let jdet = ex.map.jacobian_det().map_err(input_error)?;
    let v = match args.identity {
        Identity::Hh => verify_identity_hh(&exp, rep, &jdet).map_err(input_error)?,
        Identity::TheoremK => verify_theorem_k(&exp, rep, Some(&jdet)).map_err(input_error)?,
        Identity::Lemma100 => {
            let driven = if ex.driven == 0 { Driven::A } else { Driven::B };
            verify_lemma100(&exp, rep, &jdet, driven).map_err(input_error)?
        }
        Identity::Galois => {
            let action = derive_sigma(rep, args.sigma).map_err(input_error)?;
            check_equivariance(&exp, rep, &action).map_err(input_error)?
        }
    };
    println!("{}", report(&v, args.json));
    Ok(if v.status == Status::Fail { 1 } else { 0 })
}

fn cmd_demo(t: Truncation, order: i64) -> CmdResult {
    let demo = match blowup_demo(t, order) {
        Ok(d) => d,
        Err(e @ ChartError::DivisionByZeroValuation(_)) => {
            println!("limits: none, {e}");
            println!("limits differ from (u, w, v) = (2, 1, e)");
            return Ok(1);
        }
        Err(e) => return Err(input_error(e)),
    };
    let e = vec!["e".to_string()];
    println!("chain:");
    for st in demo.chain.steps() {
        let side = |(name, c): &(String, keller_core::Rat)| {
            if *c == keller_core::rat(0) {
                name.clone()
            } else {
                format!("({name} - {})", fmt_rat(c))
            }
        };
        println!("  {} = {}/{}", st.name, side(&st.num), side(&st.den));
    }
    println!("t(s) = {}", demo.t_of_s.display_with("s", &e));
    println!("x2(s) = {}", demo.x2_of_s.display_with("s", &e));
    println!("s(z) = {}", demo.s_of_z.display_with("z", &e));
    println!("x2(z) = {}", demo.x2_of_z.display_with("z", &e));
    match demo.first_dependent {
        Some(k) => println!("first e-dependent index: {k}"),
        None => println!("first e-dependent index: none within order {order}"),
    }
    println!("trajectory used: x2 = {}, t = z", demo.used.display_with("z", &e));
    let lim: Vec<String> = demo.limits.iter().map(|(n, p)| format!("{n} -> {}", p.display_with(&e))).collect();
    println!("limits: {}", lim.join(", "));
    if demo.limits_match() {
        println!("limits match (u, w, v) = (2, 1, e)");
        Ok(0)
    } else {
        println!("limits differ from (u, w, v) = (2, 1, e); expected when truncating below the first e-dependent index");
        Ok(1)
    }
}

fn cmd_list(reg: &Registry) -> CmdResult {
    for ex in reg.examples() {
        let det = match ex.map.jacobian_det() {
            Ok(d) => d.display_with(ex.map.vars()).to_string(),
            Err(e) => format!("({e})"),
        };
        let rep = match &ex.rep {
            Some(r) => format!("m = {}, N = {}", r.m(), r.N()),
            None => "none".to_string(),
        };
        println!("{}  arity {}  |J| = {det}  rep: {rep}", ex.name, ex.map.arity());
        println!("    {}", map_lines(&ex.map));
        if !ex.description.is_empty() {
            println!("    {}", ex.description);
        }
    }
    for x in reg.experiments() {
        let what = x.description.as_deref().unwrap_or("");
        println!("experiment {}: {what}", x.name);
    }
    Ok(0)
}
