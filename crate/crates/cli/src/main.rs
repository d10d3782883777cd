//! `y00pe`: sweeps, attack simulations and oracle checks for phase-modulated
//! coherent-state encodings.
//!
//! Exit codes: 0 success, 2 invalid input or guardrail, 3 numerical failure.
//! Errors go to stderr as one JSON object.

mod config;
mod svg;

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use y00_numerics::attacksim::{joint_attack_success, ml_key_search, AttackReport, AttackResult};
use y00_numerics::deltarho::{build_auto, converged_order, SignalParams, DEFAULT_TRUNCATION_TOL};
use y00_numerics::discrimination::{attacker_error_probability, helstrom_two_state, sweep_fan, sweep_wheel, SweepTable};
use y00_numerics::encoding::{fan_angles, wheel_angles, PhaseAlphabet};
use y00_numerics::fockoracle::oracle_error_probability;

const OUT_DIR_ENV: &str = "Y00_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "y00pe", version, about = "Eavesdropper error probabilities for phase-modulated coherent states")]
struct Cli {
    /// JSON run config, e.g. {"command": "pe-wheel", "m": [2, 4], "n_mean": [100]}
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for relative output paths (default: $Y00_OUT_DIR, else cwd)
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the phase alphabet as JSON
    Alphabet(AlphabetArgs),
    /// P_e of wheel alphabets over an (M, <n>) grid
    PeWheel(WheelArgs),
    /// P_e of fan alphabets over an (M_f, <n>) grid at fixed N_B
    PeFan(FanArgs),
    /// Two-state Helstrom bound
    Helstrom(HelstromArgs),
    /// Monte Carlo heterodyne + MAP attack on k independent bits
    McAttack(McArgs),
    /// Exhaustive maximum-likelihood search over a short LFSR key
    MlSearch(MlArgs),
    /// Compare analytic and Fock-space P_e over a grid
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Wheel,
    Fan,
}

#[derive(Args, Debug)]
struct AlphabetArgs {
    #[arg(long, value_enum, default_value = "wheel")]
    kind: Kind,
    /// Number of bases (spokes for a fan)
    #[arg(long)]
    m: usize,
    /// Fan concentration factor (N_B = M f)
    #[arg(long, default_value_t = 1)]
    f: usize,
}

impl AlphabetArgs {
    fn build(&self) -> Result<PhaseAlphabet, Failure> {
        match self.kind {
            Kind::Wheel if self.f != 1 => Err(Failure::usage("--f applies to fan alphabets only")),
            Kind::Wheel => Ok(wheel_angles(self.m)?),
            Kind::Fan => Ok(fan_angles(self.m, self.f)?),
        }
    }
}

#[derive(Args, Debug)]
struct GridOpts {
    /// Mean photon numbers
    #[arg(long = "n-mean", value_delimiter = ',', required = true)]
    n_mean: Vec<f64>,
    /// Truncation tolerance on the dropped sector amplitudes
    #[arg(long, default_value_t = DEFAULT_TRUNCATION_TOL)]
    tol: f64,
    /// Largest coefficient matrix to diagonalize
    #[arg(long, default_value_t = 4001)]
    max_dim: usize,
    /// CSV output (stdout if absent)
    #[arg(long)]
    csv: Option<PathBuf>,
    /// SVG chart output
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Logarithmic x axis in the chart
    #[arg(long)]
    log_x: bool,
}

#[derive(Args, Debug)]
struct WheelArgs {
    /// Numbers of bases
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<usize>,
    #[command(flatten)]
    grid: GridOpts,
}

#[derive(Args, Debug)]
struct FanArgs {
    /// Number of phase levels per half circle
    #[arg(long)]
    nb: usize,
    /// Numbers of spokes; each must divide N_B
    #[arg(long, value_delimiter = ',', required = true)]
    mf: Vec<usize>,
    #[command(flatten)]
    grid: GridOpts,
}

#[derive(Args, Debug)]
struct HelstromArgs {
    #[arg(long = "n-mean")]
    n_mean: f64,
    /// Phase separation: a number or an expression like pi, pi/2, 3pi/4
    #[arg(long, default_value = "pi")]
    delta_phi: String,
    /// Prior of bit 0
    #[arg(long, default_value_t = 0.5)]
    p0: f64,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AttackOpts {
    #[command(flatten)]
    alphabet: AlphabetArgs,
    #[arg(long = "n-mean")]
    n_mean: f64,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    /// JSON report output (stdout if absent)
    #[arg(long)]
    json: Option<PathBuf>,
    /// Include wall-clock time in the report (breaks byte-identical reruns)
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct McArgs {
    #[command(flatten)]
    attack: AttackOpts,
    /// Bits that must all be decided correctly
    #[arg(long, default_value_t = 1)]
    k_bits: usize,
}

#[derive(Args, Debug)]
struct MlArgs {
    #[command(flatten)]
    attack: AttackOpts,
    #[arg(long)]
    key_bits: u32,
    /// Observed symbols per trial
    #[arg(long, default_value_t = 32)]
    symbols: usize,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Reduced grid: <n> in {0.5, 1, 2}, M in {1, 2, 4}
    #[arg(long)]
    small_grid: bool,
    /// Per-mode Fock cutoff of the oracle
    #[arg(long, default_value_t = 40)]
    n_max: usize,
    #[arg(long, default_value_t = DEFAULT_TRUNCATION_TOL)]
    tol: f64,
    /// Allowed |analytic - oracle|
    #[arg(long, default_value_t = 1e-6)]
    threshold: f64,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: 2, kind: "usage", message: msg.into() }
    }

    fn numerical(msg: impl Into<String>) -> Self {
        Self { code: 3, kind: "numerical", message: msg.into() }
    }
}

impl From<y00_numerics::Error> for Failure {
    fn from(e: y00_numerics::Error) -> Self {
        use y00_numerics::Error as E;
        let (code, kind) = match &e {
            E::Domain(_) => (2, "domain"),
            E::Resource(_) => (2, "resource"),
            E::Numerical { .. } | E::Truncation { .. } | E::Invariant(_) => (3, "numerical"),
            E::Io(_) => (3, "io"),
        };
        Self { code, kind, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self { code: 3, kind: "io", message: e.to_string() }
    }
}

struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn write(&self, p: &Path, contents: &str) -> Result<PathBuf, Failure> {
        let path = self.resolve(p);
        if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents).map_err(|e| Failure {
            code: 3,
            kind: "io",
            message: format!("{}: {e}", path.display()),
        })?;
        Ok(path)
    }

    /// Writes to `p` if given, else prints.
    fn emit(&self, p: Option<&PathBuf>, contents: &str) -> Result<(), Failure> {
        match p {
            Some(p) => {
                let path = self.write(p, contents)?;
                println!("wrote {}", path.display());
            }
            None => print!("{contents}"),
        }
        Ok(())
    }
}

/// Parses `pi`, `-pi/2`, `3pi/4`, `3*pi/4`, `0.25` and the like.
fn parse_angle(s: &str) -> Result<f64, Failure> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let bad = || Failure::usage(format!("cannot parse angle '{s}'"));
    let Some(i) = t.find("pi") else {
        return t.parse::<f64>().map_err(|_| bad());
    };
    let coef = match t[..i].trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let rest = &t[i + 2..];
    let den = match rest {
        "" => 1.0,
        r => r.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
    };
    let v = coef * PI / den;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

fn check_grid(n_mean: &[f64], opts: &GridOpts) -> Result<(), Failure> {
    if !(opts.tol > 0.0 && opts.tol < 1.0) {
        return Err(Failure::usage(format!("--tol must lie in (0, 1), got {}", opts.tol)));
    }
    for &n in n_mean {
        let params = SignalParams::new(n)?;
        let dim = 4 * converged_order(&params, opts.tol)? + 1;
        if dim > opts.max_dim {
            return Err(Failure {
                code: 2,
                kind: "resource",
                message: format!("<n> = {n} needs a {dim}-dimensional matrix, above --max-dim {}", opts.max_dim),
            });
        }
    }
    Ok(())
}

fn finish_sweep(out: &Output, table: &SweepTable, opts: &GridOpts, chart: svg::Chart) -> Result<(), Failure> {
    out.emit(opts.csv.as_ref(), &table.to_csv())?;
    if let Some(p) = &opts.svg {
        let path = out.write(p, &chart.render())?;
        println!("wrote {}", path.display());
    }
    let failed: Vec<String> = table
        .failures()
        .map(|r| format!("M={} n_mean={}: {}", r.m, r.n_mean, r.error.as_deref().unwrap_or("")))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::numerical(format!("{} grid points failed: {}", failed.len(), failed.join("; "))))
    }
}

fn series_by_n(table: &SweepTable, n_mean: &[f64]) -> Vec<svg::Series> {
    n_mean
        .iter()
        .map(|&n| svg::Series {
            label: format!("<n> = {n}"),
            points: table
                .rows
                .iter()
                .filter(|r| r.n_mean == n)
                .filter_map(|r| r.pe.map(|pe| (r.m as f64, pe)))
                .collect(),
        })
        .collect()
}

fn pe_wheel(args: &WheelArgs, out: &Output) -> Result<(), Failure> {
    check_grid(&args.grid.n_mean, &args.grid)?;
    if let Some(&m) = args.m.iter().find(|&&m| m == 0) {
        return Err(Failure::usage(format!("M must be >= 1, got {m}")));
    }
    let table = sweep_wheel(&args.m, &args.grid.n_mean, args.grid.tol)?;
    let chart = svg::Chart {
        title: "Wheel alphabet: eavesdropper error probability".into(),
        x_label: "M".into(),
        y_label: "P_e".into(),
        log_x: args.grid.log_x,
        series: series_by_n(&table, &args.grid.n_mean),
    };
    finish_sweep(out, &table, &args.grid, chart)
}

fn pe_fan(args: &FanArgs, out: &Output) -> Result<(), Failure> {
    check_grid(&args.grid.n_mean, &args.grid)?;
    if args.nb == 0 {
        return Err(Failure::usage("--nb must be >= 1"));
    }
    if let Some(&m) = args.mf.iter().find(|&&m| m == 0 || !args.nb.is_multiple_of(m)) {
        return Err(Failure::usage(format!("M_f = {m} does not divide N_B = {}", args.nb)));
    }
    let table = sweep_fan(args.nb, &args.mf, &args.grid.n_mean, args.grid.tol)?;
    let chart = svg::Chart {
        title: format!("Fan alphabet, N_B = {}: eavesdropper error probability", args.nb),
        x_label: "M_f".into(),
        y_label: "P_e".into(),
        log_x: args.grid.log_x,
        series: series_by_n(&table, &args.grid.n_mean),
    };
    finish_sweep(out, &table, &args.grid, chart)
}

fn helstrom(args: &HelstromArgs, out: &Output) -> Result<(), Failure> {
    let dphi = parse_angle(&args.delta_phi)?;
    let pe = helstrom_two_state(args.n_mean, dphi, args.p0, 1.0 - args.p0)?;
    let doc = json!({
        "n_mean": args.n_mean,
        "delta_phi": dphi,
        "p0": args.p0,
        "p1": 1.0 - args.p0,
        "pe": pe.value,
        "method": pe.method.to_string(),
    });
    out.emit(args.json.as_ref(), &format!("{}\n", serde_json::to_string_pretty(&doc).unwrap()))
}

fn report(opts: &AttackOpts, a: PhaseAlphabet, model: &str, r: &AttackResult) -> AttackReport {
    AttackReport {
        model: model.into(),
        alphabet: a,
        n_mean: opts.n_mean,
        k_bits: None,
        key_bits: None,
        trials: r.trials,
        success_rate: r.success_rate,
        ci95: r.ci95,
        candidates_tried: r.candidates_tried,
        elapsed_seconds: opts.timing.then_some(r.elapsed_seconds),
        seed: opts.seed,
    }
}

fn mc_attack(args: &McArgs, out: &Output) -> Result<(), Failure> {
    let o = &args.attack;
    let a = o.alphabet.build()?;
    let params = SignalParams::new(o.n_mean)?;
    let r = joint_attack_success(args.k_bits, &a, &params, o.trials, o.seed)?;
    let mut rep = report(o, a, "two-mode heterodyne, per-bit MAP over uniform bases", &r);
    rep.k_bits = Some(args.k_bits);
    out.emit(o.json.as_ref(), &format!("{}\n", rep.to_json()))
}

fn ml_search(args: &MlArgs, out: &Output) -> Result<(), Failure> {
    let o = &args.attack;
    let a = o.alphabet.build()?;
    let params = SignalParams::new(o.n_mean)?;
    let r = ml_key_search(args.key_bits, args.symbols, o.trials, &a, &params, o.seed)?;
    let mut rep = report(o, a, "two-mode heterodyne, exhaustive ML key search", &r);
    rep.key_bits = Some(args.key_bits);
    out.emit(o.json.as_ref(), &format!("{}\n", rep.to_json()))
}

fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let (ns, ms): (&[f64], &[usize]) = if args.small_grid {
        (&[0.5, 1.0, 2.0], &[1, 2, 4])
    } else {
        (&[0.5, 1.0, 2.0, 4.0], &[1, 2, 4, 8])
    };
    println!("{:<5} {:>3} {:>3} {:>6} {:>22} {:>22} {:>10}  status", "kind", "M", "N_B", "n_mean", "analytic", "reference", "|diff|");
    let mut failed = 0;
    let mut total = 0;
    let mut line = |kind: &str, m: usize, n_b: usize, n: f64, analytic: f64, reference: f64, threshold: f64| {
        let diff = (analytic - reference).abs();
        let ok = diff <= threshold;
        total += 1;
        if !ok {
            failed += 1;
        }
        println!(
            "{kind:<5} {m:>3} {n_b:>3} {n:>6} {analytic:>22.16e} {reference:>22.16e} {diff:>10.2e}  {}",
            if ok { "pass" } else { "FAIL" }
        );
    };
    for &n in ns {
        let params = SignalParams::new(n)?;
        for &m in ms {
            for a in [wheel_angles(m)?, fan_angles(m, 2)?] {
                let analytic = attacker_error_probability(&build_auto(&a, &params, args.tol)?)?.value;
                let oracle = oracle_error_probability(&a, &params, args.n_max)?.value;
                line(&a.kind().to_string(), m, a.n_b(), n, analytic, oracle, args.threshold);
            }
        }
    }
    let single = wheel_angles(1)?;
    for &n in &[0.25, 1.0, 4.0] {
        let analytic = attacker_error_probability(&build_auto(&single, &SignalParams::new(n)?, args.tol)?)?.value;
        let closed = helstrom_two_state(n, PI, 0.5, 0.5)?.value;
        line("hel", 1, 1, n, analytic, closed, 1e-8);
    }
    println!("verify: {}/{total} checks passed", total - failed);
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::numerical(format!("{failed} of {total} verification checks failed")))
    }
}

fn parse(argv: Vec<String>) -> Result<Option<Cli>, Failure> {
    match Cli::try_parse_from(&argv) {
        Ok(cli) => Ok(Some(cli)),
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            Ok(None)
        }
        Err(e) => Err(Failure::usage(e.render().to_string().trim().to_string())),
    }
}

fn run() -> Result<(), Failure> {
    let argv: Vec<String> = std::env::args().collect();
    let Some(mut cli) = parse(argv.clone())? else {
        return Ok(());
    };
    if let Some(cfg) = cli.config.clone() {
        if cli.command.is_some() {
            return Err(Failure::usage("give either --config or a subcommand, not both"));
        }
        let text = fs::read_to_string(&cfg).map_err(|e| Failure::usage(format!("{}: {e}", cfg.display())))?;
        let mut args = vec![argv[0].clone()];
        args.extend(config::config_to_args(&text).map_err(Failure::usage)?);
        if let Some(d) = &cli.out_dir {
            args.push("--out-dir".into());
            args.push(d.display().to_string());
        }
        let Some(parsed) = parse(args)? else {
            return Ok(());
        };
        if parsed.config.is_some() {
            return Err(Failure::usage("a config file cannot name another config"));
        }
        cli = parsed;
    }
    let out = Output {
        dir: cli.out_dir.clone().or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)),
    };
    match cli.command {
        None => Err(Failure::usage("no subcommand given (see --help)")),
        Some(Command::Alphabet(a)) => {
            println!("{}", a.build()?.to_json());
            Ok(())
        }
        Some(Command::PeWheel(a)) => pe_wheel(&a, &out),
        Some(Command::PeFan(a)) => pe_fan(&a, &out),
        Some(Command::Helstrom(a)) => helstrom(&a, &out),
        Some(Command::McAttack(a)) => mc_attack(&a, &out),
        Some(Command::MlSearch(a)) => ml_search(&a, &out),
        Some(Command::Verify(a)) => verify(&a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", json!({ "error": f.kind, "message": f.message, "exit_code": f.code }));
            ExitCode::from(f.code)
        }
    }
}
