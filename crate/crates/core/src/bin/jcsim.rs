use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jcsim::fmt::float;
use jcsim::lindblad::SystemParams;
use jcsim::observables::{
    find_peaks, photon_number, q_function, qubit_moments, reduce_cavity, QGridSidecar,
};
use jcsim::pipeline::{
    parse_config, reproduce_figure, run_sweep, FigureId, FigureSpec, RunConfig, SolverConfig,
};
use jcsim::semiclassical::{
    kerr_roots, mb_steady_roots, neoclassical_roots, phase_bistable, resonance_amplitude,
    write_branches_csv, ResonanceVariant, SemiclassicalBranch,
};
use jcsim::steady::Method;
use jcsim::JcError;

#[derive(Parser, Debug)]
#[command(
    name = "jcsim",
    version,
    about = "Driven, damped Jaynes-Cummings steady states and their semiclassical limits"
)]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Steady-state density matrix, ⟨n⟩ and qubit moments.
    Steady(SteadyArgs),
    /// Husimi Q function of the cavity and its peaks.
    Qfunc(QfuncArgs),
    /// Semiclassical fixed points.
    Semiclassical(SemiArgs),
    /// One-parameter sweep described by a config file.
    Sweep(SweepArgs),
    /// Regenerate the data of one figure.
    Figure(FigureArgs),
}

#[derive(Args, Debug, Default)]
struct SystemFlags {
    /// Config file with [system], [solver], [grid] and [sweep] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    g: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long = "eps-d", allow_negative_numbers = true)]
    eps_d: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    dwc: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct SolverFlags {
    /// Fock cutoff, or `auto` to grow it until ⟨n⟩ settles.
    #[arg(long, value_parser = parse_nmax)]
    nmax: Option<NMax>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    method: Option<Method>,
}

#[derive(Clone, Copy, Debug)]
enum NMax {
    Auto,
    Fixed(usize),
}

fn parse_nmax(s: &str) -> Result<NMax, String> {
    if s == "auto" {
        return Ok(NMax::Auto);
    }
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(NMax::Fixed(n)),
        _ => Err(format!("expected a positive integer or `auto`, got `{s}`")),
    }
}

#[derive(Args, Debug)]
struct SteadyArgs {
    #[command(flatten)]
    system: SystemFlags,
    #[command(flatten)]
    solver: SolverFlags,
    /// Directory for rho.csv and steady.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct QfuncArgs {
    #[command(flatten)]
    system: SystemFlags,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Peak threshold relative to the maximum.
    #[arg(long)]
    threshold: Option<f64>,
    /// Directory for q.csv and q.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    All,
    Mb,
    Neoclassical,
    Kerr,
    Resonance,
    Split,
    PhaseBistable,
}

#[derive(Args, Debug)]
struct SemiArgs {
    #[command(flatten)]
    system: SystemFlags,
    #[arg(long, value_enum, default_value_t = Kind::All)]
    kind: Kind,
    /// CSV file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
    /// CSV file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FigureArgs {
    #[arg(value_parser = parse_figure)]
    figure: FigureId,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    delta_points: Option<usize>,
}

fn parse_figure(s: &str) -> Result<FigureId, String> {
    s.parse()
}

type CliResult<T> = Result<T, JcError>;

fn load(flags: &SystemFlags) -> CliResult<RunConfig> {
    let mut cfg = match &flags.config {
        Some(path) => parse_config(&fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    let p = &mut cfg.system;
    for (slot, v) in [
        (&mut p.g, flags.g),
        (&mut p.kappa, flags.kappa),
        (&mut p.gamma, flags.gamma),
        (&mut p.eps_d, flags.eps_d),
        (&mut p.dwc, flags.dwc),
        (&mut p.delta, flags.delta),
    ] {
        if let Some(v) = v {
            *slot = v;
        }
    }
    cfg.system.validate()?;
    Ok(cfg)
}

fn apply_solver(solver: &mut SolverConfig, flags: &SolverFlags) -> CliResult<()> {
    match flags.nmax {
        Some(NMax::Auto) => solver.n_max = None,
        Some(NMax::Fixed(n)) => solver.n_max = Some(n),
        None => {}
    }
    if let Some(t) = flags.tol {
        solver.tol = t;
    }
    if let Some(m) = flags.method {
        solver.method = m;
    }
    solver.validate()
}

fn writer(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_params(p: &SystemParams) {
    println!(
        "g = {}  kappa = {}  gamma = {}  eps_d = {}  dwc = {}  delta = {}  dwq = {}",
        p.g,
        p.kappa,
        p.gamma,
        p.eps_d,
        p.dwc,
        p.delta,
        p.dwq()
    );
}

fn steady(args: SteadyArgs) -> CliResult<()> {
    let mut cfg = load(&args.system)?;
    apply_solver(&mut cfg.solver, &args.solver)?;
    let sol = cfg.solver.solve(&cfg.system)?;
    let n = photon_number(&sol.rho, sol.space)?;
    let (sm, b) = qubit_moments(&sol.rho, sol.space)?;
    print_params(&cfg.system);
    println!(
        "n_max = {}  method = {}  residual = {:.3e}",
        sol.space.n_max(),
        sol.report.method,
        sol.report.residual_norm
    );
    println!("<n> = {n:.6}");
    println!("<sigma_minus> = {:.6} {:+.6}i", sm.re, sm.im);
    println!("bloch = ({:.6}, {:.6}, {:.6})", b.x, b.y, b.z);

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(File::create(dir.join("rho.csv"))?);
        writeln!(w, "i,j,re,im")?;
        let d = sol.rho.dim();
        for i in 0..d {
            for j in 0..d {
                let v = sol.rho.get(i, j);
                if v.re != 0.0 || v.im != 0.0 {
                    writeln!(w, "{i},{j},{},{}", float(v.re), float(v.im))?;
                }
            }
        }
        w.flush()?;
        let side = serde_json::json!({
            "params": cfg.system,
            "solver": cfg.solver,
            "n_max": sol.space.n_max(),
            "residual": sol.report.residual_norm,
            "mean_photon": n,
            "sigma_minus": sm,
            "bloch": b,
        });
        let mut w = BufWriter::new(File::create(dir.join("steady.json"))?);
        serde_json::to_writer_pretty(&mut w, &side)?;
        writeln!(w)?;
        w.flush()?;
    }
    Ok(())
}

fn qfunc(args: QfuncArgs) -> CliResult<()> {
    let mut cfg = load(&args.system)?;
    apply_solver(&mut cfg.solver, &args.solver)?;
    if let Some(h) = args.half_width {
        cfg.grid.half_width = Some(h);
    }
    if let Some(pts) = args.points {
        cfg.grid.points = pts;
    }
    if let Some(t) = args.threshold {
        cfg.grid.peak_threshold = t;
    }
    cfg.grid.validate()?;
    let sol = cfg.solver.solve(&cfg.system)?;
    let n = photon_number(&sol.rho, sol.space)?;
    let rc = reduce_cavity(&sol.rho, sol.space)?;
    let window = cfg.grid.spec(n);
    let q = q_function(&rc, &window)?;
    let peaks = find_peaks(&q, cfg.grid.peak_threshold)?;
    print_params(&cfg.system);
    println!("n_max = {}  <n> = {n:.6}", sol.space.n_max());
    println!("peaks (threshold {}):", cfg.grid.peak_threshold);
    for pk in &peaks {
        println!(
            "  x = {:.4}  y = {:.4}  Q = {:.4e}  weight = {:.4}",
            pk.x, pk.y, pk.height, pk.weight
        );
    }
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(File::create(dir.join("q.csv"))?);
        q.write_csv(&mut w)?;
        w.flush()?;
        let side = QGridSidecar {
            window,
            n_max: sol.space.n_max(),
            mean_photon: n,
            params: cfg.system,
            peak_threshold: cfg.grid.peak_threshold,
            peaks,
        };
        let mut w = BufWriter::new(File::create(dir.join("q.json"))?);
        serde_json::to_writer_pretty(&mut w, &side)?;
        writeln!(w)?;
        w.flush()?;
    }
    Ok(())
}

/// Branches that do not exist at these parameters are skipped under `all`.
fn optional(r: CliResult<Vec<SemiclassicalBranch>>) -> CliResult<Vec<SemiclassicalBranch>> {
    match r {
        Err(JcError::DeltaZero) | Err(JcError::SingularGammaTilde) => Ok(Vec::new()),
        other => other,
    }
}

fn semiclassical(args: SemiArgs) -> CliResult<()> {
    let cfg = load(&args.system)?;
    let p = &cfg.system;
    let branches = match args.kind {
        Kind::Mb => mb_steady_roots(p)?,
        Kind::Neoclassical => neoclassical_roots(p)?,
        Kind::Kerr => kerr_roots(p)?,
        Kind::Resonance => resonance_amplitude(p, ResonanceVariant::Plain)?,
        Kind::Split => {
            let mut b = resonance_amplitude(p, ResonanceVariant::SplitPlus)?;
            b.extend(resonance_amplitude(p, ResonanceVariant::SplitMinus)?);
            b
        }
        Kind::PhaseBistable => phase_bistable(p)?,
        Kind::All => {
            let mut b = optional(mb_steady_roots(p))?;
            b.extend(neoclassical_roots(p)?);
            b.extend(optional(kerr_roots(p))?);
            b
        }
    };
    let mut w = writer(args.out.as_deref())?;
    write_branches_csv(&branches, &mut w)?;
    w.flush()?;
    Ok(())
}

fn sweep(args: SweepArgs) -> CliResult<()> {
    let mut cfg = parse_config(&fs::read_to_string(&args.config)?)?;
    apply_solver(&mut cfg.solver, &args.solver)?;
    let table = run_sweep(&cfg.sweep_config()?);
    let mut w = writer(args.out.as_deref())?;
    table.write_csv(&mut w)?;
    w.flush()?;
    let failed = table.rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("jcsim: {failed} of {} sweep rows failed", table.rows.len());
    }
    Ok(())
}

fn figure(args: FigureArgs) -> CliResult<()> {
    let mut spec = FigureSpec::new(args.figure, &args.out);
    apply_solver(&mut spec.solver, &args.solver)?;
    if let Some(n) = args.grid_points {
        spec.grid_points = n;
    }
    if let Some(n) = args.delta_points {
        spec.delta_points = n;
    }
    let manifest = reproduce_figure(&spec)?;
    for rec in &manifest.panels {
        println!(
            "{}: n_max = {}  <n> = {:.4}  peaks = {}",
            rec.name,
            rec.n_max,
            rec.mean_photon,
            rec.peaks.len()
        );
    }
    println!(
        "wrote {} files to {}",
        manifest.files.len(),
        args.out.display()
    );
    Ok(())
}

fn is_usage(e: &JcError) -> bool {
    match e {
        JcError::Parse { .. }
        | JcError::Validation { .. }
        | JcError::InvalidParams(_)
        | JcError::DeltaZero
        | JcError::SingularGammaTilde => true,
        JcError::Panel { source, .. } => is_usage(source),
        _ => false,
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("JC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| format!("JC_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    if let Err(msg) = init_threads() {
        eprintln!("jcsim: {msg}");
        return ExitCode::from(2);
    }
    let res = match cli.command {
        Command::Steady(a) => steady(a),
        Command::Qfunc(a) => qfunc(a),
        Command::Semiclassical(a) => semiclassical(a),
        Command::Sweep(a) => sweep(a),
        Command::Figure(a) => figure(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jcsim: {e}");
            ExitCode::from(if is_usage(&e) { 2 } else { 1 })
        }
    }
}
