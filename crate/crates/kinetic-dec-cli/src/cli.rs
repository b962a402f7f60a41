use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{error::ErrorKind, Args, Parser, Subcommand};
use kinetic_dec::cases::{self, Case, CaseResult, ConvergenceRow, RunConfig};
use kinetic_dec::fourier::{stability_raster, CflSearch};
use kinetic_dec::solver::Stabilizer;
use kinetic_dec::systems::ConservationLaw;
use serde_json::json;

use crate::config::{echo, Manifest};
use crate::io;
use crate::CliError;

pub const THREADS_ENV: &str = "KINETIC_DEC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "kinetic-dec", version, about = "Kinetic relaxation solver with defect-correction time stepping")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one case to its final time.
    Run(RunArgs),
    /// Run a case on a ladder of doubled grids and report observed orders.
    Converge(ConvergeArgs),
    /// Von Neumann stability: maximum CFL and an amplification raster.
    Stability(StabilityArgs),
    /// List the built-in cases.
    Cases,
}

#[derive(Debug, Args)]
struct SchemeArgs {
    /// advection | vortex | sod | strong-shock
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// Final time.
    #[arg(long = "T", allow_negative_numbers = true)]
    final_time: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    cfl: Option<f64>,
    /// Relaxation time.
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    /// 1, 2 or 4.
    #[arg(long)]
    time_order: Option<usize>,
    /// 1 to 4.
    #[arg(long)]
    space_order: Option<usize>,
    /// Number of corrections (default: time order + 1).
    #[arg(long)]
    iterations: Option<usize>,
    /// none | limiter | mood
    #[arg(long)]
    stabilizer: Option<String>,
    /// four | general
    #[arg(long)]
    family: Option<String>,
    /// Velocity rings of the general family.
    #[arg(long = "J")]
    rings: Option<usize>,
    /// Directions per quadrant of the general family.
    #[arg(long = "Nprime")]
    directions: Option<usize>,
    /// Ratio of λ to the largest characteristic speed.
    #[arg(long, allow_negative_numbers = true)]
    lambda_safety: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// sqrt2/2 | sqrt3/2
    #[arg(long)]
    vortex_drift: Option<String>,
    /// Limiter bound M.
    #[arg(long, allow_negative_numbers = true)]
    limiter_m: Option<f64>,
    /// Limiter margin α.
    #[arg(long, allow_negative_numbers = true)]
    limiter_alpha: Option<f64>,
    /// `key = value` manifest or a previous metadata.json; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl SchemeArgs {
    fn manifest(&self) -> Result<Manifest, CliError> {
        let mut m = match &self.config {
            Some(p) => Manifest::load(p)?,
            None => Manifest::default(),
        };
        m.merge(&Manifest {
            case: self.case.clone(),
            nx: self.nx,
            ny: self.ny,
            final_time: self.final_time,
            cfl: self.cfl,
            eps: self.eps,
            time_order: self.time_order,
            space_order: self.space_order,
            iterations: self.iterations,
            stabilizer: self.stabilizer.clone(),
            family: self.family.clone(),
            rings: self.rings,
            directions: self.directions,
            lambda_safety: self.lambda_safety,
            gamma: self.gamma,
            vortex_drift: self.vortex_drift.clone(),
            limiter_m: self.limiter_m,
            limiter_alpha: self.limiter_alpha,
        });
        Ok(m)
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
}

#[derive(Debug, Args)]
struct ConvergeArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Number of grids; `--nx` (default 20) is the coarsest.
    #[arg(long, default_value_t = 3)]
    levels: usize,
}

#[derive(Debug, Args)]
struct StabilityArgs {
    #[arg(long, default_value_t = 4)]
    time_order: usize,
    #[arg(long, default_value_t = 4)]
    space_order: usize,
    /// Order of the y operator (default: same as x).
    #[arg(long)]
    space_order_y: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Phases per direction.
    #[arg(long, default_value_t = 1024)]
    n_theta: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
    re_min: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    re_max: f64,
    #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
    im_min: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    im_max: f64,
    /// Raster samples per axis.
    #[arg(long, default_value_t = 201)]
    raster_n: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let _ = e.print();
            return 1;
        }
    };
    match configure_threads().and_then(|_| dispatch(cli.cmd, stdout)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("kinetic-dec: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
    // A pool may already exist when called repeatedly in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(cmd: Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Run(a) => {
            let cfg = a.scheme.manifest()?.resolve()?;
            run_case(&cfg, &a.scheme.out, stdout)
        }
        Command::Converge(a) => {
            let mut m = a.scheme.manifest()?;
            if m.nx.is_none() {
                m.nx = Some(20);
            }
            m.ny = None;
            let cfg = m.resolve()?;
            converge(&cfg, a.levels, &a.scheme.out, stdout)
        }
        Command::Stability(a) => stability(&a, stdout),
        Command::Cases => {
            writeln!(stdout, "{:<13} {:<18} {:>7} {:>7}", "case", "domain", "T", "safety")?;
            for c in Case::ALL {
                let h = c.half_width();
                writeln!(
                    stdout,
                    "{:<13} {:<18} {:>7} {:>7}",
                    c.name(),
                    format!("[-{h}, {h}]^2"),
                    c.default_final_time(),
                    c.default_lambda_safety()
                )?;
            }
            Ok(())
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn metadata(cfg: &RunConfig, wall: f64) -> serde_json::Value {
    let g = cfg.case.grid(cfg.nx, cfg.ny).expect("validated config");
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    json!({
        "config": echo(cfg),
        "grid": {"nx": g.nx, "ny": g.ny, "x0": g.x0, "x1": g.x1, "y0": g.y0, "y1": g.y1, "dx": g.dx(), "dy": g.dy()},
        "wall_time_s": wall,
        "git_describe": env!("KINETIC_DEC_GIT_DESCRIBE"),
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix": stamp,
    })
}

fn run_case(cfg: &RunConfig, out: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let grid = cfg.case.grid(cfg.nx, cfg.ny)?;
    let mut counts = vec![0u32; grid.nodes()];
    let t0 = Instant::now();
    let res = cases::run_with(cfg, |_, rep| {
        if let Some(f) = &rep.flags {
            for (c, &q) in counts.iter_mut().zip(&f.quad) {
                *c += u32::from(q);
            }
        }
    })?;
    let wall = t0.elapsed().as_secs_f64();
    write_outputs(cfg, &res, &counts, wall, out)?;
    writeln!(
        stdout,
        "{} {}x{} T={} steps={} conservation={:.3e}{}",
        cfg.case.name(),
        cfg.nx,
        cfg.ny,
        res.final_time,
        res.steps,
        res.conservation_defect(),
        match &res.errors {
            Some(e) => format!(" linf={:.6e}", e[0].linf),
            None => String::new(),
        }
    )?;
    Ok(())
}

fn write_outputs(cfg: &RunConfig, res: &CaseResult, counts: &[u32], wall: f64, out: &Path) -> Result<(), CliError> {
    let sys = cfg.case.system(cfg.gamma)?;
    io::write_field_csv(&res.primitive, sys.primitive_names(), create(out, "field.csv")?)?;
    io::write_field_csv(&res.conserved, sys.conserved_names(), create(out, "conserved.csv")?)?;
    if cfg.scheme.stabilizer == Stabilizer::Mood {
        io::write_flags_csv(&res.flags, create(out, "flags.csv")?)?;
        io::write_flag_map_csv(res.conserved.grid(), counts, create(out, "flag_map.csv")?)?;
    }
    let mut meta = metadata(cfg, wall);
    meta["steps"] = json!(res.steps);
    meta["final_time"] = json!(res.final_time);
    meta["initial_totals"] = json!(res.initial_totals);
    meta["final_totals"] = json!(res.final_totals);
    meta["conservation_defect"] = json!(res.conservation_defect());
    meta["fallbacks"] = json!(res.fallbacks());
    if let Some(errs) = &res.errors {
        let names = sys.primitive_names();
        meta["errors"] = errs
            .iter()
            .zip(names)
            .map(|(e, n)| (n.to_string(), json!({"l1": e.l1, "l2": e.l2, "linf": e.linf})))
            .collect::<serde_json::Map<_, _>>()
            .into();
    }
    let mut w = create(out, "metadata.json")?;
    serde_json::to_writer_pretty(&mut w, &meta)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn converge(cfg: &RunConfig, levels: usize, out: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    if levels < 2 {
        return Err(CliError::Config("a convergence study needs at least 2 levels".into()));
    }
    let ns: Vec<usize> = (0..levels).map(|k| cfg.nx << k).collect();
    let t0 = Instant::now();
    let rows = cases::convergence_study(cfg, &ns)?;
    let wall = t0.elapsed().as_secs_f64();
    io::write_convergence_csv(&rows, create(out, "convergence.csv")?)?;
    let mut meta = metadata(cfg, wall);
    meta["levels"] = json!(ns);
    let mut w = create(out, "metadata.json")?;
    serde_json::to_writer_pretty(&mut w, &meta)?;
    writeln!(w)?;
    print_table(&rows, stdout)
}

fn print_table(rows: &[ConvergenceRow], stdout: &mut dyn Write) -> Result<(), CliError> {
    writeln!(stdout, "{:>6} {:>10} {:>12} {:>6} {:>12} {:>6} {:>12} {:>6}", "n", "h", "L1", "slope", "L2", "slope", "Linf", "slope")?;
    for r in rows {
        let s = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into());
        writeln!(
            stdout,
            "{:>6} {:>10.6} {:>12.4e} {:>6} {:>12.4e} {:>6} {:>12.4e} {:>6}",
            r.n,
            r.h,
            r.errors.l1,
            s(r.slopes.map(|n| n.l1)),
            r.errors.l2,
            s(r.slopes.map(|n| n.l2)),
            r.errors.linf,
            s(r.slopes.map(|n| n.linf))
        )?;
    }
    Ok(())
}

fn stability(a: &StabilityArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let iterations = a.iterations.unwrap_or(a.time_order + 1);
    let search = CflSearch {
        space_y: a.space_order_y.unwrap_or(a.space_order),
        tol: a.tol,
        n_theta: a.n_theta,
        ..CflSearch::new(a.time_order, a.space_order, iterations)
    };
    let one_d = search.one_d().run()?;
    let two_d = search.run()?;
    writeln!(
        stdout,
        "DeC({},{}) space {}x{}: max_cfl_1d={one_d:.3} max_cfl_2d={two_d:.3}",
        a.time_order, iterations, search.space_x, search.space_y
    )?;
    let cells = stability_raster(a.time_order, iterations, (a.re_min, a.re_max), (a.im_min, a.im_max), a.raster_n)?;
    io::write_raster_csv(&cells, create(&a.out, "stability_raster.csv")?)?;
    Ok(())
}
