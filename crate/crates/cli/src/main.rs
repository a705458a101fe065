//! `pam`: moments of the parabolic Anderson model from the command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 bad arguments or config file,
//! 3 domain or configuration error, 4 numerical failure, 5 `validate` found
//! routes outside tolerance.

mod config;
mod report;
mod run;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pam_core::PamError;
use serde_json::json;

use config::{Command, Format, RunConfig, SnapshotFormat, SnapshotSpec};
use report::Report;
use run::{run, RunError};

#[derive(Parser, Debug)]
#[command(
    name = "pam",
    version,
    about = "Moments of the parabolic Anderson model with delta initial data"
)]
struct Cli {
    /// Read the whole run description from a JSON file instead of flags.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    nu: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Emit `log_`-prefixed fields instead of plain values.
    #[arg(long)]
    log_scale: bool,
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    #[arg(long)]
    max_evals: Option<usize>,
}

#[derive(Args, Debug)]
struct Points {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    t: f64,
    /// Comma-separated evaluation points.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "0"
    )]
    x: Vec<f64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Second moment E[u(t,x)u(t,y)].
    Moment2 {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        points: Points,
        /// Second coordinates, one per x; defaults to the diagonal.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Option<Vec<f64>>,
        /// Use the standalone one-point expression.
        #[arg(long)]
        display: bool,
    },
    /// Third moment E[u(t,x)^3] by the one-dimensional integral.
    Moment3 {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        points: Points,
    },
    /// E[u(t,x1)u(t,x2)u(t,x3)] by the triple integral; pass --x x1,x2,x3.
    ThreePoint {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        points: Points,
    },
    /// Direct evaluation of the k-fold contour integral; pass k sorted points.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        points: Points,
        #[arg(long, default_value_t = 1e-8)]
        contour_rel_tol: f64,
        /// Number of points; defaults to the length of --x.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alphas: Option<Vec<f64>>,
        #[arg(long)]
        half_height: Option<f64>,
        #[arg(long)]
        nodes_per_unit: Option<usize>,
    },
    /// Lower and upper bounds on E[u(t,x)^3].
    Bounds {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        points: Points,
    },
    /// Monte Carlo lattice simulation; t is the final time.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        points: Points,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        order: Vec<u32>,
        #[arg(long)]
        half_width: Option<f64>,
        #[arg(long, default_value_t = 401)]
        nx: usize,
        #[arg(long)]
        dt: Option<f64>,
        /// Variance of the Gaussian initial profile; 0 is a lattice delta.
        #[arg(long, default_value_t = 0.0)]
        delta_width: f64,
        #[arg(long, default_value_t = 1000)]
        replicas: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the clipped space-time field of replica 0 here.
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = SnapshotFormat::Csv)]
        snapshot_format: SnapshotFormat,
        #[arg(long, default_value_t = 500.0)]
        clip: f64,
        #[arg(long, default_value_t = 1)]
        time_every: usize,
        #[arg(long, default_value_t = 1)]
        space_every: usize,
    },
    /// Locate the velocity where the third moment stops growing.
    Front {
        #[command(flatten)]
        common: Common,
        /// Comma-separated times used for the extrapolation.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "10,20,40"
        )]
        t: Vec<f64>,
        #[arg(long)]
        alpha_max: Option<f64>,
        #[arg(long, default_value_t = 0.01)]
        alpha_step: f64,
    },
    /// Compare all third-moment routes and the bounds.
    Validate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        points: Points,
        #[arg(long, default_value_t = 1e-8)]
        contour_rel_tol: f64,
    },
}

fn base(command: Command, common: &Common, t: f64) -> RunConfig {
    let mut c = RunConfig::new(command);
    c.params.nu = common.nu;
    c.params.lambda = common.lambda;
    c.params.t = t;
    c.output_format = common.format;
    c.output_path = common.output.clone();
    c.log_scale = common.log_scale;
    c.quadrature.rel_tol = common.rel_tol;
    if let Some(m) = common.max_evals {
        c.quadrature.max_evals = m;
    }
    c
}

fn with_points(command: Command, common: &Common, p: &Points) -> RunConfig {
    let mut c = base(command, common, p.t);
    c.points = p.x.clone();
    c
}

fn from_flags(cmd: Cmd) -> RunConfig {
    match cmd {
        Cmd::Moment2 {
            common,
            points,
            y,
            display,
        } => {
            let mut c = with_points(Command::Moment2, &common, &points);
            c.second_points = y;
            c.one_point_display = display;
            c
        }
        Cmd::Moment3 { common, points } => with_points(Command::Moment3, &common, &points),
        Cmd::ThreePoint { common, points } => with_points(Command::ThreePoint, &common, &points),
        Cmd::Oracle {
            common,
            points,
            contour_rel_tol,
            k,
            alphas,
            half_height,
            nodes_per_unit,
        } => {
            let mut c = with_points(Command::Oracle, &common, &points);
            c.contour.k = k.unwrap_or(points.x.len());
            c.contour.rel_tol = contour_rel_tol;
            c.contour.alphas = alphas;
            c.contour.half_height = half_height;
            c.contour.nodes_per_unit = nodes_per_unit;
            c
        }
        Cmd::Bounds { common, points } => with_points(Command::Bounds, &common, &points),
        Cmd::Simulate {
            common,
            points,
            order,
            half_width,
            nx,
            dt,
            delta_width,
            replicas,
            seed,
            snapshot,
            snapshot_format,
            clip,
            time_every,
            space_every,
        } => {
            let mut c = with_points(Command::Simulate, &common, &points);
            let g = &mut c.grid;
            g.orders = order;
            g.half_width = half_width;
            g.nx = nx;
            g.dt = dt;
            g.delta_width = delta_width;
            g.replicas = replicas;
            g.seed = seed;
            g.snapshot = snapshot.map(|path| SnapshotSpec {
                path,
                format: snapshot_format,
                clip,
                time_every,
                space_every,
            });
            c
        }
        Cmd::Front {
            common,
            t,
            alpha_max,
            alpha_step,
        } => {
            let mut c = base(Command::Front, &common, t.last().copied().unwrap_or(1.0));
            c.front.times = t;
            c.front.alpha_max = alpha_max;
            c.front.alpha_step = alpha_step;
            c
        }
        Cmd::Validate {
            common,
            points,
            contour_rel_tol,
        } => {
            let mut c = with_points(Command::Validate, &common, &points);
            c.contour.rel_tol = contour_rel_tol;
            c
        }
    }
}

fn error_exit(kind: &str, code: u8, message: &str) -> ExitCode {
    let e = json!({ "error": { "kind": kind, "exit_code": code, "message": message } });
    eprintln!("{e}");
    ExitCode::from(code)
}

fn pam_exit(e: &PamError) -> ExitCode {
    let (kind, code) = match e {
        PamError::Domain(_) | PamError::UnsupportedOrder { .. } | PamError::FrontNotBracketed => {
            ("domain", 3)
        }
        PamError::Config(_) => ("config", 3),
        PamError::Convergence { .. } | PamError::Accuracy(_) | PamError::Overflow { .. } => {
            ("convergence", 4)
        }
    };
    error_exit(kind, code, &e.to_string())
}

fn emit(report: &Report) -> io::Result<()> {
    let cfg = &report.inputs;
    let out: Box<dyn Write> = match &cfg.output_path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    let mut out = out;
    match cfg.output_format {
        Format::Json => report.write_json(&mut out)?,
        Format::Csv => report.write_csv(&mut out)?,
    }
    out.flush()
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("PAM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("PAM_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn load(path: &PathBuf) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(m) = configure_threads() {
        return error_exit("parse", 2, &m);
    }
    let cfg = match (cli.config, cli.command) {
        (Some(path), None) => match load(&path) {
            Ok(c) => c,
            Err(m) => return error_exit("parse", 2, &m),
        },
        (None, Some(cmd)) => from_flags(cmd),
        (Some(_), Some(_)) => {
            return error_exit("parse", 2, "use either --config or a subcommand, not both")
        }
        (None, None) => return error_exit("parse", 2, "no subcommand given; see --help"),
    };
    match run(&cfg) {
        Ok(report) => match emit(&report) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => error_exit("io", 1, &e.to_string()),
        },
        Err(RunError::Pam(e)) => pam_exit(&e),
        Err(RunError::Io(e)) => error_exit("io", 1, &e.to_string()),
        Err(RunError::Mismatch(report)) => {
            if let Err(e) = emit(&report) {
                return error_exit("io", 1, &e.to_string());
            }
            error_exit("validation", 5, "routes disagree beyond tolerance")
        }
    }
}
