//! Executes a [`RunConfig`].

use std::fs::File;
use std::io::BufWriter;

use pam_core::contour::{bc_contour_moment, ContourConfig};
use pam_core::front::{empirical_front, growth_index, rate_function, uniform_grid};
use pam_core::moments::{
    second_moment_display_log, second_moment_two_point_log, third_moment_bounds, third_moment_log,
    third_moment_three_point_log, ModelParams, TriplePoint,
};
use pam_core::sim::{cone_snapshot, estimate_moment, simulate_field, SimGrid};
use pam_core::specfun::heat_kernel_log;
use pam_core::{LogValue, PamError, QuadratureConfig};

use crate::config::{Command, ContourSpec, RunConfig, SnapshotFormat};
use crate::report::{put, put_f64, put_value, Report, Row};

/// Route tolerances used by `validate`.
pub const REAL_ROUTE_TOL: f64 = 1e-6;
pub const CONTOUR_ROUTE_TOL: f64 = 1e-4;

#[derive(Debug)]
pub enum RunError {
    Pam(PamError),
    Io(std::io::Error),
    /// `validate` found routes outside tolerance; the report is still emitted.
    Mismatch(Box<Report>),
}

impl From<PamError> for RunError {
    fn from(e: PamError) -> Self {
        RunError::Pam(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

pub fn run(cfg: &RunConfig) -> Result<Report, RunError> {
    cfg.validate()?;
    let p = cfg.model()?;
    let q = cfg.quadrature.to_config();
    let mut report = Report::new(cfg.clone());
    match cfg.command {
        Command::Moment2 => moment2(cfg, &p, &mut report)?,
        Command::Moment3 => moment3(cfg, &p, &q, &mut report)?,
        Command::ThreePoint => three_point(cfg, &p, &q, &mut report)?,
        Command::Oracle => oracle(cfg, &p, &mut report)?,
        Command::Bounds => bounds(cfg, &p, &mut report)?,
        Command::Simulate => simulate(cfg, &p, &mut report)?,
        Command::Front => front(cfg, &p, &q, &mut report)?,
        Command::Validate => {
            if !validate(cfg, &p, &q, &mut report)? {
                return Err(RunError::Mismatch(Box::new(report)));
            }
        }
    }
    Ok(report)
}

fn moment2(cfg: &RunConfig, p: &ModelParams, report: &mut Report) -> Result<(), RunError> {
    let route = if cfg.one_point_display {
        "one_point_display"
    } else {
        "closed_form_two_point"
    };
    for (i, &x) in cfg.points.iter().enumerate() {
        let y = cfg.second_points.as_ref().map_or(x, |ys| ys[i]);
        let v = if cfg.one_point_display {
            second_moment_display_log(p, x)?
        } else {
            second_moment_two_point_log(p, x, y)?
        };
        let mut row = Row::new();
        put_f64(&mut row, "x1", x)?;
        put_f64(&mut row, "x2", y)?;
        put_value(&mut row, "value", v, cfg.log_scale)?;
        put(&mut row, "route", route);
        report.rows.push(row);
    }
    Ok(())
}

fn moment3(
    cfg: &RunConfig,
    p: &ModelParams,
    q: &QuadratureConfig,
    report: &mut Report,
) -> Result<(), RunError> {
    for &x in &cfg.points {
        let m = third_moment_log(p, x, q)?;
        let mut row = Row::new();
        put_f64(&mut row, "x", x)?;
        put_value(&mut row, "value", m.value, cfg.log_scale)?;
        put_f64(&mut row, "rel_err", m.rel_err)?;
        put(&mut row, "evals", m.evals);
        put(&mut row, "route", "one_dimensional_integral");
        report.rows.push(row);
    }
    Ok(())
}

fn three_point(
    cfg: &RunConfig,
    p: &ModelParams,
    q: &QuadratureConfig,
    report: &mut Report,
) -> Result<(), RunError> {
    let xs = &cfg.points;
    let m = third_moment_three_point_log(p, &TriplePoint::new(xs[0], xs[1], xs[2])?, q)?;
    let mut row = Row::new();
    for (i, &x) in xs.iter().enumerate() {
        put_f64(&mut row, &format!("x{}", i + 1), x)?;
    }
    put_value(&mut row, "value", m.value, cfg.log_scale)?;
    put_f64(&mut row, "rel_err", m.rel_err)?;
    put(&mut row, "evals", m.evals);
    put(&mut row, "route", "triple_integral");
    report.rows.push(row);
    Ok(())
}

fn contour_config(
    spec: &ContourSpec,
    p: &ModelParams,
    xs: &[f64],
) -> Result<ContourConfig, PamError> {
    let mut c = match &spec.alphas {
        Some(a) => ContourConfig::for_alphas(a.clone(), p, xs, spec.rel_tol)?,
        None => ContourConfig::auto(xs.len(), p, xs, spec.rel_tol)?,
    };
    if let Some(h) = spec.half_height {
        c.half_height = h;
    }
    if let Some(n) = spec.nodes_per_unit {
        c.nodes_per_unit = n;
    }
    if let Some(m) = spec.max_evals {
        c.cfg.max_evals = m;
    }
    c.validate(xs.len(), p)?;
    Ok(c)
}

fn oracle(cfg: &RunConfig, p: &ModelParams, report: &mut Report) -> Result<(), RunError> {
    let xs = &cfg.points;
    let cc = contour_config(&cfg.contour, p, xs)?;
    let r = bc_contour_moment(xs.len(), p, xs, &cc)?;
    let mut row = Row::new();
    for (i, &x) in xs.iter().enumerate() {
        put_f64(&mut row, &format!("x{}", i + 1), x)?;
    }
    put_f64(&mut row, "value", r.value)?;
    put_f64(&mut row, "imag_residual", r.imag_residual)?;
    put(&mut row, "nodes_per_line", r.nodes_per_line);
    put(&mut row, "evals", r.evals);
    put(&mut row, "alphas", cc.alphas.clone());
    put_f64(&mut row, "half_height", cc.half_height)?;
    put(&mut row, "route", format!("contour_k{}", xs.len()));
    report.rows.push(row);
    Ok(())
}

fn bounds(cfg: &RunConfig, p: &ModelParams, report: &mut Report) -> Result<(), RunError> {
    for &x in &cfg.points {
        let b = third_moment_bounds(p, x)?;
        let mut row = Row::new();
        put_f64(&mut row, "x", x)?;
        put_value(&mut row, "lower", b.lower, cfg.log_scale)?;
        put_value(&mut row, "upper", b.upper, cfg.log_scale)?;
        put(&mut row, "route", "mean_value_bounds");
        report.rows.push(row);
    }
    Ok(())
}

fn sim_grid(cfg: &RunConfig, p: &ModelParams) -> SimGrid {
    let g = &cfg.grid;
    let t = p.t;
    let half_width = g
        .half_width
        .unwrap_or_else(|| (6.0 * (p.nu * (t + g.delta_width)).sqrt()).ceil());
    let mut grid = SimGrid::with_stable_dt(p, half_width, g.nx, t, 0.5, g.replicas, g.seed);
    if let Some(dt) = g.dt {
        grid.dt = dt;
    }
    grid.delta_width = g.delta_width;
    grid
}

/// Exact moment of order `k` for the smeared initial datum where known.
fn exact_moment(p: &ModelParams, mu: f64, x: f64, k: u32) -> Result<LogValue, PamError> {
    match k {
        1 => heat_kernel_log(p.nu, p.t + mu, x),
        2 => second_moment_two_point_log(p, x, x),
        _ => Ok(third_moment_log(p, x, &QuadratureConfig::default())?.value),
    }
}

fn simulate(cfg: &RunConfig, p: &ModelParams, report: &mut Report) -> Result<(), RunError> {
    let g = sim_grid(cfg, p);
    g.validate(p)?;
    let set = simulate_field(p, &g)?;
    for &x in &cfg.points {
        for &k in &cfg.grid.orders {
            let e = estimate_moment(&set, x, k)?;
            let exact = exact_moment(p, g.delta_width, x, k)?.to_f64();
            let mut row = Row::new();
            put_f64(&mut row, "x", x)?;
            put(&mut row, "order", k);
            put_f64(&mut row, "mean", e.mean)?;
            put_f64(&mut row, "stderr", e.stderr)?;
            put(&mut row, "replicas", e.replicas);
            put_f64(&mut row, "exact", exact)?;
            put_f64(&mut row, "z_score", e.z_score(exact))?;
            report.rows.push(row);
        }
    }
    let s = &mut report.summary;
    put_f64(s, "half_width", g.half_width)?;
    put(s, "nx", g.nx);
    put_f64(s, "dx", g.dx())?;
    put_f64(s, "dt", g.effective_dt())?;
    put(s, "steps", g.steps());
    put(s, "route", "lattice_euler_maruyama");
    if let Some(snap) = &cfg.grid.snapshot {
        let cone = cone_snapshot(p, &g, snap.clip, snap.time_every, snap.space_every)?;
        let w = BufWriter::new(File::create(&snap.path)?);
        match snap.format {
            SnapshotFormat::Csv => cone.write_csv(w)?,
            SnapshotFormat::Binary => cone.write_binary(w)?,
        }
        put(s, "snapshot_path", snap.path.display().to_string());
        put(s, "snapshot_nt", cone.nt());
        put(s, "snapshot_nx", cone.nx());
    }
    Ok(())
}

fn front(
    cfg: &RunConfig,
    p: &ModelParams,
    q: &QuadratureConfig,
    report: &mut Report,
) -> Result<(), RunError> {
    let l2 = p.l2();
    let alpha_max = cfg.front.alpha_max.unwrap_or(1.5 * l2);
    let grid = uniform_grid(0.0, alpha_max, cfg.front.alpha_step)?;
    let f = empirical_front(p, &cfg.front.times, &grid, q)?;
    for (&a, &r) in f.alpha_grid.iter().zip(&f.rate_values) {
        let mut row = Row::new();
        put_f64(&mut row, "alpha", a)?;
        put_f64(&mut row, "rate_value", r)?;
        put_f64(&mut row, "limit_rate", rate_function(p, a)?)?;
        report.rows.push(row);
    }
    let s = &mut report.summary;
    put_f64(s, "lambda_p", f.lambda_p)?;
    put_f64(s, "growth_index", growth_index(f.p, p.lambda)?)?;
    put(s, "p", f.p);
    put(s, "route", "extrapolated_growth_rate");
    Ok(())
}

fn rel(a: LogValue, b: LogValue) -> f64 {
    (a.log_abs() - b.log_abs()).exp_m1().abs()
}

fn validate(
    cfg: &RunConfig,
    p: &ModelParams,
    q: &QuadratureConfig,
    report: &mut Report,
) -> Result<bool, RunError> {
    let mut all = true;
    for &x in &cfg.points {
        let one = third_moment_log(p, x, q)?;
        let three = third_moment_three_point_log(p, &TriplePoint::coincident(x)?, q)?;
        let xs = [x; 3];
        let cc = contour_config(&cfg.contour, p, &xs)?;
        let contour = LogValue::from_f64(bc_contour_moment(3, p, &xs, &cc)?.value);
        let b = third_moment_bounds(p, x)?;
        let d_real = rel(one.value, three.value);
        let d_contour = rel(contour, one.value).max(rel(contour, three.value));
        let slack = one.rel_err + 64.0 * f64::EPSILON * one.ln().abs().max(1.0);
        let bracketed =
            one.ln() - b.lower.log_abs() >= -slack && b.upper.log_abs() - one.ln() >= -slack;
        let ok = d_real <= REAL_ROUTE_TOL && d_contour <= CONTOUR_ROUTE_TOL && bracketed;
        all &= ok;
        let mut row = Row::new();
        let ls = cfg.log_scale;
        put_f64(&mut row, "x", x)?;
        put_value(&mut row, "one_dimensional_integral", one.value, ls)?;
        put_value(&mut row, "triple_integral", three.value, ls)?;
        put_value(&mut row, "contour_k3", contour, ls)?;
        put_value(&mut row, "bound_lower", b.lower, ls)?;
        put_value(&mut row, "bound_upper", b.upper, ls)?;
        put_f64(&mut row, "rel_dev_real_routes", d_real)?;
        put_f64(&mut row, "rel_dev_contour", d_contour)?;
        put(&mut row, "bracketed", bracketed);
        put(&mut row, "within_tolerance", ok);
        report.rows.push(row);
    }
    let s = &mut report.summary;
    put_f64(s, "tol_real_routes", REAL_ROUTE_TOL)?;
    put_f64(s, "tol_contour", CONTOUR_ROUTE_TOL)?;
    put(s, "passed", all);
    Ok(all)
}
