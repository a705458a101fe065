//! The run description shared by command-line flags and `--config` files.

use std::path::PathBuf;

use pam_core::{ModelParams, PamError, QuadratureConfig};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Moment2,
    Moment3,
    ThreePoint,
    Oracle,
    Bounds,
    Simulate,
    Front,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Moment2 => "moment2",
            Command::Moment3 => "moment3",
            Command::ThreePoint => "three-point",
            Command::Oracle => "oracle",
            Command::Bounds => "bounds",
            Command::Simulate => "simulate",
            Command::Front => "front",
            Command::Validate => "validate",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotFormat {
    #[default]
    Csv,
    Binary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub nu: f64,
    pub lambda: f64,
    pub t: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            nu: 1.0,
            lambda: 1.0,
            t: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
    pub truncation_margin: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        let q = QuadratureConfig::default();
        QuadratureSpec {
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            max_evals: q.max_evals,
            truncation_margin: q.truncation_margin,
        }
    }
}

impl QuadratureSpec {
    pub fn to_config(self) -> QuadratureConfig {
        QuadratureConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_evals: self.max_evals,
            truncation_margin: self.truncation_margin,
        }
    }
}

/// Contour settings. Unset fields are derived from `rel_tol` and the points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourSpec {
    pub k: usize,
    pub rel_tol: f64,
    pub alphas: Option<Vec<f64>>,
    pub half_height: Option<f64>,
    pub nodes_per_unit: Option<usize>,
    pub max_evals: Option<usize>,
}

impl Default for ContourSpec {
    fn default() -> Self {
        ContourSpec {
            k: 3,
            rel_tol: 1e-8,
            alphas: None,
            half_height: None,
            nodes_per_unit: None,
            max_evals: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnapshotSpec {
    pub path: PathBuf,
    pub format: SnapshotFormat,
    pub clip: f64,
    pub time_every: usize,
    pub space_every: usize,
}

impl Default for SnapshotSpec {
    fn default() -> Self {
        SnapshotSpec {
            path: PathBuf::from("snapshot.csv"),
            format: SnapshotFormat::Csv,
            clip: 500.0,
            time_every: 1,
            space_every: 1,
        }
    }
}

/// Simulator settings; `t_end` is `params.t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Defaults to `6√(νt)` rounded up.
    pub half_width: Option<f64>,
    pub nx: usize,
    /// Defaults to half the stability limit.
    pub dt: Option<f64>,
    pub delta_width: f64,
    pub replicas: usize,
    pub seed: u64,
    pub orders: Vec<u32>,
    pub snapshot: Option<SnapshotSpec>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            half_width: None,
            nx: 401,
            dt: None,
            delta_width: 0.0,
            replicas: 1000,
            seed: 0,
            orders: vec![1, 2],
            snapshot: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontSpec {
    pub times: Vec<f64>,
    /// Defaults to `1.5λ²`.
    pub alpha_max: Option<f64>,
    pub alpha_step: f64,
}

impl Default for FrontSpec {
    fn default() -> Self {
        FrontSpec {
            times: vec![10.0, 20.0, 40.0],
            alpha_max: None,
            alpha_step: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub params: Params,
    /// Evaluation points: `x` values, or the `k` contour / three-point arguments.
    #[serde(default = "origin")]
    pub points: Vec<f64>,
    /// Second coordinates for `moment2`; `None` evaluates on the diagonal.
    #[serde(default)]
    pub second_points: Option<Vec<f64>>,
    /// `moment2`: use the standalone one-point expression instead of the
    /// two-point formula on the diagonal.
    #[serde(default)]
    pub one_point_display: bool,
    #[serde(default)]
    pub output_format: Format,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub log_scale: bool,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub contour: ContourSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub front: FrontSpec,
}

fn origin() -> Vec<f64> {
    vec![0.0]
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            params: Params::default(),
            points: origin(),
            second_points: None,
            one_point_display: false,
            output_format: Format::Json,
            output_path: None,
            log_scale: false,
            quadrature: QuadratureSpec::default(),
            contour: ContourSpec::default(),
            grid: GridSpec::default(),
            front: FrontSpec::default(),
        }
    }

    pub fn model(&self) -> Result<ModelParams, PamError> {
        ModelParams::new(self.params.nu, self.params.lambda, self.params.t)
    }

    /// Checks everything that can be checked before computing.
    pub fn validate(&self) -> Result<(), PamError> {
        let domain = |m: String| PamError::Domain(m);
        let cfg_err = |m: String| PamError::Config(m);
        self.model()?;
        self.quadrature.to_config().validate()?;
        if self.points.is_empty() {
            return Err(domain("no evaluation points given".into()));
        }
        if let Some(x) = self.points.iter().find(|x| !x.is_finite()) {
            return Err(domain(format!("point {x} is not finite")));
        }
        match self.command {
            Command::Moment2 => {
                if let Some(ys) = &self.second_points {
                    if ys.len() != self.points.len() {
                        return Err(domain(format!(
                            "{} first points but {} second points",
                            self.points.len(),
                            ys.len()
                        )));
                    }
                    if self.one_point_display {
                        return Err(cfg_err(
                            "the one-point expression takes no second points".into(),
                        ));
                    }
                }
            }
            Command::ThreePoint if self.points.len() != 3 => {
                return Err(domain(format!(
                    "three-point needs 3 points, got {}",
                    self.points.len()
                )));
            }
            Command::Oracle => {
                let k = self.contour.k;
                if !(k == 2 || k == 3) {
                    return Err(PamError::UnsupportedOrder { order: k, max: 3 });
                }
                if self.points.len() != k {
                    return Err(domain(format!("oracle with k = {k} needs {k} points")));
                }
            }
            Command::Simulate => {
                if self.grid.orders.iter().any(|o| !(1..=3).contains(o)) {
                    return Err(domain("simulated moment orders must be 1, 2 or 3".into()));
                }
            }
            Command::Front if self.front.times.is_empty() => {
                return Err(domain("front needs at least one time".into()));
            }
            _ => {}
        }
        if matches!(self.command, Command::Oracle | Command::Validate)
            && !(self.contour.rel_tol > 0.0 && self.contour.rel_tol <= 0.1)
        {
            return Err(cfg_err(format!(
                "contour rel_tol must lie in (0, 0.1], got {}",
                self.contour.rel_tol
            )));
        }
        Ok(())
    }
}
