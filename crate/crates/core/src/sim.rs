//! Explicit finite-difference Monte Carlo for the lattice equation
//!
//! ```text
//! u_i += (ν dt/2Δx²)(u_{i+1} - 2u_i + u_{i-1}) + λ u_i ξ_i √(dt/Δx)
//! ```
//!
//! on `[-L, L]` with zero boundary values. Replica `r` draws its normals from
//! the ChaCha8 stream `r` keyed by the grid seed, so results do not depend on
//! how replicas are scheduled.

use std::io::{self, BufRead, Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{
    config, domain, ensure_finite, ensure_nonnegative, ensure_positive, PamError, Result,
};
use crate::moments::ModelParams;
use crate::specfun::raw;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimGrid {
    pub half_width: f64,
    pub nx: usize,
    pub t_end: f64,
    /// Requested step; the run uses `t_end / ceil(t_end/dt)`.
    pub dt: f64,
    /// Variance `μ` of the Gaussian initial profile, `0` for a lattice delta.
    pub delta_width: f64,
    pub replicas: usize,
    pub seed: u64,
}

impl SimGrid {
    /// Grid with `dt` at `fraction` of the stability limit and lattice delta data.
    pub fn with_stable_dt(
        p: &ModelParams,
        half_width: f64,
        nx: usize,
        t_end: f64,
        fraction: f64,
        replicas: usize,
        seed: u64,
    ) -> Self {
        let dx = 2.0 * half_width / (nx as f64 - 1.0);
        SimGrid {
            half_width,
            nx,
            t_end,
            dt: fraction * dx * dx / (2.0 * p.nu),
            delta_width: 0.0,
            replicas,
            seed,
        }
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / (self.nx as f64 - 1.0)
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize
    }

    pub fn effective_dt(&self) -> f64 {
        self.t_end / self.steps() as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn validate(&self, p: &ModelParams) -> Result<()> {
        p.validate()?;
        ensure_positive("half_width", self.half_width).map_err(|e| config(e.to_string()))?;
        ensure_positive("t_end", self.t_end).map_err(|e| config(e.to_string()))?;
        ensure_positive("dt", self.dt).map_err(|e| config(e.to_string()))?;
        ensure_nonnegative("delta_width", self.delta_width).map_err(|e| config(e.to_string()))?;
        if self.nx < 3 || self.nx.is_multiple_of(2) {
            return Err(config(format!(
                "nx must be odd and at least 3, got {}",
                self.nx
            )));
        }
        if self.replicas == 0 {
            return Err(config("replicas must be positive"));
        }
        let dx = self.dx();
        // twice the actual diffusion number, so this keeps a factor 2 in hand
        let courant = p.nu * self.effective_dt() / (dx * dx);
        if courant > 0.5 {
            return Err(config(format!(
                "unstable step: nu*dt/dx^2 = {courant} > 1/2"
            )));
        }
        if self.delta_width > 0.0 && self.delta_width < dx * dx {
            return Err(config(format!(
                "delta_width {} is below dx^2 = {}",
                self.delta_width,
                dx * dx
            )));
        }
        let need = 6.0 * (p.nu * (self.t_end + self.delta_width)).sqrt();
        if self.half_width < need {
            return Err(config(format!(
                "half_width {} is below 6 sqrt(nu t) = {need}",
                self.half_width
            )));
        }
        Ok(())
    }

    fn initial_profile(&self) -> Vec<f64> {
        let mut u = vec![0.0; self.nx];
        if self.delta_width == 0.0 {
            u[self.nx / 2] = 1.0 / self.dx();
        } else {
            for (i, v) in u.iter_mut().enumerate().take(self.nx - 1).skip(1) {
                *v = raw::ln_heat_kernel(1.0, self.delta_width, self.x(i)).exp();
            }
        }
        u
    }
}

/// Terminal profiles `u(t_end, x_i)`, one row per replica.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicaSet {
    pub grid: SimGrid,
    pub profiles: Vec<Vec<f64>>,
}

impl ReplicaSet {
    pub fn xs(&self) -> Vec<f64> {
        self.grid.xs()
    }

    pub fn nearest_index(&self, x: f64) -> Result<usize> {
        ensure_finite("x", x)?;
        let g = &self.grid;
        if x.abs() > g.half_width {
            return Err(domain(format!(
                "x = {x} lies outside [-{0}, {0}]",
                g.half_width
            )));
        }
        Ok((((x + g.half_width) / g.dx()).round() as usize).min(g.nx - 1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub replicas: usize,
    pub order: u32,
}

impl MomentEstimate {
    /// `|mean - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if self.stderr == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / self.stderr
        }
    }
}

/// Runs one replica, calling `observe(step, u)` after initialisation and after
/// every step.
fn run_replica(
    p: &ModelParams,
    g: &SimGrid,
    replica: usize,
    mut observe: impl FnMut(usize, &[f64]),
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    rng.set_stream(replica as u64);
    let dx = g.dx();
    let dt = g.effective_dt();
    let diff = 0.5 * p.nu * dt / (dx * dx);
    let noise = p.lambda * (dt / dx).sqrt();
    let mut u = g.initial_profile();
    let mut next = vec![0.0; g.nx];
    observe(0, &u);
    for step in 1..=g.steps() {
        let mut finite = true;
        for i in 1..g.nx - 1 {
            let ui = u[i];
            let xi: f64 = if noise != 0.0 {
                rng.sample(StandardNormal)
            } else {
                0.0
            };
            let v = ui + diff * (u[i + 1] - 2.0 * ui + u[i - 1]) + noise * ui * xi;
            finite &= v.is_finite();
            next[i] = v;
        }
        if !finite {
            return Err(PamError::Overflow { replica, step });
        }
        std::mem::swap(&mut u, &mut next);
        observe(step, &u);
    }
    Ok(u)
}

pub fn simulate_field(p: &ModelParams, g: &SimGrid) -> Result<ReplicaSet> {
    g.validate(p)?;
    let profiles = (0..g.replicas)
        .into_par_iter()
        .map(|r| run_replica(p, g, r, |_, _| {}))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReplicaSet { grid: *g, profiles })
}

/// Sample mean and standard error of `u(t_end, x)^order` at the node nearest `x`.
pub fn estimate_moment(set: &ReplicaSet, x: f64, order: u32) -> Result<MomentEstimate> {
    if set.profiles.is_empty() {
        return Err(domain("empty replica set"));
    }
    if !(1..=3).contains(&order) {
        return Err(domain(format!(
            "moment order must be 1, 2 or 3, got {order}"
        )));
    }
    let i = set.nearest_index(x)?;
    let samples: Vec<f64> = set
        .profiles
        .iter()
        .map(|u| u[i].powi(order as i32))
        .collect();
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let stderr = if samples.len() > 1 {
        let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(MomentEstimate {
        mean,
        stderr,
        replicas: samples.len(),
        order,
    })
}

/// Space-time array of one realisation, row-major `times.len() × xs.len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub times: Vec<f64>,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

const MAGIC: &[u8; 4] = b"PAMS";
const VERSION: u32 = 1;

impl Snapshot {
    pub fn nt(&self) -> usize {
        self.times.len()
    }

    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.nx()..(k + 1) * self.nx()]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "time,x,value")?;
        for (k, t) in self.times.iter().enumerate() {
            for (x, v) in self.xs.iter().zip(self.row(k)) {
                writeln!(w, "{t:.16e},{x:.16e},{v:.16e}")?;
            }
        }
        Ok(())
    }

    /// Reads the CSV layout written by [`Snapshot::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> io::Result<Self> {
        let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "time,x,value" => {}
            _ => return Err(bad("missing time,x,value header")),
        }
        let mut times: Vec<f64> = Vec::new();
        let mut xs: Vec<f64> = Vec::new();
        let mut values = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(&e.to_string()))?;
            if f.len() != 3 {
                return Err(bad("expected three columns"));
            }
            if times.last() != Some(&f[0]) {
                times.push(f[0]);
            }
            if times.len() == 1 {
                xs.push(f[1]);
            }
            values.push(f[2]);
        }
        if values.len() != times.len() * xs.len() {
            return Err(bad("ragged snapshot"));
        }
        Ok(Snapshot { times, xs, values })
    }

    /// `"PAMS"`, version, `nt`, `nx` as little-endian `u32`, then the values.
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.nt() as u32).to_le_bytes())?;
        w.write_all(&(self.nx() as u32).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Contents of a binary snapshot file.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryGrid {
    pub nt: usize,
    pub nx: usize,
    pub values: Vec<f64>,
}

pub fn read_binary<R: Read>(mut r: R) -> io::Result<BinaryGrid> {
    let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
    let mut head = [0u8; 16];
    r.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(bad("not a PAMS file"));
    }
    let word = |k: usize| u32::from_le_bytes(head[k..k + 4].try_into().unwrap());
    if word(4) != VERSION {
        return Err(bad("unsupported PAMS version"));
    }
    let (nt, nx) = (word(8) as usize, word(12) as usize);
    let mut buf = vec![0u8; nt * nx * 8];
    r.read_exact(&mut buf)?;
    let values = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(BinaryGrid { nt, nx, values })
}

/// `|u|` clipped at `clip` for replica 0, kept every `time_every` steps (and
/// at `t_end`) on every `space_every`-th node.
pub fn cone_snapshot(
    p: &ModelParams,
    g: &SimGrid,
    clip: f64,
    time_every: usize,
    space_every: usize,
) -> Result<Snapshot> {
    g.validate(p)?;
    ensure_positive("clip", clip)?;
    if time_every == 0 || space_every == 0 {
        return Err(config("decimation factors must be positive"));
    }
    let steps = g.steps();
    let dt = g.effective_dt();
    let cols: Vec<usize> = (0..g.nx).step_by(space_every).collect();
    let xs = cols.iter().map(|&i| g.x(i)).collect();
    let mut times = Vec::new();
    let mut values = Vec::new();
    run_replica(p, g, 0, |step, u| {
        if step % time_every == 0 || step == steps {
            times.push(step as f64 * dt);
            values.extend(cols.iter().map(|&i| u[i].abs().min(clip)));
        }
    })?;
    Ok(Snapshot { times, xs, values })
}
