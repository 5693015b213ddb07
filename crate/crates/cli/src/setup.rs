//! Shared argument groups and their translation into core types.

use std::path::Path;
use std::sync::Arc;

use clap::{Args, ValueEnum};
use largesol::exact::example51_initial;
use largesol::fastdiff::{FluxParams, Linearization, SolverSettings};
use largesol::mesh::io::load_field;
use largesol::tvflow::{default_eps_schedule, value_scale};
use largesol::{build_mesh, ConvexShape, DomainSpec, Field, Mesh};

use crate::error::CliError;

#[derive(Debug, Clone, Args)]
pub struct MeshArgs {
    /// Grid spacing (default: inradius / 32).
    #[arg(long)]
    pub h: Option<f64>,
    /// Use the radial discretization (disks centred at the origin only).
    #[arg(long)]
    pub radial: bool,
    /// Interior ball radius recorded for the sup bound (default: inradius).
    #[arg(long)]
    pub s0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Newton,
    Picard,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Time step (default: T / 400).
    #[arg(long)]
    pub tau: Option<f64>,
    /// Regularization; for p = 1 the smallest value of the continuation.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Comma-separated snapshot times.
    #[arg(long, value_delimiter = ',', conflicts_with = "snapshot_count")]
    pub snapshots: Option<Vec<f64>>,
    /// Equally spaced snapshots on (0, T] when --snapshots is absent.
    #[arg(long, default_value_t = 10)]
    pub snapshot_count: usize,
    #[arg(long, value_enum, default_value = "newton")]
    pub method: Method,
    /// Nonlinear update tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// Relative residual of the inner linear solves.
    #[arg(long, default_value_t = 1e-12)]
    pub tol_lin: f64,
}

impl SolverArgs {
    pub fn settings(&self) -> SolverSettings {
        SolverSettings {
            method: match self.method {
                Method::Newton => Linearization::Newton,
                Method::Picard => Linearization::Picard,
            },
            tol: self.tol,
            max_iter: self.max_iter,
            tol_lin: self.tol_lin,
            ..SolverSettings::default()
        }
    }

    pub fn tau(&self, total: f64) -> f64 {
        self.tau.unwrap_or(total / 400.0)
    }

    pub fn snapshot_times(&self, total: f64) -> Vec<f64> {
        match &self.snapshots {
            Some(t) => t.clone(),
            None => {
                let m = self.snapshot_count.max(1);
                (1..=m).map(|k| total * k as f64 / m as f64).collect()
            }
        }
    }
}

pub fn parse_shape(spec: &str) -> Result<ConvexShape, CliError> {
    Ok(ConvexShape::parse(spec)?)
}

pub fn domain_spec(shape: &ConvexShape, args: &MeshArgs) -> Result<DomainSpec, CliError> {
    let h = args.h.unwrap_or(shape.inradius() / 32.0);
    let mut spec = match args.s0 {
        Some(s0) => DomainSpec::with_s0(shape.clone(), h, s0)?,
        None => DomainSpec::new(shape.clone(), h)?,
    };
    if args.radial {
        match shape {
            ConvexShape::Disk { center, .. } if *center == [0.0, 0.0] => spec.radial = true,
            _ => {
                return Err(CliError::Usage(
                    "--radial needs a disk centred at the origin".into(),
                ))
            }
        }
    }
    spec.check_resolution()?;
    Ok(spec)
}

pub fn mesh(domain: &str, args: &MeshArgs) -> Result<Arc<Mesh>, CliError> {
    let shape = parse_shape(domain)?;
    Ok(build_mesh(&domain_spec(&shape, args)?)?)
}

/// `zero`, `const:<c>`, `example51` (unit disk datum) or a snapshot CSV path.
pub fn initial_datum(mesh: &Arc<Mesh>, spec: &str) -> Result<Field, CliError> {
    if spec == "zero" {
        return Ok(Field::constant(mesh.clone(), 0.0));
    }
    if let Some(c) = spec.strip_prefix("const:") {
        let c: f64 = c
            .parse()
            .map_err(|_| CliError::Usage(format!("bad constant in `{spec}`")))?;
        return Ok(Field::constant(mesh.clone(), c));
    }
    if spec == "example51" {
        return Ok(Field::from_fn(mesh.clone(), |x, _| {
            example51_initial(x[0].hypot(x[1])).unwrap_or(f64::NAN)
        })
        .and_then(|f| {
            if f.values().iter().all(|v| v.is_finite()) {
                Ok(f)
            } else {
                Err(largesol::Error::InvalidDomain(
                    "the example51 datum needs cells inside the unit disk".into(),
                ))
            }
        })?);
    }
    let path = Path::new(spec);
    if path.exists() {
        return Ok(load_field(mesh.clone(), path)?);
    }
    Err(CliError::Usage(format!(
        "unknown initial datum `{spec}` (zero, const:<c>, example51 or a CSV file)"
    )))
}

/// Regularization for `p > 1`: explicit, zero for `p >= 2`, else the size default.
pub fn flux_params(
    p: f64,
    n: f64,
    eps: Option<f64>,
    shape: &ConvexShape,
) -> Result<FluxParams, CliError> {
    Ok(match eps {
        Some(e) => FluxParams::new(p, e)?,
        None => FluxParams::with_default_eps(p, n, shape.diameter())?,
    })
}

/// Continuation schedule for `p = 1`, ending at `eps` when given.
pub fn tv_schedule(u0: &Field, n: f64, eps: Option<f64>) -> Vec<f64> {
    match eps {
        Some(e) => [1e3, 1e2, 1e1, 1.0].iter().map(|f| f * e).collect(),
        None => default_eps_schedule(value_scale(u0).max(n.abs())),
    }
}

pub fn check_p(p: f64) -> Result<(), CliError> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(CliError::Usage(format!("--p must be >= 1, got {p}")));
    }
    Ok(())
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}
