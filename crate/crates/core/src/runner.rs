//! Experiment dispatch: turn a validated [`RunConfig`] into a stable-loop run,
//! then persist `trace.csv` and `summary.json` atomically.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bridge::BridgeNetwork;
use crate::config::{ConfigError, Experiment, KernelConfig, RunConfig};
use crate::family::{BallFamily, KohonenFamily, SaceFamily};
use crate::fields::{KohonenField, MedianField, QuantileField};
use crate::kernels::{
    Ar1Kernel, GaussianMixture, IidKernel, NormalSampler, ReflectedRwmKernel, SphericalNormal,
    Uniform01, UniformCube,
};
use crate::sace::{pilot_init, SaceChain, SaceField, SaceKernel};
use crate::stabilizer::StableOptions;
use crate::{
    rng, run_stable_sa, CompactFamily, Field, Kernel, Param, SaError, StepSchedule, Trace,
};

/// Share of the budget averaged for the tail estimate.
const TAIL_FRAC: f64 = 0.1;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] SaError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub final_theta: Vec<f64>,
    pub tail_mean: Vec<f64>,
    pub truncation_count: usize,
    /// Importance-weight clip events; absent for experiments without weights.
    pub clip_events: Option<u64>,
    pub seed: u64,
    pub resolved_config: RunConfig,
}

pub struct RunOutput {
    pub trace: Trace,
    pub summary: Summary,
}

fn schedule_of(cfg: &RunConfig) -> StepSchedule {
    StepSchedule::new(cfg.schedule.gamma0, cfg.schedule.beta)
}

fn options_of(cfg: &RunConfig) -> StableOptions {
    StableOptions::new(cfg.budget)
        .with_thin(cfg.thin)
        .with_max_truncations(cfg.max_truncations)
}

fn run_generic<X: Clone>(
    cfg: &RunConfig,
    family: &dyn CompactFamily,
    kernel: &dyn Kernel<X>,
    field: &dyn Field<X>,
    anchor_x: &X,
    anchor_theta: &Param,
) -> Result<Trace, SaError> {
    let mut rng = rng::stream(cfg.seed, "main");
    run_stable_sa(
        options_of(cfg),
        family,
        kernel,
        field,
        &schedule_of(cfg),
        anchor_x,
        anchor_theta,
        &mut rng,
    )
}

/// Run the configured experiment. The config must already be resolved and
/// validated (see [`crate::config::parse_config`]).
pub fn execute(cfg: &RunConfig) -> Result<RunOutput, RunError> {
    let (trace, clip_events) = match cfg.experiment {
        Experiment::Quantile => (run_quantile(cfg)?, None),
        Experiment::Median => (run_median(cfg)?, None),
        Experiment::Kohonen => (run_kohonen(cfg)?, None),
        Experiment::Sace => {
            let (trace, clips) = run_sace(cfg)?;
            (trace, Some(clips))
        }
    };
    let last = trace.last().expect("budget >= 1 stores the final row");
    let summary = Summary {
        final_theta: last.theta.as_slice().to_vec(),
        tail_mean: trace
            .tail_mean(cfg.budget, TAIL_FRAC)
            .expect("final row always lies in the tail window"),
        truncation_count: last.trunc_count,
        clip_events,
        seed: cfg.seed,
        resolved_config: cfg.clone(),
    };
    Ok(RunOutput { trace, summary })
}

fn run_quantile(cfg: &RunConfig) -> Result<Trace, SaError> {
    let q = cfg.q.expect("validated");
    let field = QuantileField::new(q, |x: &f64| *x);
    let family = BallFamily::new(cfg.family.radius0, cfg.family.growth);
    let kernel: Box<dyn Kernel<f64>> = match cfg.kernel.as_ref().expect("resolved") {
        KernelConfig::IidNormal { mean, sd } => Box::new(IidKernel::new(NormalSampler {
            mean: *mean,
            sd: *sd,
        })),
        KernelConfig::IidUniform01 => Box::new(IidKernel::new(Uniform01)),
        KernelConfig::Ar1 { rho, sigma } => Box::new(Ar1Kernel {
            rho: *rho,
            sigma: *sigma,
        }),
        other => unreachable!("rejected by validation: {other:?}"),
    };
    run_generic(cfg, &family, kernel.as_ref(), &field, &0.0, &Param::scalar(0.0))
}

fn run_median(cfg: &RunConfig) -> Result<Trace, SaError> {
    let dim = cfg.dim.expect("resolved");
    let family = BallFamily::new(cfg.family.radius0, cfg.family.growth);
    let kernel: Box<dyn Kernel<Vec<f64>>> = match cfg.kernel.as_ref().expect("resolved") {
        KernelConfig::IidSphericalNormal { sd } => {
            Box::new(IidKernel::new(SphericalNormal { dim, sd: *sd }))
        }
        KernelConfig::IidMixture { centers, sd } => Box::new(IidKernel::new(GaussianMixture {
            centers: centers.clone(),
            sd: *sd,
        })),
        other => unreachable!("rejected by validation: {other:?}"),
    };
    run_generic(
        cfg,
        &family,
        kernel.as_ref(),
        &MedianField,
        &vec![0.0; dim],
        &Param::zeros(dim),
    )
}

/// Anchor codebook: points spread along the diagonal of the unit cube so the
/// anchor has positive pairwise separation for any codebook size.
fn diagonal_anchor(n_points: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n_points)
        .map(|i| vec![(i + 1) as f64 / (n_points + 1) as f64; dim])
        .collect()
}

fn run_kohonen(cfg: &RunConfig) -> Result<Trace, SaError> {
    let dim = cfg.dim.expect("resolved");
    let n_points = cfg.n_codes.expect("resolved");
    let lambda = cfg.lambda.expect("resolved");
    let delta = cfg.delta.expect("resolved");
    let anchor_points = diagonal_anchor(n_points, dim);
    let q0 = cfg
        .family
        .q0
        .unwrap_or_else(|| KohonenFamily::fitting_q0(&anchor_points));
    let family = KohonenFamily::new(n_points, dim, delta, q0);
    let field = KohonenField {
        n_points,
        dim,
        delta,
        lambda,
    };
    let kernel: Box<dyn Kernel<Vec<f64>>> = match cfg.kernel.as_ref().expect("resolved") {
        KernelConfig::RwmUniform01 { scale } => {
            Box::new(ReflectedRwmKernel::uniform_unit_cube(*scale))
        }
        KernelConfig::IidUniform01 => Box::new(IidKernel::new(UniformCube { dim })),
        other => unreachable!("rejected by validation: {other:?}"),
    };
    let anchor_theta = Param::new(anchor_points.into_iter().flatten().collect())
        .expect("anchor coordinates are finite");
    run_generic(
        cfg,
        &family,
        kernel.as_ref(),
        &field,
        &vec![0.5; dim],
        &anchor_theta,
    )
}

fn run_sace(cfg: &RunConfig) -> Result<(Trace, u64), SaError> {
    let q = cfg.q.expect("validated");
    let net_cfg = cfg.network.as_ref().expect("resolved");
    let net = BridgeNetwork::new(net_cfg.weights.clone(), net_cfg.paths.clone())
        .expect("validated network");
    let d = net.dim();
    let mut pilot_rng = rng::stream(cfg.seed, "pilot");
    let (theta0, sigma0) = pilot_init(&net, q, &mut pilot_rng);
    let mut anchor = Vec::with_capacity(1 + d);
    anchor.push(theta0);
    anchor.extend_from_slice(&sigma0);
    let anchor_theta = Param::new(anchor)?;
    let anchor_x = SaceChain {
        y: vec![1.0; d],
        z: vec![0.5; d],
    };
    // for extreme q the pilot sigma can sit arbitrarily close to zero; widen
    // the initial sigma box so the anchor always lies in K_0
    let smax_fit = sigma0
        .iter()
        .fold(cfg.family.smax0, |m, &s| m.max(-2.0 / s));
    let family = SaceFamily::new(d, cfg.family.theta_max0, smax_fit, cfg.family.growth);
    let field = SaceField::new(q, net.clone());
    let kernel = SaceKernel { net };
    let trace = run_generic(cfg, &family, &kernel, &field, &anchor_x, &anchor_theta)?;
    Ok((trace, field.clip_events()))
}

fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Execute and persist. Returns the output together with the file paths.
pub fn run_to_dir(cfg: &RunConfig, out_dir: &Path) -> Result<(RunOutput, PathBuf, PathBuf), RunError> {
    let out = execute(cfg)?;
    fs::create_dir_all(out_dir)?;
    let trace_path = out_dir.join("trace.csv");
    let summary_path = out_dir.join("summary.json");
    write_atomic(&trace_path, &out.trace.to_csv())?;
    let json = serde_json::to_string_pretty(&out.summary).expect("summary serializes");
    write_atomic(&summary_path, &format!("{json}\n"))?;
    Ok((out, trace_path, summary_path))
}
