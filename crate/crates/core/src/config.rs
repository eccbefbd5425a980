//! Run configuration: strict JSON schema, documented defaults, validation
//! errors that name the offending field path.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bridge::BridgeNetwork;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("unknown field `{field}`")]
    UnknownField { field: String },
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Quantile,
    Median,
    Kohonen,
    Sace,
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Experiment::Quantile => "quantile",
            Experiment::Median => "median",
            Experiment::Kohonen => "kohonen",
            Experiment::Sace => "sace",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub gamma0: f64,
    pub beta: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            gamma0: 1.0,
            beta: 0.6,
        }
    }
}

/// Compact-family parameters. `radius0`/`growth` drive the ball families of
/// the quantile and median experiments; `theta_max0`/`smax0` bound the
/// cross-entropy composite iterate; `q0` pins the separation floor of the
/// quantization family (auto-fitted to the anchor when absent).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyConfig {
    pub radius0: f64,
    pub growth: f64,
    pub theta_max0: f64,
    pub smax0: f64,
    pub q0: Option<usize>,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            radius0: 2.0,
            growth: 2.0,
            theta_max0: 8.0,
            smax0: 64.0,
            q0: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    IidNormal {
        #[serde(default)]
        mean: f64,
        #[serde(default = "one")]
        sd: f64,
    },
    IidUniform01,
    IidSphericalNormal {
        #[serde(default = "one")]
        sd: f64,
    },
    IidMixture {
        centers: Vec<Vec<f64>>,
        #[serde(default = "one")]
        sd: f64,
    },
    Ar1 {
        rho: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
    RwmUniform01 {
        #[serde(default = "quarter")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn quarter() -> f64 {
    0.25
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub weights: Vec<f64>,
    pub paths: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub family: FamilyConfig,
    #[serde(default)]
    pub kernel: Option<KernelConfig>,
    /// Quantile level for the quantile and cross-entropy experiments.
    #[serde(default)]
    pub q: Option<f64>,
    /// Ambient dimension (median data, quantization samples).
    #[serde(default)]
    pub dim: Option<usize>,
    /// Codebook size for the quantization experiment.
    #[serde(default)]
    pub n_codes: Option<usize>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub network: Option<NetworkConfig>,
    #[serde(default = "default_thin")]
    pub thin: usize,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    #[serde(default = "default_max_truncations")]
    pub max_truncations: usize,
}

fn default_budget() -> usize {
    200_000
}

fn default_thin() -> usize {
    1
}

fn default_out_dir() -> String {
    "out".to_string()
}

fn default_max_truncations() -> usize {
    10_000
}

/// Parse and fully validate a config document; experiment-specific defaults
/// are filled in, so the returned value round-trips into an equivalent run.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg: RunConfig = serde_json::from_str(text).map_err(classify_serde_error)?;
    cfg.resolve();
    cfg.validate()?;
    Ok(cfg)
}

fn classify_serde_error(err: serde_json::Error) -> ConfigError {
    let msg = err.to_string();
    if let Some(rest) = msg.strip_prefix("unknown field `") {
        if let Some(end) = rest.find('`') {
            return ConfigError::UnknownField {
                field: rest[..end].to_string(),
            };
        }
    }
    ConfigError::Parse(msg)
}

impl RunConfig {
    /// Fill experiment-specific defaults.
    pub fn resolve(&mut self) {
        match self.experiment {
            Experiment::Quantile => {
                self.kernel
                    .get_or_insert(KernelConfig::IidNormal { mean: 0.0, sd: 1.0 });
            }
            Experiment::Median => {
                self.dim.get_or_insert(2);
                self.kernel
                    .get_or_insert(KernelConfig::IidSphericalNormal { sd: 1.0 });
            }
            Experiment::Kohonen => {
                self.dim.get_or_insert(1);
                self.n_codes.get_or_insert(2);
                self.lambda.get_or_insert(1e-4);
                self.delta.get_or_insert(1.0);
                self.kernel
                    .get_or_insert(KernelConfig::RwmUniform01 { scale: 0.25 });
            }
            Experiment::Sace => {
                let net = self
                    .network
                    .get_or_insert_with(|| NetworkConfig {
                        weights: vec![1.0, 2.0, 3.0, 1.0, 2.0],
                        paths: vec![vec![0, 3], vec![1, 4], vec![0, 2, 4], vec![1, 2, 3]],
                    });
                let _ = net;
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.budget < 1 {
            return Err(invalid("budget", "must be at least 1"));
        }
        if self.thin < 1 {
            return Err(invalid("thin", "must be at least 1"));
        }
        if !(self.schedule.gamma0 > 0.0) {
            return Err(invalid("schedule.gamma0", "must be positive"));
        }
        if !(self.schedule.beta > 0.5 && self.schedule.beta <= 1.0) {
            return Err(invalid("schedule.beta", "must lie in (1/2, 1]"));
        }
        if !(self.family.radius0 > 0.0) {
            return Err(invalid("family.radius0", "must be positive"));
        }
        if !(self.family.growth > 1.0) {
            return Err(invalid("family.growth", "must exceed 1"));
        }
        if !(self.family.theta_max0 > 0.0) {
            return Err(invalid("family.theta_max0", "must be positive"));
        }
        if !(self.family.smax0 > 1.0) {
            return Err(invalid("family.smax0", "must exceed 1"));
        }
        if let Some(q0) = self.family.q0 {
            if q0 < 1 {
                return Err(invalid("family.q0", "must be at least 1"));
            }
        }
        if let Some(kernel) = &self.kernel {
            self.validate_kernel(kernel)?;
        }
        match self.experiment {
            Experiment::Quantile | Experiment::Sace => {
                let q = self
                    .q
                    .ok_or_else(|| invalid("q", "required for this experiment"))?;
                if !(q > 0.0 && q < 1.0) {
                    return Err(invalid("q", "must lie in (0, 1)"));
                }
            }
            _ => {}
        }
        match self.experiment {
            Experiment::Quantile => {
                if !matches!(
                    self.kernel,
                    Some(KernelConfig::IidNormal { .. })
                        | Some(KernelConfig::IidUniform01)
                        | Some(KernelConfig::Ar1 { .. })
                ) {
                    return Err(invalid("kernel", "quantile supports iid_normal, iid_uniform01 or ar1"));
                }
            }
            Experiment::Median => {
                let dim = self.dim.unwrap_or(2);
                if dim < 1 {
                    return Err(invalid("dim", "must be at least 1"));
                }
                match &self.kernel {
                    Some(KernelConfig::IidSphericalNormal { .. }) => {}
                    Some(KernelConfig::IidMixture { centers, .. }) => {
                        if centers.is_empty() {
                            return Err(invalid("kernel.centers", "must be nonempty"));
                        }
                        if centers.iter().any(|c| c.len() != dim) {
                            return Err(invalid(
                                "kernel.centers",
                                format!("every center must have dimension {dim}"),
                            ));
                        }
                    }
                    _ => {
                        return Err(invalid(
                            "kernel",
                            "median supports iid_spherical_normal or iid_mixture",
                        ))
                    }
                }
            }
            Experiment::Kohonen => {
                if self.dim.unwrap_or(1) < 1 {
                    return Err(invalid("dim", "must be at least 1"));
                }
                if self.n_codes.unwrap_or(2) < 1 {
                    return Err(invalid("n_codes", "must be at least 1"));
                }
                if !(self.lambda.unwrap_or(1e-4) > 0.0) {
                    return Err(invalid("lambda", "must be positive"));
                }
                if !(self.delta.unwrap_or(1.0) > 0.0) {
                    return Err(invalid("delta", "must be positive"));
                }
                if !matches!(
                    self.kernel,
                    Some(KernelConfig::RwmUniform01 { .. }) | Some(KernelConfig::IidUniform01)
                ) {
                    return Err(invalid(
                        "kernel",
                        "kohonen supports rwm_uniform01 or iid_uniform01",
                    ));
                }
            }
            Experiment::Sace => {
                if self.kernel.is_some() {
                    return Err(invalid(
                        "kernel",
                        "the cross-entropy experiment owns its kernel; leave this unset",
                    ));
                }
                let net = self.network.as_ref().expect("resolved");
                BridgeNetwork::new(net.weights.clone(), net.paths.clone())
                    .map_err(|m| invalid("network", m))?;
            }
        }
        Ok(())
    }

    fn validate_kernel(&self, kernel: &KernelConfig) -> Result<(), ConfigError> {
        match kernel {
            KernelConfig::IidNormal { sd, .. } => {
                if !(*sd > 0.0) {
                    return Err(invalid("kernel.sd", "must be positive"));
                }
            }
            KernelConfig::IidSphericalNormal { sd } | KernelConfig::IidMixture { sd, .. } => {
                if !(*sd > 0.0) {
                    return Err(invalid("kernel.sd", "must be positive"));
                }
            }
            KernelConfig::Ar1 { rho, sigma } => {
                if !(rho.abs() < 1.0) {
                    return Err(invalid("kernel.rho", "must satisfy |rho| < 1"));
                }
                if !(*sigma >= 0.0) {
                    return Err(invalid("kernel.sigma", "must be nonnegative"));
                }
            }
            KernelConfig::RwmUniform01 { scale } => {
                if !(*scale > 0.0) {
                    return Err(invalid("kernel.scale", "must be positive"));
                }
            }
            KernelConfig::IidUniform01 => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_quantile_config_fills_defaults() {
        let cfg = parse_config(r#"{"experiment":"quantile","seed":7,"q":0.9}"#).unwrap();
        assert_eq!(cfg.budget, 200_000);
        assert_eq!(cfg.schedule, ScheduleConfig { gamma0: 1.0, beta: 0.6 });
        assert_eq!(cfg.thin, 1);
        assert!(matches!(cfg.kernel, Some(KernelConfig::IidNormal { .. })));
    }

    #[test]
    fn bad_beta_names_the_field() {
        let err = parse_config(
            r#"{"experiment":"quantile","seed":0,"q":0.9,"schedule":{"gamma0":1.0,"beta":0.4}}"#,
        )
        .unwrap_err();
        match err {
            ConfigError::Validation { field, .. } => assert_eq!(field, "schedule.beta"),
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn misspelled_key_is_unknown_field() {
        let err = parse_config(
            r#"{"experiment":"quantile","seed":0,"q":0.9,"schedule":{"gama0":1.0}}"#,
        )
        .unwrap_err();
        match err {
            ConfigError::UnknownField { field } => assert_eq!(field, "gama0"),
            other => panic!("expected unknown-field error, got {other}"),
        }
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(
            parse_config("{not json"),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn missing_q_is_rejected() {
        let err = parse_config(r#"{"experiment":"sace","seed":0}"#).unwrap_err();
        match err {
            ConfigError::Validation { field, .. } => assert_eq!(field, "q"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn sace_rejects_explicit_kernel() {
        let err = parse_config(
            r#"{"experiment":"sace","seed":0,"q":0.99,"kernel":{"type":"iid_uniform01"}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Validation { ref field, .. } if field == "kernel"));
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = parse_config(r#"{"experiment":"kohonen","seed":3}"#).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back = parse_config(&text).unwrap();
        assert_eq!(back, cfg);
    }
}
