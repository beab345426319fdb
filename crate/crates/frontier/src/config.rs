//! Estimator settings from defaults, an optional JSON file and flags, in
//! increasing order of precedence.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use frontier_core::adapt::SmallArgument;
use frontier_core::{EstimatorConfig, Loss};
use serde::{Deserialize, Serialize};

use crate::error::AppError;

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "FRONTIER_ADAPT_THREADS";

/// `q` in a config file: a number, or the string `"pointwise"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum QSetting {
    Number(f64),
    Name(String),
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub beta_star: Option<usize>,
    pub h0_exponent: Option<f64>,
    pub rho: Option<f64>,
    pub m_exponent: Option<f64>,
    pub c_beta: Option<f64>,
    pub j_beta: Option<usize>,
    pub q: Option<QSetting>,
    pub quadrature_tol: Option<f64>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub inv_alpha_cap: Option<f64>,
    pub bias_correction: Option<bool>,
    /// `"power_law"` or `"saturate"`.
    pub small_argument: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = fs::read_to_string(path)
            .map_err(|e| AppError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| AppError::Config(format!("config {}: {e}", path.display())))
    }
}

pub fn parse_q(s: &str) -> Result<Loss, AppError> {
    if s.eq_ignore_ascii_case("pointwise") {
        return Ok(Loss::Pointwise);
    }
    match s.parse::<f64>() {
        Ok(q) if q >= 1.0 && q.is_finite() => Ok(Loss::Lq(q)),
        _ => Err(AppError::Config(format!(
            "q must be 'pointwise' or a number >= 1, got '{s}'"
        ))),
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct SharedArgs {
    /// JSON file with estimator settings; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed for simulations.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (falls back to FRONTIER_ADAPT_THREADS).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Output directory; created if missing.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Maximal local polynomial degree.
    #[arg(long, global = true)]
    pub beta_star: Option<usize>,
    /// Smallest bandwidth is n^(h0_exponent - 1).
    #[arg(long, global = true)]
    pub h0_exponent: Option<f64>,
    /// Ratio of consecutive bandwidths.
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    /// Exponent of the order statistic count used for tail estimation.
    #[arg(long, global = true)]
    pub m_exponent: Option<f64>,
    /// Multiplier of the critical values.
    #[arg(long, global = true)]
    pub c_beta: Option<f64>,
    /// Divisor inside the critical values.
    #[arg(long, global = true)]
    pub j_beta: Option<usize>,
    /// Loss: 'pointwise' or q >= 1 for the L_q loss.
    #[arg(long, global = true)]
    pub q: Option<String>,
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub estimator: EstimatorConfig,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl SharedArgs {
    pub fn resolve(&self) -> Result<Settings, AppError> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let mut cfg = EstimatorConfig::default();
        macro_rules! merge {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.or(file.$field) {
                    cfg.$field = v;
                }
            )*};
        }
        merge!(beta_star, h0_exponent, rho, m_exponent, c_beta, j_beta);
        if let Some(v) = file.quadrature_tol {
            cfg.quadrature_tol = v;
        }
        if let Some(v) = file.inv_alpha_cap {
            cfg.inv_alpha_cap = v;
        }
        if let Some(v) = file.bias_correction {
            cfg.bias_correction = v;
        }
        if let Some(v) = &file.small_argument {
            cfg.small_argument = match v.as_str() {
                "power_law" => SmallArgument::PowerLaw,
                "saturate" => SmallArgument::Saturate,
                other => {
                    return Err(AppError::Config(format!(
                        "small_argument must be 'power_law' or 'saturate', got '{other}'"
                    )))
                }
            };
        }
        cfg.loss = match (&self.q, &file.q) {
            (Some(s), _) => parse_q(s)?,
            (None, Some(QSetting::Name(s))) => parse_q(s)?,
            (None, Some(QSetting::Number(q))) => parse_q(&q.to_string())?,
            (None, None) => cfg.loss,
        };
        let seed = self.seed.or(file.seed).unwrap_or(0);
        cfg.seed = seed;
        cfg.validate()?;
        let threads = self.threads.or(file.threads);
        if threads == Some(0) {
            return Err(AppError::Config("threads must be at least 1".into()));
        }
        Ok(Settings {
            estimator: cfg,
            seed,
            threads,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn flags_override_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(
            f,
            r#"{{"rho": 1.5, "beta_star": 1, "q": 2, "seed": 9, "small_argument": "saturate"}}"#
        )
        .unwrap();
        let args = SharedArgs {
            config: Some(f.path().to_path_buf()),
            rho: Some(3.0),
            ..Default::default()
        };
        let s = args.resolve().unwrap();
        assert_eq!(s.estimator.rho, 3.0);
        assert_eq!(s.estimator.beta_star, 1);
        assert_eq!(s.estimator.loss, Loss::Lq(2.0));
        assert_eq!(s.seed, 9);
        assert_eq!(s.estimator.small_argument, SmallArgument::Saturate);
    }

    #[test]
    fn pointwise_name_and_bad_values() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, r#"{{"q": "pointwise"}}"#).unwrap();
        let args = SharedArgs {
            config: Some(f.path().to_path_buf()),
            ..Default::default()
        };
        assert_eq!(args.resolve().unwrap().estimator.loss, Loss::Pointwise);
        assert!(parse_q("0.5").is_err());
        let mut g = tempfile::NamedTempFile::new().unwrap();
        write!(g, r#"{{"bogus": 1}}"#).unwrap();
        let args = SharedArgs {
            config: Some(g.path().to_path_buf()),
            ..Default::default()
        };
        assert!(matches!(args.resolve(), Err(AppError::Config(_))));
    }

    #[test]
    fn invalid_estimator_setting_is_config_error() {
        let args = SharedArgs {
            rho: Some(1.0),
            ..Default::default()
        };
        let e = args.resolve().unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
