use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::complexes::CECH_ORACLE_MAX_POINTS;
use crate::error::{Error, Result};
use crate::geometry::{BiLipschitzMap, MetricSpace};
use crate::sampling::Measure;

/// Largest sample size per pipeline.
pub const MAX_N_MST: usize = 100_000;
pub const MAX_N_ALPHA2D: usize = 20_000;
pub const MAX_N_RIPS: usize = 1_000;

/// Filtration used for degrees `i ≥ 1`; degree 0 always takes the MST path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComplexSpec {
    Alpha2d,
    /// Vietoris–Rips up to `max_dim`, truncated at `max_scale` (radius units).
    /// Without a scale, `3 (ln n / n)^{1/m}` times the cloud's radius is used.
    Rips {
        max_dim: usize,
        #[serde(default)]
        max_scale: Option<f64>,
    },
    CechOracle {
        max_dim: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed `|slope − (m − α)/m|`.
    pub slope: f64,
    /// Band factor for bounded-ratio probes: values stay in `[v₀/f, v₀·f]`.
    pub band_factor: f64,
    /// Required fraction of largest-n trials near the fitted prediction.
    pub quorum: f64,
    /// Relative half-width around the prediction for the quorum.
    pub quorum_rel: f64,
    /// Allowed `|m̂ − m| / m`.
    pub dimension_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            slope: 0.05,
            band_factor: 3.0,
            quorum: 0.9,
            quorum_rel: 0.1,
            dimension_rel: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub degree: usize,
    pub alpha: f64,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub measure: Measure,
    pub complex: ComplexSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<BiLipschitzMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Intrinsic dimension `m` of the sampled measure.
    pub fn m(&self) -> usize {
        self.measure.intrinsic_dim()
    }

    /// `(m − α)/m`, the growth exponent of `E_α^i` for `α < m`.
    pub fn expected_slope(&self) -> f64 {
        let m = self.m() as f64;
        (m - self.alpha) / m
    }

    pub fn validate(&self) -> Result<()> {
        self.measure.validate().map_err(|e| Error::Config(e.to_string()))?;
        let m = self.m();
        if self.degree >= m {
            return config_err(format!("degree {} must be below the measure dimension {m}", self.degree));
        }
        if !(self.alpha > 0.0) || self.alpha > m as f64 {
            return config_err(format!("alpha must lie in (0, {m}], got {}", self.alpha));
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return config_err("n_grid must be nonempty and strictly increasing");
        }
        if self.n_grid[0] < 2 {
            return config_err("n_grid values must be at least 2");
        }
        if self.trials == 0 {
            return config_err("trials must be at least 1");
        }
        if self.jobs == Some(0) {
            return config_err("jobs must be at least 1");
        }
        let t = &self.tolerances;
        if !(t.slope > 0.0 && t.band_factor >= 1.0 && t.quorum > 0.0 && t.quorum <= 1.0 && t.quorum_rel > 0.0 && t.dimension_rel > 0.0) {
            return config_err("tolerances out of range");
        }
        let space = self.measure.space();
        if let Some(map) = &self.map {
            map.validate().map_err(|e| Error::Config(e.to_string()))?;
            let MetricSpace::Euclidean { dim } = space else {
                return config_err("maps apply to Euclidean measures only");
            };
            if map.domain_dim().is_some_and(|k| k != dim) {
                return config_err(format!("map dimension does not match R^{dim}"));
            }
        }
        let n_max = *self.n_grid.last().unwrap();
        let cap = if self.degree == 0 {
            MAX_N_MST
        } else {
            match &self.complex {
                ComplexSpec::Alpha2d => {
                    if space != (MetricSpace::Euclidean { dim: 2 }) || m != 2 {
                        return config_err("alpha2d needs a 2-dimensional measure in the plane");
                    }
                    MAX_N_ALPHA2D
                }
                ComplexSpec::Rips { max_dim, max_scale } => {
                    if *max_dim < self.degree + 1 {
                        return config_err(format!("rips max_dim must be at least {}", self.degree + 1));
                    }
                    if max_scale.is_some_and(|s| !(s > 0.0)) {
                        return config_err("rips max_scale must be positive");
                    }
                    MAX_N_RIPS
                }
                ComplexSpec::CechOracle { max_dim } => {
                    if *max_dim < self.degree + 1 {
                        return config_err(format!("cech_oracle max_dim must be at least {}", self.degree + 1));
                    }
                    if !matches!(space, MetricSpace::Euclidean { .. }) {
                        return config_err("cech_oracle needs a Euclidean measure");
                    }
                    CECH_ORACLE_MAX_POINTS
                }
            }
        };
        if n_max > cap {
            return config_err(format!("n = {n_max} exceeds the cap of {cap} for this pipeline"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = r#"
seed = 7
degree = 0
alpha = 1.0
n_grid = [256, 512, 1024]
trials = 5

[measure]
kind = "uniform_cube"
dim = 2
side = 1.0

[complex]
kind = "alpha2d"
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml_str(SQUARE).unwrap();
        assert_eq!(cfg.m(), 2);
        assert_eq!(cfg.expected_slope(), 0.5);
        assert_eq!(cfg.tolerances, Tolerances::default());
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_inconsistent_configs() {
        let bad = |from: &str, to: &str| ExperimentConfig::from_toml_str(&SQUARE.replace(from, to));
        assert!(matches!(bad("degree = 0", "degree = 2"), Err(Error::Config(_))));
        assert!(bad("alpha = 1.0", "alpha = 0.0").is_err());
        assert!(bad("[256, 512, 1024]", "[512, 256]").is_err());
        assert!(bad("trials = 5", "trials = 0").is_err());
        assert!(bad("degree = 0", "degree = 1\nmystery = 3").is_err());
        assert!(bad("dim = 2", "dim = 3").is_ok());
        let alpha3d = SQUARE.replace("degree = 0", "degree = 1").replace("dim = 2", "dim = 3");
        assert!(ExperimentConfig::from_toml_str(&alpha3d).is_err());
        let huge = SQUARE.replace("degree = 0", "degree = 1").replace("1024]", "1024, 40000]");
        assert!(ExperimentConfig::from_toml_str(&huge).is_err());
    }
}
