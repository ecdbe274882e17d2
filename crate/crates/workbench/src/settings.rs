//! Layered run configuration: built-in defaults, then a TOML file, then
//! command-line flags. The last layer that sets a field wins, and the
//! winner is remembered per field so it can be reported.

use std::collections::BTreeMap;
use std::path::Path;

use mupo_core::{AdvantageScope, MupoConfig, StdEstimator};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a resolved field came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Default,
    Landscape,
    File,
    Flag,
}

/// A partial config. Keys match the serialized [`MupoConfig`] names.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    #[serde(rename = "G_min")]
    pub g_min: Option<usize>,
    pub beta: Option<f64>,
    pub lambda_max: Option<f64>,
    pub lambda_min: Option<f64>,
    pub t_max: Option<usize>,
    pub clip_eps: Option<f64>,
    pub std_floor: Option<f64>,
    pub advantage_scope: Option<AdvantageScope>,
    pub std_estimator: Option<StdEstimator>,
    pub seed: Option<u64>,
    /// Simulator step size; not part of [`MupoConfig`].
    pub learning_rate: Option<f64>,
}

impl ConfigOverrides {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// The outcome of layering.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub config: MupoConfig,
    pub learning_rate: f64,
    /// Winning layer for every field, keyed by its config-file name.
    pub sources: BTreeMap<&'static str, Source>,
}

impl Resolved {
    /// Applies `layers` in order over the defaults.
    pub fn from_layers(default_learning_rate: f64, layers: &[(Source, &ConfigOverrides)]) -> Self {
        let mut cfg = MupoConfig::default();
        let mut learning_rate = default_learning_rate;
        let mut sources = BTreeMap::new();

        macro_rules! take {
            ($src:expr, $over:expr, $($field:ident => $key:literal),+) => {
                $(
                    if let Some(v) = $over.$field {
                        cfg.$field = v;
                        sources.insert($key, $src);
                    }
                )+
            };
        }

        for key in KEYS.iter().chain(["learning_rate"].iter()) {
            sources.insert(*key, Source::Default);
        }
        for &(src, over) in layers {
            take!(src, over,
                n => "N", k => "K", g_min => "G_min", beta => "beta",
                lambda_max => "lambda_max", lambda_min => "lambda_min", t_max => "t_max",
                clip_eps => "clip_eps", std_floor => "std_floor",
                advantage_scope => "advantage_scope", std_estimator => "std_estimator",
                seed => "seed");
            if let Some(lr) = over.learning_rate {
                learning_rate = lr;
                sources.insert("learning_rate", src);
            }
        }
        Self {
            config: cfg,
            learning_rate,
            sources,
        }
    }
}

/// Config-file keys in canonical order.
pub const KEYS: [&str; 12] = [
    "N",
    "K",
    "G_min",
    "beta",
    "lambda_max",
    "lambda_min",
    "t_max",
    "clip_eps",
    "std_floor",
    "advantage_scope",
    "std_estimator",
    "seed",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn later_layers_win() {
        let file: ConfigOverrides =
            toml::from_str("K = 2\nbeta = 0.5\nadvantage_scope = \"global\"").unwrap();
        let flags = ConfigOverrides {
            k: Some(4),
            ..Default::default()
        };
        let r = Resolved::from_layers(0.1, &[(Source::File, &file), (Source::Flag, &flags)]);
        assert_eq!(r.config.k, 4);
        assert_eq!(r.config.beta, 0.5);
        assert_eq!(r.config.advantage_scope, AdvantageScope::Global);
        assert_eq!(r.config.n, 15);
        assert_eq!(r.sources["K"], Source::Flag);
        assert_eq!(r.sources["beta"], Source::File);
        assert_eq!(r.sources["N"], Source::Default);
        assert_eq!(r.learning_rate, 0.1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ConfigOverrides>("gmin = 3").is_err());
        assert!(toml::from_str::<ConfigOverrides>("G_min = 3").is_ok());
    }
}
