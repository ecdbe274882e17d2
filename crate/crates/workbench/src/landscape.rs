use std::path::Path;

use mupo_core::LandscapeConfig;
use serde::Deserialize;

use crate::error::{Error, Result};

/// Landscapes shipped with the binary, by name.
pub const CANNED_LANDSCAPES: [(&str, &str); 3] = [
    ("easy", include_str!("../landscapes/easy.toml")),
    (
        "collapse-demo",
        include_str!("../landscapes/collapse-demo.toml"),
    ),
    (
        "deceptive-modes",
        include_str!("../landscapes/deceptive-modes.toml"),
    ),
];

#[derive(Deserialize)]
struct LandscapeFile {
    #[serde(flatten)]
    landscape: LandscapeConfig,
    learning_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedLandscape {
    /// Canned name, or the path it was read from.
    pub name: String,
    pub landscape: LandscapeConfig,
    /// Step size the landscape was tuned for, if it names one.
    pub learning_rate: Option<f64>,
}

fn parse(name: &str, text: &str) -> Result<LoadedLandscape> {
    let file: LandscapeFile = toml::from_str(text).map_err(|e| Error::ConfigFile {
        path: name.into(),
        message: e.to_string(),
    })?;
    file.landscape.validate()?;
    Ok(LoadedLandscape {
        name: name.to_string(),
        landscape: file.landscape,
        learning_rate: file.learning_rate,
    })
}

/// Resolves a canned landscape name, falling back to a TOML file path.
pub fn load_landscape(spec: &str) -> Result<LoadedLandscape> {
    if let Some((name, text)) = CANNED_LANDSCAPES.iter().find(|(n, _)| *n == spec) {
        return parse(name, text);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::UnknownLandscape(spec.to_string()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(spec, &text)
}
