//! Bundled scenario presets. `AERPROV_PRESET_DIR` points the loader at a
//! directory of `<name>.toml` files instead.

use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::ScenarioConfig;
use crate::error::CliError;

pub const PRESET_DIR_ENV: &str = "AERPROV_PRESET_DIR";

const BUNDLED: &[(&str, &str)] = &[
    ("tree-node", include_str!("../presets/tree-node.toml")),
    ("gas-node", include_str!("../presets/gas-node.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

pub fn bundled_text(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Preset source text, honoring the override directory.
pub fn preset_text(name: &str) -> Result<String, CliError> {
    match env::var_os(PRESET_DIR_ENV) {
        Some(dir) => {
            let path = Path::new(&dir).join(format!("{name}.toml"));
            if !path.is_file() {
                return Err(CliError::Config(format!(
                    "unknown preset `{name}`: {} does not exist",
                    path.display()
                )));
            }
            fs::read_to_string(&path).map_err(|e| CliError::io(path, e))
        }
        None => bundled_text(name).map(str::to_owned).ok_or_else(|| {
            CliError::Config(format!(
                "unknown preset `{name}`; available: {}",
                names().collect::<Vec<_>>().join(", ")
            ))
        }),
    }
}

pub fn load_preset(name: &str) -> Result<ScenarioConfig, CliError> {
    ScenarioConfig::from_toml(&preset_text(name)?)
}

pub fn load_file(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(PathBuf::from(path), e))?;
    ScenarioConfig::from_toml(&text)
}
