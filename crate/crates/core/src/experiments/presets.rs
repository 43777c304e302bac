//! Named scenario presets shipped with the library.
//!
//! Each preset is a JSON configuration file under `presets/`, embedded at compile
//! time so the CLI and the tests read the same source.

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

macro_rules! preset {
    ($name:literal) => {
        ($name, include_str!(concat!("../../presets/", $name, ".json")))
    };
}

const PRESETS: &[(&str, &str)] = &[
    preset!("unruh/no-blockers"),
    preset!("unruh/B0-D"),
    preset!("unruh/B0-C"),
    preset!("unruh/B1"),
    preset!("unruh/both"),
    preset!("unruh/original"),
    preset!("unruh/delayed-choice-particle"),
    preset!("unruh/delayed-choice-wave"),
    preset!("pessoa/no-blockers"),
    preset!("pessoa/B0-D"),
    preset!("pessoa/B0-C"),
    preset!("pessoa/B1"),
    preset!("pessoa/both-blockers"),
    preset!("hom/no-blockers"),
    preset!("hom/B0-C"),
    preset!("hom/B0-D"),
];

/// All preset names in a stable order.
pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// Canonical name for a preset, accepting `both`/`both-blockers` and the
/// `two_photon_unruh/` prefix for `hom/`.
pub fn resolve(name: &str) -> Option<&'static str> {
    let (group, scenario) = name.split_once('/')?;
    let group = match group {
        "two_photon_unruh" | "two-photon" | "hom" => "hom",
        g => g,
    };
    let candidates = match scenario {
        "both" | "both-blockers" => vec![format!("{group}/both"), format!("{group}/both-blockers")],
        s => vec![format!("{group}/{s}")],
    };
    candidates.iter().find_map(|c| PRESETS.iter().find(|(n, _)| n == c).map(|(n, _)| *n))
}

/// JSON text of a preset.
pub fn source(name: &str) -> Result<&'static str> {
    let canonical = resolve(name).ok_or_else(|| unknown(name))?;
    Ok(PRESETS.iter().find(|(n, _)| *n == canonical).map(|(_, s)| *s).expect("resolved name exists"))
}

/// Parsed configuration of a preset.
pub fn load(name: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::from_json(source(name)?)
}

fn unknown(name: &str) -> Error {
    Error::Config(format!("unknown preset {name:?}; available: {}", names().join(", ")))
}
