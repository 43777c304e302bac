use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{PhaseConvention, Synthesis};

pub const DEFAULT_SHOTS: u64 = 8192;
/// Transmittance T² of the two biased beam splitters in the Pessoa Júnior setup.
pub const DEFAULT_BBS_TRANSMITTANCE: f64 = 0.96;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Unruh,
    Pessoa,
    TwoPhotonUnruh,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Unruh => "unruh",
            ExperimentKind::Pessoa => "pessoa",
            ExperimentKind::TwoPhotonUnruh => "two_photon_unruh",
        }
    }

    /// Photons injected by the preparation.
    pub fn photons(self) -> u32 {
        match self {
            ExperimentKind::TwoPhotonUnruh => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Arm of the first interferometer intercepted by blocker B₀.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum BlockerArm {
    #[default]
    #[serde(rename = "off")]
    Off,
    C,
    D,
}

/// Phase that can be swept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseName {
    PhiE,
    PhiH,
    PhiN,
}

impl PhaseName {
    pub fn name(self) -> &'static str {
        match self {
            PhaseName::PhiE => "phi_e",
            PhaseName::PhiH => "phi_h",
            PhaseName::PhiN => "phi_n",
        }
    }
}

impl FromStr for PhaseName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "phi_e" | "e" | "phie" => Ok(PhaseName::PhiE),
            "phi_h" | "h" | "phih" => Ok(PhaseName::PhiH),
            "phi_n" | "n" | "phin" => Ok(PhaseName::PhiN),
            _ => Err(Error::Config(format!("unknown phase {s:?}; expected phi_e, phi_h or phi_n"))),
        }
    }
}

impl fmt::Display for PhaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fully resolved experiment configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "ConfigFile")]
pub struct ExperimentConfig {
    pub name: Option<String>,
    pub version: u32,
    pub kind: ExperimentKind,
    pub phi_e: f64,
    pub phi_h: f64,
    pub phi_n: f64,
    pub blocker_b0: BlockerArm,
    pub blocker_b1: bool,
    /// T² of the biased beam splitters (Pessoa Júnior setup only).
    pub bbs_transmittance: f64,
    pub shots: u64,
    pub seed: u64,
    pub synthesis: Synthesis,
    pub phase_convention: PhaseConvention,
}

impl ExperimentConfig {
    /// Default phases and settings for each experiment.
    pub fn new(kind: ExperimentKind) -> Self {
        let (phi_e, phi_h, phi_n) = match kind {
            ExperimentKind::Unruh => (FRAC_PI_2, 0.0, 0.0),
            ExperimentKind::Pessoa => (0.0, FRAC_PI_2, PI),
            ExperimentKind::TwoPhotonUnruh => (PI, 0.0, 0.0),
        };
        Self {
            name: None,
            version: 1,
            kind,
            phi_e,
            phi_h,
            phi_n,
            blocker_b0: BlockerArm::Off,
            blocker_b1: false,
            bbs_transmittance: DEFAULT_BBS_TRANSMITTANCE,
            shots: DEFAULT_SHOTS,
            seed: 0,
            synthesis: Synthesis::Exact,
            phase_convention: PhaseConvention::Occupied,
        }
    }

    pub fn with_phases(mut self, phi_e: f64, phi_h: f64) -> Self {
        self.phi_e = phi_e;
        self.phi_h = phi_h;
        self
    }

    pub fn with_blockers(mut self, b0: BlockerArm, b1: bool) -> Self {
        self.blocker_b0 = b0;
        self.blocker_b1 = b1;
        self
    }

    pub fn phase(&self, name: PhaseName) -> f64 {
        match name {
            PhaseName::PhiE => self.phi_e,
            PhaseName::PhiH => self.phi_h,
            PhaseName::PhiN => self.phi_n,
        }
    }

    /// Copy with one phase replaced; errors if the experiment has no such element.
    pub fn with_phase(&self, name: PhaseName, value: f64) -> Result<Self> {
        self.check_phase(name)?;
        let mut out = self.clone();
        match name {
            PhaseName::PhiE => out.phi_e = value,
            PhaseName::PhiH => out.phi_h = value,
            PhaseName::PhiN => out.phi_n = value,
        }
        out.validate()?;
        Ok(out)
    }

    pub fn check_phase(&self, name: PhaseName) -> Result<()> {
        let ok = match self.kind {
            ExperimentKind::Pessoa => name != PhaseName::PhiE,
            _ => name != PhaseName::PhiN,
        };
        if !ok {
            return Err(Error::Config(format!("{} has no {} element", self.kind, name)));
        }
        Ok(())
    }

    pub fn has_blockers(&self) -> bool {
        self.blocker_b0 != BlockerArm::Off || self.blocker_b1
    }

    pub fn validate(&self) -> Result<()> {
        for (label, v) in [("phi_e", self.phi_e), ("phi_h", self.phi_h), ("phi_n", self.phi_n)] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{label} must be finite")));
            }
        }
        if self.kind == ExperimentKind::Pessoa && !(self.bbs_transmittance > 0.0 && self.bbs_transmittance <= 1.0) {
            return Err(Error::Config(format!("bbs_transmittance must lie in (0, 1], got {}", self.bbs_transmittance)));
        }
        if self.kind == ExperimentKind::TwoPhotonUnruh && self.synthesis == Synthesis::Decomposed {
            return Err(Error::Config("decomposed synthesis needs one qubit per mode; use exact or trotter".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

/// A phase written either as a number of radians or as an expression like `3pi/2`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum Angle {
    Radians(f64),
    Text(String),
}

impl Angle {
    fn value(&self) -> Result<f64> {
        match self {
            Angle::Radians(v) => Ok(*v),
            Angle::Text(s) => parse_angle(s),
        }
    }
}

/// Parses `1.25`, `pi`, `-pi/2`, `3pi/4`, `2*pi` and similar.
pub fn parse_angle(text: &str) -> Result<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    let bad = || Error::Config(format!("cannot parse angle {text:?}"));
    let Some(at) = s.find("pi") else {
        return s.parse::<f64>().map_err(|_| bad());
    };
    let (prefix, suffix) = (&s[..at], &s[at + 2..]);
    let prefix = prefix.strip_suffix('*').unwrap_or(prefix);
    let coefficient = match prefix {
        "" | "+" => 1.0,
        "-" => -1.0,
        p => p.parse::<f64>().map_err(|_| bad())?,
    };
    let divisor = match suffix {
        "" => 1.0,
        d => d.strip_prefix('/').and_then(|d| d.parse::<f64>().ok()).filter(|d| *d != 0.0).ok_or_else(bad)?,
    };
    Ok(coefficient * PI / divisor)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    version: Option<u32>,
    kind: ExperimentKind,
    phi_e: Option<Angle>,
    phi_h: Option<Angle>,
    phi_n: Option<Angle>,
    blocker_b0: Option<BlockerArm>,
    blocker_b1: Option<bool>,
    bbs_transmittance: Option<f64>,
    shots: Option<u64>,
    seed: Option<u64>,
    synthesis: Option<Synthesis>,
    phase_convention: Option<PhaseConvention>,
}

/// Serialized form: phases and parameters without a matching element are omitted.
#[derive(Serialize)]
struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    version: u32,
    kind: ExperimentKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi_e: Option<f64>,
    phi_h: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi_n: Option<f64>,
    blocker_b0: BlockerArm,
    blocker_b1: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    bbs_transmittance: Option<f64>,
    shots: u64,
    seed: u64,
    synthesis: Synthesis,
    phase_convention: PhaseConvention,
}

impl From<ExperimentConfig> for ConfigFile {
    fn from(c: ExperimentConfig) -> Self {
        let pessoa = c.kind == ExperimentKind::Pessoa;
        ConfigFile {
            name: c.name,
            version: c.version,
            kind: c.kind,
            phi_e: (!pessoa).then_some(c.phi_e),
            phi_h: c.phi_h,
            phi_n: pessoa.then_some(c.phi_n),
            blocker_b0: c.blocker_b0,
            blocker_b1: c.blocker_b1,
            bbs_transmittance: pessoa.then_some(c.bbs_transmittance),
            shots: c.shots,
            seed: c.seed,
            synthesis: c.synthesis,
            phase_convention: c.phase_convention,
        }
    }
}

impl TryFrom<RawConfig> for ExperimentConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        let mut cfg = ExperimentConfig::new(raw.kind);
        cfg.name = raw.name;
        if let Some(v) = raw.version {
            if v != 1 {
                return Err(Error::Config(format!("unsupported config version {v}")));
            }
        }
        for (name, angle) in [(PhaseName::PhiE, &raw.phi_e), (PhaseName::PhiH, &raw.phi_h), (PhaseName::PhiN, &raw.phi_n)] {
            if let Some(a) = angle {
                cfg.check_phase(name)?;
                match name {
                    PhaseName::PhiE => cfg.phi_e = a.value()?,
                    PhaseName::PhiH => cfg.phi_h = a.value()?,
                    PhaseName::PhiN => cfg.phi_n = a.value()?,
                }
            }
        }
        if let Some(t2) = raw.bbs_transmittance {
            if cfg.kind != ExperimentKind::Pessoa {
                return Err(Error::Config("bbs_transmittance applies to the pessoa experiment only".into()));
            }
            cfg.bbs_transmittance = t2;
        }
        cfg.blocker_b0 = raw.blocker_b0.unwrap_or_default();
        cfg.blocker_b1 = raw.blocker_b1.unwrap_or(false);
        cfg.shots = raw.shots.unwrap_or(DEFAULT_SHOTS);
        cfg.seed = raw.seed.unwrap_or(0);
        cfg.synthesis = raw.synthesis.unwrap_or_default();
        cfg.phase_convention = raw.phase_convention.unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }
}
