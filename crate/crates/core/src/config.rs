//! JSON scenario files.
//!
//! ```json
//! {
//!   "version": "1",
//!   "system": {"gamma": 1.0, "omega": 0.0},
//!   "input": {"type": "single_photon", "wavepacket": {"omega_bw": 1.5, "t_center": 3.0}},
//!   "detection": "homodyne",
//!   "initial_bloch": [0.0, 0.0, -1.0],
//!   "integrator": {"dt": 0.001, "t_final": 15.0, "seed": 1, "record_stride": 10},
//!   "ensemble": {"n_trajectories": 50}
//! }
//! ```
//!
//! Cat inputs use `"branches": [{"weight_re", "weight_im", "pulse": [{"t0", "t1", "re", "im"}]}]`.
//! Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::{BlochVector, C64};
use crate::engine::IntegratorConfig;
use crate::ensemble::Scenario;
use crate::error::{Error, Result};
use crate::field::{CatStateInput, FieldInput, GaussianWavepacket, PulseAmplitude, PulseSegment};
use crate::filter::{Detection, Filter};

pub const CONFIG_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: String,
    pub system: SystemConfig,
    pub input: InputConfig,
    pub detection: Detection,
    pub initial_bloch: [f64; 3],
    pub integrator: IntegratorConfig,
    pub ensemble: EnsembleConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub gamma: f64,
    pub omega: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputType {
    Vacuum,
    SinglePhoton,
    Cat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    #[serde(rename = "type")]
    pub kind: InputType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavepacket: Option<WavepacketConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branches: Option<Vec<BranchConfig>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavepacketConfig {
    pub omega_bw: f64,
    pub t_center: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchConfig {
    pub weight_re: f64,
    pub weight_im: f64,
    pub pulse: Vec<SegmentConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub t0: f64,
    pub t1: f64,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n_trajectories: usize,
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(config_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported version {:?} (expected {CONFIG_VERSION:?})",
                self.version
            )));
        }
        self.to_scenario("validation").map(|_| ())
    }

    pub fn field_input(&self) -> Result<FieldInput> {
        let inp = &self.input;
        match inp.kind {
            InputType::Vacuum => {
                if inp.wavepacket.is_some() || inp.branches.is_some() {
                    return Err(Error::Config("vacuum input takes no wavepacket or branches".into()));
                }
                Ok(FieldInput::Vacuum)
            }
            InputType::SinglePhoton => {
                if inp.branches.is_some() {
                    return Err(Error::Config("single_photon input takes no branches".into()));
                }
                let w = inp
                    .wavepacket
                    .ok_or_else(|| Error::Config("single_photon input needs a wavepacket".into()))?;
                let wp = GaussianWavepacket::new(w.omega_bw, w.t_center).map_err(config_err)?;
                Ok(FieldInput::SinglePhoton(wp))
            }
            InputType::Cat => {
                if inp.wavepacket.is_some() {
                    return Err(Error::Config("cat input takes no wavepacket".into()));
                }
                let branches = inp
                    .branches
                    .as_ref()
                    .filter(|b| !b.is_empty())
                    .ok_or_else(|| Error::Config("cat input needs at least one branch".into()))?;
                let mut weights = Vec::new();
                let mut pulses = Vec::new();
                for b in branches {
                    weights.push(C64::new(b.weight_re, b.weight_im));
                    let segs = b
                        .pulse
                        .iter()
                        .map(|s| PulseSegment {
                            t_start: s.t0,
                            t_end: s.t1,
                            value: C64::new(s.re, s.im),
                        })
                        .collect();
                    pulses.push(PulseAmplitude::new(segs).map_err(config_err)?);
                }
                Ok(FieldInput::Cat(CatStateInput::new(weights, pulses).map_err(config_err)?))
            }
        }
    }

    pub fn to_scenario(&self, name: &str) -> Result<Scenario> {
        let SystemConfig { gamma, omega } = self.system;
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Config(format!("gamma must be positive, got {gamma}")));
        }
        if !omega.is_finite() {
            return Err(Error::Config(format!("omega must be finite, got {omega}")));
        }
        if self.initial_bloch.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("initial_bloch must be finite".into()));
        }
        let sc = Scenario {
            name: name.to_string(),
            filter: Filter::two_level(gamma, omega, self.field_input()?),
            detection: self.detection,
            initial: BlochVector::from(self.initial_bloch),
            integrator: self.integrator,
            n_trajectories: self.ensemble.n_trajectories,
            record_blocks: self.input.kind != InputType::Vacuum,
            keep_trajectories: false,
        };
        sc.validate()?;
        Ok(sc)
    }
}
