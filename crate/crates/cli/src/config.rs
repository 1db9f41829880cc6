use std::fmt;
use std::path::{Path, PathBuf};

use reservoir_qec::compiler::Protocol;
use reservoir_qec::dynamics::{NoiseParams, SimConfig};
use serde::Deserialize;

/// Rejected configuration or command-line input (exit code 2).
#[derive(Debug)]
pub struct InvalidInput(pub String);

impl fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidInput {}

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    InvalidInput(msg.into()).into()
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolName {
    Measured,
    MeasurementFree,
}

impl From<ProtocolName> for Protocol {
    fn from(p: ProtocolName) -> Self {
        match p {
            ProtocolName::Measured => Protocol::Measured,
            ProtocolName::MeasurementFree => Protocol::MeasurementFree,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    #[default]
    EveryStep,
    RoundEnds,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub protocol: ProtocolName,
    pub gamma_h: f64,
    pub gamma_c: f64,
    pub n_c: f64,
}

fn default_n_sub() -> usize {
    SimConfig::default().n_sub
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub rounds: usize,
    pub n_traj: u64,
    pub master_seed: u64,
    #[serde(default = "default_n_sub")]
    pub n_sub: usize,
    #[serde(default)]
    pub oracle: bool,
    /// Keep full-register densities at every sample point (needed for the
    /// total entropy).
    #[serde(default)]
    pub full_state: bool,
    #[serde(default)]
    pub sampling: Sampling,
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub run: RunSection,
}

/// Upper bound on memory for full-register samples.
const FULL_STATE_BUDGET: usize = 1 << 30;

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn protocol(&self) -> Protocol {
        self.model.protocol.into()
    }

    pub fn noise(&self) -> anyhow::Result<NoiseParams<f64>> {
        let m = &self.model;
        NoiseParams::new(m.gamma_h, m.gamma_c, m.n_c).map_err(|e| invalid(e.to_string()))
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            n_sub: self.run.n_sub,
            ..SimConfig::default()
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let noise = self.noise()?;
        self.sim_config().validate().map_err(|e| invalid(e.to_string()))?;
        let r = &self.run;
        if r.rounds == 0 {
            return Err(invalid("rounds must be at least 1"));
        }
        if r.n_traj == 0 {
            return Err(invalid("n_traj must be at least 1"));
        }
        let reg = self.protocol().register();
        let worst_rate = noise.gamma_h * reg.n_qubits() as f64
            + (noise.decay_rate() + noise.excitation_rate()) * reg.n_ancilla as f64;
        if worst_rate / r.n_sub as f64 >= 1.0 {
            return Err(invalid(format!(
                "n_sub = {} is too small: jump probability per sub-step reaches {:.3}",
                r.n_sub,
                worst_rate / r.n_sub as f64
            )));
        }
        if r.full_state || r.oracle {
            let steps = match r.sampling {
                Sampling::EveryStep => self.protocol().steps_per_round(),
                Sampling::RoundEnds => 1,
            };
            let bytes = r.rounds * steps * reg.dim() * reg.dim() * 16;
            if bytes > FULL_STATE_BUDGET {
                return Err(invalid(format!(
                    "full-register sampling would hold {} MiB; reduce rounds or use sampling = \"round_ends\"",
                    bytes >> 20
                )));
            }
        }
        Ok(())
    }
}
