use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::{amplitude_damping, dephasing, depolarizing_length, KrausChannel};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// n_min against ε for the maximally mixed ζ and a few random ζ.
    Fig3,
    /// Descent ratio against ε for nested candidate pools.
    Fig4,
    /// Descent ratio at the full sample count.
    Table3,
    /// Catalyst size and consumption for both protocols.
    Fig6,
    /// Relay-position sweep for entanglement distribution.
    Fig7,
    /// Superdense coding capacity with embezzling catalysts.
    Fig9,
    /// Dense convex-split bound verification.
    #[serde(rename = "lemma1-check")]
    Lemma1Check,
    /// Embezzling protocol checks.
    #[serde(rename = "thm3-check")]
    Thm3Check,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Table3 => "table3",
            Self::Fig6 => "fig6",
            Self::Fig7 => "fig7",
            Self::Fig9 => "fig9",
            Self::Lemma1Check => "lemma1-check",
            Self::Thm3Check => "thm3-check",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChannelFamily {
    #[default]
    Dephasing,
    AmplitudeDamping,
    /// Parameterized by length; needs `alpha`.
    Depolarizing,
}

impl fmt::Display for ChannelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dephasing => "dephasing",
            Self::AmplitudeDamping => "amplitude_damping",
            Self::Depolarizing => "depolarizing",
        })
    }
}

/// One experiment: which sweep to run, over which grids, with which seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub channel: ChannelFamily,
    /// Channel parameters; relay positions s for fig7.
    #[serde(default)]
    pub noise_grid: Vec<f64>,
    #[serde(default)]
    pub epsilon_grid: Vec<f64>,
    #[serde(default = "default_sample_count")]
    pub sample_count: usize,
    #[serde(default)]
    pub seed: u64,
    /// CSV destination; the JSON copy goes next to it with a `.json` extension.
    pub output_path: String,
    /// Loss rate for depolarizing lines.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Alice–Bob distance for fig7.
    #[serde(default)]
    pub length: Option<f64>,
    /// Copy counts (lemma1-check) or pool sizes (fig4).
    #[serde(default)]
    pub n_grid: Vec<usize>,
    /// Local dimensions (fig9).
    #[serde(default)]
    pub d_grid: Vec<usize>,
    /// Target Schmidt ranks (thm3-check).
    #[serde(default)]
    pub m_grid: Vec<usize>,
    /// Catalyst Schmidt ranks (fig9, thm3-check).
    #[serde(default)]
    pub rank_grid: Vec<usize>,
    /// Cap on dense construction dimensions.
    #[serde(default)]
    pub budget: Option<usize>,
}

fn default_sample_count() -> usize {
    200
}

fn invalid(field: &str, why: impl fmt::Display) -> Error {
    Error::InvalidInput(format!("config field `{field}`: {why}"))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn uses_noise(&self) -> bool {
        matches!(
            self.experiment,
            ExperimentKind::Fig3
                | ExperimentKind::Fig4
                | ExperimentKind::Table3
                | ExperimentKind::Fig6
                | ExperimentKind::Fig7
        )
    }

    fn uses_epsilon(&self) -> bool {
        !matches!(
            self.experiment,
            ExperimentKind::Fig9 | ExperimentKind::Lemma1Check
        )
    }

    /// Grids the experiment reads must be nonempty and in range.
    pub fn validate(&self) -> Result<()> {
        if self.output_path.trim().is_empty() {
            return Err(invalid("output_path", "empty"));
        }
        if self.uses_noise() && self.noise_grid.is_empty() {
            return Err(invalid("noise_grid", "empty"));
        }
        if self.uses_epsilon() && self.epsilon_grid.is_empty() {
            return Err(invalid("epsilon_grid", "empty"));
        }
        if let Some(e) = self
            .epsilon_grid
            .iter()
            .find(|e| !(**e > 0.0 && **e < 1.0))
        {
            return Err(invalid("epsilon_grid", format!("{e} outside (0, 1)")));
        }
        if self.uses_noise() {
            if self.experiment == ExperimentKind::Fig7 {
                self.validate_line()?;
            } else {
                for &p in &self.noise_grid {
                    self.channel_at(p)
                        .map_err(|e| invalid("noise_grid", e))?;
                }
            }
        }
        if self.sample_count == 0
            && matches!(
                self.experiment,
                ExperimentKind::Fig4
                    | ExperimentKind::Table3
                    | ExperimentKind::Fig6
                    | ExperimentKind::Fig7
                    | ExperimentKind::Lemma1Check
            )
        {
            return Err(invalid("sample_count", "must be >= 1"));
        }
        if self.budget == Some(0) {
            return Err(invalid("budget", "must be >= 1"));
        }
        match self.experiment {
            ExperimentKind::Fig9 => {
                if self.d_grid.is_empty() {
                    return Err(invalid("d_grid", "empty"));
                }
                if self.rank_grid.is_empty() {
                    return Err(invalid("rank_grid", "empty"));
                }
                if let Some(d) = self.d_grid.iter().find(|d| **d < 2) {
                    return Err(invalid("d_grid", format!("{d} < 2")));
                }
                if self.rank_grid.contains(&0) {
                    return Err(invalid("rank_grid", "contains 0"));
                }
            }
            ExperimentKind::Thm3Check => {
                if self.m_grid.is_empty() {
                    return Err(invalid("m_grid", "empty"));
                }
                if let Some(m) = self.m_grid.iter().find(|m| **m < 2) {
                    return Err(invalid("m_grid", format!("{m} < 2")));
                }
            }
            ExperimentKind::Lemma1Check if self.n_grid.contains(&0) => {
                return Err(invalid("n_grid", "contains 0"));
            }
            ExperimentKind::Fig4
                if self.n_grid.iter().any(|n| *n == 0 || *n > self.sample_count) =>
            {
                return Err(invalid("n_grid", "entries must lie in [1, sample_count]"));
            }
            _ => {}
        }
        Ok(())
    }

    fn validate_line(&self) -> Result<()> {
        if self.channel != ChannelFamily::Depolarizing {
            return Err(invalid("channel", "fig7 needs depolarizing"));
        }
        let alpha = self.alpha.ok_or_else(|| invalid("alpha", "required"))?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha", format!("{alpha} must be positive")));
        }
        let length = self.length.ok_or_else(|| invalid("length", "required"))?;
        if !(length >= 0.0 && length.is_finite()) {
            return Err(invalid("length", format!("{length} must be >= 0")));
        }
        if let Some(s) = self.noise_grid.iter().find(|s| !(0.0..=length).contains(*s)) {
            return Err(invalid("noise_grid", format!("relay position {s} outside [0, length]")));
        }
        Ok(())
    }

    /// Channel of the configured family at noise parameter `p`.
    pub fn channel_at(&self, p: f64) -> Result<KrausChannel> {
        match self.channel {
            ChannelFamily::Dephasing => dephasing(p),
            ChannelFamily::AmplitudeDamping => amplitude_damping(p),
            ChannelFamily::Depolarizing => {
                let alpha = self.alpha.ok_or_else(|| invalid("alpha", "required"))?;
                depolarizing_length(alpha, p)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE3: &str = r#"
experiment = "table3"
channel = "dephasing"
noise_grid = [0.4]
epsilon_grid = [0.05, 0.1]
sample_count = 20
seed = 3
output_path = "out/t3.csv"
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml_str(TABLE3).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Table3);
        assert_eq!(cfg.seed, 3);
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn rejects_bad_fields() {
        let bad_eps = TABLE3.replace("[0.05, 0.1]", "[0.05, 1.0]");
        let err = ExperimentConfig::from_toml_str(&bad_eps).unwrap_err();
        assert!(err.to_string().contains("epsilon_grid"));
        let bad_noise = TABLE3.replace("[0.4]", "[1.5]");
        assert!(ExperimentConfig::from_toml_str(&bad_noise)
            .unwrap_err()
            .to_string()
            .contains("noise_grid"));
        let empty = TABLE3.replace("[0.4]", "[]");
        assert!(ExperimentConfig::from_toml_str(&empty).is_err());
        let unknown = format!("{TABLE3}\nbogus = 1\n");
        assert!(ExperimentConfig::from_toml_str(&unknown).is_err());
        let kind = TABLE3.replace("table3", "fig99");
        assert!(ExperimentConfig::from_toml_str(&kind).is_err());
    }

    #[test]
    fn fig7_needs_line_parameters() {
        let text = r#"
experiment = "fig7"
channel = "depolarizing"
noise_grid = [0.0, 50.0]
epsilon_grid = [0.1]
output_path = "f7.csv"
alpha = 0.01
length = 240.0
"#;
        assert!(ExperimentConfig::from_toml_str(text).is_ok());
        assert!(ExperimentConfig::from_toml_str(&text.replace("alpha = 0.01", "")).is_err());
        assert!(ExperimentConfig::from_toml_str(&text.replace("50.0", "500.0")).is_err());
    }

    #[test]
    fn kind_names_match_serde() {
        for kind in [
            ExperimentKind::Fig3,
            ExperimentKind::Lemma1Check,
            ExperimentKind::Thm3Check,
        ] {
            let text = format!("experiment = \"{kind}\"\noutput_path = \"x\"\nm_grid = [2]\nepsilon_grid = [0.5]\nnoise_grid = [0.1]\n");
            assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap().experiment, kind);
        }
    }
}
