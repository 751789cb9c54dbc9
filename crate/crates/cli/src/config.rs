//! Experiment configuration schema and validation.
//!
//! A config describes either a qubit problem (`n` + `generators`) or a
//! bosonic one (`bosonic: {m, p}`), never both. Generator strings use one
//! character per qubit with the leftmost character on qubit 1, and must be
//! diagonal (`I`/`Z` only); interaction strings may be arbitrary Paulis.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use qsn_core::pauli::{GeneratorSet, InteractingHamiltonian, PauliString};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<String>>,
    pub alpha: Vec<f64>,
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub interactions: Vec<(String, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trotter: Option<TrotterConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimation: Option<EstimationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bosonic: Option<BosonicConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TrotterConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EstimationConfig {
    pub nu: usize,
    pub repetitions: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BosonicConfig {
    pub m: usize,
    pub p: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let qubit = self.n.is_some() || self.generators.is_some();
        match (qubit, self.bosonic.is_some()) {
            (true, true) => {
                return Err(CliError::Config(
                    "config has both a qubit section (n/generators) and a bosonic section".into(),
                ))
            }
            (false, false) => {
                return Err(CliError::Config(
                    "config needs either a qubit section (n + generators) or a bosonic section"
                        .into(),
                ))
            }
            _ => {}
        }
        if qubit {
            let n = self
                .n
                .ok_or_else(|| CliError::Config("qubit config requires n".into()))?;
            let gens = self
                .generators
                .as_ref()
                .ok_or_else(|| CliError::Config("qubit config requires generators".into()))?;
            if gens.is_empty() {
                return Err(CliError::Config("generators must be non-empty".into()));
            }
            let mut seen = std::collections::HashSet::new();
            for (i, g) in gens.iter().enumerate() {
                let parsed: qsn_core::pauli::ZString = g
                    .parse()
                    .map_err(|e| CliError::Config(format!("generator {i} ('{g}'): {e}")))?;
                if parsed.qubits() != n {
                    return Err(CliError::Config(format!(
                        "generator {i} ('{g}') has {} qubits, expected {n}",
                        parsed.qubits()
                    )));
                }
                if parsed.is_identity() {
                    return Err(CliError::Config(format!(
                        "generator {i} ('{g}') is the identity string"
                    )));
                }
                if !seen.insert(parsed.mask()) {
                    return Err(CliError::Config(format!(
                        "generator {i} ('{g}') duplicates an earlier generator"
                    )));
                }
            }
            if self.alpha.len() != gens.len() {
                return Err(CliError::Config(format!(
                    "alpha has {} entries, expected one per generator ({})",
                    self.alpha.len(),
                    gens.len()
                )));
            }
            if let Some(theta) = &self.theta {
                if theta.len() != gens.len() {
                    return Err(CliError::Config(format!(
                        "theta has {} entries, expected one per generator ({})",
                        theta.len(),
                        gens.len()
                    )));
                }
            }
            for (i, (p, _)) in self.interactions.iter().enumerate() {
                let parsed: PauliString = p
                    .parse()
                    .map_err(|e| CliError::Config(format!("interaction {i} ('{p}'): {e}")))?;
                if parsed.qubits() != n {
                    return Err(CliError::Config(format!(
                        "interaction {i} ('{p}') has {} qubits, expected {n}",
                        parsed.qubits()
                    )));
                }
            }
        } else {
            let b = self.bosonic.as_ref().expect("bosonic branch");
            if self.alpha.len() != b.m {
                return Err(CliError::Config(format!(
                    "alpha has {} entries, expected one per mode ({})",
                    self.alpha.len(),
                    b.m
                )));
            }
            if !self.interactions.is_empty() || self.theta.is_some() {
                return Err(CliError::Config(
                    "bosonic configs take no theta or interactions".into(),
                ));
            }
        }
        if self.t.is_nan() || self.t <= 0.0 {
            return Err(CliError::Config(format!(
                "evolution time t must be positive, got {}",
                self.t
            )));
        }
        Ok(())
    }

    pub fn qubit_count(&self) -> Result<usize, CliError> {
        self.n
            .ok_or_else(|| CliError::Config("this command requires a qubit config".into()))
    }

    pub fn generator_set(&self) -> Result<GeneratorSet, CliError> {
        let n = self.qubit_count()?;
        let gens = self
            .generators
            .as_ref()
            .ok_or_else(|| CliError::Config("this command requires generators".into()))?;
        GeneratorSet::parse(n, gens).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn theta(&self) -> Result<&[f64], CliError> {
        self.theta
            .as_deref()
            .ok_or_else(|| CliError::Config("this command requires theta".into()))
    }

    /// The full interacting Hamiltonian `Σ θ_i Z_i + Σ γ_j P_j`. Requires
    /// the generators to be exactly the local set `{Z_1..Z_n}`, so theta
    /// doubles as the local coefficient vector.
    pub fn interacting_hamiltonian(&self) -> Result<InteractingHamiltonian, CliError> {
        let n = self.qubit_count()?;
        let gens = self.generator_set()?;
        let local: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
        let actual: Vec<u64> = gens.iter().map(|g| g.mask()).collect();
        if actual != local {
            return Err(CliError::Config(
                "interacting-sensing commands require generators to be the local Z set \
                 (\"ZI..\", \"IZ..\", ...) in order"
                    .into(),
            ));
        }
        let theta = self.theta()?.to_vec();
        let interactions = self
            .interactions
            .iter()
            .map(|(p, g)| {
                Ok((
                    p.parse::<PauliString>()
                        .map_err(|e| CliError::Config(format!("interaction '{p}': {e}")))?,
                    *g,
                ))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        InteractingHamiltonian::new(n, theta, interactions)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn estimation(&self) -> Result<EstimationConfig, CliError> {
        self.estimation
            .ok_or_else(|| CliError::Config("this command requires an estimation section".into()))
    }

    /// Resolve the run seed: the --seed flag wins, then the config; having
    /// neither is an error so runs never seed from the clock.
    pub fn resolve_seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        flag.or(self.trotter.as_ref().and_then(|t| t.seed))
            .ok_or_else(|| {
                CliError::Config("no seed: pass --seed or set trotter.seed in the config".into())
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_qubit() -> serde_json::Value {
        serde_json::json!({
            "n": 2,
            "generators": ["ZI", "IZ"],
            "alpha": [1.0, 0.5],
            "t": 1.0
        })
    }

    #[test]
    fn round_trip_is_identity() {
        let cfg = ExperimentConfig::from_json(&base_qubit().to_string()).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn rejects_non_diagonal_generator() {
        let mut v = base_qubit();
        v["generators"][1] = "ZX".into();
        let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("generator 1"), "{msg}");
        assert!(msg.contains("position 1"), "{msg}");
    }

    #[test]
    fn rejects_alpha_length_mismatch() {
        let mut v = base_qubit();
        v["alpha"] = serde_json::json!([1.0]);
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn rejects_mixed_sections() {
        let mut v = base_qubit();
        v["bosonic"] = serde_json::json!({"m": 2, "p": 1});
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn bosonic_config_parses() {
        let v = serde_json::json!({
            "bosonic": {"m": 2, "p": 2},
            "alpha": [1.0, -1.0],
            "t": 1.0
        });
        let cfg = ExperimentConfig::from_json(&v.to_string()).unwrap();
        assert!(cfg.bosonic.is_some());
    }

    #[test]
    fn seed_resolution_order() {
        let mut v = base_qubit();
        v["trotter"] = serde_json::json!({"seed": 5});
        let cfg = ExperimentConfig::from_json(&v.to_string()).unwrap();
        assert_eq!(cfg.resolve_seed(None).unwrap(), 5);
        assert_eq!(cfg.resolve_seed(Some(9)).unwrap(), 9);
        let bare = ExperimentConfig::from_json(&base_qubit().to_string()).unwrap();
        assert!(bare.resolve_seed(None).is_err());
    }
}
