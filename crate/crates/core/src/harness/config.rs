//! TOML experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::Method;
use crate::error::{Error, Result};
use crate::fock::{FockBasis, C64};
use crate::lattice::{random_hamiltonian, DissipatorSpec, HamiltonianSpec, LatticeGraph, ModelDocument};
use crate::learner::{LearnConfig, Protocol};
use crate::measurement::PartitionMode;

/// Where the model comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    /// A model JSON document, relative to the config file.
    File(PathBuf),
    Inline(ModelDocument),
    Random(RandomModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomModel {
    /// `chain` or `edge`.
    pub graph: String,
    #[serde(default = "two")]
    pub n: usize,
    pub d: usize,
    #[serde(rename = "L", default = "one")]
    pub l_bound: f64,
    pub p: u32,
    /// Dissipator amplitudes `[re, im]`, one per site; vacuum when absent.
    #[serde(default)]
    pub alpha: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub seed: u64,
}

fn two() -> usize {
    2
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub t: f64,
    pub shots: usize,
    pub cutoff: usize,
    #[serde(default)]
    pub total_cap: Option<usize>,
    /// Index of the partition set whose edges receive the input and are measured.
    #[serde(default)]
    pub partition_set: usize,
    /// Rectangle radius; edge-disjoint coloring when absent.
    #[serde(default)]
    pub rectangle_radius: Option<usize>,
    /// Input amplitudes `[re, im]` per site; the dissipator's when absent.
    #[serde(default)]
    pub input_alpha: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub projected: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnSection {
    pub protocol: Protocol,
    pub eps: f64,
    pub delta: f64,
    /// Seeds `seed, seed + 1, ...`, one report each.
    #[serde(default = "one_trial")]
    pub trials: u64,
    #[serde(default)]
    pub cutoff: Option<usize>,
    #[serde(default)]
    pub total_cap: Option<usize>,
    #[serde(default)]
    pub shot_cap: Option<u64>,
    #[serde(default)]
    pub noiseless: bool,
    /// Vanilla evolution time.
    #[serde(default)]
    pub t: Option<f64>,
}

fn one_trial() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub cutoff: usize,
    #[serde(default)]
    pub total_cap: Option<usize>,
    /// Input amplitudes `[re, im]` per site; vacuum when absent.
    #[serde(default)]
    pub input_alpha: Option<Vec<[f64; 2]>>,
    #[serde(default = "default_k")]
    pub moment_k: u32,
    #[serde(default = "default_times")]
    pub moment_times: Vec<f64>,
    #[serde(default = "one")]
    pub rate_multiple: f64,
    #[serde(default = "default_leak")]
    pub leakage_tol: f64,
    /// Run the moment check without jump operators.
    #[serde(default = "yes")]
    pub dissipation: bool,
    #[serde(default)]
    pub lr_edge: usize,
    #[serde(default = "default_radii")]
    pub lr_radii: Vec<usize>,
    #[serde(default = "one")]
    pub lr_t: f64,
    #[serde(default = "one")]
    pub trotter_t: f64,
    #[serde(default = "default_ns")]
    pub trotter_ns: Vec<usize>,
    #[serde(default = "default_ms")]
    pub norm_cutoffs: Vec<usize>,
    #[serde(default = "default_alphas")]
    pub sobolev_alphas: Vec<f64>,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_ks")]
    pub sobolev_ks: Vec<u32>,
}

fn default_method() -> Method {
    Method::RungeKutta
}
fn yes() -> bool {
    true
}
fn default_k() -> u32 {
    2
}
fn default_times() -> Vec<f64> {
    (0..=8).map(|k| 0.25 * k as f64).collect()
}
fn default_leak() -> f64 {
    1e-6
}
fn default_radii() -> Vec<usize> {
    vec![0, 1]
}
fn default_ns() -> Vec<usize> {
    vec![1, 2, 4, 8, 16]
}
fn default_ms() -> Vec<usize> {
    (2..=8).collect()
}
fn default_alphas() -> Vec<f64> {
    vec![0.0, 0.5, 1.0, 2.0]
}
fn default_ks() -> Vec<u32> {
    (1..=4).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub model: ModelSource,
    #[serde(default)]
    pub simulate: Option<SimulateSection>,
    #[serde(default)]
    pub learn: Option<LearnSection>,
    #[serde(default)]
    pub verify: Option<VerifySection>,
    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_name() -> String {
    "run".into()
}

fn amplitudes(rows: &[[f64; 2]]) -> Vec<C64> {
    rows.iter().map(|r| C64::new(r[0], r[1])).collect()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if let ModelSource::File(p) = &self.model {
            let full = self.base_dir.join(p);
            if !full.is_file() {
                return Err(Error::Config(format!("model file {} not found", full.display())));
            }
        }
        if let Some(s) = &self.simulate {
            if !(s.t >= 0.0 && s.t.is_finite()) || s.shots == 0 {
                return Err(Error::Config("simulate needs t >= 0 and shots > 0".into()));
            }
        }
        if let Some(l) = &self.learn {
            if !(l.eps > 0.0) || !(l.delta > 0.0 && l.delta < 1.0) || l.trials == 0 {
                return Err(Error::Config("learn needs eps > 0, delta in (0, 1), trials > 0".into()));
            }
        }
        let (h, _) = self.model()?;
        for rows in [
            self.simulate.as_ref().and_then(|s| s.input_alpha.as_ref()),
            self.verify.as_ref().and_then(|v| v.input_alpha.as_ref()),
        ]
        .into_iter()
        .flatten()
        {
            if rows.len() != h.n_modes() {
                return Err(Error::Config(format!("input_alpha needs {} rows", h.n_modes())));
            }
        }
        Ok(())
    }

    /// Built Hamiltonian and dissipator.
    pub fn model(&self) -> Result<(HamiltonianSpec, DissipatorSpec)> {
        match &self.model {
            ModelSource::File(p) => ModelDocument::load(&self.base_dir.join(p))?.to_specs(),
            ModelSource::Inline(doc) => doc.to_specs(),
            ModelSource::Random(r) => {
                let graph = match r.graph.as_str() {
                    "chain" => LatticeGraph::chain(r.n),
                    "edge" => LatticeGraph::single_edge(),
                    g => return Err(Error::Config(format!("unknown graph kind {g:?}"))),
                };
                let n = graph.n_vertices();
                let h = random_hamiltonian(&graph, r.d, r.l_bound, r.seed)?;
                let d = match &r.alpha {
                    Some(a) if a.len() != n => return Err(Error::Config(format!("alpha needs {n} rows"))),
                    Some(a) => DissipatorSpec::new(r.p, amplitudes(a))?,
                    None => DissipatorSpec::vacuum(r.p, n),
                };
                Ok((h, d))
            }
        }
    }

    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        match (flag, &self.out) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(p)) => self.base_dir.join(p),
            (None, None) => PathBuf::from("runs").join(&self.name),
        }
    }

    pub fn learn_config(&self) -> Result<LearnConfig> {
        let l = self.learn.as_ref().ok_or_else(|| Error::Config("missing [learn] section".into()))?;
        let (h, _) = self.model()?;
        let mut cfg = LearnConfig::new(l.protocol, h.d, l.eps, l.delta, self.seed);
        if let Some(c) = l.cutoff {
            cfg.cutoff = c;
        }
        cfg.total_cap = l.total_cap;
        cfg.shot_cap = l.shot_cap;
        cfg.noiseless = l.noiseless;
        if let Some(t) = l.t {
            cfg.vanilla.t = t;
        }
        Ok(cfg)
    }
}

impl SimulateSection {
    pub fn basis(&self, modes: usize) -> Result<FockBasis> {
        FockBasis::with_cutoffs(vec![self.cutoff; modes], self.total_cap)
    }

    pub fn partition(&self) -> PartitionMode {
        self.rectangle_radius.map_or(PartitionMode::EdgeDisjoint, PartitionMode::RectangleDisjoint)
    }

    pub fn input(&self, diss: &DissipatorSpec) -> Vec<C64> {
        self.input_alpha.as_deref().map_or_else(|| diss.alpha.clone(), amplitudes)
    }
}

impl VerifySection {
    pub fn basis(&self, modes: usize) -> Result<FockBasis> {
        FockBasis::with_cutoffs(vec![self.cutoff; modes], self.total_cap)
    }

    pub fn input(&self, modes: usize) -> Vec<C64> {
        self.input_alpha
            .as_deref()
            .map_or_else(|| vec![C64::new(0.0, 0.0); modes], amplitudes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMOKE: &str = r#"
name = "smoke"
seed = 3

[model.random]
graph = "edge"
d = 1
p = 4

[simulate]
t = 0.1
shots = 5
cutoff = 4
"#;

    #[test]
    fn parses_and_round_trips_through_json() {
        let cfg = ExperimentConfig::from_toml(SMOKE, Path::new(".")).unwrap();
        assert_eq!(cfg.seed, 3);
        let json = serde_json::to_string(&cfg).unwrap();
        let mut back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        back.base_dir = cfg.base_dir.clone();
        assert_eq!(back, cfg);
        let again = ExperimentConfig::from_toml(&cfg.to_toml().unwrap(), Path::new(".")).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn missing_model_file_is_rejected() {
        let text = "[model]\nfile = \"nope.json\"\n";
        let err = ExperimentConfig::from_toml(text, Path::new("/nonexistent")).unwrap_err();
        assert!(err.to_string().contains("not found"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml(&format!("{SMOKE}\nbogus = 1\n"), Path::new(".")).is_err());
    }
}
