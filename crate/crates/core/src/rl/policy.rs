//! Gaussian actor-critic policy and its JSON file format.

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::env::{Action, Observation, OBS_DIM};
use super::nn::{Dense, Mlp};

pub const FORMAT_VERSION: u32 = 1;

const LOG_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("cannot access policy file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed policy file: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unsupported policy format version {found} (this build reads version {FORMAT_VERSION})")]
    Version { found: u64 },
    #[error("policy shape mismatch: {0}")]
    Shape(String),
    #[error("policy contains non-finite parameters")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyMetadata {
    pub seed: u64,
    /// Environment steps the policy was trained for.
    pub timesteps: u64,
    /// Producer of the file. Deliberately not a timestamp, so that training
    /// with a fixed seed yields byte-identical files.
    pub created: String,
}

impl PolicyMetadata {
    pub fn new(seed: u64, timesteps: u64) -> Self {
        Self {
            seed,
            timesteps,
            created: concat!("ahu-core ", env!("CARGO_PKG_VERSION")).to_owned(),
        }
    }
}

/// Diagonal-Gaussian actor with a state-independent log standard deviation,
/// and a separate value network of the same topology.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub actor: Mlp,
    pub log_std: f64,
    pub critic: Mlp,
    pub metadata: PolicyMetadata,
}

impl Policy {
    /// Freshly initialised policy: orthogonal weights, actor output scaled to
    /// 0.01 so the initial mean action is near zero.
    pub fn init<R: Rng>(hidden: &[usize], log_std: f64, metadata: PolicyMetadata, rng: &mut R) -> Self {
        let mut dims = vec![OBS_DIM];
        dims.extend_from_slice(hidden);
        dims.push(1);
        let actor = Mlp::new(&dims, 0.01, rng);
        let critic = Mlp::new(&dims, 1.0, rng);
        Self {
            actor,
            log_std,
            critic,
            metadata,
        }
    }

    pub fn mean(&self, obs: &Observation) -> f64 {
        self.actor.forward(&obs.features())[0]
    }

    pub fn value(&self, obs: &Observation) -> f64 {
        self.critic.forward(&obs.features())[0]
    }

    pub fn std(&self) -> f64 {
        self.log_std.exp()
    }

    /// Log density of an unclipped action under the Gaussian centred at `mean`.
    pub fn log_prob(&self, raw: f64, mean: f64) -> f64 {
        let z = (raw - mean) / self.std();
        -0.5 * z * z - self.log_std - LOG_SQRT_2PI
    }

    /// Differential entropy of the action distribution.
    pub fn entropy(&self) -> f64 {
        0.5 + LOG_SQRT_2PI + self.log_std
    }

    /// Mean action when `deterministic`, otherwise a Gaussian sample; in both
    /// cases clipped to a fan fraction.
    pub fn predict<R: Rng>(&self, obs: &Observation, deterministic: bool, rng: &mut R) -> Action {
        let mean = self.mean(obs);
        let raw = if deterministic {
            mean
        } else {
            let eps: f64 = rng.sample(StandardNormal);
            mean + self.std() * eps
        };
        Action::from_raw(raw)
    }

    pub fn param_count(&self) -> usize {
        self.actor.param_count() + 1 + self.critic.param_count()
    }

    /// Parameters as one vector: actor, log-std, critic.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.param_count());
        v.extend(self.actor.params());
        v.push(self.log_std);
        v.extend(self.critic.params());
        v
    }

    pub fn assign_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.param_count(), "flat parameter length");
        let mut it = flat.iter().copied();
        self.actor.params_mut().for_each(|p| *p = it.next().unwrap());
        self.log_std = it.next().unwrap();
        self.critic.params_mut().for_each(|p| *p = it.next().unwrap());
    }

    pub fn is_finite(&self) -> bool {
        self.flatten().iter().all(|v| v.is_finite())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PolicyFile::from(self)).expect("policy serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, PolicyError> {
        #[derive(Deserialize)]
        struct Header {
            format_version: u64,
        }
        let header: Header = serde_json::from_str(text)?;
        if header.format_version != u64::from(FORMAT_VERSION) {
            return Err(PolicyError::Version {
                found: header.format_version,
            });
        }
        let file: PolicyFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PolicyError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| PolicyError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PolicyError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| PolicyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    weights: Vec<f64>,
    biases: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    /// Layer widths from input to output.
    dims: Vec<usize>,
    layers: Vec<LayerFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyFile {
    format_version: u32,
    metadata: PolicyMetadata,
    actor: NetworkFile,
    log_std: f64,
    critic: NetworkFile,
}

impl From<&Mlp> for NetworkFile {
    fn from(net: &Mlp) -> Self {
        Self {
            dims: net.dims(),
            layers: net
                .layers()
                .iter()
                .map(|l| LayerFile {
                    weights: l.weights.clone(),
                    biases: l.biases.clone(),
                })
                .collect(),
        }
    }
}

impl From<&Policy> for PolicyFile {
    fn from(p: &Policy) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            metadata: p.metadata.clone(),
            actor: (&p.actor).into(),
            log_std: p.log_std,
            critic: (&p.critic).into(),
        }
    }
}

impl NetworkFile {
    fn into_mlp(self, name: &str) -> Result<Mlp, PolicyError> {
        let shape_err = |msg: String| PolicyError::Shape(format!("{name}: {msg}"));
        if self.dims.len() != self.layers.len() + 1 {
            return Err(shape_err(format!(
                "{} dims for {} layers",
                self.dims.len(),
                self.layers.len()
            )));
        }
        if self.dims.first() != Some(&OBS_DIM) || self.dims.last() != Some(&1) {
            return Err(shape_err(format!("expected {OBS_DIM} inputs and 1 output, got dims {:?}", self.dims)));
        }
        let layers = self
            .layers
            .into_iter()
            .enumerate()
            .map(|(k, l)| {
                let (i, o) = (self.dims[k], self.dims[k + 1]);
                if l.biases.len() != o {
                    return Err(shape_err(format!("layer {k} has {} biases, expected {o}", l.biases.len())));
                }
                Dense::from_parts(i, l.weights, l.biases)
                    .ok_or_else(|| shape_err(format!("layer {k} weight count does not match {o}x{i}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Mlp::from_layers(layers).ok_or_else(|| shape_err("layers do not chain".into()))
    }
}

impl TryFrom<PolicyFile> for Policy {
    type Error = PolicyError;

    fn try_from(f: PolicyFile) -> Result<Self, Self::Error> {
        let policy = Policy {
            actor: f.actor.into_mlp("actor")?,
            log_std: f.log_std,
            critic: f.critic.into_mlp("critic")?,
            metadata: f.metadata,
        };
        if !policy.is_finite() {
            return Err(PolicyError::NonFinite);
        }
        Ok(policy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn policy(seed: u64) -> Policy {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = Policy::init(&[16, 16], -0.3, PolicyMetadata::new(seed, 1234), &mut rng);
        // Perturb the output layer so predictions are not all near zero.
        let flat: Vec<f64> = p.flatten().iter().map(|v| v * 1.7 + 0.01).collect();
        p.assign_flat(&flat);
        p
    }

    #[test]
    fn zero_actor_always_idles() {
        let mut p = policy(1);
        p.actor = p.actor.zeros_like();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for t in [15.0, 22.0, 30.0] {
            let a = p.predict(&Observation::new(t, 22.0), true, &mut rng);
            assert_eq!(a.raw, 0.0);
            assert_eq!(a.u, 0.0);
        }
    }

    #[test]
    fn save_load_round_trip_is_bitwise() {
        let p = policy(7);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("policy.json");
        p.save(&path).unwrap();
        let q = Policy::load(&path).unwrap();
        assert_eq!(p, q);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let t = rng.gen_range(10.0..35.0);
            let obs = Observation::new(t, 22.0);
            let mut r1 = ChaCha8Rng::seed_from_u64(5);
            let mut r2 = ChaCha8Rng::seed_from_u64(5);
            assert_eq!(p.predict(&obs, false, &mut r1).raw.to_bits(), q.predict(&obs, false, &mut r2).raw.to_bits());
            assert_eq!(p.mean(&obs).to_bits(), q.mean(&obs).to_bits());
        }
    }

    #[test]
    fn truncated_file_is_rejected() {
        let json = policy(3).to_json();
        let cut = &json[..json.len() / 2];
        assert!(matches!(Policy::from_json(cut), Err(PolicyError::Malformed(_))));
    }

    #[test]
    fn unsupported_version_is_reported() {
        let json = policy(3).to_json().replacen("\"format_version\":1", "\"format_version\":99", 1);
        assert!(matches!(Policy::from_json(&json), Err(PolicyError::Version { found: 99 })));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&policy(3).to_json()).unwrap();
        v["actor"]["layers"][1]["biases"].as_array_mut().unwrap().pop();
        assert!(matches!(Policy::from_json(&v.to_string()), Err(PolicyError::Shape(_))));

        let mut v: serde_json::Value = serde_json::from_str(&policy(3).to_json()).unwrap();
        v["critic"]["dims"][0] = 3.into();
        assert!(matches!(Policy::from_json(&v.to_string()), Err(PolicyError::Shape(_))));
    }

    #[test]
    fn log_prob_and_entropy() {
        let mut p = policy(2);
        p.log_std = 0.0;
        assert!((p.log_prob(0.0, 0.0) + LOG_SQRT_2PI).abs() < 1e-15);
        assert!((p.entropy() - 1.418_938_533_204_672_7).abs() < 1e-15);
    }

    #[test]
    fn flatten_round_trip() {
        let p = policy(4);
        let mut q = policy(5);
        q.assign_flat(&p.flatten());
        assert_eq!(p.actor, q.actor);
        assert_eq!(p.critic, q.critic);
        assert_eq!(p.log_std, q.log_std);
    }
}
