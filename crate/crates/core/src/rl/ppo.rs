//! Clipped-surrogate PPO with a Gaussian policy, GAE, Adam and global
//! gradient-norm clipping. Single environment, single thread, deterministic
//! for a given seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::env::{HvacEnv, Observation};
use super::gae::{compute_gae, Transition};
use super::nn::Activations;
use super::policy::{Policy, PolicyMetadata};
use crate::control::Mode;
use crate::error::{ConfigError, Error};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub total_timesteps: u64,
    /// Agent steps collected per update.
    pub rollout_length: usize,
    pub minibatch_size: usize,
    pub epochs_per_update: usize,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_ratio: f64,
    pub learning_rate: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub max_grad_norm: f64,
    /// Physics seconds per agent decision.
    pub control_interval_s: f64,
    pub seed: u64,
    pub hidden: Vec<usize>,
    pub initial_log_std: f64,
    /// Shift the daily profiles by a random phase at every episode reset.
    pub phase_randomization: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            total_timesteps: 300_000,
            rollout_length: 2048,
            minibatch_size: 64,
            epochs_per_update: 10,
            gamma: 0.99,
            gae_lambda: 0.95,
            clip_ratio: 0.2,
            learning_rate: 3e-4,
            value_coef: 0.5,
            entropy_coef: 0.0,
            max_grad_norm: 0.5,
            control_interval_s: 60.0,
            seed: 42,
            hidden: vec![64, 64],
            initial_log_std: 0.0,
            phase_randomization: false,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |field: &str, reason: &str| Err(ConfigError::invalid(format!("training.{field}"), reason));
        if self.total_timesteps == 0 {
            return bad("total_timesteps", "must be positive");
        }
        if self.minibatch_size == 0 || self.rollout_length == 0 || self.rollout_length % self.minibatch_size != 0 {
            return bad("rollout_length", "must be a positive multiple of minibatch_size");
        }
        if self.epochs_per_update == 0 {
            return bad("epochs_per_update", "must be positive");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma", "must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gae_lambda", "must lie in [0, 1]");
        }
        if !(self.clip_ratio > 0.0) {
            return bad("clip_ratio", "must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate", "must be positive");
        }
        for (f, v) in [
            ("value_coef", self.value_coef),
            ("entropy_coef", self.entropy_coef),
            ("max_grad_norm", self.max_grad_norm),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(f, "must be non-negative");
            }
        }
        if !(self.control_interval_s > 0.0) {
            return bad("control_interval_s", "must be positive");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden", "needs at least one non-empty hidden layer");
        }
        if !self.initial_log_std.is_finite() {
            return bad("initial_log_std", "must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("non-finite loss at update {update}; last good policy retained")]
    NonFinite { update: usize, checkpoint: Box<Policy> },
    #[error("environment failure: {0}")]
    Environment(Box<Error>),
}

impl From<Error> for TrainError {
    fn from(e: Error) -> Self {
        TrainError::Environment(Box::new(e))
    }
}

/// A transition ready for optimisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub obs: [f64; 2],
    pub raw_action: f64,
    pub old_log_prob: f64,
    pub advantage: f64,
    pub ret: f64,
}

/// Loss coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub clip_ratio: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
}

impl From<&PpoConfig> for LossWeights {
    fn from(c: &PpoConfig) -> Self {
        Self {
            clip_ratio: c.clip_ratio,
            value_coef: c.value_coef,
            entropy_coef: c.entropy_coef,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossStats {
    /// Negated clipped surrogate, averaged over the batch.
    pub policy_loss: f64,
    /// Mean squared value error.
    pub value_loss: f64,
    pub entropy: f64,
    /// `policy_loss + value_coef · value_loss - entropy_coef · entropy`.
    pub total: f64,
}

/// Reusable forward/backward buffers.
#[derive(Debug, Default)]
pub struct Workspace {
    actor: Activations,
    critic: Activations,
}

/// Minibatch loss
/// `-mean(min(r·A, clip(r, 1-ε, 1+ε)·A)) + c_v·mean((V - R)²) - c_e·H`.
/// When `grads` is given, the gradient with respect to
/// [`Policy::flatten`] order is written into it.
pub fn ppo_loss(
    policy: &Policy,
    batch: &[Sample],
    w: LossWeights,
    ws: &mut Workspace,
    grads: Option<&mut Vec<f64>>,
) -> LossStats {
    let n = batch.len() as f64;
    let std = policy.std();
    let var = std * std;
    let mut actor_grad = policy.actor.zeros_like();
    let mut critic_grad = policy.critic.zeros_like();
    let mut log_std_grad = 0.0;
    let mut surrogate_sum = 0.0;
    let mut value_sq_sum = 0.0;
    let want_grads = grads.is_some();

    for s in batch {
        let mean = policy.actor.forward_cached(&s.obs, &mut ws.actor)[0];
        let log_prob = policy.log_prob(s.raw_action, mean);
        let ratio = (log_prob - s.old_log_prob).exp();
        let unclipped = ratio * s.advantage;
        let clipped = ratio.clamp(1.0 - w.clip_ratio, 1.0 + w.clip_ratio) * s.advantage;
        surrogate_sum += unclipped.min(clipped);

        let value = policy.critic.forward_cached(&s.obs, &mut ws.critic)[0];
        let diff = value - s.ret;
        value_sq_sum += diff * diff;

        if want_grads {
            // The surrogate follows the unclipped branch whenever that branch
            // is the minimum (always true inside the clip range).
            let d_ratio = if unclipped <= clipped { -s.advantage / n } else { 0.0 };
            let d_logp = d_ratio * ratio;
            let z = s.raw_action - mean;
            let d_mean = d_logp * z / var;
            log_std_grad += d_logp * (z * z / var - 1.0);
            policy.actor.backward(&mut ws.actor, &[d_mean], &mut actor_grad);
            let d_value = w.value_coef * 2.0 * diff / n;
            policy.critic.backward(&mut ws.critic, &[d_value], &mut critic_grad);
        }
    }
    let entropy = policy.entropy();
    if let Some(g) = grads {
        log_std_grad -= w.entropy_coef;
        g.clear();
        g.extend(actor_grad.params());
        g.push(log_std_grad);
        g.extend(critic_grad.params());
    }
    let policy_loss = -surrogate_sum / n;
    let value_loss = value_sq_sum / n;
    LossStats {
        policy_loss,
        value_loss,
        entropy,
        total: policy_loss + w.value_coef * value_loss - w.entropy_coef * entropy,
    }
}

/// Scales `grads` in place so its Euclidean norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_grad_norm(grads: &mut [f64], max_norm: f64) -> f64 {
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let scale = max_norm / (norm + 1e-6);
        grads.iter_mut().for_each(|g| *g *= scale);
    }
    norm
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-5,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for ((p, g), (m, v)) in params.iter_mut().zip(grads).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// One row of the training progress log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressRecord {
    pub update_index: usize,
    pub timesteps: u64,
    /// Mean return of the last (up to) ten completed episodes.
    pub mean_episode_reward: Option<f64>,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
}

/// Return of one completed training episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeReturn {
    /// Agent steps taken when the episode ended.
    pub timesteps: u64,
    pub reward: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub policy: Policy,
    pub progress: Vec<ProgressRecord>,
    pub episodes: Vec<EpisodeReturn>,
}

fn normalize(batch: &mut [Sample]) {
    let n = batch.len() as f64;
    let mean = batch.iter().map(|s| s.advantage).sum::<f64>() / n;
    let var = if batch.len() > 1 {
        batch.iter().map(|s| (s.advantage - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let std = var.sqrt();
    batch.iter_mut().for_each(|s| s.advantage = (s.advantage - mean) / (std + 1e-8));
}

/// Trains a policy for `mode` on `scenario` with `cfg`. `on_update` is
/// called after every policy update.
pub fn ppo_train(
    scenario: &Scenario,
    cfg: &PpoConfig,
    mode: Mode,
    mut on_update: impl FnMut(&ProgressRecord),
) -> Result<TrainOutcome, TrainError> {
    cfg.validate().map_err(Error::from)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut policy = Policy::init(&cfg.hidden, cfg.initial_log_std, PolicyMetadata::new(cfg.seed, 0), &mut rng);
    let mut optimizer = Adam::new(policy.param_count(), cfg.learning_rate);
    let weights = LossWeights::from(cfg);
    let mut ws = Workspace::default();

    let mut env = HvacEnv::new(scenario, mode)?;
    let mut obs = env.reset(&mut rng)?;
    let mut episode_reward = 0.0;
    let mut episodes: Vec<EpisodeReturn> = Vec::new();
    let mut progress = Vec::new();
    let mut timesteps: u64 = 0;
    let mut update = 0;
    let mut rollout: Vec<Transition> = Vec::with_capacity(cfg.rollout_length);
    let mut grads = Vec::with_capacity(policy.param_count());

    while timesteps < cfg.total_timesteps {
        rollout.clear();
        for _ in 0..cfg.rollout_length {
            let features = obs.features();
            let mean = policy.mean(&obs);
            let eps: f64 = rng.sample(StandardNormal);
            let raw = mean + policy.std() * eps;
            let log_prob = policy.log_prob(raw, mean);
            let value = policy.value(&obs);
            let step = env.step(raw)?;
            timesteps += 1;
            episode_reward += step.reward;
            // Episodes end on a time limit, so the final transition still
            // bootstraps from the critic.
            let next_value = policy.value(&step.observation);
            rollout.push(Transition {
                obs: features,
                raw_action: raw,
                log_prob,
                value,
                reward: step.reward,
                next_value,
                episode_end: step.done,
            });
            if step.done {
                episodes.push(EpisodeReturn {
                    timesteps,
                    reward: episode_reward,
                });
                episode_reward = 0.0;
                obs = env.reset(&mut rng)?;
            } else {
                obs = step.observation;
            }
        }

        let (advantages, returns) = compute_gae(&rollout, cfg.gamma, cfg.gae_lambda);
        let mut samples: Vec<Sample> = rollout
            .iter()
            .zip(advantages.iter().zip(&returns))
            .map(|(tr, (&advantage, &ret))| Sample {
                obs: tr.obs,
                raw_action: tr.raw_action,
                old_log_prob: tr.log_prob,
                advantage,
                ret,
            })
            .collect();

        let checkpoint = policy.clone();
        let mut params = policy.flatten();
        let mut stats_sum = LossStats::default();
        let mut batches = 0usize;
        let mut batch = Vec::with_capacity(cfg.minibatch_size);
        for _ in 0..cfg.epochs_per_update {
            samples.shuffle(&mut rng);
            for chunk in samples.chunks(cfg.minibatch_size) {
                batch.clear();
                batch.extend_from_slice(chunk);
                normalize(&mut batch);
                let stats = ppo_loss(&policy, &batch, weights, &mut ws, Some(&mut grads));
                if !stats.total.is_finite() || grads.iter().any(|g| !g.is_finite()) {
                    return Err(TrainError::NonFinite {
                        update,
                        checkpoint: Box::new(checkpoint),
                    });
                }
                clip_grad_norm(&mut grads, cfg.max_grad_norm);
                optimizer.step(&mut params, &grads);
                policy.assign_flat(&params);
                stats_sum.policy_loss += stats.policy_loss;
                stats_sum.value_loss += stats.value_loss;
                stats_sum.entropy += stats.entropy;
                batches += 1;
            }
        }
        if !policy.is_finite() {
            return Err(TrainError::NonFinite {
                update,
                checkpoint: Box::new(checkpoint),
            });
        }

        let recent = &episodes[episodes.len().saturating_sub(10)..];
        let record = ProgressRecord {
            update_index: update,
            timesteps,
            mean_episode_reward: (!recent.is_empty())
                .then(|| recent.iter().map(|e| e.reward).sum::<f64>() / recent.len() as f64),
            policy_loss: stats_sum.policy_loss / batches as f64,
            value_loss: stats_sum.value_loss / batches as f64,
            entropy: stats_sum.entropy / batches as f64,
        };
        log::info!(
            "update {} steps {} reward {:?} pi {:.4} vf {:.4}",
            record.update_index,
            record.timesteps,
            record.mean_episode_reward,
            record.policy_loss,
            record.value_loss
        );
        on_update(&record);
        progress.push(record);
        update += 1;
    }

    policy.metadata = PolicyMetadata::new(cfg.seed, timesteps);
    Ok(TrainOutcome {
        policy,
        progress,
        episodes,
    })
}

/// Deterministic evaluation helper: total reward of one full episode with
/// mean actions.
pub fn episode_return(policy: &Policy, scenario: &Scenario, mode: Mode) -> crate::error::Result<f64> {
    let mut env = HvacEnv::new(scenario, mode)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut obs: Observation = env.reset(&mut rng)?;
    let mut total = 0.0;
    loop {
        let a = policy.predict(&obs, true, &mut rng);
        let step = env.step(a.u)?;
        total += step.reward;
        obs = step.observation;
        if step.done {
            return Ok(total);
        }
    }
}
