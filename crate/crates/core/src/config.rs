//! Experiment configuration (TOML).
//!
//! Every field has a default and unknown keys are rejected, so a config file
//! only needs the values it changes:
//!
//! ```toml
//! seed = 7
//! [dataset]
//! gaits = ["trot", "pace"]
//! frequencies = [2.0]
//! [trainer]
//! iterations = 200
//! [ablation]
//! no_conditioning = true
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adversarial::AdversarialConfig;
use crate::error::{CampError, Result};
use crate::motion::{generate_clip, skill_catalog, ClipStoreManifest, GaitKind, MotionClip, SkillDef};
use crate::sim::EnvConfig;

pub const CONFIG_FILE: &str = "config.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub gaits: Vec<GaitKind>,
    pub frequencies: Vec<f64>,
    /// Clip length, s.
    pub duration: f64,
    /// Frame period, s.
    pub dt: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            gaits: GaitKind::ALL.to_vec(),
            frequencies: vec![2.0, 4.0],
            duration: 10.0,
            dt: 0.02,
        }
    }
}

impl DatasetConfig {
    pub fn skills(&self) -> Result<Vec<SkillDef>> {
        if self.gaits.is_empty() {
            return Err(CampError::Config("dataset.gaits is empty".into()));
        }
        if self.frequencies.is_empty() {
            return Err(CampError::Config("dataset.frequencies is empty".into()));
        }
        skill_catalog(&self.gaits, &self.frequencies).map_err(|e| CampError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.duration > 0.0) {
            return Err(CampError::Config("dataset.dt and dataset.duration must be positive".into()));
        }
        for s in self.skills()? {
            s.spec.validate().map_err(|e| CampError::Config(format!("{}: {e}", s.name)))?;
        }
        Ok(())
    }

    /// Clips for every skill plus the store manifest.
    pub fn generate(&self, seed: u64) -> Result<(ClipStoreManifest, Vec<MotionClip>)> {
        self.validate()?;
        let skills = self.skills()?;
        let clips = skills
            .iter()
            .map(|s| generate_clip(s, self.duration, self.dt))
            .collect::<Result<Vec<_>>>()?;
        let files = skills.iter().map(|s| format!("{:02}_{}.clip", s.label, s.name)).collect();
        let manifest = ClipStoreManifest {
            format_version: 1,
            seed,
            dt: self.dt,
            duration: self.duration,
            skills,
            files,
        };
        Ok((manifest, clips))
    }
}

/// Clipped-surrogate PPO hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip: f64,
    pub epochs: usize,
    pub minibatches: usize,
    pub learning_rate: f64,
    /// Adapt the learning rate towards this KL divergence per update; 0 disables adaptation.
    pub desired_kl: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub max_grad_norm: f64,
    pub init_std: f64,
    /// Multiplier applied to composed rewards before advantage estimation.
    pub reward_scale: f64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            gae_lambda: 0.95,
            clip: 0.2,
            epochs: 5,
            minibatches: 4,
            learning_rate: 1e-3,
            desired_kl: 0.01,
            entropy_coef: 0.005,
            value_coef: 1.0,
            max_grad_norm: 1.0,
            init_std: 0.8,
            reward_scale: 0.02,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(CampError::Config(format!("ppo.gamma must lie in [0, 1), got {}", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return Err(CampError::Config("ppo.gae_lambda must lie in [0, 1]".into()));
        }
        if !(self.clip > 0.0 && self.learning_rate > 0.0 && self.init_std > 0.0 && self.max_grad_norm > 0.0 && self.reward_scale > 0.0) {
            return Err(CampError::Config("ppo.clip, learning_rate, init_std, max_grad_norm and reward_scale must be positive".into()));
        }
        if self.epochs == 0 || self.minibatches == 0 {
            return Err(CampError::Config("ppo.epochs and ppo.minibatches must be positive".into()));
        }
        if self.desired_kl < 0.0 || self.entropy_coef < 0.0 || self.value_coef < 0.0 {
            return Err(CampError::Config("ppo coefficients must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Reward mixture `w_task r_task + w_style r_style + w_skill r_skill`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardWeights {
    pub task: f64,
    pub style: f64,
    pub skill: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            task: 1.0,
            style: 1.0,
            skill: 0.3,
        }
    }
}

/// Component switches for ablation runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationFlags {
    /// Hide the skill selector from the policy observation.
    pub no_skill_obs: bool,
    /// Feed zeros instead of the skill latent to the discriminator.
    pub no_conditioning: bool,
    /// Drop the skill discriminator (no training, zero skill reward).
    pub no_skill_disc: bool,
    /// Zero the skill-reward weight.
    pub no_skill_reward: bool,
}

impl AblationFlags {
    /// Plain AMP: one unconditioned discriminator, no skill inputs or rewards.
    pub fn baseline() -> Self {
        Self {
            no_skill_obs: true,
            no_conditioning: true,
            no_skill_disc: true,
            no_skill_reward: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerConfig {
    pub iterations: usize,
    pub num_envs: usize,
    /// Rollout horizon per iteration.
    pub horizon: usize,
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    /// Expert transitions preloaded per clip.
    pub preload_per_clip: usize,
    /// Save a checkpoint every this many iterations (the final iteration is always saved).
    pub checkpoint_interval: usize,
    /// Start episodes from a random frame of the commanded skill's expert clip.
    pub reference_state_init: bool,
    pub ppo: PpoConfig,
    pub rewards: RewardWeights,
    pub adversarial: AdversarialConfig,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            iterations: 200,
            num_envs: 64,
            horizon: 24,
            actor_hidden: vec![512, 256, 128],
            critic_hidden: vec![512, 256, 128],
            preload_per_clip: 2000,
            checkpoint_interval: 50,
            reference_state_init: false,
            ppo: PpoConfig::default(),
            rewards: RewardWeights::default(),
            adversarial: AdversarialConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// DTW runs on every `dtw_stride`-th latent (2 → 25 Hz at 50 Hz data).
    pub dtw_stride: usize,
    /// Evaluation rollout length, s.
    pub eval_duration: f64,
    /// Minimum phase-signature separation (cycles) for a run to count as multi-gait.
    pub multi_gait_threshold: f64,
    /// Seconds after a switch at which the switch window opens and closes.
    pub switch_window: [f64; 2],
    /// Maximum distance (cycles) to the new skill's signature for a successful switch.
    pub switch_tolerance: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            dtw_stride: 2,
            eval_duration: 10.0,
            multi_gait_threshold: 0.2,
            switch_window: [2.0, 4.0],
            switch_tolerance: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub dataset: DatasetConfig,
    pub env: EnvConfig,
    pub trainer: TrainerConfig,
    pub ablation: AblationFlags,
    pub analysis: AnalysisConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            dataset: DatasetConfig::default(),
            env: EnvConfig::default(),
            trainer: TrainerConfig::default(),
            ablation: AblationFlags::default(),
            analysis: AnalysisConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CampError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CampError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| CampError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()).map_err(|e| CampError::io(path, e))
    }

    /// Apply ablation side effects: a disabled skill reward or skill discriminator zeroes `rewards.skill`.
    pub fn resolved(mut self) -> Self {
        if self.ablation.no_skill_reward || self.ablation.no_skill_disc {
            self.trainer.rewards.skill = 0.0;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.dataset.validate()?;
        self.env.validate()?;
        self.trainer.ppo.validate()?;
        self.trainer.adversarial.validate()?;
        let t = &self.trainer;
        if t.num_envs == 0 || t.horizon == 0 {
            return Err(CampError::Config("trainer.num_envs and trainer.horizon must be positive".into()));
        }
        if t.actor_hidden.is_empty() || t.critic_hidden.is_empty() || t.actor_hidden.contains(&0) || t.critic_hidden.contains(&0) {
            return Err(CampError::Config("trainer hidden layer lists must be nonempty and positive".into()));
        }
        if t.num_envs * t.horizon < t.ppo.minibatches {
            return Err(CampError::Config("fewer rollout samples than PPO minibatches".into()));
        }
        let w = t.rewards;
        if !(w.task >= 0.0 && w.style >= 0.0 && w.skill >= 0.0) {
            return Err(CampError::Config("reward weights must be nonnegative".into()));
        }
        if t.preload_per_clip == 0 || t.checkpoint_interval == 0 {
            return Err(CampError::Config("trainer.preload_per_clip and trainer.checkpoint_interval must be positive".into()));
        }
        let a = &self.analysis;
        if a.dtw_stride == 0 || !(a.eval_duration > 0.0) || !(a.switch_window[0] < a.switch_window[1]) {
            return Err(CampError::Config("invalid analysis section".into()));
        }
        Ok(())
    }
}

/// Velocity-command switching plan for evaluation rollouts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkillSchedule {
    pub entries: Vec<ScheduleEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntry {
    /// Start time, s.
    pub time: f64,
    pub skill: usize,
    /// Body-frame (vx, vy, wz); defaults to the skill's expert command.
    #[serde(default)]
    pub velocity: Option<[f64; 3]>,
}

impl SkillSchedule {
    pub fn constant(skill: usize) -> Self {
        Self {
            entries: vec![ScheduleEntry {
                time: 0.0,
                skill,
                velocity: None,
            }],
        }
    }

    pub fn validate(&self, num_skills: usize) -> Result<()> {
        let first = self.entries.first().ok_or_else(|| CampError::Config("schedule is empty".into()))?;
        if first.time != 0.0 {
            return Err(CampError::Config("schedule must start at t = 0".into()));
        }
        for w in self.entries.windows(2) {
            if !(w[1].time > w[0].time) {
                return Err(CampError::Config("schedule times must be strictly increasing".into()));
            }
        }
        if let Some(e) = self.entries.iter().find(|e| e.skill >= num_skills) {
            return Err(CampError::Config(format!("schedule skill {} out of range for {num_skills} skills", e.skill)));
        }
        Ok(())
    }

    /// Entry active at time `t`.
    pub fn at(&self, t: f64) -> &ScheduleEntry {
        let i = self.entries.partition_point(|e| e.time <= t + 1e-9);
        &self.entries[i.saturating_sub(1)]
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CampError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CampError::Config(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("sede = 3").is_err());
        assert!(ExperimentConfig::from_toml("[trainer]\nitters = 3").is_err());
        assert!(ExperimentConfig::from_toml("[env.randomization]\nfrction = [0.1, 0.2]").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let mut c = ExperimentConfig::default();
        c.dataset.gaits = vec![GaitKind::Trot, GaitKind::Pronk];
        c.ablation.no_conditioning = true;
        c.trainer.iterations = 3;
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn default_dataset_has_eight_skills() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        let (m, clips) = c.dataset.generate(c.seed).unwrap();
        assert_eq!(clips.len(), 8);
        assert_eq!(m.files.len(), 8);
    }

    #[test]
    fn empty_gait_list_is_config_error() {
        let mut c = DatasetConfig::default();
        c.gaits.clear();
        assert!(matches!(c.generate(0), Err(CampError::Config(_))));
    }

    #[test]
    fn skill_reward_ablation_zeroes_weight() {
        let mut c = ExperimentConfig::default();
        c.ablation.no_skill_reward = true;
        assert_eq!(c.resolved().trainer.rewards.skill, 0.0);
    }

    #[test]
    fn schedule_rules() {
        let s: SkillSchedule = toml::from_str(
            "[[entries]]\ntime = 0.0\nskill = 0\n[[entries]]\ntime = 4.0\nskill = 1\nvelocity = [0.3, 0.0, 0.0]\n",
        )
        .unwrap();
        s.validate(2).unwrap();
        assert_eq!(s.at(3.99).skill, 0);
        assert_eq!(s.at(4.0).skill, 1);
        assert!(s.validate(1).is_err());
        let bad = SkillSchedule {
            entries: vec![ScheduleEntry { time: 0.5, skill: 0, velocity: None }],
        };
        assert!(bad.validate(1).is_err());
    }
}
