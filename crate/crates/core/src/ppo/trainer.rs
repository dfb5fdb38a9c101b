use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{concatenate, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::buffer::RolloutBuffer;
use super::gae::{gae_advantages, normalize_advantages};
use super::losses::{compose_reward, surrogate_loss, value_loss, SurrogateBatch};
use super::policy::{gaussian_kl, Critic, GaussianPolicy};
use crate::adversarial::{
    disc_loss, predict_skill, skill_disc_loss, skill_reward, ConditionalDiscriminator, FeatureNormalizer, NormalizedPair,
    SkillDiscriminator, SkillEmbedding,
};
use crate::config::{ExperimentConfig, CONFIG_FILE};
use crate::error::{CampError, Result};
use crate::motion::{preload_transitions, sample_expert, AmpFeature, MotionClip, SkillDef, TransitionBuffer};
use crate::nn::{clip_grad_norm, Adam, Checkpoint, Mlp};
use crate::rng::{stream, Stream};
use crate::sim::{batch_step, privileged_observation, Command, EnvState, RobotModel, Simulator, PRIVILEGED_DIM};

pub const METRICS_FILE: &str = "metrics.csv";
pub const CHECKPOINT_DIR: &str = "checkpoints";
pub const STATE_FILE: &str = "state.json";
const ACTION_DIM: usize = 12;
const MIN_LR: f64 = 1e-5;
const MAX_LR: f64 = 1e-2;

/// One row of `metrics.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub task_reward: f64,
    pub style_reward: f64,
    pub skill_reward: f64,
    pub total_reward: f64,
    pub disc_loss: f64,
    pub disc_accuracy: f64,
    pub disc_penalty: f64,
    pub skill_loss: f64,
    /// Nearest-embedding accuracy of the skill discriminator on its expert batch.
    pub skill_accuracy: f64,
    pub surrogate_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub kl: f64,
    pub learning_rate: f64,
    pub clip_fraction: f64,
    pub terminations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TrainerState {
    iteration: usize,
    learning_rate: f64,
    skills: Vec<SkillDef>,
    episodes: Vec<u64>,
    envs: Vec<EnvState>,
}

/// Networks and statistics of a saved checkpoint, without the training state.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub config: ExperimentConfig,
    pub skills: Vec<SkillDef>,
    pub iteration: usize,
    pub policy: GaussianPolicy,
    pub critic: Critic,
    pub disc: ConditionalDiscriminator,
    pub embedding: SkillEmbedding,
    pub skill_disc: Option<SkillDiscriminator>,
    pub normalizer: FeatureNormalizer,
}

impl TrainedModel {
    /// Load from a checkpoint directory (`.../checkpoints/iter_XXXXXX`) or a run
    /// directory, in which case the latest checkpoint is used.
    pub fn load(path: &Path) -> Result<Self> {
        let dir = if path.join(STATE_FILE).exists() {
            path.to_path_buf()
        } else {
            latest_checkpoint(path)?.ok_or_else(|| CampError::MissingRun(path.to_path_buf()))?
        };
        let config = ExperimentConfig::load(&dir.join(CONFIG_FILE))?;
        let state: TrainerState = read_json(&dir.join(STATE_FILE))?;
        let ck = |name: &str| Checkpoint::load(&dir.join(format!("{name}.ckpt")));
        let skill_path = dir.join("skill_disc.ckpt");
        Ok(Self {
            skills: state.skills,
            iteration: state.iteration,
            policy: GaussianPolicy::from_checkpoint(&ck("actor")?)?,
            critic: Critic {
                net: Mlp::from_checkpoint(&ck("critic")?, "critic")?,
            },
            disc: ConditionalDiscriminator::from_checkpoint(&ck("disc")?)?,
            embedding: SkillEmbedding::from_checkpoint(&ck("embedding")?)?,
            skill_disc: if skill_path.exists() {
                Some(SkillDiscriminator::from_checkpoint(&Checkpoint::load(&skill_path)?)?)
            } else {
                None
            },
            normalizer: FeatureNormalizer::from_checkpoint(&ck("normalizer")?)?,
            config,
        })
    }

    pub fn hide_skill(&self) -> bool {
        self.config.ablation.no_skill_obs
    }

    pub fn simulator(&self) -> Result<Simulator> {
        Simulator::new(RobotModel::default(), self.config.env.clone())
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CampError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn checkpoint_name(iteration: usize) -> String {
    format!("iter_{iteration:06}")
}

/// Highest-numbered checkpoint under `run_dir/checkpoints`, if any.
pub fn latest_checkpoint(run_dir: &Path) -> Result<Option<PathBuf>> {
    let root = run_dir.join(CHECKPOINT_DIR);
    if !root.exists() {
        return Ok(None);
    }
    let mut best: Option<(usize, PathBuf)> = None;
    for entry in fs::read_dir(&root).map_err(|e| CampError::io(&root, e))? {
        let entry = entry.map_err(|e| CampError::io(&root, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let Some(k) = name.strip_prefix("iter_").and_then(|s| s.parse::<usize>().ok()) else {
            continue;
        };
        if entry.path().join(STATE_FILE).exists() && best.as_ref().is_none_or(|(b, _)| k > *b) {
            best = Some((k, entry.path()));
        }
    }
    Ok(best.map(|(_, p)| p))
}

fn check_skills(skills: &[SkillDef], clips: &[MotionClip]) -> Result<()> {
    if skills.is_empty() || skills.len() != clips.len() {
        return Err(CampError::Data(format!(
            "need one clip per skill, got {} skills and {} clips",
            skills.len(),
            clips.len()
        )));
    }
    for (i, (s, c)) in skills.iter().zip(clips).enumerate() {
        if s.label != i || c.label != i {
            return Err(CampError::Data(format!("skill and clip labels must be 0..{} in order", skills.len())));
        }
    }
    Ok(())
}

fn label_of(command: &Command) -> usize {
    command.skill.iter().position(|&v| v == 1.0).unwrap_or(0)
}

/// Alternating PPO and discriminator training.
#[derive(Debug, Clone)]
pub struct Trainer {
    config: ExperimentConfig,
    skills: Vec<SkillDef>,
    clips: Vec<MotionClip>,
    sim: Simulator,
    expert: TransitionBuffer,
    pub policy: GaussianPolicy,
    pub critic: Critic,
    pub disc: ConditionalDiscriminator,
    pub embedding: SkillEmbedding,
    pub skill_disc: Option<SkillDiscriminator>,
    pub normalizer: FeatureNormalizer,
    actor_opt: Adam,
    critic_opt: Adam,
    disc_opt: Adam,
    embedding_opt: Adam,
    skill_opt: Adam,
    learning_rate: f64,
    iteration: usize,
    episodes: Vec<u64>,
    envs: Vec<EnvState>,
}

impl Trainer {
    /// Fresh trainer. `config` is resolved and validated here.
    pub fn new(config: ExperimentConfig, skills: Vec<SkillDef>, clips: Vec<MotionClip>) -> Result<Self> {
        let config = config.resolved();
        config.validate()?;
        check_skills(&skills, &clips)?;
        let seed = config.seed;
        let t = &config.trainer;
        let a = &t.adversarial;
        let l = skills.len();
        let sim = Simulator::new(RobotModel::default(), config.env.clone())?;
        let obs_dim = crate::sim::observation_dim(l);

        let expert = preload_transitions(&clips, t.preload_per_clip, &mut stream(seed, Stream::Preload, 0, 0))?;
        let feats: Vec<AmpFeature> = expert.pairs().iter().flat_map(|p| [p.s_t, p.s_next]).collect();
        let normalizer = FeatureNormalizer::fit(&feats)?;

        let policy = GaussianPolicy::new(obs_dim, &t.actor_hidden, ACTION_DIM, t.ppo.init_std, &mut stream(seed, Stream::Init, 0, 0))?;
        let critic = Critic::new(obs_dim + PRIVILEGED_DIM, &t.critic_hidden, &mut stream(seed, Stream::Init, 1, 0))?;
        let disc = ConditionalDiscriminator::new(&a.disc_hidden, a.latent_dim, !config.ablation.no_conditioning, &mut stream(seed, Stream::Init, 2, 0))?;
        let embedding = SkillEmbedding::random(l, a.latent_dim, &mut stream(seed, Stream::Init, 3, 0))?;
        let skill_disc = if config.ablation.no_skill_disc {
            None
        } else {
            Some(SkillDiscriminator::new(&a.skill_disc_hidden, a.latent_dim, &mut stream(seed, Stream::Init, 4, 0))?)
        };

        let mut trainer = Self {
            actor_opt: Adam::new(policy.num_params(), t.ppo.learning_rate),
            critic_opt: Adam::new(critic.net.num_params(), t.ppo.learning_rate),
            disc_opt: Adam::new(disc.net.num_params(), a.disc_learning_rate),
            embedding_opt: Adam::new(embedding.params().len(), a.disc_learning_rate),
            skill_opt: Adam::new(skill_disc.as_ref().map_or(0, |f| f.net.num_params()), a.skill_disc_learning_rate),
            learning_rate: t.ppo.learning_rate,
            iteration: 0,
            episodes: vec![0; t.num_envs],
            envs: Vec::with_capacity(t.num_envs),
            config,
            skills,
            clips,
            sim,
            expert,
            policy,
            critic,
            disc,
            embedding,
            skill_disc,
            normalizer,
        };
        for n in 0..trainer.config.trainer.num_envs {
            let s = trainer.new_episode(n)?;
            trainer.envs.push(s);
        }
        Ok(trainer)
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn skills(&self) -> &[SkillDef] {
        &self.skills
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }

    pub fn expert(&self) -> &TransitionBuffer {
        &self.expert
    }

    /// Completed iterations.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn envs(&self) -> &[EnvState] {
        &self.envs
    }

    /// Start the next episode of env `n` with a uniformly drawn skill.
    fn new_episode(&mut self, n: usize) -> Result<EnvState> {
        let mut rng = stream(self.config.seed, Stream::EnvReset, n as u64, self.episodes[n]);
        self.episodes[n] += 1;
        let label = rng.random_range(0..self.skills.len());
        let skill = &self.skills[label];
        let command = Command::one_hot(skill.spec.command_velocity, label, self.skills.len())?;
        let params = self.config.env.randomization.sample(&mut rng);
        if self.config.trainer.reference_state_init {
            let clip = &self.clips[label];
            let frame = &clip.frames[rng.random_range(0..clip.len())];
            Ok(self.sim.reset_to_pose(command, params, frame.joint_positions, frame.joint_velocities))
        } else {
            Ok(self.sim.reset_with(command, params))
        }
    }

    fn hide_skill(&self) -> bool {
        self.config.ablation.no_skill_obs
    }

    fn observe(&self, states: &[EnvState]) -> (Array2<f64>, Array2<f64>) {
        let obs_dim = self.policy.obs_dim();
        let mut obs = Array2::zeros((states.len(), obs_dim));
        let mut privileged = Array2::zeros((states.len(), PRIVILEGED_DIM));
        for (i, s) in states.iter().enumerate() {
            obs.row_mut(i).as_slice_mut().unwrap().copy_from_slice(&self.sim.observation(s, self.hide_skill()));
            privileged.row_mut(i).as_slice_mut().unwrap().copy_from_slice(&privileged_observation(s));
        }
        (obs, privileged)
    }

    fn values(&self, obs: &Array2<f64>, privileged: &Array2<f64>) -> Result<Vec<f64>> {
        self.critic.values(concatenate![Axis(1), *obs, *privileged].view())
    }

    fn collect(&mut self) -> Result<(RolloutBuffer, usize)> {
        let seed = self.config.seed;
        let it = self.iteration as u64;
        let (horizon, n) = (self.config.trainer.horizon, self.envs.len());
        let mut buf = RolloutBuffer::new(horizon, n, self.policy.obs_dim(), PRIVILEGED_DIM, ACTION_DIM);
        buf.log_std = self.policy.log_std.clone();
        let mut rngs: Vec<_> = (0..n).map(|e| stream(seed, Stream::Action, it, e as u64)).collect();
        let mut terminations = 0;
        for t in 0..horizon {
            let (obs, privileged) = self.observe(&self.envs);
            let values = self.values(&obs, &privileged)?;
            let mean = self.policy.mean(obs.view())?;
            let mut actions = Array2::zeros((n, ACTION_DIM));
            let mut pre = Vec::with_capacity(n);
            for e in 0..n {
                let m = mean.row(e);
                let m = m.as_slice().unwrap();
                let a = self.policy.sample(m, &mut rngs[e]);
                let row = buf.row(t, e);
                buf.log_probs[row] = self.policy.log_prob(m, &a);
                actions.row_mut(e).as_slice_mut().unwrap().copy_from_slice(&a);
                buf.values[[t, e]] = values[e];
                pre.push(self.sim.amp_feature(&self.envs[e]));
            }
            let rows = t * n..(t + 1) * n;
            buf.obs.slice_mut(ndarray::s![rows.clone(), ..]).assign(&obs);
            buf.privileged.slice_mut(ndarray::s![rows.clone(), ..]).assign(&privileged);
            buf.actions.slice_mut(ndarray::s![rows.clone(), ..]).assign(&actions);
            buf.means.slice_mut(ndarray::s![rows, ..]).assign(&mean);

            let outcomes = batch_step(&self.sim, &mut self.envs, actions.view())?;
            let (next_obs, next_priv) = self.observe(&self.envs);
            let next_values = self.values(&next_obs, &next_priv)?;
            for (e, out) in outcomes.iter().enumerate() {
                buf.next_values[[t, e]] = next_values[e];
                buf.task_rewards[[t, e]] = out.task_reward;
                buf.terminated[[t, e]] = out.terminated;
                buf.done[[t, e]] = out.terminated || out.truncated;
                buf.pairs.push((pre[e], out.feature));
                buf.labels.push(label_of(&self.envs[e].command));
                if out.terminated {
                    terminations += 1;
                }
                if out.terminated || out.truncated {
                    self.envs[e] = self.new_episode(e)?;
                }
            }
        }
        Ok((buf, terminations))
    }

    fn normalized(&self, pairs: &[(AmpFeature, AmpFeature)], labels: &[usize]) -> Vec<NormalizedPair> {
        pairs
            .iter()
            .zip(labels)
            .map(|((a, b), &l)| self.normalizer.normalize_pair(a, b, l))
            .collect()
    }

    fn score(&self, buf: &mut RolloutBuffer, pairs: &[NormalizedPair]) -> Result<()> {
        let style = self.disc.style_rewards(pairs, &self.embedding)?;
        let z_hat = match &self.skill_disc {
            Some(f) => Some(f.predict(pairs)?),
            None => None,
        };
        let w = self.config.trainer.rewards;
        let n = buf.num_envs();
        for (i, p) in pairs.iter().enumerate() {
            let (t, e) = (i / n, i % n);
            let skill = match &z_hat {
                Some(z) => skill_reward(z.row(i).as_slice().unwrap(), self.embedding.row(p.label)),
                None => 0.0,
            };
            buf.style_rewards[[t, e]] = style[i];
            buf.skill_rewards[[t, e]] = skill;
            buf.rewards[[t, e]] = compose_reward(buf.task_rewards[[t, e]], style[i], skill, &w);
        }
        Ok(())
    }

    fn update_discriminators(&mut self, policy_pairs: &[NormalizedPair], stats: &mut IterationStats) -> Result<()> {
        let seed = self.config.seed;
        let it = self.iteration as u64;
        let a = self.config.trainer.adversarial.clone();
        let mut order: Vec<usize> = (0..policy_pairs.len()).collect();
        order.shuffle(&mut stream(seed, Stream::Shuffle, it, 0));
        let mut k = 0;
        for mb in 0..a.disc_minibatches {
            let pol: Vec<NormalizedPair> = (0..a.disc_batch)
                .map(|_| {
                    let p = policy_pairs[order[k % order.len()]];
                    k += 1;
                    p
                })
                .collect();
            let exp: Vec<NormalizedPair> = sample_expert(&self.expert, a.disc_batch, None, &mut stream(seed, Stream::Expert, it, mb as u64))?
                .into_iter()
                .map(|p| self.normalizer.normalize_pair(&p.s_t, &p.s_next, p.label))
                .collect();
            let (mut out, mut table_grad) = disc_loss(&exp, &pol, &self.embedding, &self.disc, a.omega_gp)?;
            clip_grad_norm(&mut out.param_grad, a.max_grad_norm);
            self.disc_opt.step(self.disc.net.params_mut(), &out.param_grad)?;
            if self.disc.conditioned {
                clip_grad_norm(&mut table_grad, a.max_grad_norm);
                self.embedding_opt.step(self.embedding.params_mut(), &table_grad)?;
            }
            let w = 1.0 / a.disc_minibatches as f64;
            stats.disc_loss += w * out.loss;
            stats.disc_accuracy += w * out.accuracy();
            stats.disc_penalty += w * out.penalty;
        }
        let Some(f) = self.skill_disc.as_mut() else {
            return Ok(());
        };
        for mb in 0..a.skill_disc_minibatches {
            let key = (a.disc_minibatches + mb) as u64;
            let exp: Vec<NormalizedPair> = sample_expert(&self.expert, a.skill_disc_batch, None, &mut stream(seed, Stream::Expert, it, key))?
                .into_iter()
                .map(|p| self.normalizer.normalize_pair(&p.s_t, &p.s_next, p.label))
                .collect();
            let z_hat = f.predict(&exp)?;
            let hits = exp
                .iter()
                .enumerate()
                .filter(|(i, p)| predict_skill(z_hat.row(*i).as_slice().unwrap(), &self.embedding) == p.label)
                .count();
            let mut out = skill_disc_loss(&exp, &self.embedding, f, a.lambda_gp)?;
            clip_grad_norm(&mut out.param_grad, a.max_grad_norm);
            self.skill_opt.step(f.net.params_mut(), &out.param_grad)?;
            let w = 1.0 / a.skill_disc_minibatches as f64;
            stats.skill_loss += w * out.loss;
            stats.skill_accuracy += w * hits as f64 / exp.len() as f64;
        }
        Ok(())
    }

    fn ppo_update(&mut self, buf: &RolloutBuffer, stats: &mut IterationStats) -> Result<()> {
        let p = self.config.trainer.ppo.clone();
        let scaled = buf.rewards.mapv(|r| r * p.reward_scale);
        let (mut adv, returns) = gae_advantages(
            scaled.view(),
            buf.values.view(),
            buf.next_values.view(),
            buf.terminated.view(),
            buf.done.view(),
            p.gamma,
            p.gae_lambda,
        );
        let adv = {
            let s = adv.as_slice_mut().unwrap();
            normalize_advantages(s);
            s.to_vec()
        };
        let returns = returns.as_slice().unwrap().to_vec();
        let critic_inputs = concatenate![Axis(1), buf.obs, buf.privileged];
        let rows = buf.len();
        let mb_size = rows / p.minibatches;
        let mut updates = 0.0;
        for epoch in 0..p.epochs {
            let mut order: Vec<usize> = (0..rows).collect();
            order.shuffle(&mut stream(self.config.seed, Stream::Shuffle, self.iteration as u64, 1 + epoch as u64));
            for mb in 0..p.minibatches {
                let idx = &order[mb * mb_size..(mb + 1) * mb_size];
                let obs = buf.obs.select(Axis(0), idx);
                let actions = buf.actions.select(Axis(0), idx);
                let old_lp: Vec<f64> = idx.iter().map(|&i| buf.log_probs[i]).collect();
                let a: Vec<f64> = idx.iter().map(|&i| adv[i]).collect();
                let r: Vec<f64> = idx.iter().map(|&i| returns[i]).collect();
                let s = surrogate_loss(
                    &self.policy,
                    SurrogateBatch {
                        obs: obs.view(),
                        actions: actions.view(),
                        old_log_prob: &old_lp,
                        advantages: &a,
                    },
                    p.clip,
                    p.entropy_coef,
                )?;
                let kl = idx
                    .iter()
                    .enumerate()
                    .map(|(j, &i)| {
                        gaussian_kl(
                            buf.means.row(i).as_slice().unwrap(),
                            &buf.log_std,
                            s.mean.row(j).as_slice().unwrap(),
                            &self.policy.log_std,
                        )
                    })
                    .sum::<f64>()
                    / idx.len() as f64;
                if p.desired_kl > 0.0 {
                    if kl > 2.0 * p.desired_kl {
                        self.learning_rate = (self.learning_rate / 1.5).max(MIN_LR);
                    } else if kl < 0.5 * p.desired_kl && kl > 0.0 {
                        self.learning_rate = (self.learning_rate * 1.5).min(MAX_LR);
                    }
                }
                let v = value_loss(&self.critic.net, critic_inputs.select(Axis(0), idx).view(), &r)?;
                let mut grad = s.param_grad;
                let split = grad.len();
                grad.extend(v.param_grad.iter().map(|g| p.value_coef * g));
                clip_grad_norm(&mut grad, p.max_grad_norm);
                self.actor_opt.lr = self.learning_rate;
                self.critic_opt.lr = self.learning_rate;
                let mut params = self.policy.flat_params();
                self.actor_opt.step(&mut params, &grad[..split])?;
                self.policy.set_flat_params(&params)?;
                self.critic_opt.step(self.critic.net.params_mut(), &grad[split..])?;

                stats.surrogate_loss += s.surrogate;
                stats.value_loss += v.loss;
                stats.entropy += s.entropy;
                stats.kl += kl;
                stats.clip_fraction += s.clip_fraction;
                updates += 1.0;
            }
        }
        for v in [
            &mut stats.surrogate_loss,
            &mut stats.value_loss,
            &mut stats.entropy,
            &mut stats.kl,
            &mut stats.clip_fraction,
        ] {
            *v /= updates;
        }
        Ok(())
    }

    /// Collect one rollout, update the normalizer (during warmup) and the
    /// discriminators, then run PPO on the stored rewards.
    pub fn run_iteration(&mut self) -> Result<IterationStats> {
        let (mut buf, terminations) = self.collect()?;
        let warmup = (self.config.trainer.adversarial.normalizer_warmup_fraction * self.config.trainer.iterations as f64).ceil() as usize;
        if self.iteration < warmup {
            let feats: Vec<AmpFeature> = buf.pairs.iter().flat_map(|(a, b)| [*a, *b]).collect();
            self.normalizer.update(&feats);
        }
        let pairs = self.normalized(&buf.pairs, &buf.labels);
        self.score(&mut buf, &pairs)?;
        let n = buf.len() as f64;
        let mut stats = IterationStats {
            iteration: self.iteration,
            task_reward: buf.task_rewards.sum() / n,
            style_reward: buf.style_rewards.sum() / n,
            skill_reward: buf.skill_rewards.sum() / n,
            total_reward: buf.rewards.sum() / n,
            disc_loss: 0.0,
            disc_accuracy: 0.0,
            disc_penalty: 0.0,
            skill_loss: 0.0,
            skill_accuracy: 0.0,
            surrogate_loss: 0.0,
            value_loss: 0.0,
            entropy: 0.0,
            kl: 0.0,
            learning_rate: self.learning_rate,
            clip_fraction: 0.0,
            terminations,
        };
        self.update_discriminators(&pairs, &mut stats)?;
        self.ppo_update(&buf, &mut stats)?;
        self.iteration += 1;
        Ok(stats)
    }

    /// Collect a rollout and score it without updating anything. Used by tests
    /// and diagnostics.
    pub fn collect_scored(&mut self) -> Result<RolloutBuffer> {
        let (mut buf, _) = self.collect()?;
        let pairs = self.normalized(&buf.pairs, &buf.labels);
        self.score(&mut buf, &pairs)?;
        Ok(buf)
    }

    pub fn save_checkpoint(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| CampError::io(dir, e))?;
        let save = |name: &str, ck: Checkpoint| ck.save(&dir.join(format!("{name}.ckpt")));
        save("actor", self.policy.to_checkpoint())?;
        save("critic", self.critic.net.to_checkpoint("critic"))?;
        save("disc", self.disc.to_checkpoint())?;
        save("embedding", self.embedding.to_checkpoint())?;
        save("normalizer", self.normalizer.to_checkpoint())?;
        save("adam_actor", self.actor_opt.to_checkpoint())?;
        save("adam_critic", self.critic_opt.to_checkpoint())?;
        save("adam_disc", self.disc_opt.to_checkpoint())?;
        save("adam_embedding", self.embedding_opt.to_checkpoint())?;
        if let Some(f) = &self.skill_disc {
            save("skill_disc", f.to_checkpoint())?;
            save("adam_skill_disc", self.skill_opt.to_checkpoint())?;
        }
        self.config.save(&dir.join(CONFIG_FILE))?;
        let state = TrainerState {
            iteration: self.iteration,
            learning_rate: self.learning_rate,
            skills: self.skills.clone(),
            episodes: self.episodes.clone(),
            envs: self.envs.clone(),
        };
        let path = dir.join(STATE_FILE);
        fs::write(&path, serde_json::to_string(&state)?).map_err(|e| CampError::io(&path, e))
    }

    /// Restore a trainer from `dir`. `config` may differ from the saved one only
    /// in `trainer.iterations`.
    pub fn load_checkpoint(config: ExperimentConfig, clips: Vec<MotionClip>, dir: &Path) -> Result<Self> {
        let state: TrainerState = read_json(&dir.join(STATE_FILE))?;
        let mut saved = ExperimentConfig::load(&dir.join(CONFIG_FILE))?;
        let config = config.resolved();
        saved.trainer.iterations = config.trainer.iterations;
        if saved != config {
            return Err(CampError::Config(format!(
                "config differs from the one saved in {} (only trainer.iterations may change on resume)",
                dir.display()
            )));
        }
        let mut t = Self::new(config, state.skills, clips)?;
        let ck = |name: &str| Checkpoint::load(&dir.join(format!("{name}.ckpt")));
        t.policy = GaussianPolicy::from_checkpoint(&ck("actor")?)?;
        t.critic.net = Mlp::from_checkpoint(&ck("critic")?, "critic")?;
        t.disc = ConditionalDiscriminator::from_checkpoint(&ck("disc")?)?;
        t.embedding = SkillEmbedding::from_checkpoint(&ck("embedding")?)?;
        t.normalizer = FeatureNormalizer::from_checkpoint(&ck("normalizer")?)?;
        t.actor_opt = Adam::from_checkpoint(&ck("adam_actor")?)?;
        t.critic_opt = Adam::from_checkpoint(&ck("adam_critic")?)?;
        t.disc_opt = Adam::from_checkpoint(&ck("adam_disc")?)?;
        t.embedding_opt = Adam::from_checkpoint(&ck("adam_embedding")?)?;
        if t.skill_disc.is_some() {
            t.skill_disc = Some(SkillDiscriminator::from_checkpoint(&ck("skill_disc")?)?);
            t.skill_opt = Adam::from_checkpoint(&ck("adam_skill_disc")?)?;
        }
        if state.envs.len() != t.envs.len() || state.episodes.len() != t.envs.len() {
            return Err(CampError::Data("checkpoint env count differs from trainer.num_envs".into()));
        }
        t.iteration = state.iteration;
        t.learning_rate = state.learning_rate;
        t.episodes = state.episodes;
        t.envs = state.envs;
        Ok(t)
    }
}

/// Options for [`train`].
#[derive(Debug, Clone, Copy, Default)]
pub struct TrainOptions {
    /// Continue from the latest checkpoint in the output directory.
    pub resume: bool,
    /// Replace an existing run.
    pub force: bool,
}

const METRICS_HEADER: [&str; 17] = [
    "iteration",
    "task_reward",
    "style_reward",
    "skill_reward",
    "total_reward",
    "disc_loss",
    "disc_accuracy",
    "disc_penalty",
    "skill_loss",
    "skill_accuracy",
    "surrogate_loss",
    "value_loss",
    "entropy",
    "kl",
    "learning_rate",
    "clip_fraction",
    "terminations",
];

fn write_metrics(path: &Path, rows: &[IterationStats]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(METRICS_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CampError::io(path, e))
}

fn append_metrics(path: &Path, row: &IterationStats) -> Result<()> {
    let file = fs::OpenOptions::new().append(true).open(path).map_err(|e| CampError::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.serialize(row)?;
    w.flush().map_err(|e| CampError::io(path, e))
}

pub fn read_metrics(path: &Path) -> Result<Vec<IterationStats>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<_>, _>>()?)
}

/// Train into `out_dir`, writing `config.toml`, `metrics.csv` and checkpoints
/// under `checkpoints/iter_XXXXXX/`. The initial state and the final iteration
/// are always checkpointed. `on_iteration` sees every new metrics row.
pub fn train(
    config: ExperimentConfig,
    skills: Vec<SkillDef>,
    clips: Vec<MotionClip>,
    out_dir: &Path,
    options: TrainOptions,
    mut on_iteration: impl FnMut(&IterationStats),
) -> Result<Trainer> {
    let metrics_path = out_dir.join(METRICS_FILE);
    let (mut trainer, mut rows) = match latest_checkpoint(out_dir)? {
        Some(dir) if options.resume => {
            let t = Trainer::load_checkpoint(config, clips, &dir)?;
            let mut rows = if metrics_path.exists() { read_metrics(&metrics_path)? } else { Vec::new() };
            rows.retain(|r| r.iteration < t.iteration());
            (t, rows)
        }
        None if options.resume => return Err(CampError::MissingRun(out_dir.join(CHECKPOINT_DIR))),
        existing => {
            if (existing.is_some() || metrics_path.exists()) && !options.force {
                return Err(CampError::OutputExists(out_dir.to_path_buf()));
            }
            let root = out_dir.join(CHECKPOINT_DIR);
            if root.exists() {
                fs::remove_dir_all(&root).map_err(|e| CampError::io(&root, e))?;
            }
            (Trainer::new(config, skills, clips)?, Vec::new())
        }
    };
    fs::create_dir_all(out_dir).map_err(|e| CampError::io(out_dir, e))?;
    trainer.config().save(&out_dir.join(CONFIG_FILE))?;
    write_metrics(&metrics_path, &rows)?;
    let ckpt_root = out_dir.join(CHECKPOINT_DIR);
    if trainer.iteration() == 0 {
        trainer.save_checkpoint(&ckpt_root.join(checkpoint_name(0)))?;
    }
    let total = trainer.config().trainer.iterations;
    let interval = trainer.config().trainer.checkpoint_interval;
    while trainer.iteration() < total {
        let before = trainer.clone();
        let stats = match trainer.run_iteration() {
            Ok(s) => s,
            Err(e) => {
                let dir = ckpt_root.join(checkpoint_name(before.iteration()));
                if !dir.join(STATE_FILE).exists() {
                    before.save_checkpoint(&dir)?;
                }
                return Err(e);
            }
        };
        on_iteration(&stats);
        append_metrics(&metrics_path, &stats)?;
        rows.push(stats);
        let k = trainer.iteration();
        if k % interval == 0 || k == total {
            trainer.save_checkpoint(&ckpt_root.join(checkpoint_name(k)))?;
        }
    }
    Ok(trainer)
}
