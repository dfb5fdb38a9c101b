#![allow(dead_code)]

use camp_core::adversarial::{FeatureNormalizer, NormalizedPair, SkillDiscriminator, SkillEmbedding};
use camp_core::config::ExperimentConfig;
use camp_core::motion::{
    clip_features, generate_clip, generate_clip_at, preload_transitions, skill_catalog, AmpFeature, GaitKind, MotionClip, SkillDef,
};
use camp_core::nn::{clip_grad_norm, Adam};
use camp_core::rng::{stream, Stream};
use rand::Rng;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;
/// Gradients smaller than this are compared in absolute terms.
pub const FD_FLOOR: f64 = 1e-3;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FD_FLOOR)
}

/// Worst relative error over `probes` randomly chosen coordinates of `x`.
///
/// `eval` must be a pure function of `x`; `analytic[i]` is its claimed partial
/// derivative with respect to `x[i]`.
pub fn fd_check<R: Rng>(x: &mut [f64], analytic: &[f64], probes: usize, rng: &mut R, mut eval: impl FnMut(&[f64]) -> f64) -> f64 {
    assert_eq!(x.len(), analytic.len());
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let i = rng.random_range(0..x.len());
        let orig = x[i];
        x[i] = orig + FD_STEP;
        let up = eval(x);
        x[i] = orig - FD_STEP;
        let down = eval(x);
        x[i] = orig;
        let numeric = (up - down) / (2.0 * FD_STEP);
        worst = worst.max(relative_error(analytic[i], numeric));
    }
    worst
}

pub fn small_config(skills: &[GaitKind], frequencies: &[f64]) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.dataset.gaits = skills.to_vec();
    cfg.dataset.frequencies = frequencies.to_vec();
    cfg.dataset.duration = 2.0;
    cfg.trainer.num_envs = 4;
    cfg.trainer.horizon = 8;
    cfg.trainer.actor_hidden = vec![16, 8];
    cfg.trainer.critic_hidden = vec![16, 8];
    cfg.trainer.preload_per_clip = 50;
    cfg.trainer.checkpoint_interval = 1;
    cfg.trainer.ppo.minibatches = 2;
    cfg.trainer.ppo.epochs = 2;
    cfg.trainer.adversarial.disc_hidden = vec![16, 8];
    cfg.trainer.adversarial.skill_disc_hidden = vec![16, 8];
    cfg.trainer.adversarial.disc_batch = 8;
    cfg.trainer.adversarial.skill_disc_batch = 8;
    cfg.trainer.iterations = 3;
    cfg
}

/// Skill discriminator trained on expert transitions of the eight skills
/// (four gaits at 2 and 4 Hz) against a fixed random embedding table.
pub struct TrainedSkillModel {
    pub skills: Vec<SkillDef>,
    pub train_clips: Vec<MotionClip>,
    /// Same skills, sampled half a frame later.
    pub held_out: Vec<MotionClip>,
    pub normalizer: FeatureNormalizer,
    pub table: SkillEmbedding,
    pub skill_disc: SkillDiscriminator,
}

pub const SKILL_TRAIN_STEPS: usize = 800;
pub const SKILL_TRAIN_BATCH: usize = 128;
pub const SKILL_TRAIN_LR: f64 = 3e-3;
pub const SKILL_LAMBDA: f64 = 10.0;

pub fn train_skill_model(seed: u64) -> TrainedSkillModel {
    let skills = skill_catalog(&GaitKind::ALL, &[2.0, 4.0]).unwrap();
    let dt = 0.02;
    let train_clips: Vec<MotionClip> = skills.iter().map(|s| generate_clip(s, 10.0, dt).unwrap()).collect();
    let held_out: Vec<MotionClip> = skills.iter().map(|s| generate_clip_at(s, 0.5 * dt, 10.0, dt).unwrap()).collect();
    let buffer = preload_transitions(&train_clips, 500, &mut stream(seed, Stream::Preload, 0, 0)).unwrap();
    let feats: Vec<AmpFeature> = buffer.pairs().iter().flat_map(|p| [p.s_t, p.s_next]).collect();
    let normalizer = FeatureNormalizer::fit(&feats).unwrap();
    let table = SkillEmbedding::random(skills.len(), 8, &mut stream(seed, Stream::Init, 3, 0)).unwrap();
    let mut skill_disc = SkillDiscriminator::new(&[512, 256], 8, &mut stream(seed, Stream::Init, 4, 0)).unwrap();
    let mut opt = Adam::new(skill_disc.net.num_params(), SKILL_TRAIN_LR);
    for step in 0..SKILL_TRAIN_STEPS {
        let mut rng = stream(seed, Stream::Expert, step as u64, 0);
        let batch: Vec<NormalizedPair> = (0..SKILL_TRAIN_BATCH)
            .map(|_| {
                let p = &buffer.pairs()[rng.random_range(0..buffer.len())];
                normalizer.normalize_pair(&p.s_t, &p.s_next, p.label)
            })
            .collect();
        let loss = camp_core::adversarial::skill_disc_loss(&batch, &table, &skill_disc, SKILL_LAMBDA).unwrap();
        let mut g = loss.param_grad;
        clip_grad_norm(&mut g, 1.0);
        opt.step(skill_disc.net.params_mut(), &g).unwrap();
    }
    TrainedSkillModel {
        skills,
        train_clips,
        held_out,
        normalizer,
        table,
        skill_disc,
    }
}

/// Normalized consecutive pairs of a clip.
pub fn clip_pairs(clip: &MotionClip, normalizer: &FeatureNormalizer) -> Vec<NormalizedPair> {
    let f = clip_features(clip);
    f.windows(2).map(|w| normalizer.normalize_pair(&w[0], &w[1], clip.label)).collect()
}
