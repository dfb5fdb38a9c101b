mod common;

use std::fs;
use std::path::Path;

use camp_core::config::ExperimentConfig;
use camp_core::motion::GaitKind;
use camp_core::ppo::{
    checkpoint_name, compose_reward, latest_checkpoint, read_metrics, train, TrainOptions, TrainedModel, Trainer, CHECKPOINT_DIR,
    METRICS_FILE,
};
use camp_core::CampError;

use common::small_config;

fn config() -> ExperimentConfig {
    small_config(&[GaitKind::Trot, GaitKind::Pace], &[2.0])
}

fn run(cfg: ExperimentConfig, dir: &Path, options: TrainOptions) -> Result<Trainer, CampError> {
    let (manifest, clips) = cfg.dataset.generate(cfg.seed).unwrap();
    train(cfg, manifest.skills, clips, dir, options, |_| {})
}

fn checkpoints(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir.join(CHECKPOINT_DIR))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn zero_iterations_write_only_the_initial_checkpoint() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config();
    cfg.trainer.iterations = 0;
    run(cfg, tmp.path(), TrainOptions::default()).unwrap();
    assert_eq!(checkpoints(tmp.path()), vec![checkpoint_name(0)]);
    assert!(read_metrics(&tmp.path().join(METRICS_FILE)).unwrap().is_empty());
    assert!(tmp.path().join("config.toml").exists());
}

#[test]
fn resume_matches_straight_through_training() {
    let tmp = tempfile::tempdir().unwrap();
    let straight = tmp.path().join("straight");
    let resumed = tmp.path().join("resumed");
    let cfg = config();
    run(cfg.clone(), &straight, TrainOptions::default()).unwrap();

    let mut short = cfg.clone();
    short.trainer.iterations = 2;
    run(short, &resumed, TrainOptions::default()).unwrap();
    run(cfg, &resumed, TrainOptions { resume: true, force: false }).unwrap();

    let last = checkpoint_name(3);
    assert_eq!(files(&straight.join(CHECKPOINT_DIR).join(&last)), files(&resumed.join(CHECKPOINT_DIR).join(&last)));
    let a = read_metrics(&straight.join(METRICS_FILE)).unwrap();
    let b = read_metrics(&resumed.join(METRICS_FILE)).unwrap();
    assert_eq!(a.len(), 3);
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}

#[test]
fn resume_without_checkpoint_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let err = run(config(), tmp.path(), TrainOptions { resume: true, force: false }).unwrap_err();
    assert!(matches!(err, CampError::MissingRun(_)), "{err}");
}

#[test]
fn existing_output_needs_force() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config();
    cfg.trainer.iterations = 1;
    run(cfg.clone(), tmp.path(), TrainOptions::default()).unwrap();
    let err = run(cfg.clone(), tmp.path(), TrainOptions::default()).unwrap_err();
    assert!(matches!(err, CampError::OutputExists(_)), "{err}");
    run(cfg, tmp.path(), TrainOptions { resume: false, force: true }).unwrap();
    assert_eq!(read_metrics(&tmp.path().join(METRICS_FILE)).unwrap().len(), 1);
}

#[test]
fn resume_rejects_a_changed_config() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config();
    cfg.trainer.iterations = 1;
    run(cfg.clone(), tmp.path(), TrainOptions::default()).unwrap();
    cfg.trainer.ppo.clip = 0.3;
    cfg.trainer.iterations = 2;
    assert!(run(cfg, tmp.path(), TrainOptions { resume: true, force: false }).is_err());
}

#[test]
fn trained_model_loads_from_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config();
    cfg.trainer.iterations = 2;
    let trainer = run(cfg, tmp.path(), TrainOptions::default()).unwrap();
    assert_eq!(latest_checkpoint(tmp.path()).unwrap().unwrap().file_name().unwrap(), checkpoint_name(2).as_str());
    let model = TrainedModel::load(tmp.path()).unwrap();
    assert_eq!(model.iteration, 2);
    assert_eq!(model.policy, trainer.policy);
    assert!(model.skill_disc.is_some());
}

#[test]
fn stored_rewards_match_their_parts() {
    let cfg = config();
    let (manifest, clips) = cfg.dataset.generate(cfg.seed).unwrap();
    let mut trainer = Trainer::new(cfg, manifest.skills, clips).unwrap();
    trainer.run_iteration().unwrap();
    let w = trainer.config().trainer.rewards;
    let buf = trainer.collect_scored().unwrap();
    for t in 0..buf.horizon() {
        for n in 0..buf.num_envs() {
            let (task, style, skill) = (buf.task_rewards[[t, n]], buf.style_rewards[[t, n]], buf.skill_rewards[[t, n]]);
            assert_eq!(buf.rewards[[t, n]], compose_reward(task, style, skill, &w));
            assert!((0.0..=1.0).contains(&style));
            assert!((-1.0..=1.0).contains(&skill));
        }
    }
}

#[test]
fn disabled_skill_reward_contributes_nothing() {
    let mut cfg = config();
    cfg.ablation.no_skill_reward = true;
    let (manifest, clips) = cfg.dataset.generate(cfg.seed).unwrap();
    let mut trainer = Trainer::new(cfg, manifest.skills, clips).unwrap();
    assert_eq!(trainer.config().trainer.rewards.skill, 0.0);
    let buf = trainer.collect_scored().unwrap();
    for (i, r) in buf.rewards.iter().enumerate() {
        let (t, n) = (i / buf.num_envs(), i % buf.num_envs());
        assert_eq!(*r, buf.task_rewards[[t, n]] + buf.style_rewards[[t, n]]);
    }
}

#[test]
fn single_env_single_step_rollout() {
    let mut cfg = config();
    cfg.trainer.num_envs = 1;
    cfg.trainer.horizon = 1;
    cfg.trainer.ppo.minibatches = 1;
    let (manifest, clips) = cfg.dataset.generate(cfg.seed).unwrap();
    let mut trainer = Trainer::new(cfg, manifest.skills, clips).unwrap();
    let buf = trainer.collect_scored().unwrap();
    assert_eq!((buf.horizon(), buf.num_envs(), buf.len()), (1, 1, 1));
    assert_eq!(buf.rewards.dim(), (1, 1));
    let stats = trainer.run_iteration().unwrap();
    assert!(stats.total_reward.is_finite());
}

#[test]
fn skill_labels_must_match_clips() {
    let cfg = config();
    let (manifest, mut clips) = cfg.dataset.generate(cfg.seed).unwrap();
    clips.swap(0, 1);
    assert!(Trainer::new(cfg, manifest.skills, clips).is_err());
}
