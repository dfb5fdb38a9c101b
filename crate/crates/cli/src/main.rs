//! `camp`: data generation, training, evaluation rollouts and analysis.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use camp_core::analysis::{
    ablation_flags, ablation_report, clip_contacts, contact_metrics, downsample, dtw_matrix, format_report, kmeans_purity,
    latent_sequences, pca_project, standardize_sequences, tracking_accuracy, ABLATION_RUNS, SAGITTAL_JOINTS,
};
use camp_core::config::{ExperimentConfig, SkillSchedule, CONFIG_FILE};
use camp_core::error::ErrorKind;
use camp_core::motion::{read_store, write_store, MotionClip, SkillDef};
use camp_core::ppo::{evaluate_schedule, train, TrainOptions, TrainedModel};
use camp_core::sim::{read_trace, write_trace};
use camp_core::CampError;

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERIC: u8 = 4;
const EXIT_INCOMPLETE: u8 = 5;

#[derive(Parser, Debug)]
#[command(name = "camp", version, about = "Skill-conditioned adversarial motion priors for quadruped gaits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Experiment config (TOML). Missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Replace existing outputs.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Args, Debug, Clone, Default)]
struct TrainArgs {
    /// Clip store written by `generate-data`; generated in memory from the config when omitted.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Continue from the latest checkpoint in the output directory.
    #[arg(long)]
    resume: bool,
    /// Number of parallel environments.
    #[arg(long)]
    envs: Option<usize>,
    /// Training iterations.
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    no_skill_obs: bool,
    #[arg(long)]
    no_conditioning: bool,
    #[arg(long)]
    no_skill_disc: bool,
    #[arg(long)]
    no_skill_reward: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum AnalysisKind {
    Dtw,
    Clusters,
    Contacts,
    Tracking,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the expert clip store.
    GenerateData {
        #[command(flatten)]
        common: Common,
    },
    /// Train a policy.
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Evaluation rollout of a trained policy under a skill schedule.
    Rollout {
        #[command(flatten)]
        common: Common,
        /// Run directory or checkpoint directory.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Schedule TOML (`[[entries]] time, skill, velocity`); defaults to skill 0 throughout.
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// Constant skill label (ignored with --schedule).
        #[arg(long)]
        skill: Option<usize>,
        /// Rollout length in seconds; defaults to analysis.eval_duration.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Analysis artifacts.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(value_enum)]
        kind: AnalysisKind,
        /// Trained run or checkpoint (dtw, clusters).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Clip store; generated from the config when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Rollout trace CSV (contacts, tracking).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Train the five ablation configurations and write the comparison report.
    Ablate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        train: TrainArgs,
        /// Only build the report from existing runs.
        #[arg(long)]
        report_only: bool,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.chain().find_map(|c| c.downcast_ref::<CampError>()) {
        return match e.kind() {
            ErrorKind::Config => EXIT_CONFIG,
            ErrorKind::Data => EXIT_DATA,
            ErrorKind::Numeric => EXIT_NUMERIC,
        };
    }
    if err.chain().any(|c| c.downcast_ref::<Incomplete>().is_some()) {
        return EXIT_INCOMPLETE;
    }
    EXIT_DATA
}

#[derive(Debug)]
struct Incomplete(String);

impl std::fmt::Display for Incomplete {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Incomplete {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::GenerateData { common } => generate_data(&common),
        Command::Train { common, train } => cmd_train(&common, &train),
        Command::Rollout {
            common,
            checkpoint,
            schedule,
            skill,
            duration,
        } => rollout(&common, &checkpoint, schedule.as_deref(), skill, duration),
        Command::Analyze {
            common,
            kind,
            checkpoint,
            data,
            trace,
        } => analyze(&common, kind, checkpoint.as_deref(), data.as_deref(), trace.as_deref()),
        Command::Ablate {
            common,
            train,
            report_only,
        } => ablate(&common, &train, report_only),
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn apply_train_args(cfg: &mut ExperimentConfig, t: &TrainArgs) {
    if let Some(n) = t.envs {
        cfg.trainer.num_envs = n;
    }
    if let Some(n) = t.iters {
        cfg.trainer.iterations = n;
    }
    let a = &mut cfg.ablation;
    a.no_skill_obs |= t.no_skill_obs;
    a.no_conditioning |= t.no_conditioning;
    a.no_skill_disc |= t.no_skill_disc;
    a.no_skill_reward |= t.no_skill_reward;
}

fn out_dir(common: &Common, default: &str) -> PathBuf {
    common.out_dir.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn load_dataset(cfg: &ExperimentConfig, data: Option<&Path>) -> Result<(Vec<SkillDef>, Vec<MotionClip>)> {
    match data {
        Some(dir) => {
            let (manifest, clips) = read_store(dir)?;
            Ok((manifest.skills, clips))
        }
        None => {
            let (manifest, clips) = cfg.dataset.generate(cfg.seed)?;
            Ok((manifest.skills, clips))
        }
    }
}

fn generate_data(common: &Common) -> Result<()> {
    let cfg = load_config(common)?;
    cfg.validate()?;
    let dir = out_dir(common, "data");
    let (manifest, clips) = cfg.dataset.generate(cfg.seed)?;
    write_store(&dir, &manifest, &clips, common.force)?;
    cfg.save(&dir.join(CONFIG_FILE))?;
    log::info!("wrote {} clips to {}", clips.len(), dir.display());
    Ok(())
}

fn cmd_train(common: &Common, t: &TrainArgs) -> Result<()> {
    let mut cfg = load_config(common)?;
    apply_train_args(&mut cfg, t);
    let dir = out_dir(common, "runs/camp");
    train_run(cfg, t, &dir, common.force)
}

fn train_run(cfg: ExperimentConfig, t: &TrainArgs, dir: &Path, force: bool) -> Result<()> {
    let cfg = cfg.resolved();
    cfg.validate()?;
    let (skills, clips) = load_dataset(&cfg, t.data.as_deref())?;
    log::info!("training {} skills for {} iterations into {}", skills.len(), cfg.trainer.iterations, dir.display());
    let options = TrainOptions {
        resume: t.resume,
        force,
    };
    train(cfg, skills, clips, dir, options, |s| {
        log::info!(
            "iter {:>5}  task {:.3}  style {:.3}  skill {:.3}  disc {:.3} ({:.0}%)  value {:.3}",
            s.iteration,
            s.task_reward,
            s.style_reward,
            s.skill_reward,
            s.disc_loss,
            100.0 * s.disc_accuracy,
            s.value_loss
        );
    })?;
    Ok(())
}

fn rollout(common: &Common, checkpoint: &Path, schedule: Option<&Path>, skill: Option<usize>, duration: Option<f64>) -> Result<()> {
    let model = TrainedModel::load(checkpoint)?;
    let schedule = match schedule {
        Some(p) => SkillSchedule::load(p)?,
        None => SkillSchedule::constant(skill.unwrap_or(0)),
    };
    let duration = duration.unwrap_or(model.config.analysis.eval_duration);
    let rows = evaluate_schedule(&model.simulator()?, &model.policy, model.hide_skill(), &model.skills, &schedule, duration)?;
    let dir = out_dir(common, "rollout");
    ensure_dir(&dir)?;
    let path = dir.join("trace.csv");
    if path.exists() && !common.force {
        return Err(CampError::OutputExists(path).into());
    }
    write_trace(&path, &rows)?;
    model.config.save(&dir.join(CONFIG_FILE))?;
    log::info!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn analyze(common: &Common, kind: AnalysisKind, checkpoint: Option<&Path>, data: Option<&Path>, trace: Option<&Path>) -> Result<()> {
    let dir = out_dir(common, "analysis");
    ensure_dir(&dir)?;
    match kind {
        AnalysisKind::Dtw | AnalysisKind::Clusters => {
            let ck = checkpoint.context("--checkpoint is required for dtw and clusters")?;
            let model = TrainedModel::load(ck)?;
            let cfg = model.config.clone();
            let (_, clips) = load_dataset(&cfg, data)?;
            let f = model
                .skill_disc
                .as_ref()
                .ok_or_else(|| CampError::Data("run has no skill discriminator".into()))?;
            let mut seqs = latent_sequences(f, &model.normalizer, &clips)?;
            standardize_sequences(&mut seqs)?;
            cfg.save(&dir.join(CONFIG_FILE))?;
            if kind == AnalysisKind::Dtw {
                let sub: Vec<Vec<Vec<f64>>> = seqs.iter().map(|s| downsample(&s.latents, cfg.analysis.dtw_stride)).collect();
                let m = dtw_matrix(&sub)?;
                let mut header = vec!["skill".to_string()];
                header.extend(seqs.iter().map(|s| s.name.clone()));
                let rows = seqs.iter().enumerate().map(|(i, s)| {
                    let mut r = vec![s.name.clone()];
                    r.extend(m.row(i).iter().map(|v| format!("{v}")));
                    r
                });
                write_csv(&dir.join("dtw.csv"), &header, rows)?;
                println!("{}", dir.join("dtw.csv").display());
            } else {
                let points: Vec<Vec<f64>> = seqs.iter().flat_map(|s| s.latents.clone()).collect();
                let labels: Vec<usize> = seqs.iter().flat_map(|s| std::iter::repeat_n(s.label, s.latents.len())).collect();
                let (assign, purity) = kmeans_purity(&points, &labels, seqs.len())?;
                let proj = pca_project(&points, 2)?;
                let header: Vec<String> = ["label", "cluster", "pc1", "pc2"].iter().map(|s| s.to_string()).collect();
                let rows = (0..points.len()).map(|i| vec![labels[i].to_string(), assign[i].to_string(), format!("{}", proj[i][0]), format!("{}", proj[i][1])]);
                write_csv(&dir.join("clusters.csv"), &header, rows)?;
                println!("purity {purity:.4}");
            }
        }
        AnalysisKind::Contacts => {
            let cfg = load_config(common)?;
            let (series, dt): (Vec<(String, Vec<[bool; 4]>)>, f64) = match trace {
                Some(p) => {
                    let rows = read_trace(p)?;
                    let dt = if rows.len() > 1 { rows[1].time - rows[0].time } else { cfg.env.dt };
                    (vec![(p.display().to_string(), rows.iter().map(|r| r.contacts).collect())], dt)
                }
                None => {
                    let (_, clips) = load_dataset(&cfg, data)?;
                    let dt = clips.first().map_or(cfg.dataset.dt, |c| c.dt);
                    (clips.iter().map(|c| (c.name.clone(), clip_contacts(c, 1e-6))).collect(), dt)
                }
            };
            let header: Vec<String> = ["source", "duty_FL", "duty_FR", "duty_RL", "duty_RR", "offset_FL", "offset_FR", "offset_RL", "offset_RR", "frequency"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            let mut rows = Vec::new();
            for (name, c) in &series {
                let m = contact_metrics(c, dt, None)?;
                println!("{name}: duty {:?} offsets {:?}", m.duty_factors, m.phase_offsets);
                let mut r = vec![name.clone()];
                r.extend(m.duty_factors.iter().chain(&m.phase_offsets).map(|v| format!("{v:.4}")));
                r.push(format!("{:.4}", m.frequency));
                rows.push(r);
            }
            write_csv(&dir.join("contacts.csv"), &header, rows)?;
        }
        AnalysisKind::Tracking => {
            let p = trace.context("--trace is required for tracking")?;
            let rows = read_trace(p)?;
            let n = rows.len();
            let mut target = ndarray::Array2::zeros((n, SAGITTAL_JOINTS.len()));
            let mut actual = ndarray::Array2::zeros((n, SAGITTAL_JOINTS.len()));
            for (i, r) in rows.iter().enumerate() {
                for (k, &j) in SAGITTAL_JOINTS.iter().enumerate() {
                    target[[i, k]] = r.joint_targets[j];
                    actual[[i, k]] = r.joint_positions[j];
                }
            }
            let acc = tracking_accuracy(target.view(), actual.view())?;
            println!("tracking accuracy {acc:.2}%");
            std::fs::write(dir.join("tracking.txt"), format!("{acc}\n"))?;
        }
    }
    Ok(())
}

fn ablate(common: &Common, t: &TrainArgs, report_only: bool) -> Result<()> {
    let base = {
        let mut c = load_config(common)?;
        apply_train_args(&mut c, t);
        c
    };
    let root = out_dir(common, "runs/ablation");
    ensure_dir(&root)?;
    base.save(&root.join(CONFIG_FILE))?;
    if !report_only {
        for (run, _) in ABLATION_RUNS {
            let mut cfg = base.clone();
            cfg.ablation = ablation_flags(run).expect("known run");
            train_run(cfg, t, &root.join(run), common.force)?;
        }
    }
    let rows = ablation_report(&root, &base.analysis)?;
    let text = format_report(&rows);
    print!("{text}");
    std::fs::write(root.join("ablation_report.txt"), &text)?;
    let missing: Vec<&str> = rows.iter().filter(|r| r.evaluation.is_none()).map(|r| r.run.as_str()).collect();
    if !missing.is_empty() {
        return Err(Incomplete(format!("missing runs: {}", missing.join(", "))).into());
    }
    Ok(())
}
