//! Multi-gait and skill-switch evaluation of trained runs.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::{AblationFlags, AnalysisConfig, ScheduleEntry, SkillSchedule};
use crate::error::Result;
use crate::motion::SkillDef;
use crate::ppo::{evaluate_schedule, TrainedModel};
use crate::sim::TraceRow;

use super::contacts::{contact_metrics, phase_signature_distance};

/// The five compared configurations, in report order.
pub const ABLATION_RUNS: [(&str, &str); 5] = [
    ("full", "Ours"),
    ("no_skill_obs", "Ours w/o g_t"),
    ("no_conditioning", "Ours w/o z_p"),
    ("no_skill_reward", "Ours w/o r_skill"),
    ("baseline", "Baseline (AMP)"),
];

pub fn ablation_flags(run: &str) -> Option<AblationFlags> {
    let none = AblationFlags::default();
    Some(match run {
        "full" => none,
        "no_skill_obs" => AblationFlags { no_skill_obs: true, ..none },
        "no_conditioning" => AblationFlags { no_conditioning: true, ..none },
        "no_skill_reward" => AblationFlags { no_skill_reward: true, ..none },
        "baseline" => AblationFlags::baseline(),
        _ => return None,
    })
}

/// Stance-phase signature of a trace segment `[from, to)` in seconds, or `None`
/// when some leg never lands or the episode ended early.
pub fn trace_signature(rows: &[TraceRow], dt: f64, from: f64, to: f64) -> Option<[f64; 4]> {
    let seg: Vec<[bool; 4]> = rows
        .iter()
        .filter(|r| r.time > from + 1e-9 && r.time <= to + 1e-9)
        .map(|r| r.contacts)
        .collect();
    let expected = ((to - from) / dt).round() as usize;
    if seg.len() + 1 < expected {
        return None;
    }
    contact_metrics(&seg, dt, None).ok().map(|m| m.phase_offsets)
}

/// Largest pairwise signature distance; `None` with fewer than two signatures.
pub fn max_pairwise_distance(signatures: &[Option<[f64; 4]>]) -> Option<f64> {
    let s: Vec<&[f64; 4]> = signatures.iter().flatten().collect();
    if s.len() < 2 {
        return None;
    }
    let mut best = 0.0f64;
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            best = best.max(phase_signature_distance(s[i], s[j]));
        }
    }
    Some(best)
}

/// Switch succeeds when the window signature lies within `tolerance` of the new
/// skill's signature and closer to it than to the old one.
pub fn switch_succeeded(window: Option<[f64; 4]>, old: &[f64; 4], new: &[f64; 4], tolerance: f64) -> bool {
    match window {
        Some(w) => {
            let d_new = phase_signature_distance(&w, new);
            d_new <= tolerance && d_new < phase_signature_distance(&w, old)
        }
        None => false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunEvaluation {
    /// Steady-state signature of each commanded skill (second half of the rollout).
    pub signatures: Vec<Option<[f64; 4]>>,
    pub max_pairwise: Option<f64>,
    pub multi_gait: bool,
    pub switches_attempted: usize,
    pub switches_succeeded: usize,
}

impl RunEvaluation {
    /// At least half of the attempted switches succeed.
    pub fn switch_ok(&self) -> bool {
        self.switches_attempted > 0 && 2 * self.switches_succeeded >= self.switches_attempted
    }
}

fn constant_rollout(model: &TrainedModel, skill: usize, duration: f64) -> Result<Vec<TraceRow>> {
    evaluate_schedule(&model.simulator()?, &model.policy, model.hide_skill(), &model.skills, &SkillSchedule::constant(skill), duration)
}

/// Commanded-skill signatures: one rollout per skill, measured over its second half.
pub fn skill_signatures(model: &TrainedModel, duration: f64) -> Result<Vec<Option<[f64; 4]>>> {
    let dt = model.config.env.dt;
    (0..model.skills.len())
        .map(|k| Ok(trace_signature(&constant_rollout(model, k, duration)?, dt, 0.5 * duration, duration)))
        .collect()
}

/// Switch schedules between every ordered pair of skills with distinct expert
/// signatures: old skill for half the rollout, then the new one.
pub fn evaluate_run(model: &TrainedModel, analysis: &AnalysisConfig) -> Result<RunEvaluation> {
    let duration = analysis.eval_duration;
    let dt = model.config.env.dt;
    let signatures = skill_signatures(model, duration)?;
    let max_pairwise = max_pairwise_distance(&signatures);
    let multi_gait = max_pairwise.is_some_and(|d| d > analysis.multi_gait_threshold);
    let skills: &[SkillDef] = &model.skills;
    let sim = model.simulator()?;
    let switch_time = 0.5 * duration;
    let (mut attempted, mut succeeded) = (0, 0);
    for a in skills {
        for b in skills {
            let (old, new) = (&a.spec.phase_offsets, &b.spec.phase_offsets);
            if phase_signature_distance(old, new) <= analysis.switch_tolerance {
                continue;
            }
            let schedule = SkillSchedule {
                entries: vec![
                    ScheduleEntry { time: 0.0, skill: a.label, velocity: None },
                    ScheduleEntry { time: switch_time, skill: b.label, velocity: None },
                ],
            };
            let rows = evaluate_schedule(&sim, &model.policy, model.hide_skill(), skills, &schedule, duration)?;
            let [w0, w1] = analysis.switch_window;
            let window = trace_signature(&rows, dt, switch_time + w0, switch_time + w1);
            attempted += 1;
            if switch_succeeded(window, old, new, analysis.switch_tolerance) {
                succeeded += 1;
            }
        }
    }
    Ok(RunEvaluation {
        signatures,
        max_pairwise,
        multi_gait,
        switches_attempted: attempted,
        switches_succeeded: succeeded,
    })
}

/// One report row; `evaluation` is `None` for a missing run.
#[derive(Debug, Clone)]
pub struct AblationRow {
    pub run: String,
    pub label: String,
    pub evaluation: Option<RunEvaluation>,
}

/// Evaluate every standard run found under `root/<run>`.
pub fn ablation_report(root: &Path, analysis: &AnalysisConfig) -> Result<Vec<AblationRow>> {
    ABLATION_RUNS
        .iter()
        .map(|(run, label)| {
            let dir = root.join(run);
            let evaluation = match TrainedModel::load(&dir) {
                Ok(m) => Some(evaluate_run(&m, analysis)?),
                Err(e) => {
                    log::warn!("run {run}: {e}");
                    None
                }
            };
            Ok(AblationRow {
                run: run.to_string(),
                label: label.to_string(),
                evaluation,
            })
        })
        .collect()
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "Yes"
    } else {
        "No"
    }
}

/// Plain-text table with one row per configuration.
pub fn format_report(rows: &[AblationRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<20} {:<11} {:<13} {:>12} {:>10}", "method", "multi-gait", "skill-switch", "max-sig-dist", "switches");
    for r in rows {
        match &r.evaluation {
            Some(e) => {
                let d = e.max_pairwise.map_or("-".to_string(), |d| format!("{d:.3}"));
                let _ = writeln!(
                    out,
                    "{:<20} {:<11} {:<13} {:>12} {:>10}",
                    r.label,
                    yes_no(e.multi_gait),
                    yes_no(e.switch_ok()),
                    d,
                    format!("{}/{}", e.switches_succeeded, e.switches_attempted)
                );
            }
            None => {
                let _ = writeln!(out, "{:<20} {:<11} {:<13} {:>12} {:>10}", r.label, "missing", "missing", "-", "-");
            }
        }
    }
    out
}
