//! Rollout trace CSV.
//!
//! Columns: `time, skill, cmd_vx, cmd_vy, cmd_wz, base_x, base_y, base_z, vx, vy, wz`,
//! `target_0..target_11`, `joint_0..joint_11`, `contact_FL, contact_FR, contact_RL, contact_RR`.
//! Joint order is (abduction, hip, knee) for FL, FR, RL, RR.

use std::path::Path;

use crate::error::{CampError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub time: f64,
    pub skill: usize,
    pub command: [f64; 3],
    pub base_position: [f64; 3],
    /// Body-frame forward, lateral and yaw velocity.
    pub base_velocity: [f64; 3],
    pub joint_targets: [f64; 12],
    pub joint_positions: [f64; 12],
    pub contacts: [bool; 4],
}

fn header() -> Vec<String> {
    let mut h: Vec<String> = ["time", "skill", "cmd_vx", "cmd_vy", "cmd_wz", "base_x", "base_y", "base_z", "vx", "vy", "wz"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend((0..12).map(|j| format!("target_{j}")));
    h.extend((0..12).map(|j| format!("joint_{j}")));
    h.extend(["FL", "FR", "RL", "RR"].iter().map(|l| format!("contact_{l}")));
    h
}

const WIDTH: usize = 11 + 24 + 4;

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header())?;
    for r in rows {
        let mut rec = Vec::with_capacity(WIDTH);
        rec.push(format!("{}", r.time));
        rec.push(r.skill.to_string());
        for v in r.command.iter().chain(&r.base_position).chain(&r.base_velocity).chain(&r.joint_targets).chain(&r.joint_positions) {
            rec.push(format!("{v}"));
        }
        rec.extend(r.contacts.iter().map(|&c| if c { "1" } else { "0" }.to_string()));
        w.write_record(rec)?;
    }
    w.flush().map_err(|e| CampError::io(path, e))?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let h = r.headers()?.clone();
    if h.iter().collect::<Vec<_>>() != header() {
        return Err(CampError::Data(format!("{}: unexpected trace header", path.display())));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let v: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| CampError::Data(format!("{}: {e}", path.display())))?;
        if v.len() != WIDTH {
            return Err(CampError::Data(format!("{}: short trace row", path.display())));
        }
        let arr3 = |o: usize| [v[o], v[o + 1], v[o + 2]];
        rows.push(TraceRow {
            time: v[0],
            skill: v[1] as usize,
            command: arr3(2),
            base_position: arr3(5),
            base_velocity: arr3(8),
            joint_targets: std::array::from_fn(|j| v[11 + j]),
            joint_positions: std::array::from_fn(|j| v[23 + j]),
            contacts: std::array::from_fn(|i| v[35 + i] != 0.0),
        });
    }
    Ok(rows)
}
