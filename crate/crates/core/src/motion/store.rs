//! On-disk clip store.
//!
//! One binary file per clip plus a `manifest.json`. All integers and floats are
//! little-endian. A clip file is laid out as:
//!
//! ```text
//! magic        8 bytes   b"CAMPCLIP"
//! version      u32       1
//! label        u32       skill label
//! name_len     u16       followed by name_len bytes of UTF-8 (e.g. "trot_2Hz")
//! dt           f64       seconds per frame
//! frame_count  u32
//! field_count  u16       followed by field_count entries of
//!                          name_len u8, name bytes (UTF-8), width u16
//! frames       frame_count records of sum(width) f64 values, fields in header order
//! ```
//!
//! Version 1 always writes the fields listed in [`CLIP_FIELDS`].

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::clip::{MotionClip, MotionFrame};
use super::gait::SkillDef;
use crate::error::{CampError, Result};

const MAGIC: &[u8; 8] = b"CAMPCLIP";
const VERSION: u32 = 1;

/// Field order and widths of a frame record.
pub const CLIP_FIELDS: [(&str, usize); 6] = [
    ("body_position", 3),
    ("body_orientation_wxyz", 4),
    ("joint_positions", 12),
    ("joint_velocities", 12),
    ("foot_positions", 12),
    ("foot_velocities", 12),
];

const FRAME_WIDTH: usize = 55;

fn frame_record(f: &MotionFrame) -> [f64; FRAME_WIDTH] {
    let mut r = [0.0; FRAME_WIDTH];
    r[0..3].copy_from_slice(&f.body_position);
    r[3..7].copy_from_slice(&f.body_orientation);
    r[7..19].copy_from_slice(&f.joint_positions);
    r[19..31].copy_from_slice(&f.joint_velocities);
    for i in 0..4 {
        r[31 + 3 * i..34 + 3 * i].copy_from_slice(&f.foot_positions[i]);
        r[43 + 3 * i..46 + 3 * i].copy_from_slice(&f.foot_velocities[i]);
    }
    r
}

fn frame_from_record(r: &[f64]) -> MotionFrame {
    let mut f = MotionFrame {
        body_position: [r[0], r[1], r[2]],
        body_orientation: [r[3], r[4], r[5], r[6]],
        joint_positions: [0.0; 12],
        joint_velocities: [0.0; 12],
        foot_positions: [[0.0; 3]; 4],
        foot_velocities: [[0.0; 3]; 4],
    };
    f.joint_positions.copy_from_slice(&r[7..19]);
    f.joint_velocities.copy_from_slice(&r[19..31]);
    for i in 0..4 {
        f.foot_positions[i].copy_from_slice(&r[31 + 3 * i..34 + 3 * i]);
        f.foot_velocities[i].copy_from_slice(&r[43 + 3 * i..46 + 3 * i]);
    }
    f
}

pub fn encode_clip(clip: &MotionClip) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + clip.frames.len() * FRAME_WIDTH * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(clip.label as u32).to_le_bytes());
    out.extend_from_slice(&(clip.name.len() as u16).to_le_bytes());
    out.extend_from_slice(clip.name.as_bytes());
    out.extend_from_slice(&clip.dt.to_le_bytes());
    out.extend_from_slice(&(clip.frames.len() as u32).to_le_bytes());
    out.extend_from_slice(&(CLIP_FIELDS.len() as u16).to_le_bytes());
    for (name, width) in CLIP_FIELDS {
        out.push(name.len() as u8);
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(width as u16).to_le_bytes());
    }
    for f in &clip.frames {
        for v in frame_record(f) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(CampError::Data("truncated clip file".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn string(&mut self, n: usize) -> Result<String> {
        String::from_utf8(self.take(n)?.to_vec()).map_err(|e| CampError::Data(e.to_string()))
    }
}

pub fn decode_clip(bytes: &[u8]) -> Result<MotionClip> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(8)? != MAGIC {
        return Err(CampError::Data("not a clip file (bad magic)".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(CampError::Data(format!("unsupported clip version {version}")));
    }
    let label = c.u32()? as usize;
    let name_len = c.u16()? as usize;
    let name = c.string(name_len)?;
    let dt = c.f64()?;
    let frame_count = c.u32()? as usize;
    let field_count = c.u16()? as usize;
    let mut fields = Vec::with_capacity(field_count);
    for _ in 0..field_count {
        let n = c.u8()? as usize;
        let fname = c.string(n)?;
        let width = c.u16()? as usize;
        fields.push((fname, width));
    }
    let expected: Vec<(String, usize)> = CLIP_FIELDS.iter().map(|(n, w)| (n.to_string(), *w)).collect();
    if fields != expected {
        return Err(CampError::Data(format!("unexpected clip field layout {fields:?}")));
    }
    let mut frames = Vec::with_capacity(frame_count);
    let mut record = [0.0; FRAME_WIDTH];
    for _ in 0..frame_count {
        for v in record.iter_mut() {
            *v = c.f64()?;
        }
        frames.push(frame_from_record(&record));
    }
    if c.pos != bytes.len() {
        return Err(CampError::Data("trailing bytes after clip frames".into()));
    }
    Ok(MotionClip {
        label,
        name,
        dt,
        frames,
    })
}

pub fn write_clip(path: &Path, clip: &MotionClip) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| CampError::io(path, e))?;
    file.write_all(&encode_clip(clip)).map_err(|e| CampError::io(path, e))
}

pub fn read_clip(path: &Path) -> Result<MotionClip> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| CampError::io(path, e))?;
    decode_clip(&bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClipStoreManifest {
    pub format_version: u32,
    pub seed: u64,
    pub dt: f64,
    pub duration: f64,
    pub skills: Vec<SkillDef>,
    pub files: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Write clips and manifest into `dir`. Existing stores are only replaced when `force` is set.
pub fn write_store(dir: &Path, manifest: &ClipStoreManifest, clips: &[MotionClip], force: bool) -> Result<()> {
    let manifest_path = dir.join(MANIFEST_FILE);
    if manifest_path.exists() && !force {
        return Err(CampError::OutputExists(dir.to_path_buf()));
    }
    fs::create_dir_all(dir).map_err(|e| CampError::io(dir, e))?;
    for (clip, file) in clips.iter().zip(&manifest.files) {
        write_clip(&dir.join(file), clip)?;
    }
    let json = serde_json::to_string_pretty(manifest)?;
    fs::write(&manifest_path, json + "\n").map_err(|e| CampError::io(&manifest_path, e))
}

pub fn read_store(dir: &Path) -> Result<(ClipStoreManifest, Vec<MotionClip>)> {
    let manifest_path: PathBuf = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest_path).map_err(|e| CampError::io(&manifest_path, e))?;
    let manifest: ClipStoreManifest = serde_json::from_str(&text)?;
    if manifest.format_version != VERSION {
        return Err(CampError::Data(format!(
            "unsupported clip store version {}",
            manifest.format_version
        )));
    }
    let clips = manifest
        .files
        .iter()
        .map(|f| read_clip(&dir.join(f)))
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, clips))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::{generate_clip, skill_catalog, GaitKind};

    #[test]
    fn clip_round_trips_through_bytes() {
        let skill = &skill_catalog(&[GaitKind::Bound], &[4.0]).unwrap()[0];
        let clip = generate_clip(skill, 1.0, 0.02).unwrap();
        let bytes = encode_clip(&clip);
        assert_eq!(&bytes[..8], b"CAMPCLIP");
        assert_eq!(decode_clip(&bytes).unwrap(), clip);
        assert!(decode_clip(&bytes[..bytes.len() - 3]).is_err());
    }

    #[test]
    fn header_layout_is_stable() {
        let skill = &skill_catalog(&[GaitKind::Trot], &[2.0]).unwrap()[0];
        let clip = generate_clip(skill, 0.5, 0.02).unwrap();
        let bytes = encode_clip(&clip);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 0);
        assert_eq!(u16::from_le_bytes(bytes[16..18].try_into().unwrap()), 8);
        assert_eq!(&bytes[18..26], b"trot_2Hz");
        assert_eq!(f64::from_le_bytes(bytes[26..34].try_into().unwrap()), 0.02);
        assert_eq!(u32::from_le_bytes(bytes[34..38].try_into().unwrap()), 26);
        let header: usize = 38 + 2 + CLIP_FIELDS.iter().map(|(n, _)| 1 + n.len() + 2).sum::<usize>();
        assert_eq!(bytes.len(), header + 26 * FRAME_WIDTH * 8);
    }
}
