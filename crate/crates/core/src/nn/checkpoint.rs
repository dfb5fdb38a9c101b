//! Binary container for network and optimizer state.
//!
//! Layout (little-endian):
//!
//! | field       | encoding                               |
//! |-------------|----------------------------------------|
//! | magic       | `b"CAMPCKPT"`                          |
//! | version     | `u32`                                  |
//! | kind        | `u16` length + UTF-8                   |
//! | activation  | `u16` length + UTF-8                   |
//! | sizes       | `u32` count + `u64` each               |
//! | arrays      | `u32` count, then per array: `u16` name length + UTF-8, `u64` count, `f64` values |

use std::path::Path;

use crate::error::{CampError, Result};

use super::{Activation, Mlp, MlpSpec};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"CAMPCKPT";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub kind: String,
    pub activation: String,
    pub sizes: Vec<usize>,
    pub arrays: Vec<(String, Vec<f64>)>,
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u16).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(CampError::Data("checkpoint truncated".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u16()? as usize;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| CampError::Data("checkpoint string is not UTF-8".into()))
    }
}

impl Checkpoint {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        put_str(&mut out, &self.kind);
        put_str(&mut out, &self.activation);
        out.extend_from_slice(&(self.sizes.len() as u32).to_le_bytes());
        for &s in &self.sizes {
            out.extend_from_slice(&(s as u64).to_le_bytes());
        }
        out.extend_from_slice(&(self.arrays.len() as u32).to_le_bytes());
        for (name, values) in &self.arrays {
            put_str(&mut out, name);
            out.extend_from_slice(&(values.len() as u64).to_le_bytes());
            for v in values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(CampError::Data("not a checkpoint file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(CampError::Data(format!("unsupported checkpoint version {version}")));
        }
        let kind = r.string()?;
        let activation = r.string()?;
        let n_sizes = r.u32()? as usize;
        let sizes = (0..n_sizes).map(|_| r.u64().map(|v| v as usize)).collect::<Result<_>>()?;
        let n_arrays = r.u32()? as usize;
        let mut arrays = Vec::with_capacity(n_arrays);
        for _ in 0..n_arrays {
            let name = r.string()?;
            let count = r.u64()? as usize;
            let raw = r.take(count.checked_mul(8).ok_or_else(|| CampError::Data("checkpoint array too large".into()))?)?;
            let values = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            arrays.push((name, values));
        }
        if r.pos != bytes.len() {
            return Err(CampError::Data("trailing bytes after checkpoint".into()));
        }
        Ok(Self {
            kind,
            activation,
            sizes,
            arrays,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode()).map_err(|e| CampError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| CampError::io(path, e))?;
        Self::decode(&bytes)
    }

    pub fn expect_kind(&self, kind: &str) -> Result<()> {
        if self.kind != kind {
            return Err(CampError::Data(format!(
                "expected a '{kind}' checkpoint, found '{}'",
                self.kind
            )));
        }
        Ok(())
    }

    pub fn array(&self, name: &str) -> Result<&[f64]> {
        self.arrays
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| CampError::Data(format!("checkpoint has no array '{name}'")))
    }
}

impl Mlp {
    pub fn to_checkpoint(&self, kind: &str) -> Checkpoint {
        Checkpoint {
            kind: kind.into(),
            activation: self.spec().activation.tag().into(),
            sizes: self.spec().layer_sizes.clone(),
            arrays: vec![("params".into(), self.params().to_vec())],
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint, kind: &str) -> Result<Self> {
        ck.expect_kind(kind)?;
        let spec = MlpSpec::from_sizes(ck.sizes.clone(), Activation::from_tag(&ck.activation)?)?;
        Mlp::from_params(spec, ck.array("params")?.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn mlp_round_trip_is_bit_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let net = Mlp::orthogonal(MlpSpec::new(5, &[4, 4], 2, Activation::Elu).unwrap(), 1.3, 0.01, &mut rng);
        let bytes = net.to_checkpoint("policy").encode();
        let back = Mlp::from_checkpoint(&Checkpoint::decode(&bytes).unwrap(), "policy").unwrap();
        assert_eq!(back, net);
        assert!(Mlp::from_checkpoint(&Checkpoint::decode(&bytes).unwrap(), "critic").is_err());
    }

    #[test]
    fn header_layout() {
        let ck = Checkpoint {
            kind: "k".into(),
            activation: "elu".into(),
            sizes: vec![2],
            arrays: vec![("a".into(), vec![1.5])],
        };
        let b = ck.encode();
        assert_eq!(&b[..8], b"CAMPCKPT");
        assert_eq!(&b[8..12], &1u32.to_le_bytes());
        assert_eq!(&b[12..14], &1u16.to_le_bytes());
        assert_eq!(b[14], b'k');
        assert_eq!(b.len(), 8 + 4 + 3 + 5 + 4 + 8 + 4 + 3 + 8 + 8);
        assert_eq!(&b[b.len() - 8..], &1.5f64.to_le_bytes());
    }

    #[test]
    fn corrupt_input_rejected() {
        assert!(Checkpoint::decode(b"NOTACKPT").is_err());
        let mut b = Checkpoint {
            kind: "k".into(),
            activation: String::new(),
            sizes: vec![],
            arrays: vec![("a".into(), vec![1.0, 2.0])],
        }
        .encode();
        b.pop();
        assert!(Checkpoint::decode(&b).is_err());
    }
}
