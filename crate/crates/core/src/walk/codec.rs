use std::fmt;
use std::str::FromStr;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;

use super::{check_dim, Direction, LatticePath};
use crate::error::{Error, Result};

/// Compact step storage: 2 bits per step in the plane, one byte per step
/// otherwise.
///
/// The text form is one record `"<dim> <len> <base64>"`, the unit of the
/// newline-delimited path files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackedSteps {
    dim: usize,
    len: usize,
    bytes: Vec<u8>,
}

impl PackedSteps {
    pub fn pack(path: &LatticePath) -> Self {
        let dim = path.dim();
        let len = path.len();
        let bytes = if dim == 2 {
            let mut bytes = vec![0u8; len.div_ceil(4)];
            for (k, s) in path.steps().iter().enumerate() {
                bytes[k / 4] |= (s.index() as u8) << (2 * (k % 4));
            }
            bytes
        } else {
            path.steps().iter().map(|s| s.index() as u8).collect()
        };
        Self { dim, len, bytes }
    }

    pub fn unpack(&self) -> Result<LatticePath> {
        let steps = (0..self.len)
            .map(|k| {
                let idx = if self.dim == 2 {
                    (self.bytes[k / 4] >> (2 * (k % 4))) & 0b11
                } else {
                    self.bytes[k]
                };
                Direction::from_index(idx as usize, self.dim)
            })
            .collect::<Result<Vec<_>>>()?;
        LatticePath::new(self.dim, steps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn byte_len(&self) -> usize {
        self.bytes.len()
    }
}

impl fmt::Display for PackedSteps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.dim, self.len, STANDARD.encode(&self.bytes))
    }
}

impl FromStr for PackedSteps {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("path record: {what}"));
        let mut fields = s.split_ascii_whitespace();
        let dim: usize = fields.next().ok_or_else(|| bad("missing dimension"))?.parse().map_err(|_| bad("dimension"))?;
        let len: usize = fields.next().ok_or_else(|| bad("missing length"))?.parse().map_err(|_| bad("length"))?;
        let bytes = match fields.next() {
            Some(b) => STANDARD.decode(b).map_err(|_| bad("base64 payload"))?,
            None => Vec::new(),
        };
        if fields.next().is_some() {
            return Err(bad("trailing fields"));
        }
        check_dim(dim)?;
        let expected = if dim == 2 { len.div_ceil(4) } else { len };
        if bytes.len() != expected {
            return Err(bad("payload length does not match step count"));
        }
        let packed = Self { dim, len, bytes };
        // validates every direction index
        packed.unpack()?;
        Ok(packed)
    }
}
