//! On-disk formats. All integers and floats are little-endian.
//!
//! Binary decoders check every header field against the bytes that remain
//! before allocating, and accept only canonical encodings, so for any input
//! they accept `encode(decode(bytes)) == bytes`.

mod json;
mod mpit;
mod occ;
mod wmap;

use std::fs;
use std::path::Path;

pub use json::{
    decode_index, decode_palette, decode_plan, decode_rig, encode_index, encode_palette, encode_plan, encode_rig,
    read_index, read_palette, read_plan, read_rig, write_index, write_palette, write_plan, write_rig, CameraEntry,
    RigFile,
};
pub use mpit::{decode_stack, encode_stack, read_stack, write_stack, StackSidecar, MPIT_MAGIC};
pub use occ::{decode_grid, encode_grid, read_grid, write_grid, OCC_MAGIC};
pub use wmap::{decode_weight_map, encode_weight_map, read_weight_map, write_weight_map, WMAP_MAGIC};

use crate::error::{FormatError, Result};

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    Ok(fs::read(path)?)
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    Ok(fs::write(path, bytes)?)
}

/// Widens a stored `f32` to the `f64` with the same shortest decimal form,
/// so a resolution written as `0.2` reads back as `0.2` rather than
/// `0.20000000298…`.
pub fn widen_f32(x: f32) -> f64 {
    match x.to_string().parse::<f64>() {
        Ok(y) if (y as f32).to_bits() == x.to_bits() => y,
        _ => x as f64,
    }
}

/// Sequential little-endian reader that reports which section ran short.
pub(crate) struct Cursor<'a> {
    format: &'static str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(format: &'static str, bytes: &'a [u8]) -> Self {
        Self { format, bytes, pos: 0 }
    }

    pub(crate) fn remaining(&self) -> u64 {
        (self.bytes.len() - self.pos) as u64
    }

    pub(crate) fn pos(&self) -> usize {
        self.pos
    }

    pub(crate) fn take(&mut self, n: u64, section: &'static str) -> Result<&'a [u8], FormatError> {
        if n > self.remaining() {
            return Err(FormatError::Truncated {
                format: self.format,
                section,
                needed: n,
                available: self.remaining(),
            });
        }
        let n = n as usize;
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub(crate) fn magic(&mut self, expected: &[u8]) -> Result<(), FormatError> {
        let avail = self.remaining().min(expected.len() as u64);
        let found = &self.bytes[self.pos..self.pos + avail as usize];
        if found != &expected[..avail as usize] {
            return Err(FormatError::MagicMismatch {
                format: self.format,
                expected: expected.to_vec(),
                found: found.to_vec(),
            });
        }
        self.take(expected.len() as u64, "magic")?;
        Ok(())
    }

    pub(crate) fn u32(&mut self, section: &'static str) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4, section)?.try_into().expect("4 bytes")))
    }

    pub(crate) fn f32(&mut self, section: &'static str) -> Result<f32, FormatError> {
        Ok(f32::from_le_bytes(self.take(4, section)?.try_into().expect("4 bytes")))
    }

    pub(crate) fn finish(self) -> Result<(), FormatError> {
        match self.remaining() {
            0 => Ok(()),
            count => Err(FormatError::TrailingBytes {
                format: self.format,
                count,
            }),
        }
    }
}

/// Reads `names.len()` u32 dims, rejecting zeros and products that overflow.
/// Returns the dims and their product.
pub(crate) fn read_dims(cur: &mut Cursor<'_>, names: &[&'static str]) -> Result<(Vec<u32>, u64), FormatError> {
    let mut dims = Vec::with_capacity(names.len());
    for _ in names {
        dims.push(cur.u32("header")?);
    }
    for (d, axis) in dims.iter().zip(names) {
        if *d == 0 {
            return Err(FormatError::ZeroDim {
                format: cur.format,
                axis,
            });
        }
    }
    let total = dims
        .iter()
        .try_fold(1u64, |acc, &d| acc.checked_mul(d as u64))
        .filter(|&t| usize::try_from(t).is_ok())
        .ok_or_else(|| FormatError::DimOverflow {
            format: cur.format,
            dims: dims.clone(),
        })?;
    Ok((dims, total))
}

pub(crate) fn json_err(format: &'static str, e: impl std::fmt::Display) -> FormatError {
    FormatError::Json {
        format,
        reason: e.to_string(),
    }
}

pub(crate) fn invalid(format: &'static str, field: &'static str, reason: impl std::fmt::Display) -> FormatError {
    FormatError::InvalidValue {
        format,
        field,
        reason: reason.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widen_keeps_short_decimals() {
        assert_eq!(widen_f32(0.2), 0.2);
        assert_eq!(widen_f32(-50.0), -50.0);
        assert_eq!(widen_f32(0.1), 0.1);
        for bits in [1u32, 0x3e4c_cccd, 0x7f7f_ffff, 0x8000_0000, 0x0080_0000] {
            let x = f32::from_bits(bits);
            assert_eq!((widen_f32(x) as f32).to_bits(), bits);
        }
    }

    #[test]
    fn dims_checks() {
        let mut b = Vec::new();
        for d in [2u32, 0, 3] {
            b.extend_from_slice(&d.to_le_bytes());
        }
        let err = read_dims(&mut Cursor::new("T", &b), &["x", "y", "z"]).unwrap_err();
        assert_eq!(err, FormatError::ZeroDim { format: "T", axis: "y" });
    }
}
