//! `WMAP` weight maps: 16-byte header (magic `WMAP`, u32 H, u32 W, f32 step
//! fraction) followed by H·W f32 weights, row-major.

use std::path::Path;

use super::{invalid, read_bytes, read_dims, write_bytes, Cursor};
use crate::error::{FormatError, Result};
use crate::pixmap::PixelMap;
use crate::reweigh::WeightMap;

pub const WMAP_MAGIC: &[u8; 4] = b"WMAP";
const FORMAT: &str = "WMAP";

pub fn encode_weight_map(map: &WeightMap) -> Vec<u8> {
    let values = map.values();
    let mut out = Vec::with_capacity(16 + 4 * values.data().len());
    out.extend_from_slice(WMAP_MAGIC);
    out.extend_from_slice(&(map.height() as u32).to_le_bytes());
    out.extend_from_slice(&(map.width() as u32).to_le_bytes());
    out.extend_from_slice(&map.step_fraction().to_le_bytes());
    for v in values.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_weight_map(bytes: &[u8]) -> Result<WeightMap, FormatError> {
    let mut cur = Cursor::new(FORMAT, bytes);
    cur.magic(WMAP_MAGIC)?;
    let (dims, total) = read_dims(&mut cur, &["H", "W"])?;
    let step = cur.f32("header")?;
    let needed = total.checked_mul(4).ok_or_else(|| FormatError::DimOverflow {
        format: FORMAT,
        dims: dims.clone(),
    })?;
    let raw = cur.take(needed, "weights")?;
    cur.finish()?;
    if !(0.0..=1.0).contains(&step) {
        return Err(invalid(FORMAT, "step fraction", format!("{step} is outside [0, 1]")));
    }
    let values: Vec<f32> = raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    let map = PixelMap::from_vec(dims[0] as usize, dims[1] as usize, values).expect("length checked");
    WeightMap::new(step, map).map_err(|e| invalid(FORMAT, "weights", e))
}

pub fn read_weight_map(path: impl AsRef<Path>) -> Result<WeightMap> {
    Ok(decode_weight_map(&read_bytes(path.as_ref())?)?)
}

pub fn write_weight_map(path: impl AsRef<Path>, map: &WeightMap) -> Result<()> {
    write_bytes(path.as_ref(), &encode_weight_map(map))
}
