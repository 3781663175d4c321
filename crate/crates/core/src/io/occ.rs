//! `OCCV1` grid files: magic `OCCV1\0`, u32 nx, ny, nz, f32 origin x, y, z,
//! f32 resolution, then nx·ny·nz u8 labels in x-major order.

use std::path::Path;

use super::{invalid, read_bytes, read_dims, widen_f32, write_bytes, Cursor};
use crate::error::{FormatError, Result};
use crate::geometry::{GridSpec, OccupancyGrid};
use crate::label::SemanticLabel;

pub const OCC_MAGIC: &[u8; 6] = b"OCCV1\0";
const FORMAT: &str = "OCCV1";

/// Origin and resolution are stored as f32; values that are not exactly
/// representable are rounded on write.
pub fn encode_grid(grid: &OccupancyGrid) -> Vec<u8> {
    let spec = grid.spec();
    let mut out = Vec::with_capacity(6 + 28 + spec.voxel_count());
    out.extend_from_slice(OCC_MAGIC);
    for d in spec.dims() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for o in spec.origin() {
        out.extend_from_slice(&(o as f32).to_le_bytes());
    }
    out.extend_from_slice(&(spec.resolution() as f32).to_le_bytes());
    out.extend(grid.labels().iter().map(|l| l.id()));
    out
}

pub(crate) fn decode_labels(
    format: &'static str,
    bytes: &[u8],
    offset: usize,
) -> Result<Vec<SemanticLabel>, FormatError> {
    bytes
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            SemanticLabel::new(b).map_err(|_| FormatError::InvalidLabel {
                format,
                offset: (offset + i) as u64,
                value: b,
            })
        })
        .collect()
}

pub fn decode_grid(bytes: &[u8]) -> Result<OccupancyGrid, FormatError> {
    let mut cur = Cursor::new(FORMAT, bytes);
    cur.magic(OCC_MAGIC)?;
    let (dims, total) = read_dims(&mut cur, &["nx", "ny", "nz"])?;
    let mut origin = [0.0; 3];
    for o in &mut origin {
        *o = widen_f32(cur.f32("header")?);
    }
    let res = widen_f32(cur.f32("header")?);
    let offset = cur.pos();
    let raw = cur.take(total, "labels")?;
    cur.finish()?;
    let spec = GridSpec::new([dims[0] as usize, dims[1] as usize, dims[2] as usize], origin, res)
        .map_err(|e| invalid(FORMAT, "grid spec", e))?;
    let labels = decode_labels(FORMAT, raw, offset)?;
    Ok(OccupancyGrid::from_labels(spec, labels).expect("length checked"))
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<OccupancyGrid> {
    Ok(decode_grid(&read_bytes(path.as_ref())?)?)
}

pub fn write_grid(path: impl AsRef<Path>, grid: &OccupancyGrid) -> Result<()> {
    write_bytes(path.as_ref(), &encode_grid(grid))
}
