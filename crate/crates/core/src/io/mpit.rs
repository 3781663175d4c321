//! `MPIT` stacks: magic `MPIT\0`, u32 N, D, H, W, f32 d_min, d_max, then
//! N·D·H·W u8 labels (view, plane, row, column), then a u32 byte length and
//! a compact JSON sidecar with the rig, grid spec, exact depth range and the
//! pixel and plane conventions.
//!
//! The header floats are for consumers that skip the sidecar; the reader
//! takes the exact values from the sidecar and requires the header to be
//! their f32 rounding.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::json::RigFile;
use super::occ::decode_labels;
use super::{invalid, json_err, read_bytes, read_dims, write_bytes, Cursor};
use crate::error::{FormatError, Result};
use crate::geometry::{GridSpec, PIXEL_CONVENTION};
use crate::mpi::{MpiConfig, MpiStack, PLANE_INDEXING};

pub const MPIT_MAGIC: &[u8; 5] = b"MPIT\0";
const FORMAT: &str = "MPIT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpecEntry {
    pub dims: [usize; 3],
    pub origin: [f64; 3],
    pub resolution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackSidecar {
    pub rig: RigFile,
    pub grid: GridSpecEntry,
    pub d_min: f64,
    pub d_max: f64,
    pub pixel_convention: String,
    pub plane_indexing: String,
}

impl StackSidecar {
    pub fn of(stack: &MpiStack) -> Self {
        let g = stack.grid_spec();
        Self {
            rig: RigFile::from_rig(stack.rig()),
            grid: GridSpecEntry {
                dims: g.dims(),
                origin: g.origin(),
                resolution: g.resolution(),
            },
            d_min: stack.config().d_min(),
            d_max: stack.config().d_max(),
            pixel_convention: PIXEL_CONVENTION.to_owned(),
            plane_indexing: PLANE_INDEXING.to_owned(),
        }
    }
}

pub fn encode_stack(stack: &MpiStack) -> Vec<u8> {
    let sidecar = serde_json::to_vec(&StackSidecar::of(stack)).expect("serializable");
    let c = stack.config();
    let mut out = Vec::with_capacity(29 + stack.labels().len() + 4 + sidecar.len());
    out.extend_from_slice(MPIT_MAGIC);
    for d in stack.shape() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&(c.d_min() as f32).to_le_bytes());
    out.extend_from_slice(&(c.d_max() as f32).to_le_bytes());
    out.extend(stack.labels().iter().map(|l| l.id()));
    out.extend_from_slice(&(sidecar.len() as u32).to_le_bytes());
    out.extend_from_slice(&sidecar);
    out
}

pub fn decode_stack(bytes: &[u8]) -> Result<MpiStack, FormatError> {
    let mut cur = Cursor::new(FORMAT, bytes);
    cur.magic(MPIT_MAGIC)?;
    let (dims, total) = read_dims(&mut cur, &["N", "D", "H", "W"])?;
    let d_min32 = cur.f32("header")?;
    let d_max32 = cur.f32("header")?;
    let offset = cur.pos();
    let raw = cur.take(total, "labels")?;
    let side_len = cur.u32("sidecar length")?;
    let side_raw = cur.take(side_len as u64, "sidecar")?;
    cur.finish()?;

    let sidecar: StackSidecar = serde_json::from_slice(side_raw).map_err(|e| json_err(FORMAT, e))?;
    if serde_json::to_vec(&sidecar).expect("serializable") != side_raw {
        return Err(invalid(FORMAT, "sidecar", "JSON is not in canonical compact form"));
    }
    if (sidecar.d_min as f32).to_bits() != d_min32.to_bits() || (sidecar.d_max as f32).to_bits() != d_max32.to_bits() {
        return Err(invalid(
            FORMAT,
            "depth range",
            format!(
                "header {d_min32}..{d_max32} disagrees with sidecar {}..{}",
                sidecar.d_min, sidecar.d_max
            ),
        ));
    }
    if sidecar.pixel_convention != PIXEL_CONVENTION || sidecar.plane_indexing != PLANE_INDEXING {
        return Err(invalid(
            FORMAT,
            "conventions",
            "unsupported pixel convention or plane indexing",
        ));
    }
    let rig = sidecar.rig.to_rig(FORMAT)?;
    if rig.len() != dims[0] as usize {
        return Err(invalid(
            FORMAT,
            "rig",
            format!(
                "header has {} views but the sidecar rig has {} cameras",
                dims[0],
                rig.len()
            ),
        ));
    }
    let g = &sidecar.grid;
    let grid = GridSpec::new(g.dims, g.origin, g.resolution).map_err(|e| invalid(FORMAT, "grid spec", e))?;
    let config = MpiConfig::new(
        dims[1] as usize,
        sidecar.d_min,
        sidecar.d_max,
        dims[2] as usize,
        dims[3] as usize,
    )
    .map_err(|e| invalid(FORMAT, "depth range", e))?;
    let labels = decode_labels(FORMAT, raw, offset)?;
    Ok(MpiStack::from_parts(config, rig, grid, labels).expect("length checked"))
}

pub fn read_stack(path: impl AsRef<Path>) -> Result<MpiStack> {
    Ok(decode_stack(&read_bytes(path.as_ref())?)?)
}

pub fn write_stack(path: impl AsRef<Path>, stack: &MpiStack) -> Result<()> {
    write_bytes(path.as_ref(), &encode_stack(stack))
}
