//! Declarative voxel-space editing.
//!
//! A script is an ordered list of region operations. Region membership is
//! decided by voxel centers: a voxel is affected when its center lies inside
//! the region (bounds inclusive). Voxels outside the grid are skipped.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GridSpec, OccupancyGrid};
use crate::label::SemanticLabel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EditOp {
    FillBox {
        min: [f64; 3],
        max: [f64; 3],
        class: u32,
    },
    /// Vertical cylinder; only the x and y of `center` are used.
    FillCylinder {
        center: [f64; 3],
        radius: f64,
        z_min: f64,
        z_max: f64,
        class: u32,
    },
    EraseRegion {
        min: [f64; 3],
        max: [f64; 3],
    },
    Repaint {
        min: [f64; 3],
        max: [f64; 3],
        from_class: u32,
        to_class: u32,
    },
    /// Copies the source box by `offset`, rounded to whole voxels.
    CopyTranslate {
        src_min: [f64; 3],
        src_max: [f64; 3],
        offset: [f64; 3],
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EditScript {
    pub ops: Vec<EditOp>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub op_index: usize,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "op {} `{}`: {}", self.op_index, self.field, self.message)
    }
}

const AXES: [&str; 3] = ["x", "y", "z"];

struct Checker {
    op_index: usize,
    diags: Vec<Diagnostic>,
}

impl Checker {
    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            op_index: self.op_index,
            field: field.into(),
            message: message.into(),
        });
    }

    fn finite(&mut self, field: &str, values: &[f64]) {
        if values.iter().any(|v| !v.is_finite()) {
            self.push(field, "values must be finite");
        }
    }

    fn region(&mut self, min_name: &str, max_name: &str, min: &[f64; 3], max: &[f64; 3]) {
        self.finite(min_name, min);
        self.finite(max_name, max);
        for a in 0..3 {
            if min[a] > max[a] {
                self.push(
                    format!("{min_name}.{}", AXES[a]),
                    format!(
                        "{min_name}.{0} = {1} exceeds {max_name}.{0} = {2}",
                        AXES[a], min[a], max[a]
                    ),
                );
            }
        }
    }

    fn class(&mut self, field: &str, class: u32) {
        let ok = u8::try_from(class).map(SemanticLabel::is_valid_id).unwrap_or(false);
        if !ok {
            self.push(field, format!("unknown class id {class}"));
        }
    }
}

/// Every problem in the script; empty means valid.
pub fn validate_script(script: &EditScript) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for (op_index, op) in script.ops.iter().enumerate() {
        let mut c = Checker {
            op_index,
            diags: Vec::new(),
        };
        match op {
            EditOp::FillBox { min, max, class } => {
                c.region("min", "max", min, max);
                c.class("class", *class);
            }
            EditOp::FillCylinder {
                center,
                radius,
                z_min,
                z_max,
                class,
            } => {
                c.finite("center", center);
                c.finite("z_min", &[*z_min]);
                c.finite("z_max", &[*z_max]);
                if !(radius.is_finite() && *radius > 0.0) {
                    c.push("radius", format!("radius must be positive, got {radius}"));
                }
                if z_min > z_max {
                    c.push("z_min", format!("z_min = {z_min} exceeds z_max = {z_max}"));
                }
                c.class("class", *class);
            }
            EditOp::EraseRegion { min, max } => c.region("min", "max", min, max),
            EditOp::Repaint {
                min,
                max,
                from_class,
                to_class,
            } => {
                c.region("min", "max", min, max);
                c.class("from_class", *from_class);
                c.class("to_class", *to_class);
            }
            EditOp::CopyTranslate {
                src_min,
                src_max,
                offset,
            } => {
                c.region("src_min", "src_max", src_min, src_max);
                c.finite("offset", offset);
            }
        }
        diags.extend(c.diags);
    }
    diags
}

fn label(class: u32) -> SemanticLabel {
    SemanticLabel::new(class as u8).expect("validated class")
}

#[inline]
fn center_in_box(c: &Point3<f64>, min: &[f64; 3], max: &[f64; 3]) -> bool {
    (0..3).all(|a| min[a] <= c[a] && c[a] <= max[a])
}

#[inline]
fn center_in_cylinder(c: &Point3<f64>, center: &[f64; 3], radius: f64, z_min: f64, z_max: f64) -> bool {
    let dx = c.x - center[0];
    let dy = c.y - center[1];
    dx * dx + dy * dy <= radius * radius && z_min <= c.z && c.z <= z_max
}

/// Index bounds (inclusive) that cover every voxel whose center could lie in
/// `[lo, hi]`, padded by one voxel; the exact center test decides membership.
fn candidate_range(spec: &GridSpec, lo: [f64; 3], hi: [f64; 3]) -> Option<[(usize, usize); 3]> {
    let mut out = [(0, 0); 3];
    for a in 0..3 {
        let o = spec.origin()[a];
        let r = spec.resolution();
        let first = ((lo[a] - o) / r - 0.5).floor() - 1.0;
        let last = ((hi[a] - o) / r - 0.5).ceil() + 1.0;
        let dim = spec.dims()[a] as f64;
        if last < 0.0 || first >= dim {
            return None;
        }
        out[a] = (first.max(0.0) as usize, last.min(dim - 1.0) as usize);
    }
    Some(out)
}

fn for_each_candidate(spec: &GridSpec, lo: [f64; 3], hi: [f64; 3], mut f: impl FnMut([usize; 3])) {
    let Some([(x0, x1), (y0, y1), (z0, z1)]) = candidate_range(spec, lo, hi) else {
        return;
    };
    for ix in x0..=x1 {
        for iy in y0..=y1 {
            for iz in z0..=z1 {
                f([ix, iy, iz]);
            }
        }
    }
}

/// Voxels whose centers lie in the box.
pub fn box_voxels(spec: &GridSpec, min: &[f64; 3], max: &[f64; 3]) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for_each_candidate(spec, *min, *max, |idx| {
        if center_in_box(&spec.voxel_center(idx), min, max) {
            out.push(idx);
        }
    });
    out
}

/// Voxels whose centers lie in the vertical cylinder.
pub fn cylinder_voxels(spec: &GridSpec, center: &[f64; 3], radius: f64, z_min: f64, z_max: f64) -> Vec<[usize; 3]> {
    let lo = [center[0] - radius, center[1] - radius, z_min];
    let hi = [center[0] + radius, center[1] + radius, z_max];
    let mut out = Vec::new();
    for_each_candidate(spec, lo, hi, |idx| {
        if center_in_cylinder(&spec.voxel_center(idx), center, radius, z_min, z_max) {
            out.push(idx);
        }
    });
    out
}

fn apply_op(grid: &mut OccupancyGrid, op: &EditOp) {
    let spec = grid.spec().clone();
    match op {
        EditOp::FillBox { min, max, class } => {
            let l = label(*class);
            for idx in box_voxels(&spec, min, max) {
                grid.set(idx, l);
            }
        }
        EditOp::FillCylinder {
            center,
            radius,
            z_min,
            z_max,
            class,
        } => {
            let l = label(*class);
            for idx in cylinder_voxels(&spec, center, *radius, *z_min, *z_max) {
                grid.set(idx, l);
            }
        }
        EditOp::EraseRegion { min, max } => {
            for idx in box_voxels(&spec, min, max) {
                grid.set(idx, SemanticLabel::FREE);
            }
        }
        EditOp::Repaint {
            min,
            max,
            from_class,
            to_class,
        } => {
            let (from, to) = (label(*from_class), label(*to_class));
            for idx in box_voxels(&spec, min, max) {
                if grid.get(idx) == from {
                    grid.set(idx, to);
                }
            }
        }
        EditOp::CopyTranslate {
            src_min,
            src_max,
            offset,
        } => {
            let shift: [i64; 3] = std::array::from_fn(|a| (offset[a] / spec.resolution()).round() as i64);
            let snapshot: Vec<([usize; 3], SemanticLabel)> = box_voxels(&spec, src_min, src_max)
                .into_iter()
                .map(|idx| (idx, grid.get(idx)))
                .collect();
            let dims = spec.dims();
            for (idx, l) in snapshot {
                let dst: Option<Vec<usize>> = (0..3)
                    .map(|a| {
                        let t = idx[a] as i64 + shift[a];
                        (0..dims[a] as i64).contains(&t).then_some(t as usize)
                    })
                    .collect();
                if let Some(d) = dst {
                    grid.set([d[0], d[1], d[2]], l);
                }
            }
        }
    }
}

/// Applies the script to a copy of `grid`. The script is validated up front;
/// nothing is modified when it has diagnostics.
pub fn apply_edit_script(grid: &OccupancyGrid, script: &EditScript) -> Result<OccupancyGrid> {
    let diags = validate_script(script);
    if !diags.is_empty() {
        return Err(Error::InvalidScript(diags));
    }
    let mut out = grid.clone();
    for op in &script.ops {
        apply_op(&mut out, op);
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDiff {
    pub changed: u64,
    /// Class ids the changed voxels held before.
    pub before: BTreeMap<u8, u64>,
    /// Class ids the changed voxels hold after.
    pub after: BTreeMap<u8, u64>,
}

pub fn diff_grids(a: &OccupancyGrid, b: &OccupancyGrid) -> Result<GridDiff> {
    if a.spec() != b.spec() {
        return Err(Error::dims("grid spec", a.spec(), b.spec()));
    }
    let mut diff = GridDiff::default();
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        if x != y {
            diff.changed += 1;
            *diff.before.entry(x.id()).or_default() += 1;
            *diff.after.entry(y.id()).or_default() += 1;
        }
    }
    Ok(diff)
}
