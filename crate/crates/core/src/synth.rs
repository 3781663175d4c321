//! Procedural occupancy scenes and camera rigs for tests and demos.
//!
//! Shapes are written in order (fixed boxes, random objects, ground) and a
//! voxel keeps the first label written to it.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::edit::{box_voxels, cylinder_voxels};
use crate::error::{Error, Result};
use crate::geometry::{CameraModel, CameraRig, GridSpec, OccupancyGrid};
use crate::label::SemanticLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Box,
    /// Vertical cylinder; `size[0]` is the diameter and `size[2]` the height.
    Cylinder,
}

/// `count` objects of one class with sizes drawn per axis from
/// `[min_size, max_size]`, standing on the ground.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub class: u8,
    pub count: usize,
    pub shape: Shape,
    pub min_size: [f64; 3],
    pub max_size: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub class: u8,
}

/// One voxel layer directly below `height`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundPlane {
    pub class: u8,
    pub height: f64,
}

/// A ring of `cameras` cameras at `mount_height` above the ground (or the
/// grid floor) over the grid center, yaw spaced evenly starting at +x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RigRecipe {
    pub cameras: usize,
    pub focal: f64,
    pub width: u32,
    pub height: u32,
    pub mount_height: f64,
}

impl Default for RigRecipe {
    fn default() -> Self {
        Self {
            cameras: 6,
            focal: 1266.0,
            width: 1600,
            height: 900,
            mount_height: 1.5,
        }
    }
}

/// Ring names used when the rig has six cameras, in yaw order.
pub const SIX_CAMERA_NAMES: [&str; 6] = [
    "CAM_FRONT",
    "CAM_FRONT_LEFT",
    "CAM_BACK_LEFT",
    "CAM_BACK",
    "CAM_BACK_RIGHT",
    "CAM_FRONT_RIGHT",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneRecipe {
    pub seed: u64,
    pub dims: [usize; 3],
    pub origin: [f64; 3],
    pub resolution: f64,
    pub ground: Option<GroundPlane>,
    pub objects: Vec<ObjectSpec>,
    pub fixed_boxes: Vec<FixedBox>,
    pub rig: RigRecipe,
}

impl Default for SceneRecipe {
    fn default() -> Self {
        let spec = GridSpec::nuscenes_occupancy();
        let obj = |class: SemanticLabel, count, shape, min_size, max_size| ObjectSpec {
            class: class.id(),
            count,
            shape,
            min_size,
            max_size,
        };
        Self {
            seed: 0,
            dims: spec.dims(),
            origin: spec.origin(),
            resolution: spec.resolution(),
            ground: Some(GroundPlane {
                class: SemanticLabel::DRIVEABLE_SURFACE.id(),
                height: -1.0,
            }),
            objects: vec![
                obj(SemanticLabel::CAR, 14, Shape::Box, [3.8, 1.7, 1.4], [4.8, 2.0, 1.8]),
                obj(SemanticLabel::TRUCK, 3, Shape::Box, [6.0, 2.3, 2.5], [9.0, 2.6, 3.5]),
                obj(
                    SemanticLabel::PEDESTRIAN,
                    12,
                    Shape::Cylinder,
                    [0.5, 0.5, 1.6],
                    [0.7, 0.7, 1.9],
                ),
                obj(
                    SemanticLabel::TRAFFIC_CONE,
                    10,
                    Shape::Cylinder,
                    [0.4, 0.4, 0.6],
                    [0.5, 0.5, 0.9],
                ),
                obj(SemanticLabel::BARRIER, 8, Shape::Box, [1.5, 0.4, 0.8], [3.0, 0.6, 1.1]),
                obj(
                    SemanticLabel::VEGETATION,
                    16,
                    Shape::Cylinder,
                    [1.5, 1.5, 3.0],
                    [3.0, 3.0, 6.0],
                ),
                obj(
                    SemanticLabel::MANMADE,
                    8,
                    Shape::Box,
                    [4.0, 4.0, 4.0],
                    [12.0, 12.0, 7.0],
                ),
            ],
            fixed_boxes: Vec::new(),
            rig: RigRecipe::default(),
        }
    }
}

fn class_label(class: u8) -> Result<SemanticLabel> {
    let label = SemanticLabel::new(class)?;
    if label.is_free() || label == SemanticLabel::UNKNOWN {
        return Err(Error::config(format!(
            "synthetic shapes need a named class, got {class}"
        )));
    }
    Ok(label)
}

impl SceneRecipe {
    /// Same layout with no random objects, ground or fixed boxes.
    pub fn empty(dims: [usize; 3], origin: [f64; 3], resolution: f64) -> Self {
        Self {
            dims,
            origin,
            resolution,
            ground: None,
            objects: Vec::new(),
            ..Self::default()
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.dims, self.origin, self.resolution)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid_spec()?;
        if let Some(g) = &self.ground {
            class_label(g.class)?;
            if !g.height.is_finite() {
                return Err(Error::config("ground height must be finite"));
            }
        }
        for o in &self.objects {
            class_label(o.class)?;
            for a in 0..3 {
                if !(o.min_size[a] > 0.0 && o.min_size[a] <= o.max_size[a] && o.max_size[a].is_finite()) {
                    return Err(Error::config(format!(
                        "object size range must satisfy 0 < min <= max, got {:?}..{:?}",
                        o.min_size, o.max_size
                    )));
                }
            }
        }
        for b in &self.fixed_boxes {
            class_label(b.class)?;
            if (0..3).any(|a| !(b.min[a].is_finite() && b.max[a].is_finite() && b.min[a] <= b.max[a])) {
                return Err(Error::config(format!(
                    "fixed box needs min <= max, got {:?}..{:?}",
                    b.min, b.max
                )));
            }
        }
        let r = &self.rig;
        if r.cameras == 0 || !(r.focal > 0.0 && r.focal.is_finite()) || r.width == 0 || r.height == 0 {
            return Err(Error::config(
                "rig needs at least one camera, a positive focal length and image size",
            ));
        }
        if !r.mount_height.is_finite() {
            return Err(Error::config("mount height must be finite"));
        }
        Ok(())
    }

    fn floor_z(&self) -> f64 {
        self.ground.as_ref().map_or(self.origin[2], |g| g.height)
    }
}

fn write_first(grid: &mut OccupancyGrid, voxels: &[[usize; 3]], label: SemanticLabel) {
    for &idx in voxels {
        if grid.get(idx).is_free() {
            grid.set(idx, label);
        }
    }
}

/// Deterministic grid for a recipe.
pub fn synth_grid(recipe: &SceneRecipe) -> Result<OccupancyGrid> {
    recipe.validate()?;
    let spec = recipe.grid_spec()?;
    let mut grid = OccupancyGrid::empty(spec.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(recipe.seed);

    for b in &recipe.fixed_boxes {
        write_first(&mut grid, &box_voxels(&spec, &b.min, &b.max), class_label(b.class)?);
    }

    let max = spec.extent();
    let floor = recipe.floor_z();
    for o in &recipe.objects {
        let label = class_label(o.class)?;
        for _ in 0..o.count {
            let size: [f64; 3] = std::array::from_fn(|a| rng.gen_range(o.min_size[a]..=o.max_size[a]));
            let half = match o.shape {
                Shape::Box => [size[0] / 2.0, size[1] / 2.0],
                Shape::Cylinder => [size[0] / 2.0; 2],
            };
            let c: [f64; 2] = std::array::from_fn(|a| {
                let (lo, hi) = (recipe.origin[a] + half[a], max[a] - half[a]);
                if lo < hi {
                    rng.gen_range(lo..hi)
                } else {
                    (recipe.origin[a] + max[a]) / 2.0
                }
            });
            let voxels = match o.shape {
                Shape::Box => box_voxels(
                    &spec,
                    &[c[0] - half[0], c[1] - half[1], floor],
                    &[c[0] + half[0], c[1] + half[1], floor + size[2]],
                ),
                Shape::Cylinder => cylinder_voxels(&spec, &[c[0], c[1], 0.0], half[0], floor, floor + size[2]),
            };
            write_first(&mut grid, &voxels, label);
        }
    }

    if let Some(g) = &recipe.ground {
        let probe = nalgebra::Point3::new(spec.origin()[0], spec.origin()[1], g.height - spec.resolution() / 2.0);
        if let Some([_, _, iz]) = spec.voxel_index(&probe) {
            let label = class_label(g.class)?;
            let [nx, ny, _] = spec.dims();
            for ix in 0..nx {
                for iy in 0..ny {
                    if grid.get([ix, iy, iz]).is_free() {
                        grid.set([ix, iy, iz], label);
                    }
                }
            }
        }
    }
    Ok(grid)
}

/// Camera ring over the grid center.
pub fn synth_rig(recipe: &SceneRecipe) -> Result<CameraRig> {
    recipe.validate()?;
    let r = &recipe.rig;
    let spec = recipe.grid_spec()?;
    let max = spec.extent();
    let center = Vector3::new(
        (recipe.origin[0] + max[0]) / 2.0,
        (recipe.origin[1] + max[1]) / 2.0,
        recipe.floor_z() + r.mount_height,
    );
    let (cx, cy) = (r.width as f64 / 2.0, r.height as f64 / 2.0);
    let mut cams = Vec::with_capacity(r.cameras);
    let mut names = Vec::with_capacity(r.cameras);
    for i in 0..r.cameras {
        let yaw = 2.0 * PI * i as f64 / r.cameras as f64;
        cams.push(CameraModel::pinhole(
            r.focal,
            r.focal,
            cx,
            cy,
            CameraModel::yaw_rotation(yaw),
            center,
            r.width,
            r.height,
        )?);
        names.push(match SIX_CAMERA_NAMES.get(i) {
            Some(name) if r.cameras == 6 => (*name).to_owned(),
            _ => format!("cam{i}"),
        });
    }
    CameraRig::new(cams, names)
}

pub fn synth_scene(recipe: &SceneRecipe) -> Result<(OccupancyGrid, CameraRig)> {
    Ok((synth_grid(recipe)?, synth_rig(recipe)?))
}
