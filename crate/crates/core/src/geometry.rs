//! Grids, cameras, and the pixel → world → voxel mapping every other module
//! builds on.
//!
//! Conventions:
//! - Voxels are stored x-major: `index = (ix * ny + iy) * nz + iz`.
//! - A world point belongs to the voxel whose half-open index interval
//!   contains it (`floor((p - origin) / resolution)`), so there are no ties.
//! - Pixel coordinates are continuous with `(u, v) = (column, row)`; the ray
//!   for `(u, v)` passes through the image coordinate `(u, v)` exactly, with
//!   no half-pixel offset.
//! - Camera frames are x right, y down, z forward; `T` maps camera
//!   coordinates into the occupancy (world) frame.

use nalgebra::{Matrix3, Point3, Vector3};

use crate::error::{Error, Result};
use crate::label::SemanticLabel;

/// Recorded in every stack sidecar.
pub const PIXEL_CONVENTION: &str =
    "u=column,v=row; ray through image coordinate (u,v) exactly (no half-pixel offset); output pixel (u,v) samples native (u*native_w/W, v*native_h/H)";

const ORTHONORMAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    dims: [usize; 3],
    origin: [f64; 3],
    resolution: f64,
}

impl GridSpec {
    pub fn new(dims: [usize; 3], origin: [f64; 3], resolution: f64) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::config(format!("grid dims must be positive, got {dims:?}")));
        }
        if dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).is_none() {
            return Err(Error::config(format!("grid dims {dims:?} overflow")));
        }
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::config(format!(
                "grid resolution must be positive, got {resolution}"
            )));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::config(format!("grid origin must be finite, got {origin:?}")));
        }
        Ok(Self {
            dims,
            origin,
            resolution,
        })
    }

    /// The 0.2 m, 500×500×40 grid covering x, y ∈ [-50, 50] m, z ∈ [-5, 3] m.
    pub fn nuscenes_occupancy() -> Self {
        Self::new([500, 500, 40], [-50.0, -50.0, -5.0], 0.2).expect("static grid spec")
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    #[inline]
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn voxel_count(&self) -> usize {
        self.dims.iter().product()
    }

    /// Max corner, `origin + dims * resolution`.
    pub fn extent(&self) -> [f64; 3] {
        std::array::from_fn(|a| self.origin[a] + self.dims[a] as f64 * self.resolution)
    }

    #[inline]
    pub fn linear_index(&self, [ix, iy, iz]: [usize; 3]) -> usize {
        (ix * self.dims[1] + iy) * self.dims[2] + iz
    }

    pub fn unravel(&self, linear: usize) -> [usize; 3] {
        let iz = linear % self.dims[2];
        let rest = linear / self.dims[2];
        [rest / self.dims[1], rest % self.dims[1], iz]
    }

    pub fn voxel_center(&self, idx: [usize; 3]) -> Point3<f64> {
        Point3::from(std::array::from_fn::<f64, 3, _>(|a| {
            self.origin[a] + (idx[a] as f64 + 0.5) * self.resolution
        }))
    }

    /// Floor-based containment; `None` when the point is outside `[0, dim)` on
    /// any axis (or not finite).
    pub fn voxel_index(&self, p: &Point3<f64>) -> Option<[usize; 3]> {
        let mut idx = [0usize; 3];
        for a in 0..3 {
            let f = ((p[a] - self.origin[a]) / self.resolution).floor();
            if !(f >= 0.0 && f < self.dims[a] as f64) {
                return None;
            }
            idx[a] = f as usize;
        }
        Some(idx)
    }
}

pub fn voxel_index(p: &Point3<f64>, spec: &GridSpec) -> Option<[usize; 3]> {
    spec.voxel_index(p)
}

/// Dense semantic voxel grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    spec: GridSpec,
    labels: Vec<SemanticLabel>,
}

impl OccupancyGrid {
    pub fn filled(spec: GridSpec, label: SemanticLabel) -> Self {
        let labels = vec![label; spec.voxel_count()];
        Self { spec, labels }
    }

    pub fn empty(spec: GridSpec) -> Self {
        Self::filled(spec, SemanticLabel::FREE)
    }

    pub fn from_labels(spec: GridSpec, labels: Vec<SemanticLabel>) -> Result<Self> {
        if labels.len() != spec.voxel_count() {
            return Err(Error::dims("occupancy labels", spec.voxel_count(), labels.len()));
        }
        Ok(Self { spec, labels })
    }

    #[inline]
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    #[inline]
    pub fn labels(&self) -> &[SemanticLabel] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, idx: [usize; 3]) -> SemanticLabel {
        self.labels[self.spec.linear_index(idx)]
    }

    pub fn set(&mut self, idx: [usize; 3], label: SemanticLabel) {
        let i = self.spec.linear_index(idx);
        self.labels[i] = label;
    }

    /// Label of the voxel containing `p`, FREE outside the extent.
    #[inline]
    pub fn lookup(&self, p: &Point3<f64>) -> SemanticLabel {
        match self.spec.voxel_index(p) {
            Some(idx) => self.get(idx),
            None => SemanticLabel::FREE,
        }
    }

    pub fn occupied_count(&self) -> usize {
        self.labels.iter().filter(|l| !l.is_free()).count()
    }
}

pub fn lookup_semantic(grid: &OccupancyGrid, p: &Point3<f64>) -> SemanticLabel {
    grid.lookup(p)
}

/// Pinhole camera with a camera → world rigid transform.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    intrinsics: Matrix3<f64>,
    intrinsics_inv: Matrix3<f64>,
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
    width: u32,
    height: u32,
}

impl CameraModel {
    pub fn new(
        intrinsics: Matrix3<f64>,
        rotation: Matrix3<f64>,
        translation: Vector3<f64>,
        width: u32,
        height: u32,
    ) -> Result<Self> {
        if intrinsics
            .iter()
            .chain(rotation.iter())
            .chain(translation.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::config("camera parameters must be finite"));
        }
        if !(intrinsics[(0, 0)] > 0.0 && intrinsics[(1, 1)] > 0.0) {
            return Err(Error::config(format!(
                "focal lengths must be positive, got fx={} fy={}",
                intrinsics[(0, 0)],
                intrinsics[(1, 1)]
            )));
        }
        let intrinsics_inv = intrinsics
            .try_inverse()
            .ok_or_else(|| Error::config("intrinsic matrix is not invertible"))?;
        let gram_err = (rotation.transpose() * rotation - Matrix3::identity()).amax();
        if gram_err > ORTHONORMAL_TOL || rotation.determinant() <= 0.0 {
            return Err(Error::config(format!(
                "extrinsic rotation is not a proper rotation (|RᵀR - I| = {gram_err:e})"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::config(format!(
                "image size must be positive, got {width}x{height}"
            )));
        }
        Ok(Self {
            intrinsics,
            intrinsics_inv,
            rotation,
            translation,
            width,
            height,
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub fn pinhole(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        rotation: Matrix3<f64>,
        translation: Vector3<f64>,
        width: u32,
        height: u32,
    ) -> Result<Self> {
        let k = Matrix3::new(fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0);
        Self::new(k, rotation, translation, width, height)
    }

    /// Camera rotation for a forward axis lying in the world xy-plane at
    /// `yaw` radians from +x, with image y pointing down (-z).
    pub fn yaw_rotation(yaw: f64) -> Matrix3<f64> {
        let (s, c) = yaw.sin_cos();
        let right = Vector3::new(s, -c, 0.0);
        let down = Vector3::new(0.0, 0.0, -1.0);
        let forward = Vector3::new(c, s, 0.0);
        Matrix3::from_columns(&[right, down, forward])
    }

    #[inline]
    pub fn intrinsics(&self) -> &Matrix3<f64> {
        &self.intrinsics
    }

    #[inline]
    pub fn intrinsics_inv(&self) -> &Matrix3<f64> {
        &self.intrinsics_inv
    }

    #[inline]
    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    #[inline]
    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn fx(&self) -> f64 {
        self.intrinsics[(0, 0)]
    }

    pub fn fy(&self) -> f64 {
        self.intrinsics[(1, 1)]
    }

    pub fn cx(&self) -> f64 {
        self.intrinsics[(0, 2)]
    }

    pub fn cy(&self) -> f64 {
        self.intrinsics[(1, 2)]
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Point3<f64> {
        Point3::from(self.translation)
    }

    /// `T · K⁻¹ · (u·d, v·d, d)ᵀ`.
    #[inline]
    pub fn world_from_pixel(&self, u: f64, v: f64, depth: f64) -> Point3<f64> {
        let frustum = Vector3::new(u * depth, v * depth, depth);
        let cam = self.intrinsics_inv * frustum;
        Point3::from(self.rotation * cam + self.translation)
    }

    /// Same camera with `fx` and `fy` multiplied by `factor`; principal
    /// point, pose and resolution unchanged.
    pub fn scale_intrinsics(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::config(format!(
                "focal scale factor must be positive, got {factor}"
            )));
        }
        let mut k = self.intrinsics;
        k[(0, 0)] *= factor;
        k[(1, 1)] *= factor;
        Self::new(k, self.rotation, self.translation, self.width, self.height)
    }
}

pub fn world_from_pixel(u: f64, v: f64, depth: f64, cam: &CameraModel) -> Point3<f64> {
    cam.world_from_pixel(u, v, depth)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraRig {
    cameras: Vec<CameraModel>,
    names: Vec<String>,
}

impl CameraRig {
    pub fn new(cameras: Vec<CameraModel>, names: Vec<String>) -> Result<Self> {
        if cameras.is_empty() {
            return Err(Error::config("camera rig needs at least one camera"));
        }
        if cameras.len() != names.len() {
            return Err(Error::dims("camera names", cameras.len(), names.len()));
        }
        let mut seen = std::collections::HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::config(format!("duplicate camera name {name:?}")));
            }
        }
        Ok(Self { cameras, names })
    }

    pub fn single(name: impl Into<String>, camera: CameraModel) -> Self {
        Self {
            cameras: vec![camera],
            names: vec![name.into()],
        }
    }

    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }

    pub fn cameras(&self) -> &[CameraModel] {
        &self.cameras
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &CameraModel)> {
        self.names.iter().map(String::as_str).zip(&self.cameras)
    }

    pub fn camera(&self, view: usize) -> Option<&CameraModel> {
        self.cameras.get(view)
    }
}
