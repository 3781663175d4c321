//! Semantic multi-plane image construction.
//!
//! Each camera gets `D` fronto-parallel planes at depths
//! `d_l = d_min + (d_max - d_min) · l / D`, `l ∈ 0..D`. Every output pixel of
//! every plane is back-projected into the world and takes the label of the
//! voxel it lands in. Stacking the planes of all cameras gives an
//! `N × D × H × W` label tensor.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::{CameraModel, CameraRig, GridSpec, OccupancyGrid};
use crate::label::SemanticLabel;
use crate::pixmap::PixelMap;

/// Recorded in every stack sidecar.
pub const PLANE_INDEXING: &str = "l in 0..D, d_l = d_min + (d_max - d_min) * l / D (d_0 = d_min, d_max excluded)";

#[derive(Debug, Clone, PartialEq)]
pub struct MpiConfig {
    planes: usize,
    d_min: f64,
    d_max: f64,
    height: usize,
    width: usize,
}

impl MpiConfig {
    pub fn new(planes: usize, d_min: f64, d_max: f64, height: usize, width: usize) -> Result<Self> {
        if planes < 2 {
            return Err(Error::config(format!("need at least 2 planes, got {planes}")));
        }
        if !(d_min.is_finite() && d_max.is_finite() && 0.0 <= d_min && d_min < d_max) {
            return Err(Error::config(format!("need 0 <= d_min < d_max, got {d_min}..{d_max}")));
        }
        if height == 0 || width == 0 {
            return Err(Error::config(format!(
                "output size must be positive, got {width}x{height}"
            )));
        }
        Ok(Self {
            planes,
            d_min,
            d_max,
            height,
            width,
        })
    }

    /// 256 planes over 0..50 m at the given output size.
    pub fn reference(height: usize, width: usize) -> Result<Self> {
        Self::new(256, 0.0, 50.0, height, width)
    }

    pub fn planes(&self) -> usize {
        self.planes
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    fn plane_len(&self) -> usize {
        self.height * self.width
    }

    #[inline]
    pub fn plane_depth(&self, l: usize) -> f64 {
        self.d_min + (self.d_max - self.d_min) * l as f64 / self.planes as f64
    }
}

pub fn plane_depths(config: &MpiConfig) -> Vec<f64> {
    (0..config.planes).map(|l| config.plane_depth(l)).collect()
}

/// Native-pixel scale from output pixels: `(native_w / W, native_h / H)`.
#[inline]
pub fn pixel_scale(cam: &CameraModel, config: &MpiConfig) -> (f64, f64) {
    (
        cam.width() as f64 / config.width as f64,
        cam.height() as f64 / config.height as f64,
    )
}

/// Labels of one view, `D × H × W`.
#[derive(Debug, Clone, PartialEq)]
pub struct MpiSlab {
    planes: usize,
    height: usize,
    width: usize,
    labels: Vec<SemanticLabel>,
}

impl MpiSlab {
    pub fn new(planes: usize, height: usize, width: usize, labels: Vec<SemanticLabel>) -> Result<Self> {
        let n = planes * height * width;
        if labels.len() != n {
            return Err(Error::dims("slab labels", n, labels.len()));
        }
        Ok(Self {
            planes,
            height,
            width,
            labels,
        })
    }

    pub fn planes(&self) -> usize {
        self.planes
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn labels(&self) -> &[SemanticLabel] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, l: usize, v: usize, u: usize) -> SemanticLabel {
        self.labels[(l * self.height + v) * self.width + u]
    }

    pub fn plane(&self, l: usize) -> PixelMap<SemanticLabel> {
        let n = self.height * self.width;
        PixelMap::from_vec(self.height, self.width, self.labels[l * n..(l + 1) * n].to_vec()).expect("plane length")
    }
}

fn fill_plane(grid: &OccupancyGrid, cam: &CameraModel, config: &MpiConfig, l: usize, out: &mut [SemanticLabel]) {
    let (sx, sy) = pixel_scale(cam, config);
    let depth = config.plane_depth(l);
    for v in 0..config.height {
        let row = &mut out[v * config.width..(v + 1) * config.width];
        let vn = v as f64 * sy;
        for (u, slot) in row.iter_mut().enumerate() {
            let p = cam.world_from_pixel(u as f64 * sx, vn, depth);
            *slot = grid.lookup(&p);
        }
    }
}

pub fn build_view_mpi(grid: &OccupancyGrid, cam: &CameraModel, config: &MpiConfig) -> MpiSlab {
    build_view_mpi_with(Exec::default(), grid, cam, config)
}

pub fn build_view_mpi_with(exec: Exec, grid: &OccupancyGrid, cam: &CameraModel, config: &MpiConfig) -> MpiSlab {
    let mut labels = vec![SemanticLabel::FREE; config.planes * config.plane_len()];
    exec.for_each_chunk_mut(&mut labels, config.plane_len(), |l, plane| {
        fill_plane(grid, cam, config, l, plane)
    });
    MpiSlab {
        planes: config.planes,
        height: config.height,
        width: config.width,
        labels,
    }
}

/// Semantic MPI of every camera in a rig, stacked in rig order.
#[derive(Debug, Clone, PartialEq)]
pub struct MpiStack {
    config: MpiConfig,
    rig: CameraRig,
    grid: GridSpec,
    labels: Vec<SemanticLabel>,
}

impl MpiStack {
    pub fn from_parts(config: MpiConfig, rig: CameraRig, grid: GridSpec, labels: Vec<SemanticLabel>) -> Result<Self> {
        let expected = rig.len() * config.planes * config.plane_len();
        if labels.len() != expected {
            return Err(Error::dims("mpi stack labels", expected, labels.len()));
        }
        Ok(Self {
            config,
            rig,
            grid,
            labels,
        })
    }

    pub fn config(&self) -> &MpiConfig {
        &self.config
    }

    pub fn rig(&self) -> &CameraRig {
        &self.rig
    }

    pub fn grid_spec(&self) -> &GridSpec {
        &self.grid
    }

    pub fn labels(&self) -> &[SemanticLabel] {
        &self.labels
    }

    pub fn views(&self) -> usize {
        self.rig.len()
    }

    /// `[N, D, H, W]`.
    pub fn shape(&self) -> [usize; 4] {
        [
            self.rig.len(),
            self.config.planes,
            self.config.height,
            self.config.width,
        ]
    }

    pub fn plane_depths(&self) -> Vec<f64> {
        plane_depths(&self.config)
    }

    fn view_len(&self) -> usize {
        self.config.planes * self.config.plane_len()
    }

    fn check_view(&self, view: usize) -> Result<()> {
        if view >= self.views() {
            return Err(Error::config(format!(
                "view index {view} out of range for a {}-camera stack",
                self.views()
            )));
        }
        Ok(())
    }

    pub fn view_labels(&self, view: usize) -> Result<&[SemanticLabel]> {
        self.check_view(view)?;
        let n = self.view_len();
        Ok(&self.labels[view * n..(view + 1) * n])
    }

    pub fn view_slab(&self, view: usize) -> Result<MpiSlab> {
        Ok(MpiSlab {
            planes: self.config.planes,
            height: self.config.height,
            width: self.config.width,
            labels: self.view_labels(view)?.to_vec(),
        })
    }

    #[inline]
    pub fn get(&self, view: usize, l: usize, v: usize, u: usize) -> SemanticLabel {
        let c = &self.config;
        self.labels[((view * c.planes + l) * c.height + v) * c.width + u]
    }

    /// Index of the nearest non-FREE plane for every pixel of `view`.
    pub fn first_hits(&self, view: usize) -> Result<PixelMap<Option<usize>>> {
        self.first_hits_with(Exec::default(), view)
    }

    pub fn first_hits_with(&self, exec: Exec, view: usize) -> Result<PixelMap<Option<usize>>> {
        let slab = self.view_labels(view)?;
        let (h, w, planes) = (self.config.height, self.config.width, self.config.planes);
        let plane_len = h * w;
        let mut hits = vec![None; plane_len];
        exec.for_each_chunk_mut(&mut hits, w, |v, row| {
            for (u, hit) in row.iter_mut().enumerate() {
                let px = v * w + u;
                *hit = (0..planes).find(|&l| !slab[l * plane_len + px].is_free());
            }
        });
        PixelMap::from_vec(h, w, hits)
    }
}

pub fn build_rig_mpi(grid: &OccupancyGrid, rig: &CameraRig, config: &MpiConfig) -> MpiStack {
    build_rig_mpi_with(Exec::default(), grid, rig, config)
}

pub fn build_rig_mpi_with(exec: Exec, grid: &OccupancyGrid, rig: &CameraRig, config: &MpiConfig) -> MpiStack {
    let mut labels = vec![SemanticLabel::FREE; rig.len() * config.planes * config.plane_len()];
    let cams = rig.cameras();
    exec.for_each_chunk_mut(&mut labels, config.plane_len(), |chunk, plane| {
        let (view, l) = (chunk / config.planes, chunk % config.planes);
        fill_plane(grid, &cams[view], config, l, plane);
    });
    MpiStack {
        config: config.clone(),
        rig: rig.clone(),
        grid: grid.spec().clone(),
        labels,
    }
}

/// Per pixel, the label of the nearest non-FREE plane; FREE for empty rays.
pub fn composite_semantic(stack: &MpiStack, view: usize) -> Result<PixelMap<SemanticLabel>> {
    composite_semantic_with(Exec::default(), stack, view)
}

pub fn composite_semantic_with(exec: Exec, stack: &MpiStack, view: usize) -> Result<PixelMap<SemanticLabel>> {
    let hits = stack.first_hits_with(exec, view)?;
    Ok(PixelMap::from_fn(hits.height(), hits.width(), |v, u| {
        hits.get(v, u).map_or(SemanticLabel::FREE, |l| stack.get(view, l, v, u))
    }))
}

/// First-hit depth normalized to 0..=255 (round half up); 255 for empty rays.
pub fn composite_depth(stack: &MpiStack, view: usize) -> Result<PixelMap<u8>> {
    composite_depth_with(Exec::default(), stack, view)
}

pub fn composite_depth_with(exec: Exec, stack: &MpiStack, view: usize) -> Result<PixelMap<u8>> {
    let c = stack.config();
    let hits = stack.first_hits_with(exec, view)?;
    Ok(hits.map(|hit| match hit {
        Some(l) => normalize_depth(c.plane_depth(*l), c.d_min, c.d_max),
        None => 255,
    }))
}

#[inline]
pub fn normalize_depth(depth: f64, d_min: f64, d_max: f64) -> u8 {
    let x = 255.0 * (depth - d_min) / (d_max - d_min);
    (x + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// First-hit depth in meters; `d_max` for empty rays.
pub fn composite_depth_meters(stack: &MpiStack, view: usize) -> Result<PixelMap<f64>> {
    let c = stack.config();
    let hits = stack.first_hits(view)?;
    Ok(hits.map(|hit| hit.map_or(c.d_max, |l| c.plane_depth(l))))
}

pub fn scale_intrinsics(cam: &CameraModel, factor: f64) -> Result<CameraModel> {
    cam.scale_intrinsics(factor)
}

/// Every voxel index that at least one `(u, v, d_l)` sample of `cam` lands in.
pub fn sampled_voxels(spec: &GridSpec, cam: &CameraModel, config: &MpiConfig) -> HashSet<[usize; 3]> {
    let (sx, sy) = pixel_scale(cam, config);
    let mut hits = HashSet::new();
    for l in 0..config.planes {
        let depth = config.plane_depth(l);
        for v in 0..config.height {
            for u in 0..config.width {
                if let Some(idx) = spec.voxel_index(&cam.world_from_pixel(u as f64 * sx, v as f64 * sy, depth)) {
                    hits.insert(idx);
                }
            }
        }
    }
    hits
}
