//! Scene generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use mpi_forge::geometry::{lookup_semantic, world_from_pixel};
use mpi_forge::{CameraModel, GridSpec, MpiConfig, OccupancyGrid, SemanticLabel};
use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn label(id: u8) -> SemanticLabel {
    SemanticLabel::new(id).unwrap()
}

pub fn random_label<R: Rng>(rng: &mut R) -> SemanticLabel {
    if rng.gen_bool(0.03) {
        SemanticLabel::UNKNOWN
    } else {
        label(rng.gen_range(1..=16))
    }
}

/// Grid with each dim in `2..=max_dim`, random origin and resolution, and
/// roughly `density` of the voxels occupied.
pub fn random_grid(rng: &mut ChaCha8Rng, max_dim: usize, density: f64) -> OccupancyGrid {
    let dims = [0; 3].map(|_: usize| rng.gen_range(2..=max_dim));
    let res = rng.gen_range(0.2..1.2);
    let origin = [0; 3].map(|_: usize| rng.gen_range(-8.0..2.0));
    let spec = GridSpec::new(dims, origin, res).unwrap();
    let labels = (0..spec.voxel_count())
        .map(|_| {
            if rng.gen_bool(density) {
                random_label(rng)
            } else {
                SemanticLabel::FREE
            }
        })
        .collect();
    OccupancyGrid::from_labels(spec, labels).unwrap()
}

/// Arbitrary orientation, center somewhere near the grid.
pub fn random_camera(rng: &mut ChaCha8Rng, spec: &GridSpec, native: (u32, u32)) -> CameraModel {
    let rot = Rotation3::from_euler_angles(
        rng.gen_range(-3.1..3.1),
        rng.gen_range(-1.5..1.5),
        rng.gen_range(-3.1..3.1),
    )
    .into_inner();
    let lo = spec.origin();
    let hi = spec.extent();
    let t = Vector3::from_fn(|a, _| rng.gen_range(lo[a] - 1.0..hi[a] + 1.0));
    let (w, h) = native;
    let f = rng.gen_range(3.0..30.0);
    let aspect = rng.gen_range(0.8..1.25);
    let cx = rng.gen_range(0.0..w as f64);
    let cy = rng.gen_range(0.0..h as f64);
    CameraModel::pinhole(f, f * aspect, cx, cy, rot, t, w, h).unwrap()
}

pub fn random_config(rng: &mut ChaCha8Rng, max_planes: usize, h: usize, w: usize) -> MpiConfig {
    let d_min = if rng.gen_bool(0.3) {
        0.0
    } else {
        rng.gen_range(0.0..2.0)
    };
    let d_max = d_min + rng.gen_range(1.0..25.0);
    MpiConfig::new(rng.gen_range(2..=max_planes), d_min, d_max, h, w).unwrap()
}

/// Triple loop over (l, v, u) straight through the geometry functions.
pub fn naive_view_mpi(grid: &OccupancyGrid, cam: &CameraModel, config: &MpiConfig) -> Vec<SemanticLabel> {
    let sx = cam.width() as f64 / config.width() as f64;
    let sy = cam.height() as f64 / config.height() as f64;
    let mut out = Vec::with_capacity(config.planes() * config.height() * config.width());
    for l in 0..config.planes() {
        let d = config.d_min() + (config.d_max() - config.d_min()) * l as f64 / config.planes() as f64;
        for v in 0..config.height() {
            for u in 0..config.width() {
                out.push(lookup_semantic(
                    grid,
                    &world_from_pixel(u as f64 * sx, v as f64 * sy, d, cam),
                ));
            }
        }
    }
    out
}

/// Front-most scan over a `D × H × W` slab: (label, normalized depth) per pixel.
pub fn front_most(
    labels: &[SemanticLabel],
    planes: usize,
    h: usize,
    w: usize,
    d_min: f64,
    d_max: f64,
) -> (Vec<SemanticLabel>, Vec<u8>) {
    let mut sem = vec![SemanticLabel::FREE; h * w];
    let mut depth = vec![255u8; h * w];
    for p in 0..h * w {
        for l in 0..planes {
            let lab = labels[l * h * w + p];
            if !lab.is_free() {
                sem[p] = lab;
                let d = d_min + (d_max - d_min) * l as f64 / planes as f64;
                depth[p] = (255.0 * (d - d_min) / (d_max - d_min) + 0.5).floor() as u8;
                break;
            }
        }
    }
    (sem, depth)
}

/// Continuous first hit along the ray of native pixel `(u, v)` for depths in
/// `[d_min, d_max)`, by walking voxel boundaries.
pub fn ray_march(grid: &OccupancyGrid, cam: &CameraModel, u: f64, v: f64, d_min: f64, d_max: f64) -> SemanticLabel {
    let spec = grid.spec();
    let res = spec.resolution();
    let o = spec.origin();
    let dims = spec.dims();
    let c = cam.translation();
    let r = cam.rotation() * (cam.intrinsics_inv() * Vector3::new(u, v, 1.0));
    let p = c + r * d_min;
    let mut idx = [0i64; 3];
    let mut step = [0i64; 3];
    let mut t_next = [f64::INFINITY; 3];
    let mut t_delta = [f64::INFINITY; 3];
    for a in 0..3 {
        idx[a] = ((p[a] - o[a]) / res).floor() as i64;
        if r[a] > 0.0 {
            step[a] = 1;
            t_next[a] = (o[a] + (idx[a] + 1) as f64 * res - c[a]) / r[a];
            t_delta[a] = res / r[a];
        } else if r[a] < 0.0 {
            step[a] = -1;
            t_next[a] = (o[a] + idx[a] as f64 * res - c[a]) / r[a];
            t_delta[a] = -res / r[a];
        }
    }
    let mut d = d_min;
    while d < d_max {
        if (0..3).all(|a| idx[a] >= 0 && (idx[a] as usize) < dims[a]) {
            let lab = grid.get([idx[0] as usize, idx[1] as usize, idx[2] as usize]);
            if !lab.is_free() {
                return lab;
            }
        }
        let a = (0..3).min_by(|&i, &j| t_next[i].total_cmp(&t_next[j])).unwrap();
        if !t_next[a].is_finite() {
            break;
        }
        d = t_next[a];
        idx[a] += step[a];
        t_next[a] += t_delta[a];
    }
    SemanticLabel::FREE
}

/// Proper rotation whose columns are signed world axes.
pub fn axis_aligned_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    loop {
        let mut perm = [0usize, 1, 2];
        for i in (1..3).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let m = Matrix3::from_fn(|i, j| {
            if i == perm[j] {
                if rng.gen_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            } else {
                0.0
            }
        });
        if m.determinant() > 0.0 {
            return m;
        }
    }
}
