mod common;

use common::random_grid;
use mpi_forge::geometry::{lookup_semantic, world_from_pixel};
use mpi_forge::{CameraModel, SemanticLabel};
use nalgebra::{Matrix3, Point3, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn identity_camera() -> CameraModel {
    CameraModel::pinhole(1.0, 1.0, 0.0, 0.0, Matrix3::identity(), Vector3::zeros(), 1600, 900).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn identity_camera_back_projects_to_scaled_pixel(u in -2000.0..2000.0f64, v in -2000.0..2000.0f64, d in 0.0..100.0f64) {
        let p = world_from_pixel(u, v, d, &identity_camera());
        prop_assert!(close(p.x, u * d) && close(p.y, v * d) && close(p.z, d), "{p} for ({u}, {v}, {d})");
    }

    #[test]
    fn back_projection_lands_at_requested_depth(seed in any::<u64>(), u in 0.0..1600.0f64, v in 0.0..900.0f64, d in 0.1..60.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = random_grid(&mut rng, 4, 0.0);
        let cam = common::random_camera(&mut rng, grid.spec(), (1600, 900));
        let p = world_from_pixel(u, v, d, &cam);
        let local = cam.rotation().transpose() * (p.coords - cam.translation());
        prop_assert!((local.z - d).abs() <= 1e-9 * d.max(1.0));
        let pix = cam.intrinsics() * local / local.z;
        prop_assert!((pix.x - u).abs() <= 1e-8 * u.abs().max(1.0));
        prop_assert!((pix.y - v).abs() <= 1e-8 * v.abs().max(1.0));
    }
}

fn brute_force_lookup(grid: &mpi_forge::OccupancyGrid, p: &Point3<f64>) -> SemanticLabel {
    let spec = grid.spec();
    let [nx, ny, nz] = spec.dims();
    let o = spec.origin();
    let r = spec.resolution();
    for ix in 0..nx {
        for iy in 0..ny {
            for iz in 0..nz {
                let idx = [ix, iy, iz];
                let inside = (0..3).all(|a| {
                    let lo = o[a] + idx[a] as f64 * r;
                    lo <= p[a] && p[a] < lo + r
                });
                if inside {
                    return grid.get(idx);
                }
            }
        }
    }
    SemanticLabel::FREE
}

#[test]
fn lookup_matches_brute_force_on_small_grids() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..60 {
        let grid = random_grid(&mut rng, 16, 0.4);
        let spec = grid.spec();
        let o = spec.origin();
        let r = spec.resolution();
        let dims = spec.dims();
        for _ in 0..200 {
            // Voxel cell coordinates including a margin outside the grid;
            // fractions avoid the boundaries where rounding decides.
            let p = Point3::from(Vector3::from_fn(|a, _| {
                let cell = rng.gen_range(-2..dims[a] as i64 + 2) as f64;
                o[a] + (cell + rng.gen_range(0.01..0.99)) * r
            }));
            assert_eq!(lookup_semantic(&grid, &p), brute_force_lookup(&grid, &p), "point {p}");
        }
    }
}

#[test]
fn lookup_outside_is_free_even_in_full_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut grid = random_grid(&mut rng, 6, 1.0);
    let spec = grid.spec().clone();
    for i in 0..spec.voxel_count() {
        grid.set(spec.unravel(i), SemanticLabel::CAR);
    }
    let eps = 0.01 * spec.resolution();
    let hi = spec.extent().map(|x| x + eps);
    let lo = spec.origin();
    for p in [
        Point3::new(lo[0] - 1e-9, lo[1], lo[2]),
        Point3::new(hi[0], lo[1], lo[2]),
        Point3::new(lo[0], hi[1], lo[2]),
        Point3::new(lo[0], lo[1], hi[2]),
        Point3::new(f64::NAN, lo[1], lo[2]),
    ] {
        assert_eq!(grid.lookup(&p), SemanticLabel::FREE, "{p}");
    }
    assert_eq!(grid.lookup(&Point3::new(lo[0], lo[1], lo[2])), SemanticLabel::CAR);
}

#[test]
fn voxel_center_round_trips_through_index() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let grid = random_grid(&mut rng, 16, 0.0);
        let spec = grid.spec();
        for i in 0..spec.voxel_count() {
            let idx = spec.unravel(i);
            assert_eq!(spec.linear_index(idx), i);
            assert_eq!(spec.voxel_index(&spec.voxel_center(idx)), Some(idx));
        }
    }
}
