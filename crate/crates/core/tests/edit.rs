mod common;

use common::random_grid;
use mpi_forge::edit::{apply_edit_script, cylinder_voxels, diff_grids, validate_script, EditOp, EditScript};
use mpi_forge::{Error, OccupancyGrid, SemanticLabel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_box(rng: &mut ChaCha8Rng, grid: &OccupancyGrid) -> ([f64; 3], [f64; 3]) {
    let lo = grid.spec().origin();
    let hi = grid.spec().extent();
    let mut a = [0.0; 3];
    let mut b = [0.0; 3];
    for k in 0..3 {
        let x = rng.gen_range(lo[k] - 1.0..hi[k] + 1.0);
        let y = rng.gen_range(lo[k] - 1.0..hi[k] + 1.0);
        a[k] = x.min(y);
        b[k] = x.max(y);
    }
    (a, b)
}

fn script(ops: Vec<EditOp>) -> EditScript {
    EditScript { ops }
}

#[test]
fn fill_is_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..40 {
        let grid = random_grid(&mut rng, 12, 0.3);
        let (min, max) = random_box(&mut rng, &grid);
        let s = script(vec![EditOp::FillBox {
            min,
            max,
            class: rng.gen_range(1..=16),
        }]);
        let once = apply_edit_script(&grid, &s).unwrap();
        let twice = apply_edit_script(&once, &s).unwrap();
        assert_eq!(once, twice);
    }
}

#[test]
fn fill_then_erase_clears_exactly_the_region() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..40 {
        let grid = random_grid(&mut rng, 12, 0.3);
        let (min, max) = random_box(&mut rng, &grid);
        let s = script(vec![
            EditOp::FillBox { min, max, class: 4 },
            EditOp::EraseRegion { min, max },
        ]);
        let out = apply_edit_script(&grid, &s).unwrap();
        let spec = grid.spec();
        for i in 0..spec.voxel_count() {
            let idx = spec.unravel(i);
            let c = spec.voxel_center(idx);
            let inside = (0..3).all(|a| min[a] <= c[a] && c[a] <= max[a]);
            if inside {
                assert!(out.get(idx).is_free());
            } else {
                assert_eq!(out.get(idx), grid.get(idx));
            }
        }
    }
}

#[test]
fn cylinder_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..40 {
        let grid = random_grid(&mut rng, 16, 0.0);
        let spec = grid.spec().clone();
        let lo = spec.origin();
        let hi = spec.extent();
        let center = [rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1]), 0.0];
        let radius = rng.gen_range(0.0..4.0);
        let z_min = rng.gen_range(lo[2] - 1.0..hi[2]);
        let z_max = z_min + rng.gen_range(0.0..5.0);
        let mut expected = Vec::new();
        for i in 0..spec.voxel_count() {
            let idx = spec.unravel(i);
            let c = spec.voxel_center(idx);
            let (dx, dy) = (c.x - center[0], c.y - center[1]);
            if dx * dx + dy * dy <= radius * radius && z_min <= c.z && c.z <= z_max {
                expected.push(idx);
            }
        }
        let mut got = cylinder_voxels(&spec, &center, radius, z_min, z_max);
        got.sort_unstable();
        expected.sort_unstable();
        assert_eq!(got, expected);

        let s = script(vec![EditOp::FillCylinder {
            center,
            radius,
            z_min,
            z_max,
            class: 9,
        }]);
        let out = apply_edit_script(&grid, &s).unwrap();
        assert_eq!(diff_grids(&grid, &out).unwrap().changed as usize, expected.len());
    }
}

#[test]
fn invalid_scripts_leave_grid_untouched() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let grid = random_grid(&mut rng, 6, 0.3);
    let s = script(vec![
        EditOp::FillBox {
            min: [0.0; 3],
            max: [1.0; 3],
            class: 3,
        },
        EditOp::FillBox {
            min: [2.0, 0.0, 0.0],
            max: [1.0; 3],
            class: 99,
        },
    ]);
    let diags = validate_script(&s);
    assert_eq!(diags.len(), 2);
    assert!(diags.iter().all(|d| d.op_index == 1));
    assert!(matches!(apply_edit_script(&grid, &s), Err(Error::InvalidScript(_))));
}

#[test]
fn repaint_and_copy() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let grid = random_grid(&mut rng, 10, 0.6);
    let lo = grid.spec().origin();
    let hi = grid.spec().extent();
    let s = script(vec![EditOp::Repaint {
        min: lo,
        max: hi,
        from_class: 4,
        to_class: 10,
    }]);
    let out = apply_edit_script(&grid, &s).unwrap();
    for (a, b) in grid.labels().iter().zip(out.labels()) {
        let expect = if *a == SemanticLabel::CAR {
            SemanticLabel::TRUCK
        } else {
            *a
        };
        assert_eq!(*b, expect);
    }
    let zero = script(vec![EditOp::CopyTranslate {
        src_min: lo,
        src_max: hi,
        offset: [0.0; 3],
    }]);
    assert_eq!(apply_edit_script(&grid, &zero).unwrap(), grid);
}
