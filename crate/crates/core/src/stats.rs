//! Summary statistics for grids and stacks. Occupied means "not FREE";
//! UNKNOWN counts as occupied.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::OccupancyGrid;
use crate::label::SemanticLabel;
use crate::mpi::MpiStack;

fn count_labels(labels: &[SemanticLabel]) -> BTreeMap<u8, u64> {
    let mut counts = [0u64; 256];
    for l in labels {
        counts[l.id() as usize] += 1;
    }
    (0..=255u8)
        .filter(|&i| counts[i as usize] > 0)
        .map(|i| (i, counts[i as usize]))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridStats {
    pub dims: [usize; 3],
    pub voxels: u64,
    pub occupied: u64,
    pub occupancy_fraction: f64,
    /// Voxel count per label id, nonzero entries only.
    pub class_counts: BTreeMap<u8, u64>,
}

pub fn grid_stats(grid: &OccupancyGrid) -> GridStats {
    let class_counts = count_labels(grid.labels());
    let voxels = grid.labels().len() as u64;
    let occupied = voxels - class_counts.get(&0).copied().unwrap_or(0);
    GridStats {
        dims: grid.spec().dims(),
        voxels,
        occupied,
        occupancy_fraction: occupied as f64 / voxels as f64,
        class_counts,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackStats {
    /// `[N, D, H, W]`.
    pub shape: [usize; 4],
    pub cells: u64,
    pub occupied: u64,
    pub occupancy_fraction: f64,
    pub class_counts: BTreeMap<u8, u64>,
    /// Fraction of non-FREE pixels on plane `l`, pooled over views.
    pub plane_fill_rates: Vec<f64>,
}

pub fn stack_stats(stack: &MpiStack) -> StackStats {
    let [n, d, h, w] = stack.shape();
    let labels = stack.labels();
    let class_counts = count_labels(labels);
    let cells = labels.len() as u64;
    let occupied = cells - class_counts.get(&0).copied().unwrap_or(0);
    let mut filled = vec![0u64; d];
    for (i, plane) in labels.chunks(h * w).enumerate() {
        filled[i % d] += plane.iter().filter(|l| !l.is_free()).count() as u64;
    }
    let per_plane = (n * h * w) as f64;
    StackStats {
        shape: [n, d, h, w],
        cells,
        occupied,
        occupancy_fraction: occupied as f64 / cells as f64,
        class_counts,
        plane_fill_rates: filled.into_iter().map(|f| f as f64 / per_plane).collect(),
    }
}

#[cfg(test)]
mod tests {
    use nalgebra::{Matrix3, Vector3};

    use super::*;
    use crate::geometry::{CameraModel, CameraRig, GridSpec};
    use crate::mpi::{build_rig_mpi, MpiConfig};

    #[test]
    fn empty_and_single_voxel() {
        let spec = GridSpec::new([4, 5, 6], [0.0; 3], 1.0).unwrap();
        let mut g = OccupancyGrid::empty(spec);
        assert_eq!(grid_stats(&g).occupancy_fraction, 0.0);
        g.set([1, 2, 3], SemanticLabel::CAR);
        let s = grid_stats(&g);
        assert_eq!(s.occupancy_fraction, 1.0 / 120.0);
        assert_eq!(s.class_counts[&4], 1);
        assert_eq!(s.class_counts[&0], 119);
    }

    #[test]
    fn fill_rates_match_recount() {
        let spec = GridSpec::new([6, 6, 6], [-3.0, -3.0, 0.0], 1.0).unwrap();
        let mut g = OccupancyGrid::empty(spec);
        for ix in 0..6 {
            for iy in 0..3 {
                g.set([ix, iy, 3], SemanticLabel::MANMADE);
            }
        }
        let cam = CameraModel::pinhole(
            3.0,
            3.0,
            3.0,
            3.0,
            Matrix3::identity(),
            Vector3::new(0.0, 0.0, 0.0),
            6,
            6,
        )
        .unwrap();
        let rig = CameraRig::new(vec![cam.clone(), cam], vec!["a".into(), "b".into()]).unwrap();
        let stack = build_rig_mpi(&g, &rig, &MpiConfig::new(5, 0.0, 5.0, 6, 6).unwrap());
        let s = stack_stats(&stack);
        for l in 0..5 {
            let mut hits = 0;
            for view in 0..2 {
                for v in 0..6 {
                    for u in 0..6 {
                        hits += usize::from(!stack.get(view, l, v, u).is_free());
                    }
                }
            }
            assert_eq!(s.plane_fill_rates[l], hits as f64 / 72.0);
        }
        assert!(s.plane_fill_rates[3] > 0.0);
    }
}
