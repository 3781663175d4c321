//! Class-balanced grouping and sampling over occupancy frames.
//!
//! Every frame joins the group of each class it contains. The requested plan
//! length is split evenly across the non-empty class groups, each group fills
//! its quota from its own frames, frames never drawn are appended once, and
//! the result is shuffled. All randomness comes from a ChaCha8 stream seeded
//! by the caller.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::OccupancyGrid;
use crate::label::SemanticLabel;

/// Slots 0..=16; slot 0 (FREE) never counts as presence.
pub const CLASS_SLOTS: usize = 17;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame_id: String,
    pub grid: String,
    /// Bit `c` set when class `c` occurs in the frame.
    pub presence: u32,
    /// Voxel count per class id 0..=16.
    pub counts: [u64; CLASS_SLOTS],
}

impl FrameRecord {
    pub fn from_grid(frame_id: impl Into<String>, grid_path: impl Into<String>, grid: &OccupancyGrid) -> Self {
        let mut counts = [0u64; CLASS_SLOTS];
        for l in grid.labels() {
            if let Some(slot) = counts.get_mut(l.id() as usize) {
                *slot += 1;
            }
        }
        let presence = presence_from_counts(&counts);
        Self {
            frame_id: frame_id.into(),
            grid: grid_path.into(),
            presence,
            counts,
        }
    }

    #[inline]
    pub fn contains(&self, class: usize) -> bool {
        class > 0 && class < CLASS_SLOTS && self.presence & (1 << class) != 0
    }
}

fn presence_from_counts(counts: &[u64; CLASS_SLOTS]) -> u32 {
    (1..CLASS_SLOTS)
        .filter(|&c| counts[c] > 0)
        .fold(0, |acc, c| acc | (1 << c))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetIndex {
    pub frames: Vec<FrameRecord>,
}

impl DatasetIndex {
    pub fn new(frames: Vec<FrameRecord>) -> Result<Self> {
        let index = Self { frames };
        index.validate()?;
        Ok(index)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for f in &self.frames {
            if !seen.insert(f.frame_id.as_str()) {
                return Err(Error::config(format!("duplicate frame id {:?}", f.frame_id)));
            }
            if f.presence & !0x1_fffe != 0 || f.presence != presence_from_counts(&f.counts) {
                return Err(Error::config(format!(
                    "frame {:?}: presence bits {:#x} disagree with class counts",
                    f.frame_id, f.presence
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Number of frames containing each class id.
pub fn class_histogram(index: &DatasetIndex) -> [u64; CLASS_SLOTS] {
    let per_frame = Exec::default().map_range(index.frames.len(), |i| {
        let f = &index.frames[i];
        std::array::from_fn::<u64, CLASS_SLOTS, _>(|c| f.contains(c) as u64)
    });
    per_frame.into_iter().fold([0; CLASS_SLOTS], |mut acc, row| {
        for c in 0..CLASS_SLOTS {
            acc[c] += row[c];
        }
        acc
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum GroupSampling {
    /// Whole passes over the group, then a uniform draw without replacement
    /// for the remainder.
    #[default]
    Presence,
    /// Draws with replacement, weighted by the class's voxel count per frame.
    VoxelCount,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub seed: u64,
    pub entries: Vec<String>,
}

pub fn build_sampling_plan(index: &DatasetIndex, target_len: usize, seed: u64) -> Result<SamplingPlan> {
    build_sampling_plan_with(index, target_len, seed, GroupSampling::Presence)
}

pub fn build_sampling_plan_with(
    index: &DatasetIndex,
    target_len: usize,
    seed: u64,
    mode: GroupSampling,
) -> Result<SamplingPlan> {
    if index.is_empty() {
        return Err(Error::config("cannot build a sampling plan for an empty dataset"));
    }
    index.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut groups: Vec<(usize, Vec<usize>)> = (1..CLASS_SLOTS)
        .map(|c| {
            (
                c,
                (0..index.len())
                    .filter(|&i| index.frames[i].contains(c))
                    .collect::<Vec<_>>(),
            )
        })
        .filter(|(_, g)| !g.is_empty())
        .collect();
    if groups.is_empty() {
        groups.push((0, (0..index.len()).collect()));
    }

    let k = groups.len();
    let mut picks: Vec<usize> = Vec::with_capacity(target_len.max(index.len()));
    for (rank, (class, group)) in groups.iter().enumerate() {
        let quota = target_len / k + usize::from(rank < target_len % k);
        match mode {
            GroupSampling::VoxelCount if *class > 0 => {
                let weights: Vec<u64> = group.iter().map(|&i| index.frames[i].counts[*class]).collect();
                let dist = WeightedIndex::new(&weights).map_err(|e| Error::config(e.to_string()))?;
                picks.extend((0..quota).map(|_| group[dist.sample(&mut rng)]));
            }
            _ => {
                for _ in 0..quota / group.len() {
                    picks.extend_from_slice(group);
                }
                let rem = quota % group.len();
                let mut chosen: Vec<usize> = rand::seq::index::sample(&mut rng, group.len(), rem).into_vec();
                chosen.sort_unstable();
                picks.extend(chosen.into_iter().map(|j| group[j]));
            }
        }
    }

    let mut drawn = vec![false; index.len()];
    for &i in &picks {
        drawn[i] = true;
    }
    picks.extend((0..index.len()).filter(|&i| !drawn[i]));
    picks.shuffle(&mut rng);

    Ok(SamplingPlan {
        seed,
        entries: picks.into_iter().map(|i| index.frames[i].frame_id.clone()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassExposure {
    pub before: u64,
    pub after: u64,
    pub before_frequency: f64,
    pub after_frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub dataset_len: usize,
    pub plan_len: usize,
    pub classes: BTreeMap<u8, ClassExposure>,
    /// max / min exposure over classes present in the dataset.
    pub ratio_before: f64,
    pub ratio_after: f64,
}

/// Per-class exposure when each frame is seen once (before) versus when the
/// plan is followed (after).
pub fn balance_report(plan: &SamplingPlan, index: &DatasetIndex) -> Result<BalanceReport> {
    if plan.entries.is_empty() {
        return Err(Error::config("sampling plan is empty"));
    }
    let by_id: HashMap<&str, &FrameRecord> = index.frames.iter().map(|f| (f.frame_id.as_str(), f)).collect();
    let before = class_histogram(index);
    let mut after = [0u64; CLASS_SLOTS];
    for id in &plan.entries {
        let frame = by_id
            .get(id.as_str())
            .ok_or_else(|| Error::config(format!("plan entry {id:?} is not in the dataset index")))?;
        for (c, slot) in after.iter_mut().enumerate() {
            *slot += frame.contains(c) as u64;
        }
    }
    let present: Vec<usize> = (1..CLASS_SLOTS).filter(|&c| before[c] > 0).collect();
    let ratio = |counts: &[u64; CLASS_SLOTS]| {
        let (lo, hi) = present
            .iter()
            .fold((u64::MAX, 0), |(lo, hi), &c| (lo.min(counts[c]), hi.max(counts[c])));
        if present.is_empty() {
            1.0
        } else {
            hi as f64 / lo as f64
        }
    };
    let classes = present
        .iter()
        .map(|&c| {
            (
                c as u8,
                ClassExposure {
                    before: before[c],
                    after: after[c],
                    before_frequency: before[c] as f64 / index.len() as f64,
                    after_frequency: after[c] as f64 / plan.entries.len() as f64,
                },
            )
        })
        .collect();
    Ok(BalanceReport {
        dataset_len: index.len(),
        plan_len: plan.entries.len(),
        classes,
        ratio_before: ratio(&before),
        ratio_after: ratio(&after),
    })
}

/// Frame record with the given classes present (one voxel each); handy for
/// synthetic datasets.
pub fn synthetic_frame(frame_id: impl Into<String>, classes: &[SemanticLabel]) -> FrameRecord {
    let mut counts = [0u64; CLASS_SLOTS];
    for c in classes {
        if let Some(slot) = counts.get_mut(c.id() as usize) {
            *slot += 1;
        }
    }
    counts[0] = 1;
    FrameRecord {
        frame_id: frame_id.into(),
        grid: String::new(),
        presence: presence_from_counts(&counts),
        counts,
    }
}
