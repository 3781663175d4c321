//! Semantic class indices for occupancy voxels.
//!
//! Index 0 is free space, 1..=16 are the nuScenes-occupancy classes in their
//! benchmark column order, and 255 marks voxels with unknown state.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One voxel or pixel class index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
#[repr(transparent)]
pub struct SemanticLabel(u8);

/// Names of classes 1..=16, in index order.
pub const CLASS_NAMES: [&str; 16] = [
    "barrier",
    "bicycle",
    "bus",
    "car",
    "construction vehicle",
    "motorcycle",
    "pedestrian",
    "traffic cone",
    "trailer",
    "truck",
    "driveable surface",
    "other flat",
    "sidewalk",
    "terrain",
    "manmade",
    "vegetation",
];

impl SemanticLabel {
    pub const FREE: Self = Self(0);
    pub const BARRIER: Self = Self(1);
    pub const BICYCLE: Self = Self(2);
    pub const BUS: Self = Self(3);
    pub const CAR: Self = Self(4);
    pub const CONSTRUCTION_VEHICLE: Self = Self(5);
    pub const MOTORCYCLE: Self = Self(6);
    pub const PEDESTRIAN: Self = Self(7);
    pub const TRAFFIC_CONE: Self = Self(8);
    pub const TRAILER: Self = Self(9);
    pub const TRUCK: Self = Self(10);
    pub const DRIVEABLE_SURFACE: Self = Self(11);
    pub const OTHER_FLAT: Self = Self(12);
    pub const SIDEWALK: Self = Self(13);
    pub const TERRAIN: Self = Self(14);
    pub const MANMADE: Self = Self(15);
    pub const VEGETATION: Self = Self(16);
    pub const UNKNOWN: Self = Self(255);

    /// Number of named occupied classes.
    pub const NUM_CLASSES: usize = 16;

    pub fn new(id: u8) -> Result<Self> {
        if Self::is_valid_id(id) {
            Ok(Self(id))
        } else {
            Err(Error::InvalidLabel(id))
        }
    }

    #[inline]
    pub const fn is_valid_id(id: u8) -> bool {
        id <= 16 || id == 255
    }

    #[inline]
    pub const fn id(self) -> u8 {
        self.0
    }

    #[inline]
    pub const fn is_free(self) -> bool {
        self.0 == 0
    }

    pub fn name(self) -> &'static str {
        match self.0 {
            0 => "free",
            255 => "unknown",
            id => CLASS_NAMES[id as usize - 1],
        }
    }

    /// The ten object classes (barrier through truck).
    pub fn object_classes() -> impl Iterator<Item = SemanticLabel> {
        (1..=10).map(SemanticLabel)
    }

    /// Every occupied named class, 1..=16.
    pub fn named_classes() -> impl Iterator<Item = SemanticLabel> {
        (1..=16).map(SemanticLabel)
    }
}

impl TryFrom<u8> for SemanticLabel {
    type Error = Error;

    fn try_from(id: u8) -> Result<Self> {
        Self::new(id)
    }
}

impl From<SemanticLabel> for u8 {
    fn from(label: SemanticLabel) -> u8 {
        label.0
    }
}

impl fmt::Debug for SemanticLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name(), self.0)
    }
}

impl fmt::Display for SemanticLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.0, self.name())
    }
}
