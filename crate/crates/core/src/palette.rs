//! Class colors and label-map colorization.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::SemanticLabel;
use crate::pixmap::{PixelMap, Rgb};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaletteEntry {
    pub name: String,
    pub rgb: Rgb,
}

/// Label → (name, color). FREE is always black.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Palette {
    entries: BTreeMap<SemanticLabel, PaletteEntry>,
}

const OCCUPANCY_COLORS: [Rgb; 16] = [
    [255, 120, 50],
    [255, 192, 203],
    [255, 255, 0],
    [0, 150, 245],
    [0, 255, 255],
    [200, 180, 0],
    [255, 0, 0],
    [255, 240, 150],
    [135, 60, 0],
    [160, 32, 240],
    [255, 0, 255],
    [139, 137, 137],
    [75, 0, 75],
    [150, 240, 80],
    [230, 230, 250],
    [0, 175, 0],
];

impl Palette {
    /// Validates coverage of ids 0..=16 and a black FREE entry.
    pub fn new(entries: BTreeMap<SemanticLabel, PaletteEntry>) -> Result<Self> {
        for id in 0..=16u8 {
            let label = SemanticLabel::new(id)?;
            if !entries.contains_key(&label) {
                return Err(Error::MissingPaletteEntry(label));
            }
        }
        if entries[&SemanticLabel::FREE].rgb != [0, 0, 0] {
            return Err(Error::config("palette must map FREE to black"));
        }
        Ok(Self { entries })
    }

    pub fn occupancy() -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(
            SemanticLabel::FREE,
            PaletteEntry {
                name: "free".into(),
                rgb: [0, 0, 0],
            },
        );
        for (label, rgb) in SemanticLabel::named_classes().zip(OCCUPANCY_COLORS) {
            entries.insert(
                label,
                PaletteEntry {
                    name: label.name().into(),
                    rgb,
                },
            );
        }
        Self { entries }
    }

    pub fn get(&self, label: SemanticLabel) -> Option<&PaletteEntry> {
        self.entries.get(&label)
    }

    pub fn entries(&self) -> &BTreeMap<SemanticLabel, PaletteEntry> {
        &self.entries
    }

    pub fn color(&self, label: SemanticLabel) -> Result<Rgb> {
        if label.is_free() {
            return Ok([0, 0, 0]);
        }
        self.entries
            .get(&label)
            .map(|e| e.rgb)
            .ok_or(Error::MissingPaletteEntry(label))
    }
}

impl Default for Palette {
    fn default() -> Self {
        Self::occupancy()
    }
}

pub fn colorize(map: &PixelMap<SemanticLabel>, palette: &Palette) -> Result<PixelMap<Rgb>> {
    let data = map
        .data()
        .iter()
        .map(|&l| palette.color(l))
        .collect::<Result<Vec<_>>>()?;
    PixelMap::from_vec(map.height(), map.width(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_renders_black() {
        let map = PixelMap::filled(3, 4, SemanticLabel::FREE);
        let img = colorize(&map, &Palette::occupancy()).unwrap();
        assert!(img.data().iter().all(|&c| c == [0, 0, 0]));
    }

    #[test]
    fn single_class_is_constant() {
        let map = PixelMap::filled(2, 2, SemanticLabel::CAR);
        let img = colorize(&map, &Palette::occupancy()).unwrap();
        assert!(img.data().iter().all(|&c| c == [0, 150, 245]));
    }

    #[test]
    fn checkerboard_alternates() {
        let pal = Palette::occupancy();
        let map = PixelMap::from_fn(5, 7, |v, u| {
            if (u + v) % 2 == 0 {
                SemanticLabel::TRAFFIC_CONE
            } else {
                SemanticLabel::VEGETATION
            }
        });
        let img = colorize(&map, &pal).unwrap();
        for v in 0..5 {
            for u in 0..7 {
                let want = if (u + v) % 2 == 0 { [255, 240, 150] } else { [0, 175, 0] };
                assert_eq!(*img.get(v, u), want, "cell ({v},{u})");
            }
        }
    }

    #[test]
    fn missing_entry_names_label() {
        let map = PixelMap::filled(1, 1, SemanticLabel::UNKNOWN);
        let err = colorize(&map, &Palette::occupancy()).unwrap_err();
        assert!(matches!(err, Error::MissingPaletteEntry(l) if l == SemanticLabel::UNKNOWN));
        assert!(err.to_string().contains("255"));
    }

    #[test]
    fn construction_requires_coverage() {
        let mut entries = Palette::occupancy().entries().clone();
        entries.remove(&SemanticLabel::BUS);
        assert!(matches!(Palette::new(entries), Err(Error::MissingPaletteEntry(l)) if l == SemanticLabel::BUS));
    }
}
