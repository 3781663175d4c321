//! JSON artifacts: camera rigs, palettes, sampling plans and dataset indexes.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{invalid, json_err, read_bytes, write_bytes};
use crate::cbgs::{DatasetIndex, SamplingPlan};
use crate::error::{FormatError, Result};
use crate::geometry::{CameraModel, CameraRig};
use crate::label::SemanticLabel;
use crate::palette::{Palette, PaletteEntry};

/// One camera: `K` is the 3×3 intrinsic matrix and `T` the 3×4
/// camera-to-world transform `[R | t]`, both row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraEntry {
    pub name: String,
    #[serde(rename = "K")]
    pub k: [[f64; 3]; 3],
    #[serde(rename = "T")]
    pub t: [[f64; 4]; 3],
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigFile {
    pub cameras: Vec<CameraEntry>,
}

impl RigFile {
    pub fn from_rig(rig: &CameraRig) -> Self {
        let cameras = rig
            .iter()
            .map(|(name, cam)| {
                let (k, r, t) = (cam.intrinsics(), cam.rotation(), cam.translation());
                CameraEntry {
                    name: name.to_owned(),
                    k: std::array::from_fn(|i| std::array::from_fn(|j| k[(i, j)])),
                    t: std::array::from_fn(|i| std::array::from_fn(|j| if j < 3 { r[(i, j)] } else { t[i] })),
                    width: cam.width(),
                    height: cam.height(),
                }
            })
            .collect();
        Self { cameras }
    }

    pub fn to_rig(&self, format: &'static str) -> Result<CameraRig, FormatError> {
        let mut cams = Vec::with_capacity(self.cameras.len());
        for c in &self.cameras {
            let k = Matrix3::from_fn(|i, j| c.k[i][j]);
            let r = Matrix3::from_fn(|i, j| c.t[i][j]);
            let t = Vector3::from_fn(|i, _| c.t[i][3]);
            cams.push(CameraModel::new(k, r, t, c.width, c.height).map_err(|e| invalid(format, "camera", e))?);
        }
        let names = self.cameras.iter().map(|c| c.name.clone()).collect();
        CameraRig::new(cams, names).map_err(|e| invalid(format, "rig", e))
    }
}

fn pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable");
    out.push(b'\n');
    out
}

fn parse<T: DeserializeOwned>(format: &'static str, bytes: &[u8]) -> Result<T, FormatError> {
    serde_json::from_slice(bytes).map_err(|e| json_err(format, e))
}

pub fn encode_rig(rig: &CameraRig) -> Vec<u8> {
    pretty(&RigFile::from_rig(rig))
}

pub fn decode_rig(bytes: &[u8]) -> Result<CameraRig, FormatError> {
    parse::<RigFile>("rig", bytes)?.to_rig("rig")
}

/// Palette files map decimal label ids to `{"name", "rgb"}`.
pub fn encode_palette(palette: &Palette) -> Vec<u8> {
    let map: BTreeMap<u8, &PaletteEntry> = palette.entries().iter().map(|(l, e)| (l.id(), e)).collect();
    pretty(&map)
}

pub fn decode_palette(bytes: &[u8]) -> Result<Palette, FormatError> {
    let raw: BTreeMap<String, PaletteEntry> = parse("palette", bytes)?;
    let mut entries = BTreeMap::new();
    for (key, entry) in raw {
        let id: u8 = key
            .parse()
            .map_err(|_| invalid("palette", "label key", format!("{key:?} is not a label id")))?;
        let label = SemanticLabel::new(id).map_err(|e| invalid("palette", "label key", e))?;
        entries.insert(label, entry);
    }
    Palette::new(entries).map_err(|e| invalid("palette", "entries", e))
}

pub fn encode_plan(plan: &SamplingPlan) -> Vec<u8> {
    pretty(plan)
}

pub fn decode_plan(bytes: &[u8]) -> Result<SamplingPlan, FormatError> {
    parse("plan", bytes)
}

pub fn encode_index(index: &DatasetIndex) -> Vec<u8> {
    pretty(index)
}

pub fn decode_index(bytes: &[u8]) -> Result<DatasetIndex, FormatError> {
    let index: DatasetIndex = parse("index", bytes)?;
    index.validate().map_err(|e| invalid("index", "frames", e))?;
    Ok(index)
}

pub fn read_rig(path: impl AsRef<Path>) -> Result<CameraRig> {
    Ok(decode_rig(&read_bytes(path.as_ref())?)?)
}

pub fn write_rig(path: impl AsRef<Path>, rig: &CameraRig) -> Result<()> {
    write_bytes(path.as_ref(), &encode_rig(rig))
}

pub fn read_palette(path: impl AsRef<Path>) -> Result<Palette> {
    Ok(decode_palette(&read_bytes(path.as_ref())?)?)
}

pub fn write_palette(path: impl AsRef<Path>, palette: &Palette) -> Result<()> {
    write_bytes(path.as_ref(), &encode_palette(palette))
}

pub fn read_plan(path: impl AsRef<Path>) -> Result<SamplingPlan> {
    Ok(decode_plan(&read_bytes(path.as_ref())?)?)
}

pub fn write_plan(path: impl AsRef<Path>, plan: &SamplingPlan) -> Result<()> {
    write_bytes(path.as_ref(), &encode_plan(plan))
}

pub fn read_index(path: impl AsRef<Path>) -> Result<DatasetIndex> {
    Ok(decode_index(&read_bytes(path.as_ref())?)?)
}

pub fn write_index(path: impl AsRef<Path>, index: &DatasetIndex) -> Result<()> {
    write_bytes(path.as_ref(), &encode_index(index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbgs::synthetic_frame;

    fn rig() -> CameraRig {
        let a = CameraModel::pinhole(
            1266.4,
            1266.4,
            816.3,
            491.5,
            CameraModel::yaw_rotation(0.3),
            Vector3::new(1.0, -0.5, 1.6),
            1600,
            900,
        )
        .unwrap();
        let b = CameraModel::pinhole(
            500.0,
            500.0,
            320.0,
            240.0,
            Matrix3::identity(),
            Vector3::zeros(),
            640,
            480,
        )
        .unwrap();
        CameraRig::new(vec![a, b], vec!["front".into(), "aux".into()]).unwrap()
    }

    #[test]
    fn rig_round_trip() {
        let r = rig();
        let bytes = encode_rig(&r);
        let back = decode_rig(&bytes).unwrap();
        assert_eq!(back, r);
        assert_eq!(encode_rig(&back), bytes);
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.contains("\"K\"") && text.contains("\"T\""));
    }

    #[test]
    fn rig_rejects_bad_camera() {
        let text = r#"{"cameras":[{"name":"c","K":[[0,0,1],[0,1,1],[0,0,1]],"T":[[1,0,0,0],[0,1,0,0],[0,0,1,0]],"width":4,"height":4}]}"#;
        assert!(matches!(
            decode_rig(text.as_bytes()),
            Err(FormatError::InvalidValue { .. })
        ));
        assert!(matches!(decode_rig(b"{\"cameras\":["), Err(FormatError::Json { .. })));
    }

    #[test]
    fn palette_round_trip_and_keys() {
        let p = Palette::occupancy();
        let bytes = encode_palette(&p);
        let text = std::str::from_utf8(&bytes).unwrap();
        assert!(text.contains("\"8\""));
        assert_eq!(decode_palette(&bytes).unwrap(), p);
        let missing = text.replacen("\"16\"", "\"17\"", 1);
        assert!(decode_palette(missing.as_bytes()).is_err());
    }

    #[test]
    fn plan_and_index_round_trip() {
        let plan = SamplingPlan {
            seed: 7,
            entries: vec!["frame_0012".into(), "frame_0003".into()],
        };
        let bytes = encode_plan(&plan);
        assert_eq!(decode_plan(&bytes).unwrap(), plan);
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v["seed"], 7);
        assert_eq!(v["entries"][0], "frame_0012");

        let index = DatasetIndex::new(vec![synthetic_frame("a", &[SemanticLabel::CAR])]).unwrap();
        assert_eq!(decode_index(&encode_index(&index)).unwrap(), index);
    }
}
