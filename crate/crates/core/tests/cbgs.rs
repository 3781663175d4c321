use std::collections::HashSet;

use mpi_forge::cbgs::{balance_report, build_sampling_plan, synthetic_frame, DatasetIndex};
use mpi_forge::SemanticLabel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn label(id: u8) -> SemanticLabel {
    SemanticLabel::new(id).unwrap()
}

/// Frames where class 4 is everywhere and a few rare classes appear in
/// roughly `1 / ratio` of them.
fn skewed_index(rng: &mut ChaCha8Rng, frames: usize, ratio: f64) -> DatasetIndex {
    let records = (0..frames)
        .map(|i| {
            let mut classes = vec![label(4), label(11)];
            for c in [3u8, 7, 9] {
                if rng.gen_bool(1.0 / ratio) {
                    classes.push(label(c));
                }
            }
            synthetic_frame(format!("frame_{i:05}"), &classes)
        })
        .collect();
    DatasetIndex::new(records).unwrap()
}

#[test]
fn plan_is_deterministic_per_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let index = skewed_index(&mut rng, 200, 6.0);
    let a = build_sampling_plan(&index, 400, 7).unwrap();
    let b = build_sampling_plan(&index, 400, 7).unwrap();
    let c = build_sampling_plan(&index, 400, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.entries, c.entries);
}

#[test]
fn every_frame_is_covered() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for target in [1, 50, 200, 900] {
        let index = skewed_index(&mut rng, 150, 5.0);
        let plan = build_sampling_plan(&index, target, 3).unwrap();
        let seen: HashSet<&str> = plan.entries.iter().map(String::as_str).collect();
        assert_eq!(seen.len(), index.len());
        assert!(plan.entries.len() >= target.max(index.len()));
        assert!(plan.entries.len() <= target + index.len());
    }
}

#[test]
fn balance_improves_on_skewed_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for ratio in [4.0, 8.0, 20.0] {
        let index = skewed_index(&mut rng, 400, ratio);
        let plan = build_sampling_plan(&index, 2000, 11).unwrap();
        let report = balance_report(&plan, &index).unwrap();
        assert!(report.ratio_before >= 3.0, "ratio {ratio}: {report:?}");
        assert!(report.ratio_after < report.ratio_before, "ratio {ratio}: {report:?}");
        // Classes 4 and 11 are in every frame, so exact balance is out of reach.
        assert!(
            report.ratio_after <= report.ratio_before / 1.5,
            "ratio {ratio}: {report:?}"
        );
    }
}

#[test]
fn empty_and_unknown_inputs_are_rejected() {
    assert!(build_sampling_plan(&DatasetIndex::default(), 10, 0).is_err());
    let index = DatasetIndex::new(vec![synthetic_frame("a", &[label(1)])]).unwrap();
    let mut plan = build_sampling_plan(&index, 3, 0).unwrap();
    plan.entries.push("ghost".into());
    assert!(balance_report(&plan, &index).is_err());
}
