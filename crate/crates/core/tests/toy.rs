use mpi_forge::mpi::MpiSlab;
use mpi_forge::toy::{
    attention, attention_weights, embed_slab, embedding_table, mpi_encode, neighbor_mix, run_gradcheck, Conv1x1Params,
    DenseTensor, MixParams, EMBED_DIM,
};
use mpi_forge::SemanticLabel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rand_tensor(rng: &mut ChaCha8Rng, dims: &[usize], scale: f64) -> DenseTensor {
    DenseTensor::from_fn(dims, |_| rng.gen_range(-scale..scale))
}

#[test]
fn attention_rows_are_distributions() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..50 {
        let (n, m, d) = (rng.gen_range(1..8), rng.gen_range(1..8), rng.gen_range(1..6));
        let q = rand_tensor(&mut rng, &[n, d], 20.0);
        let k = rand_tensor(&mut rng, &[m, d], 20.0);
        let w = attention_weights(&q, &k).unwrap();
        for row in w.data().chunks(m) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
    }
}

#[test]
fn attention_output_stays_in_value_hull() {
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    for _ in 0..50 {
        let (n, m, d, dv) = (
            rng.gen_range(1..6),
            rng.gen_range(1..6),
            rng.gen_range(1..5),
            rng.gen_range(1..5),
        );
        let q = rand_tensor(&mut rng, &[n, d], 3.0);
        let k = rand_tensor(&mut rng, &[m, d], 3.0);
        let v = rand_tensor(&mut rng, &[m, dv], 3.0);
        let out = attention(&q, &k, &v).unwrap();
        for j in 0..dv {
            let col: Vec<f64> = (0..m).map(|r| v.data()[r * dv + j]).collect();
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for i in 0..n {
                let x = out.data()[i * dv + j];
                assert!(x >= lo - 1e-12 && x <= hi + 1e-12);
            }
        }
    }
}

#[test]
fn zero_gates_leave_features_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let h = rand_tensor(&mut rng, &[6, 4], 2.0);
    let left = rand_tensor(&mut rng, &[5, 4], 2.0);
    let right = rand_tensor(&mut rng, &[7, 4], 2.0);
    let mut params = MixParams::init(&mut rng, 4);
    assert_eq!(neighbor_mix(&h, [&left, &right], &params).unwrap(), h);
    params.neighbors[0].gate = 0.5;
    assert_ne!(neighbor_mix(&h, [&left, &right], &params).unwrap(), h);
}

#[test]
fn encoder_keeps_spatial_dims_with_default_embedding() {
    let mut rng = ChaCha8Rng::seed_from_u64(54);
    let (d, h, w) = (5, 6, 9);
    let labels = (0..d * h * w)
        .map(|_| SemanticLabel::new(rng.gen_range(0..=16)).unwrap())
        .collect();
    let slab = MpiSlab::new(d, h, w, labels).unwrap();
    let table = embedding_table(&mut rng, EMBED_DIM);
    let x = embed_slab(&slab, &table).unwrap();
    assert_eq!(EMBED_DIM, 8);
    assert_eq!(x.dims(), &[d * 8, h, w]);
    let layers = vec![
        Conv1x1Params::random(&mut rng, d * 8, 16),
        Conv1x1Params::random(&mut rng, 16, 12),
        Conv1x1Params::random(&mut rng, 12, 8),
    ];
    let feats = mpi_encode(&x, &layers).unwrap();
    let channels: Vec<_> = feats.iter().map(|f| f.dims().to_vec()).collect();
    assert_eq!(channels, vec![vec![16, h, w], vec![12, h, w], vec![8, h, w]]);
    assert!(feats.iter().all(|f| f.data().iter().all(|&v| v >= 0.0)));
}

#[test]
fn gradcheck_suite_passes() {
    let report = run_gradcheck(3, 2, 1e-5).unwrap();
    assert!(report.passes(1e-4), "{report}");
}
