//! Single-head scaled dot-product attention and the gated residual mixing
//! used for neighbor views (left/right) and neighbor frames (future/history).

use rand::Rng;

use super::tensor::DenseTensor;
use crate::error::{Error, Result};

fn softmax_rows(scores: &mut DenseTensor) {
    let cols = scores.cols();
    for row in scores.data_mut().chunks_mut(cols) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for x in row.iter_mut() {
            *x = (*x - max).exp();
            sum += *x;
        }
        for x in row.iter_mut() {
            *x /= sum;
        }
    }
}

fn check_qkv(q: &DenseTensor, k: &DenseTensor, v: &DenseTensor) -> Result<()> {
    q.require_matrix("attention query")?;
    k.require_matrix("attention key")?;
    v.require_matrix("attention value")?;
    if q.cols() == 0 {
        return Err(Error::config("attention feature size d must be positive"));
    }
    if q.cols() != k.cols() {
        return Err(Error::dims("attention key width", q.cols(), k.cols()));
    }
    if k.rows() != v.rows() {
        return Err(Error::dims("attention value rows", k.rows(), v.rows()));
    }
    Ok(())
}

/// Row-stochastic `softmax(Q·Kᵀ / √d)`.
pub fn attention_weights(q: &DenseTensor, k: &DenseTensor) -> Result<DenseTensor> {
    check_qkv(q, k, k)?;
    let mut s = q.matmul(&k.transpose()).scale(1.0 / (q.cols() as f64).sqrt());
    softmax_rows(&mut s);
    Ok(s)
}

/// `softmax(Q·Kᵀ / √d) · V` for `Q: [n, d]`, `K: [m, d]`, `V: [m, d_v]`.
pub fn attention(q: &DenseTensor, k: &DenseTensor, v: &DenseTensor) -> Result<DenseTensor> {
    check_qkv(q, k, v)?;
    Ok(attention_weights(q, k)?.matmul(v))
}

/// Gradients of `⟨d_out, attention(q, k, v)⟩` w.r.t. q, k and v.
pub fn attention_backward(
    q: &DenseTensor,
    k: &DenseTensor,
    v: &DenseTensor,
    d_out: &DenseTensor,
) -> Result<(DenseTensor, DenseTensor, DenseTensor)> {
    check_qkv(q, k, v)?;
    if d_out.dims() != [q.rows(), v.cols()] {
        return Err(Error::dims(
            "attention upstream gradient",
            [q.rows(), v.cols()],
            d_out.dims(),
        ));
    }
    let scale = 1.0 / (q.cols() as f64).sqrt();
    let p = attention_weights(q, k)?;
    let dv = p.transpose().matmul(d_out);
    let dp = d_out.matmul(&v.transpose());
    let (n, m) = (p.rows(), p.cols());
    let mut ds = vec![0.0; n * m];
    for i in 0..n {
        let dot: f64 = (0..m).map(|j| dp.at(i, j) * p.at(i, j)).sum();
        for j in 0..m {
            ds[i * m + j] = p.at(i, j) * (dp.at(i, j) - dot);
        }
    }
    let ds = DenseTensor::from_raw(vec![n, m], ds);
    let dq = ds.matmul(k).scale(scale);
    let dk = ds.transpose().matmul(q).scale(scale);
    Ok((dq, dk, dv))
}

/// Projections and output gate for one neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    pub w_q: DenseTensor,
    pub w_k: DenseTensor,
    pub w_v: DenseTensor,
    pub gate: f64,
}

impl AttentionParams {
    /// Random projections with the gate at zero.
    pub fn init<R: Rng>(rng: &mut R, d: usize) -> Self {
        let s = 1.0 / (d as f64).sqrt();
        let mut mat = || DenseTensor::from_fn(&[d, d], |_| rng.gen_range(-s..s));
        Self {
            w_q: mat(),
            w_k: mat(),
            w_v: mat(),
            gate: 0.0,
        }
    }

    fn check(&self, d: usize) -> Result<()> {
        for (name, w) in [("W_Q", &self.w_q), ("W_K", &self.w_k), ("W_V", &self.w_v)] {
            if w.dims() != [d, d] {
                return Err(Error::dims(
                    match name {
                        "W_Q" => "query projection",
                        "W_K" => "key projection",
                        _ => "value projection",
                    },
                    [d, d],
                    w.dims(),
                ));
            }
        }
        if !self.gate.is_finite() {
            return Err(Error::config("attention gate must be finite"));
        }
        Ok(())
    }

    fn zero_like(&self) -> Self {
        Self {
            w_q: DenseTensor::zeros(self.w_q.dims()),
            w_k: DenseTensor::zeros(self.w_k.dims()),
            w_v: DenseTensor::zeros(self.w_v.dims()),
            gate: 0.0,
        }
    }
}

/// Parameters for the two neighbors of a mixing block.
#[derive(Debug, Clone, PartialEq)]
pub struct MixParams {
    pub neighbors: [AttentionParams; 2],
}

impl MixParams {
    pub fn init<R: Rng>(rng: &mut R, d: usize) -> Self {
        Self {
            neighbors: [AttentionParams::init(rng, d), AttentionParams::init(rng, d)],
        }
    }
}

fn check_mix(h_in: &DenseTensor, neighbors: [&DenseTensor; 2], params: &MixParams) -> Result<usize> {
    h_in.require_matrix("hidden state")?;
    let d = h_in.cols();
    for h in neighbors {
        h.require_matrix("neighbor hidden state")?;
        if h.cols() != d {
            return Err(Error::dims("neighbor hidden width", d, h.cols()));
        }
    }
    for p in &params.neighbors {
        p.check(d)?;
    }
    Ok(d)
}

fn neighbor_term(h_in: &DenseTensor, h: &DenseTensor, p: &AttentionParams) -> Result<DenseTensor> {
    attention(&h_in.matmul(&p.w_q), &h.matmul(&p.w_k), &h.matmul(&p.w_v))
}

/// `h_in + Σ_i gate_i · Attention(h_in·W_Q_i, h_i·W_K_i, h_i·W_V_i)`.
/// Terms whose gate is exactly zero are skipped, so a freshly initialized
/// block returns `h_in` bit for bit.
pub fn neighbor_mix(h_in: &DenseTensor, neighbors: [&DenseTensor; 2], params: &MixParams) -> Result<DenseTensor> {
    check_mix(h_in, neighbors, params)?;
    let mut out = h_in.clone();
    for (h, p) in neighbors.into_iter().zip(&params.neighbors) {
        if p.gate != 0.0 {
            out.add_assign(&neighbor_term(h_in, h, p)?.scale(p.gate));
        }
    }
    Ok(out)
}

/// Mixing with the left and right camera views.
pub fn cross_view_mix(
    h_in: &DenseTensor,
    h_left: &DenseTensor,
    h_right: &DenseTensor,
    params: &MixParams,
) -> Result<DenseTensor> {
    neighbor_mix(h_in, [h_left, h_right], params)
}

/// Mixing with the same view in the future and history frames.
pub fn cross_frame_mix(
    h_in: &DenseTensor,
    h_future: &DenseTensor,
    h_history: &DenseTensor,
    params: &MixParams,
) -> Result<DenseTensor> {
    neighbor_mix(h_in, [h_future, h_history], params)
}

/// The ungated attention term for each neighbor.
pub fn neighbor_terms(
    h_in: &DenseTensor,
    neighbors: [&DenseTensor; 2],
    params: &MixParams,
) -> Result<[DenseTensor; 2]> {
    check_mix(h_in, neighbors, params)?;
    Ok([
        neighbor_term(h_in, neighbors[0], &params.neighbors[0])?,
        neighbor_term(h_in, neighbors[1], &params.neighbors[1])?,
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixGrads {
    pub h_in: DenseTensor,
    pub neighbors: [DenseTensor; 2],
    pub params: MixParams,
}

/// Gradients of `⟨d_out, neighbor_mix(..)⟩`.
pub fn neighbor_mix_backward(
    h_in: &DenseTensor,
    neighbors: [&DenseTensor; 2],
    params: &MixParams,
    d_out: &DenseTensor,
) -> Result<MixGrads> {
    check_mix(h_in, neighbors, params)?;
    d_out.same_dims(h_in, "mix upstream gradient")?;
    let mut d_h_in = d_out.clone();
    let mut d_nb = [
        DenseTensor::zeros(neighbors[0].dims()),
        DenseTensor::zeros(neighbors[1].dims()),
    ];
    let mut d_params = MixParams {
        neighbors: [params.neighbors[0].zero_like(), params.neighbors[1].zero_like()],
    };
    for i in 0..2 {
        let (h, p) = (neighbors[i], &params.neighbors[i]);
        let q = h_in.matmul(&p.w_q);
        let k = h.matmul(&p.w_k);
        let v = h.matmul(&p.w_v);
        let term = attention(&q, &k, &v)?;
        let dp = &mut d_params.neighbors[i];
        dp.gate = d_out.dot(&term);
        let (dq, dk, dv) = attention_backward(&q, &k, &v, &d_out.scale(p.gate))?;
        dp.w_q = h_in.transpose().matmul(&dq);
        dp.w_k = h.transpose().matmul(&dk);
        dp.w_v = h.transpose().matmul(&dv);
        d_h_in.add_assign(&dq.matmul(&p.w_q.transpose()));
        d_nb[i] = dk.matmul(&p.w_k.transpose()).add(&dv.matmul(&p.w_v.transpose()));
    }
    Ok(MixGrads {
        h_in: d_h_in,
        neighbors: d_nb,
        params: d_params,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn rand_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DenseTensor {
        DenseTensor::from_fn(&[r, c], |_| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn single_token_returns_value() {
        let q = DenseTensor::new(&[1, 2], vec![0.3, -0.7]).unwrap();
        let k = DenseTensor::new(&[1, 2], vec![1.5, 2.0]).unwrap();
        let v = DenseTensor::new(&[1, 3], vec![4.0, 5.0, 6.0]).unwrap();
        assert_eq!(attention(&q, &k, &v).unwrap(), v);
    }

    #[test]
    fn identical_keys_average_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = rand_mat(&mut rng, 3, 2);
        let k = DenseTensor::from_fn(&[4, 2], |i| [0.5, -1.0][i % 2]);
        let v = rand_mat(&mut rng, 4, 3);
        let out = attention(&q, &k, &v).unwrap();
        for c in 0..3 {
            let mean = (0..4).map(|r| v.at(r, c)).sum::<f64>() / 4.0;
            for r in 0..3 {
                assert!((out.at(r, c) - mean).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn scalar_closed_form() {
        let q = DenseTensor::new(&[1, 1], vec![1.0]).unwrap();
        let k = DenseTensor::new(&[2, 1], vec![0.0, 1.0]).unwrap();
        let v = DenseTensor::new(&[2, 1], vec![0.0, 1.0]).unwrap();
        let e = 1f64.exp();
        let out = attention(&q, &k, &v).unwrap();
        assert!((out.data()[0] - e / (1.0 + e)).abs() < 1e-15);
        assert!((out.data()[0] - 0.731059).abs() < 1e-6);
    }

    #[test]
    fn rejects_zero_width_and_mismatch() {
        let z = DenseTensor::from_raw(vec![1, 0], vec![]);
        assert!(attention(&z, &z, &z).is_err());
        let q = DenseTensor::zeros(&[2, 3]);
        let k = DenseTensor::zeros(&[2, 2]);
        assert!(attention(&q, &k, &k).is_err());
    }

    #[test]
    fn zero_gate_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let params = MixParams::init(&mut rng, 4);
        let h = rand_mat(&mut rng, 3, 4);
        let l = rand_mat(&mut rng, 5, 4);
        let r = rand_mat(&mut rng, 2, 4);
        let out = cross_view_mix(&h, &l, &r, &params).unwrap();
        assert!(out.data().iter().zip(h.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
        let out = cross_frame_mix(&h, &l, &r, &params).unwrap();
        assert!(out.data().iter().zip(h.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn symmetric_neighbors_double_one_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut p = AttentionParams::init(&mut rng, 3);
        p.gate = 0.7;
        let params = MixParams {
            neighbors: [p.clone(), p],
        };
        let h = rand_mat(&mut rng, 3, 3);
        let n = rand_mat(&mut rng, 4, 3);
        let out = cross_view_mix(&h, &n, &n, &params).unwrap();
        let one = neighbor_terms(&h, [&n, &n], &params).unwrap()[0].scale(0.7);
        for i in 0..out.len() {
            assert!((out.data()[i] - h.data()[i] - 2.0 * one.data()[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn dim_mismatch_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = MixParams::init(&mut rng, 4);
        let h = DenseTensor::zeros(&[2, 4]);
        let bad = DenseTensor::zeros(&[2, 3]);
        assert!(cross_view_mix(&h, &bad, &h, &params).is_err());
        let h3 = DenseTensor::zeros(&[2, 3]);
        assert!(cross_frame_mix(&h3, &h3, &h3, &params).is_err());
    }
}
