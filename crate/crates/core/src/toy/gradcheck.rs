//! Central-difference verification of every backward pass in the toy blocks.
//!
//! Each op is reduced to a scalar `⟨r, op(x)⟩` with a random probe `r`, so the
//! analytic gradient of that scalar is exactly what the backward pass returns
//! for upstream gradient `r`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::attention::{
    attention, attention_backward, neighbor_mix, neighbor_mix_backward, AttentionParams, MixParams,
};
use super::encoder::{
    embed_slab, embed_slab_backward, min_abs_preactivation, mpi_encode, mpi_encode_backward, Conv1x1Params, EMBED_ROWS,
};
use super::loss::{reweighed_loss, reweighed_loss_backward};
use super::tensor::DenseTensor;
use crate::error::{Error, Result};
use crate::label::SemanticLabel;
use crate::mpi::MpiSlab;

/// Gradient magnitudes below this are compared in absolute terms.
pub const GRAD_FLOOR: f64 = 1e-6;

/// Pre-activations closer than this to zero are resampled, so a step of `h`
/// never crosses the ReLU kink.
const KINK_MARGIN: f64 = 1e-3;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(GRAD_FLOOR)
}

/// Max relative error between `analytic` and the central differences of `f`
/// at `x`.
pub fn finite_diff_gradcheck(f: impl Fn(&[f64]) -> f64, x: &[f64], analytic: &[f64], h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::config(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    if x.len() != analytic.len() {
        return Err(Error::dims("analytic gradient", x.len(), analytic.len()));
    }
    let mut probe = x.to_vec();
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        worst = worst.max(relative_error(analytic[i], (up - down) / (2.0 * h)));
    }
    Ok(worst)
}

/// Packs several tensors into one flat vector and back.
struct Layout(Vec<Vec<usize>>);

impl Layout {
    fn of(ts: &[&DenseTensor]) -> (Self, Vec<f64>) {
        let flat = ts.iter().flat_map(|t| t.data().iter().copied()).collect();
        (Self(ts.iter().map(|t| t.dims().to_vec()).collect()), flat)
    }

    fn unpack(&self, flat: &[f64]) -> Vec<DenseTensor> {
        let mut at = 0;
        self.0
            .iter()
            .map(|d| {
                let n: usize = d.iter().product();
                let t = DenseTensor::from_raw(d.clone(), flat[at..at + n].to_vec());
                at += n;
                t
            })
            .collect()
    }
}

fn flatten(ts: &[&DenseTensor]) -> Vec<f64> {
    ts.iter().flat_map(|t| t.data().iter().copied()).collect()
}

fn rand_tensor(rng: &mut ChaCha8Rng, dims: &[usize]) -> DenseTensor {
    DenseTensor::from_fn(dims, |_| rng.gen_range(-1.0..1.0))
}

fn encoder_case(seed: u64, h: f64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (cin, hh, ww) = (4, 3, 2);
    let widths = [5, 3];
    let (x, layers) = loop {
        let x = rand_tensor(&mut rng, &[cin, hh, ww]);
        let layers = vec![
            Conv1x1Params::random(&mut rng, cin, widths[0]),
            Conv1x1Params::random(&mut rng, widths[0], widths[1]),
        ];
        if min_abs_preactivation(&x, &layers)? > KINK_MARGIN {
            break (x, layers);
        }
    };
    let probes: Vec<DenseTensor> = widths.iter().map(|&c| rand_tensor(&mut rng, &[c, hh, ww])).collect();
    let grads = mpi_encode_backward(&x, &layers, &probes)?;
    let mut parts = vec![&x];
    for l in &layers {
        parts.push(&l.weight);
        parts.push(&l.bias);
    }
    let (layout, flat) = Layout::of(&parts);
    let mut analytic = grads.input.data().to_vec();
    for g in &grads.layers {
        analytic.extend_from_slice(g.weight.data());
        analytic.extend_from_slice(g.bias.data());
    }
    let f = |p: &[f64]| {
        let ts = layout.unpack(p);
        let layers: Vec<Conv1x1Params> = ts[1..]
            .chunks(2)
            .map(|wb| Conv1x1Params {
                weight: wb[0].clone(),
                bias: wb[1].clone(),
            })
            .collect();
        let out = mpi_encode(&ts[0], &layers).expect("shapes fixed");
        out.iter().zip(&probes).map(|(y, r)| y.dot(r)).sum()
    };
    finite_diff_gradcheck(f, &flat, &analytic, h)
}

fn embedding_case(seed: u64, h: f64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (d, hh, ww, e) = (3, 2, 3, 4);
    let labels = (0..d * hh * ww)
        .map(|_| SemanticLabel::new(rng.gen_range(0..=16)).expect("valid id"))
        .collect();
    let slab = MpiSlab::new(d, hh, ww, labels)?;
    let table = rand_tensor(&mut rng, &[EMBED_ROWS, e]);
    let probe = rand_tensor(&mut rng, &[d * e, hh, ww]);
    let analytic = embed_slab_backward(&slab, &table, &probe);
    let f = |p: &[f64]| {
        let t = DenseTensor::from_raw(vec![EMBED_ROWS, e], p.to_vec());
        embed_slab(&slab, &t).expect("shapes fixed").dot(&probe)
    };
    finite_diff_gradcheck(f, table.data(), analytic.data(), h)
}

fn attention_case(seed: u64, h: f64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, m, d, dv) = (3, 4, 5, 2);
    let q = rand_tensor(&mut rng, &[n, d]);
    let k = rand_tensor(&mut rng, &[m, d]);
    let v = rand_tensor(&mut rng, &[m, dv]);
    let probe = rand_tensor(&mut rng, &[n, dv]);
    let (dq, dk, dvv) = attention_backward(&q, &k, &v, &probe)?;
    let (layout, flat) = Layout::of(&[&q, &k, &v]);
    let f = |p: &[f64]| {
        let ts = layout.unpack(p);
        attention(&ts[0], &ts[1], &ts[2]).expect("shapes fixed").dot(&probe)
    };
    finite_diff_gradcheck(f, &flat, &flatten(&[&dq, &dk, &dvv]), h)
}

fn mix_case(seed: u64, h: f64, zero_gates: bool) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, d) = (3, 4);
    let mut params = MixParams::init(&mut rng, d);
    if !zero_gates {
        for p in &mut params.neighbors {
            p.gate = rng.gen_range(-1.5..1.5);
        }
    }
    let h_in = rand_tensor(&mut rng, &[n, d]);
    let a = rand_tensor(&mut rng, &[2, d]);
    let b = rand_tensor(&mut rng, &[5, d]);
    let probe = rand_tensor(&mut rng, &[n, d]);
    let g = neighbor_mix_backward(&h_in, [&a, &b], &params, &probe)?;
    let [p0, p1] = &params.neighbors;
    let gates = DenseTensor::from_raw(vec![2], vec![p0.gate, p1.gate]);
    let (layout, flat) = Layout::of(&[
        &h_in, &a, &b, &p0.w_q, &p0.w_k, &p0.w_v, &p1.w_q, &p1.w_k, &p1.w_v, &gates,
    ]);
    let [g0, g1] = &g.params.neighbors;
    let d_gates = DenseTensor::from_raw(vec![2], vec![g0.gate, g1.gate]);
    let analytic = flatten(&[
        &g.h_in,
        &g.neighbors[0],
        &g.neighbors[1],
        &g0.w_q,
        &g0.w_k,
        &g0.w_v,
        &g1.w_q,
        &g1.w_k,
        &g1.w_v,
        &d_gates,
    ]);
    let f = |p: &[f64]| {
        let ts = layout.unpack(p);
        let mk = |i: usize, gate: f64| AttentionParams {
            w_q: ts[i].clone(),
            w_k: ts[i + 1].clone(),
            w_v: ts[i + 2].clone(),
            gate,
        };
        let params = MixParams {
            neighbors: [mk(3, ts[9].data()[0]), mk(6, ts[9].data()[1])],
        };
        neighbor_mix(&ts[0], [&ts[1], &ts[2]], &params)
            .expect("shapes fixed")
            .dot(&probe)
    };
    finite_diff_gradcheck(f, &flat, &analytic, h)
}

fn loss_case(seed: u64, h: f64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = [2, 3, 4];
    let pred = rand_tensor(&mut rng, &dims);
    let truth = rand_tensor(&mut rng, &dims);
    let w = DenseTensor::from_fn(&[3, 4], |_| rng.gen_range(0.0..4.0));
    let analytic = reweighed_loss_backward(&pred, &truth, &w)?;
    let f = |p: &[f64]| {
        let pred = DenseTensor::from_raw(dims.to_vec(), p.to_vec());
        reweighed_loss(&pred, &truth, &w).expect("shapes fixed")
    };
    finite_diff_gradcheck(f, pred.data(), analytic.data(), h)
}

/// Ops covered by [`run_gradcheck`], in report order.
pub const GRADCHECK_OPS: [&str; 6] = [
    "mpi_encode",
    "embedding",
    "attention",
    "mix_gated",
    "mix_zero_init",
    "reweighed_loss",
];

fn run_case(op: &str, seed: u64, h: f64) -> Result<f64> {
    match op {
        "mpi_encode" => encoder_case(seed, h),
        "embedding" => embedding_case(seed, h),
        "attention" => attention_case(seed, h),
        "mix_gated" => mix_case(seed, h, false),
        "mix_zero_init" => mix_case(seed, h, true),
        "reweighed_loss" => loss_case(seed, h),
        other => Err(Error::config(format!("unknown gradcheck op {other}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpReport {
    pub op: &'static str,
    pub cases: usize,
    pub max_rel_error: f64,
    pub worst_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradcheckReport {
    pub h: f64,
    pub ops: Vec<OpReport>,
}

impl GradcheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.ops.iter().map(|o| o.max_rel_error).fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.ops.iter().all(|o| o.max_rel_error <= tol)
    }
}

impl fmt::Display for GradcheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<16} {:>6} {:>14} {:>12}",
            "op", "cases", "max_rel_err", "worst_seed"
        )?;
        for o in &self.ops {
            writeln!(
                f,
                "{:<16} {:>6} {:>14.3e} {:>12}",
                o.op, o.cases, o.max_rel_error, o.worst_seed
            )?;
        }
        Ok(())
    }
}

/// Checks every op on `cases` seeds starting at `seed`.
pub fn run_gradcheck(seed: u64, cases: usize, h: f64) -> Result<GradcheckReport> {
    if cases == 0 {
        return Err(Error::config("gradcheck needs at least one case"));
    }
    let mut ops = Vec::new();
    for op in GRADCHECK_OPS {
        let mut rep = OpReport {
            op,
            cases,
            max_rel_error: 0.0,
            worst_seed: seed,
        };
        for c in 0..cases as u64 {
            let s = seed.wrapping_add(c);
            let err = run_case(op, s, h)?;
            if err > rep.max_rel_error {
                rep.max_rel_error = err;
                rep.worst_seed = s;
            }
        }
        ops.push(rep);
    }
    Ok(GradcheckReport { h, ops })
}
