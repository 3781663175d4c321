//! 1×1 convolution encoder over plane-stacked MPI channels.
//!
//! Labels enter through a per-class embedding table: plane `l`, embedding
//! component `e` becomes input channel `l * E + e`. Each encoder layer is a
//! 1×1 convolution followed by ReLU, so spatial size never changes. Layers
//! are chained and every layer's output is returned as one scale of the
//! feature list.

use rand::Rng;

use super::tensor::DenseTensor;
use crate::error::{Error, Result};
use crate::label::SemanticLabel;
use crate::mpi::MpiSlab;

/// Class slots in an embedding table: ids 0..=16 plus one row for UNKNOWN.
pub const EMBED_ROWS: usize = 18;

/// Default embedding width per class.
pub const EMBED_DIM: usize = 8;

/// `[EMBED_ROWS, dim]` table with entries uniform in `[-1, 1)`.
pub fn embedding_table<R: Rng>(rng: &mut R, dim: usize) -> DenseTensor {
    DenseTensor::from_fn(&[EMBED_ROWS, dim], |_| rng.gen_range(-1.0..1.0))
}

fn embed_row(label: SemanticLabel) -> usize {
    if label == SemanticLabel::UNKNOWN {
        EMBED_ROWS - 1
    } else {
        label.id() as usize
    }
}

/// `[D·E, H, W]` input from a `D × H × W` slab and an `[EMBED_ROWS, E]` table.
pub fn embed_slab(slab: &MpiSlab, table: &DenseTensor) -> Result<DenseTensor> {
    table.require_matrix("embedding table")?;
    if table.rows() != EMBED_ROWS {
        return Err(Error::dims("embedding table rows", EMBED_ROWS, table.rows()));
    }
    let e = table.cols();
    let (d, h, w) = (slab.planes(), slab.height(), slab.width());
    let mut out = vec![0.0; d * e * h * w];
    for l in 0..d {
        for v in 0..h {
            for u in 0..w {
                let row = embed_row(slab.get(l, v, u));
                for k in 0..e {
                    out[((l * e + k) * h + v) * w + u] = table.at(row, k);
                }
            }
        }
    }
    Ok(DenseTensor::from_raw(vec![d * e, h, w], out))
}

/// Gradient of a scalar loss w.r.t. the embedding table, given the gradient
/// w.r.t. the embedded input.
pub fn embed_slab_backward(slab: &MpiSlab, table: &DenseTensor, d_input: &DenseTensor) -> DenseTensor {
    let e = table.cols();
    let (d, h, w) = (slab.planes(), slab.height(), slab.width());
    let mut grad = DenseTensor::zeros(table.dims());
    for l in 0..d {
        for v in 0..h {
            for u in 0..w {
                let row = embed_row(slab.get(l, v, u));
                for k in 0..e {
                    grad.data_mut()[row * e + k] += d_input.data()[((l * e + k) * h + v) * w + u];
                }
            }
        }
    }
    grad
}

/// One-hot alternative: channel `l * classes + id` is 1 where plane `l` holds
/// class `id`. UNKNOWN and ids beyond `classes` map to all-zero.
pub fn one_hot_slab(slab: &MpiSlab, classes: usize) -> DenseTensor {
    let (d, h, w) = (slab.planes(), slab.height(), slab.width());
    let mut out = vec![0.0; d * classes * h * w];
    for l in 0..d {
        for v in 0..h {
            for u in 0..w {
                let id = slab.get(l, v, u).id() as usize;
                if id < classes {
                    out[((l * classes + id) * h + v) * w + u] = 1.0;
                }
            }
        }
    }
    DenseTensor::from_raw(vec![d * classes, h, w], out)
}

/// Strided subsampling of a `[C, H, W]` tensor to latent resolution.
pub fn subsample(x: &DenseTensor, factor: usize) -> Result<DenseTensor> {
    if x.dims().len() != 3 || factor == 0 {
        return Err(Error::dims("subsample input", "[C, H, W] and factor >= 1", x.dims()));
    }
    let (c, h, w) = (x.dims()[0], x.dims()[1], x.dims()[2]);
    let (ho, wo) = (h.div_ceil(factor), w.div_ceil(factor));
    let mut out = Vec::with_capacity(c * ho * wo);
    for ch in 0..c {
        for v in 0..ho {
            for u in 0..wo {
                out.push(x.data()[(ch * h + v * factor) * w + u * factor]);
            }
        }
    }
    Ok(DenseTensor::from_raw(vec![c, ho, wo], out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conv1x1Params {
    pub weight: DenseTensor,
    pub bias: DenseTensor,
}

impl Conv1x1Params {
    pub fn new(weight: DenseTensor, bias: DenseTensor) -> Result<Self> {
        weight.require_matrix("conv weight")?;
        if bias.dims() != [weight.rows()] {
            return Err(Error::dims("conv bias", [weight.rows()], bias.dims()));
        }
        Ok(Self { weight, bias })
    }

    pub fn random<R: Rng>(rng: &mut R, in_ch: usize, out_ch: usize) -> Self {
        let scale = 1.0 / (in_ch as f64).sqrt();
        let weight = DenseTensor::from_fn(&[out_ch, in_ch], |_| rng.gen_range(-scale..scale));
        let bias = DenseTensor::from_fn(&[out_ch], |_| rng.gen_range(-0.1..0.1));
        Self { weight, bias }
    }

    pub fn in_channels(&self) -> usize {
        self.weight.cols()
    }

    pub fn out_channels(&self) -> usize {
        self.weight.rows()
    }
}

/// Pre-activation `Σ_k W[c,k]·x[k,h,w] + b[c]`.
fn conv1x1(x: &DenseTensor, p: &Conv1x1Params) -> Result<DenseTensor> {
    if x.dims().len() != 3 {
        return Err(Error::dims("encoder input", "[C, H, W]", x.dims()));
    }
    if x.dims()[0] != p.in_channels() {
        return Err(Error::dims("encoder input channels", p.in_channels(), x.dims()[0]));
    }
    let (cin, hw) = (x.dims()[0], x.dims()[1] * x.dims()[2]);
    let cout = p.out_channels();
    let mut out = vec![0.0; cout * hw];
    for c in 0..cout {
        let row = &mut out[c * hw..(c + 1) * hw];
        row.fill(p.bias.data()[c]);
        for k in 0..cin {
            let wk = p.weight.at(c, k);
            let xk = &x.data()[k * hw..(k + 1) * hw];
            for (o, xi) in row.iter_mut().zip(xk) {
                *o += wk * xi;
            }
        }
    }
    Ok(DenseTensor::from_raw(vec![cout, x.dims()[1], x.dims()[2]], out))
}

fn relu(x: &DenseTensor) -> DenseTensor {
    DenseTensor::from_raw(x.dims().to_vec(), x.data().iter().map(|&v| v.max(0.0)).collect())
}

/// Feature map per layer, each `[C_s, H, W]`.
pub fn mpi_encode(input: &DenseTensor, layers: &[Conv1x1Params]) -> Result<Vec<DenseTensor>> {
    Ok(encode_with_preactivations(input, layers)?
        .into_iter()
        .map(|(_, y)| y)
        .collect())
}

fn encode_with_preactivations(
    input: &DenseTensor,
    layers: &[Conv1x1Params],
) -> Result<Vec<(DenseTensor, DenseTensor)>> {
    let mut out = Vec::with_capacity(layers.len());
    let mut x = input.clone();
    for p in layers {
        let z = conv1x1(&x, p)?;
        let y = relu(&z);
        x = y.clone();
        out.push((z, y));
    }
    Ok(out)
}

/// Smallest |pre-activation| over every layer; used to keep finite
/// differences away from the ReLU kink.
pub fn min_abs_preactivation(input: &DenseTensor, layers: &[Conv1x1Params]) -> Result<f64> {
    Ok(encode_with_preactivations(input, layers)?
        .iter()
        .flat_map(|(z, _)| z.data().iter().map(|v| v.abs()))
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderGrads {
    pub input: DenseTensor,
    pub layers: Vec<Conv1x1Params>,
}

/// Backward pass given the upstream gradient for every returned scale.
pub fn mpi_encode_backward(
    input: &DenseTensor,
    layers: &[Conv1x1Params],
    d_outputs: &[DenseTensor],
) -> Result<EncoderGrads> {
    if d_outputs.len() != layers.len() {
        return Err(Error::dims("encoder upstream gradients", layers.len(), d_outputs.len()));
    }
    let acts = encode_with_preactivations(input, layers)?;
    let mut grads = vec![None; layers.len()];
    let mut carry: Option<DenseTensor> = None;
    for s in (0..layers.len()).rev() {
        let (z, _) = &acts[s];
        d_outputs[s].same_dims(z, "encoder upstream gradient")?;
        let mut dy = d_outputs[s].clone();
        if let Some(c) = carry.take() {
            dy.add_assign(&c);
        }
        let dz: Vec<f64> = dy
            .data()
            .iter()
            .zip(z.data())
            .map(|(g, &zv)| if zv > 0.0 { *g } else { 0.0 })
            .collect();
        let x = if s == 0 { input } else { &acts[s - 1].1 };
        let p = &layers[s];
        let (cin, cout, hw) = (p.in_channels(), p.out_channels(), x.dims()[1] * x.dims()[2]);
        let mut dw = vec![0.0; cout * cin];
        let mut db = vec![0.0; cout];
        let mut dx = vec![0.0; cin * hw];
        for c in 0..cout {
            let dzc = &dz[c * hw..(c + 1) * hw];
            db[c] = dzc.iter().sum();
            for k in 0..cin {
                let xk = &x.data()[k * hw..(k + 1) * hw];
                dw[c * cin + k] = dzc.iter().zip(xk).map(|(a, b)| a * b).sum();
                let wk = p.weight.at(c, k);
                for (d, g) in dx[k * hw..(k + 1) * hw].iter_mut().zip(dzc) {
                    *d += wk * g;
                }
            }
        }
        grads[s] = Some(Conv1x1Params {
            weight: DenseTensor::from_raw(vec![cout, cin], dw),
            bias: DenseTensor::from_raw(vec![cout], db),
        });
        carry = Some(DenseTensor::from_raw(x.dims().to_vec(), dx));
    }
    Ok(EncoderGrads {
        input: carry.unwrap_or_else(|| DenseTensor::zeros(input.dims())),
        layers: grads.into_iter().map(|g| g.expect("filled")).collect(),
    })
}
