use super::tensor::DenseTensor;
use crate::error::{Error, Result};

fn check(pred: &DenseTensor, truth: &DenseTensor, weights: &DenseTensor) -> Result<usize> {
    pred.same_dims(truth, "loss target")?;
    let nd = pred.dims().len();
    if weights.dims().len() != 2 || nd < 2 || pred.dims()[nd - 2..] != *weights.dims() {
        let tail = if nd >= 2 {
            pred.dims()[nd - 2..].to_vec()
        } else {
            pred.dims().to_vec()
        };
        return Err(Error::dims("loss weight map", tail, weights.dims()));
    }
    if weights.data().iter().any(|&w| w < 0.0) {
        return Err(Error::config("loss weights must be non-negative"));
    }
    Ok(weights.len())
}

/// `mean(w · (pred − truth)²)`, with the `[H, W]` weight map broadcast over
/// every leading axis of `pred`.
pub fn reweighed_loss(pred: &DenseTensor, truth: &DenseTensor, weights: &DenseTensor) -> Result<f64> {
    let hw = check(pred, truth, weights)?;
    let sum: f64 = pred
        .data()
        .iter()
        .zip(truth.data())
        .enumerate()
        .map(|(i, (p, t))| weights.data()[i % hw] * (p - t) * (p - t))
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Gradient of [`reweighed_loss`] w.r.t. `pred`.
pub fn reweighed_loss_backward(pred: &DenseTensor, truth: &DenseTensor, weights: &DenseTensor) -> Result<DenseTensor> {
    let hw = check(pred, truth, weights)?;
    let n = pred.len() as f64;
    let g = pred
        .data()
        .iter()
        .zip(truth.data())
        .enumerate()
        .map(|(i, (p, t))| 2.0 * weights.data()[i % hw] * (p - t) / n)
        .collect();
    Ok(DenseTensor::from_raw(pred.dims().to_vec(), g))
}
