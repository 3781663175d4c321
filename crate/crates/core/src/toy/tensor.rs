use crate::error::{Error, Result};

/// Row-major `f64` tensor with up to four axes.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(dims: &[usize], data: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.len() > 4 {
            return Err(Error::config(format!("tensors have 1 to 4 axes, got {}", dims.len())));
        }
        let len: usize = dims.iter().product();
        if data.len() != len {
            return Err(Error::dims("tensor data", len, data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("tensor entries must be finite"));
        }
        Ok(Self {
            dims: dims.to_vec(),
            data,
        })
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Self::new(dims, vec![0.0; dims.iter().product()]).expect("valid zero tensor")
    }

    pub fn from_fn(dims: &[usize], mut f: impl FnMut(usize) -> f64) -> Self {
        let len = dims.iter().product();
        Self::new(dims, (0..len).map(&mut f).collect()).expect("finite generator")
    }

    pub(crate) fn from_raw(dims: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), data.len());
        Self { dims, data }
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub(crate) fn rows(&self) -> usize {
        self.dims[0]
    }

    pub(crate) fn cols(&self) -> usize {
        self.dims[1]
    }

    #[inline]
    pub(crate) fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.dims[1] + c]
    }

    pub(crate) fn require_matrix(&self, what: &'static str) -> Result<()> {
        if self.dims.len() != 2 {
            return Err(Error::dims(what, "2 axes", &self.dims));
        }
        Ok(())
    }

    pub fn same_dims(&self, other: &Self, what: &'static str) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::dims(what, &self.dims, &other.dims));
        }
        Ok(())
    }

    /// `self · other` for matrices.
    pub fn matmul(&self, other: &Self) -> Self {
        let (n, k, m) = (self.rows(), self.cols(), other.cols());
        assert_eq!(k, other.rows(), "matmul inner dims");
        let mut out = vec![0.0; n * m];
        for i in 0..n {
            for p in 0..k {
                let a = self.at(i, p);
                for j in 0..m {
                    out[i * m + j] += a * other.at(p, j);
                }
            }
        }
        Self::from_raw(vec![n, m], out)
    }

    pub fn transpose(&self) -> Self {
        let (n, m) = (self.rows(), self.cols());
        let mut out = vec![0.0; n * m];
        for i in 0..n {
            for j in 0..m {
                out[j * n + i] = self.at(i, j);
            }
        }
        Self::from_raw(vec![m, n], out)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_raw(self.dims.clone(), self.data.iter().map(|x| x * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dims, other.dims);
        Self::from_raw(
            self.dims.clone(),
            self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.dims, other.dims);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }
}

/// Elementwise sum of an encoder feature map onto a latent of the same shape.
pub fn add_condition(features: &DenseTensor, latent: &DenseTensor) -> Result<DenseTensor> {
    features.same_dims(latent, "condition features vs latent")?;
    Ok(latent.add(features))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        assert!(DenseTensor::new(&[2, 2], vec![0.0; 3]).is_err());
        assert!(DenseTensor::new(&[1, 1, 1, 1, 1], vec![0.0]).is_err());
        assert!(DenseTensor::new(&[1], vec![f64::NAN]).is_err());
    }

    #[test]
    fn matmul_small() {
        let a = DenseTensor::new(&[2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let b = DenseTensor::new(&[3, 1], vec![1.0, 0.0, -1.0]).unwrap();
        assert_eq!(a.matmul(&b).data(), &[-2.0, -2.0]);
        assert_eq!(a.transpose().dims(), &[3, 2]);
        assert_eq!(a.transpose().at(2, 1), 6.0);
    }

    #[test]
    fn add_condition_contract() {
        let latent = DenseTensor::from_fn(&[2, 3, 3], |i| i as f64 * 0.5 - 2.0);
        let zero = DenseTensor::zeros(&[2, 3, 3]);
        assert_eq!(add_condition(&zero, &latent).unwrap(), latent);
        let neg = latent.scale(-1.0);
        assert!(add_condition(&neg, &latent).unwrap().data().iter().all(|&x| x == 0.0));
        let feat = DenseTensor::from_fn(&[2, 3, 3], |i| (i as f64).sin());
        let sum = add_condition(&feat, &latent).unwrap();
        for i in 0..sum.len() {
            assert_eq!(sum.data()[i], feat.data()[i] + latent.data()[i]);
        }
        assert!(add_condition(&DenseTensor::zeros(&[2, 3]), &latent).is_err());
    }
}
