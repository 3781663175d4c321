//! Row-major 2D maps and binary PPM/PGM encoding.

use std::io::Write;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PixelMap<T> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

pub type Rgb = [u8; 3];

impl<T: Clone> PixelMap<T> {
    pub fn filled(height: usize, width: usize, value: T) -> Self {
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }
}

impl<T> PixelMap<T> {
    pub fn from_vec(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::dims("pixel map", height * width, data.len()));
        }
        Ok(Self { height, width, data })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for v in 0..height {
            for u in 0..width {
                data.push(f(v, u));
            }
        }
        Self { height, width, data }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Value at row `v`, column `u`.
    #[inline]
    pub fn get(&self, v: usize, u: usize) -> &T {
        &self.data[v * self.width + u]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> PixelMap<U> {
        PixelMap {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl PixelMap<u8> {
    /// Binary PGM (P5).
    pub fn write_pgm<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.data)
    }
}

impl PixelMap<Rgb> {
    /// Binary PPM (P6).
    pub fn write_ppm<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        for px in &self.data {
            out.write_all(px)?;
        }
        Ok(())
    }
}
