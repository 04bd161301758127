//! Per-dimension standardization fitted on the training split.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

/// `z = (x − μ)/σ` per dimension, with population standard deviation
/// (divide by N). Dimensions with `σ = 0` are centred but not scaled.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StandardScaler {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl StandardScaler {
    /// An unfitted scaler; every transform fails until [`fit`](Self::fit).
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fitted<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let mut s = Self::new();
        s.fit(rows)?;
        Ok(s)
    }

    /// Scaler for a single column such as a target vector.
    pub fn fitted_column(values: &[f64]) -> Result<Self> {
        let rows: Vec<[f64; 1]> = values.iter().map(|v| [*v]).collect();
        Self::fitted(&rows)
    }

    pub fn fit<R: AsRef<[f64]>>(&mut self, rows: &[R]) -> Result<()> {
        let first = rows.first().ok_or(Error::Empty("scaler training data"))?;
        let dim = first.as_ref().len();
        let mut mean = alloc::vec![0.0; dim];
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::Shape { expected: dim, got: r.len() });
            }
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        let n = rows.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);

        let mut var = alloc::vec![0.0; dim];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(r.as_ref()).zip(&mean) {
                let d = x - m;
                *v += d * d;
            }
        }
        self.std = var.into_iter().map(|v| math::sqrt(v / n)).collect();
        self.mean = mean;
        Ok(())
    }

    pub fn is_fitted(&self) -> bool {
        !self.mean.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    /// Divisor applied to dimension `i` (σ, or 1 for constant dimensions).
    pub fn scale(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        Ok(effective(self.std[i]))
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        Ok(x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((x, m), s)| (x - m) / effective(*s))
            .collect())
    }

    pub fn inverse_transform(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(z.len())?;
        Ok(z.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((z, m), s)| z * effective(*s) + m)
            .collect())
    }

    pub fn transform_value(&self, i: usize, x: f64) -> Result<f64> {
        self.check_index(i)?;
        Ok((x - self.mean[i]) / effective(self.std[i]))
    }

    pub fn inverse_value(&self, i: usize, z: f64) -> Result<f64> {
        self.check_index(i)?;
        Ok(z * effective(self.std[i]) + self.mean[i])
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if !self.is_fitted() {
            return Err(Error::NotFitted);
        }
        if got != self.dim() {
            return Err(Error::Shape { expected: self.dim(), got });
        }
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if !self.is_fitted() {
            return Err(Error::NotFitted);
        }
        if i >= self.dim() {
            return Err(Error::Index { index: i, dim: self.dim() });
        }
        Ok(())
    }
}

#[inline]
fn effective(std: f64) -> f64 {
    if std == 0.0 {
        1.0
    } else {
        std
    }
}
