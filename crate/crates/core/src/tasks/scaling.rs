use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::num::Real;
use crate::seeds::rng_from;
use crate::series::Series;

/// Per-component affine map from the fitted data range onto `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub data_min: Vec<f64>,
    pub data_max: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

impl MinMaxScaler {
    pub fn fit<T: Real>(data: &Series<T>, lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return arg(format!("target range [{lo}, {hi}] is empty"));
        }
        if data.is_empty() {
            return arg("cannot fit a scaler to an empty series");
        }
        let mut data_min = vec![f64::INFINITY; data.dim()];
        let mut data_max = vec![f64::NEG_INFINITY; data.dim()];
        for row in data.rows() {
            for (i, x) in row.iter().enumerate() {
                let x = x.as_f64();
                data_min[i] = data_min[i].min(x);
                data_max[i] = data_max[i].max(x);
            }
        }
        if let Some(i) = (0..data.dim()).find(|&i| !(data_max[i] > data_min[i])) {
            return Err(Error::Numerical(format!("component {i} has a degenerate range")));
        }
        Ok(Self { data_min, data_max, lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.data_min.len()
    }

    fn check<T: Real>(&self, s: &Series<T>) -> Result<()> {
        if s.dim() != self.dim() {
            return arg(format!("scaler fitted on {} components, series has {}", self.dim(), s.dim()));
        }
        Ok(())
    }

    pub fn transform<T: Real>(&self, s: &Series<T>) -> Result<Series<T>> {
        self.check(s)?;
        let mut out = s.clone();
        for k in 0..out.len() {
            self.transform_row(out.row_mut(k));
        }
        Ok(out)
    }

    pub fn inverse<T: Real>(&self, s: &Series<T>) -> Result<Series<T>> {
        self.check(s)?;
        let mut out = s.clone();
        for k in 0..out.len() {
            self.inverse_row(out.row_mut(k));
        }
        Ok(out)
    }

    pub fn transform_row<T: Real>(&self, row: &mut [T]) {
        let span = self.hi - self.lo;
        for (i, x) in row.iter_mut().enumerate() {
            let t = (x.as_f64() - self.data_min[i]) / (self.data_max[i] - self.data_min[i]);
            *x = T::lit(self.lo + t * span);
        }
    }

    pub fn inverse_row<T: Real>(&self, row: &mut [T]) {
        let span = self.hi - self.lo;
        for (i, x) in row.iter_mut().enumerate() {
            let t = (x.as_f64() - self.lo) / span;
            *x = T::lit(self.data_min[i] + t * (self.data_max[i] - self.data_min[i]));
        }
    }
}

/// Fits a scaler on `data` and returns the scaled copy with it.
pub fn minmax_scale<T: Real>(data: &Series<T>, lo: f64, hi: f64) -> Result<(Series<T>, MinMaxScaler)> {
    let scaler = MinMaxScaler::fit(data, lo, hi)?;
    Ok((scaler.transform(data)?, scaler))
}

/// Adds i.i.d. `N(0, sigma^2)` draws to every entry.
pub fn add_gaussian_noise<T: Real>(data: &Series<T>, sigma: f64, seed: u64) -> Result<Series<T>> {
    if !(sigma >= 0.0) {
        return arg(format!("noise std must be nonnegative, got {sigma}"));
    }
    if sigma == 0.0 {
        return Ok(data.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Argument(e.to_string()))?;
    let mut rng = rng_from(seed);
    Ok(data.map(|x| x + T::lit(normal.sample(&mut rng))))
}

/// `target[k] = inputs[k - d]`; the first `d` entries are `None`.
pub fn delay_target<T: Real>(inputs: &[T], d: usize) -> Result<Vec<Option<T>>> {
    if d >= inputs.len() {
        return arg(format!("delay {d} is not shorter than the sequence ({})", inputs.len()));
    }
    Ok((0..inputs.len()).map(|k| if k >= d { Some(inputs[k - d]) } else { None }).collect())
}
