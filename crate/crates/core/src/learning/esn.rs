use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{arg, Error, Result};
use crate::num::Real;
use crate::seeds::{child, rng_from};
use crate::series::Series;

/// Echo state network with a sparse random recurrent matrix.
#[derive(Debug, Clone)]
pub struct EsnModel<T: Real> {
    pub w_hi: DMatrix<T>,
    pub w_hh: DMatrix<T>,
    pub spectral_radius: T,
    pub degree: usize,
    pub noise_level: T,
    /// Per-component standard deviation of the training data, scales the noise.
    pub data_std: Vec<T>,
    hidden: DVector<T>,
    rng: ChaCha8Rng,
}

/// Largest eigenvalue magnitude of a real square matrix.
pub fn spectral_radius<T: Real>(m: &DMatrix<T>) -> T {
    m.complex_eigenvalues().iter().fold(T::zero(), |r, z| {
        let a = z.norm_sqr().sqrt();
        if a > r {
            a
        } else {
            r
        }
    })
}

pub fn esn_init<T: Real>(
    d_h: usize,
    d_o: usize,
    radius: T,
    degree: usize,
    noise_level: T,
    seed: u64,
) -> Result<EsnModel<T>> {
    if !(radius > T::zero() && radius < T::one()) {
        return Err(Error::Config(format!("spectral radius must lie in (0, 1), got {radius}")));
    }
    if degree == 0 || degree >= d_h {
        return Err(Error::Config(format!("degree {degree} must lie in [1, {d_h})")));
    }
    if d_o == 0 {
        return Err(Error::Config("ESN needs at least one observable".into()));
    }
    let mut rng = rng_from(child(seed, "esn-weights", 0));
    let unit = Uniform::new_inclusive(-1.0f64, 1.0);
    let w_hi = DMatrix::from_fn(d_h, d_o, |_, _| T::lit(unit.sample(&mut rng)));
    let p = degree as f64 / d_h as f64;
    let mut w_hh =
        DMatrix::from_fn(d_h, d_h, |_, _| if rng.gen::<f64>() < p { T::lit(unit.sample(&mut rng)) } else { T::zero() });
    let current = spectral_radius(&w_hh);
    if current == T::zero() {
        return Err(Error::Numerical("random recurrent matrix is nilpotent; try another seed".into()));
    }
    w_hh *= radius / current;
    Ok(EsnModel {
        w_hi,
        w_hh,
        spectral_radius: radius,
        degree,
        noise_level,
        data_std: vec![T::zero(); d_o],
        hidden: DVector::zeros(d_h),
        rng: rng_from(child(seed, "esn-noise", 0)),
    })
}

/// `tanh(W_hi obs + W_hh h_prev)`.
pub fn esn_step<T: Real>(model: &EsnModel<T>, h_prev: &[T], obs: &[T]) -> Result<Vec<T>> {
    if h_prev.len() != model.d_h() || obs.len() != model.d_o() {
        return arg(format!(
            "ESN expects hidden {} and observation {}, got {} and {}",
            model.d_h(),
            model.d_o(),
            h_prev.len(),
            obs.len()
        ));
    }
    let h = DVector::from_column_slice(h_prev);
    let o = DVector::from_column_slice(obs);
    let pre = &model.w_hi * o + &model.w_hh * h;
    Ok(pre.iter().map(|x| x.tanh()).collect())
}

impl<T: Real> EsnModel<T> {
    pub fn d_h(&self) -> usize {
        self.w_hh.nrows()
    }

    pub fn d_o(&self) -> usize {
        self.w_hi.ncols()
    }

    pub fn hidden(&self) -> &[T] {
        self.hidden.as_slice()
    }

    pub fn reset(&mut self) {
        self.hidden.fill(T::zero());
    }

    /// Scales the input weights, e.g. for inputs confined to a small range.
    pub fn scale_inputs(&mut self, factor: T) {
        self.w_hi *= factor;
    }

    /// Advances the hidden state; with `training` set, observations are perturbed by
    /// Gaussian noise of standard deviation `noise_level * data_std`.
    pub fn step(&mut self, obs: &[T], training: bool) -> Result<&[T]> {
        if obs.len() != self.d_o() {
            return arg(format!("ESN expects {} observables, got {}", self.d_o(), obs.len()));
        }
        let mut o = DVector::from_column_slice(obs);
        if training && self.noise_level > T::zero() {
            for (x, &sd) in o.iter_mut().zip(&self.data_std) {
                let std = (self.noise_level * sd).as_f64();
                if std > 0.0 {
                    let n = Normal::new(0.0, std).expect("finite noise std");
                    *x += T::lit(n.sample(&mut self.rng));
                }
            }
        }
        let pre = &self.w_hi * o + &self.w_hh * &self.hidden;
        self.hidden = pre.map(|x| x.tanh());
        Ok(self.hidden.as_slice())
    }

    /// Hidden states after each observation row.
    pub fn run(&mut self, obs: &Series<T>, training: bool) -> Result<Series<T>> {
        let mut out = Series::with_capacity(self.d_h(), obs.len());
        for row in obs.rows() {
            let h = self.step(row, training)?;
            out.push(h)?;
        }
        Ok(out)
    }
}
