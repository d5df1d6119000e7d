use rustfft::num_complex::Complex;
use rustfft::{FftNum, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::num::Real;
use crate::series::Series;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub dt: f64,
    pub lyapunov: f64,
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self { a: 10.0, b: 28.0, c: 8.0 / 3.0, dt: 0.01, lyapunov: 0.9056 }
    }
}

fn lorenz_rhs<T: Real>(p: &(T, T, T), s: &[T; 3]) -> [T; 3] {
    let (a, b, c) = *p;
    [a * (s[1] - s[0]), s[0] * (b - s[2]) - s[1], s[0] * s[1] - c * s[2]]
}

/// Classic RK4 integration; the returned trajectory starts with `x0` and has `steps + 1` rows.
pub fn lorenz_rk4<T: Real>(x0: [T; 3], steps: usize, params: &LorenzParams) -> Result<Series<T>> {
    if !(params.dt > 0.0) {
        return arg(format!("Lorenz step must be positive, got {}", params.dt));
    }
    let p = (T::lit(params.a), T::lit(params.b), T::lit(params.c));
    let h = T::lit(params.dt);
    let half = h * T::lit(0.5);
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    let mut out = Series::with_capacity(3, steps + 1);
    let mut s = x0;
    out.push(&s)?;
    let shift = |s: &[T; 3], k: &[T; 3], f: T| [s[0] + k[0] * f, s[1] + k[1] * f, s[2] + k[2] * f];
    for step in 0..steps {
        let k1 = lorenz_rhs(&p, &s);
        let k2 = lorenz_rhs(&p, &shift(&s, &k1, half));
        let k3 = lorenz_rhs(&p, &shift(&s, &k2, half));
        let k4 = lorenz_rhs(&p, &shift(&s, &k3, h));
        for i in 0..3 {
            s[i] += sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!("Lorenz state became non-finite at step {}", step + 1)));
        }
        out.push(&s)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KseParams {
    pub domain_length: f64,
    pub grid: usize,
    pub dt: f64,
    pub lyapunov: f64,
}

impl Default for KseParams {
    fn default() -> Self {
        Self { domain_length: 22.0, grid: 64, dt: 0.25, lyapunov: 0.05 }
    }
}

/// Points on the contour used to evaluate the ETDRK4 coefficients.
pub const ETD_CONTOUR_POINTS: usize = 32;

/// Wavenumbers of an `m`-point periodic grid on a domain of length `l`; the Nyquist mode is zeroed.
pub fn kse_wavenumbers(m: usize, l: f64) -> Vec<f64> {
    let base = 2.0 * std::f64::consts::PI / l;
    (0..m)
        .map(|i| {
            if i < m / 2 {
                i as f64
            } else if i == m / 2 {
                0.0
            } else {
                i as f64 - m as f64
            }
        })
        .map(|n| n * base)
        .collect()
}

/// Exponential time differencing RK4 integrator for `u_t + u u_x + u_xx + u_xxxx = 0`.
pub struct KseSolver<T: Real + FftNum> {
    e: Vec<Complex<T>>,
    e2: Vec<Complex<T>>,
    q: Vec<Complex<T>>,
    f1: Vec<Complex<T>>,
    f2: Vec<Complex<T>>,
    f3: Vec<Complex<T>>,
    g: Vec<Complex<T>>,
    fwd: std::sync::Arc<dyn rustfft::Fft<T>>,
    inv: std::sync::Arc<dyn rustfft::Fft<T>>,
    m: usize,
}

impl<T: Real + FftNum> KseSolver<T> {
    pub fn new(params: &KseParams) -> Result<Self> {
        let m = params.grid;
        if m < 4 || !m.is_multiple_of(2) {
            return arg(format!("KSE grid must be even and at least 4, got {m}"));
        }
        if !(params.dt > 0.0 && params.domain_length > 0.0) {
            return arg("KSE step and domain length must be positive");
        }
        let h = params.dt;
        let k = kse_wavenumbers(m, params.domain_length);
        let mut coeffs = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for &kk in &k {
            let lin = kk * kk - kk.powi(4);
            let (q, f1, f2, f3) = etd_coefficients(h * lin, h);
            coeffs.0.push((h * lin).exp());
            coeffs.1.push((h * lin / 2.0).exp());
            coeffs.2.push(q);
            coeffs.3.push(f1);
            coeffs.4.push(f2);
            coeffs.5.push(f3);
        }
        let re = |v: Vec<f64>| v.into_iter().map(|x| Complex::new(T::lit(x), T::zero())).collect();
        let g = k.iter().map(|&kk| Complex::new(T::zero(), T::lit(-0.5 * kk))).collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            e: re(coeffs.0),
            e2: re(coeffs.1),
            q: re(coeffs.2),
            f1: re(coeffs.3),
            f2: re(coeffs.4),
            f3: re(coeffs.5),
            g,
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
            m,
        })
    }

    /// `g * FFT(real(IFFT(v))^2)`.
    fn nonlinear(&self, v: &[Complex<T>], out: &mut [Complex<T>], buf: &mut [Complex<T>]) {
        buf.copy_from_slice(v);
        self.inv.process(buf);
        let inv_m = T::one() / T::from_usize_lossy(self.m);
        for z in buf.iter_mut() {
            let r = z.re * inv_m;
            *z = Complex::new(r * r, T::zero());
        }
        self.fwd.process(buf);
        for ((o, b), g) in out.iter_mut().zip(buf.iter()).zip(&self.g) {
            *o = *b * *g;
        }
    }

    /// Advances the Fourier coefficients `v` by one step.
    pub fn step(&self, v: &mut [Complex<T>]) {
        let m = self.m;
        let zero = Complex::new(T::zero(), T::zero());
        let (mut nv, mut na, mut nb, mut nc) = (vec![zero; m], vec![zero; m], vec![zero; m], vec![zero; m]);
        let (mut a, mut b, mut c) = (vec![zero; m], vec![zero; m], vec![zero; m]);
        let mut buf = vec![zero; m];
        let two = T::lit(2.0);
        self.nonlinear(v, &mut nv, &mut buf);
        for i in 0..m {
            a[i] = self.e2[i] * v[i] + self.q[i] * nv[i];
        }
        self.nonlinear(&a, &mut na, &mut buf);
        for i in 0..m {
            b[i] = self.e2[i] * v[i] + self.q[i] * na[i];
        }
        self.nonlinear(&b, &mut nb, &mut buf);
        for i in 0..m {
            c[i] = self.e2[i] * a[i] + self.q[i] * (nb[i] * two - nv[i]);
        }
        self.nonlinear(&c, &mut nc, &mut buf);
        for i in 0..m {
            v[i] = self.e[i] * v[i] + nv[i] * self.f1[i] + (na[i] + nb[i]) * self.f2[i] * two + nc[i] * self.f3[i];
        }
        self.project_real(v);
    }

    /// Restores the conjugate symmetry of a real field. Without it, roundoff in
    /// the imaginary part grows unchecked in the linearly unstable long waves.
    fn project_real(&self, v: &mut [Complex<T>]) {
        let m = self.m;
        let half = T::lit(0.5);
        v[0].im = T::zero();
        v[m / 2].im = T::zero();
        for i in 1..m / 2 {
            let a = v[i];
            let b = v[m - i].conj();
            let avg = (a + b) * half;
            v[i] = avg;
            v[m - i] = avg.conj();
        }
    }

    pub fn to_spectral(&self, u: &[T]) -> Vec<Complex<T>> {
        let mut v: Vec<Complex<T>> = u.iter().map(|&x| Complex::new(x, T::zero())).collect();
        self.fwd.process(&mut v);
        self.project_real(&mut v);
        v
    }

    pub fn to_physical(&self, v: &[Complex<T>]) -> Vec<T> {
        let mut buf = v.to_vec();
        self.inv.process(&mut buf);
        let inv_m = T::one() / T::from_usize_lossy(self.m);
        buf.iter().map(|z| z.re * inv_m).collect()
    }
}

/// Contour-averaged `(Q, f1, f2, f3)` for one scaled linear eigenvalue `z = h L`.
fn etd_coefficients(z: f64, h: f64) -> (f64, f64, f64, f64) {
    let mut acc = [0.0; 4];
    let n = ETD_CONTOUR_POINTS;
    for j in 1..=n {
        let theta = 2.0 * std::f64::consts::PI * (j as f64 - 0.5) / n as f64;
        let r = Complex::<f64>::new(z, 0.0) + Complex::<f64>::from_polar(1.0, theta);
        let er = r.exp();
        let r3 = r * r * r;
        acc[0] += (((r / 2.0).exp() - 1.0) / r).re;
        acc[1] += ((-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3).re;
        acc[2] += ((2.0 + r + er * (r - 2.0)) / r3).re;
        acc[3] += ((-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3).re;
    }
    let s = h / n as f64;
    (acc[0] * s, acc[1] * s, acc[2] * s, acc[3] * s)
}

/// Integrates the field from `u0`; the trajectory starts with `u0` and has `steps + 1` rows.
pub fn kse_etdrk4<T: Real + FftNum>(u0: &[T], steps: usize, params: &KseParams) -> Result<Series<T>> {
    if u0.len() != params.grid {
        return arg(format!("initial field has {} points, grid has {}", u0.len(), params.grid));
    }
    let solver = KseSolver::new(params)?;
    let mut v = solver.to_spectral(u0);
    let mut out = Series::with_capacity(params.grid, steps + 1);
    out.push(u0)?;
    for step in 0..steps {
        solver.step(&mut v);
        let u = solver.to_physical(&v);
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!("KSE field became non-finite at step {}", step + 1)));
        }
        out.push(&u)?;
    }
    Ok(out)
}
