use nalgebra::{DMatrix, DVector};

use crate::error::{arg, Error, Result};
use crate::num::{c, Real, C};
use crate::qcore::{
    eigensystem, input_spin_state, kron, propagator, tolerance, trace_out_first, CMatrix, DensityMatrix,
    IsingHamiltonian,
};

/// Reported in place of `1/|lambda_2|` when `lambda_2` vanishes.
pub const INV_LAMBDA2_SENTINEL: f64 = 1e15;

/// The one-step channel `rho -> U (rho_u (x) tr_1 rho) U^dag` for a constant input.
#[derive(Debug, Clone)]
pub struct SuperOperator<T: Real> {
    n_qubits: usize,
    input_value: T,
    tau: T,
    step: CMatrix<T>,
}

pub fn superoperator<T: Real>(h: &IsingHamiltonian<T>, u: T, tau: T) -> Result<SuperOperator<T>> {
    if !(u >= T::zero() && u <= T::one()) {
        return arg(format!("constant input {u} outside [0, 1]"));
    }
    if h.n_qubits() < 2 {
        return arg("the channel spectrum needs at least 2 qubits");
    }
    let step = propagator(&eigensystem(h), tau).matrix().clone();
    Ok(SuperOperator { n_qubits: h.n_qubits(), input_value: u, tau, step })
}

impl<T: Real> SuperOperator<T> {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn input_value(&self) -> T {
        self.input_value
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    /// Applies the channel to any square matrix of the full dimension.
    pub fn apply(&self, rho: &CMatrix<T>) -> CMatrix<T> {
        self.lift(&trace_out_first(rho))
    }

    /// `U (rho_u (x) r) U^dag` for a marginal `r`.
    fn lift(&self, r: &CMatrix<T>) -> CMatrix<T> {
        let injected = kron(&input_spin_state(self.input_value), r);
        &self.step * injected * self.step.adjoint()
    }

    /// The reduced map on marginals: `r -> tr_1 U (rho_u (x) r) U^dag`.
    fn reduced(&self, r: &CMatrix<T>) -> CMatrix<T> {
        trace_out_first(&self.lift(r))
    }

    /// Dense `4^N x 4^N` matrix acting on column-stacked density matrices.
    pub fn matrix(&self) -> CMatrix<T> {
        let d = 1usize << self.n_qubits;
        let mut m = CMatrix::zeros(d * d, d * d);
        let mut unit = CMatrix::zeros(d, d);
        for b in 0..d {
            for a in 0..d {
                unit[(a, b)] = c(T::one(), T::zero());
                let image = self.apply(&unit);
                unit[(a, b)] = c(T::zero(), T::zero());
                let col = a + b * d;
                for (i, z) in image.iter().enumerate() {
                    m[(i, col)] = *z;
                }
            }
        }
        m
    }

    /// Real matrix of the reduced map in an orthonormal Hermitian basis.
    pub fn reduced_real_matrix(&self) -> DMatrix<T> {
        let h = 1usize << (self.n_qubits - 1);
        let n = h * h;
        let mut m = DMatrix::zeros(n, n);
        for k in 0..n {
            let image = self.reduced(&hermitian_basis(h, k));
            m.set_column(k, &hermitian_coords(&image));
        }
        m
    }
}

/// Basis element `k` of the Hermitian `h x h` matrices: diagonal units first, then for
/// each `a < b` the symmetric and antisymmetric combinations scaled by `1/sqrt(2)`.
fn hermitian_basis<T: Real>(h: usize, k: usize) -> CMatrix<T> {
    let mut m = CMatrix::zeros(h, h);
    if k < h {
        m[(k, k)] = c(T::one(), T::zero());
        return m;
    }
    let (a, b, sym) = offdiag_slot(h, k - h);
    let s = T::one() / T::lit(2.0).sqrt();
    if sym {
        m[(a, b)] = c(s, T::zero());
        m[(b, a)] = c(s, T::zero());
    } else {
        m[(a, b)] = c(T::zero(), -s);
        m[(b, a)] = c(T::zero(), s);
    }
    m
}

fn offdiag_slot(h: usize, idx: usize) -> (usize, usize, bool) {
    let pair = idx / 2;
    let sym = idx.is_multiple_of(2);
    let mut count = 0;
    for a in 0..h {
        let row = h - a - 1;
        if pair < count + row {
            return (a, a + 1 + pair - count, sym);
        }
        count += row;
    }
    unreachable!("off-diagonal index out of range")
}

/// Coordinates of a Hermitian matrix in the basis of [`hermitian_basis`].
fn hermitian_coords<T: Real>(m: &CMatrix<T>) -> DVector<T> {
    let h = m.nrows();
    let r2 = T::lit(2.0).sqrt();
    let mut v = DVector::zeros(h * h);
    for a in 0..h {
        v[a] = m[(a, a)].re;
    }
    let mut i = h;
    for a in 0..h {
        for b in a + 1..h {
            v[i] = r2 * m[(a, b)].re;
            v[i + 1] = -r2 * m[(a, b)].im;
            i += 2;
        }
    }
    v
}

fn from_hermitian_coords<T: Real>(v: &DVector<T>, h: usize) -> CMatrix<T> {
    let s = T::one() / T::lit(2.0).sqrt();
    let mut m = CMatrix::zeros(h, h);
    for a in 0..h {
        m[(a, a)] = c(v[a], T::zero());
    }
    let mut i = h;
    for a in 0..h {
        for b in a + 1..h {
            let z = c(v[i] * s, -v[i + 1] * s);
            m[(a, b)] = z;
            m[(b, a)] = z.conj();
            i += 2;
        }
    }
    m
}

#[derive(Debug, Clone)]
pub struct SpectrumResult<T: Real> {
    /// Nonzero part of the spectrum (the reduced map's eigenvalues), by descending magnitude.
    pub eigenvalues: Vec<C<T>>,
    /// Number of additional zero eigenvalues of the full `4^N` map.
    pub zero_modes: usize,
    pub fixed_point: DensityMatrix<T>,
    pub inv_lambda2: f64,
}

impl<T: Real> SpectrumResult<T> {
    pub fn lambda1(&self) -> C<T> {
        self.eigenvalues[0]
    }

    pub fn lambda2_abs(&self) -> f64 {
        self.eigenvalues.get(1).map(|z| z.norm_sqr().sqrt().as_f64()).unwrap_or(0.0)
    }

    /// All `4^N` eigenvalues of the full map, zeros appended.
    pub fn full_eigenvalues(&self) -> Vec<C<T>> {
        let mut all = self.eigenvalues.clone();
        all.resize(all.len() + self.zero_modes, c(T::zero(), T::zero()));
        all
    }
}

/// Spectrum and fixed point of the channel.
///
/// The full map factors as `lift . tr_1`, so its nonzero eigenvalues are those of
/// `tr_1 . lift` on the `4^(N-1)`-dimensional marginal space; the remaining
/// `4^N - 4^(N-1)` eigenvalues are zero.
pub fn cptp_spectrum<T: Real>(l: &SuperOperator<T>) -> Result<SpectrumResult<T>> {
    let h = 1usize << (l.n_qubits - 1);
    let m = l.reduced_real_matrix();
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("channel matrix has non-finite entries".into()));
    }
    let mut eigenvalues: Vec<C<T>> = m.clone().complex_eigenvalues().iter().copied().collect();
    if eigenvalues.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Solver("eigenvalue iteration did not converge".into()));
    }
    eigenvalues.sort_by(|a, b| b.norm_sqr().partial_cmp(&a.norm_sqr()).expect("finite eigenvalues"));

    let marginal = stationary_marginal(&m, h)?;
    let fixed = l.lift(&marginal);
    let fixed = (&fixed + fixed.adjoint()).map(|z| z * T::lit(0.5));
    let fixed_point = DensityMatrix::from_matrix_unchecked(fixed);

    let l2 = eigenvalues.get(1).map(|z| z.norm_sqr().sqrt().as_f64()).unwrap_or(0.0);
    let inv_lambda2 = if l2 > 0.0 { (1.0 / l2).min(INV_LAMBDA2_SENTINEL) } else { INV_LAMBDA2_SENTINEL };
    Ok(SpectrumResult { eigenvalues, zero_modes: 4 * h * h - h * h, fixed_point, inv_lambda2 })
}

/// Unit-trace solution of `M r = r`: one redundant row of `(I - M)` is replaced by the trace.
fn stationary_marginal<T: Real>(m: &DMatrix<T>, h: usize) -> Result<CMatrix<T>> {
    let n = m.nrows();
    let mut a = DMatrix::identity(n, n) - m;
    let mut rhs = DVector::zeros(n);
    for j in 0..n {
        a[(0, j)] = if j < h { T::one() } else { T::zero() };
    }
    rhs[0] = T::one();
    let solved = a.lu().solve(&rhs).filter(|v| v.iter().all(|x| x.is_finite()));
    let v = match solved {
        Some(v) if residual(m, &v) < tolerance::<T>().as_f64() * 1e2 => v,
        // Degenerate unit eigenvalue: fall back to the Cesaro average from the mixed state.
        _ => cesaro_limit(m, h),
    };
    Ok(from_hermitian_coords(&v, h))
}

fn residual<T: Real>(m: &DMatrix<T>, v: &DVector<T>) -> f64 {
    (m * v - v).amax().as_f64()
}

fn cesaro_limit<T: Real>(m: &DMatrix<T>, h: usize) -> DVector<T> {
    let n = m.nrows();
    let mut v = DVector::zeros(n);
    for a in 0..h {
        v[a] = T::one() / T::from_usize_lossy(h);
    }
    let mut acc = DVector::zeros(n);
    let steps = 20_000;
    for _ in 0..steps {
        v = m * v;
        acc += &v;
    }
    acc / T::from_usize_lossy(steps)
}
