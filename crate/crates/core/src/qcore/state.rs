use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use super::hamiltonian::Propagator;
use super::operators::{hermitian_defect, kron, z_sign, CMatrix};
use super::tolerance;
use crate::error::{arg, Error, Result};
use crate::num::{c, cr, Real};

/// Hermitian, positive semidefinite, unit-trace state of an `N`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    n_qubits: usize,
    data: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates `data` against the Hermiticity/trace/PSD tolerances.
    pub fn from_matrix(data: CMatrix<T>) -> Result<Self> {
        let d = data.nrows();
        if d != data.ncols() || d < 2 || !d.is_power_of_two() {
            return Err(Error::Validation(format!(
                "density matrix must be 2^N x 2^N with N >= 1, got {}x{}",
                d,
                data.ncols()
            )));
        }
        let rho = Self { n_qubits: d.trailing_zeros() as usize, data };
        rho.check()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(data: CMatrix<T>) -> Self {
        let n_qubits = data.nrows().trailing_zeros() as usize;
        Self { n_qubits, data }
    }

    /// `I / 2^N`.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        let v = cr(T::one() / T::from_usize_lossy(d));
        Self { n_qubits, data: CMatrix::from_diagonal_element(d, d, v) }
    }

    /// Projector onto the computational basis state with index `index`.
    pub fn basis_state(n_qubits: usize, index: usize) -> Self {
        let d = 1usize << n_qubits;
        assert!(index < d, "basis index out of range");
        let mut data = CMatrix::zeros(d, d);
        data[(index, index)] = cr(T::one());
        Self { n_qubits, data }
    }

    /// Projector onto a (normalized internally) pure state vector.
    pub fn pure(amplitudes: &[crate::num::C<T>]) -> Result<Self> {
        let d = amplitudes.len();
        let norm: T = amplitudes.iter().map(|a| a.norm_sqr()).fold(T::zero(), |x, y| x + y);
        if norm <= T::zero() {
            return arg("zero state vector");
        }
        let data = CMatrix::from_fn(d, d, |i, j| amplitudes[i] * amplitudes[j].conj() / cr(norm));
        Self::from_matrix(data)
    }

    /// Random full-rank state `G G† / tr(G G†)` with complex Gaussian `G`.
    pub fn ginibre<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let d = 1usize << n_qubits;
        let g = CMatrix::<T>::from_fn(d, d, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            c(T::lit(re), T::lit(im))
        });
        let gg = &g * g.adjoint();
        let tr = gg.trace().re;
        let mut data = gg.map(|z| z / cr(tr));
        // Exact Hermiticity; the product is Hermitian only up to rounding.
        data = (&data + data.adjoint()).map(|z| z * cr(T::lit(0.5)));
        Self { n_qubits, data }
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        Self { n_qubits: self.n_qubits + other.n_qubits, data: kron(&self.data, &other.data) }
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.data
    }

    pub fn trace(&self) -> crate::num::C<T> {
        self.data.trace()
    }

    /// Ascending eigenvalues of the (Hermitian) state.
    pub fn eigenvalues(&self) -> Vec<T> {
        let mut ev: Vec<T> = SymmetricEigen::new(self.data.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        ev
    }

    /// Checks the invariants at the default tolerance for `T`.
    pub fn check(&self) -> Result<()> {
        self.check_with(tolerance::<T>())
    }

    pub fn check_with(&self, tol: T) -> Result<()> {
        let herm = hermitian_defect(&self.data);
        if !(herm <= tol) {
            return Err(Error::Validation(format!("not Hermitian: max |rho - rho^dag| = {herm}")));
        }
        let tr = self.trace();
        if !((tr.re - T::one()).abs() <= tol && tr.im.abs() <= tol) {
            return Err(Error::Validation(format!("trace {tr} differs from 1")));
        }
        let min = self.eigenvalues()[0];
        if !(min >= -tol) {
            return Err(Error::Validation(format!("not PSD: smallest eigenvalue {min}")));
        }
        Ok(())
    }
}

/// Reduced state on qubits `2..=N`: `(tr₁ρ)_{ab} = ρ_{(0a)(0b)} + ρ_{(1a)(1b)}`.
pub fn partial_trace_first<T: Real>(rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
    if rho.n_qubits < 2 {
        return arg("partial trace over the first qubit needs at least 2 qubits");
    }
    Ok(DensityMatrix::from_matrix_unchecked(trace_out_first(&rho.data)))
}

/// Partial trace over the most significant qubit of any square `2h x 2h` matrix.
pub(crate) fn trace_out_first<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let h = m.nrows() / 2;
    DMatrix::from_fn(h, h, |a, b| m[(a, b)] + m[(h + a, h + b)])
}

/// `(1 - u)|0><0| + u|1><1|`.
pub fn input_spin_state<T: Real>(u: T) -> CMatrix<T> {
    CMatrix::from_row_slice(2, 2, &[cr(T::one() - u), cr(T::zero()), cr(T::zero()), cr(u)])
}

/// Resets the first qubit to the input state: `ϱ_u ⊗ tr₁(ρ)`.
pub fn inject_input<T: Real>(rho: &DensityMatrix<T>, u: T) -> Result<DensityMatrix<T>> {
    if !(u >= T::zero() && u <= T::one()) {
        return arg(format!("input {u} outside [0, 1]"));
    }
    let spin = input_spin_state(u);
    let data = if rho.n_qubits == 1 { spin.map(|z| z * rho.trace()) } else { kron(&spin, &trace_out_first(&rho.data)) };
    Ok(DensityMatrix::from_matrix_unchecked(data))
}

/// `U ρ U†`.
pub fn evolve<T: Real>(rho: &DensityMatrix<T>, u: &Propagator<T>) -> Result<DensityMatrix<T>> {
    if u.matrix().nrows() != rho.dim() {
        return arg(format!(
            "propagator of dimension {} applied to {}-dimensional state",
            u.matrix().nrows(),
            rho.dim()
        ));
    }
    let m = u.matrix();
    Ok(DensityMatrix::from_matrix_unchecked(m * &rho.data * m.adjoint()))
}

/// `tr(ρ σ^z_site)`.
pub fn measure_z<T: Real>(rho: &DensityMatrix<T>, site: usize) -> Result<T> {
    if site == 0 || site > rho.n_qubits {
        return arg(format!("site {site} outside 1..={}", rho.n_qubits));
    }
    let mut acc = T::zero();
    for a in 0..rho.dim() {
        let v = rho.data[(a, a)].re;
        if z_sign(a, site, rho.n_qubits) > 0 {
            acc += v;
        } else {
            acc -= v;
        }
    }
    Ok(acc)
}

/// Schatten-1 (trace-norm) distance `‖ρ - σ‖₁`: the sum of singular values of the
/// Hermitian difference, i.e. of the absolute eigenvalues.
pub fn schatten1_distance<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return arg("states of different dimension");
    }
    let diff = &a.data - &b.data;
    Ok(SymmetricEigen::new(diff).eigenvalues.iter().fold(T::zero(), |s, &x| s + x.abs()))
}
