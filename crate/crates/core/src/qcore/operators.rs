use nalgebra::DMatrix;

use crate::error::{arg, Result};
use crate::num::{c, cr, Real, C};

/// Dense complex matrix.
pub type CMatrix<T> = DMatrix<C<T>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

fn single<T: Real>(axis: Axis) -> CMatrix<T> {
    let (o, z) = (T::one(), T::zero());
    match axis {
        Axis::X => CMatrix::from_row_slice(2, 2, &[cr(z), cr(o), cr(o), cr(z)]),
        Axis::Y => CMatrix::from_row_slice(2, 2, &[cr(z), c(z, -o), c(z, o), cr(z)]),
        Axis::Z => CMatrix::from_row_slice(2, 2, &[cr(o), cr(z), cr(z), cr(-o)]),
    }
}

pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

/// `I ⊗ … ⊗ σ^axis ⊗ … ⊗ I` with the Pauli matrix at 1-based `site`.
pub fn pauli_operator<T: Real>(axis: Axis, site: usize, n_qubits: usize) -> Result<CMatrix<T>> {
    if site == 0 || site > n_qubits {
        return arg(format!("site {site} outside 1..={n_qubits}"));
    }
    let mut out = CMatrix::<T>::identity(1, 1);
    for q in 1..=n_qubits {
        let factor = if q == site { single(axis) } else { CMatrix::identity(2, 2) };
        out = kron(&out, &factor);
    }
    Ok(out)
}

/// Eigenvalue (+1 or -1) of `σ^z_site` on basis index `index`.
#[inline]
pub fn z_sign(index: usize, site: usize, n_qubits: usize) -> i32 {
    if (index >> (n_qubits - site)) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// `max |m - m†|` elementwise.
pub fn hermitian_defect<T: Real>(m: &CMatrix<T>) -> T {
    let mut worst = T::zero();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm_sqr().sqrt();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// `max |a - b|` elementwise over complex entries.
pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).fold(T::zero(), |w, (x, y)| {
        let d = (*x - *y).norm_sqr().sqrt();
        if d > w {
            d
        } else {
            w
        }
    })
}
