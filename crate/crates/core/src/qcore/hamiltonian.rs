use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::operators::{hermitian_defect, pauli_operator, Axis, CMatrix};
use crate::error::{Error, Result};
use crate::num::{c, cr, Real};

/// Fully connected transverse-field Ising model
/// `H = J Σ_{i<j} h_ij σ^x_i σ^x_j + J Σ_j g_j σ^z_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingHamiltonian<T: Real> {
    n_qubits: usize,
    coupling: T,
    pair_couplings: DMatrix<T>,
    fields: Vec<T>,
    matrix: CMatrix<T>,
}

impl<T: Real> IsingHamiltonian<T> {
    /// Assembles the Hamiltonian from explicit coefficients. Only the upper
    /// triangle of `pair_couplings` is read; the stored copy is symmetrized with
    /// a zero diagonal.
    pub fn from_coefficients(n_qubits: usize, coupling: T, pair_couplings: &DMatrix<T>, fields: &[T]) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Argument("Hamiltonian needs at least one qubit".into()));
        }
        if pair_couplings.nrows() != n_qubits || pair_couplings.ncols() != n_qubits || fields.len() != n_qubits {
            return Err(Error::Argument(format!("coefficient shapes do not match {n_qubits} qubits")));
        }
        let h = DMatrix::from_fn(n_qubits, n_qubits, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => pair_couplings[(i, j)],
            std::cmp::Ordering::Greater => pair_couplings[(j, i)],
            std::cmp::Ordering::Equal => T::zero(),
        });
        let d = 1usize << n_qubits;
        let mut matrix = CMatrix::<T>::zeros(d, d);
        let xs: Vec<CMatrix<T>> =
            (1..=n_qubits).map(|s| pauli_operator(Axis::X, s, n_qubits)).collect::<Result<_>>()?;
        for i in 0..n_qubits {
            for j in i + 1..n_qubits {
                let w = cr(coupling * h[(i, j)]);
                matrix += (&xs[i] * &xs[j]).map(|z| z * w);
            }
        }
        for (j, &g) in fields.iter().enumerate() {
            let z = pauli_operator::<T>(Axis::Z, j + 1, n_qubits)?;
            matrix += z.map(|e| e * cr(coupling * g));
        }
        Ok(Self { n_qubits, coupling, pair_couplings: h, fields: fields.to_vec(), matrix })
    }

    /// Same coefficients with a different coupling magnitude `J`.
    pub fn with_coupling(&self, coupling: T) -> Self {
        Self::from_coefficients(self.n_qubits, coupling, &self.pair_couplings, &self.fields)
            .expect("coefficients already validated")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn coupling(&self) -> T {
        self.coupling
    }

    pub fn pair_couplings(&self) -> &DMatrix<T> {
        &self.pair_couplings
    }

    pub fn fields(&self) -> &[T] {
        &self.fields
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }
}

/// Draws `h_ij` (i<j, row-major) then `g_j` i.i.d. uniform on `[-1, 1]`.
pub fn build_ising_with_rng<T: Real, R: Rng + ?Sized>(
    n_qubits: usize,
    coupling: T,
    rng: &mut R,
) -> IsingHamiltonian<T> {
    let mut h = DMatrix::<T>::zeros(n_qubits, n_qubits);
    for i in 0..n_qubits {
        for j in i + 1..n_qubits {
            h[(i, j)] = T::lit(rng.gen_range(-1.0..=1.0));
        }
    }
    let g: Vec<T> = (0..n_qubits).map(|_| T::lit(rng.gen_range(-1.0..=1.0))).collect();
    IsingHamiltonian::from_coefficients(n_qubits, coupling, &h, &g).expect("n_qubits >= 1 and consistent shapes")
}

/// Random Ising reservoir Hamiltonian from a seed.
///
/// # Panics
/// If `n_qubits == 0`.
pub fn build_ising<T: Real>(n_qubits: usize, coupling: T, seed: u64) -> IsingHamiltonian<T> {
    assert!(n_qubits >= 1, "n_qubits must be >= 1");
    build_ising_with_rng(n_qubits, coupling, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Exact spectral decomposition `H = V diag(E) V†` with ascending energies.
#[derive(Debug, Clone)]
pub struct Eigensystem<T: Real> {
    energies: Vec<T>,
    eigvecs: CMatrix<T>,
}

impl<T: Real> Eigensystem<T> {
    /// Diagonalizes a Hermitian matrix; rejects non-Hermitian input.
    pub fn of_hermitian(m: &CMatrix<T>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Validation("matrix is not square".into()));
        }
        let defect = hermitian_defect(m);
        let scale = m.iter().map(|z| z.norm_sqr().sqrt()).fold(T::one(), |a, b| a.max(b));
        if defect > T::lit(1e-12) * scale {
            return Err(Error::Validation(format!("matrix is not Hermitian (defect {defect})")));
        }
        let eig = SymmetricEigen::new(m.clone());
        let mut order: Vec<usize> = (0..m.nrows()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).expect("finite energies"));
        let energies = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigvecs = CMatrix::from_fn(m.nrows(), m.ncols(), |r, k| eig.eigenvectors[(r, order[k])]);
        Ok(Self { energies, eigvecs })
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn eigvecs(&self) -> &CMatrix<T> {
        &self.eigvecs
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `V diag(E) V†`.
    pub fn reconstruct(&self) -> CMatrix<T> {
        let scaled = CMatrix::from_fn(self.dim(), self.dim(), |r, k| self.eigvecs[(r, k)] * cr(self.energies[k]));
        scaled * self.eigvecs.adjoint()
    }
}

pub fn eigensystem<T: Real>(h: &IsingHamiltonian<T>) -> Eigensystem<T> {
    Eigensystem::of_hermitian(h.matrix()).expect("assembled Ising Hamiltonian is Hermitian")
}

/// `U = e^{-iH dt}` for a fixed time step.
#[derive(Debug, Clone)]
pub struct Propagator<T: Real> {
    dt: T,
    matrix: CMatrix<T>,
}

impl<T: Real> Propagator<T> {
    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    /// Product `self · other`, valid when both share the same Hamiltonian.
    pub fn compose(&self, other: &Self) -> Self {
        Self { dt: self.dt + other.dt, matrix: &self.matrix * &other.matrix }
    }
}

pub fn propagator<T: Real>(eig: &Eigensystem<T>, dt: T) -> Propagator<T> {
    let d = eig.dim();
    let v = &eig.eigvecs;
    let phased = CMatrix::from_fn(d, d, |r, k| {
        let theta = -eig.energies[k] * dt;
        v[(r, k)] * c(theta.cos(), theta.sin())
    });
    Propagator { dt, matrix: phased * v.adjoint() }
}

/// Smallest consecutive energy difference exceeding `tol`.
pub fn spectral_gap<T: Real>(eig: &Eigensystem<T>, tol: T) -> Result<T> {
    eig.energies
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&d| d > tol)
        .fold(None, |best: Option<T>, d| Some(best.map_or(d, |b| b.min(d))))
        .ok_or(Error::NoGap(tol.as_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(a: &CMatrix<f64>, b: &CMatrix<f64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn single_qubit_has_no_pair_terms() {
        let h = build_ising::<f64>(1, 0.8, 3);
        let g = h.fields()[0];
        let expected = pauli_operator::<f64>(Axis::Z, 1, 1).unwrap().map(|z| z * 0.8 * g);
        assert!(max_abs(h.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn coefficients_are_seed_deterministic_and_in_range() {
        let a = build_ising::<f64>(4, 1.0, 42);
        let b = build_ising::<f64>(4, 1.0, 42);
        assert_eq!(a, b);
        assert_ne!(a, build_ising::<f64>(4, 1.0, 43));
        assert!(a.fields().iter().all(|g| g.abs() <= 1.0));
        assert!(a.pair_couplings().iter().all(|g| g.abs() <= 1.0));
        assert_eq!(a.pair_couplings(), &a.pair_couplings().transpose());
        assert!((0..4).all(|i| a.pair_couplings()[(i, i)] == 0.0));
    }

    #[test]
    fn matrix_matches_the_model_formula() {
        let h = build_ising::<f64>(3, 1.7, 8);
        let mut expected = CMatrix::<f64>::zeros(8, 8);
        for i in 1..=3 {
            for j in i + 1..=3 {
                let xx = pauli_operator::<f64>(Axis::X, i, 3).unwrap() * pauli_operator::<f64>(Axis::X, j, 3).unwrap();
                expected += xx * cr(1.7 * h.pair_couplings()[(i - 1, j - 1)]);
            }
            expected += pauli_operator::<f64>(Axis::Z, i, 3).unwrap() * cr(1.7 * h.fields()[i - 1]);
        }
        assert!(max_abs(h.matrix(), &expected) < 1e-15);
        assert!(hermitian_defect(h.matrix()) < 1e-12);
    }

    #[test]
    fn sigma_z_energies() {
        let z = pauli_operator::<f64>(Axis::Z, 1, 1).unwrap();
        let eig = Eigensystem::of_hermitian(&z).unwrap();
        assert_eq!(eig.energies(), &[-1.0, 1.0]);
    }

    #[test]
    fn xx_coupling_energies() {
        let mut hij = DMatrix::zeros(2, 2);
        hij[(0, 1)] = 1.0;
        let h = IsingHamiltonian::<f64>::from_coefficients(2, 1.0, &hij, &[0.0, 0.0]).unwrap();
        let eig = eigensystem(&h);
        for (e, x) in eig.energies().iter().zip([-1.0f64, -1.0, 1.0, 1.0]) {
            assert!((e - x).abs() < 1e-12);
        }
        assert!((spectral_gap(&eig, 1e-9).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_and_unitarity() {
        let h = build_ising::<f64>(4, 1.3, 17);
        let eig = eigensystem(&h);
        assert!(max_abs(&eig.reconstruct(), h.matrix()) < 1e-9);
        let v = eig.eigvecs();
        assert!(max_abs(&(v * v.adjoint()), &CMatrix::identity(16, 16)) < 1e-10);
        let sum: f64 = eig.energies().iter().sum();
        assert!((sum - h.matrix().trace().re).abs() < 1e-10);
        assert!(eig.energies().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let mut m = CMatrix::<f64>::identity(2, 2);
        m[(0, 1)] = cr(1.0);
        assert!(Eigensystem::of_hermitian(&m).is_err());
    }

    #[test]
    fn propagator_algebra() {
        let eig = eigensystem(&build_ising::<f64>(3, 1.0, 5));
        let id = propagator(&eig, 0.0);
        assert!(max_abs(id.matrix(), &CMatrix::identity(8, 8)) < 1e-14);
        let a = propagator(&eig, 0.37);
        let b = propagator(&eig, -0.37);
        assert!(max_abs(&a.compose(&b).matrix().clone(), &CMatrix::identity(8, 8)) < 1e-12);
        let u = a.matrix();
        assert!(max_abs(&(u * u.adjoint()), &CMatrix::identity(8, 8)) < 1e-10);
        let ab = a.compose(&propagator(&eig, 1.1));
        assert!(max_abs(ab.matrix(), propagator(&eig, 1.47).matrix()) < 1e-10);
    }

    #[test]
    fn sigma_z_half_period_is_minus_identity() {
        let z = pauli_operator::<f64>(Axis::Z, 1, 1).unwrap();
        let u = propagator(&Eigensystem::of_hermitian(&z).unwrap(), std::f64::consts::PI);
        assert!(max_abs(u.matrix(), &CMatrix::identity(2, 2).map(|x| -x)) < 1e-14);
    }

    #[test]
    fn gap_scales_linearly_with_coupling() {
        let h1 = build_ising::<f64>(5, 1.0, 2);
        let h2 = h1.with_coupling(2.0);
        let g1 = spectral_gap(&eigensystem(&h1), 1e-9).unwrap();
        let g2 = spectral_gap(&eigensystem(&h2), 1e-9).unwrap();
        assert!((g2 - 2.0 * g1).abs() < 1e-9);
        // Normalized by J the gap is coupling independent.
        assert!((g2 / 2.0 - g1).abs() < 1e-9);
    }

    #[test]
    fn gap_matches_pairwise_scan() {
        let eig = eigensystem(&build_ising::<f64>(3, 1.0, 12));
        let e = eig.energies();
        let mut best = f64::INFINITY;
        for i in 0..e.len() {
            for j in 0..e.len() {
                let d = e[j] - e[i];
                if d > 1e-9 && d < best {
                    best = d;
                }
            }
        }
        assert!((spectral_gap(&eig, 1e-9).unwrap() - best).abs() < 1e-14);
    }

    #[test]
    fn degenerate_spectrum_reports_no_gap() {
        let eig = Eigensystem::of_hermitian(&CMatrix::<f64>::identity(4, 4)).unwrap();
        assert!(matches!(spectral_gap(&eig, 1e-9), Err(Error::NoGap(_))));
    }
}
