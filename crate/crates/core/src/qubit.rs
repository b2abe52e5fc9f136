//! Complex 2×2 / 4×4 Hermitian algebra, Pauli calculus and Bloch vectors.
//!
//! Basis convention: `|H⟩` is index 0 (Bloch +z), `|V⟩` is index 1. Two-qubit
//! operators are ordered Alice ⊗ Bob, so the composite index is `2·a + b`.

use nalgebra::{DMatrix, Matrix2, Matrix3, Matrix4, SymmetricEigen, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix2 = Matrix2<Complex64>;
pub type ComplexMatrix4 = Matrix4<Complex64>;

/// Tolerance on `|n| − 1` for measurement axes.
pub const UNIT_TOL: f64 = 1e-9;
/// Iteration cap of the 4×4 Hermitian eigensolver.
const EIGEN_MAX_ITER: usize = 500;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Numerical tolerances used when validating density matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub hermitian: f64,
    pub trace: f64,
    pub psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            trace: 1e-10,
            psd: 1e-9,
        }
    }
}

/// One of the two parties. Alice is always the left tensor factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::A => Party::B,
            Party::B => Party::A,
        }
    }
}

pub fn identity2() -> ComplexMatrix2 {
    ComplexMatrix2::identity()
}

pub fn pauli_x() -> ComplexMatrix2 {
    Matrix2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> ComplexMatrix2 {
    Matrix2::new(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> ComplexMatrix2 {
    Matrix2::new(ONE, ZERO, ZERO, -ONE)
}

/// `σ_x, σ_y, σ_z` for `axis` 0, 1, 2.
pub fn pauli(axis: usize) -> ComplexMatrix2 {
    match axis {
        0 => pauli_x(),
        1 => pauli_y(),
        2 => pauli_z(),
        _ => panic!("pauli axis {axis} out of range"),
    }
}

fn check_unit(n: &Vector3<f64>) -> Result<()> {
    let norm = n.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::Normalization { norm });
    }
    Ok(())
}

/// `n·σ` for a unit axis `n`.
pub fn pauli_along(n: &Vector3<f64>) -> Result<ComplexMatrix2> {
    check_unit(n)?;
    Ok(pauli_x().scale(n.x) + pauli_y().scale(n.y) + pauli_z().scale(n.z))
}

pub fn kron(a: &ComplexMatrix2, b: &ComplexMatrix2) -> ComplexMatrix4 {
    ComplexMatrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// Real 3-vector of a 2×2 Hermitian unit-trace operator. Norms above one are
/// allowed: hidden-state candidates are not required to be physical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector(pub Vector3<f64>);

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self(Vector3::new(x, y, z))
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_physical(&self) -> bool {
        self.norm() <= 1.0 + UNIT_TOL
    }

    /// `(I + r·σ)/2`.
    pub fn matrix_of(&self) -> ComplexMatrix2 {
        operator_from_parts(1.0, &self.0)
    }
}

/// Decomposes a 2×2 operator as `(trace, (tr(Mσ_x), tr(Mσ_y), tr(Mσ_z)))`,
/// taking real parts.
pub fn operator_parts(m: &ComplexMatrix2) -> (f64, Vector3<f64>) {
    let trace = (m[(0, 0)] + m[(1, 1)]).re;
    let x = (m[(0, 1)] + m[(1, 0)]).re;
    let y = (I * (m[(0, 1)] - m[(1, 0)])).re;
    let z = (m[(0, 0)] - m[(1, 1)]).re;
    (trace, Vector3::new(x, y, z))
}

/// Inverse of [`operator_parts`]: `(trace·I + u·σ)/2`.
pub fn operator_from_parts(trace: f64, u: &Vector3<f64>) -> ComplexMatrix2 {
    let half = 0.5;
    Matrix2::new(
        Complex64::new(half * (trace + u.z), 0.0),
        Complex64::new(half * u.x, -half * u.y),
        Complex64::new(half * u.x, half * u.y),
        Complex64::new(half * (trace - u.z), 0.0),
    )
}

/// Bloch vector of a unit-trace operator.
pub fn bloch_of(rho: &ComplexMatrix2) -> Result<BlochVector> {
    let trace = rho.trace();
    if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
        return Err(Error::Trace { trace: trace.re });
    }
    let (_, u) = operator_parts(rho);
    Ok(BlochVector(u))
}

/// Closed-form eigenvalues of the Hermitian part of a 2×2 matrix, ascending.
pub fn hermitian_eigenvalues2(m: &ComplexMatrix2) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mean - radius, mean + radius]
}

/// Eigenvalues of a Hermitian 4×4 matrix, ascending.
pub fn hermitian_eigenvalues4(m: &ComplexMatrix4) -> Result<[f64; 4]> {
    let eig = SymmetricEigen::try_new(*m, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::SolverStall("4x4 eigensolver did not converge".into()))?;
    let mut vals = [0.0; 4];
    vals.copy_from_slice(eig.eigenvalues.as_slice());
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// A specific way in which a matrix fails to be a density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DensityFailure {
    NotSquare { rows: usize, cols: usize },
    NonFinite,
    NotHermitian { deviation: f64 },
    Trace { trace: f64 },
    NegativeEigenvalue { min: f64 },
    EigenSolverStall,
}

/// Outcome of [`validate_density`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub dim: usize,
    pub hermitian_deviation: f64,
    pub trace: f64,
    pub min_eigenvalue: Option<f64>,
    pub failures: Vec<DensityFailure>,
}

impl DensityReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }

    pub(crate) fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::Validation(format!("{:?}", self.failures)))
        }
    }
}

/// Checks Hermiticity, unit trace and positivity. Never panics.
pub fn validate_density(m: &DMatrix<Complex64>, tol: &Tolerances) -> DensityReport {
    let (rows, cols) = m.shape();
    let mut report = DensityReport {
        dim: rows,
        hermitian_deviation: f64::NAN,
        trace: f64::NAN,
        min_eigenvalue: None,
        failures: Vec::new(),
    };
    if rows != cols || rows == 0 {
        report.failures.push(DensityFailure::NotSquare { rows, cols });
        return report;
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        report.failures.push(DensityFailure::NonFinite);
        return report;
    }
    let deviation = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    report.hermitian_deviation = deviation;
    if deviation > tol.hermitian {
        report
            .failures
            .push(DensityFailure::NotHermitian { deviation });
    }
    let trace = m.trace();
    report.trace = trace.re;
    if (trace.re - 1.0).abs() > tol.trace || trace.im.abs() > tol.trace {
        report.failures.push(DensityFailure::Trace { trace: trace.re });
    }
    let hermitian = (m + m.adjoint()).scale(0.5);
    let min = if rows == 2 {
        let m2 = ComplexMatrix2::from_fn(|r, c| hermitian[(r, c)]);
        Some(hermitian_eigenvalues2(&m2)[0])
    } else {
        SymmetricEigen::try_new(hermitian, f64::EPSILON, EIGEN_MAX_ITER)
            .map(|e| e.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
    };
    match min {
        Some(min) => {
            report.min_eigenvalue = Some(min);
            if min < -tol.psd {
                report
                    .failures
                    .push(DensityFailure::NegativeEigenvalue { min });
            }
        }
        None => report.failures.push(DensityFailure::EigenSolverStall),
    }
    report
}

fn to_dynamic<const N: usize>(
    m: &nalgebra::SMatrix<Complex64, N, N>,
) -> DMatrix<Complex64> {
    DMatrix::from_column_slice(N, N, m.as_slice())
}

/// A single-qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState(ComplexMatrix2);

impl QubitState {
    pub fn new(matrix: ComplexMatrix2) -> Result<Self> {
        validate_density(&to_dynamic(&matrix), &Tolerances::default()).into_result()?;
        Ok(Self(matrix))
    }

    pub fn from_bloch(r: &BlochVector) -> Result<Self> {
        Self::new(r.matrix_of())
    }

    pub fn maximally_mixed() -> Self {
        Self(identity2().scale(0.5))
    }

    pub fn matrix(&self) -> &ComplexMatrix2 {
        &self.0
    }

    pub fn bloch(&self) -> BlochVector {
        BlochVector(operator_parts(&self.0).1)
    }
}

/// A two-qubit density matrix, Alice ⊗ Bob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitState(ComplexMatrix4);

impl TwoQubitState {
    pub fn new(matrix: ComplexMatrix4) -> Result<Self> {
        Self::validate(&matrix).into_result()?;
        Ok(Self(matrix))
    }

    pub fn validate(matrix: &ComplexMatrix4) -> DensityReport {
        validate_density(&to_dynamic(matrix), &Tolerances::default())
    }

    pub fn product(alice: &QubitState, bob: &QubitState) -> Self {
        Self(kron(alice.matrix(), bob.matrix()))
    }

    pub fn matrix(&self) -> &ComplexMatrix4 {
        &self.0
    }

    /// Traces out `side`, returning the other party's reduced state.
    pub fn partial_trace(&self, side: Party) -> QubitState {
        let m = &self.0;
        let reduced = ComplexMatrix2::from_fn(|r, c| match side {
            Party::A => m[(r, c)] + m[(2 + r, 2 + c)],
            Party::B => m[(2 * r, 2 * c)] + m[(2 * r + 1, 2 * c + 1)],
        });
        QubitState(reduced)
    }

    /// The same state with the roles of Alice and Bob exchanged.
    pub fn swap_parties(&self) -> Self {
        let swap = |i: usize| 2 * (i % 2) + i / 2;
        Self(ComplexMatrix4::from_fn(|r, c| self.0[(swap(r), swap(c))]))
    }

    /// `(U_A ⊗ U_B) ρ (U_A ⊗ U_B)†`.
    pub fn conjugate_local(&self, ua: &ComplexMatrix2, ub: &ComplexMatrix2) -> Self {
        let u = kron(ua, ub);
        Self(u * self.0 * u.adjoint())
    }
}

/// Rotation `R` with `U (n·σ) U† = (R n)·σ`.
pub fn rotation_of_unitary(u: &ComplexMatrix2) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| 0.5 * (pauli(i) * u * pauli(j) * u.adjoint()).trace().re)
}
