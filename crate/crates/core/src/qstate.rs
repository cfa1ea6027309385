//! Dense complex state layer: density matrices, pure states, tensor
//! products, partial traces, dephasing and Hermitian spectral
//! decomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use crate::entropy::Measurement;
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default tolerance for validating user-supplied states.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Largest Hilbert-space dimension a tensor power may reach unless overridden.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Tolerance used for the structural invariants of projectors and unitaries.
pub const STRUCTURE_TOL: f64 = 1e-10;

/// Probabilities and eigenvalues below this are exact zeros in entropy sums.
pub(crate) const ZERO_PROBABILITY: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bipartition {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl Bipartition {
    pub fn new(dim_a: usize, dim_b: usize) -> Self {
        Self { dim_a, dim_b }
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    fn check(&self, dim: usize) -> Result<()> {
        if self.dim_a == 0 || self.dim_b == 0 || self.dim() != dim {
            return Err(Error::InvalidDims {
                dim,
                dim_a: self.dim_a,
                dim_b: self.dim_b,
            });
        }
        Ok(())
    }

    pub fn subsystem_dim(&self, which: Subsystem) -> usize {
        match which {
            Subsystem::A => self.dim_a,
            Subsystem::B => self.dim_b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

pub(crate) fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entrywise deviation of `m` from its conjugate transpose.
pub fn hermitian_violation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entrywise deviation of `U^dag U` from the identity.
pub fn unitarity_violation(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let gram = u.adjoint() * u;
    max_abs(&(gram - CMatrix::identity(u.nrows(), u.ncols())))
}

pub(crate) fn check_square(m: &CMatrix) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Kronecker product of a list of equally sized matrices, first factor slowest.
pub(crate) fn kron_power(m: &CMatrix, n: usize) -> CMatrix {
    let mut out = m.clone();
    for _ in 1..n {
        out = out.kronecker(m);
    }
    out
}

/// `M = V diag(values) V^dag` with ascending values and orthonormal columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let diag = CMatrix::from_diagonal(&CVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&v| c(v, 0.0)),
        ));
        &self.vectors * diag * self.vectors.adjoint()
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Ties keep the order produced by the underlying solver; callers must not
/// depend on the choice of vectors inside a degenerate block.
pub fn spectral(matrix: &CMatrix) -> Result<SpectralDecomposition> {
    check_square(matrix)?;
    let scale = max_abs(matrix).max(1.0);
    let violation = hermitian_violation(matrix);
    if violation > DEFAULT_TOL * scale {
        return Err(Error::NotHermitian { violation });
    }
    Ok(spectral_unchecked(matrix))
}

pub(crate) fn spectral_unchecked(matrix: &CMatrix) -> SpectralDecomposition {
    let n = matrix.nrows();
    if n == 1 {
        return SpectralDecomposition {
            values: vec![matrix[(0, 0)].re],
            vectors: CMatrix::identity(1, 1),
        };
    }
    let eig = SymmetricEigen::try_new(hermitian_part(matrix), f64::EPSILON, 0)
        .expect("symmetric eigensolver with unbounded iterations");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    SpectralDecomposition { values, vectors }
}

/// A validated density matrix with an optional bipartition annotation.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: CMatrix,
    dims: Option<Bipartition>,
}

/// Checks Hermiticity, unit trace and positivity (in that order) without
/// touching `entries`.
pub fn validate_density(entries: CMatrix, tol: f64) -> Result<DensityMatrix> {
    DensityMatrix::new(entries, tol)
}

impl DensityMatrix {
    pub fn new(entries: CMatrix, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "validation tolerance must be positive, got {tol}"
            )));
        }
        check_square(&entries)?;
        let violation = hermitian_violation(&entries);
        if violation > tol {
            return Err(Error::NotHermitian { violation });
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > tol || trace.im.abs() > tol {
            return Err(Error::TraceNotOne { trace: trace.re });
        }
        let min_eigenvalue = spectral_unchecked(&entries).values[0];
        if min_eigenvalue < -tol {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self {
            matrix: entries,
            dims: None,
        })
    }

    /// Wraps a matrix already known to be a state (products, unitary images).
    pub(crate) fn from_trusted(matrix: CMatrix, dims: Option<Bipartition>) -> Self {
        Self { matrix, dims }
    }

    pub fn with_dims(mut self, dims: Bipartition) -> Result<Self> {
        dims.check(self.dim())?;
        self.dims = Some(dims);
        Ok(self)
    }

    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        let diag = CVector::from_iterator(populations.len(), populations.iter().map(|&p| c(p, 0.0)));
        Self::new(CMatrix::from_diagonal(&diag), DEFAULT_TOL)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let m = CMatrix::identity(dim, dim).unscale(dim as f64);
        Self::from_trusted(m, None)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dims(&self) -> Option<Bipartition> {
        self.dims
    }

    pub fn require_dims(&self) -> Result<Bipartition> {
        self.dims.ok_or(Error::MissingDims)
    }

    pub fn spectral(&self) -> SpectralDecomposition {
        spectral_unchecked(&self.matrix)
    }

    /// Ascending eigenvalues with rounding negatives clamped to zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spectral()
            .values
            .into_iter()
            .map(|v| v.max(0.0))
            .collect()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `tr[O rho]` for a Hermitian observable.
    pub fn expectation(&self, observable: &CMatrix) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (observable[(i, j)] * self.matrix[(j, i)]).re;
            }
        }
        acc
    }

    pub fn population(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }

    /// `U rho U^dag`; `u` is assumed unitary.
    pub fn evolve(&self, u: &CMatrix) -> Self {
        Self::from_trusted(u * &self.matrix * u.adjoint(), self.dims)
    }

    pub fn partial_trace(&self, keep: Subsystem) -> Result<Self> {
        let dims = self.require_dims()?;
        let (da, db) = (dims.dim_a, dims.dim_b);
        let m = &self.matrix;
        let reduced = match keep {
            Subsystem::A => CMatrix::from_fn(da, da, |i, j| {
                (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
            }),
            Subsystem::B => CMatrix::from_fn(db, db, |i, j| {
                (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()
            }),
        };
        Ok(Self::from_trusted(reduced, None))
    }

    pub fn tensor_product(&self, other: &Self) -> Self {
        Self::from_trusted(
            self.matrix.kronecker(&other.matrix),
            Some(Bipartition::new(self.dim(), other.dim())),
        )
    }

    /// `rho^{⊗n}` annotated as (first copy) x (remaining copies).
    pub fn tensor_power(&self, n: usize, cap: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("tensor power needs n >= 1".into()));
        }
        let requested = checked_power(self.dim(), n, cap)?;
        if n == 1 {
            return Ok(self.clone());
        }
        let dims = Bipartition::new(self.dim(), requested / self.dim());
        Ok(Self::from_trusted(kron_power(&self.matrix, n), Some(dims)))
    }

    /// `sum_i P_i rho P_i`.
    pub fn dephase(&self, measurement: &Measurement) -> Result<Self> {
        if measurement.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: measurement.dim(),
                found: self.dim(),
            });
        }
        let out = match measurement.basis() {
            Some(basis) => {
                let rotated = basis.adjoint() * &self.matrix * basis;
                let diag = CMatrix::from_diagonal(&rotated.diagonal());
                basis * diag * basis.adjoint()
            }
            None => measurement
                .projectors()
                .iter()
                .fold(CMatrix::zeros(self.dim(), self.dim()), |acc, p| {
                    acc + p * &self.matrix * p
                }),
        };
        Ok(Self::from_trusted(out, self.dims))
    }
}

/// `dim^n`, or `DimensionCap` when it exceeds `cap`.
pub fn checked_power(dim: usize, n: usize, cap: usize) -> Result<usize> {
    let mut acc: usize = 1;
    for _ in 0..n {
        acc = match acc.checked_mul(dim) {
            Some(v) if v <= cap => v,
            _ => {
                let requested = (dim as f64).powi(n as i32);
                return Err(Error::DimensionCap {
                    requested: if requested >= usize::MAX as f64 {
                        usize::MAX
                    } else {
                        requested as usize
                    },
                    cap,
                });
            }
        };
    }
    Ok(acc)
}

/// Half the trace norm of the difference of two states.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let diff = a.matrix() - b.matrix();
    let values = spectral_unchecked(&diff).values;
    Ok(0.5 * values.iter().map(|v| v.abs()).sum::<f64>())
}

/// A normalized state vector with an optional bipartition annotation.
#[derive(Debug, Clone)]
pub struct PureState {
    amplitudes: CVector,
    dims: Option<Bipartition>,
}

impl PureState {
    pub fn new(amplitudes: CVector, tol: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("empty state vector".into()));
        }
        let violation = (amplitudes.norm_squared() - 1.0).abs();
        if violation > tol {
            return Err(Error::NotNormalized { violation });
        }
        Ok(Self {
            amplitudes,
            dims: None,
        })
    }

    /// Normalizes `amplitudes`; fails only for the zero vector.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero vector cannot be normalized".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
            dims: None,
        })
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = c(1.0, 0.0);
        Self {
            amplitudes: v,
            dims: None,
        }
    }

    pub fn with_dims(mut self, dims: Bipartition) -> Result<Self> {
        dims.check(self.dim())?;
        self.dims = Some(dims);
        Ok(self)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn dims(&self) -> Option<Bipartition> {
        self.dims
    }

    pub fn require_dims(&self) -> Result<Bipartition> {
        self.dims.ok_or(Error::MissingDims)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(&self.amplitudes * self.amplitudes.adjoint(), self.dims)
    }

    /// Coefficient matrix `Psi[i_a, i_b]` of the bipartite amplitudes.
    pub fn coefficient_matrix(&self) -> Result<CMatrix> {
        let dims = self.require_dims()?;
        Ok(CMatrix::from_fn(dims.dim_a, dims.dim_b, |i, j| {
            self.amplitudes[i * dims.dim_b + j]
        }))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
            dims: Some(Bipartition::new(self.dim(), other.dim())),
        }
    }
}
