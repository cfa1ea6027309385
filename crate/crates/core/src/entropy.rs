//! Entropy functionals: von Neumann entropy, observational entropy of
//! projective measurements, Schmidt decomposition and entanglement entropy.

use crate::error::{Error, Result};
use crate::qstate::{
    c, check_square, max_abs, unitarity_violation, CMatrix, CVector, DensityMatrix, PureState,
    Subsystem, STRUCTURE_TOL, ZERO_PROBABILITY,
};

/// `-x ln x` with the zero-probability convention.
pub(crate) fn eta(x: f64) -> f64 {
    if x <= ZERO_PROBABILITY {
        0.0
    } else {
        -x * x.ln()
    }
}

/// Shannon entropy in nats of a probability vector.
pub fn shannon_entropy(probabilities: &[f64]) -> f64 {
    probabilities.iter().map(|&p| eta(p)).sum()
}

/// A projective measurement: orthogonal projectors summing to the identity.
///
/// Rank-one measurements also keep the basis they were built from; the
/// `k`-th column of [`Measurement::basis`] spans the `k`-th projector.
#[derive(Debug, Clone)]
pub struct Measurement {
    dim: usize,
    projectors: Vec<CMatrix>,
    volumes: Vec<usize>,
    labels: Option<Vec<String>>,
    basis: Option<CMatrix>,
}

impl Measurement {
    /// Rank-one measurement onto the columns of a unitary.
    pub fn from_basis(basis: CMatrix) -> Result<Self> {
        check_square(&basis)?;
        let violation = unitarity_violation(&basis);
        if violation > STRUCTURE_TOL {
            return Err(Error::NotUnitary { violation });
        }
        let dim = basis.nrows();
        let projectors = (0..dim)
            .map(|k| {
                let col = basis.column(k);
                col * col.adjoint()
            })
            .collect();
        Ok(Self {
            dim,
            projectors,
            volumes: vec![1; dim],
            labels: None,
            basis: Some(basis),
        })
    }

    pub fn from_projectors(projectors: Vec<CMatrix>) -> Result<Self> {
        let first = projectors
            .first()
            .ok_or_else(|| Error::InvalidArgument("measurement needs at least one projector".into()))?;
        check_square(first)?;
        let dim = first.nrows();
        let mut volumes = Vec::with_capacity(projectors.len());
        for (index, p) in projectors.iter().enumerate() {
            if p.nrows() != dim || p.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.nrows(),
                });
            }
            let herm = max_abs(&(p - p.adjoint()));
            if herm > STRUCTURE_TOL {
                return Err(Error::InvalidProjector {
                    index,
                    reason: format!("not Hermitian (violation {herm:.3e})"),
                });
            }
            let idem = max_abs(&(p * p - p));
            if idem > STRUCTURE_TOL {
                return Err(Error::InvalidProjector {
                    index,
                    reason: format!("not idempotent (violation {idem:.3e})"),
                });
            }
            let rank = p.trace().re.round();
            if rank < 1.0 {
                return Err(Error::InvalidProjector {
                    index,
                    reason: "zero projector".into(),
                });
            }
            volumes.push(rank as usize);
        }
        for i in 0..projectors.len() {
            for j in (i + 1)..projectors.len() {
                let violation = max_abs(&(&projectors[i] * &projectors[j]));
                if violation > STRUCTURE_TOL {
                    return Err(Error::ProjectorsNotOrthogonal {
                        first: i,
                        second: j,
                        violation,
                    });
                }
            }
        }
        let sum = projectors
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, p| acc + p);
        let violation = max_abs(&(sum - CMatrix::identity(dim, dim)));
        if violation > STRUCTURE_TOL {
            return Err(Error::IncompleteMeasurement { violation });
        }
        debug_assert_eq!(volumes.iter().sum::<usize>(), dim);

        let basis = if volumes.iter().all(|&v| v == 1) {
            let cols: Vec<CVector> = projectors
                .iter()
                .map(|p| {
                    let d = crate::qstate::spectral_unchecked(p);
                    d.vectors.column(dim - 1).into_owned()
                })
                .collect();
            Some(CMatrix::from_columns(&cols))
        } else {
            None
        };
        Ok(Self {
            dim,
            projectors,
            volumes,
            labels: None,
            basis,
        })
    }

    pub fn computational(dim: usize) -> Self {
        Self::from_basis(CMatrix::identity(dim, dim)).expect("identity is unitary")
    }

    /// The single-outcome measurement `{I}`.
    pub fn trivial(dim: usize) -> Self {
        Self::from_projectors(vec![CMatrix::identity(dim, dim)]).expect("identity is a projector")
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.projectors.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} outcomes",
                labels.len(),
                self.projectors.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.projectors.len()
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn volumes(&self) -> &[usize] {
        &self.volumes
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn basis(&self) -> Option<&CMatrix> {
        self.basis.as_ref()
    }

    pub fn is_rank_one(&self) -> bool {
        self.basis.is_some()
    }

    pub fn require_basis(&self) -> Result<&CMatrix> {
        match &self.basis {
            Some(b) => Ok(b),
            None => {
                let index = self.volumes.iter().position(|&v| v != 1).unwrap_or(0);
                Err(Error::NotRankOne {
                    index,
                    volume: self.volumes[index],
                })
            }
        }
    }

    /// Reorders outcomes; `order[k]` is the old index of new outcome `k`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            dim: self.dim,
            projectors: order.iter().map(|&k| self.projectors[k].clone()).collect(),
            volumes: order.iter().map(|&k| self.volumes[k]).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| order.iter().map(|&k| l[k].clone()).collect()),
            basis: self
                .basis
                .as_ref()
                .map(|b| CMatrix::from_columns(&order.iter().map(|&k| b.column(k)).collect::<Vec<_>>())),
        }
    }
}

/// A local measurement basis `{|i> ⊗ |j>}`, one unitary per party.
#[derive(Debug, Clone)]
pub struct ProductMeasurement {
    pub basis_a: CMatrix,
    pub basis_b: CMatrix,
}

impl ProductMeasurement {
    pub fn new(basis_a: CMatrix, basis_b: CMatrix) -> Result<Self> {
        for u in [&basis_a, &basis_b] {
            check_square(u)?;
            let violation = unitarity_violation(u);
            if violation > STRUCTURE_TOL {
                return Err(Error::NotUnitary { violation });
            }
        }
        Ok(Self { basis_a, basis_b })
    }

    pub fn computational(dim_a: usize, dim_b: usize) -> Self {
        Self {
            basis_a: CMatrix::identity(dim_a, dim_a),
            basis_b: CMatrix::identity(dim_b, dim_b),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.basis_a.nrows(), self.basis_b.nrows())
    }

    /// The joint basis; column `i * d_b + j` is `|i> ⊗ |j>`.
    pub fn joint_basis(&self) -> CMatrix {
        self.basis_a.kronecker(&self.basis_b)
    }

    pub fn measurement(&self) -> Measurement {
        Measurement::from_basis(self.joint_basis()).expect("product of unitaries")
    }
}

/// Outcome probabilities of a measurement together with that measurement.
#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    pub probabilities: Vec<f64>,
    pub measurement: Measurement,
}

impl OutcomeDistribution {
    pub fn new(probabilities: Vec<f64>, measurement: Measurement) -> Result<Self> {
        if probabilities.len() != measurement.outcomes() {
            return Err(Error::DimensionMismatch {
                expected: measurement.outcomes(),
                found: probabilities.len(),
            });
        }
        let total: f64 = probabilities.iter().sum();
        if probabilities.iter().any(|&p| !(p >= 0.0)) || (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "probabilities must be non-negative and sum to one (sum {total})"
            )));
        }
        Ok(Self {
            probabilities,
            measurement,
        })
    }

    /// `-sum p_i ln(p_i / V_i)`.
    pub fn observational_entropy(&self) -> f64 {
        self.probabilities
            .iter()
            .zip(self.measurement.volumes())
            .map(|(&p, &v)| {
                if p <= ZERO_PROBABILITY {
                    0.0
                } else {
                    -p * (p / v as f64).ln()
                }
            })
            .sum()
    }

    /// The coarse-grained state `sum_i p_i P_i / V_i`.
    pub fn coarse_grained_state(&self) -> DensityMatrix {
        let dim = self.measurement.dim();
        let m = self
            .probabilities
            .iter()
            .zip(self.measurement.projectors())
            .zip(self.measurement.volumes())
            .fold(CMatrix::zeros(dim, dim), |acc, ((&p, proj), &v)| {
                acc + proj.scale(p / v as f64)
            });
        DensityMatrix::from_trusted(m, None)
    }
}

/// Von Neumann entropy `-tr rho ln rho` in nats.
pub fn von_neumann_entropy(state: &DensityMatrix) -> f64 {
    shannon_entropy(&state.eigenvalues())
}

/// `p_i = tr[P_i rho]`.
pub fn outcome_distribution(
    state: &DensityMatrix,
    measurement: &Measurement,
) -> Result<OutcomeDistribution> {
    if measurement.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: measurement.dim(),
            found: state.dim(),
        });
    }
    let mut probabilities: Vec<f64> = match measurement.basis() {
        Some(basis) => (0..basis.ncols())
            .map(|k| {
                let col = basis.column(k);
                (col.adjoint() * state.matrix() * col)[(0, 0)].re
            })
            .collect(),
        None => measurement
            .projectors()
            .iter()
            .map(|p| state.expectation(p))
            .collect(),
    };
    for p in probabilities.iter_mut() {
        *p = p.max(0.0);
    }
    let total: f64 = probabilities.iter().sum();
    for p in probabilities.iter_mut() {
        *p /= total;
    }
    Ok(OutcomeDistribution {
        probabilities,
        measurement: measurement.clone(),
    })
}

/// Observational entropy `S_C = -sum p_i ln(p_i / V_i)`.
pub fn observational_entropy(state: &DensityMatrix, measurement: &Measurement) -> Result<f64> {
    Ok(outcome_distribution(state, measurement)?.observational_entropy())
}

/// Schmidt form `|psi> = sum_i sqrt(lambda_i) |a_i> ⊗ |b_i>`.
///
/// `coefficients` holds the populations `lambda_i` (descending, length
/// `min(d_a, d_b)`); the first `min(d_a, d_b)` columns of the two bases are
/// paired and the rest complete each basis.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub basis_a: CMatrix,
    pub basis_b: CMatrix,
}

impl SchmidtDecomposition {
    pub fn product_measurement(&self) -> ProductMeasurement {
        ProductMeasurement {
            basis_a: self.basis_a.clone(),
            basis_b: self.basis_b.clone(),
        }
    }

    pub fn reconstruct(&self) -> CVector {
        let db = self.basis_b.nrows();
        let da = self.basis_a.nrows();
        let mut out = CVector::zeros(da * db);
        for (k, &lambda) in self.coefficients.iter().enumerate() {
            let term = self.basis_a.column(k).kronecker(&self.basis_b.column(k));
            out += term * c(lambda.sqrt(), 0.0);
        }
        out
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.coefficients)
    }
}

/// Schmidt decomposition from the reduced state of A plus partner vectors.
pub fn schmidt(state: &PureState) -> Result<SchmidtDecomposition> {
    let dims = state.require_dims()?;
    let (da, db) = (dims.dim_a, dims.dim_b);
    let psi = state.coefficient_matrix()?;
    let reduced = &psi * psi.adjoint();
    let spec = crate::qstate::spectral_unchecked(&reduced);

    // descending, ties keep first occurrence
    let mut order: Vec<usize> = (0..da).rev().collect();
    order.sort_by(|&x, &y| spec.values[y].total_cmp(&spec.values[x]));
    let basis_a = CMatrix::from_columns(
        &order
            .iter()
            .map(|&k| spec.vectors.column(k).into_owned())
            .collect::<Vec<_>>(),
    );

    let rank = da.min(db);
    let mut coefficients: Vec<f64> = order[..rank]
        .iter()
        .map(|&k| spec.values[k].max(0.0))
        .collect();
    let total: f64 = coefficients.iter().sum();
    for l in coefficients.iter_mut() {
        *l /= total;
    }

    // partner |b_k> = (<a_k| ⊗ I)|psi> / sqrt(lambda_k)
    let mut partners: Vec<CVector> = Vec::with_capacity(db);
    for k in 0..rank {
        if coefficients[k] <= 1e-12 {
            break;
        }
        let v = (basis_a.column(k).adjoint() * &psi).transpose();
        let v = CVector::from_iterator(db, v.iter().cloned());
        if let Some(u) = orthonormalize_against(&v, &partners) {
            partners.push(u);
        } else {
            break;
        }
    }
    complete_basis(&mut partners, db);
    Ok(SchmidtDecomposition {
        coefficients,
        basis_a,
        basis_b: CMatrix::from_columns(&partners),
    })
}

/// Gram-Schmidt step (applied twice); `None` if `v` is in the span.
fn orthonormalize_against(v: &CVector, basis: &[CVector]) -> Option<CVector> {
    let mut w = v.clone();
    for _ in 0..2 {
        for b in basis {
            let overlap = b.dotc(&w);
            w -= b * overlap;
        }
    }
    let norm = w.norm();
    if norm <= 1e-8 * v.norm().max(1e-300) {
        None
    } else {
        Some(w.unscale(norm))
    }
}

fn complete_basis(basis: &mut Vec<CVector>, dim: usize) {
    while basis.len() < dim {
        let mut best: Option<CVector> = None;
        let mut best_norm = -1.0;
        for e in 0..dim {
            let mut v = CVector::zeros(dim);
            v[e] = c(1.0, 0.0);
            for b in basis.iter() {
                let overlap = b.dotc(&v);
                v -= b * overlap;
            }
            let n = v.norm();
            if n > best_norm {
                best_norm = n;
                best = Some(v);
            }
        }
        let v = best.expect("dim > 0");
        let u = orthonormalize_against(&v, basis).expect("residual of a missing direction");
        basis.push(u);
    }
}

/// Entanglement entropy `S(rho_A) = S(rho_B)` of a bipartite pure state.
pub fn entanglement_entropy(state: &PureState) -> Result<f64> {
    Ok(schmidt(state)?.entropy())
}

/// Entanglement entropy evaluated through one chosen reduced state.
pub fn entanglement_entropy_via(state: &PureState, side: Subsystem) -> Result<f64> {
    state.require_dims()?;
    let reduced = state.density().partial_trace(side)?;
    Ok(von_neumann_entropy(&reduced))
}
