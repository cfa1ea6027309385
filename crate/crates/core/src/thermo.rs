//! Hamiltonians, thermal states, entropy-matched inverse temperature,
//! passive states, ergotropy and observational ergotropy.

use crate::entropy::{entanglement_entropy, observational_entropy, Measurement};
use crate::error::{Error, Result};
use crate::qstate::{
    c, check_square, hermitian_violation, kron_power, max_abs, checked_power, CMatrix, CVector,
    DensityMatrix, PureState, SpectralDecomposition, STRUCTURE_TOL,
};

/// Energies closer than this (relative to the spectral width) count as degenerate.
const DEGENERACY_TOL: f64 = 1e-9;

/// Slack allowed when a target entropy sits just outside `[ln g0, ln d]`.
const RANGE_TOL: f64 = 1e-9;

/// Bracket growth stops here; see [`solve_beta`].
const BETA_CAP: f64 = 1e6;

/// A Hermitian observable with its spectral decomposition cached at
/// construction. Energies are ascending.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    matrix: CMatrix,
    spectral: SpectralDecomposition,
}

impl Hamiltonian {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square(&matrix)?;
        let violation = hermitian_violation(&matrix);
        if violation > STRUCTURE_TOL * max_abs(&matrix).max(1.0) {
            return Err(Error::NotHermitian { violation });
        }
        let matrix = crate::qstate::hermitian_part(&matrix);
        let spectral = crate::qstate::spectral_unchecked(&matrix);
        Ok(Self { matrix, spectral })
    }

    pub fn diagonal(energies: &[f64]) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::InvalidArgument("empty Hamiltonian".into()));
        }
        let diag = CVector::from_iterator(energies.len(), energies.iter().map(|&e| c(e, 0.0)));
        Self::new(CMatrix::from_diagonal(&diag))
    }

    pub fn zero(dim: usize) -> Self {
        Self::diagonal(&vec![0.0; dim]).expect("zero matrix is Hermitian")
    }

    /// `H_N = sum_k I ⊗ .. ⊗ H ⊗ .. ⊗ I` over `copies` subsystems.
    pub fn local_sum(&self, copies: usize, cap: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::InvalidArgument("need at least one copy".into()));
        }
        let total = checked_power(self.dim(), copies, cap)?;
        let d = self.dim();
        let mut matrix = CMatrix::zeros(total, total);
        let ident = |n: usize| CMatrix::identity(n, n);
        for k in 0..copies {
            let left = d.pow(k as u32);
            let right = d.pow((copies - k - 1) as u32);
            matrix += ident(left).kronecker(&self.matrix).kronecker(&ident(right));
        }
        let energies = local_sum_energies(self.energies(), copies);
        let vectors = kron_power(&self.spectral.vectors, copies);
        let mut order: Vec<usize> = (0..total).collect();
        order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
        let spectral = SpectralDecomposition {
            values: order.iter().map(|&k| energies[k]).collect(),
            vectors: CMatrix::from_fn(total, total, |i, j| vectors[(i, order[j])]),
        };
        Ok(Self { matrix, spectral })
    }

    /// `H_A ⊗ I + I ⊗ H_B` on a bipartite space.
    pub fn local_terms(a: &Self, b: &Self) -> Self {
        let (da, db) = (a.dim(), b.dim());
        let matrix = a.matrix.kronecker(&CMatrix::identity(db, db))
            + CMatrix::identity(da, da).kronecker(&b.matrix);
        Self::new(matrix).expect("sum of Hermitian terms")
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn energies(&self) -> &[f64] {
        &self.spectral.values
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ground_energy(&self) -> f64 {
        self.spectral.values[0]
    }

    fn degeneracy_tol(&self) -> f64 {
        let e = self.energies();
        DEGENERACY_TOL * (e[e.len() - 1] - e[0]).abs().max(1.0)
    }

    /// Dimension of the ground eigenspace.
    pub fn ground_degeneracy(&self) -> usize {
        let tol = self.degeneracy_tol();
        let e0 = self.ground_energy();
        self.energies().iter().take_while(|&&e| e - e0 <= tol).count()
    }

    /// True when every energy coincides, i.e. `H ∝ I`.
    pub fn is_trivial(&self) -> bool {
        self.ground_degeneracy() == self.dim()
    }

    pub fn energy(&self, state: &DensityMatrix) -> Result<f64> {
        self.check_dim(state.dim())?;
        Ok(state.expectation(&self.matrix))
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        Ok(())
    }
}

/// Energies of `H_N` indexed like the product basis (first copy slowest).
pub(crate) fn local_sum_energies(energies: &[f64], copies: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    for _ in 0..copies {
        out = out
            .iter()
            .flat_map(|&acc| energies.iter().map(move |&e| acc + e))
            .collect();
    }
    out
}

/// `e^{-beta H} / Z`; `beta = f64::INFINITY` is the zero-temperature limit.
#[derive(Debug, Clone)]
pub struct ThermalState {
    pub beta: f64,
    /// Populations on the ascending energy levels of the Hamiltonian.
    pub populations: Vec<f64>,
    pub state: DensityMatrix,
    /// `ln Z` with `Z = sum_k e^{-beta E_k}`.
    pub log_partition_function: f64,
}

impl ThermalState {
    pub fn partition_function(&self) -> f64 {
        self.log_partition_function.exp()
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "inverse temperature must be >= 0 or +inf, got {beta}"
        )));
    }
    Ok(())
}

/// Boltzmann weights relative to the ground energy and `ln` of their sum.
fn shifted_weights(h: &Hamiltonian, beta: f64) -> (Vec<f64>, f64) {
    let e = h.energies();
    let e0 = e[0];
    if beta.is_infinite() {
        let g0 = h.ground_degeneracy();
        let w = (0..e.len()).map(|k| if k < g0 { 1.0 } else { 0.0 }).collect();
        return (w, (g0 as f64).ln());
    }
    let w: Vec<f64> = e.iter().map(|&ek| (-beta * (ek - e0)).exp()).collect();
    // w[0] == 1 exactly, so ln Z' = ln(1 + rest) keeps precision at large beta
    let rest: f64 = w[1..].iter().sum();
    (w, rest.ln_1p())
}

pub fn thermal_state(h: &Hamiltonian, beta: f64) -> Result<ThermalState> {
    check_beta(beta)?;
    let (w, log_z_shifted) = shifted_weights(h, beta);
    let z = log_z_shifted.exp();
    let populations: Vec<f64> = w.iter().map(|&x| x / z).collect();
    let v = &h.spectral().vectors;
    let diag = CVector::from_iterator(populations.len(), populations.iter().map(|&p| c(p, 0.0)));
    let state = DensityMatrix::from_trusted(v * CMatrix::from_diagonal(&diag) * v.adjoint(), None);
    let log_partition_function = if beta.is_infinite() {
        f64::NEG_INFINITY
    } else {
        -beta * h.ground_energy() + log_z_shifted
    };
    Ok(ThermalState {
        beta,
        populations,
        state,
        log_partition_function,
    })
}

/// `S(rho_beta) = ln Z' + beta <E - E_0>`.
pub fn thermal_entropy(h: &Hamiltonian, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(thermal_entropy_unchecked(h, beta))
}

fn thermal_entropy_unchecked(h: &Hamiltonian, beta: f64) -> f64 {
    let (w, log_z) = shifted_weights(h, beta);
    if beta.is_infinite() || beta == 0.0 {
        return log_z;
    }
    let e = h.energies();
    let z = log_z.exp();
    let mean_gap: f64 = w
        .iter()
        .zip(e)
        .skip(1)
        .map(|(&wk, &ek)| wk * (ek - e[0]))
        .sum::<f64>()
        / z;
    log_z + beta * mean_gap
}

/// `tr[H rho_beta]`.
pub fn thermal_energy(h: &Hamiltonian, beta: f64) -> Result<f64> {
    let t = thermal_state(h, beta)?;
    Ok(t.populations.iter().zip(h.energies()).map(|(p, e)| p * e).sum())
}

/// Non-negative inverse temperature whose thermal state has entropy `s_target`.
///
/// Bisection on the monotone map `beta -> S(rho_beta)`. The upper bracket
/// doubles from 1 up to 1e6; a target still unreached there returns
/// `+inf` if within 1e-8 of the cap entropy.
pub fn solve_beta(h: &Hamiltonian, s_target: f64) -> Result<f64> {
    if !s_target.is_finite() {
        return Err(Error::InvalidArgument(format!("entropy target {s_target}")));
    }
    let ln_d = (h.dim() as f64).ln();
    let g0 = h.ground_degeneracy();
    let ln_g0 = (g0 as f64).ln();
    if s_target > ln_d + RANGE_TOL {
        return Err(Error::EntropyOutOfRange {
            target: s_target,
            min: ln_g0,
            max: ln_d,
        });
    }
    // a few ulps below ln d is rounding in the caller's entropy sum
    if s_target >= ln_d - 8.0 * f64::EPSILON * ln_d.max(1.0) {
        return Ok(0.0);
    }
    if h.is_trivial() {
        if s_target >= ln_d - RANGE_TOL {
            return Ok(0.0);
        }
        return Err(Error::DegenerateSpectrum {
            target: s_target,
            max: ln_d,
        });
    }
    if s_target < ln_g0 - RANGE_TOL {
        return Err(Error::EntropyOutOfRange {
            target: s_target,
            min: ln_g0,
            max: ln_d,
        });
    }
    if s_target <= ln_g0 {
        return Ok(f64::INFINITY);
    }

    let entropy = |beta: f64| thermal_entropy_unchecked(h, beta);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while entropy(hi) > s_target {
        lo = hi;
        hi *= 2.0;
        if hi > BETA_CAP {
            let at_cap = entropy(BETA_CAP);
            if at_cap - s_target < 1e-8 {
                return Ok(f64::INFINITY);
            }
            return Err(Error::EntropyOutOfRange {
                target: s_target,
                min: at_cap,
                max: ln_d,
            });
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if entropy(mid) > s_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (r_lo, r_hi) = ((entropy(lo) - s_target).abs(), (entropy(hi) - s_target).abs());
    Ok(if r_lo <= r_hi { lo } else { hi })
}

/// Result of sorting a state onto the energy ladder.
#[derive(Debug, Clone)]
pub struct PassiveTransform {
    pub passive_state: DensityMatrix,
    /// Maps the k-th most populated eigenvector of the state to the k-th
    /// lowest energy eigenvector.
    pub unitary: CMatrix,
    pub extracted: f64,
    pub initial_energy: f64,
    pub passive_energy: f64,
}

/// Eigenvalues descending paired with energies ascending.
pub(crate) fn passive_energy(populations_desc: &[f64], energies_asc: &[f64]) -> f64 {
    populations_desc
        .iter()
        .zip(energies_asc)
        .map(|(p, e)| p * e)
        .sum()
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order
}

pub fn passive_transform(state: &DensityMatrix, h: &Hamiltonian) -> Result<PassiveTransform> {
    h.check_dim(state.dim())?;
    let spec = state.spectral();
    let order = descending_order(&spec.values);
    let d = state.dim();
    let populations: Vec<f64> = order.iter().map(|&k| spec.values[k].max(0.0)).collect();
    let sorted_state_vectors = CMatrix::from_fn(d, d, |i, j| spec.vectors[(i, order[j])]);
    let energy_vectors = &h.spectral().vectors;
    let unitary = energy_vectors * sorted_state_vectors.adjoint();

    let diag = CVector::from_iterator(d, populations.iter().map(|&p| c(p, 0.0)));
    let passive = energy_vectors * CMatrix::from_diagonal(&diag) * energy_vectors.adjoint();
    let initial_energy = state.expectation(h.matrix());
    let passive_energy = passive_energy(&populations, h.energies());
    Ok(PassiveTransform {
        passive_state: DensityMatrix::from_trusted(passive, state.dims()),
        unitary,
        extracted: initial_energy - passive_energy,
        initial_energy,
        passive_energy,
    })
}

/// Maximal energy a single unitary can extract from `state`.
pub fn ergotropy(state: &DensityMatrix, h: &Hamiltonian) -> Result<f64> {
    h.check_dim(state.dim())?;
    let mut populations = state.eigenvalues();
    populations.reverse();
    Ok(state.expectation(h.matrix()) - passive_energy(&populations, h.energies()))
}

/// Per-copy work of the large-N certify-and-extract protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationalErgotropy {
    pub work: f64,
    pub beta: f64,
    pub s_obs: f64,
    pub e_initial: f64,
    pub e_final: f64,
}

impl ObservationalErgotropy {
    /// Negative work means the measurement carries too little information
    /// about the state for the protocol to pay off.
    pub fn poorly_matched(&self) -> bool {
        self.work < 0.0
    }
}

/// `tr[H rho] - tr[H rho_beta]` with `S(rho_beta) = s_obs`.
pub fn ergotropy_at_entropy(
    state: &DensityMatrix,
    h: &Hamiltonian,
    s_obs: f64,
) -> Result<ObservationalErgotropy> {
    let e_initial = h.energy(state)?;
    let beta = solve_beta(h, s_obs)?;
    let e_final = thermal_energy(h, beta)?;
    Ok(ObservationalErgotropy {
        work: e_initial - e_final,
        beta,
        s_obs,
        e_initial,
        e_final,
    })
}

pub fn observational_ergotropy(
    state: &DensityMatrix,
    h: &Hamiltonian,
    measurement: &Measurement,
) -> Result<ObservationalErgotropy> {
    h.check_dim(state.dim())?;
    let s_obs = observational_entropy(state, measurement)?;
    ergotropy_at_entropy(state, h, s_obs)
}

/// Observational ergotropy at the Schmidt product basis of a pure state.
pub fn entanglement_ergotropy(state: &PureState, h: &Hamiltonian) -> Result<ObservationalErgotropy> {
    let s_ent = entanglement_entropy(state)?;
    ergotropy_at_entropy(&state.density(), h, s_ent)
}
