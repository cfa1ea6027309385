//! Certify-then-extract protocol on N copies of a source.
//!
//! A certifier measures the source in a fixed basis and publishes the
//! outcome statistics `p`. The extractor applies independent random phases
//! in that basis to every copy, which turns each copy into the coarse-grained
//! state `rho_cg = sum_i p_i |i><i|` on average, then applies the unitary that
//! makes `rho_cg^{⊗N}` passive for `H_N = sum_k H_k`.

use std::f64::consts::TAU;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;

use crate::entropy::{outcome_distribution, Measurement, OutcomeDistribution};
use crate::error::{Error, Result};
use crate::qstate::{checked_power, kron_power, CMatrix, DensityMatrix, C64, DEFAULT_DIM_CAP};
use crate::rng::{stream, stream_at, Stage};
use crate::thermo::{
    ergotropy_at_entropy, local_sum_energies, solve_beta, thermal_state, Hamiltonian,
};

/// Outcome statistics either computed exactly or estimated from samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certification {
    Exact,
    Samples(u64),
}

impl std::fmt::Display for Certification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Certification::Exact => f.write_str("exact"),
            Certification::Samples(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub copies: usize,
    pub trials: usize,
    pub seed: u64,
    pub certification: Certification,
    pub measurement: Measurement,
    pub dim_cap: usize,
}

impl ProtocolConfig {
    pub fn new(measurement: Measurement, copies: usize, trials: usize, seed: u64) -> Self {
        Self {
            copies,
            trials,
            seed,
            certification: Certification::Exact,
            measurement,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.copies == 0 || self.trials == 0 {
            return Err(Error::InvalidArgument(
                "copies and trials must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome statistics of `measurement` on `state`, exact or as empirical
/// frequencies of i.i.d. draws.
pub fn certify(
    state: &DensityMatrix,
    measurement: &Measurement,
    certification: Certification,
    seed: u64,
) -> Result<OutcomeDistribution> {
    let exact = outcome_distribution(state, measurement)?;
    let samples = match certification {
        Certification::Exact => return Ok(exact),
        Certification::Samples(0) => {
            return Err(Error::InvalidArgument(
                "certification needs at least one sample".into(),
            ))
        }
        Certification::Samples(n) => n,
    };
    let sampler = WeightedIndex::new(&exact.probabilities)
        .map_err(|e| Error::InvalidArgument(format!("outcome weights: {e}")))?;
    let mut rng = stream(seed, Stage::Certify, 0);
    let mut counts = vec![0u64; exact.probabilities.len()];
    for _ in 0..samples {
        counts[sampler.sample(&mut rng)] += 1;
    }
    let frequencies = counts
        .iter()
        .map(|&k| k as f64 / samples as f64)
        .collect();
    Ok(OutcomeDistribution {
        probabilities: frequencies,
        measurement: exact.measurement,
    })
}

fn draw_phases<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| rng.random::<f64>() * TAU).collect()
}

fn phase_unitary(basis: &CMatrix, phases: &[f64]) -> CMatrix {
    let d = basis.nrows();
    let scaled = CMatrix::from_fn(d, d, |i, k| basis[(i, k)] * C64::from_polar(1.0, phases[k]));
    scaled * basis.adjoint()
}

/// `sum_i e^{i theta_i} |i><i|` with `theta_i` uniform on `[0, 2 pi)`.
pub fn random_phase_unitary<R: Rng + ?Sized>(
    measurement: &Measurement,
    rng: &mut R,
) -> Result<CMatrix> {
    let basis = measurement.require_basis()?;
    Ok(phase_unitary(basis, &draw_phases(basis.ncols(), rng)))
}

/// Indices sorted by `key`, stable.
fn sorted_by(values: &[f64], descending: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    if descending {
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    } else {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    }
    order
}

fn product_populations(p: &[f64], copies: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..copies {
        out = out
            .iter()
            .flat_map(|&acc| p.iter().map(move |&x| acc * x))
            .collect();
    }
    out
}

fn check_ham(h: &Hamiltonian, dim: usize) -> Result<()> {
    if h.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: dim,
        });
    }
    Ok(())
}

/// The unitary sending `rho_cg^{⊗N}` to its passive state for `H_N`:
/// the k-th most populated product basis vector goes to the k-th lowest
/// energy product eigenvector.
pub fn extraction_unitary(
    p: &OutcomeDistribution,
    h: &Hamiltonian,
    copies: usize,
    cap: usize,
) -> Result<CMatrix> {
    let basis = p.measurement.require_basis()?;
    check_ham(h, basis.nrows())?;
    let total = checked_power(basis.nrows(), copies, cap)?;
    let pops = product_populations(&p.probabilities, copies);
    let energies = local_sum_energies(h.energies(), copies);
    let pi = sorted_by(&pops, true);
    let sigma = sorted_by(&energies, false);
    let b_n = kron_power(basis, copies);
    let e_n = kron_power(&h.spectral().vectors, copies);
    let sources = CMatrix::from_fn(total, total, |i, k| b_n[(i, pi[k])]);
    let targets = CMatrix::from_fn(total, total, |i, k| e_n[(i, sigma[k])]);
    Ok(targets * sources.adjoint())
}

#[derive(Debug, Clone)]
pub struct WorkSamples {
    pub samples: Vec<f64>,
    pub mean: f64,
    pub std_error: f64,
    pub exact_mean: f64,
    /// `tr[H_N rho^{⊗N}]` of the true source.
    pub initial_energy: f64,
    /// Initial energy as estimated from the certified statistics, available
    /// when the measurement basis diagonalizes `H`.
    pub initial_energy_estimate: Option<f64>,
    pub certified: Vec<f64>,
    pub copies: usize,
    pub trials: usize,
    pub seed: u64,
    pub certification: Certification,
}

/// Precomputed N-copy extraction for a fixed source, Hamiltonian and
/// certified distribution.
///
/// With `W = U B_N`, `G = W^dag H_N W` and `R = B_N^dag rho^{⊗N} B_N`, a
/// trial with product phases `phi_a` leaves energy
/// `sum_ab G_ba R_ab e^{i(phi_a - phi_b)}`.
pub struct Extraction {
    config: ProtocolConfig,
    dim: usize,
    certified: OutcomeDistribution,
    unitary: CMatrix,
    source: CMatrix,
    weights: CMatrix,
    initial_energy: f64,
    exact_mean: f64,
    initial_energy_estimate: Option<f64>,
}

impl Extraction {
    pub fn new(state: &DensityMatrix, h: &Hamiltonian, config: &ProtocolConfig) -> Result<Self> {
        config.validate()?;
        let measurement = &config.measurement;
        let basis = measurement.require_basis()?.clone();
        let d = state.dim();
        if measurement.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: measurement.dim(),
                found: d,
            });
        }
        check_ham(h, d)?;
        checked_power(d, config.copies, config.dim_cap)?;
        let certified = certify(state, measurement, config.certification, config.seed)?;
        let unitary = extraction_unitary(&certified, h, config.copies, config.dim_cap)?;

        let b_n = kron_power(&basis, config.copies);
        let h_n = h.local_sum(config.copies, config.dim_cap)?;
        let rho_n = kron_power(state.matrix(), config.copies);
        let initial_energy = (h_n.matrix() * &rho_n).trace().re;
        let w = &unitary * &b_n;
        let g = w.adjoint() * h_n.matrix() * &w;
        let r = b_n.adjoint() * &rho_n * &b_n;
        let weights = CMatrix::from_fn(r.nrows(), r.ncols(), |a, b| g[(b, a)] * r[(a, b)]);

        let pops = product_populations(&certified.probabilities, config.copies);
        let final_energy: f64 = pops.iter().enumerate().map(|(a, &p)| p * g[(a, a)].re).sum();
        let exact_mean = initial_energy - final_energy;

        let in_basis = basis.adjoint() * h.matrix() * &basis;
        let off_diagonal = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| in_basis[(i, j)].norm())
            .fold(0.0, f64::max);
        let initial_energy_estimate = (off_diagonal <= 1e-10 * h.matrix().norm().max(1.0)).then(|| {
            config.copies as f64
                * certified
                    .probabilities
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| p * in_basis[(i, i)].re)
                    .sum::<f64>()
        });

        Ok(Self {
            config: config.clone(),
            dim: d,
            certified,
            unitary,
            source: rho_n,
            weights,
            initial_energy,
            exact_mean,
            initial_energy_estimate,
        })
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn certified(&self) -> &OutcomeDistribution {
        &self.certified
    }

    pub fn exact_mean(&self) -> f64 {
        self.exact_mean
    }

    pub fn initial_energy(&self) -> f64 {
        self.initial_energy
    }

    /// Phases of each copy in trial `trial`, one fresh stream per copy.
    pub fn trial_phases(&self, trial: usize) -> Vec<Vec<f64>> {
        (0..self.config.copies)
            .map(|k| {
                let mut rng = stream_at(self.config.seed, Stage::Extract, trial as u64, k as u64);
                draw_phases(self.dim, &mut rng)
            })
            .collect()
    }

    fn product_phases(&self, trial: usize) -> Vec<C64> {
        let mut phi = vec![0.0];
        for theta in self.trial_phases(trial) {
            phi = phi
                .iter()
                .flat_map(|&acc| theta.iter().map(move |&t| acc + t))
                .collect();
        }
        phi.into_iter().map(|x| C64::from_polar(1.0, x)).collect()
    }

    /// Work extracted in one trial.
    pub fn trial_work(&self, trial: usize) -> f64 {
        let z = self.product_phases(trial);
        let n = z.len();
        let mut energy = C64::new(0.0, 0.0);
        for a in 0..n {
            let mut row = C64::new(0.0, 0.0);
            for b in 0..n {
                row += self.weights[(a, b)] * z[b].conj();
            }
            energy += z[a] * row;
        }
        self.initial_energy - energy.re
    }

    /// Full post-extraction state of one trial, `U (⊗_k U_k) rho^{⊗N} (..)^dag`.
    pub fn trial_state(&self, trial: usize) -> Result<DensityMatrix> {
        let basis = self.config.measurement.require_basis()?;
        let mut kick = CMatrix::identity(1, 1);
        for theta in self.trial_phases(trial) {
            kick = kick.kronecker(&phase_unitary(basis, &theta));
        }
        let total = &self.unitary * kick;
        let sigma = &total * &self.source * total.adjoint();
        DensityMatrix::new(sigma, 1e-8)
    }

    pub fn run(&self) -> WorkSamples {
        let trials = self.config.trials;
        let samples: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|t| self.trial_work(t))
            .collect();
        let mean = samples.iter().sum::<f64>() / trials as f64;
        let std_error = if trials > 1 {
            let var = samples.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
            (var / trials as f64).sqrt()
        } else {
            0.0
        };
        WorkSamples {
            samples,
            mean,
            std_error,
            exact_mean: self.exact_mean,
            initial_energy: self.initial_energy,
            initial_energy_estimate: self.initial_energy_estimate,
            certified: self.certified.probabilities.clone(),
            copies: self.config.copies,
            trials,
            seed: self.config.seed,
            certification: self.config.certification,
        }
    }
}

/// Monte Carlo work statistics of the protocol.
pub fn simulate_extraction(
    state: &DensityMatrix,
    h: &Hamiltonian,
    config: &ProtocolConfig,
) -> Result<WorkSamples> {
    Ok(Extraction::new(state, h, config)?.run())
}

/// Eigenvalues of the coarse-grained state: `p_i / V_i` repeated `V_i` times.
fn coarse_spectrum(p: &OutcomeDistribution) -> Vec<f64> {
    p.probabilities
        .iter()
        .zip(p.measurement.volumes())
        .flat_map(|(&pi, &v)| std::iter::repeat_n(pi / v as f64, v))
        .collect()
}

/// All `n` with `sum n_k = copies` over `parts` slots, lexicographic.
fn compositions(parts: usize, copies: usize) -> Vec<Vec<usize>> {
    fn rec(parts: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() + 1 == parts {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k);
            rec(parts, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(parts, copies, &mut Vec::with_capacity(parts), &mut out);
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Number of multinomial classes; checked against `cap`.
fn class_count(parts: usize, copies: usize, cap: usize) -> Result<usize> {
    let count = binomial(copies + parts - 1, parts - 1);
    if count > cap as f64 {
        return Err(Error::DimensionCap {
            requested: if count >= usize::MAX as f64 { usize::MAX } else { count as usize },
            cap,
        });
    }
    Ok(count as usize)
}

struct TypeClass {
    value: f64,
    size: f64,
    occupation: Vec<usize>,
}

fn type_classes(levels: &[f64], copies: usize, combine: impl Fn(&[f64], &[usize]) -> f64) -> Vec<TypeClass> {
    compositions(levels.len(), copies)
        .into_iter()
        .map(|n| {
            let mut left = copies;
            let mut size = 1.0;
            for &k in &n {
                size *= binomial(left, k);
                left -= k;
            }
            TypeClass {
                value: combine(levels, &n),
                size,
                occupation: n,
            }
        })
        .collect()
}

/// Passive N-copy pairing computed on multinomial classes: returns the
/// passive energy and the mass each energy class receives.
struct ClassPairing {
    passive_energy: f64,
    energy_classes: Vec<TypeClass>,
    mass: Vec<f64>,
}

fn pair_classes(spectrum: &[f64], energies: &[f64], copies: usize) -> ClassPairing {
    let mut pops = type_classes(spectrum, copies, |l, n| {
        l.iter().zip(n).map(|(&x, &k)| x.powi(k as i32)).product()
    });
    let mut levels = type_classes(energies, copies, |l, n| {
        l.iter().zip(n).map(|(&x, &k)| x * k as f64).sum()
    });
    pops.sort_by(|a, b| b.value.total_cmp(&a.value));
    levels.sort_by(|a, b| a.value.total_cmp(&b.value));

    let mut mass = vec![0.0; levels.len()];
    let mut passive_energy = 0.0;
    let (mut i, mut j) = (0, 0);
    let (mut left_p, mut left_e) = (pops[0].size, levels[0].size);
    while i < pops.len() && j < levels.len() {
        let m = left_p.min(left_e);
        passive_energy += m * pops[i].value * levels[j].value;
        mass[j] += m * pops[i].value;
        left_p -= m;
        left_e -= m;
        if left_p <= 0.0 {
            i += 1;
            if i < pops.len() {
                left_p = pops[i].size;
            }
        }
        if left_e <= 0.0 {
            j += 1;
            if j < levels.len() {
                left_e = levels[j].size;
            }
        }
    }
    ClassPairing {
        passive_energy,
        energy_classes: levels,
        mass,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub copies: usize,
    pub work_per_copy: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub w_inf: f64,
    pub beta: f64,
    pub s_obs: f64,
    pub certified: Vec<f64>,
}

impl ConvergenceReport {
    pub fn gaps(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.gap).collect()
    }
}

/// Exact optimal mean work per copy for `N = 1..=n_max` against its
/// large-N limit, the observational ergotropy.
///
/// Works on multinomial classes of the N-copy spectra, so `cap` bounds the
/// number of classes rather than `d^N`.
pub fn convergence_study(
    state: &DensityMatrix,
    h: &Hamiltonian,
    measurement: &Measurement,
    n_max: usize,
    certification: Certification,
    seed: u64,
    cap: usize,
) -> Result<ConvergenceReport> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    check_ham(h, state.dim())?;
    class_count(state.dim(), n_max, cap)?;
    let certified = certify(state, measurement, certification, seed)?;
    let s_obs = certified.observational_entropy();
    let limit = ergotropy_at_entropy(state, h, s_obs)?;
    let spectrum = coarse_spectrum(&certified);
    let rows = (1..=n_max)
        .map(|n| {
            let pairing = pair_classes(&spectrum, h.energies(), n);
            let work_per_copy = limit.e_initial - pairing.passive_energy / n as f64;
            ConvergenceRow {
                copies: n,
                work_per_copy,
                gap: limit.work - work_per_copy,
            }
        })
        .collect();
    Ok(ConvergenceReport {
        rows,
        w_inf: limit.work,
        beta: limit.beta,
        s_obs,
        certified: certified.probabilities,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoolingReport {
    pub copies: usize,
    pub trace_distance: f64,
    pub beta: f64,
    /// Single-copy marginal on the ascending energy levels of `H`.
    pub marginal: Vec<f64>,
    pub thermal: Vec<f64>,
}

/// Distance between one copy of the passive N-copy state and the thermal
/// state of matching entropy.
///
/// Within a degenerate energy level of `H_N` the passive state is not
/// unique; the marginal is averaged over copies, which is the same for
/// every choice.
pub fn cooling_diagnostic(
    p: &OutcomeDistribution,
    h: &Hamiltonian,
    copies: usize,
    cap: usize,
) -> Result<CoolingReport> {
    if copies == 0 {
        return Err(Error::InvalidArgument("copies must be at least 1".into()));
    }
    check_ham(h, p.measurement.dim())?;
    class_count(h.dim(), copies, cap)?;
    let beta = solve_beta(h, p.observational_entropy())?;
    let thermal = thermal_state(h, beta)?.populations;
    let pairing = pair_classes(&coarse_spectrum(p), h.energies(), copies);
    let mut marginal = vec![0.0; h.dim()];
    for (class, &m) in pairing.energy_classes.iter().zip(&pairing.mass) {
        for (k, &n_k) in class.occupation.iter().enumerate() {
            marginal[k] += m * n_k as f64 / copies as f64;
        }
    }
    let trace_distance = 0.5
        * marginal
            .iter()
            .zip(&thermal)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
    Ok(CoolingReport {
        copies,
        trace_distance,
        beta,
        marginal,
        thermal,
    })
}

/// Mean work `tr[H_N rho^{⊗N}] - tr[H_N U rho_cg^{⊗N} U^dag]` of an arbitrary `U`.
pub fn mean_work_with(
    state: &DensityMatrix,
    p: &OutcomeDistribution,
    h: &Hamiltonian,
    copies: usize,
    unitary: &CMatrix,
    cap: usize,
) -> Result<f64> {
    let h_n = h.local_sum(copies, cap)?;
    let rho_n = state.tensor_power(copies, cap)?;
    let cg_n = p.coarse_grained_state().tensor_power(copies, cap)?;
    if unitary.nrows() != rho_n.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho_n.dim(),
            found: unitary.nrows(),
        });
    }
    Ok(rho_n.expectation(h_n.matrix()) - cg_n.evolve(unitary).expectation(h_n.matrix()))
}
