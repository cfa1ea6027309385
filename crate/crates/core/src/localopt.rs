//! Minimization of observational entropy over local product bases
//! `{|i> ⊗ |j>}`.
//!
//! For a pure state the minimum is the entanglement entropy; for a mixed
//! state the excess over the von Neumann entropy is the quantum correlation
//! entropy. The landscape is non-convex, so the optimizer runs several
//! restarts and reports how many of them agree; it certifies nothing.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::entropy::{eta, schmidt, von_neumann_entropy, ProductMeasurement};
use crate::error::{Error, Result};
use crate::qstate::{c, CMatrix, DensityMatrix, PureState, Subsystem, C64};
use crate::rng::{stream, Stage};

/// Largest local dimension accepted by the optimizer.
pub const MAX_LOCAL_DIM: usize = 8;

/// Restarts whose final value is within this of the best count as agreeing.
const AGREEMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Cyclic derivative-free sweeps over complex Givens rotations.
    GivensSweeps,
    /// Riemannian steepest descent through the matrix exponential.
    ExpMapGradient,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "givens" | "givens_sweeps" | "givens-sweeps" => Ok(Strategy::GivensSweeps),
            "gradient" | "exp_map_gradient" | "exp-map-gradient" => Ok(Strategy::ExpMapGradient),
            other => Err(Error::InvalidArgument(format!("unknown strategy {other:?}"))),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::GivensSweeps => "givens_sweeps",
            Strategy::ExpMapGradient => "exp_map_gradient",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_sweeps: usize,
    /// Absolute entropy decrease per sweep below which a restart stops.
    pub tol: f64,
    pub seed: u64,
    pub strategy: Strategy,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_sweeps: 200,
            tol: 1e-10,
            seed: 0,
            strategy: Strategy::GivensSweeps,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_sweeps == 0 {
            return Err(Error::InvalidArgument(
                "restarts and max_sweeps must be at least 1".into(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be > 0, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LocalMinResult {
    pub s_min: f64,
    pub basis: ProductMeasurement,
    pub restarts_agreeing: usize,
    /// Whether the best restart stopped on the tolerance rather than the sweep limit.
    pub converged: bool,
    /// Final entropy of each restart, in restart order.
    pub history: Vec<f64>,
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of `diag(R)` moved into `Q`.
pub fn haar_random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * scale, im * scale)
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// The local frame `(U_A, U_B)` together with `R = W^dag rho W`, `W = U_A ⊗ U_B`.
struct Frame {
    da: usize,
    db: usize,
    ua: CMatrix,
    ub: CMatrix,
    rotated: CMatrix,
}

impl Frame {
    fn new(rho: &CMatrix, da: usize, db: usize, ua: CMatrix, ub: CMatrix) -> Self {
        let w = ua.kronecker(&ub);
        let rotated = w.adjoint() * rho * &w;
        Self {
            da,
            db,
            ua,
            ub,
            rotated,
        }
    }

    fn probabilities(&self) -> Vec<f64> {
        (0..self.da * self.db)
            .map(|x| self.rotated[(x, x)].re.max(0.0))
            .collect()
    }

    fn entropy(&self) -> f64 {
        self.probabilities().into_iter().map(eta).sum()
    }

    fn local_dim(&self, side: Subsystem) -> usize {
        match side {
            Subsystem::A => self.da,
            Subsystem::B => self.db,
        }
    }

    fn joint(&self, side: Subsystem, local: usize, other: usize) -> usize {
        match side {
            Subsystem::A => local * self.db + other,
            Subsystem::B => other * self.db + local,
        }
    }

    /// Per spectator index: `(m, r)` with `p_k - p_l = n·r` after a rotation
    /// whose Bloch direction is `n`, and `m = p_k + p_l`.
    fn plane_data(&self, side: Subsystem, k: usize, l: usize) -> Vec<(f64, [f64; 3])> {
        let others = self.local_dim(other_side(side));
        (0..others)
            .map(|o| {
                let (xk, xl) = (self.joint(side, k, o), self.joint(side, l, o));
                let rkk = self.rotated[(xk, xk)].re;
                let rll = self.rotated[(xl, xl)].re;
                let rkl = self.rotated[(xk, xl)];
                (rkk + rll, [rkk - rll, 2.0 * rkl.re, -2.0 * rkl.im])
            })
            .collect()
    }

    /// Columns `k, l` of the side's unitary become
    /// `u_k' = cos t u_k + sin t e^{i phi} u_l`, `u_l' = -sin t e^{-i phi} u_k + cos t u_l`.
    fn rotate(&mut self, side: Subsystem, k: usize, l: usize, theta: f64, phi: f64) {
        let (cs, sn) = (theta.cos(), theta.sin());
        let e = C64::from_polar(1.0, phi);
        let (g_kk, g_lk, g_kl, g_ll) = (c(cs, 0.0), e * sn, -e.conj() * sn, c(cs, 0.0));
        let u = match side {
            Subsystem::A => &mut self.ua,
            Subsystem::B => &mut self.ub,
        };
        for row in 0..u.nrows() {
            let (a, b) = (u[(row, k)], u[(row, l)]);
            u[(row, k)] = a * g_kk + b * g_lk;
            u[(row, l)] = a * g_kl + b * g_ll;
        }
        let n = self.da * self.db;
        let others = self.local_dim(other_side(side));
        for o in 0..others {
            let (xk, xl) = (self.joint(side, k, o), self.joint(side, l, o));
            for row in 0..n {
                let (a, b) = (self.rotated[(row, xk)], self.rotated[(row, xl)]);
                self.rotated[(row, xk)] = a * g_kk + b * g_lk;
                self.rotated[(row, xl)] = a * g_kl + b * g_ll;
            }
            for col in 0..n {
                let (a, b) = (self.rotated[(xk, col)], self.rotated[(xl, col)]);
                self.rotated[(xk, col)] = a * g_kk.conj() + b * g_lk.conj();
                self.rotated[(xl, col)] = a * g_kl.conj() + b * g_ll.conj();
            }
        }
    }

    fn basis(&self) -> ProductMeasurement {
        ProductMeasurement {
            basis_a: self.ua.clone(),
            basis_b: self.ub.clone(),
        }
    }
}

fn other_side(side: Subsystem) -> Subsystem {
    match side {
        Subsystem::A => Subsystem::B,
        Subsystem::B => Subsystem::A,
    }
}

fn plane_objective(data: &[(f64, [f64; 3])], n: &[f64; 3]) -> f64 {
    data.iter()
        .map(|(m, r)| {
            let x = n[0] * r[0] + n[1] * r[1] + n[2] * r[2];
            eta(0.5 * (m + x)) + eta(0.5 * (m - x))
        })
        .sum()
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Fibonacci lattice on the hemisphere `n_x >= 0`.
fn hemisphere_grid(points: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..points)
        .map(|i| {
            let x = 1.0 - (i as f64 + 0.5) / points as f64;
            let r = (1.0 - x * x).max(0.0).sqrt();
            let a = golden * i as f64;
            [x, r * a.cos(), r * a.sin()]
        })
        .collect()
}

/// Best Bloch direction for one rotation plane: coarse hemisphere grid,
/// then a shrinking compass search along great circles.
fn minimize_plane(data: &[(f64, [f64; 3])], grid: &[[f64; 3]]) -> ([f64; 3], f64) {
    let identity = [1.0, 0.0, 0.0];
    let mut best = identity;
    let mut best_val = plane_objective(data, &identity);
    for n in grid {
        let v = plane_objective(data, n);
        if v < best_val {
            best_val = v;
            best = *n;
        }
    }
    let mut step: f64 = 0.25;
    while step > 1e-10 {
        let helper = if best[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let t1 = normalize(cross(&best, &helper));
        let t2 = cross(&best, &t1);
        let (cs, sn) = (step.cos(), step.sin());
        let mut improved = false;
        for (t, sign) in [(&t1, 1.0), (&t1, -1.0), (&t2, 1.0), (&t2, -1.0)] {
            let cand = normalize([
                cs * best[0] + sign * sn * t[0],
                cs * best[1] + sign * sn * t[1],
                cs * best[2] + sign * sn * t[2],
            ]);
            let v = plane_objective(data, &cand);
            if v < best_val {
                best_val = v;
                best = cand;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, best_val)
}

/// Bloch direction back to the rotation angles of [`Frame::rotate`].
fn direction_to_angles(n: &[f64; 3]) -> (f64, f64) {
    let theta = 0.5 * n[0].clamp(-1.0, 1.0).acos();
    let phi = n[2].atan2(n[1]);
    (theta, phi)
}

struct RestartOutcome {
    entropy: f64,
    converged: bool,
    basis: ProductMeasurement,
}

fn givens_sweeps(mut frame: Frame, config: &OptimizerConfig) -> RestartOutcome {
    let grid = hemisphere_grid(96);
    let mut current = frame.entropy();
    let mut converged = false;
    for _ in 0..config.max_sweeps {
        let start = current;
        for side in [Subsystem::A, Subsystem::B] {
            let d = frame.local_dim(side);
            for k in 0..d {
                for l in (k + 1)..d {
                    let data = frame.plane_data(side, k, l);
                    let before = plane_objective(&data, &[1.0, 0.0, 0.0]);
                    let (n, after) = minimize_plane(&data, &grid);
                    if after < before - config.tol {
                        let (theta, phi) = direction_to_angles(&n);
                        frame.rotate(side, k, l, theta, phi);
                    }
                }
            }
        }
        current = frame.entropy();
        if start - current < config.tol {
            converged = true;
            break;
        }
    }
    RestartOutcome {
        entropy: current,
        converged,
        basis: frame.basis(),
    }
}

/// `exp(alpha Y)` for anti-Hermitian `Y`, via the spectrum of `-iY`.
fn unitary_exp(y: &CMatrix, alpha: f64) -> CMatrix {
    let h = y * c(0.0, -1.0);
    let spec = crate::qstate::spectral_unchecked(&h);
    let n = y.nrows();
    let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        spec.values.iter().map(|&v| C64::from_polar(1.0, alpha * v)),
    ));
    &spec.vectors * phases * spec.vectors.adjoint()
}

/// Entropy gradients `tr_B[C, R]` and `tr_A[C, R]`, `C = diag(-ln p)`.
fn local_gradients(frame: &Frame) -> (CMatrix, CMatrix) {
    let (da, db) = (frame.da, frame.db);
    let cost: Vec<f64> = frame
        .probabilities()
        .into_iter()
        .map(|p| -(p.max(1e-300)).ln())
        .collect();
    let r = &frame.rotated;
    let ya = CMatrix::from_fn(da, da, |a, b| {
        (0..db)
            .map(|j| r[(a * db + j, b * db + j)] * (cost[a * db + j] - cost[b * db + j]))
            .sum()
    });
    let yb = CMatrix::from_fn(db, db, |a, b| {
        (0..da)
            .map(|i| r[(i * db + a, i * db + b)] * (cost[i * db + a] - cost[i * db + b]))
            .sum()
    });
    (ya, yb)
}

fn exp_map_gradient(rho: &CMatrix, frame: Frame, config: &OptimizerConfig) -> RestartOutcome {
    let (da, db) = (frame.da, frame.db);
    let mut frame = frame;
    let mut current = frame.entropy();
    let mut alpha: f64 = 1.0;
    let mut converged = false;
    for _ in 0..config.max_sweeps {
        let (ya, yb) = local_gradients(&frame);
        let slope = ya.norm_squared() + yb.norm_squared();
        if slope == 0.0 {
            converged = true;
            break;
        }
        let mut step = (alpha * 2.0).min(1e3);
        let mut accepted = None;
        for _ in 0..80 {
            let ua = &frame.ua * unitary_exp(&ya, step);
            let ub = &frame.ub * unitary_exp(&yb, step);
            let trial = Frame::new(rho, da, db, ua, ub);
            let value = trial.entropy();
            if value <= current - 1e-4 * step * slope {
                accepted = Some((trial, value));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((trial, value)) => {
                let gain = current - value;
                frame = trial;
                current = value;
                alpha = step;
                if gain < config.tol {
                    converged = true;
                    break;
                }
            }
            None => {
                converged = true;
                break;
            }
        }
    }
    RestartOutcome {
        entropy: current,
        converged,
        basis: frame.basis(),
    }
}

/// Starting frame of restart 0: Schmidt bases for (numerically) pure
/// states, otherwise eigenbases of the two reduced states.
fn initial_frame(state: &DensityMatrix, da: usize, db: usize) -> Result<(CMatrix, CMatrix)> {
    if state.purity() > 1.0 - 1e-10 {
        let spec = state.spectral();
        let top = spec.vectors.column(spec.dim() - 1).into_owned();
        let psi = PureState::normalized(top)?.with_dims(state.require_dims()?)?;
        let d = schmidt(&psi)?;
        return Ok((d.basis_a, d.basis_b));
    }
    let descending = |m: CMatrix| {
        let n = m.ncols();
        CMatrix::from_fn(n, n, |i, j| m[(i, n - 1 - j)])
    };
    let ua = descending(state.partial_trace(Subsystem::A)?.spectral().vectors);
    let ub = descending(state.partial_trace(Subsystem::B)?.spectral().vectors);
    debug_assert_eq!((ua.nrows(), ub.nrows()), (da, db));
    Ok((ua, ub))
}

/// Minimum observational entropy over product bases, best of several restarts.
pub fn minimize_obs_entropy_product(
    state: &DensityMatrix,
    config: &OptimizerConfig,
) -> Result<LocalMinResult> {
    config.validate()?;
    let dims = state.require_dims()?;
    let (da, db) = (dims.dim_a, dims.dim_b);
    if da.max(db) > MAX_LOCAL_DIM {
        return Err(Error::DimensionCap {
            requested: da.max(db),
            cap: MAX_LOCAL_DIM,
        });
    }
    let start0 = initial_frame(state, da, db)?;
    let rho = state.matrix();

    let outcomes: Vec<RestartOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let (ua, ub) = if r == 0 {
                start0.clone()
            } else {
                let mut rng = stream(config.seed, Stage::Restart, r as u64);
                let ua = haar_random_unitary(da, &mut rng);
                let ub = haar_random_unitary(db, &mut rng);
                (ua, ub)
            };
            let frame = Frame::new(rho, da, db, ua, ub);
            match config.strategy {
                Strategy::GivensSweeps => givens_sweeps(frame, config),
                Strategy::ExpMapGradient => exp_map_gradient(rho, frame, config),
            }
        })
        .collect();

    let history: Vec<f64> = outcomes.iter().map(|o| o.entropy).collect();
    let best = history
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("at least one restart");
    let s_min = history[best];
    let restarts_agreeing = history
        .iter()
        .filter(|&&s| s - s_min <= AGREEMENT_TOL)
        .count();
    let winner = &outcomes[best];
    Ok(LocalMinResult {
        s_min,
        basis: winner.basis.clone(),
        restarts_agreeing,
        converged: winner.converged,
        history,
    })
}

/// `S_qc = min_{C_A ⊗ C_B} S_C - S(rho)`.
#[derive(Debug, Clone)]
pub struct QuantumCorrelation {
    pub s_qc: f64,
    pub s_min: f64,
    pub s_vn: f64,
    pub basis: ProductMeasurement,
    pub optimizer: LocalMinResult,
}

pub fn quantum_correlation_entropy(
    state: &DensityMatrix,
    config: &OptimizerConfig,
) -> Result<QuantumCorrelation> {
    let result = minimize_obs_entropy_product(state, config)?;
    let s_vn = von_neumann_entropy(state);
    let mut s_qc = result.s_min - s_vn;
    if s_qc < 0.0 && s_qc >= -1e-9 {
        s_qc = 0.0;
    }
    Ok(QuantumCorrelation {
        s_qc,
        s_min: result.s_min,
        s_vn,
        basis: result.basis.clone(),
        optimizer: result,
    })
}
