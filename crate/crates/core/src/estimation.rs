//! Monte Carlo estimation of `q` from simulated interference measurements.
//!
//! A run draws `ν` two-outcome measurements with `P(±1) = (1 ± sin φ)/2`,
//! where `φ` comes from the chosen back-end (exact branch tracking, or the
//! randomized 'reshaped' evolution), and inverts the sample mean through
//! `q_est = (||a||_1 / 2t) asin(·)`. Repeated runs give the empirical MSE
//! to compare against the bound `||a||_1^2 / (4 ν t^2)`.
//!
//! Also here: the closed-form baseline protocols (local-only control with
//! relative variance `Q1 = n^2 ||α||_2^2 / ||a||_1^2`, and product states
//! with an entangled readout at `Q2 = ||α||_2^2 / ||a||_1^2`), plus a
//! simulation of the entangled-measurement baseline to verify its variance
//! `||α||_2^2 / (4 ν t^2)` empirically.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::{self, DynamicsError};
use crate::pauli::{DiagonalHamiltonian, InteractingHamiltonian, PauliError, DENSE_QUBIT_LIMIT};
use crate::protocol::{measurement_observable, Protocol};
use crate::rng;

/// Admissible phases stay this far (radians) below π/2.
pub const SMALL_SIGNAL_MARGIN: f64 = 0.2;
/// Sample means are clamped into (-1, 1) by this amount before `asin`.
pub const MEAN_CLAMP: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimationError {
    #[error("signal out of the unambiguous-phase window: {detail}")]
    SignalOutOfRange { detail: String },
    #[error("reshaped mode requires the interacting Hamiltonian")]
    MissingInteraction,
    #[error("need at least 2 repetitions, got {got}")]
    TooFewRepetitions { got: usize },
    #[error("||a||_1 must be positive for baseline ratios")]
    DegenerateL1,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// Simulation back-end for the measurement statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Exact diagonal dynamics (branch tracker).
    Ideal,
    /// Randomized product-formula evolution with `l` steps per run.
    Reshaped { l: usize },
}

/// One estimation experiment: a compiled protocol, the Hamiltonian providing
/// the phase, the shot budget, and the seeded back-end.
#[derive(Debug, Clone, Copy)]
pub struct EstimationRun<'a> {
    pub protocol: &'a Protocol,
    /// Diagonal coefficients (generators plus any extra diagonal terms).
    pub diagonal: &'a DiagonalHamiltonian,
    /// Full interacting Hamiltonian; required in reshaped mode.
    pub interacting: Option<&'a InteractingHamiltonian>,
    pub q_true: f64,
    pub nu: usize,
    pub seed: u64,
    pub mode: Mode,
}

/// Estimate from a single run of `ν` shots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleEstimate {
    pub q_est: f64,
    /// Delta-method standard error, `||a||_1 / (2 t sqrt(ν))`.
    pub se: f64,
    pub mean_outcome: f64,
    /// Back-end expectation of the interference observable.
    pub observable_mean: f64,
}

pub fn estimate(run: &EstimationRun) -> Result<SingleEstimate, EstimationError> {
    let proto = run.protocol;
    let s = match run.mode {
        Mode::Ideal => {
            let phase = dynamics::run_branch(proto, run.diagonal)?.relative_phase();
            if phase.abs() >= std::f64::consts::FRAC_PI_2 - SMALL_SIGNAL_MARGIN {
                return Err(EstimationError::SignalOutOfRange {
                    detail: format!("phase {phase:.6} outside the margin window"),
                });
            }
            phase.sin()
        }
        Mode::Reshaped { l } => {
            let h0 = run.interacting.ok_or(EstimationError::MissingInteraction)?;
            // Stream 0 of the run seed drives the trajectory, stream 1 the shots.
            let rr = dynamics::run_reshaped(proto, h0, l, run.seed)?;
            let obs = measurement_observable(&rr.snapped);
            let z = rr.state[obs.plus_label as usize].conj() * rr.state[obs.minus_label as usize];
            let s = 2.0 * z.im;
            let implied = s.clamp(-1.0, 1.0).asin();
            if implied.abs() >= std::f64::consts::FRAC_PI_2 - SMALL_SIGNAL_MARGIN {
                return Err(EstimationError::SignalOutOfRange {
                    detail: format!("implied phase {implied:.6} outside the margin window"),
                });
            }
            s
        }
    };

    let p_plus = (1.0 + s) / 2.0;
    let mut rng = rng::stream(run.seed, 1);
    let mut sum = 0i64;
    for _ in 0..run.nu {
        sum += if rng::uniform_f64(&mut rng) < p_plus {
            1
        } else {
            -1
        };
    }
    let mean = sum as f64 / run.nu as f64;
    if mean.abs() >= 1.0 {
        return Err(EstimationError::SignalOutOfRange {
            detail: "sample mean saturated at ±1".into(),
        });
    }
    let clamped = mean.clamp(-1.0 + MEAN_CLAMP, 1.0 - MEAN_CLAMP);
    let scale = proto.l1 / (2.0 * proto.t);
    Ok(SingleEstimate {
        q_est: scale * clamped.asin(),
        se: scale / (run.nu as f64).sqrt(),
        mean_outcome: mean,
        observable_mean: s,
    })
}

/// Aggregate over repeated runs: mean estimate, spread, MSE against the true
/// value, and the ratio to the bound `||a||_1^2 / (4 ν t^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub repetitions: usize,
    pub nu: usize,
    pub q_true: f64,
    pub q_est: f64,
    pub se: f64,
    pub var_q_est: f64,
    pub mse: f64,
    pub crb: f64,
    pub ratio: f64,
}

pub fn estimate_ensemble(
    run: &EstimationRun,
    repetitions: usize,
) -> Result<EstimationResult, EstimationError> {
    if repetitions < 2 {
        return Err(EstimationError::TooFewRepetitions { got: repetitions });
    }
    let estimates: Vec<f64> = (0..repetitions)
        .into_par_iter()
        .map(|rep| {
            let mut rep_run = *run;
            rep_run.seed = rng::mix(run.seed, rep as u64);
            estimate(&rep_run).map(|e| e.q_est)
        })
        .collect::<Result<_, _>>()?;
    let r = repetitions as f64;
    let mean = estimates.iter().sum::<f64>() / r;
    let var = estimates
        .iter()
        .map(|q| (q - mean) * (q - mean))
        .sum::<f64>()
        / (r - 1.0);
    let mse = estimates
        .iter()
        .map(|q| (q - run.q_true) * (q - run.q_true))
        .sum::<f64>()
        / r;
    let proto = run.protocol;
    let crb = proto.l1 * proto.l1 / (4.0 * run.nu as f64 * proto.t * proto.t);
    Ok(EstimationResult {
        repetitions,
        nu: run.nu,
        q_true: run.q_true,
        q_est: mean,
        se: proto.l1 / (2.0 * proto.t) / (run.nu as f64).sqrt(),
        var_q_est: var,
        mse,
        crb,
        ratio: mse / crb,
    })
}

/// Reshaped-mode MSE at one step count.
#[derive(Debug, Clone, PartialEq)]
pub struct MseVsLRow {
    pub l: usize,
    pub mse: f64,
    pub q_est: f64,
    pub var_q_est: f64,
    /// `mse - ideal_mse`; decays toward zero as L grows.
    pub excess: f64,
}

/// MSE against the Trotter step count, with the ideal-mode reference and the
/// step-count threshold where the excess drops below 20% of the ideal.
#[derive(Debug, Clone, PartialEq)]
pub struct MseVsLTable {
    pub rows: Vec<MseVsLRow>,
    pub ideal_mse: f64,
    pub crb: f64,
    pub nu: usize,
    pub repetitions: usize,
    pub lambda: f64,
    pub l_star: Option<usize>,
    /// `L* / (n ||a||_0 λ² t²)`, the fitted constant of the step-count
    /// requirement.
    pub fitted_c_prime: Option<f64>,
    /// Log-log slope of positive excess values against L.
    pub excess_slope: Option<f64>,
}

pub fn mse_vs_l(
    proto: &Protocol,
    h0: &InteractingHamiltonian,
    q_true: f64,
    l_grid: &[usize],
    nu: usize,
    repetitions: usize,
    seed: u64,
) -> Result<MseVsLTable, EstimationError> {
    let diagonal = h0.project_effective();
    let ideal = estimate_ensemble(
        &EstimationRun {
            protocol: proto,
            diagonal: &diagonal,
            interacting: None,
            q_true,
            nu,
            seed: rng::mix(seed, u64::MAX),
            mode: Mode::Ideal,
        },
        repetitions,
    )?;

    let mut rows = Vec::with_capacity(l_grid.len());
    for (i, &l) in l_grid.iter().enumerate() {
        let res = estimate_ensemble(
            &EstimationRun {
                protocol: proto,
                diagonal: &diagonal,
                interacting: Some(h0),
                q_true,
                nu,
                seed: rng::mix(seed, i as u64),
                mode: Mode::Reshaped { l },
            },
            repetitions,
        )?;
        rows.push(MseVsLRow {
            l,
            mse: res.mse,
            q_est: res.q_est,
            var_q_est: res.var_q_est,
            excess: res.mse - ideal.mse,
        });
    }

    let lambda = crate::linalg::hermitian_spectral_norm(&h0.dense()?);
    let l_star = rows
        .iter()
        .find(|r| r.excess < 0.2 * ideal.mse)
        .map(|r| r.l);
    let denom = proto.n as f64 * proto.rounds as f64 * lambda * lambda * proto.t * proto.t;
    let fitted_c_prime = l_star.map(|l| l as f64 / denom);
    let excess_slope = dynamics::log_log_slope(
        &rows.iter().map(|r| r.l as f64).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.excess).collect::<Vec<_>>(),
    );
    Ok(MseVsLTable {
        rows,
        ideal_mse: ideal.mse,
        crb: ideal.crb,
        nu,
        repetitions,
        lambda,
        l_star,
        fitted_c_prime,
        excess_slope,
    })
}

/// Closed-form baseline comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineReport {
    pub n: usize,
    pub nu: usize,
    /// Local-only protocol: `n^2 ||α||_2^2 / (4 ν t^2)`.
    pub var_local: f64,
    /// Product state with entangled readout: `||α||_2^2 / (4 ν t^2)`.
    pub var_entangled_meas: f64,
    /// Relative variance of the local protocol, `n^2 ||α||_2^2 / ||a||_1^2`.
    pub q1: f64,
    /// Relative variance of the entangled-readout protocol,
    /// `||α||_2^2 / ||a||_1^2`.
    pub q2: f64,
}

impl BaselineReport {
    /// `Q1 >= n^2` and `Q2 >= 1` hold for Z-string generator sets.
    pub fn orderings_hold(&self) -> bool {
        let n2 = (self.n * self.n) as f64;
        self.q1 >= n2 - 1e-9 && self.q2 >= 1.0 - 1e-9
    }
}

pub fn baselines(
    alpha: &[f64],
    n: usize,
    t: f64,
    nu: usize,
    l1: f64,
) -> Result<BaselineReport, EstimationError> {
    if l1.is_nan() || l1 <= 0.0 {
        return Err(EstimationError::DegenerateL1);
    }
    let l2sq: f64 = alpha.iter().map(|v| v * v).sum();
    let scale = 4.0 * nu as f64 * t * t;
    let n2 = (n * n) as f64;
    Ok(BaselineReport {
        n,
        nu,
        var_local: n2 * l2sq / scale,
        var_entangled_meas: l2sq / scale,
        q1: n2 * l2sq / (l1 * l1),
        q2: l2sq / (l1 * l1),
    })
}

/// Empirical variance of the entangled-measurement baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineVarianceCheck {
    pub empirical: f64,
    /// `||α||_2^2 / (4 ν t^2)`.
    pub predicted: f64,
    pub ratio: f64,
    /// Click probability of the projective outcome, `|⟨φ|ψ(t)⟩|^2`.
    pub success_probability: f64,
}

/// Simulate the product-state protocol: evolve `|+⟩^n` under `Σ θ_i Z_i`,
/// project onto `|φ⟩ ∝ Σ α_i Z_i |+⟩^n`, and estimate `q` from the click
/// rate via `q_est = sign(q) (||α||_2 / t) sqrt(k/ν)`.
///
/// The click probability is quadratic in `q`, so the estimator needs a small
/// nonzero `q` with `ν p >> 1` to be in its asymptotic regime; there its
/// variance matches the Fisher prediction `||α||_2^2 / (4 ν t^2)`.
pub fn verify_baseline2(
    alpha: &[f64],
    theta: &[f64],
    t: f64,
    nu: usize,
    repetitions: usize,
    seed: u64,
) -> Result<BaselineVarianceCheck, EstimationError> {
    let n = alpha.len();
    assert_eq!(theta.len(), n, "theta length must match alpha");
    if n > DENSE_QUBIT_LIMIT {
        return Err(EstimationError::Dynamics(DynamicsError::SizeExceeded {
            n,
            limit: DENSE_QUBIT_LIMIT,
        }));
    }
    if repetitions < 2 {
        return Err(EstimationError::TooFewRepetitions { got: repetitions });
    }
    let a2: f64 = alpha.iter().map(|v| v * v).sum::<f64>().sqrt();
    let p = baseline2_click_probability(alpha, theta, t);
    let q_true: f64 = alpha.iter().zip(theta).map(|(a, th)| a * th).sum();
    let sign = if q_true < 0.0 { -1.0 } else { 1.0 };

    let estimates: Vec<f64> = (0..repetitions)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng::stream(rng::mix(seed, rep as u64), 0);
            let mut clicks = 0usize;
            for _ in 0..nu {
                if rng::uniform_f64(&mut rng) < p {
                    clicks += 1;
                }
            }
            sign * (a2 / t) * (clicks as f64 / nu as f64).sqrt()
        })
        .collect();
    let r = repetitions as f64;
    let mean = estimates.iter().sum::<f64>() / r;
    let empirical = estimates
        .iter()
        .map(|q| (q - mean) * (q - mean))
        .sum::<f64>()
        / (r - 1.0);
    let predicted = a2 * a2 / (4.0 * nu as f64 * t * t);
    Ok(BaselineVarianceCheck {
        empirical,
        predicted,
        ratio: empirical / predicted,
        success_probability: p,
    })
}

/// `|⟨φ|e^{-i Σ θ_i Z_i t}|+⟩^n|^2` evaluated over the dense basis.
pub fn baseline2_click_probability(alpha: &[f64], theta: &[f64], t: f64) -> f64 {
    let n = alpha.len();
    let dim = 1usize << n;
    let a2: f64 = alpha.iter().map(|v| v * v).sum::<f64>().sqrt();
    let norm = 1.0 / dim as f64;
    let mut inner = Complex64::new(0.0, 0.0);
    for x in 0..dim as u64 {
        let mut energy = 0.0;
        let mut weight = 0.0;
        for i in 0..n {
            let sgn = if x >> i & 1 == 0 { 1.0 } else { -1.0 };
            energy += theta[i] * sgn;
            weight += alpha[i] * sgn;
        }
        inner += Complex64::new(weight / a2, 0.0) * (-Complex64::i() * energy * t).exp() * norm;
    }
    inner.norm_sqr()
}

/// Quantum Fisher information matrix of the product-state protocol,
/// computed numerically from finite-difference state derivatives. At
/// `θ -> 0` it is `4 t^2` times the identity.
pub fn product_state_fisher(theta: &[f64], t: f64) -> Result<DMatrix<f64>, EstimationError> {
    let n = theta.len();
    if n > DENSE_QUBIT_LIMIT {
        return Err(EstimationError::Dynamics(DynamicsError::SizeExceeded {
            n,
            limit: DENSE_QUBIT_LIMIT,
        }));
    }
    let dim = 1usize << n;
    let state = |th: &[f64]| -> Vec<Complex64> {
        let norm = 1.0 / (dim as f64).sqrt();
        (0..dim as u64)
            .map(|x| {
                let mut energy = 0.0;
                for (i, thi) in th.iter().enumerate() {
                    energy += thi * if x >> i & 1 == 0 { 1.0 } else { -1.0 };
                }
                (-Complex64::i() * energy * t).exp() * norm
            })
            .collect()
    };
    let h = 1e-5;
    let base = state(theta);
    let mut derivs: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut plus = theta.to_vec();
        plus[i] += h;
        let mut minus = theta.to_vec();
        minus[i] -= h;
        let sp = state(&plus);
        let sm = state(&minus);
        derivs.push(
            sp.iter()
                .zip(sm.iter())
                .map(|(p, m)| (p - m) / Complex64::new(2.0 * h, 0.0))
                .collect(),
        );
    }
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
    };
    let mut f = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let term = dot(&derivs[i], &base) * dot(&base, &derivs[j]);
            f[(i, j)] = 4.0 * (dot(&derivs[i], &derivs[j]) - term).re;
        }
    }
    Ok(f)
}
