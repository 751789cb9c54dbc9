//! Simulation back-ends.
//!
//! Three levels of fidelity to the same physics:
//!
//! * [`run_branch`]: O(1)-per-segment phase tracking for diagonal
//!   Hamiltonians. The two halves of the superposition are just labels with
//!   accumulated eigenphases.
//! * [`run_dense`] / [`run_dense_diagonal`]: exact statevector evolution
//!   with segment-wise matrix exponentials; the oracle for everything else.
//! * [`run_reshaped`]: the randomized product formula: each step of length
//!   `t/L` evolves under `s H_0 s` for a uniformly sampled Z-string `s`,
//!   which on average projects the dynamics onto the diagonal part of `H_0`.
//!
//! [`bench_reshaping`] measures the deterministic bias
//! `||exp(-i H_eff t) - E[V]^L|| <= 2 λ² t² / L` and the concentration of the
//! random trajectory error, whose mean decays like `1/sqrt(L)`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{hermitian_exp, hermitian_spectral_norm, matrix_power, spectral_norm};
use crate::pauli::{
    DiagonalHamiltonian, InteractingHamiltonian, PauliError, ZString, DENSE_QUBIT_LIMIT,
};
use crate::protocol::{Branch, Protocol, ProtocolError};
use crate::rng;

/// Stabilizer averages sum `2^n` dense terms; keep that exact and fast.
pub const BENCH_QUBIT_LIMIT: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("dense simulation for n = {n} exceeds the limit of {limit} qubits")]
    SizeExceeded { n: usize, limit: usize },
    #[error("switch at t = {time} does not fit the step grid t/L with L = {l}")]
    StepTooCoarse { time: f64, l: usize },
    #[error("branch labels collide at label {label}")]
    LabelCollision { label: u64 },
    #[error("trial count {trials} too small, need at least {min}")]
    TooFewTrials { trials: usize, min: usize },
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

fn check_limit(n: usize, limit: usize) -> Result<(), DynamicsError> {
    if n > limit {
        return Err(DynamicsError::SizeExceeded { n, limit });
    }
    Ok(())
}

/// Labels and accumulated eigenphases of the two halves of the
/// superposition; the relative phase is frame-independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchState {
    pub plus_label: u64,
    pub minus_label: u64,
    pub plus_phase: f64,
    pub minus_phase: f64,
}

impl BranchState {
    /// `φ` such that the state is `(|x+⟩ + e^{iφ}|x-⟩)/√2` up to a global
    /// phase.
    pub fn relative_phase(&self) -> f64 {
        self.minus_phase - self.plus_phase
    }

    /// The tracked state as a dense vector (for cross-checks).
    pub fn statevector(&self, n: usize) -> Result<DVector<Complex64>, DynamicsError> {
        check_limit(n, DENSE_QUBIT_LIMIT)?;
        let dim = 1usize << n;
        let mut v = DVector::zeros(dim);
        let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[self.plus_label as usize] = amp * (Complex64::i() * self.plus_phase).exp();
        v[self.minus_label as usize] = amp * (Complex64::i() * self.minus_phase).exp();
        Ok(v)
    }
}

/// Track both branch labels through the schedule, accumulating `-E(x) Δt`
/// per segment.
pub fn run_branch(proto: &Protocol, h: &DiagonalHamiltonian) -> Result<BranchState, DynamicsError> {
    let mut state = BranchState {
        plus_label: proto.init.0,
        minus_label: proto.init.1,
        plus_phase: 0.0,
        minus_phase: 0.0,
    };
    for seg in proto.timeline() {
        if seg.plus == seg.minus {
            return Err(DynamicsError::LabelCollision { label: seg.plus });
        }
        state.plus_phase -= h.energy(seg.plus) * seg.duration;
        state.minus_phase -= h.energy(seg.minus) * seg.duration;
        for e in &seg.switches {
            match e.branch {
                Branch::Plus => state.plus_label = e.to,
                Branch::Minus => state.minus_label = e.to,
            }
        }
    }
    if state.plus_label == state.minus_label {
        return Err(DynamicsError::LabelCollision {
            label: state.plus_label,
        });
    }
    Ok(state)
}

/// `(|x⟩ + |y⟩)/√2` for the protocol's initial pair.
pub fn initial_state(n: usize, pair: (u64, u64)) -> Result<DVector<Complex64>, DynamicsError> {
    check_limit(n, DENSE_QUBIT_LIMIT)?;
    let dim = 1usize << n;
    let mut v = DVector::zeros(dim);
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[pair.0 as usize] = amp;
    v[pair.1 as usize] = amp;
    Ok(v)
}

fn apply_switches(state: &mut DVector<Complex64>, switches: &[crate::protocol::SwitchEvent]) {
    for e in switches {
        state.swap_rows(e.from as usize, e.to as usize);
    }
}

/// Exact statevector run under a full interacting Hamiltonian.
pub fn run_dense(
    proto: &Protocol,
    h: &InteractingHamiltonian,
) -> Result<DVector<Complex64>, DynamicsError> {
    check_limit(proto.n, DENSE_QUBIT_LIMIT)?;
    let dense = h.dense()?;
    let eig = dense.symmetric_eigen();
    let q = eig.eigenvectors;
    let mut state = initial_state(proto.n, proto.init)?;
    for seg in proto.timeline() {
        if seg.duration > 0.0 {
            let mut coeffs = q.adjoint() * &state;
            for (k, c) in coeffs.iter_mut().enumerate() {
                *c *= (-Complex64::i() * eig.eigenvalues[k] * seg.duration).exp();
            }
            state = &q * coeffs;
        }
        apply_switches(&mut state, &seg.switches);
    }
    Ok(state)
}

/// Exact statevector run under a diagonal Hamiltonian (elementwise phases).
pub fn run_dense_diagonal(
    proto: &Protocol,
    h: &DiagonalHamiltonian,
) -> Result<DVector<Complex64>, DynamicsError> {
    check_limit(proto.n, DENSE_QUBIT_LIMIT)?;
    let energies = h.diagonal()?;
    let mut state = initial_state(proto.n, proto.init)?;
    for seg in proto.timeline() {
        if seg.duration > 0.0 {
            for (x, amp) in state.iter_mut().enumerate() {
                *amp *= (-Complex64::i() * energies[x] * seg.duration).exp();
            }
        }
        apply_switches(&mut state, &seg.switches);
    }
    Ok(state)
}

/// One randomized step `exp(-i s H_0 s Δt) = s exp(-i H_0 Δt) s`.
pub fn trotter_step_unitary(
    h0: &InteractingHamiltonian,
    dt: f64,
    s: &ZString,
) -> Result<DMatrix<Complex64>, DynamicsError> {
    check_limit(h0.qubits(), DENSE_QUBIT_LIMIT)?;
    let step = hermitian_exp(&h0.dense()?, dt);
    Ok(conjugate_by_zstring(&step, s))
}

/// `s M s` for a Z-string `s` (entrywise sign flips).
pub fn conjugate_by_zstring(m: &DMatrix<Complex64>, s: &ZString) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
        let sign = f64::from(s.eigenvalue(r as u64) * s.eigenvalue(c as u64));
        m[(r, c)] * sign
    })
}

/// Round every switch time to the nearest multiple of `t/L`. Fails when a
/// switch lands on the boundary or two switches of one branch land on the
/// same grid point.
pub fn snap_protocol(proto: &Protocol, l: usize) -> Result<(Protocol, f64), DynamicsError> {
    assert!(l > 0, "step count must be positive");
    let dt = proto.t / l as f64;
    let mut snapped = proto.clone();
    let mut max_shift = 0.0f64;
    for e in &mut snapped.events {
        let k = (e.time / dt).round() as i64;
        if k < 1 || k >= l as i64 {
            return Err(DynamicsError::StepTooCoarse { time: e.time, l });
        }
        let new_time = k as f64 * dt;
        max_shift = max_shift.max((new_time - e.time).abs());
        e.time = new_time;
    }
    snapped.events.sort_by(|a, b| {
        a.time
            .total_cmp(&b.time)
            .then_with(|| match (a.branch, b.branch) {
                (Branch::Plus, Branch::Minus) => std::cmp::Ordering::Less,
                (Branch::Minus, Branch::Plus) => std::cmp::Ordering::Greater,
                _ => std::cmp::Ordering::Equal,
            })
    });
    for branch in [Branch::Plus, Branch::Minus] {
        let times: Vec<f64> = snapped
            .events
            .iter()
            .filter(|e| e.branch == branch)
            .map(|e| e.time)
            .collect();
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(DynamicsError::StepTooCoarse { time: w[1], l });
            }
        }
    }
    Ok((snapped, max_shift))
}

/// The sampled Z-string trajectory of one randomized run; a pure function
/// of `(seed, step index)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrotterRun {
    pub t: f64,
    pub l: usize,
    pub seed: u64,
    pub sampled: Vec<ZString>,
}

/// Draw `l` Z-strings uniformly from the full `2^n`-element group.
pub fn sample_trajectory(n: usize, l: usize, seed: u64) -> Vec<ZString> {
    let mut rng = rng::stream(seed, 0);
    (0..l)
        .map(|_| ZString::new(rng::uniform_bits(&mut rng, n), n).expect("mask in range"))
        .collect()
}

/// Outcome of a randomized run: the final state, the snapped schedule it
/// actually executed, and the trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ReshapedRun {
    pub state: DVector<Complex64>,
    pub snapped: Protocol,
    pub trajectory: TrotterRun,
    /// Largest switch-time shift introduced by grid snapping; the induced
    /// phase error is O(q/L).
    pub max_snap_shift: f64,
}

/// Run the protocol with every evolution segment replaced by randomized
/// conjugated steps of length `t/L`.
pub fn run_reshaped(
    proto: &Protocol,
    h0: &InteractingHamiltonian,
    l: usize,
    seed: u64,
) -> Result<ReshapedRun, DynamicsError> {
    check_limit(proto.n, DENSE_QUBIT_LIMIT)?;
    let (snapped, max_snap_shift) = snap_protocol(proto, l)?;
    let dt = proto.t / l as f64;
    let step = hermitian_exp(&h0.dense()?, dt);

    // Grid step index -> switches applied at that boundary.
    let mut boundaries: BTreeMap<usize, Vec<crate::protocol::SwitchEvent>> = BTreeMap::new();
    for e in &snapped.events {
        let k = (e.time / dt).round() as usize;
        boundaries.entry(k).or_default().push(*e);
    }

    let dim = 1usize << proto.n;
    let mut state = initial_state(proto.n, snapped.init)?;
    let mut rng = rng::stream(seed, 0);
    let mut sampled = Vec::with_capacity(l);
    for k in 1..=l {
        let mask = rng::uniform_bits(&mut rng, proto.n);
        sampled.push(ZString::new(mask, proto.n).expect("mask in range"));
        // s exp(-i H0 dt) s |ψ⟩ with s applied as sign flips.
        for x in 0..dim {
            if (mask & x as u64).count_ones() & 1 == 1 {
                state[x] = -state[x];
            }
        }
        state = &step * state;
        for x in 0..dim {
            if (mask & x as u64).count_ones() & 1 == 1 {
                state[x] = -state[x];
            }
        }
        if let Some(switches) = boundaries.get(&k) {
            apply_switches(&mut state, switches);
        }
    }
    Ok(ReshapedRun {
        state,
        snapped,
        trajectory: TrotterRun {
            t: proto.t,
            l,
            seed,
            sampled,
        },
        max_snap_shift,
    })
}

/// `E[V] = (1/2^n) Σ_s s exp(-i H_0 Δt) s`, the averaged step map.
pub fn expected_step_map(
    h0: &InteractingHamiltonian,
    dt: f64,
) -> Result<DMatrix<Complex64>, DynamicsError> {
    check_limit(h0.qubits(), BENCH_QUBIT_LIMIT)?;
    expected_step_from_dense(&hermitian_exp(&h0.dense()?, dt), h0.qubits())
}

fn expected_step_from_dense(
    step: &DMatrix<Complex64>,
    n: usize,
) -> Result<DMatrix<Complex64>, DynamicsError> {
    let dim = 1usize << n;
    let count = 1u64 << n;
    let mut avg = DMatrix::<Complex64>::zeros(dim, dim);
    for mask in 0..count {
        for r in 0..dim {
            let sr = if (mask & r as u64).count_ones() & 1 == 0 {
                1.0
            } else {
                -1.0
            };
            for c in 0..dim {
                let sc = if (mask & c as u64).count_ones() & 1 == 0 {
                    1.0
                } else {
                    -1.0
                };
                avg[(r, c)] += step[(r, c)] * (sr * sc);
            }
        }
    }
    avg /= Complex64::new(count as f64, 0.0);
    Ok(avg)
}

/// Per-L statistics of the reshaping error.
#[derive(Debug, Clone, PartialEq)]
pub struct ReshapeBenchRow {
    pub l: usize,
    /// `||exp(-i H_eff t) - E[V]^L||`, exact.
    pub bias_norm: f64,
    /// The guaranteed envelope `2 λ² t² / L`.
    pub bias_bound: f64,
    /// Sampled `X = ||Π V_k - E[V]^L||` values, one per trial.
    pub trajectory_errors: Vec<f64>,
    pub mean_x: f64,
    pub var_x: f64,
}

/// Reshaping-error benchmark over a grid of step counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ReshapeBenchResult {
    pub n: usize,
    /// Exact spectral norm of `H_0`.
    pub lambda: f64,
    /// Triangle-inequality bound `Σ|coefficients|`, reported alongside.
    pub lambda_triangle: f64,
    pub t: f64,
    pub trials: usize,
    pub seed: u64,
    pub rows: Vec<ReshapeBenchRow>,
    /// Fitted log-log slope of mean X vs L (about -1/2 in theory).
    pub mean_x_slope: Option<f64>,
    /// Fitted log-log slope of `Var[X]` vs L (about -1 in theory).
    pub var_x_slope: Option<f64>,
}

impl ReshapeBenchResult {
    /// The hard bias bound must hold at every grid point.
    pub fn bias_bound_satisfied(&self) -> bool {
        self.rows.iter().all(|r| r.bias_norm <= r.bias_bound)
    }
}

pub fn bench_reshaping(
    h0: &InteractingHamiltonian,
    t: f64,
    l_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ReshapeBenchResult, DynamicsError> {
    let n = h0.qubits();
    check_limit(n, BENCH_QUBIT_LIMIT)?;
    if trials < 30 {
        return Err(DynamicsError::TooFewTrials { trials, min: 30 });
    }
    let dense = h0.dense()?;
    let lambda = hermitian_spectral_norm(&dense);
    let u_eff = hermitian_exp(&h0.project_effective().dense()?, t);
    let dim = 1usize << n;

    let mut rows = Vec::with_capacity(l_grid.len());
    for &l in l_grid {
        let dt = t / l as f64;
        let step = hermitian_exp(&dense, dt);
        let mean_step = expected_step_from_dense(&step, n)?;
        let mean_power = matrix_power(&mean_step, l);
        let bias_norm = spectral_norm(&(&u_eff - &mean_power));

        let errors: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = rng::stream(rng::mix(seed, l as u64), trial as u64);
                let mut acc = DMatrix::<Complex64>::identity(dim, dim);
                for _ in 0..l {
                    let mask = rng::uniform_bits(&mut rng, n);
                    // acc <- s E s acc, with the signs applied as row scalings.
                    scale_rows(&mut acc, mask);
                    acc = &step * acc;
                    scale_rows(&mut acc, mask);
                }
                spectral_norm(&(&acc - &mean_power))
            })
            .collect();
        let mean_x = errors.iter().sum::<f64>() / trials as f64;
        let var_x = errors
            .iter()
            .map(|x| (x - mean_x) * (x - mean_x))
            .sum::<f64>()
            / (trials - 1) as f64;
        rows.push(ReshapeBenchRow {
            l,
            bias_norm,
            bias_bound: 2.0 * lambda * lambda * t * t / l as f64,
            trajectory_errors: errors,
            mean_x,
            var_x,
        });
    }

    let ls: Vec<f64> = rows.iter().map(|r| r.l as f64).collect();
    let mean_x_slope = log_log_slope(&ls, &rows.iter().map(|r| r.mean_x).collect::<Vec<_>>());
    let var_x_slope = log_log_slope(&ls, &rows.iter().map(|r| r.var_x).collect::<Vec<_>>());
    Ok(ReshapeBenchResult {
        n,
        lambda,
        lambda_triangle: h0.coefficient_norm_bound(),
        t,
        trials,
        seed,
        rows,
        mean_x_slope,
        var_x_slope,
    })
}

fn scale_rows(m: &mut DMatrix<Complex64>, mask: u64) {
    for r in 0..m.nrows() {
        if (mask & r as u64).count_ones() & 1 == 1 {
            for c in 0..m.ncols() {
                m[(r, c)] = -m[(r, c)];
            }
        }
    }
}

/// Least-squares slope of `ln y` against `ln x`; `None` unless at least two
/// positive samples exist.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys.iter())
        .filter(|(&x, &y)| x > 0.0 && y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// `|⟨a|b⟩|` for unit vectors.
pub fn overlap(a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    a.dotc(b).norm()
}
