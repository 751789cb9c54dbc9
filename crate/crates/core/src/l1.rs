//! The precision-bound linear program.
//!
//! For generators with eigenvalue rows `h` (m x N) and target coefficients
//! `alpha`, the best attainable single-shot variance for estimating
//! `q = alpha . theta` over evolution time `t` is
//!
//! ```text
//! min ||a||_1^2 / (4 t^2)   over   { a : h a = alpha, sum_x a_x = 0 }.
//! ```
//!
//! [`L1Problem::solve`] runs a primal simplex on the split form
//! `a = a+ - a-`, so the returned optimum is a vertex and carries the
//! `||a||_0 <= m + 1` support guarantee. [`L1Problem::solve_by_enumeration`]
//! is an independent brute-force oracle over all basic solutions, for tests.
//!
//! Closed forms: for GF(2)-independent Z-string generators the optimum is
//! `||alpha||_inf`; for photon-number generators with at most `P` photons it
//! is `2 max(||alpha||_1+, ||alpha||_1-) / P`.

mod simplex;

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::pauli::{GeneratorSet, PauliError};
use simplex::{ColumnSource, SimplexError};

/// Feasibility and duality checks use this absolute tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Support entries smaller than this are pruned to zero.
pub const PRUNE_TOL: f64 = 1e-12;
/// Largest explicit column count accepted by the solver.
pub const COLUMN_LIMIT: usize = 1 << 14;
/// Enumeration-oracle guards: columns and generator rows.
pub const ORACLE_COLUMN_LIMIT: usize = 64;
pub const ORACLE_ROW_LIMIT: usize = 7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum L1Error {
    #[error("alpha length {got} does not match generator count {expected}")]
    AlphaLengthMismatch { got: usize, expected: usize },
    #[error("evolution time must be positive, got {t}")]
    NonPositiveTime { t: f64 },
    #[error("column count {cols} exceeds the limit {limit}")]
    SizeExceeded { cols: usize, limit: usize },
    #[error("generator eigenvalue rows are linearly dependent (rank {rank} < {rows})")]
    RankDeficient { rank: usize, rows: usize },
    #[error("alpha is not in the row space of the eigenvalue matrix")]
    Infeasible,
    #[error("label count {labels} does not match column count {cols}")]
    LabelCountMismatch { labels: usize, cols: usize },
    #[error("photon cap must be at least 1, got {p}")]
    PhotonCapTooSmall { p: u32 },
    #[error("simplex failed to converge cleanly")]
    Numerical,
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// An instance of the minimization: eigenvalue rows (no ones row), target
/// coefficients, and the evolution time entering the bound.
#[derive(Debug, Clone)]
pub struct L1Problem {
    h: DMatrix<f64>,
    labels: Vec<u64>,
    alpha: Vec<f64>,
    t: f64,
}

impl L1Problem {
    /// Problem over columns labeled by their index.
    pub fn new(h: DMatrix<f64>, alpha: Vec<f64>, t: f64) -> Result<Self, L1Error> {
        let labels = (0..h.ncols() as u64).collect();
        Self::with_labels(h, labels, alpha, t)
    }

    /// Problem with explicit basis labels per column.
    pub fn with_labels(
        h: DMatrix<f64>,
        labels: Vec<u64>,
        alpha: Vec<f64>,
        t: f64,
    ) -> Result<Self, L1Error> {
        if alpha.len() != h.nrows() {
            return Err(L1Error::AlphaLengthMismatch {
                got: alpha.len(),
                expected: h.nrows(),
            });
        }
        if t.is_nan() || t <= 0.0 {
            return Err(L1Error::NonPositiveTime { t });
        }
        if h.ncols() > COLUMN_LIMIT {
            return Err(L1Error::SizeExceeded {
                cols: h.ncols(),
                limit: COLUMN_LIMIT,
            });
        }
        if labels.len() != h.ncols() {
            return Err(L1Error::LabelCountMismatch {
                labels: labels.len(),
                cols: h.ncols(),
            });
        }
        let rank = matrix_rank(&h);
        if rank < h.nrows() {
            return Err(L1Error::RankDeficient {
                rank,
                rows: h.nrows(),
            });
        }
        Ok(Self {
            h,
            labels,
            alpha,
            t,
        })
    }

    /// Problem over all `2^n` basis columns of a Z-string generator set.
    pub fn from_generators(gens: &GeneratorSet, alpha: Vec<f64>, t: f64) -> Result<Self, L1Error> {
        if 1usize
            .checked_shl(gens.qubits() as u32)
            .is_none_or(|n| n > COLUMN_LIMIT)
        {
            return Err(L1Error::SizeExceeded {
                cols: usize::MAX,
                limit: COLUMN_LIMIT,
            });
        }
        let em = gens.eigenvalue_matrix(false, None)?;
        let labels = em.columns().to_vec();
        Self::with_labels(em.matrix().clone(), labels, alpha, t)
    }

    /// Problem restricted to an explicit column subset.
    pub fn from_generators_with_columns(
        gens: &GeneratorSet,
        columns: &[u64],
        alpha: Vec<f64>,
        t: f64,
    ) -> Result<Self, L1Error> {
        let em = gens.eigenvalue_matrix(false, Some(columns))?;
        let labels = em.columns().to_vec();
        Self::with_labels(em.matrix().clone(), labels, alpha, t)
    }

    /// Photon-number problem over all occupation tuples with at most `P`
    /// total photons.
    pub fn from_bosonic(prob: &BosonicProblem) -> Result<Self, L1Error> {
        let hb = bosonic_number_matrix(prob.modes, prob.photon_cap)?;
        L1Problem::new(hb.matrix, prob.alpha.clone(), prob.t)
    }

    pub fn generator_count(&self) -> usize {
        self.h.nrows()
    }

    pub fn column_count(&self) -> usize {
        self.h.ncols()
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// All-zero target: nothing to estimate, the optimum is `a = 0`.
    pub fn is_trivial(&self) -> bool {
        self.alpha.iter().all(|&v| v == 0.0)
    }

    /// Minimize `||a||_1` by primal simplex on the split standard form.
    pub fn solve(&self) -> Result<L1Solution, L1Error> {
        if self.is_trivial() {
            return Ok(L1Solution::trivial(self.generator_count()));
        }
        let m = self.generator_count();
        let cols = self.column_count();
        let source = SplitColumns { h: &self.h };
        let cost = vec![1.0f64; 2 * cols];
        let mut b = Vec::with_capacity(m + 1);
        b.push(0.0);
        b.extend_from_slice(&self.alpha);

        let raw = simplex::solve(&source, &cost, &b).map_err(|e| match e {
            SimplexError::Infeasible => L1Error::Infeasible,
            _ => L1Error::Numerical,
        })?;

        let mut dense = vec![0.0f64; cols];
        for &(j, v) in &raw.basic {
            if j < cols {
                dense[j] += v;
            } else {
                dense[j - cols] -= v;
            }
        }
        let support: Vec<SupportEntry> = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() >= PRUNE_TOL)
            .map(|(j, &v)| SupportEntry {
                x: self.labels[j],
                v,
            })
            .collect();
        let dual = DualCertificate::new(raw.dual, &self.alpha);
        let solution = L1Solution::from_support(support, dual, self.t);
        if (solution.l1() - raw.objective).abs() > FEASIBILITY_TOL {
            return Err(L1Error::Numerical);
        }
        self.validate(&solution)?;
        Ok(solution)
    }

    /// Brute-force oracle: enumerate every basic solution of the constraint
    /// system `[1^T; h] a = [0; alpha]` by choosing square column subsets,
    /// and keep the feasible one of minimum `||a||_1`. Exponential in the
    /// generator count; guarded for test-scale inputs.
    pub fn solve_by_enumeration(&self) -> Result<L1Solution, L1Error> {
        let m = self.generator_count();
        let cols = self.column_count();
        if cols > ORACLE_COLUMN_LIMIT || m > ORACLE_ROW_LIMIT {
            return Err(L1Error::SizeExceeded {
                cols: cols.max(m),
                limit: ORACLE_COLUMN_LIMIT,
            });
        }
        if self.is_trivial() {
            return Ok(L1Solution::trivial(m));
        }

        // Reduce [1^T; h | 0; alpha] to independent rows, checking consistency.
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        rows.push(vec![1.0; cols]);
        for i in 0..m {
            rows.push((0..cols).map(|j| self.h[(i, j)]).collect());
        }
        let mut rhs = vec![0.0f64; m + 1];
        rhs[1..].copy_from_slice(&self.alpha);
        let (live, consistent) = independent_rows(&rows, &rhs);
        if !consistent {
            return Err(L1Error::Infeasible);
        }
        let r = live.len();

        let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
        let mut ties: Vec<(Vec<usize>, Vec<f64>)> = Vec::new();
        let mut subset: Vec<usize> = (0..r).collect();
        loop {
            let mat: Vec<Vec<f64>> = live
                .iter()
                .map(|&ri| subset.iter().map(|&j| rows[ri][j]).collect())
                .collect();
            let rb: Vec<f64> = live.iter().map(|&ri| rhs[ri]).collect();
            if let Some(a_s) = simplex::gauss_solve(&mat, &rb) {
                let l1: f64 = a_s.iter().map(|v| v.abs()).sum();
                match &best {
                    Some((bl1, _, _)) if l1 >= bl1 - 1e-12 => {
                        if l1 <= bl1 + 1e-12 {
                            ties.push((subset.clone(), a_s));
                        }
                    }
                    _ => {
                        best = Some((l1, subset.clone(), a_s.clone()));
                        ties.clear();
                        ties.push((subset.clone(), a_s));
                    }
                }
            }
            if !next_combination(&mut subset, cols) {
                break;
            }
        }
        let (_, best_subset, best_a) = best.ok_or(L1Error::Infeasible)?;

        let mut support: Vec<SupportEntry> = best_subset
            .iter()
            .zip(best_a.iter())
            .filter(|(_, v)| v.abs() >= PRUNE_TOL)
            .map(|(&j, &v)| SupportEntry {
                x: self.labels[j],
                v,
            })
            .collect();
        support.sort_by_key(|e| e.x);

        let dual = self
            .dual_from_optimal_bases(&rows, &live, &ties)
            .ok_or(L1Error::Numerical)?;
        let solution = L1Solution::from_support(support, dual, self.t);
        self.validate(&solution)?;
        Ok(solution)
    }

    /// Recover a feasible dual certificate from an optimal basis: solve
    /// `M_S^T y = sign(a_S)` and keep the first sign assignment that is
    /// feasible on every column.
    fn dual_from_optimal_bases(
        &self,
        rows: &[Vec<f64>],
        live: &[usize],
        ties: &[(Vec<usize>, Vec<f64>)],
    ) -> Option<DualCertificate> {
        let r = live.len();
        for (subset, a_s) in ties {
            let zero_slots: Vec<usize> = (0..r).filter(|&k| a_s[k].abs() < PRUNE_TOL).collect();
            for pattern in 0..1u32 << zero_slots.len() {
                let mut signs: Vec<f64> = a_s
                    .iter()
                    .map(|&v| if v >= 0.0 { 1.0 } else { -1.0 })
                    .collect();
                for (bit, &slot) in zero_slots.iter().enumerate() {
                    if pattern >> bit & 1 == 1 {
                        signs[slot] = -1.0;
                    }
                }
                // Transposed basis system over the live rows.
                let bt: Vec<Vec<f64>> = (0..r)
                    .map(|k| live.iter().map(|&ri| rows[ri][subset[k]]).collect())
                    .collect();
                let Some(y_live) = simplex::gauss_solve(&bt, &signs) else {
                    continue;
                };
                let mut y = vec![0.0f64; self.generator_count() + 1];
                for (k, &ri) in live.iter().enumerate() {
                    y[ri] = y_live[k];
                }
                let feasible = (0..self.column_count()).all(|j| {
                    let s: f64 = (0..rows.len()).map(|i| y[i] * rows[i][j]).sum();
                    s.abs() <= 1.0 + FEASIBILITY_TOL
                });
                if feasible {
                    return Some(DualCertificate::new(y, &self.alpha));
                }
            }
        }
        None
    }

    /// Residual checks on a candidate solution; used before returning from
    /// either solver path.
    fn validate(&self, sol: &L1Solution) -> Result<(), L1Error> {
        let m = self.generator_count();
        if sol.support_size() > m + 1 {
            return Err(L1Error::Numerical);
        }
        let mut residual = self.alpha.clone();
        let mut zero_sum = 0.0;
        for e in sol.support() {
            let j = self
                .labels
                .iter()
                .position(|&l| l == e.x)
                .ok_or(L1Error::Numerical)?;
            zero_sum += e.v;
            for (i, r) in residual.iter_mut().enumerate() {
                *r -= self.h[(i, j)] * e.v;
            }
        }
        let feas = residual.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if feas > FEASIBILITY_TOL || zero_sum.abs() > FEASIBILITY_TOL {
            return Err(L1Error::Numerical);
        }
        if (sol.dual().objective() - sol.l1()).abs() > FEASIBILITY_TOL {
            return Err(L1Error::Numerical);
        }
        Ok(())
    }
}

struct SplitColumns<'a> {
    h: &'a DMatrix<f64>,
}

impl ColumnSource for SplitColumns<'_> {
    fn ncols(&self) -> usize {
        2 * self.h.ncols()
    }

    fn fill(&self, j: usize, buf: &mut [f64]) {
        let cols = self.h.ncols();
        let (col, sign) = if j < cols { (j, 1.0) } else { (j - cols, -1.0) };
        buf[0] = sign;
        for i in 0..self.h.nrows() {
            buf[i + 1] = sign * self.h[(i, col)];
        }
    }
}

/// One nonzero entry of the optimal vector, keyed by basis label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportEntry {
    pub x: u64,
    pub v: f64,
}

/// Multipliers certifying optimality: `y[0]` pairs with the zero-sum row,
/// `y[1..]` with the generators. Feasibility means
/// `|y[0] + sum_j y[j] h_{j,x}| <= 1` on every column; by strong duality the
/// objective `alpha . y[1..]` equals the minimal `||a||_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    y: Vec<f64>,
    objective: f64,
}

impl DualCertificate {
    fn new(y: Vec<f64>, alpha: &[f64]) -> Self {
        let objective = alpha
            .iter()
            .zip(y.iter().skip(1))
            .map(|(a, yi)| a * yi)
            .sum();
        Self { y, objective }
    }

    pub fn multipliers(&self) -> &[f64] {
        &self.y
    }

    /// `alpha . y[1..]`; equals `||a||_1` at the optimum.
    pub fn objective(&self) -> f64 {
        self.objective
    }

    /// Coefficients of the optimal translation generator `beta . g`,
    /// normalized so `alpha . beta = 1`. Its seminorm (max minus min
    /// eigenvalue) is `2 / ||a||_1`, the value of the seminorm program that
    /// this LP dualizes.
    pub fn dual_basis_vector(&self) -> Vec<f64> {
        self.y[1..].iter().map(|v| v / self.objective).collect()
    }

    /// Seminorm of the optimal generator, `2 / ||a||_1`.
    pub fn seminorm_value(&self) -> f64 {
        2.0 / self.objective
    }

    /// Check `|y[0] + sum_j y[j] h_{j,x}| <= 1` on every column of `prob`.
    pub fn is_feasible_for(&self, prob: &L1Problem) -> bool {
        (0..prob.column_count()).all(|j| {
            let mut s = self.y[0];
            for i in 0..prob.generator_count() {
                s += self.y[i + 1] * prob.matrix()[(i, j)];
            }
            s.abs() <= 1.0 + FEASIBILITY_TOL
        })
    }
}

/// The optimal vector, its norms, and the precision bound `||a||_1^2/(4t^2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L1Solution {
    a: Vec<SupportEntry>,
    l1: f64,
    l0: usize,
    bound: f64,
    #[serde(serialize_with = "serialize_dual")]
    dual: DualCertificate,
}

fn serialize_dual<S: Serializer>(d: &DualCertificate, s: S) -> Result<S::Ok, S::Error> {
    d.y.serialize(s)
}

impl L1Solution {
    fn from_support(mut support: Vec<SupportEntry>, dual: DualCertificate, t: f64) -> Self {
        support.sort_by_key(|e| e.x);
        let l1: f64 = support.iter().map(|e| e.v.abs()).sum();
        let l0 = support.len();
        Self {
            a: support,
            l1,
            l0,
            bound: l1 * l1 / (4.0 * t * t),
            dual,
        }
    }

    fn trivial(m: usize) -> Self {
        Self {
            a: Vec::new(),
            l1: 0.0,
            l0: 0,
            bound: 0.0,
            dual: DualCertificate {
                y: vec![0.0; m + 1],
                objective: 0.0,
            },
        }
    }

    pub fn support(&self) -> &[SupportEntry] {
        &self.a
    }

    pub fn support_size(&self) -> usize {
        self.l0
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    /// Precision bound `||a||_1^2 / (4 t^2)`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn dual(&self) -> &DualCertificate {
        &self.dual
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_empty()
    }

    /// Value at a basis label (zero off the support).
    pub fn value_at(&self, x: u64) -> f64 {
        self.a.iter().find(|e| e.x == x).map_or(0.0, |e| e.v)
    }
}

/// Photon-number analogue of the stabilizer problem: `m` modes, at most `P`
/// photons in total.
#[derive(Debug, Clone, PartialEq)]
pub struct BosonicProblem {
    pub modes: usize,
    pub photon_cap: u32,
    pub alpha: Vec<f64>,
    pub t: f64,
}

impl BosonicProblem {
    pub fn new(modes: usize, photon_cap: u32, alpha: Vec<f64>, t: f64) -> Result<Self, L1Error> {
        if photon_cap < 1 {
            return Err(L1Error::PhotonCapTooSmall { p: photon_cap });
        }
        if alpha.len() != modes {
            return Err(L1Error::AlphaLengthMismatch {
                got: alpha.len(),
                expected: modes,
            });
        }
        if t.is_nan() || t <= 0.0 {
            return Err(L1Error::NonPositiveTime { t });
        }
        Ok(Self {
            modes,
            photon_cap,
            alpha,
            t,
        })
    }

    /// Closed-form bound for this instance.
    pub fn closed_form_bound(&self) -> f64 {
        bosonic_bound(&self.alpha, self.photon_cap, self.t)
    }
}

/// Number-operator eigenvalue matrix: one column per occupation tuple
/// `p` with `sum p <= P` (lexicographic order), row `j` holding `p_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BosonicMatrix {
    pub matrix: DMatrix<f64>,
    pub tuples: Vec<Vec<u32>>,
}

pub fn bosonic_number_matrix(modes: usize, photon_cap: u32) -> Result<BosonicMatrix, L1Error> {
    if photon_cap < 1 {
        return Err(L1Error::PhotonCapTooSmall { p: photon_cap });
    }
    let count = binomial(photon_cap as usize + modes, modes);
    if count > COLUMN_LIMIT {
        return Err(L1Error::SizeExceeded {
            cols: count,
            limit: COLUMN_LIMIT,
        });
    }
    let mut tuples = Vec::with_capacity(count);
    let mut current = vec![0u32; modes];
    enumerate_tuples(&mut current, 0, photon_cap, &mut tuples);
    let matrix = DMatrix::from_fn(modes, tuples.len(), |r, c| f64::from(tuples[c][r]));
    Ok(BosonicMatrix { matrix, tuples })
}

fn enumerate_tuples(current: &mut Vec<u32>, mode: usize, budget: u32, out: &mut Vec<Vec<u32>>) {
    if mode == current.len() {
        out.push(current.clone());
        return;
    }
    for v in 0..=budget {
        current[mode] = v;
        enumerate_tuples(current, mode + 1, budget - v, out);
    }
    current[mode] = 0;
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Bound for independent Z-string generators: `||alpha||_inf^2 / (4 t^2)`.
pub fn independent_generator_bound(alpha: &[f64], t: f64) -> f64 {
    let linf = alpha.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    linf * linf / (4.0 * t * t)
}

/// Optimal `||a||_1` for independent Z-string generators.
pub fn independent_generator_l1(alpha: &[f64]) -> f64 {
    alpha.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Bound for photon-number generators:
/// `max(||alpha||_1+, ||alpha||_1-)^2 / (P^2 t^2)`.
pub fn bosonic_bound(alpha: &[f64], photon_cap: u32, t: f64) -> f64 {
    let pos: f64 = alpha.iter().filter(|v| **v > 0.0).sum();
    let neg: f64 = -alpha.iter().filter(|v| **v < 0.0).sum::<f64>();
    let peak = pos.max(neg);
    peak * peak / (f64::from(photon_cap) * f64::from(photon_cap) * t * t)
}

/// Row-reduce `rows` (augmented by `rhs`) and report the independent row
/// indices plus consistency of the dropped ones.
fn independent_rows(rows: &[Vec<f64>], rhs: &[f64]) -> (Vec<usize>, bool) {
    let ncols = rows[0].len();
    let mut work: Vec<Vec<f64>> = rows.to_vec();
    let mut aug: Vec<f64> = rhs.to_vec();
    let mut live = Vec::new();
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (work row, pivot col)
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-10 * scale;
    for i in 0..work.len() {
        for &(pr, pc) in &pivots {
            let f = work[i][pc] / work[pr][pc];
            if f != 0.0 {
                let prow = work[pr].clone();
                for (wv, pv) in work[i].iter_mut().zip(&prow) {
                    *wv -= f * pv;
                }
                aug[i] -= f * aug[pr];
            }
        }
        let pc = (0..ncols).max_by(|&a, &b| work[i][a].abs().total_cmp(&work[i][b].abs()));
        match pc {
            Some(pc) if work[i][pc].abs() > tol => {
                pivots.push((i, pc));
                live.push(i);
            }
            _ => {
                if aug[i].abs() > FEASIBILITY_TOL {
                    return (live, false);
                }
            }
        }
    }
    (live, true)
}

/// Advance `subset` to the next k-combination of `0..n`; false when done.
fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < n - (k - i) {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn matrix_rank(m: &DMatrix<f64>) -> usize {
    let mut work: Vec<Vec<f64>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect();
    let scale = work
        .iter()
        .flat_map(|r| r.iter())
        .fold(1.0f64, |mm, v| mm.max(v.abs()));
    let tol = 1e-10 * scale;
    let mut rank = 0;
    let mut row = 0;
    for col in 0..m.ncols() {
        if row >= work.len() {
            break;
        }
        let piv =
            (row..work.len()).max_by(|&a, &b| work[a][col].abs().total_cmp(&work[b][col].abs()));
        let Some(piv) = piv else { break };
        if work[piv][col].abs() <= tol {
            continue;
        }
        work.swap(row, piv);
        let (upper, lower) = work.split_at_mut(row + 1);
        let pivot_row = &upper[row];
        for r in lower.iter_mut() {
            let f = r[col] / pivot_row[col];
            if f != 0.0 {
                for (rv, pv) in r.iter_mut().zip(pivot_row.iter()).skip(col) {
                    *rv -= f * pv;
                }
            }
        }
        rank += 1;
        row += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{GeneratorSet, ZString};
    use approx::assert_abs_diff_eq;

    fn solve_z(n: usize, gens: &[&str], alpha: &[f64], t: f64) -> L1Solution {
        let set = GeneratorSet::parse(n, gens).unwrap();
        L1Problem::from_generators(&set, alpha.to_vec(), t)
            .unwrap()
            .solve()
            .unwrap()
    }

    #[test]
    fn independent_pair_matches_linf() {
        // gens {Z1, Z2}, alpha = (1, 0.3): l1 = ||alpha||_inf = 1.
        let sol = solve_z(2, &["ZI", "IZ"], &[1.0, 0.3], 1.0);
        assert_abs_diff_eq!(sol.l1(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.bound(), 0.25, epsilon = 1e-9);
        assert!(sol.support_size() <= 3);
    }

    #[test]
    fn zero_alpha_is_trivial() {
        let sol = solve_z(2, &["ZI", "IZ"], &[0.0, 0.0], 1.0);
        assert!(sol.is_zero());
        assert_eq!(sol.bound(), 0.0);
    }

    #[test]
    fn full_generator_set_has_unique_solution() {
        // m = N - 1 leaves no freedom: a = h' alpha' / N.
        let sol = solve_z(2, &["ZI", "IZ", "ZZ"], &[1.0, 1.0, 1.0], 1.0);
        assert_abs_diff_eq!(sol.l1(), 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.bound(), 0.5625, epsilon = 1e-9);
        assert_eq!(sol.support_size(), 4);
        assert_abs_diff_eq!(sol.value_at(0b00), 0.75, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.value_at(0b01), -0.25, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.value_at(0b10), -0.25, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.value_at(0b11), -0.25, epsilon = 1e-9);
    }

    #[test]
    fn oracle_agrees_on_named_examples() {
        for (gens, alpha, want_l1) in [
            (vec!["ZI", "IZ"], vec![1.0, 0.3], 1.0),
            (vec!["ZI", "IZ", "ZZ"], vec![1.0, 1.0, 1.0], 1.5),
        ] {
            let set = GeneratorSet::parse(2, &gens).unwrap();
            let prob = L1Problem::from_generators(&set, alpha, 1.0).unwrap();
            let solver = prob.solve().unwrap();
            let oracle = prob.solve_by_enumeration().unwrap();
            assert_abs_diff_eq!(solver.l1(), want_l1, epsilon = 1e-9);
            assert_abs_diff_eq!(oracle.l1(), want_l1, epsilon = 1e-9);
        }
    }

    #[test]
    fn oracle_single_generator() {
        // One generator Z1, alpha = (c): a = (c/2, -c/2), l1 = |c|.
        let set = GeneratorSet::parse(1, &["Z"]).unwrap();
        let prob = L1Problem::from_generators(&set, vec![-0.7], 1.0).unwrap();
        let oracle = prob.solve_by_enumeration().unwrap();
        assert_abs_diff_eq!(oracle.l1(), 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(oracle.value_at(0), -0.35, epsilon = 1e-12);
        assert_abs_diff_eq!(oracle.value_at(1), 0.35, epsilon = 1e-12);
    }

    #[test]
    fn feasible_column_subset_matches_oracle() {
        // Z1 on two qubits, restricted to the columns with qubit 2 in |0>.
        let set = GeneratorSet::parse(2, &["ZI"]).unwrap();
        let prob =
            L1Problem::from_generators_with_columns(&set, &[0b00, 0b01], vec![-0.7], 1.0).unwrap();
        let sol = prob.solve().unwrap();
        let oracle = prob.solve_by_enumeration().unwrap();
        assert_abs_diff_eq!(sol.l1(), 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(oracle.l1(), 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.value_at(0b00), -0.35, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.value_at(0b01), 0.35, epsilon = 1e-12);
    }

    #[test]
    fn full_set_solution_is_the_inverse_transform() {
        // With all non-identity strings as generators the feasible set is a
        // single point, a = h'^T alpha' / N with alpha' = (0, alpha).
        let set = GeneratorSet::full(3).unwrap();
        let alpha = vec![0.9, -0.3, 0.55, 0.1, -0.75, 0.2, 0.4];
        let sol = L1Problem::from_generators(&set, alpha.clone(), 1.0)
            .unwrap()
            .solve()
            .unwrap();
        for x in 0..8u64 {
            let want: f64 = set
                .iter()
                .zip(&alpha)
                .map(|(g, a)| f64::from(g.eigenvalue(x)) * a)
                .sum::<f64>()
                / 8.0;
            assert_abs_diff_eq!(sol.value_at(x), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn oracle_guards_reject_large_instances() {
        // Too many generator rows.
        let set = GeneratorSet::full(3).unwrap(); // m = 7 is the cap
        let mut gens: Vec<ZString> = set.iter().copied().collect();
        let wide: Vec<ZString> = gens
            .drain(..)
            .map(|z| ZString::new(z.mask(), 4).unwrap())
            .chain([ZString::new(0b1000, 4).unwrap()])
            .collect();
        let set8 = GeneratorSet::new(4, wide).unwrap();
        let prob = L1Problem::from_generators(&set8, vec![0.1; 8], 1.0).unwrap();
        assert!(matches!(
            prob.solve_by_enumeration(),
            Err(L1Error::SizeExceeded { .. })
        ));
        // Too many columns.
        let set = GeneratorSet::local(7).unwrap();
        let prob = L1Problem::from_generators(&set, vec![0.1; 7], 1.0).unwrap();
        assert!(matches!(
            prob.solve_by_enumeration(),
            Err(L1Error::SizeExceeded { .. })
        ));
    }

    #[test]
    fn solution_invariants_hold() {
        let set = GeneratorSet::parse(3, &["ZII", "IZI", "ZZZ", "ZIZ"]).unwrap();
        let alpha = vec![0.9, -0.4, 0.2, 0.55];
        let prob = L1Problem::from_generators(&set, alpha.clone(), 2.0).unwrap();
        let sol = prob.solve().unwrap();
        // h a = alpha and zero sum.
        let mut resid = alpha.clone();
        let mut sum = 0.0;
        for e in sol.support() {
            sum += e.v;
            for (i, g) in set.iter().enumerate() {
                resid[i] -= f64::from(g.eigenvalue(e.x)) * e.v;
            }
        }
        for r in resid {
            assert_abs_diff_eq!(r, 0.0, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(sum, 0.0, epsilon = 1e-9);
        assert!(sol.support_size() <= set.len() + 1);
        // Strong duality and columnwise dual feasibility.
        assert_abs_diff_eq!(sol.dual().objective(), sol.l1(), epsilon = 1e-9);
        assert!(sol.dual().is_feasible_for(&prob));
        assert_abs_diff_eq!(sol.dual().seminorm_value(), 2.0 / sol.l1(), epsilon = 1e-9);
        let beta = sol.dual().dual_basis_vector();
        let dot: f64 = beta.iter().zip(&alpha).map(|(b, a)| b * a).sum();
        assert_abs_diff_eq!(dot, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn column_subset_can_be_infeasible() {
        // Restricting Z1 to the single column x = 1 forces a = 0 from the
        // zero-sum row, which contradicts alpha != 0.
        let set = GeneratorSet::parse(1, &["Z"]).unwrap();
        let prob = L1Problem::from_generators_with_columns(&set, &[1], vec![0.5], 1.0);
        // Rank of h = [-1] is 1, so construction succeeds; the solve fails.
        let err = prob.unwrap().solve().unwrap_err();
        assert_eq!(err, L1Error::Infeasible);
    }

    #[test]
    fn rank_deficient_rows_rejected() {
        // On columns with bit 1 clear, the ZI and ZZ rows coincide.
        let set = GeneratorSet::parse(2, &["ZI", "ZZ"]).unwrap();
        let err = L1Problem::from_generators_with_columns(&set, &[0b00, 0b01], vec![1.0, 1.0], 1.0)
            .unwrap_err();
        assert!(matches!(err, L1Error::RankDeficient { .. }));
    }

    #[test]
    fn bosonic_matrix_enumeration() {
        let hb = bosonic_number_matrix(1, 2).unwrap();
        assert_eq!(hb.tuples, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(hb.matrix.nrows(), 1);
        assert_eq!(
            (0..3).map(|j| hb.matrix[(0, j)]).collect::<Vec<_>>(),
            vec![0.0, 1.0, 2.0]
        );

        let hb = bosonic_number_matrix(2, 1).unwrap();
        assert_eq!(hb.tuples, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert_eq!(hb.matrix[(0, 2)], 1.0);
        assert_eq!(hb.matrix[(1, 1)], 1.0);

        let hb = bosonic_number_matrix(2, 2).unwrap();
        assert_eq!(hb.tuples.len(), 6);
    }

    #[test]
    fn bosonic_closed_form_examples() {
        assert_abs_diff_eq!(bosonic_bound(&[1.0, -1.0], 2, 1.0), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(bosonic_bound(&[1.0, 1.0], 2, 1.0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bosonic_lp_matches_closed_form() {
        for (alpha, p) in [
            (vec![1.0, -1.0], 2u32),
            (vec![1.0, 1.0], 2),
            (vec![0.3, -0.8, 0.5], 3),
        ] {
            let prob = BosonicProblem::new(alpha.len(), p, alpha.clone(), 1.0).unwrap();
            let lp = L1Problem::from_bosonic(&prob).unwrap().solve().unwrap();
            assert_abs_diff_eq!(lp.bound(), prob.closed_form_bound(), epsilon = 1e-9);
        }
    }

    #[test]
    fn independent_closed_form_examples() {
        assert_abs_diff_eq!(
            independent_generator_bound(&[1.0, 0.5], 1.0),
            0.25,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            independent_generator_bound(&[1.0; 5], 2.0),
            0.25 / 4.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn scaling_covariance() {
        let set = GeneratorSet::parse(3, &["ZII", "IZZ", "ZZZ"]).unwrap();
        let alpha = vec![0.4, -0.9, 0.7];
        let base = L1Problem::from_generators(&set, alpha.clone(), 1.0)
            .unwrap()
            .solve()
            .unwrap();
        for c in [2.0, -0.5] {
            let scaled: Vec<f64> = alpha.iter().map(|v| c * v).collect();
            let sol = L1Problem::from_generators(&set, scaled, 1.0)
                .unwrap()
                .solve()
                .unwrap();
            assert_abs_diff_eq!(sol.l1(), c.abs() * base.l1(), epsilon = 1e-9);
            assert_abs_diff_eq!(sol.bound(), c * c * base.bound(), epsilon = 1e-9);
        }
    }

    #[test]
    fn stabilizer_l1_bounded_by_l2() {
        // Plancherel: the optimum never exceeds ||alpha||_2 for Z-strings.
        let set = GeneratorSet::parse(3, &["ZZI", "IZZ", "ZIZ", "ZZZ"]).unwrap();
        let alpha = vec![0.6, -0.2, 0.9, 0.1];
        let sol = L1Problem::from_generators(&set, alpha.clone(), 1.0)
            .unwrap()
            .solve()
            .unwrap();
        let l2 = alpha.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(sol.l1() <= l2 + 1e-9);
    }

    #[test]
    fn solution_json_schema() {
        let sol = solve_z(1, &["Z"], &[1.0], 1.0);
        let json = serde_json::to_value(&sol).unwrap();
        assert!(json["a"].is_array());
        assert_eq!(json["a"][0]["x"], 0);
        assert_eq!(json["l0"], 2);
        assert!(json["dual"].is_array());
        assert_abs_diff_eq!(json["l1"].as_f64().unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(json["bound"].as_f64().unwrap(), 0.25, epsilon = 1e-9);
    }
}
