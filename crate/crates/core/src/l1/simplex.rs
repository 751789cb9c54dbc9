//! Two-phase primal simplex for small dense standard-form programs
//!
//! ```text
//! min c^T x   s.t.   A x = b,  x >= 0,
//! ```
//!
//! with Bland's rule for both the entering and leaving variable, so the
//! method cannot cycle. Termination at a basic feasible solution is the
//! point: a vertex optimum has at most rank(A) nonzero entries.
//!
//! The tableau keeps the artificial columns through phase two (barred from
//! entering); after phase two they hold the basis inverse, which yields the
//! dual multipliers. Basic values and duals are then re-solved from the
//! original data with a fresh elimination to shed accumulated pivot error.

/// Column access for the constraint matrix; `fill(j, buf)` writes column `j`.
pub(crate) trait ColumnSource {
    fn ncols(&self) -> usize;
    fn fill(&self, j: usize, buf: &mut [f64]);
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum SimplexError {
    Infeasible,
    Unbounded,
    IterationLimit,
    Singular,
}

#[derive(Debug, Clone)]
pub(crate) struct SimplexSolution {
    /// Nonzero basic variables as (column index, value).
    pub basic: Vec<(usize, f64)>,
    pub objective: f64,
    /// Dual multipliers, one per original row (zero on redundant rows).
    pub dual: Vec<f64>,
}

const PIVOT_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;
const MAX_ITERS: usize = 200_000;

pub(crate) fn solve<C: ColumnSource>(
    a: &C,
    cost: &[f64],
    b: &[f64],
) -> Result<SimplexSolution, SimplexError> {
    let rows = b.len();
    let n = a.ncols();
    assert_eq!(cost.len(), n);

    // Sign-adjust rows so the artificial identity basis is feasible.
    let sign: Vec<f64> = b
        .iter()
        .map(|&v| if v < 0.0 { -1.0 } else { 1.0 })
        .collect();

    // Tableau over n original + rows artificial columns.
    let total = n + rows;
    let mut t = vec![vec![0.0f64; total]; rows];
    let mut rhs = vec![0.0f64; rows];
    let mut col = vec![0.0f64; rows];
    for j in 0..n {
        a.fill(j, &mut col);
        for (i, row) in t.iter_mut().enumerate() {
            row[j] = sign[i] * col[i];
        }
    }
    for (i, row) in t.iter_mut().enumerate() {
        row[n + i] = 1.0;
        rhs[i] = sign[i] * b[i];
    }
    let mut basis: Vec<usize> = (n..total).collect();
    let mut alive: Vec<bool> = vec![true; rows];

    // Phase 1: minimize the artificial sum.
    let phase1_cost: Vec<f64> = (0..total).map(|j| if j >= n { 1.0 } else { 0.0 }).collect();
    run_phase(&mut t, &mut rhs, &mut basis, &alive, &phase1_cost, total)?;
    let art_sum: f64 = basis
        .iter()
        .zip(rhs.iter())
        .enumerate()
        .filter(|(i, _)| alive[*i])
        .map(|(_, (&bv, &v))| if bv >= n { v } else { 0.0 })
        .sum();
    if art_sum > FEAS_TOL {
        return Err(SimplexError::Infeasible);
    }

    // Drive artificials out of the basis; rows with no eligible pivot are
    // redundant and dropped.
    for i in 0..rows {
        if !alive[i] || basis[i] < n {
            continue;
        }
        let enter = (0..n).find(|&j| t[i][j].abs() > PIVOT_TOL);
        match enter {
            Some(j) => pivot(&mut t, &mut rhs, &mut basis, i, j),
            None => alive[i] = false,
        }
    }

    // Phase 2 on the original objective; artificials may not re-enter.
    let mut phase2_cost = vec![0.0f64; total];
    phase2_cost[..n].copy_from_slice(cost);
    for c in phase2_cost.iter_mut().skip(n) {
        *c = f64::INFINITY;
    }
    run_phase(&mut t, &mut rhs, &mut basis, &alive, &phase2_cost, n)?;

    refine(a, cost, b, rows, n, &basis, &alive)
}

/// Bland-rule simplex iterations on the current tableau. `enter_limit`
/// bounds the columns allowed to enter (excludes artificials in phase 2).
fn run_phase(
    t: &mut [Vec<f64>],
    rhs: &mut [f64],
    basis: &mut [usize],
    alive: &[bool],
    cost: &[f64],
    enter_limit: usize,
) -> Result<(), SimplexError> {
    let rows = rhs.len();
    for _ in 0..MAX_ITERS {
        // Reduced costs z_j = c_j - c_B^T (B^-1 A_j), recomputed each pass.
        let mut entering = None;
        'scan: for j in 0..enter_limit {
            if basis.contains(&j) {
                continue;
            }
            let mut z = cost[j];
            for i in 0..rows {
                if alive[i] {
                    let cb = cost[basis[i]];
                    if cb != 0.0 && cb.is_finite() {
                        z -= cb * t[i][j];
                    }
                }
            }
            if z < -COST_TOL {
                entering = Some(j);
                break 'scan;
            }
        }
        let Some(j) = entering else {
            return Ok(());
        };

        // Ratio test; ties broken by smallest basic index (Bland).
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..rows {
            if !alive[i] || t[i][j] <= PIVOT_TOL {
                continue;
            }
            let ratio = rhs[i] / t[i][j];
            match leave {
                None => leave = Some((i, ratio)),
                Some((li, lr)) => {
                    if ratio < lr - 1e-12 || (ratio < lr + 1e-12 && basis[i] < basis[li]) {
                        leave = Some((i, ratio));
                    }
                }
            }
        }
        let Some((i, _)) = leave else {
            return Err(SimplexError::Unbounded);
        };
        pivot(t, rhs, basis, i, j);
    }
    Err(SimplexError::IterationLimit)
}

fn pivot(t: &mut [Vec<f64>], rhs: &mut [f64], basis: &mut [usize], row: usize, col: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    rhs[row] /= p;
    for i in 0..t.len() {
        if i == row {
            continue;
        }
        let f = t[i][col];
        if f != 0.0 {
            for k in 0..t[i].len() {
                t[i][k] -= f * t[row][k];
            }
            rhs[i] -= f * rhs[row];
        }
    }
    basis[row] = col;
}

/// Re-solve the final basis system from the original data: B x_B = b for the
/// primal values and B^T y = c_B for the duals.
fn refine<C: ColumnSource>(
    a: &C,
    cost: &[f64],
    b: &[f64],
    rows: usize,
    n: usize,
    basis: &[usize],
    alive: &[bool],
) -> Result<SimplexSolution, SimplexError> {
    let live_rows: Vec<usize> = (0..rows).filter(|&i| alive[i]).collect();
    let basic_cols: Vec<usize> = (0..rows).filter(|&i| alive[i]).map(|i| basis[i]).collect();
    let r = live_rows.len();
    debug_assert!(basic_cols.iter().all(|&j| j < n));

    // Basis matrix restricted to the surviving rows.
    let mut full = vec![0.0f64; rows];
    let mut bm = vec![vec![0.0f64; r]; r];
    for (k, &j) in basic_cols.iter().enumerate() {
        a.fill(j, &mut full);
        for (i, &ri) in live_rows.iter().enumerate() {
            bm[i][k] = full[ri];
        }
    }
    let rb: Vec<f64> = live_rows.iter().map(|&i| b[i]).collect();
    let xb = gauss_solve(&bm, &rb).ok_or(SimplexError::Singular)?;

    let bt: Vec<Vec<f64>> = (0..r).map(|i| (0..r).map(|k| bm[k][i]).collect()).collect();
    let cb: Vec<f64> = basic_cols.iter().map(|&j| cost[j]).collect();
    let y_live = gauss_solve(&bt, &cb).ok_or(SimplexError::Singular)?;
    let mut dual = vec![0.0f64; rows];
    for (k, &ri) in live_rows.iter().enumerate() {
        dual[ri] = y_live[k];
    }

    let mut basic = Vec::with_capacity(r);
    let mut objective = 0.0;
    for (k, &j) in basic_cols.iter().enumerate() {
        if xb[k] < -FEAS_TOL {
            return Err(SimplexError::Singular);
        }
        let v = xb[k].max(0.0);
        objective += cost[j] * v;
        basic.push((j, v));
    }
    Ok(SimplexSolution {
        basic,
        objective,
        dual,
    })
}

/// Dense Gaussian elimination with partial pivoting; `None` when singular.
pub(crate) fn gauss_solve(m: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.truncate(n);
            r
        })
        .collect();
    let mut x = b.to_vec();
    let mut scale = 0.0f64;
    for row in &a {
        for &v in row.iter() {
            scale = scale.max(v.abs());
        }
    }
    let tol = 1e-12 * scale.max(1.0);
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[piv][k].abs() <= tol {
            return None;
        }
        a.swap(k, piv);
        x.swap(k, piv);
        let (upper, lower) = a.split_at_mut(k + 1);
        let pivot_row = &upper[k];
        for (i, row) in lower.iter_mut().enumerate() {
            let f = row[k] / pivot_row[k];
            if f != 0.0 {
                for (rv, pv) in row.iter_mut().zip(pivot_row.iter()).skip(k) {
                    *rv -= f * pv;
                }
                x[k + 1 + i] -= f * x[k];
            }
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= a[k][j] * x[j];
        }
        x[k] = s / a[k][k];
    }
    Some(x)
}
