//! Convex-hull membership by linear-programming feasibility.
//!
//! `q ∈ conv{x_1, …, x_m}` iff there are `λ ≥ 0` with `Σλ = 1` and
//! `Σλ_j x_j = q`. The system is solved with a phase-one simplex on a dense
//! tableau using Bland's rule, so degenerate pivots cannot cycle.

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;

const PIVOT_EPS: f64 = 1e-12;

/// Decides whether `query` lies in the convex hull of `points`.
///
/// The equality constraints are posed after translating `query` to the origin
/// and scaling each coordinate by the spread of the points around it, so `tol`
/// is a relative tolerance on the residual of `Σλ_j x_j = q`. Boundary points
/// within `tol` count as inside.
pub fn in_hull<'a, I>(query: &[f64], points: I, tol: f64) -> Result<bool>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be > 0, got {tol}")));
    }
    let d = query.len();
    let mut columns: Vec<&[f64]> = Vec::new();
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.len(),
            });
        }
        columns.push(p);
    }
    if columns.is_empty() {
        return Ok(false);
    }

    let mut scale = vec![0.0f64; d];
    for p in &columns {
        for k in 0..d {
            scale[k] = scale[k].max((p[k] - query[k]).abs());
        }
    }

    let m = columns.len();
    let rows = d + 1;
    // Columns: m convex weights, `rows` nonnegative artificials, `d`
    // nonpositive artificials on the coordinate rows, one right-hand side.
    // The phase-one optimum is then the L1 residual of the best combination.
    let artificials = rows + d;
    let width = m + artificials + 1;
    let rhs = width - 1;
    let mut tab = vec![0.0f64; rows * width];
    for k in 0..d {
        let s = if scale[k] > 0.0 { scale[k] } else { 1.0 };
        for (j, p) in columns.iter().enumerate() {
            tab[k * width + j] = (p[k] - query[k]) / s;
        }
    }
    for j in 0..m {
        tab[d * width + j] = 1.0;
    }
    tab[d * width + rhs] = 1.0;
    for r in 0..rows {
        tab[r * width + m + r] = 1.0;
    }
    for k in 0..d {
        tab[k * width + m + rows + k] = -1.0;
    }
    let mut basis: Vec<usize> = (m..m + rows).collect();

    // Phase-one objective: minimise the sum of artificials. Reduced costs
    // start as the unit costs minus the column sums over the basic rows.
    let mut cost = vec![0.0f64; width];
    for c in &mut cost[m..m + artificials] {
        *c = 1.0;
    }
    for r in 0..rows {
        for j in (0..m + artificials).chain(std::iter::once(rhs)) {
            cost[j] -= tab[r * width + j];
        }
    }

    while let Some(enter) = (0..m + artificials).find(|&j| cost[j] < -PIVOT_EPS) {
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for r in 0..rows {
            let a = tab[r * width + enter];
            if a > PIVOT_EPS {
                let ratio = tab[r * width + rhs] / a;
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best - PIVOT_EPS
                            || (ratio <= best + PIVOT_EPS && basis[r] < basis[l])
                    }
                };
                if better {
                    best = ratio;
                    leave = Some(r);
                }
            }
        }
        // Phase one is bounded below by zero, so an unbounded ray cannot occur
        // except through round-off; stop with the current objective.
        let Some(pr) = leave else { break };
        pivot(&mut tab, &mut cost, width, rows, pr, enter);
        basis[pr] = enter;
    }

    // The objective value is -cost[rhs].
    Ok(-cost[rhs] <= tol)
}

fn pivot(tab: &mut [f64], cost: &mut [f64], width: usize, rows: usize, pr: usize, pc: usize) {
    let inv = 1.0 / tab[pr * width + pc];
    for j in 0..width {
        tab[pr * width + j] *= inv;
    }
    tab[pr * width + pc] = 1.0;
    let (before, rest) = tab.split_at_mut(pr * width);
    let (pivot_row, after) = rest.split_at_mut(width);
    for row in before.chunks_exact_mut(width).chain(after.chunks_exact_mut(width)).take(rows - 1) {
        let f = row[pc];
        if f != 0.0 {
            for (x, p) in row.iter_mut().zip(pivot_row.iter()) {
                *x -= f * p;
            }
            row[pc] = 0.0;
        }
    }
    let f = cost[pc];
    if f != 0.0 {
        for (x, p) in cost.iter_mut().zip(pivot_row.iter()) {
            *x -= f * p;
        }
        cost[pc] = 0.0;
    }
}
