//! Small dense linear algebra helpers for the surrogate fits.
//!
//! Systems here are tiny (|F|+1 unknowns at most), so plain Gaussian
//! elimination with partial pivoting is all we need.

/// Solve `a * x = b` in place for a square system.
///
/// Returns `None` when a pivot falls below `1e-12`, i.e. the system is
/// numerically singular.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);

        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }

    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Weighted ridge regression: minimizes `sum_i w_i (y_i - x_i . beta)^2 + lambda |beta_p|^2`
/// where the first column of `x` is the intercept (never penalized) when
/// `intercept` is true.
///
/// Returns the coefficient vector, or `None` if the normal equations are
/// singular even after regularization.
pub fn weighted_ridge(
    x: &[Vec<f64>],
    y: &[f64],
    w: &[f64],
    lambda: f64,
    intercept: bool,
) -> Option<Vec<f64>> {
    let n = x.len();
    if n == 0 {
        return None;
    }
    let p = x[0].len();
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for i in 0..n {
        let wi = w[i];
        for j in 0..p {
            let xij = x[i][j] * wi;
            xty[j] += xij * y[i];
            for k in j..p {
                xtx[j][k] += xij * x[i][k];
            }
        }
    }
    for j in 0..p {
        for k in 0..j {
            xtx[j][k] = xtx[k][j];
        }
    }
    for (j, row) in xtx.iter_mut().enumerate() {
        if !(intercept && j == 0) {
            row[j] += lambda;
        }
    }
    solve(xtx, xty)
}
