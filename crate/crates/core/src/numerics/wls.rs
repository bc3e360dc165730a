use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SaeError};

/// Relative pivot threshold below which the weighted design is treated as singular.
const PIVOT_RATIO: f64 = 1e-12;

/// Weighted least squares: `argmin_b sum_i w_i (c_i - a_i'b)^2`.
///
/// `rows` is row-major with `p` columns. Solved by Householder QR of the
/// `sqrt(w)`-scaled system, so the normal equations are never formed.
pub fn solve_wls(rows: &[f64], p: usize, targets: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    let m = targets.len();
    if p == 0 {
        return Err(SaeError::InvalidInput("design has no columns".into()));
    }
    if rows.len() != m * p {
        return Err(SaeError::LengthMismatch {
            what: "design rows",
            expected: m * p,
            actual: rows.len(),
        });
    }
    if weights.len() != m {
        return Err(SaeError::LengthMismatch {
            what: "weights",
            expected: m,
            actual: weights.len(),
        });
    }
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(SaeError::InvalidInput(
            "weights must be finite and nonnegative".into(),
        ));
    }
    let positive = weights.iter().filter(|w| **w > 0.0).count();
    if positive < p {
        return Err(SaeError::InvalidInput(format!(
            "need at least {p} rows with positive weight, got {positive}"
        )));
    }

    let mut a = DMatrix::<f64>::zeros(positive, p);
    let mut c = DVector::<f64>::zeros(positive);
    let mut r = 0;
    for i in 0..m {
        if weights[i] == 0.0 {
            continue;
        }
        let s = weights[i].sqrt();
        for j in 0..p {
            a[(r, j)] = s * rows[i * p + j];
        }
        c[r] = s * targets[i];
        r += 1;
    }

    let qr = a.qr();
    let rmat = qr.r();
    let diag: Vec<f64> = (0..p).map(|k| rmat[(k, k)].abs()).collect();
    let largest = diag.iter().cloned().fold(0.0, f64::max);
    let smallest = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(largest > 0.0) || smallest < PIVOT_RATIO * largest {
        let ratio = if largest > 0.0 { smallest / largest } else { 0.0 };
        return Err(SaeError::Singular { ratio });
    }
    let qtc = qr.q().transpose() * c;
    let beta = rmat
        .solve_upper_triangular(&qtc.rows(0, p).into_owned())
        .ok_or(SaeError::Singular { ratio: 0.0 })?;
    Ok(beta.iter().copied().collect())
}
