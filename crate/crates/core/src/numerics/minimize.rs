use crate::error::{Result, SaeError};

/// Bounds and resolution of a one-dimensional search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub lo: f64,
    pub hi: f64,
    pub grid_points: usize,
    pub tol: f64,
}

impl Default for SearchConfig {
    /// The search used for variance parameters: `[0, 1e3]`, 201 log-spaced
    /// points, golden refinement to `1e-8`.
    fn default() -> Self {
        Self {
            lo: 0.0,
            hi: 1e3,
            grid_points: 201,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMinResult {
    pub argmin: f64,
    pub value: f64,
    pub evaluations: usize,
    /// Golden refinement shrank its bracket below `tol`.
    pub converged: bool,
}

/// Smallest grid start used when `lo` is at or below zero.
const LOG_GRID_FLOOR: f64 = 1e-6;
const MAX_GOLDEN_ITERS: usize = 400;

/// Minimise `f` over `[lo, hi]`.
///
/// A log-spaced grid over `[max(lo, 1e-6), hi]` (plus `lo` itself) locates the
/// basin; golden-section search then refines between the neighbours of the
/// best grid point. Ties go to the smaller argument.
pub fn minimize_scalar<F>(mut f: F, cfg: &SearchConfig) -> Result<ScalarMinResult>
where
    F: FnMut(f64) -> f64,
{
    try_minimize_scalar(|t| Ok(f(t)), cfg)
}

/// Like [`minimize_scalar`] for objectives that can fail. The first error
/// aborts the search.
pub fn try_minimize_scalar<F>(mut f: F, cfg: &SearchConfig) -> Result<ScalarMinResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let SearchConfig {
        lo,
        hi,
        grid_points,
        tol,
    } = *cfg;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(SaeError::InvalidInput(format!(
            "search bounds must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    if grid_points < 3 {
        return Err(SaeError::InvalidInput("grid_points must be at least 3".into()));
    }
    if !(tol > 0.0) {
        return Err(SaeError::InvalidInput("tol must be positive".into()));
    }

    let grid = build_grid(lo, hi, grid_points);
    let mut evaluations = 0usize;
    let mut eval = |t: f64| -> Result<f64> {
        evaluations += 1;
        let v = f(t)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(SaeError::NonFinite { arg: t })
        }
    };

    let mut best = 0usize;
    let mut best_val = f64::INFINITY;
    for (k, &t) in grid.iter().enumerate() {
        let v = eval(t)?;
        if v < best_val {
            best = k;
            best_val = v;
        }
    }

    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(grid.len() - 1)];
    let (mut arg, mut val) = (grid[best], best_val);
    let mut converged = b - a < tol;

    if !converged {
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let mut x1 = b - INV_PHI * (b - a);
        let mut x2 = a + INV_PHI * (b - a);
        let mut f1 = eval(x1)?;
        let mut f2 = eval(x2)?;
        for _ in 0..MAX_GOLDEN_ITERS {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - INV_PHI * (b - a);
                f1 = eval(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + INV_PHI * (b - a);
                f2 = eval(x2)?;
            }
            if b - a < tol {
                converged = true;
                break;
            }
        }
        let (cand, cand_val) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
        if cand_val < val || (cand_val == val && cand < arg) {
            arg = cand;
            val = cand_val;
        }
    }

    Ok(ScalarMinResult {
        argmin: arg,
        value: val,
        evaluations,
        converged,
    })
}

fn build_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let start = lo.max(LOG_GRID_FLOOR);
    let mut grid = Vec::with_capacity(points + 1);
    if start >= hi {
        // Interval lies entirely below the log floor.
        let step = (hi - lo) / (points - 1) as f64;
        grid.extend((0..points).map(|k| lo + step * k as f64));
    } else {
        if lo < start {
            grid.push(lo);
        }
        let ratio = (hi / start).ln() / (points - 1) as f64;
        grid.extend((0..points).map(|k| start * (ratio * k as f64).exp()));
    }
    *grid.last_mut().unwrap() = hi;
    grid
}
