//! Sturm-sequence counting and bisection for symmetric tridiagonal matrices.
//!
//! Every eigenvalue returned here comes with a bracket `[lo, hi]` of width at
//! most the requested tolerance such that the Sturm count jumps across it, so
//! `sturm_count(λ - tol) < sturm_count(λ + tol)` holds for each reported `λ`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{config_err, domain_err, Result};
use crate::operators::TridiagonalMatrix;

/// Relative size of the pivot that replaces a vanishing one.
pub const PIVOT_EPS: f64 = 1.0 / (1u64 << 40) as f64;

/// Largest dimension accepted by [`eigen_all`].
pub const EIGEN_ALL_CAP: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Largest,
    Smallest,
}

/// `10⁻¹⁰ · max(1, ‖T‖)` with `‖T‖` the Gershgorin norm bound.
pub fn default_tol(matrix: &TridiagonalMatrix) -> f64 {
    1e-10 * matrix.norm_bound().max(1.0)
}

/// Sturm counter bound to one matrix, with the squared off-diagonal and pivot
/// floor precomputed.
pub struct SturmCounter<'a> {
    diag: &'a [f64],
    offdiag_sq: Vec<f64>,
    pivmin: f64,
}

impl<'a> SturmCounter<'a> {
    pub fn new(matrix: &'a TridiagonalMatrix) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(domain_err!("matrix has non-finite entries"));
        }
        let pivmin = PIVOT_EPS * matrix.norm_bound().max(f64::MIN_POSITIVE);
        Ok(Self {
            diag: matrix.diag(),
            offdiag_sq: matrix.offdiag().iter().map(|e| e * e).collect(),
            pivmin,
        })
    }

    /// Number of eigenvalues strictly below `x`. A pivot that vanishes is
    /// replaced by `+pivmin`, which evaluates the count just below `x`, so an
    /// eigenvalue sitting exactly at `x` is not counted.
    #[inline]
    pub fn count(&self, x: f64) -> usize {
        let mut count = 0usize;
        let mut q = self.diag[0] - x;
        if q.abs() < self.pivmin {
            q = self.pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for (d, e2) in self.diag[1..].iter().zip(&self.offdiag_sq) {
            q = (d - x) - e2 / q;
            if q.abs() < self.pivmin {
                q = self.pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Eigenvalue of ascending index `index`, given `count(lo) <= index` and
    /// `count(hi) > index`; returns the final bracket.
    pub fn bisect(&self, index: usize, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo, hi)
    }
}

/// Number of eigenvalues of `matrix` strictly less than `x`.
pub fn sturm_count(matrix: &TridiagonalMatrix, x: f64) -> Result<usize> {
    if x.is_nan() {
        return Err(domain_err!("shift is NaN"));
    }
    Ok(SturmCounter::new(matrix)?.count(x))
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(config_err!("tolerance must be positive, got {tol}"));
    }
    Ok(())
}

/// Outer bracket slightly wider than the Gershgorin interval.
fn outer_bracket(matrix: &TridiagonalMatrix, tol: f64) -> (f64, f64) {
    let (lo, hi) = matrix.gershgorin();
    let pad = 2.0 * tol + 4.0 * f64::EPSILON * matrix.norm_bound().max(1.0);
    (lo - pad, hi + pad)
}

/// The `k` largest or smallest eigenvalues, each bracketed to width `tol`.
///
/// Largest are returned in descending order, smallest in ascending order.
pub fn eigen_extreme(
    matrix: &TridiagonalMatrix,
    k: usize,
    side: Side,
    tol: f64,
) -> Result<Vec<f64>> {
    let n = matrix.dim();
    if k == 0 || k > n {
        return Err(domain_err!("requested {k} eigenvalues of a {n}x{n} matrix"));
    }
    check_tol(tol)?;
    let counter = SturmCounter::new(matrix)?;
    let (glo, ghi) = outer_bracket(matrix, tol);
    let mut out = Vec::with_capacity(k);
    match side {
        Side::Smallest => {
            let mut lo = glo;
            for index in 0..k {
                let (a, b) = counter.bisect(index, lo, ghi, tol);
                out.push(0.5 * (a + b));
                // the next eigenvalue is at least the lower end of this bracket
                lo = a;
            }
        }
        Side::Largest => {
            let mut hi = ghi;
            for j in 0..k {
                let index = n - 1 - j;
                let (a, b) = counter.bisect(index, glo, hi, tol);
                out.push(0.5 * (a + b));
                hi = b;
            }
        }
    }
    Ok(out)
}

/// The full spectrum in ascending order, each eigenvalue to `±tol`.
pub fn eigen_all(matrix: &TridiagonalMatrix, tol: f64) -> Result<Vec<f64>> {
    eigen_all_capped(matrix, tol, EIGEN_ALL_CAP)
}

/// [`eigen_all`] with an explicit dimension cap.
pub fn eigen_all_capped(matrix: &TridiagonalMatrix, tol: f64, cap: usize) -> Result<Vec<f64>> {
    let n = matrix.dim();
    if n > cap {
        return Err(config_err!("dimension {n} exceeds the eigen_all cap {cap}"));
    }
    check_tol(tol)?;
    let counter = SturmCounter::new(matrix)?;
    let (glo, ghi) = outer_bracket(matrix, tol);
    let (clo, chi) = (counter.count(glo), counter.count(ghi));
    if clo != 0 || chi != n {
        return Err(domain_err!(
            "Sturm counts {clo}..{chi} across the Gershgorin interval, expected 0..{n}"
        ));
    }
    let mut out = vec![f64::NAN; n];
    // Work list of brackets (lo, count(lo), hi, count(hi)) that still hold
    // eigenvalues; splitting shares the early bisection steps among clusters.
    let mut stack = vec![(glo, 0usize, ghi, n)];
    while let Some((lo, clo, hi, chi)) = stack.pop() {
        if clo == chi {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            for v in &mut out[clo..chi] {
                *v = mid;
            }
            continue;
        }
        if chi - clo == 1 {
            let (a, b) = counter.bisect(clo, lo, hi, tol);
            out[clo] = 0.5 * (a + b);
            continue;
        }
        let cmid = counter.count(mid).clamp(clo, chi);
        stack.push((mid, cmid, hi, chi));
        stack.push((lo, clo, mid, cmid));
    }
    Ok(out)
}

/// Checks `sturm_count(λ - tol) < sturm_count(λ + tol)`.
pub fn bracket_certificate(matrix: &TridiagonalMatrix, lambda: f64, tol: f64) -> Result<bool> {
    let counter = SturmCounter::new(matrix)?;
    Ok(counter.count(lambda - tol) < counter.count(lambda + tol))
}

/// Certificates for a batch of reported eigenvalues of one matrix.
pub fn all_certified(matrix: &TridiagonalMatrix, eigenvalues: &[f64], tol: f64) -> Result<bool> {
    let counter = SturmCounter::new(matrix)?;
    Ok(eigenvalues
        .iter()
        .all(|&l| counter.count(l - tol) < counter.count(l + tol)))
}
