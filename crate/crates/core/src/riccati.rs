//! Riccati flow `p' = -λ - p² - σW'` and its blow-up count.
//!
//! `p = ψ'/ψ` for a solution of `-ψ'' - σW'ψ = λψ` with `ψ(0) = 0`, so `p`
//! starts at `+∞`, and every zero of `ψ` is a passage of `p` through `-∞`
//! followed by a restart at `+∞`. The number of such passages on `(0, 1]` is
//! the number of eigenvalues `≤ λ` of the Dirichlet operator on `[0, 1]`.
//!
//! With `W` linear between grid points, `W'` is constant on each cell and the
//! flow `p' = -c - p²` is solved in closed form there (tangent, hyperbolic
//! cotangent/tangent or reciprocal branch depending on the sign of `c`). The
//! count is therefore a deterministic, monotone function of `λ` on a fixed
//! noise path, and no pole-resolving step control is needed.

use core::f64::consts::{FRAC_PI_2, PI};

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{config_err, Error, Result};
use crate::paths::NoisePath;

/// Where the flow ended at `x = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Terminal {
    Finite(f64),
    /// `p(1) = ±∞`: `λ` is (numerically) an eigenvalue.
    Pole,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiOutcome {
    pub lambda: f64,
    /// Passages through `-∞` on `(0, 1]`.
    pub blowups: usize,
    pub terminal: Terminal,
    /// Number of noise cells integrated.
    pub steps_taken: usize,
}

/// Step budget for one integration over `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiPolicy {
    pub max_steps: usize,
}

impl Default for RiccatiPolicy {
    fn default() -> Self {
        Self {
            max_steps: 10_000_000,
        }
    }
}

/// Below this value of `|c|h²` a cell uses the `p' = -p²` branch.
const SMALL_PHASE: f64 = 1e-14;

/// Advances `p` across one cell of width `h` under `p' = -c - p²`; returns the
/// new state and the number of blow-ups inside the cell.
#[inline]
pub(crate) fn advance_cell(p: f64, c: f64, h: f64) -> (f64, usize) {
    if c.abs() * h * h < SMALL_PHASE {
        // 1/p moves at unit speed; a blow-up is 1/p crossing 0 from below.
        let v0 = if p.is_infinite() { 0.0 } else { 1.0 / p };
        let v1 = v0 + h;
        let blow = usize::from(v0 < 0.0 && v1 >= 0.0);
        let p1 = if v1 == 0.0 { f64::INFINITY } else { 1.0 / v1 };
        return (p1, blow);
    }
    if c > 0.0 {
        let k = c.sqrt();
        let phase0 = if p == f64::INFINITY {
            FRAC_PI_2
        } else {
            (p / k).atan()
        };
        let phase = phase0 - k * h;
        if phase > -FRAC_PI_2 {
            return (k * phase.tan(), 0);
        }
        let blowups = ((-FRAC_PI_2 - phase) / PI).floor() as usize + 1;
        let reduced = phase + blowups as f64 * PI;
        let p1 = if reduced >= FRAC_PI_2 {
            f64::INFINITY
        } else {
            k * reduced.tan()
        };
        (p1, blowups)
    } else {
        let k = (-c).sqrt();
        let kh = k * h;
        if p == f64::INFINITY {
            return (k / kh.tanh(), 0);
        }
        let r = p / k;
        if r.abs() < 1.0 {
            (k * (r.atanh() + kh).tanh(), 0)
        } else if r == 1.0 || r == -1.0 {
            (p, 0)
        } else {
            // p = k coth(u) with u0 = atanh(k/p); u moves at unit speed in kx
            let u0 = (1.0 / r).atanh();
            let u = u0 + kh;
            if u0 < 0.0 && u >= 0.0 {
                let p1 = if u == 0.0 { f64::INFINITY } else { k / u.tanh() };
                (p1, 1)
            } else {
                (k / u.tanh(), 0)
            }
        }
    }
}

/// Integrates the Riccati flow over `[0, 1]` from `p(0) = +∞` and counts the
/// blow-ups; equals the number of eigenvalues `≤ λ` of `-d²/dx² - σW'`.
pub fn riccati_count(
    lambda: f64,
    sigma: f64,
    noise: &NoisePath,
    policy: &RiccatiPolicy,
) -> Result<RiccatiOutcome> {
    if !lambda.is_finite() || !sigma.is_finite() {
        return Err(config_err!("lambda and sigma must be finite"));
    }
    let cells = noise.unit_cells()?;
    if cells > policy.max_steps {
        return Err(Error::Integration {
            steps: policy.max_steps,
            position: policy.max_steps as f64 * noise.grid_step(),
            reason: alloc::format!("noise grid needs {cells} cells"),
        });
    }
    let h = noise.grid_step();
    let rate = sigma / h;
    let values = noise.values();
    let mut p = f64::INFINITY;
    let mut blowups = 0usize;
    for k in 0..cells {
        let c = lambda + rate * (values[k + 1] - values[k]);
        let (next, b) = advance_cell(p, c, h);
        if next.is_nan() {
            return Err(Error::Integration {
                steps: k,
                position: k as f64 * h,
                reason: alloc::format!("state became NaN from p = {p}, c = {c}"),
            });
        }
        p = next;
        blowups += b;
    }
    Ok(RiccatiOutcome {
        lambda,
        blowups,
        terminal: if p.is_finite() {
            Terminal::Finite(p)
        } else {
            Terminal::Pole
        },
        steps_taken: cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_path(cells: usize) -> NoisePath {
        NoisePath::zero(1.0, 1.0 / cells as f64).unwrap()
    }

    fn count(lambda: f64, cells: usize) -> usize {
        riccati_count(lambda, 0.0, &zero_path(cells), &RiccatiPolicy::default())
            .unwrap()
            .blowups
    }

    #[test]
    fn dirichlet_counts() {
        // eigenvalues k²π²: 9.87, 39.5, 88.8
        assert_eq!(count(15.0, 1000), 1);
        assert_eq!(count(50.0, 1000), 2);
        assert_eq!(count(-10.0, 1000), 0);
        assert_eq!(count(9.0, 1000), 0);
        assert_eq!(count(100.0, 1000), 3);
        // a single cell carries the whole phase
        assert_eq!(count(50.0, 1), 2);
    }

    #[test]
    fn small_phase_branch_matches_free_flow() {
        // p' = -p² from +∞ gives p(x) = 1/x
        let (p, b) = advance_cell(f64::INFINITY, 0.0, 0.25);
        assert_eq!(b, 0);
        assert!((p - 4.0).abs() < 1e-12);
        let (p, b) = advance_cell(-2.0, 0.0, 1.0);
        assert_eq!(b, 1);
        assert!((p - 2.0).abs() < 1e-12);
    }

    #[test]
    fn negative_c_blows_up_once() {
        // p' = 1 - p² from p = -2 reaches -∞ at x = atanh(1/2) ≈ 0.549
        let (_, b) = advance_cell(-2.0, -1.0, 0.5);
        assert_eq!(b, 0);
        let (p, b) = advance_cell(-2.0, -1.0, 0.6);
        assert_eq!(b, 1);
        assert!(p > 1.0);
        let (p, b) = advance_cell(0.3, -4.0, 10.0);
        assert_eq!(b, 0);
        assert!((p - 2.0).abs() < 1e-9);
    }

    #[test]
    fn step_budget() {
        let policy = RiccatiPolicy { max_steps: 10 };
        assert!(matches!(
            riccati_count(1.0, 0.0, &zero_path(100), &policy),
            Err(Error::Integration { .. })
        ));
    }
}
