//! Spectrum of `G = -d²/dx² - σW'` on `[0, 1]` with Dirichlet ends, and the
//! stochastic Airy operator.
//!
//! Two independent routes give the low eigenvalues of `G` on one quenched
//! noise path: a finite-difference matrix solved by Sturm bisection, and
//! bisection in `λ` on the Riccati blow-up count. Both read `W` as piecewise
//! linear on its grid.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::eigen::{eigen_extreme, Side};
use crate::error::{config_err, domain_err, Error, Result};
use crate::exec::Executor;
use crate::operators::{build_continuum, build_sao, continuum_grid_for};
use crate::paths::{brownian_path, NoisePath};
use crate::riccati::{riccati_count, RiccatiPolicy};
use crate::rng::RngStream;

/// Default number of grid cells per unit length for `G`.
pub const DEFAULT_GRID: usize = 8192;

/// Default absolute bracket width for eigenvalues of `G`.
pub const DEFAULT_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    Discretize,
    Riccati,
}

impl SpectrumMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SpectrumMethod::Discretize => "discretize",
            SpectrumMethod::Riccati => "riccati",
        }
    }
}

impl core::str::FromStr for SpectrumMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discretize" => Ok(SpectrumMethod::Discretize),
            "riccati" => Ok(SpectrumMethod::Riccati),
            other => Err(config_err!("unknown spectrum method '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumOptions {
    /// Noise grid cells per unit length (the discretization uses the same grid).
    pub grid: usize,
    pub tol: f64,
    pub policy: RiccatiPolicy,
}

impl Default for ContinuumOptions {
    fn default() -> Self {
        Self {
            grid: DEFAULT_GRID,
            tol: DEFAULT_TOL,
            policy: RiccatiPolicy::default(),
        }
    }
}

/// Low eigenvalues of `G` on one noise path.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumSpectrumSample {
    pub sigma: f64,
    /// `Λ₀ < Λ₁ < …`
    pub lambdas: Vec<f64>,
    pub method: SpectrumMethod,
    /// Stream the noise path was drawn from.
    pub noise_id: RngStream,
}

/// The Brownian path on `[0, 1]` used for noise stream `stream`.
pub fn continuum_noise(grid: usize, stream: RngStream) -> Result<NoisePath> {
    if grid < 2 {
        return Err(config_err!("continuum grid needs at least 2 cells, got {grid}"));
    }
    brownian_path(1.0, 1.0 / grid as f64, stream)
}

/// The `k` smallest eigenvalues of `G` on `noise`, by the finite-difference
/// matrix on the noise grid.
pub fn discretized_spectrum(sigma: f64, k: usize, noise: &NoisePath, tol: f64) -> Result<Vec<f64>> {
    let m = continuum_grid_for(noise)?;
    let matrix = build_continuum(sigma, noise, m)?;
    eigen_extreme(&matrix, k, Side::Smallest, tol)
}

/// The `k` smallest eigenvalues of `G` on `noise`, by bisection on the
/// Riccati blow-up count.
pub fn riccati_spectrum(
    sigma: f64,
    k: usize,
    noise: &NoisePath,
    tol: f64,
    policy: &RiccatiPolicy,
) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(domain_err!("requested 0 eigenvalues"));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(config_err!("tolerance must be positive, got {tol}"));
    }
    let count = |lambda: f64| -> Result<usize> {
        Ok(riccati_count(lambda, sigma, noise, policy)?.blowups)
    };
    // Outer bracket: count(lo) = 0 and count(hi) ≥ k.
    let mut lo = -1.0;
    while count(lo)? > 0 {
        lo *= 2.0;
        if lo < -1e12 {
            return Err(domain_err!("no lower bound for the spectrum found"));
        }
    }
    let mut hi = 16.0 * (k * k) as f64;
    while count(hi)? < k {
        hi *= 2.0;
        if hi > 1e14 {
            return Err(domain_err!("no upper bound for eigenvalue {k} found"));
        }
    }
    let mut out = Vec::with_capacity(k);
    let mut floor = lo;
    for index in 0..k {
        // smallest λ with count(λ) > index
        let (mut a, mut b) = (floor, hi);
        while b - a > tol {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if count(mid)? > index {
                b = mid;
            } else {
                a = mid;
            }
        }
        out.push(0.5 * (a + b));
        floor = a;
    }
    Ok(out)
}

/// Spectrum of `G` on an explicit noise path by the chosen method.
pub fn spectrum_on_path(
    sigma: f64,
    k: usize,
    method: SpectrumMethod,
    noise: &NoisePath,
    options: &ContinuumOptions,
) -> Result<Vec<f64>> {
    match method {
        SpectrumMethod::Discretize => discretized_spectrum(sigma, k, noise, options.tol),
        SpectrumMethod::Riccati => riccati_spectrum(sigma, k, noise, options.tol, &options.policy),
    }
}

/// Draws a noise path from `stream` and returns the `k` smallest eigenvalues
/// of `G` on it.
pub fn g_sigma_eigen_sample(
    sigma: f64,
    k: usize,
    method: SpectrumMethod,
    stream: RngStream,
    options: &ContinuumOptions,
) -> Result<ContinuumSpectrumSample> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(config_err!("sigma must be nonnegative, got {sigma}"));
    }
    let noise = continuum_noise(options.grid, stream)?;
    let lambdas = spectrum_on_path(sigma, k, method, &noise, options)?;
    Ok(ContinuumSpectrumSample {
        sigma,
        lambdas,
        method,
        noise_id: stream,
    })
}

/// Both methods on one noise path.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodComparison {
    pub discretize: Vec<f64>,
    pub riccati: Vec<f64>,
    pub max_discrepancy: f64,
    pub tolerance: f64,
}

impl MethodComparison {
    pub fn consistent(&self) -> bool {
        self.max_discrepancy <= self.tolerance
    }

    /// `Err(Inconsistent)` when the methods disagree beyond tolerance.
    pub fn into_checked(self) -> Result<Self> {
        if self.consistent() {
            Ok(self)
        } else {
            Err(Error::Inconsistent(alloc::format!(
                "discretize and riccati differ by {} (tolerance {})",
                self.max_discrepancy,
                self.tolerance
            )))
        }
    }
}

/// Runs both methods on the same noise path and reports the largest gap.
pub fn compare_methods(
    sigma: f64,
    k: usize,
    noise: &NoisePath,
    options: &ContinuumOptions,
    tolerance: f64,
) -> Result<MethodComparison> {
    let discretize = discretized_spectrum(sigma, k, noise, options.tol)?;
    let riccati = riccati_spectrum(sigma, k, noise, options.tol, &options.policy)?;
    let max_discrepancy = discretize
        .iter()
        .zip(&riccati)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(MethodComparison {
        discretize,
        riccati,
        max_discrepancy,
        tolerance,
    })
}

/// Default SAO box length.
pub const SAO_DEFAULT_LENGTH: f64 = 10.0;
/// Default SAO grid points per unit length.
pub const SAO_DEFAULT_M: usize = 400;

/// The `k` smallest eigenvalues of the discretized stochastic Airy operator
/// on `[0, L]`; `stream = None` gives the deterministic Airy operator.
pub fn sao_eigen_sample(
    beta: f64,
    k: usize,
    length: f64,
    m: usize,
    stream: Option<RngStream>,
) -> Result<Vec<f64>> {
    if m == 0 || !(length.is_finite() && length > 0.0) {
        return Err(config_err!("SAO needs L > 0 and m > 0"));
    }
    let size = (length * m as f64).floor() as usize;
    let noise = match stream {
        Some(s) if size > 0 => Some(brownian_path(size as f64 / m as f64, 1.0 / m as f64, s)?),
        _ => None,
    };
    let matrix = build_sao(beta, length, m, noise.as_ref())?;
    let tol = 1e-9 * matrix.norm_bound().max(1.0);
    eigen_extreme(&matrix, k, Side::Smallest, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailSide {
    /// `P(-Λ₀ > a) = P(Λ₀ < -a)`
    Right,
    /// `P(-Λ₀ < -a) = P(Λ₀ > a)`
    Left,
}

impl TailSide {
    pub fn name(&self) -> &'static str {
        match self {
            TailSide::Right => "right",
            TailSide::Left => "left",
        }
    }
}

impl core::str::FromStr for TailSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "right" => Ok(TailSide::Right),
            "left" => Ok(TailSide::Left),
            other => Err(config_err!("unknown tail side '{other}'")),
        }
    }
}

/// Binomial Monte Carlo estimate of a tail probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub a: f64,
    pub side: TailSide,
    pub estimate: f64,
    pub stderr: f64,
    pub successes: usize,
    pub replicas: usize,
    /// Upper end of a one-sided 95% interval; for zero successes this is
    /// `1 - 0.05^{1/R}`.
    pub ci_high: f64,
    /// Set when no success was observed.
    pub low_information: bool,
}

impl TailEstimate {
    pub fn from_counts(a: f64, side: TailSide, successes: usize, replicas: usize) -> Self {
        let r = replicas as f64;
        let p = successes as f64 / r;
        let stderr = (p * (1.0 - p) / r).sqrt();
        let ci_high = if successes == 0 {
            1.0 - 0.05f64.powf(1.0 / r)
        } else {
            (p + 1.645 * stderr).min(1.0)
        };
        Self {
            a,
            side,
            estimate: p,
            stderr,
            successes,
            replicas,
            ci_high,
            low_information: successes == 0,
        }
    }
}

/// Minimum replica count for tail estimates.
pub const TAIL_MIN_REPLICAS: usize = 100;

/// Whether the tail event at level `a` holds on one noise path.
pub fn tail_event(
    sigma: f64,
    a: f64,
    side: TailSide,
    noise: &NoisePath,
    policy: &RiccatiPolicy,
) -> Result<bool> {
    Ok(match side {
        TailSide::Right => riccati_count(-a, sigma, noise, policy)?.blowups >= 1,
        TailSide::Left => riccati_count(a, sigma, noise, policy)?.blowups == 0,
    })
}

/// Tail probabilities of `-Λ₀` at each level of `a_grid`, all evaluated on the
/// same `replicas` noise paths; replica `i` uses `stream.substream(i)`.
pub fn rso_tail_curve<E: Executor>(
    sigma: f64,
    a_grid: &[f64],
    side: TailSide,
    replicas: usize,
    grid: usize,
    stream: RngStream,
    exec: &E,
) -> Result<Vec<TailEstimate>> {
    if replicas < TAIL_MIN_REPLICAS {
        return Err(config_err!(
            "tail estimates need at least {TAIL_MIN_REPLICAS} replicas, got {replicas}"
        ));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(config_err!("sigma must be positive, got {sigma}"));
    }
    if a_grid.iter().any(|a| !a.is_finite()) {
        return Err(config_err!("tail levels must be finite"));
    }
    let policy = RiccatiPolicy::default();
    let hits: Vec<Result<Vec<bool>>> = exec.map(replicas, |i| {
        let noise = continuum_noise(grid, stream.substream(i as u64))?;
        a_grid
            .iter()
            .map(|&a| tail_event(sigma, a, side, &noise, &policy))
            .collect()
    });
    let mut successes = alloc::vec![0usize; a_grid.len()];
    for row in hits {
        for (s, hit) in successes.iter_mut().zip(row?) {
            *s += usize::from(hit);
        }
    }
    Ok(a_grid
        .iter()
        .zip(successes)
        .map(|(&a, s)| TailEstimate::from_counts(a, side, s, replicas))
        .collect())
}

/// Single-level form of [`rso_tail_curve`].
pub fn rso_tail_probability<E: Executor>(
    sigma: f64,
    a: f64,
    side: TailSide,
    replicas: usize,
    grid: usize,
    stream: RngStream,
    exec: &E,
) -> Result<TailEstimate> {
    Ok(rso_tail_curve(sigma, &[a], side, replicas, grid, stream, exec)?[0])
}
