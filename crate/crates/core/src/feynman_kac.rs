//! Monte Carlo estimators for the semigroup `e^{-(T/2)G}` built from confined
//! Brownian bridges and their local times against a quenched noise `W`.
//!
//! The kernel is
//!
//! ```text
//! K(x, y; T) = p_T(x, y) · E[ 1{B stays in [0, 1]} · exp((σ/2) ∫ L_a(B) dW(a)) ]
//! ```
//!
//! over Brownian bridges `B` from `x` to `y` on `[0, T]`, with `p_T` the
//! Gaussian transition density.
//!
//! Two choices keep the estimator close to unbiased at a coarse time grid:
//!
//! - confinement between grid points is handled by the exact single-barrier
//!   crossing probability of a bridge step, applied to both walls;
//! - `∫ L_a dW(a) = ∫ W'(B_t) dt` is evaluated through Itô's formula for the
//!   antiderivative `F` of the piecewise-linear `W`:
//!   `∫ W'(B_t) dt = 2 (F(B_T) - F(B_0) - ∫ W(B_t) dB_t)`, with the Itô sum
//!   taken on the bridge grid. Unlike level binning, this stays accurate when
//!   a bridge step spans many noise cells.

use alloc::vec::Vec;

use rand::Rng;

#[allow(unused_imports)]
use num_traits::Float;

use crate::edge_stats::laplace_sum;
use crate::eigen::{default_tol, eigen_all};
use crate::error::{config_err, domain_err, Result};
use crate::exec::Executor;
use crate::operators::{build_hn, OperatorConfig};
use crate::paths::{bridge_step, partial_sum_noise, NoisePath};
use crate::rng::{sample_potential, PotentialSpec, RngStream};
use crate::special::{bridge_confinement_probability, gaussian_kernel, theta_series};

/// Time discretization of the bridges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeOptions {
    /// Grid steps per bridge on `[0, T]`.
    pub steps: usize,
    /// Weight each step by the probability that the bridge did not touch a
    /// wall between grid points; without it only grid points are checked.
    pub crossing_correction: bool,
    /// Use the `σ = 0` survival weight, whose mean is known in closed form,
    /// as a control variate.
    pub control_variate: bool,
}

impl Default for BridgeOptions {
    fn default() -> Self {
        Self {
            steps: 2048,
            crossing_correction: true,
            control_variate: false,
        }
    }
}

impl BridgeOptions {
    fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(config_err!("bridges need at least one step"));
        }
        Ok(())
    }
}

/// `x ↦ ∫₀ˣ W` for a piecewise-linear `W`, precomputed at grid points.
struct NoiseAntiderivative<'a> {
    noise: &'a NoisePath,
    cumulative: Vec<f64>,
}

impl<'a> NoiseAntiderivative<'a> {
    fn new(noise: &'a NoisePath) -> Self {
        let h = noise.grid_step();
        let values = noise.values();
        let mut cumulative = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            cumulative.push(acc);
        }
        Self { noise, cumulative }
    }

    #[inline]
    fn eval(&self, x: f64) -> f64 {
        let h = self.noise.grid_step();
        let values = self.noise.values();
        let last = values.len() - 2;
        let k = ((x / h).max(0.0) as usize).min(last);
        let s = x - k as f64 * h;
        self.cumulative[k] + s * values[k] + 0.5 * s * s / h * (values[k + 1] - values[k])
    }
}

/// One bridge: returns `(survival, survival · exp(σ/2 ∫ L dW))`.
#[allow(clippy::too_many_arguments)]
fn bridge_weight<R: Rng + ?Sized>(
    x: f64,
    y: f64,
    t: f64,
    sigma: f64,
    antiderivative: &NoiseAntiderivative<'_>,
    options: &BridgeOptions,
    rng: &mut R,
) -> (f64, f64) {
    let steps = options.steps;
    let dt = t / steps as f64;
    let mut survival = 1.0;
    let mut ito = 0.0;
    let mut b = x;
    for i in 0..steps {
        let remaining = (steps - i) as f64 * dt;
        let next = bridge_step(b, y, remaining, dt, rng);
        if !(0.0..=1.0).contains(&next) {
            return (0.0, 0.0);
        }
        if options.crossing_correction {
            let lower = 1.0 - (-2.0 * b * next / dt).exp();
            let upper = 1.0 - (-2.0 * (1.0 - b) * (1.0 - next) / dt).exp();
            survival *= lower * upper;
            if survival == 0.0 {
                return (0.0, 0.0);
            }
        }
        if sigma != 0.0 {
            ito += antiderivative.noise.value_at(b) * (next - b);
        }
        b = next;
    }
    if sigma == 0.0 {
        return (survival, survival);
    }
    let integral = 2.0 * (antiderivative.eval(y) - antiderivative.eval(x) - ito);
    (survival, survival * (0.5 * sigma * integral).exp())
}

/// Monte Carlo value of `K(x, y; T)` on one noise path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEstimate {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub value: f64,
    pub stderr: f64,
    pub replicas: usize,
    /// Stream the bridges were drawn from.
    pub stream: RngStream,
}

fn check_kernel_inputs(x: f64, y: f64, t: f64, sigma: f64, noise: &NoisePath) -> Result<()> {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(domain_err!("kernel endpoints must lie in [0, 1], got ({x}, {y})"));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(config_err!("time must be positive, got {t}"));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(config_err!("sigma must be nonnegative, got {sigma}"));
    }
    noise.unit_cells()?;
    Ok(())
}

/// Mean and standard error of `weights`, or of the control-variate corrected
/// estimator `w - β (s - E s)` when `cv_mean` is given.
fn summarize(samples: &[(f64, f64)], cv_mean: Option<f64>) -> (f64, f64) {
    let r = samples.len() as f64;
    let mean_w = samples.iter().map(|s| s.1).sum::<f64>() / r;
    let var_w = if samples.len() > 1 {
        samples.iter().map(|s| (s.1 - mean_w).powi(2)).sum::<f64>() / (r - 1.0)
    } else {
        0.0
    };
    let Some(mu) = cv_mean else {
        return (mean_w, (var_w / r).sqrt());
    };
    if samples.len() < 3 {
        return (mean_w, (var_w / r).sqrt());
    }
    let mean_s = samples.iter().map(|s| s.0).sum::<f64>() / r;
    let (mut cov, mut var_s) = (0.0, 0.0);
    for &(s, w) in samples {
        cov += (s - mean_s) * (w - mean_w);
        var_s += (s - mean_s) * (s - mean_s);
    }
    if var_s == 0.0 {
        return (mean_w, (var_w / r).sqrt());
    }
    let beta = cov / var_s;
    let corrected = mean_w - beta * (mean_s - mu);
    let resid = samples
        .iter()
        .map(|&(s, w)| (w - mean_w - beta * (s - mean_s)).powi(2))
        .sum::<f64>()
        / (r - 2.0);
    (corrected, (resid / r).sqrt())
}

/// Estimates `K(x, y; T)` from `replicas` bridges; bridge `i` uses
/// `stream.substream(i)`.
#[allow(clippy::too_many_arguments)]
pub fn kernel_estimate<E: Executor>(
    x: f64,
    y: f64,
    t: f64,
    sigma: f64,
    noise: &NoisePath,
    replicas: usize,
    options: &BridgeOptions,
    stream: RngStream,
    exec: &E,
) -> Result<KernelEstimate> {
    check_kernel_inputs(x, y, t, sigma, noise)?;
    options.validate()?;
    if replicas == 0 {
        return Err(config_err!("kernel estimate needs at least one replica"));
    }
    let anti = NoiseAntiderivative::new(noise);
    let samples = exec.map(replicas, |i| {
        let mut rng = stream.substream(i as u64).rng();
        bridge_weight(x, y, t, sigma, &anti, options, &mut rng)
    });
    let cv = options
        .control_variate
        .then(|| bridge_confinement_probability(x, y, t));
    let (mean, se) = summarize(&samples, cv);
    let density = gaussian_kernel(x, y, t);
    Ok(KernelEstimate {
        x,
        y,
        t,
        value: density * mean,
        stderr: density * se,
        replicas,
        stream,
    })
}

/// Trace estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// `∫₀¹ K(x, x; T) dx` by the midpoint rule on `x_grid` points, each
/// estimated from `replicas` bridges; point `j` uses `stream.substream(j)`.
#[allow(clippy::too_many_arguments)]
pub fn trace_estimate<E: Executor>(
    t: f64,
    sigma: f64,
    noise: &NoisePath,
    x_grid: usize,
    replicas: usize,
    options: &BridgeOptions,
    stream: RngStream,
    exec: &E,
) -> Result<TraceEstimate> {
    if x_grid == 0 || replicas == 0 {
        return Err(config_err!("trace estimate needs x_grid > 0 and replicas > 0"));
    }
    check_kernel_inputs(0.5, 0.5, t, sigma, noise)?;
    options.validate()?;
    let anti = NoiseAntiderivative::new(noise);
    let h = 1.0 / x_grid as f64;
    // one flat fan-out over (point, replica) so small grids still parallelize
    let samples = exec.map(x_grid * replicas, |idx| {
        let (j, i) = (idx / replicas, idx % replicas);
        let x = (j as f64 + 0.5) * h;
        let mut rng = stream.substream(j as u64).substream(i as u64).rng();
        bridge_weight(x, x, t, sigma, &anti, options, &mut rng)
    });
    let mut value = 0.0;
    let mut var = 0.0;
    for (j, chunk) in samples.chunks(replicas).enumerate() {
        let x = (j as f64 + 0.5) * h;
        let cv = options
            .control_variate
            .then(|| bridge_confinement_probability(x, x, t));
        let (mean, se) = summarize(chunk, cv);
        let density = gaussian_kernel(x, x, t);
        value += h * density * mean;
        var += (h * density * se).powi(2);
    }
    Ok(TraceEstimate {
        value,
        stderr: var.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaCheck {
    pub t: f64,
    /// `Σ_j e^{-(T/2)π²j²}`
    pub lhs: f64,
    /// `(2πT)^{-1/2} ∫₀¹ P(bridge x → x stays in [0, 1]) dx`
    pub rhs: f64,
    pub stderr: f64,
}

impl ThetaCheck {
    pub fn within(&self, sigmas: f64) -> bool {
        (self.lhs - self.rhs).abs() < sigmas * self.stderr
    }
}

/// Compares the theta series with a Monte Carlo of the free bridge survival
/// probability at uniform starting points; replica `i` draws its start and
/// its bridge from `stream.substream(i)`.
pub fn theta_check<E: Executor>(
    t: f64,
    replicas: usize,
    options: &BridgeOptions,
    stream: RngStream,
    exec: &E,
) -> Result<ThetaCheck> {
    if !(t.is_finite() && t > 0.0) {
        return Err(config_err!("time must be positive, got {t}"));
    }
    if replicas < 2 {
        return Err(config_err!("theta check needs at least two replicas"));
    }
    options.validate()?;
    let zero = NoisePath::zero(1.0, 1.0)?;
    let anti = NoiseAntiderivative::new(&zero);
    let plain = BridgeOptions {
        control_variate: false,
        ..*options
    };
    let samples = exec.map(replicas, |i| {
        let mut rng = stream.substream(i as u64).rng();
        let x: f64 = rng.random();
        bridge_weight(x, x, t, 0.0, &anti, &plain, &mut rng)
    });
    let (mean, se) = summarize(&samples, None);
    let scale = 1.0 / (2.0 * core::f64::consts::PI * t).sqrt();
    Ok(ThetaCheck {
        t,
        lhs: theta_series(t),
        rhs: scale * mean,
        stderr: scale * se,
    })
}

/// Settings of [`pathwise_coupling_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingOptions {
    pub x_grid: usize,
    pub replicas: usize,
    pub bridge: BridgeOptions,
}

impl Default for CouplingOptions {
    fn default() -> Self {
        Self {
            x_grid: 32,
            replicas: 256,
            bridge: BridgeOptions::default(),
        }
    }
}

/// Matrix side against semigroup side on one potential draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingReport {
    pub n: usize,
    pub sigma: f64,
    pub t: f64,
    /// `Σ_i e^{T η_i / 2}` with `η_i = n²(λ_i - 2)` over the spectrum of `H_n`.
    pub eigen_sum: f64,
    pub trace: f64,
    pub trace_stderr: f64,
    pub stream: RngStream,
}

impl CouplingReport {
    pub fn discrepancy(&self) -> f64 {
        (self.eigen_sum - self.trace).abs()
    }
}

/// Minimum matrix size for the coupling check.
pub const COUPLING_MIN_N: usize = 500;

/// Draws one potential from `stream.substream(0)`, sums `e^{Tη/2}` over the
/// full spectrum of `H_n` (with `α = 3/2`), and estimates the trace of the
/// semigroup on the partial-sum path of the same draw with bridges from
/// `stream.substream(1)`.
#[allow(clippy::too_many_arguments)]
pub fn pathwise_coupling_check<E: Executor>(
    n: usize,
    sigma: f64,
    t: f64,
    spec: &PotentialSpec,
    options: &CouplingOptions,
    stream: RngStream,
    exec: &E,
) -> Result<CouplingReport> {
    if n < COUPLING_MIN_N {
        return Err(config_err!("coupling check needs n >= {COUPLING_MIN_N}, got {n}"));
    }
    let spec = PotentialSpec::critical(spec.family, sigma)?;
    let draws = sample_potential(&spec, n, stream.substream(0))?;
    let matrix = build_hn(&OperatorConfig::new(n, spec), &draws)?;
    let eigs = eigen_all(&matrix, default_tol(&matrix) * 1e-2)?;
    let n2 = (n as f64) * (n as f64);
    let etas: Vec<f64> = eigs.iter().map(|l| n2 * (l - 2.0)).collect();
    let eigen_sum = laplace_sum(&etas, t)?;
    let noise = partial_sum_noise(&draws, n)?;
    let trace = trace_estimate(
        t,
        sigma,
        &noise,
        options.x_grid,
        options.replicas,
        &options.bridge,
        stream.substream(1),
        exec,
    )?;
    Ok(CouplingReport {
        n,
        sigma,
        t,
        eigen_sum,
        trace: trace.value,
        trace_stderr: trace.stderr,
        stream,
    })
}
