//! Edge rescaling, Laplace sums, Kolmogorov-Smirnov distances and tail fits.
//!
//! Sign convention: batches built from matrix spectra hold the `Λ`-side values
//! `n^c (center - λ)`, which approximate the eigenvalues of the continuum
//! operator. The Laplace-transform side uses `η = -Λ`; [`etas_from_lambdas`]
//! is the single place that conversion happens.

use alloc::string::String;
use alloc::vec::Vec;

use rand::distr::Distribution;
use rand_distr::Binomial;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{config_err, Error, Result};
use crate::rng::RngStream;

/// Rescaled edge samples with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSampleBatch {
    pub values: Vec<f64>,
    pub n: usize,
    pub exponent_c: f64,
    pub center: f64,
    pub sign: f64,
    pub ensemble_tag: String,
    pub root_seed: u64,
}

impl EdgeSampleBatch {
    pub fn new(
        values: Vec<f64>,
        n: usize,
        exponent_c: f64,
        ensemble_tag: &str,
        root_seed: u64,
    ) -> Result<Self> {
        if ensemble_tag.is_empty() {
            return Err(config_err!("ensemble tag must be nonempty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("batch has non-finite values".into()));
        }
        Ok(Self {
            values,
            n,
            exponent_c,
            center: 2.0,
            sign: 1.0,
            ensemble_tag: ensemble_tag.into(),
            root_seed,
        })
    }

    /// Rescales raw eigenvalues with [`rescale_edge`].
    pub fn from_eigenvalues(
        eigs: &[f64],
        n: usize,
        exponent_c: f64,
        center: f64,
        sign: f64,
        ensemble_tag: &str,
        root_seed: u64,
    ) -> Result<Self> {
        let mut batch = Self::new(
            rescale_edge(eigs, n, exponent_c, center, sign)?,
            n,
            exponent_c,
            ensemble_tag,
            root_seed,
        )?;
        batch.center = center;
        batch.sign = sign;
        Ok(batch)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `sign · n^c · (center - λ)` for each eigenvalue.
pub fn rescale_edge(eigs: &[f64], n: usize, c: f64, center: f64, sign: f64) -> Result<Vec<f64>> {
    if eigs.is_empty() {
        return Err(config_err!("no eigenvalues to rescale"));
    }
    if sign != 1.0 && sign != -1.0 {
        return Err(config_err!("sign must be +1 or -1, got {sign}"));
    }
    let scale = (n as f64).powf(c);
    Ok(eigs.iter().map(|l| sign * scale * (center - l)).collect())
}

/// Inverse of [`rescale_edge`].
pub fn unscale_edge(values: &[f64], n: usize, c: f64, center: f64, sign: f64) -> Vec<f64> {
    let scale = (n as f64).powf(c);
    values.iter().map(|v| center - sign * v / scale).collect()
}

/// `η = -Λ`.
pub fn etas_from_lambdas(lambdas: &[f64]) -> Vec<f64> {
    lambdas.iter().map(|l| -l).collect()
}

/// `ln Σ_i e^{T η_i / 2}`, shifted by the largest exponent.
pub fn log_laplace_sum(etas: &[f64], t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(config_err!("time must be positive, got {t}"));
    }
    if etas.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    let max = etas
        .iter()
        .map(|e| 0.5 * t * e)
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Ok(max);
    }
    let sum: f64 = etas.iter().map(|e| (0.5 * t * e - max).exp()).sum();
    Ok(max + sum.ln())
}

/// `Σ_i e^{T η_i / 2}`.
pub fn laplace_sum(etas: &[f64], t: f64) -> Result<f64> {
    Ok(log_laplace_sum(etas, t)?.exp())
}

/// Trace of the averaged matrix power `½[(H/2)^k + (H/2)^{k-1}]`, `k = ⌊T n²⌋`,
/// from the eigenvalues of `H`; powers are taken in the log domain.
pub fn power_trace(eigs: &[f64], n: usize, t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(config_err!("time must be positive, got {t}"));
    }
    let k = (t * (n as f64) * (n as f64)).floor() as i32;
    if k < 1 {
        return Err(config_err!("T n² must be at least 1"));
    }
    let power = |s: f64, k: i32| -> f64 {
        if k == 0 {
            return 1.0;
        }
        let mag = (k as f64 * s.abs().ln()).exp();
        if s < 0.0 && k % 2 == 1 {
            -mag
        } else {
            mag
        }
    };
    let total = eigs
        .iter()
        .map(|&l| 0.5 * (power(0.5 * l, k) + power(0.5 * l, k - 1)))
        .sum();
    Ok(total)
}

/// Two-sample Kolmogorov-Smirnov statistic `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(config_err!("KS distance needs two nonempty samples"));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::Domain("KS samples contain NaN".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(best)
}

/// One tail-probability estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPoint {
    pub a: f64,
    pub p: f64,
    /// Number of Monte Carlo paths behind `p`, if it is an estimate.
    pub replicas: Option<usize>,
}

/// Fit of `-ln p(a) ≈ coefficient · a^exponent + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailFit {
    pub exponent: f64,
    pub coefficient: f64,
    pub intercept: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub a_grid: Vec<f64>,
    /// `p` is nonincreasing along the sorted grid.
    pub monotone: bool,
}

/// Bootstrap replicates used by [`tail_fit`].
pub const TAIL_BOOTSTRAP: usize = 2000;

fn weighted_line(points: &[(f64, f64, f64)]) -> Option<(f64, f64)> {
    let sw: f64 = points.iter().map(|p| p.2).sum();
    if points.len() < 2 || sw.partial_cmp(&0.0) != Some(core::cmp::Ordering::Greater) {
        return None;
    }
    let mx = points.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = points.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = points.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Regression rows `(a^exponent, -ln p, weight)` from points with `p > 0`;
/// weights are inverse delta-method variances `R p / (1 - p + 1/R)`.
fn regression_rows(points: &[TailPoint], exponent: f64) -> Vec<(f64, f64, f64)> {
    points
        .iter()
        .filter(|q| q.p > 0.0)
        .map(|q| {
            let w = match q.replicas {
                Some(r) => {
                    let r = r as f64;
                    r * q.p / (1.0 - q.p + 1.0 / r)
                }
                None => 1.0,
            };
            (q.a.powf(exponent), -q.p.ln(), w)
        })
        .collect()
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Weighted least squares of `-ln p` against `a^exponent` with an intercept.
///
/// When every point carries a replica count the interval comes from a
/// parametric bootstrap (binomial resampling of each point, replicate `b`
/// drawn from `stream.substream(b)`); otherwise from the regression standard
/// error. The interval always contains the point estimate.
pub fn tail_fit(points: &[TailPoint], exponent: f64, stream: RngStream) -> Result<TailFit> {
    if !(exponent.is_finite() && exponent > 0.0) {
        return Err(config_err!("exponent must be positive, got {exponent}"));
    }
    if points.iter().any(|q| !(q.a.is_finite() && q.a >= 0.0 && (0.0..=1.0).contains(&q.p))) {
        return Err(Error::Fit("tail points need a >= 0 and p in [0, 1]".into()));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|x, y| x.a.total_cmp(&y.a));
    let rows = regression_rows(&sorted, exponent);
    if rows.len() < 3 {
        return Err(Error::Fit(alloc::format!(
            "need at least 3 points with nonzero probability, got {}",
            rows.len()
        )));
    }
    let (coefficient, intercept) =
        weighted_line(&rows).ok_or_else(|| Error::Fit("degenerate tail grid".into()))?;
    let monotone = sorted.windows(2).all(|w| w[1].p <= w[0].p);

    let all_counted = sorted.iter().all(|q| q.replicas.is_some());
    let (mut ci_low, mut ci_high) = if all_counted {
        let mut slopes = Vec::with_capacity(TAIL_BOOTSTRAP);
        for b in 0..TAIL_BOOTSTRAP {
            let mut rng = stream.substream(b as u64).rng();
            let resampled: Vec<TailPoint> = sorted
                .iter()
                .map(|q| {
                    let r = q.replicas.unwrap_or(0);
                    let k = Binomial::new(r as u64, q.p).map(|d| d.sample(&mut rng)).unwrap_or(0);
                    TailPoint {
                        a: q.a,
                        p: k as f64 / r as f64,
                        replicas: q.replicas,
                    }
                })
                .collect();
            let rows = regression_rows(&resampled, exponent);
            if rows.len() >= 3 {
                if let Some((s, _)) = weighted_line(&rows) {
                    slopes.push(s);
                }
            }
        }
        if slopes.is_empty() {
            (coefficient, coefficient)
        } else {
            slopes.sort_by(f64::total_cmp);
            (percentile(&slopes, 0.025), percentile(&slopes, 0.975))
        }
    } else {
        let sw: f64 = rows.iter().map(|p| p.2).sum();
        let mx = rows.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
        let sxx: f64 = rows.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
        let rss: f64 = rows
            .iter()
            .map(|p| p.2 * (p.1 - coefficient * p.0 - intercept).powi(2))
            .sum();
        let dof = (rows.len() - 2) as f64;
        let se = (rss / dof / sxx).sqrt();
        (coefficient - 1.96 * se, coefficient + 1.96 * se)
    };
    ci_low = ci_low.min(coefficient);
    ci_high = ci_high.max(coefficient);
    Ok(TailFit {
        exponent,
        coefficient,
        intercept,
        ci_low,
        ci_high,
        a_grid: sorted.iter().map(|q| q.a).collect(),
        monotone,
    })
}
