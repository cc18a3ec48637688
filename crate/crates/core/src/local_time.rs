//! Occupation densities of walks and sampled paths.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{config_err, domain_err, Result};
use crate::paths::BridgePath;
use crate::rng::RngStream;
use crate::special::{hypergeometric_quantile, normal_quantile};

/// Occupation density of a path on the level grid `first_bin·h, (first_bin+1)·h, …`.
///
/// `values[i]` is the time spent in the bin of width `level_step` centred at
/// `levels[i]`, divided by `level_step`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeProfile {
    pub level_step: f64,
    pub first_bin: i64,
    pub levels: Vec<f64>,
    pub values: Vec<f64>,
    pub total_time: f64,
}

impl LocalTimeProfile {
    /// Bins points carrying time weights.
    pub fn from_weighted_points<I>(points: I, level_step: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)> + Clone,
    {
        if !(level_step.is_finite() && level_step > 0.0) {
            return Err(domain_err!("level step must be positive, got {level_step}"));
        }
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for (x, _) in points.clone() {
            if !x.is_finite() {
                return Err(domain_err!("path has non-finite positions"));
            }
            let b = (x / level_step).round() as i64;
            lo = lo.min(b);
            hi = hi.max(b);
        }
        if lo > hi {
            return Err(domain_err!("empty path"));
        }
        let mut time = vec![0.0; (hi - lo + 1) as usize];
        let mut total_time = 0.0;
        for (x, w) in points {
            let b = (x / level_step).round() as i64;
            time[(b - lo) as usize] += w;
            total_time += w;
        }
        Ok(Self {
            level_step,
            first_bin: lo,
            levels: (lo..=hi).map(|b| b as f64 * level_step).collect(),
            values: time.into_iter().map(|t| t / level_step).collect(),
            total_time,
        })
    }

    /// Local time at `level` (zero outside the profile).
    pub fn at(&self, level: f64) -> f64 {
        let b = (level / self.level_step).round() as i64 - self.first_bin;
        if b < 0 {
            return 0.0;
        }
        self.values.get(b as usize).copied().unwrap_or(0.0)
    }

    /// `|level_step · Σ values - total_time|`.
    pub fn occupation_defect(&self) -> f64 {
        (self.level_step * self.values.iter().sum::<f64>() - self.total_time).abs()
    }

    /// Occupation identity with the tolerance `level_step · max(values)`.
    pub fn occupation_holds(&self) -> bool {
        let max = self.values.iter().copied().fold(0.0, f64::max);
        self.occupation_defect() <= self.level_step * max
    }

    /// `sup_level |L - L'|` over the union of both level sets; the level
    /// steps must agree.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        if (self.level_step / other.level_step - 1.0).abs() > 1e-12 {
            return Err(config_err!("profiles use different level steps"));
        }
        let lo = self.first_bin.min(other.first_bin);
        let hi = (self.first_bin + self.values.len() as i64)
            .max(other.first_bin + other.values.len() as i64);
        let get = |p: &Self, b: i64| {
            let i = b - p.first_bin;
            if i < 0 {
                0.0
            } else {
                p.values.get(i as usize).copied().unwrap_or(0.0)
            }
        };
        Ok((lo..hi)
            .map(|b| (get(self, b) - get(other, b)).abs())
            .fold(0.0, f64::max))
    }
}

/// Input to [`local_time_profile`].
#[derive(Debug, Clone, Copy)]
pub enum PathSample<'a> {
    /// A walk observed every `n^{-2}` at positions `z/n`; each observation
    /// carries time `n^{-2}`.
    Walk(&'a BridgePath),
    /// A continuous path sampled every `dt`; the trapezoid rule assigns `dt/2`
    /// to each endpoint.
    Sampled { values: &'a [f64], dt: f64 },
}

/// Occupation density of a path with bins of width `level_step`.
///
/// For a walk with `level_step = 1/n` this is `n^{-1}` times the visit count
/// of each site.
pub fn local_time_profile(path: PathSample<'_>, level_step: f64) -> Result<LocalTimeProfile> {
    match path {
        PathSample::Walk(walk) => {
            if walk.n == 0 {
                return Err(domain_err!("walk scale n must be positive"));
            }
            let scale = 1.0 / walk.n as f64;
            let weight = scale * scale;
            LocalTimeProfile::from_weighted_points(
                walk.positions.iter().map(move |&z| (z as f64 * scale, weight)),
                level_step,
            )
        }
        PathSample::Sampled { values, dt } => {
            if values.is_empty() {
                return Err(domain_err!("empty path"));
            }
            if !(dt.is_finite() && dt > 0.0) {
                return Err(domain_err!("time step must be positive, got {dt}"));
            }
            let last = values.len() - 1;
            LocalTimeProfile::from_weighted_points(
                values.iter().enumerate().map(move |(i, &x)| {
                    let w = if last == 0 {
                        0.0
                    } else if i == 0 || i == last {
                        0.5 * dt
                    } else {
                        dt
                    };
                    (x, w)
                }),
                level_step,
            )
        }
    }
}

/// A walk bridge and a Brownian bridge built from the same uniforms.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledBridges {
    pub walk: BridgePath,
    /// Brownian bridge at times `k n^{-2}`, in spatial units (already divided by `n`).
    pub brownian: Vec<f64>,
}

/// Couples a simple-walk bridge `0 → 0` of `steps` steps with a Brownian
/// bridge by dyadic quantile matching.
///
/// Each dyadic midpoint is filled from one uniform `u`: the walk gets the
/// `u`-quantile of its (hypergeometric) up-step count on the left half, the
/// Brownian path the `u`-quantile of its Gaussian conditional law. Both
/// marginals are exact; the two paths stay within `O(log steps)` lattice
/// units of each other.
pub fn coupled_bridges(n: usize, steps: usize, stream: RngStream) -> Result<CoupledBridges> {
    if n == 0 {
        return Err(config_err!("walk scale n must be positive"));
    }
    if !steps.is_multiple_of(2) {
        return Err(domain_err!("a bridge 0 -> 0 needs an even number of steps, got {steps}"));
    }
    let mut rng = stream.rng();
    let mut walk = vec![0i64; steps + 1];
    let mut brown = vec![0.0f64; steps + 1];
    let mut stack = vec![(0usize, steps)];
    while let Some((i, j)) = stack.pop() {
        if j - i < 2 {
            continue;
        }
        let k = i + (j - i) / 2;
        let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
        let r = (j - i) as u64;
        let ups = ((r as i64 + walk[j] - walk[i]) / 2) as u64;
        let left = (k - i) as u64;
        let left_ups = hypergeometric_quantile(r, ups, left, u) as i64;
        walk[k] = walk[i] + 2 * left_ups - left as i64;

        let (a, b) = ((k - i) as f64, (j - k) as f64);
        let mean = brown[i] + (brown[j] - brown[i]) * a / (a + b);
        let sd = (a * b / (a + b)).sqrt();
        brown[k] = mean + sd * normal_quantile(u);
        stack.push((k, j));
        stack.push((i, k));
    }
    let scale = 1.0 / n as f64;
    Ok(CoupledBridges {
        walk: BridgePath {
            n,
            positions: walk,
            confined: false,
        },
        brownian: brown.into_iter().map(|x| x * scale).collect(),
    })
}

/// Sup-level distance between the walk and Brownian local times of a
/// coupled pair, both binned at `1/n`.
pub fn coupled_local_time_gap(pair: &CoupledBridges) -> Result<f64> {
    let n = pair.walk.n as f64;
    let step = 1.0 / n;
    let walk = local_time_profile(PathSample::Walk(&pair.walk), step)?;
    let brown = local_time_profile(
        PathSample::Sampled {
            values: &pair.brownian,
            dt: step * step,
        },
        step,
    )?;
    walk.sup_distance(&brown)
}
