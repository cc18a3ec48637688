//! Brownian and random-walk path samplers.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{config_err, domain_err, Result};
use crate::rng::{standard_normal, RngStream};

/// Number of grid cells of width `step` in `[0, horizon]`; the step must
/// divide the horizon up to rounding.
pub fn grid_cells(horizon: f64, step: f64) -> Result<usize> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(config_err!("horizon must be positive, got {horizon}"));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(config_err!("grid step must be positive, got {step}"));
    }
    let ratio = horizon / step;
    let cells = ratio.round();
    if cells < 1.0 || (ratio - cells).abs() > 1e-9 * ratio.max(1.0) {
        return Err(config_err!("grid step {step} does not divide horizon {horizon}"));
    }
    Ok(cells as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseOrigin {
    Brownian,
    PartialSum,
    Zero,
}

/// A quenched noise path `W` sampled on a uniform grid starting at `W(0) = 0`.
///
/// Between grid points the path is taken to be linear, so `W'` is constant on
/// each cell. Every consumer (matrix builders, the Riccati flow, the bridge
/// functionals) reads the path through that single convention.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    grid_step: f64,
    values: Vec<f64>,
    origin: NoiseOrigin,
}

impl NoisePath {
    pub fn from_values(grid_step: f64, values: Vec<f64>, origin: NoiseOrigin) -> Result<Self> {
        if !(grid_step.is_finite() && grid_step > 0.0) {
            return Err(config_err!("grid step must be positive, got {grid_step}"));
        }
        if values.len() < 2 {
            return Err(config_err!("noise path needs at least two grid values"));
        }
        if values[0] != 0.0 {
            return Err(config_err!("noise path must start at 0"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(domain_err!("noise path has non-finite values"));
        }
        Ok(Self {
            grid_step,
            values,
            origin,
        })
    }

    /// The identically zero path on `[0, horizon]`.
    pub fn zero(horizon: f64, grid_step: f64) -> Result<Self> {
        let cells = grid_cells(horizon, grid_step)?;
        Ok(Self {
            grid_step: horizon / cells as f64,
            values: vec![0.0; cells + 1],
            origin: NoiseOrigin::Zero,
        })
    }

    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn origin(&self) -> NoiseOrigin {
        self.origin
    }

    pub fn cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.cells() as f64 * self.grid_step
    }

    /// `W((k+1)Δa) - W(kΔa)`.
    #[inline]
    pub fn increment(&self, k: usize) -> f64 {
        self.values[k + 1] - self.values[k]
    }

    /// Piecewise-linear interpolation of `W`, clamped to the sampled range.
    #[inline]
    pub fn value_at(&self, x: f64) -> f64 {
        let s = (x / self.grid_step).max(0.0);
        let last = self.cells();
        let k = (s as usize).min(last - 1);
        let frac = (s - k as f64).min(1.0);
        self.values[k] + frac * (self.values[k + 1] - self.values[k])
    }

    /// Number of cells covering `[0, 1]`; fails unless the grid divides 1
    /// and the path reaches it.
    pub fn unit_cells(&self) -> Result<usize> {
        let cells = grid_cells(1.0, self.grid_step)?;
        if cells > self.cells() {
            return Err(config_err!(
                "noise path covers [0, {}], need [0, 1]",
                self.horizon()
            ));
        }
        Ok(cells)
    }

    /// Aggregates increments so that the grid step becomes `factor` times larger.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.cells().is_multiple_of(factor) {
            return Err(config_err!(
                "cannot coarsen {} cells by a factor {factor}",
                self.cells()
            ));
        }
        Ok(Self {
            grid_step: self.grid_step * factor as f64,
            values: self.values.iter().step_by(factor).copied().collect(),
            origin: self.origin,
        })
    }
}

/// Standard Brownian motion on `[0, horizon]` sampled every `grid_step`.
pub fn brownian_path(horizon: f64, grid_step: f64, stream: RngStream) -> Result<NoisePath> {
    let cells = grid_cells(horizon, grid_step)?;
    let step = horizon / cells as f64;
    let scale = step.sqrt();
    let mut rng = stream.rng();
    let mut values = Vec::with_capacity(cells + 1);
    let mut w = 0.0;
    values.push(w);
    for _ in 0..cells {
        w += scale * standard_normal(&mut rng);
        values.push(w);
    }
    Ok(NoisePath {
        grid_step: step,
        values,
        origin: NoiseOrigin::Brownian,
    })
}

/// The partial-sum path `W(k/n) = n^{-1/2} Σ_{l ≤ k} 𝔞(l)` built from a
/// recorded potential draw.
pub fn partial_sum_noise(draws: &[f64], n: usize) -> Result<NoisePath> {
    if n == 0 || draws.len() != n {
        return Err(config_err!(
            "partial sums need exactly n = {n} draws, got {}",
            draws.len()
        ));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let mut values = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    values.push(0.0);
    for &a in draws {
        acc += a;
        values.push(scale * acc);
    }
    NoisePath::from_values(1.0 / n as f64, values, NoiseOrigin::PartialSum)
}

/// Position of a Brownian bridge pinned at `end` at the final time, advanced
/// by `dt` from `current` with `remaining` time left.
#[inline]
pub(crate) fn bridge_step<R: Rng + ?Sized>(
    current: f64,
    end: f64,
    remaining: f64,
    dt: f64,
    rng: &mut R,
) -> f64 {
    if remaining <= dt * (1.0 + 1e-12) {
        return end;
    }
    let mean = current + (end - current) * dt / remaining;
    let var = dt * (remaining - dt) / remaining;
    mean + var.sqrt() * standard_normal(rng)
}

/// Brownian bridge from `x` at time 0 to `y` at time `horizon`, sampled every
/// `grid_step` by exact sequential conditioning.
pub fn brownian_bridge(
    x: f64,
    y: f64,
    horizon: f64,
    grid_step: f64,
    stream: RngStream,
) -> Result<Vec<f64>> {
    let cells = grid_cells(horizon, grid_step)?;
    let dt = horizon / cells as f64;
    let mut rng = stream.rng();
    let mut out = Vec::with_capacity(cells + 1);
    let mut b = x;
    out.push(b);
    for i in 0..cells {
        let remaining = (cells - i) as f64 * dt;
        b = bridge_step(b, y, remaining, dt, &mut rng);
        out.push(b);
    }
    Ok(out)
}

/// A nearest-neighbour walk on ℤ observed at times `0, n^{-2}, 2n^{-2}, …`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BridgePath {
    pub n: usize,
    pub positions: Vec<i64>,
    pub confined: bool,
}

impl BridgePath {
    pub fn steps(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn start(&self) -> i64 {
        self.positions[0]
    }

    pub fn end(&self) -> i64 {
        *self.positions.last().expect("bridge path is never empty")
    }

    /// Checks the ±1 step, endpoint and confinement invariants.
    pub fn is_valid(&self) -> bool {
        let steps_ok = self
            .positions
            .windows(2)
            .all(|w| (w[1] - w[0]).abs() == 1);
        let confined_ok = !self.confined
            || self
                .positions
                .iter()
                .all(|&p| 0 <= p && p <= self.n as i64);
        steps_ok && confined_ok
    }
}

/// Largest table (in entries) the confined-bridge sampler will allocate.
pub const CONFINED_TABLE_CAP: usize = 50_000_000;

/// Uniform sample among walks with `steps` ±1 steps from `x_start` to `x_end`,
/// optionally restricted to `{0, …, n}`.
///
/// Unconfined bridges take an up-step with probability `(r + d) / 2r` when `r`
/// steps remain and `d` is the remaining displacement. Confined bridges
/// condition exactly on path counts computed by a backward recursion over the
/// strip; each row is rescaled, which leaves the step ratios unchanged.
pub fn rw_bridge(
    n: usize,
    steps: usize,
    x_start: i64,
    x_end: i64,
    confined: bool,
    stream: RngStream,
) -> Result<BridgePath> {
    let dist = (x_start - x_end).unsigned_abs() as usize;
    if dist > steps || !(steps - dist).is_multiple_of(2) {
        return Err(domain_err!(
            "no {steps}-step walk joins {x_start} to {x_end}"
        ));
    }
    let mut rng = stream.rng();
    let mut positions = Vec::with_capacity(steps + 1);
    positions.push(x_start);

    if !confined {
        let mut z = x_start;
        for k in 0..steps {
            let remaining = (steps - k) as i64;
            let ups = (remaining + (x_end - z)) / 2;
            let up = (rng.random::<f64>() * remaining as f64) < ups as f64;
            z += if up { 1 } else { -1 };
            positions.push(z);
        }
        return Ok(BridgePath {
            n,
            positions,
            confined,
        });
    }

    let top = n as i64;
    if !(0..=top).contains(&x_start) || !(0..=top).contains(&x_end) {
        return Err(domain_err!(
            "confined endpoints must lie in [0, {n}], got {x_start} -> {x_end}"
        ));
    }
    let width = n + 1;
    if (steps + 1).saturating_mul(width) > CONFINED_TABLE_CAP {
        return Err(config_err!(
            "confined bridge table {} x {} exceeds the cap of {CONFINED_TABLE_CAP} entries",
            steps + 1,
            width
        ));
    }
    // counts[k][z] ∝ number of confined walks from z to x_end in steps - k steps
    let mut counts = vec![0.0f64; (steps + 1) * width];
    counts[steps * width + x_end as usize] = 1.0;
    for k in (0..steps).rev() {
        let (head, tail) = counts.split_at_mut((k + 1) * width);
        let next = &tail[..width];
        let row = &mut head[k * width..];
        let mut max = 0.0f64;
        for z in 0..width {
            let down = if z > 0 { next[z - 1] } else { 0.0 };
            let up = if z + 1 < width { next[z + 1] } else { 0.0 };
            row[z] = down + up;
            max = max.max(row[z]);
        }
        if max > 0.0 {
            for v in row.iter_mut().take(width) {
                *v /= max;
            }
        }
    }
    if counts[x_start as usize] == 0.0 {
        return Err(domain_err!(
            "no confined {steps}-step walk joins {x_start} to {x_end} in [0, {n}]"
        ));
    }
    let mut z = x_start as usize;
    for k in 0..steps {
        let next = &counts[(k + 1) * width..(k + 2) * width];
        let down = if z > 0 { next[z - 1] } else { 0.0 };
        let up = if z + 1 < width { next[z + 1] } else { 0.0 };
        let go_up = rng.random::<f64>() * (up + down) < up;
        z = if go_up { z + 1 } else { z - 1 };
        positions.push(z as i64);
    }
    Ok(BridgePath {
        n,
        positions,
        confined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_divisibility() {
        assert_eq!(grid_cells(1.0, 0.25).unwrap(), 4);
        assert_eq!(grid_cells(1.0, 1.0 / 8192.0).unwrap(), 8192);
        assert_eq!(grid_cells(1.0, 1e-5).unwrap(), 100_000);
        assert!(grid_cells(1.0, 0.3).is_err());
        assert!(grid_cells(1.0, 0.0).is_err());
        assert!(grid_cells(1.0, 2.0).is_err());
    }

    #[test]
    fn brownian_path_shape() {
        let p = brownian_path(1.0, 0.25, RngStream::new(3, 0)).unwrap();
        assert_eq!(p.values().len(), 5);
        assert_eq!(p.values()[0], 0.0);
        let p = brownian_path(1.0, 1.0, RngStream::new(3, 0)).unwrap();
        assert_eq!(p.values().len(), 2);
        assert!(p.values()[1].is_finite());
        assert!(brownian_path(1.0, 0.3, RngStream::new(3, 0)).is_err());
    }

    #[test]
    fn partial_sums_of_ones() {
        let w = partial_sum_noise(&[1.0; 4], 4).unwrap();
        for (k, v) in w.values().iter().enumerate() {
            assert_eq!(*v, k as f64 / 2.0);
        }
        // W(a) = floor(4a) / 2 at the grid and linear in between
        assert_eq!(w.value_at(0.5), 1.0);
        assert!((w.value_at(0.625) - 1.25).abs() < 1e-15);
        let zero = partial_sum_noise(&[0.0; 7], 7).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
        assert!(partial_sum_noise(&[1.0; 3], 4).is_err());
    }

    #[test]
    fn coarsen_keeps_grid_values() {
        let p = brownian_path(1.0, 1.0 / 16.0, RngStream::new(9, 1)).unwrap();
        let c = p.coarsen(4).unwrap();
        assert_eq!(c.cells(), 4);
        assert_eq!(c.values()[2], p.values()[8]);
        assert!(p.coarsen(3).is_err());
    }

    #[test]
    fn bridge_endpoints_are_exact() {
        let b = brownian_bridge(0.3, 0.7, 2.0, 0.125, RngStream::new(1, 1)).unwrap();
        assert_eq!(b.len(), 17);
        assert_eq!(b[0], 0.3);
        assert_eq!(*b.last().unwrap(), 0.7);
        let b = brownian_bridge(0.3, 0.7, 1.0, 1.0, RngStream::new(1, 1)).unwrap();
        assert_eq!(b, vec![0.3, 0.7]);
    }

    #[test]
    fn trivial_walk_bridges() {
        let p = rw_bridge(3, 0, 5, 5, false, RngStream::new(0, 0)).unwrap();
        assert_eq!(p.positions, vec![5]);
        let p = rw_bridge(2, 2, 0, 0, true, RngStream::new(0, 0)).unwrap();
        assert_eq!(p.positions, vec![0, 1, 0]);
        assert!(matches!(
            rw_bridge(2, 3, 0, 0, false, RngStream::new(0, 0)),
            Err(crate::Error::Domain(_))
        ));
        assert!(matches!(
            rw_bridge(2, 2, 0, 4, false, RngStream::new(0, 0)),
            Err(crate::Error::Domain(_))
        ));
        // n = 0 strip admits no moves
        assert!(rw_bridge(0, 2, 0, 0, true, RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn unconfined_two_step_bridge_is_fair() {
        let mut ups = 0;
        let trials = 4000;
        for i in 0..trials {
            let p = rw_bridge(2, 2, 0, 0, false, RngStream::new(11, i)).unwrap();
            assert!(p.positions == vec![0, 1, 0] || p.positions == vec![0, -1, 0]);
            if p.positions[1] == 1 {
                ups += 1;
            }
        }
        // 4σ binomial band around 1/2
        let sd = (trials as f64 * 0.25).sqrt();
        assert!((ups as f64 - trials as f64 / 2.0).abs() < 4.0 * sd);
    }
}
