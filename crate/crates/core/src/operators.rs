//! Tridiagonal operators built from a potential draw or a noise path.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{config_err, domain_err, Result};
use crate::paths::{grid_cells, NoisePath};
use crate::rng::PotentialSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// `H_n`: unit off-diagonal, diagonal `σ𝔞(k)/n^α`.
    Hn,
    /// `H_n^β`: shifted-mean model with the linear ramp `-ℓ/m³`.
    HnBeta,
    /// `n²(2I - H_n)`, the recentred and magnified `H_n`.
    HBar,
    /// Finite-difference stochastic Airy operator.
    Sao,
    /// Finite-difference `-d²/dx² - σW'` on `[0, 1]`.
    Continuum,
    /// Anything else (tests, shifted copies).
    Generic,
}

/// A real symmetric tridiagonal matrix stored as its diagonal and one
/// off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    kind: OperatorKind,
}

impl TridiagonalMatrix {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>, kind: OperatorKind) -> Result<Self> {
        if diag.is_empty() {
            return Err(config_err!("matrix must have at least one row"));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(config_err!(
                "off-diagonal length {} does not match dimension {}",
                offdiag.len(),
                diag.len()
            ));
        }
        Ok(Self {
            diag,
            offdiag,
            kind,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn is_finite(&self) -> bool {
        self.diag.iter().chain(&self.offdiag).all(|v| v.is_finite())
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
            let r = left + right;
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Bound on the spectral radius (maximum absolute row sum).
    pub fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// Copy with `c` added to every diagonal entry.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            diag: self.diag.iter().map(|d| d + c).collect(),
            offdiag: self.offdiag.clone(),
            kind: OperatorKind::Generic,
        }
    }

    /// Leading `k × k` principal submatrix.
    pub fn leading(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.dim() {
            return Err(domain_err!("leading block size {k} out of range"));
        }
        Ok(Self {
            diag: self.diag[..k].to_vec(),
            offdiag: self.offdiag[..k - 1].to_vec(),
            kind: OperatorKind::Generic,
        })
    }
}

/// Parameters shared by the discrete builders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorConfig {
    pub n: usize,
    pub spec: PotentialSpec,
    /// `β` of the shifted-mean model.
    pub beta: f64,
    /// Scaling index `m_n`; `None` means the smallest `m` with `m³ ≥ n`.
    pub m: Option<usize>,
}

impl OperatorConfig {
    pub fn new(n: usize, spec: PotentialSpec) -> Self {
        Self {
            n,
            spec,
            beta: 2.0,
            m: None,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    /// The scaling index actually used by [`build_hn_beta`].
    pub fn scaling_index(&self) -> usize {
        self.m.unwrap_or_else(|| integer_cube_root_ceil(self.n))
    }

    fn validate(&self, draws: &[f64]) -> Result<()> {
        if self.n == 0 {
            return Err(config_err!("n must be positive"));
        }
        if draws.len() != self.n {
            return Err(config_err!(
                "expected {} potential draws, got {}",
                self.n,
                draws.len()
            ));
        }
        Ok(())
    }
}

/// Smallest `m` with `m³ ≥ n`.
pub fn integer_cube_root_ceil(n: usize) -> usize {
    let mut m = (n as f64).cbrt().round() as usize;
    while m > 0 && (m - 1).pow(3) >= n {
        m -= 1;
    }
    while m.pow(3) < n {
        m += 1;
    }
    m.max(1)
}

/// `H_n` with diagonal `σ·𝔞(k)/n^α` and unit off-diagonal.
pub fn build_hn(config: &OperatorConfig, draws: &[f64]) -> Result<TridiagonalMatrix> {
    config.validate(draws)?;
    let n = config.n;
    let scale = config.spec.sigma / (n as f64).powf(config.spec.alpha);
    TridiagonalMatrix::new(
        draws.iter().map(|a| scale * a).collect(),
        vec![1.0; n - 1],
        OperatorKind::Hn,
    )
}

/// `n²(2I - H_n)`, formed entrywise from `H_n` at `α = 3/2` so that the
/// defining relation holds exactly in floating point.
pub fn build_hbar(config: &OperatorConfig, draws: &[f64]) -> Result<TridiagonalMatrix> {
    let mut critical = *config;
    critical.spec.alpha = PotentialSpec::CRITICAL_ALPHA;
    let hn = build_hn(&critical, draws)?;
    let n2 = (config.n as f64) * (config.n as f64);
    TridiagonalMatrix::new(
        hn.diag.iter().map(|d| -n2 * (d - 2.0)).collect(),
        hn.offdiag.iter().map(|e| -n2 * e).collect(),
        OperatorKind::HBar,
    )
}

/// Shifted-mean operator `H_n^β` with diagonal
/// `(2/√β)·𝔞(ℓ)/m^{3/2} - ℓ/m³` for `ℓ = 1..n`.
pub fn build_hn_beta(config: &OperatorConfig, draws: &[f64]) -> Result<TridiagonalMatrix> {
    config.validate(draws)?;
    if !(config.beta.is_finite() && config.beta > 0.0) {
        return Err(config_err!("beta must be positive, got {}", config.beta));
    }
    let m = config.scaling_index();
    if m == 0 || m > config.n {
        return Err(config_err!("scaling index m = {m} must lie in [1, n = {}]", config.n));
    }
    let mf = m as f64;
    let noise_scale = 2.0 / config.beta.sqrt() / mf.powf(1.5);
    let m3 = mf * mf * mf;
    let diag = draws
        .iter()
        .enumerate()
        .map(|(i, a)| noise_scale * a - (i + 1) as f64 / m3)
        .collect();
    TridiagonalMatrix::new(diag, vec![1.0; config.n - 1], OperatorKind::HnBeta)
}

/// Stochastic Airy operator `-d²/dx² + x + (2/√β)W'` discretized on the
/// interior points `x_k = k/m`, `k = 1..⌊Lm⌋`, with zero boundary values.
///
/// The noise path must have grid step `1/m` and cover `[0, ⌊Lm⌋/m]`;
/// `None` gives the deterministic Airy operator.
pub fn build_sao(
    beta: f64,
    length: f64,
    m: usize,
    noise: Option<&NoisePath>,
) -> Result<TridiagonalMatrix> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(config_err!("beta must be positive, got {beta}"));
    }
    if !(length.is_finite() && length > 0.0) || m == 0 {
        return Err(config_err!("SAO needs L > 0 and m > 0"));
    }
    let mf = m as f64;
    let size = (length * mf).floor() as usize;
    if size == 0 {
        return Err(config_err!("SAO grid of size floor(L·m) = 0"));
    }
    let m2 = mf * mf;
    let noise_scale = 2.0 / beta.sqrt() * mf;
    if let Some(w) = noise {
        if (w.grid_step() * mf - 1.0).abs() > 1e-9 {
            return Err(config_err!(
                "SAO noise grid step {} does not match 1/m = {}",
                w.grid_step(),
                1.0 / mf
            ));
        }
        if w.cells() < size {
            return Err(config_err!(
                "SAO noise has {} cells, grid needs {size}",
                w.cells()
            ));
        }
    }
    let diag = (1..=size)
        .map(|k| {
            let ramp = 2.0 * m2 + k as f64 / mf;
            match noise {
                Some(w) => ramp + noise_scale * w.increment(k - 1),
                None => ramp,
            }
        })
        .collect();
    TridiagonalMatrix::new(diag, vec![-m2; size - 1], OperatorKind::Sao)
}

/// Finite-difference `-d²/dx² - σW'` on `[0, 1]` with Dirichlet ends, using
/// the `m - 1` interior points `j/m`; point `j` carries the increment of `W`
/// over the cell `((j-1)/m, j/m]`.
///
/// This is the stencil of `n²(2I - H_n)` with the potential read off `W`; the
/// sign of the noise term is the one the partial-sum coupling produces.
pub fn build_continuum(sigma: f64, noise: &NoisePath, m: usize) -> Result<TridiagonalMatrix> {
    if m < 2 {
        return Err(config_err!("continuum grid needs m >= 2, got {m}"));
    }
    let unit = noise.unit_cells()?;
    if unit % m != 0 {
        return Err(config_err!(
            "noise grid of {unit} cells per unit is not a refinement of m = {m}"
        ));
    }
    let factor = unit / m;
    let mf = m as f64;
    let m2 = mf * mf;
    let values = noise.values();
    let diag = (1..m)
        .map(|j| 2.0 * m2 - sigma * mf * (values[j * factor] - values[(j - 1) * factor]))
        .collect();
    TridiagonalMatrix::new(diag, vec![-m2; m - 2], OperatorKind::Continuum)
}

/// Grid size for the continuum discretization of a noise grid step.
pub fn continuum_grid_for(noise: &NoisePath) -> Result<usize> {
    grid_cells(1.0, noise.grid_step())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::PotentialFamily;

    fn spec(sigma: f64, alpha: f64) -> PotentialSpec {
        PotentialSpec::new(PotentialFamily::Gaussian, sigma, alpha).unwrap()
    }

    #[test]
    fn hn_diagonal_scaling() {
        let cfg = OperatorConfig::new(4, spec(2.0, 1.5));
        let h = build_hn(&cfg, &[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!(h.diag(), &[0.25, -0.25, 0.25, -0.25]);
        assert_eq!(h.offdiag(), &[1.0, 1.0, 1.0]);
        let one = build_hn(&OperatorConfig::new(1, spec(3.0, 1.5)), &[0.5]).unwrap();
        assert_eq!(one.diag(), &[1.5]);
        assert!(one.offdiag().is_empty());
        assert!(build_hn(&cfg, &[1.0; 3]).is_err());
    }

    #[test]
    fn hbar_free_case() {
        let cfg = OperatorConfig::new(2, spec(0.0, 1.5));
        let h = build_hbar(&cfg, &[0.3, -0.1]).unwrap();
        assert_eq!(h.diag(), &[8.0, 8.0]);
        assert_eq!(h.offdiag(), &[-4.0]);
    }

    #[test]
    fn hbar_matches_closed_form_diagonal() {
        let n = 50;
        let draws: Vec<f64> = (0..n).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let cfg = OperatorConfig::new(n, spec(1.3, 1.5));
        let h = build_hbar(&cfg, &draws).unwrap();
        let nf = n as f64;
        for (d, a) in h.diag().iter().zip(&draws) {
            let expect = 2.0 * nf * nf - nf.sqrt() * 1.3 * a;
            assert!((d - expect).abs() <= 1e-12 * expect.abs());
        }
    }

    #[test]
    fn hn_beta_plug_in() {
        let cfg = OperatorConfig::new(3, spec(1.0, 0.5)).with_beta(4.0).with_m(1);
        let h = build_hn_beta(&cfg, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(h.diag()[0], 0.0);
        assert_eq!(h.diag()[1], -2.0);
        let cfg = OperatorConfig::new(27, spec(1.0, 0.5)).with_beta(2.0);
        assert_eq!(cfg.scaling_index(), 3);
        let h = build_hn_beta(&cfg, &[0.0; 27]).unwrap();
        for (l, d) in h.diag().iter().enumerate() {
            assert_eq!(*d, -((l + 1) as f64) / 27.0);
        }
        assert!(h.diag().windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn cube_root() {
        assert_eq!(integer_cube_root_ceil(1), 1);
        assert_eq!(integer_cube_root_ceil(8), 2);
        assert_eq!(integer_cube_root_ceil(9), 3);
        assert_eq!(integer_cube_root_ceil(8000), 20);
        assert_eq!(integer_cube_root_ceil(8001), 21);
        assert_eq!(integer_cube_root_ceil(1_000_000), 100);
    }

    #[test]
    fn zero_noise_sao_is_increasing() {
        let h = build_sao(2.0, 10.0, 40, None).unwrap();
        assert_eq!(h.dim(), 400);
        assert!(h.diag().windows(2).all(|w| w[1] > w[0]));
        let w = NoisePath::zero(10.0, 1.0 / 20.0).unwrap();
        assert!(build_sao(2.0, 10.0, 40, Some(&w)).is_err());
    }

    #[test]
    fn continuum_grid_checks() {
        let w = NoisePath::zero(1.0, 1.0 / 64.0).unwrap();
        let g = build_continuum(1.0, &w, 16).unwrap();
        assert_eq!(g.dim(), 15);
        assert_eq!(g.diag()[0], 512.0);
        assert!(build_continuum(1.0, &w, 24).is_err());
    }
}
