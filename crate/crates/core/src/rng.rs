//! Deterministic random streams and the admissible potential laws.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{config_err, Result};

/// The generator behind every stream.
pub type StreamRng = ChaCha8Rng;

/// A counter-based random stream identified by `(root_seed, stream_index)`.
///
/// The stream index selects one of the 2^64 ChaCha nonces under a key derived
/// from the root seed, so stream `i` never depends on how many values any
/// sibling stream consumed. Streams are plain values; each call to
/// [`RngStream::rng`] restarts the sequence from its beginning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    root_seed: u64,
    stream_index: u64,
}

impl RngStream {
    pub fn new(root_seed: u64, stream_index: u64) -> Self {
        Self {
            root_seed,
            stream_index,
        }
    }

    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Child stream `child` of this stream.
    ///
    /// The child lives under a new key mixed from `(root_seed, stream_index)`,
    /// so `s.substream(i)` and `s.substream(j)` are distinct for `i != j`, and
    /// distinct parents never share children.
    pub fn substream(&self, child: u64) -> RngStream {
        let key = splitmix64(self.root_seed ^ splitmix64(self.stream_index ^ 0x5851_f42d_4c95_7f2d));
        RngStream::new(key, child)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One standard normal draw.
#[inline]
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Success probability of the two-point [`PotentialFamily::ShiftedBernoulli`] law.
pub const SHIFTED_BERNOULLI_P: f64 = 0.25;

/// Laws of the i.i.d. potential variables, each with mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PotentialFamily {
    Gaussian,
    /// Fair ±1 signs.
    Rademacher,
    /// Uniform on `[-√3, √3]`.
    UniformSym,
    /// `(B - p) / sqrt(p(1-p))` with `B ~ Bernoulli(p)`, `p = 1/4`; the one
    /// asymmetric law in the set.
    ShiftedBernoulli,
}

impl PotentialFamily {
    pub const ALL: [PotentialFamily; 4] = [
        PotentialFamily::Gaussian,
        PotentialFamily::Rademacher,
        PotentialFamily::UniformSym,
        PotentialFamily::ShiftedBernoulli,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PotentialFamily::Gaussian => "gaussian",
            PotentialFamily::Rademacher => "rademacher",
            PotentialFamily::UniformSym => "uniform_sym",
            PotentialFamily::ShiftedBernoulli => "shifted_bernoulli",
        }
    }

    /// Exact fourth moment of the law.
    pub fn fourth_moment(&self) -> f64 {
        match self {
            PotentialFamily::Gaussian => 3.0,
            PotentialFamily::Rademacher => 1.0,
            PotentialFamily::UniformSym => 9.0 / 5.0,
            PotentialFamily::ShiftedBernoulli => {
                let p = SHIFTED_BERNOULLI_P;
                (1.0 - 3.0 * p + 3.0 * p * p) / (p * (1.0 - p))
            }
        }
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            PotentialFamily::Gaussian => standard_normal(rng),
            PotentialFamily::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            PotentialFamily::UniformSym => {
                let sqrt3 = 3.0f64.sqrt();
                sqrt3 * (2.0 * rng.random::<f64>() - 1.0)
            }
            PotentialFamily::ShiftedBernoulli => {
                let p = SHIFTED_BERNOULLI_P;
                let s = (p * (1.0 - p)).sqrt();
                if rng.random::<f64>() < p {
                    (1.0 - p) / s
                } else {
                    -p / s
                }
            }
        }
    }
}

impl fmt::Display for PotentialFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PotentialFamily {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        PotentialFamily::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| config_err!("unknown potential family `{s}`"))
    }
}

/// Potential law together with its strength `σ` and decay exponent `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    pub family: PotentialFamily,
    pub sigma: f64,
    pub alpha: f64,
}

impl PotentialSpec {
    /// Critical decay exponent at which the edge has a nontrivial limit.
    pub const CRITICAL_ALPHA: f64 = 1.5;

    pub fn new(family: PotentialFamily, sigma: f64, alpha: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(config_err!("sigma must be finite and nonnegative, got {sigma}"));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(config_err!("alpha must be positive, got {alpha}"));
        }
        Ok(Self {
            family,
            sigma,
            alpha,
        })
    }

    /// Spec at the critical exponent `α = 3/2`.
    pub fn critical(family: PotentialFamily, sigma: f64) -> Result<Self> {
        Self::new(family, sigma, Self::CRITICAL_ALPHA)
    }
}

/// `n` i.i.d. draws `𝔞(1), …, 𝔞(n)` from the family of `spec`.
pub fn sample_potential(spec: &PotentialSpec, n: usize, stream: RngStream) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(config_err!("potential length must be at least 1"));
    }
    let mut rng = stream.rng();
    Ok((0..n).map(|_| spec.family.draw(&mut rng)).collect())
}
