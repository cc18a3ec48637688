//! Closed forms and special functions used as references and by samplers.

use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

/// Number of terms that brings `e^{-(T/2)π²j²}` below `1e-17` relative to the
/// first term.
fn theta_terms(t: f64) -> usize {
    // (T/2)π²(j² - 1) > 17 ln 10
    let j = (1.0 + 2.0 * 17.0 * 10.0f64.ln() / (t * PI * PI)).sqrt();
    j.ceil() as usize + 1
}

/// `Σ_{j≥1} e^{-(T/2)π²j²}`, the trace of the free Dirichlet semigroup on
/// `[0, 1]`; the neglected tail is below `1e-17` times the leading term.
pub fn theta_series(t: f64) -> f64 {
    let terms = theta_terms(t);
    // summed from the smallest term up
    (1..=terms)
        .rev()
        .map(|j| (-0.5 * t * PI * PI * (j * j) as f64).exp())
        .sum()
}

/// Dirichlet heat kernel of `½ d²/dx²` on `[0, 1]`:
/// `Σ_j 2 sin(jπx) sin(jπy) e^{-(T/2)π²j²}`.
pub fn dirichlet_heat_kernel(x: f64, y: f64, t: f64) -> f64 {
    let terms = theta_terms(t);
    (1..=terms)
        .rev()
        .map(|j| {
            let jf = j as f64;
            2.0 * (jf * PI * x).sin() * (jf * PI * y).sin() * (-0.5 * t * PI * PI * jf * jf).exp()
        })
        .sum()
}

/// Free Gaussian transition density `(2πT)^{-1/2} e^{-(x-y)²/2T}`.
pub fn gaussian_kernel(x: f64, y: f64, t: f64) -> f64 {
    (-(x - y) * (x - y) / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

/// Probability that a Brownian bridge `x → y` on `[0, T]` stays in `[0, 1]`.
pub fn bridge_confinement_probability(x: f64, y: f64, t: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return 0.0;
    }
    (dirichlet_heat_kernel(x, y, t) / gaussian_kernel(x, y, t)).clamp(0.0, 1.0)
}

/// Inverse of the standard normal CDF (Wichura, AS241; relative accuracy
/// about 1e-16).
#[allow(clippy::inconsistent_digit_grouping, clippy::excessive_precision)]
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2509.080_928_730_122_7 * r + 33430.575_583_588_128) * r
            + 67265.770_927_008_700)
            * r
            + 45921.953_931_549_871)
            * r
            + 13731.693_765_509_461)
            * r
            + 1971.590_950_306_551_3)
            * r
            + 133.141_667_891_784_38)
            * r
            + 3.387_132_872_796_366_5)
            * q;
        let den = ((((((5226.495_278_852_545_4 * r + 28729.085_735_721_943) * r
            + 39307.895_800_092_710)
            * r
            + 21213.794_301_586_595)
            * r
            + 5394.196_021_424_751_1)
            * r
            + 687.187_007_492_057_91)
            * r
            + 42.313_330_701_600_911)
            * r
            + 1.0;
        return num / den;
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414_1e-4 * r + 0.022_723_844_989_269_184) * r
            + 0.241_780_725_177_450_61)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691_4)
            * r
            + 4.630_337_846_156_545_3)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_344_9e-4) * r
            + 0.015_198_666_563_616_457)
            * r
            + 0.148_103_976_427_480_07)
            * r
            + 0.689_767_334_985_100_05)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_758_8)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 0.001_242_660_947_388_078_4)
            * r
            + 0.026_532_189_526_576_123)
            * r
            + 0.296_560_571_828_504_89)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114_4)
            * r
            + 6.657_904_643_501_103_3;
        let den = ((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_132_6e-4)
            * r
            + 0.014_875_361_290_850_615)
            * r
            + 0.136_929_880_922_735_8)
            * r
            + 0.599_832_206_555_888)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

fn ln_choose(n: u64, k: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// Quantile of the hypergeometric law: number of marked items among `draws`
/// taken without replacement from `total` items of which `marked` are marked.
///
/// Returns the smallest `k` with `P(K ≤ k) ≥ u`. The distribution function is
/// accumulated with the pmf ratio recursion from whichever tail is closer to
/// `u`; mass beyond 12 standard deviations (below 1e-30) is ignored.
pub fn hypergeometric_quantile(total: u64, marked: u64, draws: u64, u: f64) -> u64 {
    let lo = (draws + marked).saturating_sub(total);
    let hi = draws.min(marked);
    if lo == hi {
        return lo;
    }
    let (nf, kf, df) = (total as f64, marked as f64, draws as f64);
    let mean = df * kf / nf;
    let var = mean * (1.0 - kf / nf) * (nf - df) / (nf - 1.0);
    let sd = var.sqrt().max(1.0);
    let start = ((mean - 12.0 * sd).floor().max(lo as f64)) as u64;
    let stop = ((mean + 12.0 * sd).ceil().min(hi as f64)) as u64;
    let ln_norm = ln_choose(total, draws);
    let ln_pmf = |k: u64| {
        ln_choose(marked, k) + ln_choose(total - marked, draws - k) - ln_norm
    };
    // P(k+1)/P(k) = (K-k)(d-k) / ((k+1)(N-K-d+k+1))
    let ratio_up = |k: u64| {
        (marked - k) as f64 * (draws - k) as f64
            / ((k + 1) as f64 * (total + k + 1 - marked - draws) as f64)
    };
    if u <= 0.5 {
        let mut pmf = ln_pmf(start).exp();
        let mut cdf = 0.0;
        let mut k = start;
        loop {
            cdf += pmf;
            if cdf >= u || k >= stop {
                return k;
            }
            pmf *= ratio_up(k);
            k += 1;
        }
    } else {
        // smallest k with P(K > k) <= 1 - u, scanning down from the top
        let target = 1.0 - u;
        let mut pmf = ln_pmf(stop).exp();
        let mut upper = 0.0;
        let mut k = stop;
        loop {
            // upper = P(K > k)
            if k <= start {
                return k;
            }
            if upper + pmf > target {
                return k;
            }
            upper += pmf;
            pmf /= ratio_up(k - 1);
            k -= 1;
        }
    }
}
