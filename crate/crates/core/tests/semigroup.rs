use edgescale_core::continuum::continuum_noise;
use edgescale_core::feynman_kac::{kernel_estimate, trace_estimate, BridgeOptions};
use edgescale_core::paths::NoisePath;
use edgescale_core::rng::RngStream;
use edgescale_core::special::dirichlet_heat_kernel;
use edgescale_core::Sequential;

fn opts(steps: usize) -> BridgeOptions {
    BridgeOptions {
        steps,
        ..Default::default()
    }
}

#[test]
fn free_kernel_matches_dirichlet_series() {
    let zero = NoisePath::zero(1.0, 1.0 / 64.0).unwrap();
    for (x, y, t) in [(0.5, 0.5, 0.25), (0.2, 0.7, 0.1), (0.3, 0.35, 0.05)] {
        let k = kernel_estimate(x, y, t, 1.0, &zero, 20_000, &opts(256), RngStream::new(4, 0), &Sequential).unwrap();
        let exact = dirichlet_heat_kernel(x, y, t);
        assert!((k.value - exact).abs() < 4.0 * k.stderr + 1e-12, "{k:?} vs {exact}");
    }
}

#[test]
fn kernel_is_symmetric() {
    let noise = continuum_noise(1024, RngStream::new(2, 9)).unwrap();
    let o = BridgeOptions {
        control_variate: true,
        ..opts(256)
    };
    for (x, y) in [(0.3, 0.6), (0.45, 0.5)] {
        let a = kernel_estimate(x, y, 0.2, 1.0, &noise, 20_000, &o, RngStream::new(3, 0), &Sequential).unwrap();
        let b = kernel_estimate(y, x, 0.2, 1.0, &noise, 20_000, &o, RngStream::new(3, 1), &Sequential).unwrap();
        let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!((a.value - b.value).abs() < 4.0 * se, "{a:?} vs {b:?}");
    }
}

#[test]
fn trace_decreases_in_time() {
    let noise = continuum_noise(1024, RngStream::new(5, 5)).unwrap();
    let o = BridgeOptions {
        control_variate: true,
        ..opts(256)
    };
    let traces: Vec<_> = [0.25, 0.5, 1.0]
        .iter()
        .map(|&t| trace_estimate(t, 1.0, &noise, 16, 400, &o, RngStream::new(6, 0), &Sequential).unwrap())
        .collect();
    for w in traces.windows(2) {
        assert!(w[0].value - w[1].value > 4.0 * (w[0].stderr + w[1].stderr), "{traces:?}");
    }
}

#[test]
fn endpoints_outside_the_interval_are_rejected() {
    let zero = NoisePath::zero(1.0, 0.5).unwrap();
    assert!(kernel_estimate(1.2, 0.5, 1.0, 1.0, &zero, 10, &opts(16), RngStream::new(0, 0), &Sequential).is_err());
}
