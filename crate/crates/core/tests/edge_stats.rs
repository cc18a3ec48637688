use edgescale_core::edge_stats::{
    etas_from_lambdas, ks_distance, laplace_sum, log_laplace_sum, power_trace, rescale_edge,
    tail_fit, unscale_edge, TailPoint,
};
use edgescale_core::rng::RngStream;
use proptest::prelude::*;

proptest! {
    #[test]
    fn ks_is_symmetric_and_rank_invariant(
        a in prop::collection::vec(-5.0f64..5.0, 1..60),
        b in prop::collection::vec(-5.0f64..5.0, 1..60),
    ) {
        let d = ks_distance(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, ks_distance(&b, &a).unwrap());
        let ea: Vec<f64> = a.iter().map(|x| x.exp()).collect();
        let eb: Vec<f64> = b.iter().map(|x| x.exp()).collect();
        prop_assert!((d - ks_distance(&ea, &eb).unwrap()).abs() < 1e-12);
        prop_assert_eq!(ks_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn laplace_sum_decreases_in_time(
        lambdas in prop::collection::vec(0.1f64..200.0, 1..40),
        t1 in 0.05f64..3.0,
        dt in 0.01f64..3.0,
    ) {
        let etas = etas_from_lambdas(&lambdas);
        let (s1, s2) = (laplace_sum(&etas, t1).unwrap(), laplace_sum(&etas, t1 + dt).unwrap());
        prop_assert!(s2 < s1);
        let direct: f64 = lambdas.iter().map(|l| (-0.5 * t1 * l).exp()).sum();
        prop_assert!((s1 - direct).abs() <= 1e-12 * direct);
        prop_assert!((log_laplace_sum(&etas, t1).unwrap() - direct.ln()).abs() < 1e-10);
    }

    #[test]
    fn rescaling_round_trips(
        eigs in prop::collection::vec(1.9f64..2.1, 1..30),
        n in 10usize..100_000,
        c in 0.5f64..2.5,
        sign in prop::sample::select(vec![1.0f64, -1.0]),
    ) {
        let scaled = rescale_edge(&eigs, n, c, 2.0, sign).unwrap();
        let back = unscale_edge(&scaled, n, c, 2.0, sign);
        for (x, y) in eigs.iter().zip(&back) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn tail_fit_ignores_point_order(
        coefficient in 0.2f64..4.0,
        intercept in -1.0f64..1.0,
        exponent in prop::sample::select(vec![1.5f64, 2.0]),
        perm in Just(vec![3usize, 0, 2, 1]).prop_shuffle(),
    ) {
        let grid = [0.8, 1.2, 1.6, 2.0];
        let points: Vec<TailPoint> = grid
            .iter()
            .map(|&a| TailPoint { a, p: (-coefficient * f64::powf(a, exponent) - intercept).exp().min(1.0), replicas: None })
            .collect();
        prop_assume!(points.iter().all(|q| q.p < 1.0));
        let fit = tail_fit(&points, exponent, RngStream::new(1, 0)).unwrap();
        prop_assert!((fit.coefficient - coefficient).abs() < 1e-9);
        prop_assert!((fit.intercept - intercept).abs() < 1e-9);
        prop_assert!(fit.monotone);
        let shuffled: Vec<TailPoint> = perm.iter().map(|&i| points[i]).collect();
        let again = tail_fit(&shuffled, exponent, RngStream::new(1, 0)).unwrap();
        prop_assert_eq!(fit, again);
    }
}

#[test]
fn power_trace_of_the_free_spectrum() {
    // (λ/2)^k averaged with (λ/2)^{k-1}; at λ = 2 every term is 1
    let eigs = vec![2.0; 5];
    assert!((power_trace(&eigs, 10, 1.0).unwrap() - 5.0).abs() < 1e-12);
}

#[test]
fn binomial_points_get_a_bracketing_interval() {
    let points: Vec<TailPoint> = [(1.0, 0.30), (1.5, 0.12), (2.0, 0.04), (2.5, 0.01)]
        .iter()
        .map(|&(a, p)| TailPoint { a, p, replicas: Some(10_000) })
        .collect();
    let fit = tail_fit(&points, 2.0, RngStream::new(2, 0)).unwrap();
    assert!(fit.ci_low <= fit.coefficient && fit.coefficient <= fit.ci_high);
    assert!(fit.ci_high - fit.ci_low < 0.5 * fit.coefficient);
}

#[test]
fn too_few_informative_points_is_a_fit_error() {
    let points: Vec<TailPoint> = [(3.0, 0.0), (4.5, 0.0), (6.0, 0.0)]
        .iter()
        .map(|&(a, p)| TailPoint { a, p, replicas: Some(100_000) })
        .collect();
    assert!(matches!(
        tail_fit(&points, 1.5, RngStream::new(0, 0)),
        Err(edgescale_core::Error::Fit(_))
    ));
}
