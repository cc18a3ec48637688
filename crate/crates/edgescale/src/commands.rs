//! The experiments behind each CLI command. Every command draws replica `i`
//! from a substream indexed by `i` alone, so outputs do not depend on the
//! worker count.

use edgescale_core::continuum::{
    compare_methods, continuum_noise, rso_tail_curve, sao_eigen_sample, spectrum_on_path,
    ContinuumOptions, SpectrumMethod, TailSide,
};
use edgescale_core::edge_stats::{ks_distance, tail_fit, EdgeSampleBatch, TailPoint};
use edgescale_core::eigen::{all_certified, default_tol, eigen_extreme, Side};
use edgescale_core::feynman_kac::{
    pathwise_coupling_check, theta_check, BridgeOptions, CouplingOptions,
};
use edgescale_core::operators::{build_hn, build_hn_beta, OperatorConfig};
use edgescale_core::rng::{sample_potential, PotentialFamily, PotentialSpec, RngStream};
use edgescale_core::{Error, Executor};
use serde_json::{json, Value};

use crate::config::{
    ContinuumConfig, SpectrumConfig, TailsConfig, ThetaConfig, TraceConfig, TwConfig,
};
use crate::io::{fmt_f64, push_ranked, BatchMeta, Table};
use crate::report::{median, Gate, Stats};
use crate::RunError;

/// Ground state of `-d²/dx² + x` on the half-line: minus the first zero of Ai.
pub const AIRY_GROUND_STATE: f64 = 2.338_107_410_459_767;

/// Result of one command, before it is written to disk.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub samples: Table,
    pub results: Value,
    pub gates: Vec<Gate>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }
}

fn require(cond: bool, msg: &str) -> Result<(), RunError> {
    if cond {
        Ok(())
    } else {
        Err(RunError::config(msg))
    }
}

fn collect<T>(results: Vec<edgescale_core::Result<T>>) -> Result<Vec<T>, RunError> {
    results.into_iter().map(|r| r.map_err(RunError::from)).collect()
}

fn ranks(per_replica: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    (0..k).map(|r| per_replica.iter().map(|v| v[r]).collect()).collect()
}

/// Largest eigenvalues of `H_n`, rescaled to `n²(2 - λ)`.
pub fn spectrum<E: Executor>(cfg: &SpectrumConfig, seed: u64, exec: &E) -> Result<Outcome, RunError> {
    let family: PotentialFamily = cfg.family.parse()?;
    let spec = PotentialSpec::new(family, cfg.sigma, cfg.alpha)?;
    require(cfg.replicas > 0, "replicas must be positive")?;
    require(cfg.k > 0 && cfg.k <= cfg.n, "k must lie in [1, n]")?;
    let op = OperatorConfig::new(cfg.n, spec);
    let root = RngStream::new(seed, 0);
    let runs = collect(exec.map(cfg.replicas, |i| {
        let draws = sample_potential(&spec, cfg.n, root.substream(i as u64))?;
        let matrix = build_hn(&op, &draws)?;
        let tol = default_tol(&matrix) * 1e-2;
        let eigs = eigen_extreme(&matrix, cfg.k, Side::Largest, tol)?;
        let certified = all_certified(&matrix, &eigs, tol)?;
        Ok((eigs, certified))
    }))?;
    let certified = runs.iter().filter(|r| r.1).count();
    let eigs: Vec<Vec<f64>> = runs.into_iter().map(|r| r.0).collect();

    let tag = format!("hn-{}", family.name());
    let mut scaled = vec![Vec::with_capacity(cfg.k); cfg.replicas];
    let mut batches = Vec::new();
    for (rank, column) in ranks(&eigs, cfg.k).into_iter().enumerate() {
        let batch = EdgeSampleBatch::from_eigenvalues(&column, cfg.n, 2.0, 2.0, 1.0, &tag, seed)?;
        for (row, v) in scaled.iter_mut().zip(&batch.values) {
            row.push(*v);
        }
        batches.push(json!({
            "rank": rank,
            "meta": BatchMeta::from(&batch),
            "stats": Stats::of(&batch.values),
        }));
    }
    let mut samples = Table::new(&["replica", "rank", "value"]);
    push_ranked(&mut samples, &scaled);
    let total = cfg.replicas * cfg.k;
    Ok(Outcome {
        samples,
        results: json!({ "batches": batches, "certified": certified, "replicas": cfg.replicas }),
        gates: vec![Gate::new(
            "sturm_certificates",
            certified == cfg.replicas,
            Some((certified * cfg.k) as f64),
            format!("== {total}"),
        )],
    })
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

/// Low eigenvalues of `G` on Brownian noise paths by one or both methods.
pub fn continuum<E: Executor>(cfg: &ContinuumConfig, seed: u64, exec: &E) -> Result<Outcome, RunError> {
    let methods: Vec<SpectrumMethod> = match cfg.method.as_str() {
        "both" => vec![SpectrumMethod::Discretize, SpectrumMethod::Riccati],
        other => vec![other.parse()?],
    };
    require(cfg.replicas > 0 && cfg.k > 0, "replicas and k must be positive")?;
    require(
        (0.0..=1.0).contains(&cfg.agreement_fraction),
        "agreement_fraction must lie in [0, 1]",
    )?;
    let opts = ContinuumOptions {
        grid: cfg.grid,
        tol: cfg.tol,
        ..Default::default()
    };
    let root = RngStream::new(seed, 0);
    let both = methods.len() == 2;
    let runs = collect(exec.map(cfg.replicas, |i| {
        let noise = continuum_noise(cfg.grid, root.substream(i as u64))?;
        if both {
            let c = compare_methods(cfg.sigma, cfg.k, &noise, &opts, cfg.agreement_tol)?;
            Ok(vec![c.discretize, c.riccati])
        } else {
            Ok(vec![spectrum_on_path(cfg.sigma, cfg.k, methods[0], &noise, &opts)?])
        }
    }))?;

    let mut samples = Table::new(&["replica", "rank", "method", "value"]);
    for (i, per_method) in runs.iter().enumerate() {
        for (method, lambdas) in methods.iter().zip(per_method) {
            for (rank, v) in lambdas.iter().enumerate() {
                samples.push(vec![i.to_string(), rank.to_string(), method.name().into(), fmt_f64(*v)]);
            }
        }
    }
    let mut per_method = serde_json::Map::new();
    for (j, method) in methods.iter().enumerate() {
        let columns: Vec<Vec<f64>> = runs.iter().map(|r| r[j].clone()).collect();
        let stats: Vec<Stats> = ranks(&columns, cfg.k).iter().map(|c| Stats::of(c)).collect();
        per_method.insert(method.name().into(), json!(stats));
    }
    let increasing = runs.iter().flatten().all(|v| strictly_increasing(v));
    let mut gates = vec![Gate::new("increasing", increasing, None, "Λ₀ < Λ₁ < … on every path")];
    let mut results = json!({ "methods": per_method });
    if both {
        let gaps: Vec<f64> = runs
            .iter()
            .map(|r| r[0].iter().zip(&r[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .collect();
        let agree = gaps.iter().filter(|g| **g <= cfg.agreement_tol).count() as f64 / gaps.len() as f64;
        results["discrepancy"] = json!(Stats::of(&gaps));
        results["agreement_fraction"] = json!(agree);
        gates.push(Gate::new(
            "method_agreement",
            agree >= cfg.agreement_fraction,
            Some(agree),
            format!(">= {} of paths within {}", cfg.agreement_fraction, cfg.agreement_tol),
        ));
    }
    Ok(Outcome {
        samples,
        results,
        gates,
    })
}

/// Eigenvalue Laplace sums of `H_n` against Feynman–Kac trace estimates on
/// the coupled noise path.
pub fn trace<E: Executor>(cfg: &TraceConfig, seed: u64, exec: &E) -> Result<Outcome, RunError> {
    let family: PotentialFamily = cfg.family.parse()?;
    let spec = PotentialSpec::critical(family, cfg.sigma)?;
    require(cfg.realizations > 0, "realizations must be positive")?;
    let opts = CouplingOptions {
        x_grid: cfg.x_grid,
        replicas: cfg.replicas,
        bridge: BridgeOptions {
            steps: cfg.steps,
            crossing_correction: cfg.crossing_correction,
            control_variate: cfg.control_variate,
        },
    };
    let mut sizes = vec![cfg.n];
    sizes.extend(cfg.trend_n);
    let mut samples = Table::new(&["n", "realization", "eigen_sum", "trace", "stderr", "z"]);
    let mut medians = Vec::new();
    let mut gap_medians = Vec::new();
    let mut worst_z = 0.0f64;
    for (channel, &n) in sizes.iter().enumerate() {
        let root = RngStream::new(seed, channel as u64);
        let mut gaps = Vec::with_capacity(cfg.realizations);
        for r in 0..cfg.realizations {
            let rep = pathwise_coupling_check(n, cfg.sigma, cfg.t, &spec, &opts, root.substream(r as u64), exec)?;
            let z = rep.discrepancy() / rep.trace_stderr;
            if channel == 0 {
                worst_z = worst_z.max(z);
            }
            gaps.push(rep.discrepancy());
            samples.push(vec![
                n.to_string(),
                r.to_string(),
                fmt_f64(rep.eigen_sum),
                fmt_f64(rep.trace),
                fmt_f64(rep.trace_stderr),
                fmt_f64(z),
            ]);
        }
        gap_medians.push(median(&gaps));
        medians.push(json!({ "n": n, "median_discrepancy": median(&gaps) }));
    }
    let mut gates = vec![Gate::new(
        "discrepancy_z",
        worst_z < cfg.max_z,
        Some(worst_z),
        format!("every |eigen_sum - trace| < {} stderr", cfg.max_z),
    )];
    if let Some(trend_n) = cfg.trend_n {
        let (main, other) = (gap_medians[0], gap_medians[1]);
        gates.push(Gate::new(
            "trend",
            main < other,
            Some(main),
            format!("< median at n = {trend_n} ({other})"),
        ));
    }
    Ok(Outcome {
        samples,
        results: json!({ "medians": medians, "max_z": worst_z }),
        gates,
    })
}

/// Theta series against Monte Carlo free-bridge survival.
pub fn theta<E: Executor>(cfg: &ThetaConfig, seed: u64, exec: &E) -> Result<Outcome, RunError> {
    require(!cfg.t_values.is_empty(), "t_values must be nonempty")?;
    let opts = BridgeOptions {
        steps: cfg.steps,
        crossing_correction: cfg.crossing_correction,
        control_variate: false,
    };
    let mut samples = Table::new(&["t", "lhs", "rhs", "stderr", "z"]);
    let mut gates = Vec::new();
    let mut checks = Vec::new();
    for (j, &t) in cfg.t_values.iter().enumerate() {
        let c = theta_check(t, cfg.replicas, &opts, RngStream::new(seed, j as u64), exec)?;
        let z = (c.lhs - c.rhs).abs() / c.stderr;
        samples.push(vec![fmt_f64(t), fmt_f64(c.lhs), fmt_f64(c.rhs), fmt_f64(c.stderr), fmt_f64(z)]);
        checks.push(json!({ "t": t, "lhs": c.lhs, "rhs": c.rhs, "stderr": c.stderr, "z": z }));
        gates.push(Gate::new(
            &format!("theta_t{t}"),
            c.within(cfg.max_z),
            Some(z),
            format!("|lhs - rhs| < {} stderr", cfg.max_z),
        ));
    }
    Ok(Outcome {
        samples,
        results: json!({ "checks": checks }),
        gates,
    })
}

/// Shifted-mean matrix edge against the stochastic Airy operator.
pub fn tw<E: Executor>(cfg: &TwConfig, seed: u64, exec: &E) -> Result<Outcome, RunError> {
    require(cfg.replicas > 0, "replicas must be positive")?;
    let spec = PotentialSpec::critical(PotentialFamily::Gaussian, 2.0 / cfg.beta.sqrt())?;
    let op = OperatorConfig::new(cfg.n, spec).with_beta(cfg.beta).with_m(cfg.m);
    let m2 = (cfg.m as f64).powi(2);
    let matrix_root = RngStream::new(seed, 0);
    let matrix_side = collect(exec.map(cfg.replicas, |i| {
        let draws = sample_potential(&spec, cfg.n, matrix_root.substream(i as u64))?;
        let matrix = build_hn_beta(&op, &draws)?;
        let top = eigen_extreme(&matrix, 1, Side::Largest, default_tol(&matrix) * 1e-2)?;
        Ok(m2 * (2.0 - top[0]))
    }))?;
    let sao_root = RngStream::new(seed, 1);
    let sao_side = collect(exec.map(cfg.replicas, |i| {
        Ok(sao_eigen_sample(cfg.beta, 1, cfg.sao_length, cfg.sao_m, Some(sao_root.substream(i as u64)))?[0])
    }))?;
    let airy = sao_eigen_sample(cfg.beta, 1, cfg.sao_length, cfg.sao_m, None)?[0];
    let ks = ks_distance(&matrix_side, &sao_side)?;

    let mut samples = Table::new(&["source", "replica", "value"]);
    for (source, values) in [("hn_beta", &matrix_side), ("sao", &sao_side)] {
        for (i, v) in values.iter().enumerate() {
            samples.push(vec![source.into(), i.to_string(), fmt_f64(*v)]);
        }
    }
    Ok(Outcome {
        samples,
        results: json!({
            "ks": ks,
            "hn_beta": Stats::of(&matrix_side),
            "sao": Stats::of(&sao_side),
            "airy_ground_state": airy,
        }),
        gates: vec![
            Gate::below("ks", ks, cfg.ks_max),
            Gate::new(
                "airy_ground_state",
                (airy - AIRY_GROUND_STATE).abs() < cfg.airy_tol,
                Some(airy),
                format!("within {} of {AIRY_GROUND_STATE}", cfg.airy_tol),
            ),
        ],
    })
}

/// Leading-order tail coefficient predicted for `-Λ₀(σ)`.
pub fn tail_target(side: TailSide, sigma: f64) -> (f64, f64) {
    match side {
        TailSide::Right => (1.5, 8.0 / (3.0 * sigma * sigma)),
        TailSide::Left => (2.0, 1.0 / (2.0 * sigma * sigma)),
    }
}

/// Tail probabilities of `-Λ₀` and a fit of their decay exponent.
pub fn tails<E: Executor>(cfg: &TailsConfig, seed: u64, exec: &E) -> Result<Outcome, RunError> {
    let side: TailSide = cfg.side.parse()?;
    require(!cfg.a_grid.is_empty(), "a_grid must be nonempty")?;
    let (default_exponent, target) = tail_target(side, cfg.sigma);
    let exponent = cfg.exponent.unwrap_or(default_exponent);
    let mut grid = cfg.a_grid.clone();
    grid.sort_by(f64::total_cmp);
    let estimates = rso_tail_curve(cfg.sigma, &grid, side, cfg.replicas, cfg.grid, RngStream::new(seed, 0), exec)?;

    let mut samples = Table::new(&["a", "successes", "replicas", "estimate", "stderr", "ci_high", "low_information"]);
    for e in &estimates {
        samples.push(vec![
            fmt_f64(e.a),
            e.successes.to_string(),
            e.replicas.to_string(),
            fmt_f64(e.estimate),
            fmt_f64(e.stderr),
            fmt_f64(e.ci_high),
            e.low_information.to_string(),
        ]);
    }
    let monotone = estimates.windows(2).all(|w| w[1].estimate <= w[0].estimate);
    let mut gates = vec![Gate::new("monotone", monotone, None, "p nonincreasing in a")];

    let points: Vec<TailPoint> = estimates
        .iter()
        .map(|e| TailPoint {
            a: e.a,
            p: e.estimate,
            replicas: Some(e.replicas),
        })
        .collect();
    let fit = match tail_fit(&points, exponent, RngStream::new(seed, 1)) {
        Ok(fit) => {
            gates.push(Gate::new("fit", true, Some(fit.coefficient), "fit exists"));
            let lo = cfg.coefficient_min.unwrap_or(f64::NEG_INFINITY);
            let hi = cfg.coefficient_max.unwrap_or(f64::INFINITY);
            if cfg.coefficient_min.is_some() || cfg.coefficient_max.is_some() {
                gates.push(Gate::new(
                    "coefficient",
                    (lo..=hi).contains(&fit.coefficient),
                    Some(fit.coefficient),
                    format!("in [{lo}, {hi}]"),
                ));
            }
            json!({
                "exponent": fit.exponent,
                "coefficient": fit.coefficient,
                "intercept": fit.intercept,
                "ci_low": fit.ci_low,
                "ci_high": fit.ci_high,
            })
        }
        Err(Error::Fit(reason)) => {
            gates.push(Gate::new("fit", false, None, format!("fit exists ({reason})")));
            Value::Null
        }
        Err(e) => return Err(e.into()),
    };
    Ok(Outcome {
        samples,
        results: json!({
            "side": side.name(),
            "exponent": exponent,
            "target_coefficient": target,
            "fit": fit,
        }),
        gates,
    })
}
