//! End-to-end acceptance checks. One line per criterion; exits non-zero if any fails.
//!
//! The full-scale criteria (1 to 4) use the default scenario: 20 subnetworks,
//! 5 runs of 20000 slots, M = 300, seed 1. Expect several minutes in total.

use std::collections::BTreeMap;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use aoi_cli::{run_command, ExperimentSpec, SweepAxis};
use aoi_core::brr::{fit_posterior, polynomial2, BrrParams, Sample, SampleWindow};
use aoi_core::engine::{compute_metrics, default_grid};
use aoi_core::{run_policy, MetricsSummary, PolicyKind, RunOptions, ScenarioConfig};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TAU: f64 = 0.003;
const DELTA: f64 = 0.010;

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Check {
    Check { pass, detail }
}

/// Full-scale results keyed by (policy, sampling rate, M, alpha_i bits).
#[derive(Default)]
struct Runs {
    cache: BTreeMap<(PolicyKind, u64, usize, u64), MetricsSummary>,
}

impl Runs {
    fn get(&mut self, policy: PolicyKind, rate: f64, m: usize, alpha_i: f64) -> MetricsSummary {
        // Greedy ignores alpha_i, so share its entry.
        let alpha_key = if policy == PolicyKind::Proposed { alpha_i } else { 0.0 };
        let key = (policy, rate.to_bits(), m, alpha_key.to_bits());
        if let Some(s) = self.cache.get(&key) {
            return s.clone();
        }
        let cfg = ScenarioConfig { sampling_rate_bps: rate, window_size: m, alpha_i, policy, ..Default::default() };
        let sc = cfg.validate().expect("default scenario is valid");
        let t0 = Instant::now();
        let s = run_policy(&sc, policy, sc.cfg.seed, RunOptions::default()).expect("metrics").summary;
        eprintln!(
            "  ran {policy} rate={rate:e} M={m} alpha_i={alpha_i}: violation={:.3e} rmse={:?} ({:.0} s)",
            s.violation_probability,
            s.rmse,
            t0.elapsed().as_secs_f64()
        );
        self.cache.insert(key, s.clone());
        s
    }

    fn viol(&mut self, policy: PolicyKind, rate: f64) -> f64 {
        self.get(policy, rate, 300, 10.0).violation_probability
    }
}

fn baseline_dominance(runs: &mut Runs) -> Check {
    let d = runs.viol(PolicyKind::Default, 1e6);
    let p = runs.viol(PolicyKind::Proposed, 1e6);
    let ratio = p / d;
    check(ratio <= 0.10, format!("proposed {p:.3e} / default {d:.3e} = {ratio:.3} (need <= 0.10)"))
}

fn ccdf_ordering(runs: &mut Runs) -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for rate in [1e6, 2e6] {
        let p = runs.viol(PolicyKind::Proposed, rate);
        let g = runs.viol(PolicyKind::Greedy, rate);
        let d = runs.viol(PolicyKind::Default, rate);
        let ordered = p <= g && g <= d;
        ok &= ordered;
        parts.push(format!("{}Mbps p={p:.3e} g={g:.3e} d={d:.3e}{}", rate / 1e6, if ordered { "" } else { " (order broken)" }));
    }
    for policy in PolicyKind::ALL {
        let (lo, hi) = (runs.viol(policy, 1e6), runs.viol(policy, 2e6));
        if hi < lo {
            ok = false;
            parts.push(format!("{policy}: 2Mbps {hi:.3e} < 1Mbps {lo:.3e}"));
        }
    }
    check(ok, parts.join("; "))
}

fn dataset_size_trend(runs: &mut Runs) -> Check {
    let rmse: Vec<(usize, f64)> = [50, 100, 200, 400, 500]
        .into_iter()
        .map(|m| (m, runs.get(PolicyKind::Proposed, 1e6, m, 10.0).rmse.expect("learning policy has rmse")))
        .collect();
    let at = |m: usize| rmse.iter().find(|(k, _)| *k == m).unwrap().1;
    let pass = at(200) < at(50) && at(500) >= at(200);
    let list: Vec<String> = rmse.iter().map(|(m, r)| format!("M={m}:{:.4}ms", r * 1e3)).collect();
    check(pass, format!("{} (need rmse(200) < rmse(50) and rmse(500) >= rmse(200))", list.join(" ")))
}

fn exploration_tradeoff(runs: &mut Runs) -> Check {
    let v: Vec<(f64, f64)> = [0.0, 1.0, 10.0, 100.0, 1000.0]
        .into_iter()
        .map(|a| {
            let policy = if a == 0.0 { PolicyKind::Greedy } else { PolicyKind::Proposed };
            (a, runs.get(policy, 1e6, 300, a).violation_probability)
        })
        .collect();
    let (v0, v1000) = (v[0].1, v[4].1);
    let best = v[1..4].iter().copied().filter(|&(_, x)| x < v0 && x < v1000).min_by(|a, b| a.1.total_cmp(&b.1));
    let list: Vec<String> = v.iter().map(|(a, x)| format!("{a}:{x:.3e}")).collect();
    let verdict = match best {
        Some((a, _)) => format!("alpha_i*={a}"),
        None => "no interior alpha_i beats both ends".into(),
    };
    check(best.is_some(), format!("{} -> {verdict}", list.join(" ")))
}

fn brr_oracle() -> Check {
    const DIM: usize = 27;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let params = BrrParams { lambda: 1.0, sigma2_floor: (0.01 * TAU).powi(2), target_scale: TAU };
    let sample = |rng: &mut ChaCha8Rng| {
        let raw: Vec<f64> = (0..6).map(|i| rng.random::<f64>() * if i == 0 { 4.0 } else { 1.0 }).collect();
        let features = polynomial2(&raw);
        let y = TAU * (1.0 + rng.random::<f64>() * 3.0).floor();
        Sample { raw, features, y }
    };
    let (mut worst_w, mut worst_s) = (0.0f64, 0.0f64);
    let mut windows = Vec::new();
    for _ in 0..100 {
        let size = rng.random_range(1..=300);
        let pushes = if rng.random::<bool>() { size } else { size + rng.random_range(0..700) };
        let mut window = SampleWindow::new(size, DIM);
        for _ in 0..pushes {
            window.push(sample(&mut rng));
        }
        let kept: Vec<Sample> = window.iter().cloned().collect();
        let n = kept.len();
        let phi = DMatrix::from_fn(n, DIM, |i, j| kept[i].features[j]);
        let y = DVector::from_fn(n, |i, _| kept[i].y / TAU);
        let mean = DVector::from_fn(DIM, |j, _| phi.column(j).mean());
        let phi_c = DMatrix::from_fn(n, DIM, |i, j| phi[(i, j)] - mean[j]);
        let y_c = y.add_scalar(-y.mean());
        let a = DMatrix::<f64>::identity(DIM, DIM) * params.lambda + phi_c.transpose() * &phi_c;
        let sigma_w = a.lu().try_inverse().expect("invertible");
        let w = &sigma_w * phi_c.transpose() * y_c;

        let post = fit_posterior(&window, &params).expect("fit");
        let rel = |got: &[f64], want: &[f64]| {
            let num: f64 = got.iter().zip(want).map(|(g, w)| (g - w).powi(2)).sum::<f64>().sqrt();
            let den = want.iter().map(|w| w * w).sum::<f64>().sqrt();
            if den == 0.0 { num } else { num / den }
        };
        worst_w = worst_w.max(rel(post.w_hat(), w.as_slice()));
        worst_s = worst_s.max(rel(&post.sigma_w(), sigma_w.transpose().as_slice()));
        windows.push(post);
    }
    let mut below = 0;
    for i in 0..1000 {
        let post = &windows[i % windows.len()];
        let raw: Vec<f64> = (0..6).map(|_| rng.random::<f64>() * 6.0 - 1.0).collect();
        let pred = post.predict(&polynomial2(&raw)).expect("predict");
        if pred.var < post.sigma2() {
            below += 1;
        }
    }
    let pass = worst_w <= 1e-8 && worst_s <= 1e-8 && below == 0;
    check(pass, format!("max rel err w={worst_w:.1e} sigma_w={worst_s:.1e}; var < sigma2 at {below}/1000 queries"))
}

fn dynamics_invariants() -> Check {
    let cfg = ScenarioConfig { horizon_slots: 1000, num_runs: 1, sampling_rate_bps: 2e6, ..Default::default() };
    let sc = cfg.validate().expect("valid");
    let mut bad = BTreeMap::<&str, usize>::new();
    let mut rows_checked = 0;
    let mut summaries = Vec::new();
    for policy in PolicyKind::ALL {
        let out = run_policy(&sc, policy, 3, RunOptions { collect_trace: true }).expect("metrics");
        let trace = out.trace.expect("trace requested");
        for r in &trace {
            rows_checked += 1;
            let (before, after) = ((r.aoi / TAU).round() as u64, (r.next_aoi / TAU).round() as u64);
            let reset = r.freshest_delivered.map(|g| r.slot + 1 - g);
            let ok_aoi = after == before + 1 || Some(after) == reset;
            if !ok_aoi || (r.next_aoi - after as f64 * TAU).abs() > 1e-15 {
                *bad.entry("aoi recursion").or_default() += 1;
            }
            if r.backlog_before + r.arrivals != r.delivered + r.backlog_after {
                *bad.entry("queue conservation").or_default() += 1;
            }
        }
        let post: Vec<_> = trace.into_iter().filter(|r| r.slot >= sc.cfg.warmup_slots as u64).collect();
        let m = compute_metrics(&post, DELTA, default_grid(TAU, 50, DELTA)).expect("non-empty");
        if m != out.summary {
            *bad.entry("trace metrics match streaming metrics").or_default() += 1;
        }
        summaries.push(m);
    }
    for s in &summaries {
        if s.ccdf.windows(2).any(|w| w[1].1 > w[0].1) || s.ccdf.iter().any(|&(_, p)| !(0.0..=1.0).contains(&p)) {
            *bad.entry("ccdf monotone").or_default() += 1;
        }
        if s.ccdf_at(DELTA) != Some(s.violation_probability) {
            *bad.entry("violation = ccdf(delta)").or_default() += 1;
        }
    }
    let detail = if bad.is_empty() {
        format!("{rows_checked} slot rows over 3 policies, all invariants hold")
    } else {
        format!("violations: {bad:?}")
    };
    check(bad.is_empty(), detail)
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().expect("tempdir");
    let base = ScenarioConfig { horizon_slots: 600, num_runs: 3, ..Default::default() };
    let mut spec = ExperimentSpec::new(base, dir.path().join("a"));
    spec.policies = PolicyKind::ALL.to_vec();
    spec.sweep = SweepAxis::SamplingRate(vec![1e6, 2e6]);
    let mut sink = Vec::new();
    run_command(&spec, &mut sink).expect("first run");
    spec.out_dir = dir.path().join("b");
    run_command(&spec, &mut sink).expect("second run");
    let same = |f: &str| fs::read(dir.path().join("a").join(f)).unwrap() == fs::read(dir.path().join("b").join(f)).unwrap();
    let (s, c) = (same("summary.csv"), same("ccdf.csv"));
    check(s && c, format!("summary.csv identical: {s}, ccdf.csv identical: {c}"))
}

fn main() -> ExitCode {
    let mut runs = Runs::default();
    let criteria: Vec<(&str, Box<dyn FnOnce(&mut Runs) -> Check>)> = vec![
        ("baseline dominance (proposed <= 10% of default, 1 Mbps)", Box::new(baseline_dominance)),
        ("ccdf ordering at 10 ms and rate monotonicity", Box::new(ccdf_ordering)),
        ("dataset-size trend of rmse", Box::new(dataset_size_trend)),
        ("exploration trade-off over alpha_i", Box::new(exploration_tradeoff)),
        ("brr matches dense solve", Box::new(|_| brr_oracle())),
        ("dynamics invariants over 1000 slots", Box::new(|_| dynamics_invariants())),
        ("byte-identical csv for identical config and seed", Box::new(|_| determinism())),
    ];
    let mut failed = 0;
    let mut lines = Vec::new();
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let c = f(&mut runs);
        let line = format!("criterion {} {}: {name}: {}", i + 1, if c.pass { "PASS" } else { "FAIL" }, c.detail);
        println!("{line}");
        lines.push(line);
        failed += usize::from(!c.pass);
    }
    println!("\nacceptance summary");
    for l in &lines {
        println!("{l}");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion/criteria failed");
        ExitCode::FAILURE
    }
}
