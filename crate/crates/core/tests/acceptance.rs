//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test --release --test acceptance`.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mint_uwb::association::{assign, AssociationProblem};
use mint_uwb::bounds::{effective_bandwidth, ranging_crlb};
use mint_uwb::estimation::{estimate_klos, extract_mpcs, relative_threshold};
use mint_uwb::geometry::{generate_vas, Point2D};
use mint_uwb::harness::{
    apply_obstruction, RunFilter, Scenario, ScenarioConfig, Tracker, RANGING_CDF_FILE, SUMMARY_FILE, TRACE_FILE,
};
use mint_uwb::waveform::{frame_rng, synthesize, DiffuseModel, FrameLayout, Mpc, Pulse};
use mint_uwb::SPEED_OF_LIGHT;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn median(v: &[f64]) -> f64 {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn pulse(tp: f64) -> Pulse {
    Pulse::with_default_grid(tp, 0.5, 7e9).unwrap()
}

fn c1_assignment() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let dyadic = |rng: &mut ChaCha8Rng| rng.gen_range(0..4096) as f64 / 256.0;
    let mut elapsed = Duration::ZERO;
    let mut mismatches = 0;
    for _ in 0..1000 {
        let k = rng.gen_range(0..=7);
        let k_hat = rng.gen_range(0..=9);
        let expected: Vec<f64> = (0..k).map(|_| dyadic(&mut rng)).collect();
        let measured: Vec<f64> = (0..k_hat).map(|_| dyadic(&mut rng)).collect();
        let dc = rng.gen_range(1..=8) as f64 / 8.0;
        let problem =
            AssociationProblem::new(measured.clone(), expected.iter().copied().enumerate().collect(), dc).unwrap();
        let t0 = Instant::now();
        let c = assign(&problem);
        elapsed += t0.elapsed();
        if c.cost != common::brute_force_cost(&measured, &expected, dc) {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0 && elapsed < Duration::from_secs(5),
        format!("{mismatches}/1000 cost mismatches, assign time {elapsed:.2?} (limit 5 s)"),
    )
}

fn c2_geometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    let mut count_mismatch = 0;
    for _ in 0..20 {
        let n = rng.gen_range(1..=8);
        let plan = common::random_plan(&mut rng, n);
        let bs = Point2D::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
        let got = generate_vas(&plan, bs, 0, 2);
        let want = common::enumerate_vas(&plan, bs, 2);
        if got.len() != want.len() {
            count_mismatch += 1;
            continue;
        }
        for (va, (seq, pos)) in got.iter().zip(&want) {
            if &va.mirror_walls != seq {
                count_mismatch += 1;
            }
            worst = worst.max(va.position.distance(*pos));
        }
    }
    outcome(
        count_mismatch == 0 && worst <= 1e-9,
        format!("20 plans, {count_mismatch} structural mismatches, max position error {worst:.2e} m (limit 1e-9)"),
    )
}

fn c3_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let durations = [0.2e-9, 0.5e-9, 1e-9, 2e-9, 4e-9];
    let mut failures = 0;
    let (mut worst_delay, mut worst_amp): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let p = pulse(durations[rng.gen_range(0..durations.len())]);
        let k = rng.gen_range(1..=20);
        let (mpcs, layout) = common::separable_channel(&mut rng, &p, k, 1.5);
        let frame = common::noiseless_frame(&mpcs, &p, layout);
        let peak = frame.samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
        let est = extract_mpcs(&frame, &p, 20, relative_threshold(peak, 0.0, 0.02));
        if est.len() != k {
            failures += 1;
            continue;
        }
        let dt = p.sample_interval();
        let mut ok = true;
        for (m, (tau, a)) in mpcs.iter().zip(est.delays.iter().zip(&est.amplitudes)) {
            let de = (tau - m.delay).abs();
            let ae = (a - m.amplitude).norm() / m.amplitude.norm();
            worst_delay = worst_delay.max(de / dt);
            worst_amp = worst_amp.max(ae);
            ok &= de <= dt && ae <= 1e-3;
        }
        failures += usize::from(!ok);
    }
    outcome(
        failures == 0,
        format!(
            "{failures}/100 channels failed; worst delay error {worst_delay:.3} grid steps (limit 1), \
             worst relative amplitude error {worst_amp:.2e} (limit 1e-3)"
        ),
    )
}

fn c4_crlb() -> Outcome {
    let p = pulse(0.5e-9);
    let beta = effective_bandwidth(&p);
    let dt = p.sample_interval();
    let delay = 20e-9 + 0.37 * dt;
    let layout = FrameLayout::new(0.0, 40e-9);
    let alpha = Complex64::from_polar(1.0, 0.3);
    let mut details = Vec::new();
    let mut pass = true;
    for snr_db in [25.0, 35.0] {
        let snr = 10f64.powf(snr_db / 10.0);
        let n0 = alpha.norm_sqr() / snr;
        let errors: Vec<f64> = (0..500)
            .map(|trial| {
                let mpc = Mpc {
                    delay,
                    amplitude: alpha,
                    va_id: None,
                };
                let mut rng = frame_rng(404 + snr_db as u64, trial, 0);
                let frame = synthesize(&[mpc], &DiffuseModel::none(), n0, &p, layout, &mut rng).unwrap();
                let est = extract_mpcs(&frame, &p, 1, 0.0);
                (est.delays[0] - delay) * SPEED_OF_LIGHT
            })
            .collect();
        let mse = errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64;
        let bound = ranging_crlb(snr, beta);
        let ratio_db = 10.0 * (mse / bound).log10();
        pass &= ratio_db.abs() <= 3.0;
        details.push(format!("{snr_db} dB: MSE/CRLB = {ratio_db:+.2} dB"));
    }
    outcome(pass, format!("{} (limit 3 dB)", details.join(", ")))
}

/// Per (tracker, Tp, obstructed): RMSE and mean HDOP of each seed.
type Sweep = BTreeMap<(Tracker, usize, bool), Vec<(f64, f64)>>;

fn sweep(seeds: u64) -> Sweep {
    let trackers = vec![Tracker::MintGada, Tracker::EkfMl, Tracker::EkfJbsf];
    let mut out = Sweep::new();
    for seed in 1..=seeds {
        let config = ScenarioConfig {
            seed,
            ..ScenarioConfig::default()
        };
        let pulses = config.pulses.clone();
        let s = Scenario::new(config).unwrap();
        let runs = [
            RunFilter {
                trackers: trackers.clone(),
                pulses: vec![],
                obstruction: vec![false],
            },
            RunFilter {
                trackers: trackers.clone(),
                pulses: vec![0.5e-9],
                obstruction: vec![true],
            },
        ];
        for filter in &runs {
            for r in s.run(filter).unwrap() {
                let p = pulses.iter().position(|&t| t == r.pulse).unwrap();
                out.entry((r.tracker, p, r.obstructed))
                    .or_default()
                    .push((r.metrics.rms_error, r.metrics.mean_hdop.unwrap_or(f64::NAN)));
            }
        }
    }
    out
}

fn rmse(s: &Sweep, t: Tracker, p: usize, obstructed: bool) -> f64 {
    median(&s[&(t, p, obstructed)].iter().map(|x| x.0).collect::<Vec<_>>())
}

fn hdop(s: &Sweep, t: Tracker, p: usize, obstructed: bool) -> f64 {
    median(&s[&(t, p, obstructed)].iter().map(|x| x.1).collect::<Vec<_>>())
}

fn c5_trend(s: &Sweep) -> Outcome {
    let gada: Vec<f64> = (0..5).map(|p| rmse(s, Tracker::MintGada, p, false)).collect();
    let monotone = gada.windows(2).all(|w| w[0] <= w[1]);
    let (g, m, j) = (
        rmse(s, Tracker::MintGada, 1, false),
        rmse(s, Tracker::EkfMl, 1, false),
        rmse(s, Tracker::EkfJbsf, 1, false),
    );
    let fmt: Vec<String> = gada.iter().map(|v| format!("{v:.4}")).collect();
    outcome(
        monotone && g < m && m < j,
        format!(
            "MINT-GADA RMSE over Tp 0.2..4 ns [{}] m; at 0.5 ns GADA {g:.4} < ML {m:.4} < JBSF {j:.4} m",
            fmt.join(", ")
        ),
    )
}

fn c6_robustness(s: &Sweep) -> Outcome {
    let rel = |t| rmse(s, t, 1, true) / rmse(s, t, 1, false) - 1.0;
    let (g, j) = (rel(Tracker::MintGada), rel(Tracker::EkfJbsf));
    outcome(
        g < 0.15 && j > 0.30,
        format!(
            "Tp 0.5 ns relative RMSE increase: MINT-GADA {:+.1}% (limit < 15%), EKF-JBSF {:+.1}% (limit > 30%)",
            100.0 * g,
            100.0 * j
        ),
    )
}

fn c7_hdop(s: &Sweep) -> Outcome {
    let mut cases: Vec<(usize, bool)> = (0..5).map(|p| (p, false)).collect();
    cases.push((1, true));
    let mut pass = true;
    let mut details = Vec::new();
    for (p, o) in cases {
        let (g, m) = (hdop(s, Tracker::MintGada, p, o), hdop(s, Tracker::EkfMl, p, o));
        pass &= g < m;
        details.push(format!("{}{}: {g:.2} vs {m:.2}", [0.2, 0.5, 1.0, 2.0, 4.0][p], if o { " obstr." } else { "" }));
    }
    outcome(pass, format!("MINT-GADA vs EKF-ML average HDOP per Tp [ns]: {}", details.join("; ")))
}

fn c8_klos() -> Outcome {
    let bs = Point2D::new(12.0, 2.6);
    let agent = Point2D::new(8.0, 1.4);
    let mut config = ScenarioConfig {
        base_stations: vec![bs],
        waypoints: vec![agent, Point2D::new(8.1, 1.4)],
        ..ScenarioConfig::default()
    };
    config.obstruction.segments = vec![[Point2D::new(9.0, 1.6), Point2D::new(9.0, 1.8)]];
    let p = config.pulse_index(0.5e-9).unwrap();
    let pulse = config.pulse(p).unwrap();
    let layout = config.layout(&pulse);
    let mut drops = Vec::new();
    let mut other_paths_hit = 0;
    for seed in 1..=200 {
        config.seed = seed;
        let s = Scenario::new(config.clone()).unwrap();
        let clear = s.frame_specs(false).unwrap().swap_remove(0);
        let mut blocked = vec![clear.clone()];
        let hit = apply_obstruction(&mut blocked, &s.built_vas, &s.built_plan, &config.obstruction);
        other_paths_hit += hit.saturating_sub(1);
        let k = |spec: &mint_uwb::waveform::FrameSpec| {
            let f = spec.synthesize(&pulse, config.noise_psd, layout, seed).unwrap();
            estimate_klos(&f, &pulse, config.prelos_window).unwrap()
        };
        drops.push(k(&clear) - k(&blocked[0]));
    }
    let mean = drops.iter().sum::<f64>() / drops.len() as f64;
    outcome(
        (mean - 10.0).abs() <= 1.0 && other_paths_hit == 0,
        format!("mean K_LOS drop {mean:.2} dB over 200 frames (limit 10 +- 1 dB), non-LOS paths attenuated: {other_paths_hit}"),
    )
}

fn run_cli(out: &Path) -> Duration {
    let t0 = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_mint"))
        .args(["run", "--out"])
        .arg(out)
        .stdout(std::process::Stdio::null())
        .status()
        .expect("mint runs");
    assert!(status.success(), "mint run failed: {status}");
    t0.elapsed()
}

fn c9_c10_cli() -> (Outcome, Outcome) {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let first = run_cli(&a);
    run_cli(&b);
    let mut differing = Vec::new();
    for name in [SUMMARY_FILE, TRACE_FILE, RANGING_CDF_FILE] {
        if std::fs::read(a.join(name)).unwrap() != std::fs::read(b.join(name)).unwrap() {
            differing.push(name);
        }
    }
    let rows = std::fs::read_to_string(a.join(SUMMARY_FILE)).unwrap().lines().count() - 2;
    let c9 = outcome(
        differing.is_empty(),
        format!("two `mint run` invocations, differing files: {differing:?}"),
    );
    let c10 = outcome(
        first < Duration::from_secs(600) && rows == 40,
        format!(
            "full sweep ({rows} tracker x Tp x obstruction combinations, 220 positions) took {first:.1?} on {} thread(s) (limit 10 min)",
            rayon::current_num_threads()
        ),
    );
    (c9, c10)
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |n: u32, name: &'static str, o: Outcome| {
        println!("criterion {n:2} {:4} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, name, o));
    };
    report(1, "assignment optimality", c1_assignment());
    report(2, "geometry oracle", c2_geometry());
    report(3, "estimation round trip", c3_round_trip());
    report(4, "CRLB consistency", c4_crlb());
    let s = sweep(10);
    report(5, "trend reproduction", c5_trend(&s));
    report(6, "robustness reproduction", c6_robustness(&s));
    report(7, "HDOP ordering", c7_hdop(&s));
    report(8, "obstruction calibration", c8_klos());
    let (c9, c10) = c9_c10_cli();
    report(9, "determinism", c9);
    report(10, "full sweep runtime", c10);
    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
