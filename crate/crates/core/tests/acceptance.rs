//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

mod common;

use std::f64::consts::{FRAC_PI_4, PI};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use nalgebra::Vector3;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use steerlab::assemblage::{build_assemblage, effect, Assemblage, Direction, MeasurementSetting};
use steerlab::criteria::{
    canonical_settings, classify_three_settings, lhs_bound_c, linear_s, one_way_bounds,
    unsteerable_b_to_a_infinite, RegionLabel,
};
use steerlab::lhs::{direct_radius, feasible_at, min_max_radius};
use steerlab::qubit::{identity2, operator_from_parts, rotation_of_unitary, Party, TwoQubitState};
use steerlab::scan::{scan_region, Range, ScanSpec, Scenario};
use steerlab::search::{steering_radius, SearchConfig};
use steerlab::stats::{bootstrap_radius, simulate_counts};
use steerlab::states::{make_family_state, FamilyParams};

const THETAS: [f64; 5] = [PI / 24.0, PI / 12.0, PI / 8.0, PI / 6.0, 5.0 * PI / 24.0];

fn family(p: f64, theta: f64) -> TwoQubitState {
    make_family_state(FamilyParams::new(p, theta).unwrap())
}

fn solver_r(rho: &TwoQubitState, settings: &[MeasurementSetting], side: Direction) -> f64 {
    let asm = build_assemblage(rho, settings, side.measuring()).unwrap();
    min_max_radius(&asm, 1e-7).unwrap().r
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn boundary(k: usize) -> Outcome {
    let settings = canonical_settings(k).unwrap();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for &theta in &THETAS {
        let p = one_way_bounds(k, theta).1;
        let r = solver_r(&family(p, theta), &settings, Direction::BtoA);
        worst = worst.max((r - 1.0).abs());
        parts.push(format!("{r:.6}"));
    }
    outcome(worst <= 1e-3, format!("r = [{}], max |r - 1| = {worst:.2e}", parts.join(", ")))
}

fn werner_thresholds() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, expected) in [(2usize, 0.5f64.sqrt()), (3, (1.0f64 / 3.0).sqrt())] {
        let settings = canonical_settings(k).unwrap();
        let r = |p: f64| solver_r(&family(p, FRAC_PI_4), &settings, Direction::AtoB);
        let (mut lo, mut hi) = (0.3, 1.0);
        if !(r(lo) < 1.0 && r(hi) > 1.0) {
            return outcome(false, format!("k={k}: no sign change in [0.3, 1]"));
        }
        while hi - lo > 1e-6 {
            let mid = 0.5 * (lo + hi);
            if r(mid) > 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let crossing = 0.5 * (lo + hi);
        pass &= (crossing - expected).abs() <= 1e-3;
        parts.push(format!("k={k}: p* = {crossing:.6} (expected {expected:.6})"));
    }
    outcome(pass, parts.join("; "))
}

/// Equal-weight ensemble on the corners of the square/cube spanned by the
/// diagonal of `T`, checked member by member against the assemblage.
fn corner_ensemble_reproduces(asm: &Assemblage, t_diag: &[f64]) -> f64 {
    let k = t_diag.len();
    let weight = 1.0 / (1u32 << k) as f64;
    let mut worst: f64 = 0.0;
    for j in 0..k {
        for a in 0..2u8 {
            let mut sum = steerlab::qubit::ComplexMatrix2::zeros();
            for lambda in 0..1usize << k {
                if ((lambda >> j) & 1) as u8 != a {
                    continue;
                }
                let mut r = Vector3::zeros();
                for (i, t) in t_diag.iter().enumerate() {
                    r[i] = if (lambda >> i) & 1 == 0 { *t } else { -*t };
                }
                sum += operator_from_parts(weight, &(r * weight));
            }
            worst = worst.max(common::max_abs_diff2(&sum, &asm.member(j, a).matrix));
        }
    }
    worst
}

fn bell_radii() -> Outcome {
    let bell = family(1.0, FRAC_PI_4);
    let cfg = SearchConfig {
        restarts: 32,
        ..SearchConfig::default()
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, expected) in [(2usize, 2f64.sqrt()), (3, 3f64.sqrt())] {
        for side in [Direction::AtoB, Direction::BtoA] {
            let rep = steering_radius(&bell, k, side, &cfg).unwrap();
            // Canonical x̂, ŷ, ẑ map to T = diag(1, −1, 1); for k = 2 the axes are x̂, ẑ.
            let diag: Vec<f64> = if k == 2 { vec![1.0, 1.0] } else { vec![1.0, -1.0, 1.0] };
            let asm = build_assemblage(&bell, &canonical_settings(k).unwrap(), side.measuring()).unwrap();
            let corner = if k == 2 {
                // the square lies in the x–z plane
                let mut worst: f64 = 0.0;
                for j in 0..2 {
                    for a in 0..2u8 {
                        let mut sum = steerlab::qubit::ComplexMatrix2::zeros();
                        for lambda in 0..4usize {
                            if ((lambda >> j) & 1) as u8 != a {
                                continue;
                            }
                            let sx = if lambda & 1 == 0 { 1.0 } else { -1.0 };
                            let sz = if lambda & 2 == 0 { 1.0 } else { -1.0 };
                            sum += operator_from_parts(0.25, &(Vector3::new(sx, 0.0, sz) * 0.25));
                        }
                        worst = worst.max(common::max_abs_diff2(&sum, &asm.member(j, a).matrix));
                    }
                }
                worst
            } else {
                corner_ensemble_reproduces(&asm, &diag)
            };
            let bisection = min_max_radius(&asm, 1e-7).unwrap().r;
            pass &= (rep.r - expected).abs() <= 2e-3
                && corner < 1e-12
                && (bisection - expected).abs() <= 1e-6;
            parts.push(format!(
                "k={k} {}: R = {:.6}, bisection {:.7}, corner model residual {corner:.1e}",
                side.label(),
                rep.r,
                bisection
            ));
        }
    }
    outcome(pass, parts.join("; "))
}

fn one_way_witness() -> Outcome {
    let cfg = SearchConfig {
        restarts: 32,
        ..SearchConfig::default()
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for (p, theta) in [(0.6, PI / 12.0), (0.75, PI / 12.0)] {
        let rho = family(p, theta);
        let ab = steering_radius(&rho, 3, Direction::AtoB, &cfg).unwrap().r;
        let ba = steering_radius(&rho, 3, Direction::BtoA, &cfg).unwrap().r;
        let label = classify_three_settings(p, theta).unwrap();
        pass &= ab > 1.0 + 1e-3 && ba <= 1.0 + 1e-3 && label == RegionLabel::OneWayAtoB;
        parts.push(format!("({p}, π/12): R_ab = {ab:.6}, R_ba = {ba:.6}, label {label}"));
    }
    outcome(pass, parts.join("; "))
}

fn werner_column() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for scenario in [Scenario::Two, Scenario::Three] {
        let spec = ScanSpec {
            p: Range { min: 0.0, max: 1.0, steps: 200 },
            theta: Range { min: FRAC_PI_4, max: FRAC_PI_4, steps: 1 },
            scenario,
            with_solver: true,
        };
        let rows = scan_region(&spec).unwrap();
        let one_way = rows
            .iter()
            .filter(|r| r.label(scenario) == RegionLabel::OneWayAtoB)
            .count();
        let asym = rows
            .iter()
            .map(|r| (r.r_ab.unwrap() - r.r_ba.unwrap()).abs())
            .fold(0.0, f64::max);
        pass &= rows.len() == 200 && one_way == 0;
        parts.push(format!(
            "k={}: {} rows, {one_way} one-way, max |r_ab - r_ba| = {asym:.1e}",
            scenario.settings_count().unwrap(),
            rows.len()
        ));
    }
    outcome(pass, parts.join("; "))
}

fn linear_inequality() -> Outcome {
    let mut points = Vec::new();
    'grid: for i in 1..=6 {
        for j in 1..=6 {
            let p = 0.3 + 0.1 * i as f64;
            let theta = FRAC_PI_4 * j as f64 / 7.0;
            if unsteerable_b_to_a_infinite(p, theta).unwrap() {
                points.push((p, theta));
                if points.len() == 10 {
                    break 'grid;
                }
            }
        }
    }
    let mut worst = f64::NEG_INFINITY;
    for &(p, theta) in &points {
        let rho = family(p, theta);
        for n in [2, 3, 4, 6, 10] {
            let settings = canonical_settings(n).unwrap();
            let c = lhs_bound_c(&settings).unwrap();
            for side in [Direction::AtoB, Direction::BtoA] {
                worst = worst.max(linear_s(&rho, &settings, side).unwrap() - c);
            }
        }
    }
    let xyz = canonical_settings(3).unwrap();
    let bell = linear_s(&family(1.0, FRAC_PI_4), &xyz, Direction::BtoA).unwrap() - lhs_bound_c(&xyz).unwrap();
    let bell_err = (bell - (1.0 - 1.0 / 3f64.sqrt())).abs();
    outcome(
        points.len() == 10 && worst <= 0.0 && bell_err <= 1e-12,
        format!(
            "{} Bowles points, max S - C = {worst:.4}; Bell S3 - C3 = {bell:.15} (error {bell_err:.1e})",
            points.len()
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = common::rng(2024);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let rho = common::random_state(&mut rng);
        let settings = common::random_settings(&mut rng, 2);
        let side = if i % 2 == 0 { Direction::AtoB } else { Direction::BtoA };
        let asm = build_assemblage(&rho, &settings, side.measuring()).unwrap();
        let solver = min_max_radius(&asm, 1e-7).unwrap().r;
        let oracle = common::brute_force_radius(&asm, i);
        worst = worst.max((solver - oracle).abs());
    }
    outcome(worst <= 1e-2, format!("20 states, max |r_solver - r_oracle| = {worst:.2e}"))
}

fn bootstrap_scaling() -> Outcome {
    let bell = family(1.0, FRAC_PI_4);
    let settings = canonical_settings(3).unwrap();
    let noiseless = direct_radius(&build_assemblage(&bell, &settings, Party::A).unwrap()).unwrap().r;
    let ns = [1e4, 1e6, 1e8];
    let mut within = true;
    let mut stds = Vec::new();
    let mut parts = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let counts = simulate_counts(&bell, &settings, Direction::AtoB, n, 100 + i as u64).unwrap();
        let b = bootstrap_radius(&counts, 3, 100, 1000).unwrap();
        within &= (b.mean - noiseless).abs() <= 3.0 * b.std;
        stds.push(b.std);
        parts.push(format!("N={n:.0e}: {:.6} ± {:.2e}", b.mean, b.std));
    }
    let xs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let ys: Vec<f64> = stds.iter().map(|s| s.ln()).collect();
    let mx = xs.iter().sum::<f64>() / 3.0;
    let my = ys.iter().sum::<f64>() / 3.0;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    outcome(
        within && (slope + 0.5).abs() <= 0.1,
        format!("{}; slope {slope:.3}; noiseless {noiseless:.6}", parts.join(", ")),
    )
}

fn invariants() -> Outcome {
    // A runner stops after `cases` successes in total, so each suite gets its own.
    let runner = || {
        TestRunner::new(Config {
            cases: 200,
            failure_persistence: None,
            ..Config::default()
        })
    };
    let side_of = |flag: bool| if flag { Direction::AtoB } else { Direction::BtoA };
    let mut results = Vec::new();
    let ran = AtomicUsize::new(0);

    let no_signalling = runner().run(&(any::<u64>(), 1usize..6, any::<bool>()), |(seed, k, flag)| {
        ran.fetch_add(1, Ordering::Relaxed);
        let mut rng = common::rng(seed);
        let rho = common::random_state(&mut rng);
        let settings = common::random_settings(&mut rng, k);
        let side = side_of(flag);
        let asm = build_assemblage(&rho, &settings, side.measuring()).unwrap();
        let reduced = *rho.partial_trace(side.measuring()).matrix();
        for j in 0..k {
            let sum = asm.member(j, 0).matrix + asm.member(j, 1).matrix;
            prop_assert!(common::max_abs_diff2(&sum, &reduced) < 1e-12);
        }
        Ok(())
    });
    results.push(("no-signalling", no_signalling.map_err(|e| e.to_string())));

    let completeness = runner().run(&any::<u64>(), |seed| {
        ran.fetch_add(1, Ordering::Relaxed);
        let mut rng = common::rng(seed);
        let s = MeasurementSetting::new(common::random_axis(&mut rng)).unwrap();
        let sum = effect(0, &s).unwrap() + effect(1, &s).unwrap();
        prop_assert!(common::max_abs_diff2(&sum, &identity2()) < 1e-12);
        for a in 0..2 {
            let e = effect(a, &s).unwrap();
            prop_assert!(common::max_abs_diff2(&(e * e), &e) < 1e-12);
        }
        Ok(())
    });
    results.push(("completeness", completeness.map_err(|e| e.to_string())));

    let monotone = runner().run(
        &(any::<u64>(), 2usize..4, any::<bool>(), 0.0f64..2.0, 0.0f64..2.0),
        |(seed, k, flag, a, b)| {
        ran.fetch_add(1, Ordering::Relaxed);
            let mut rng = common::rng(seed);
            let rho = common::random_state(&mut rng);
            let settings = common::random_settings(&mut rng, k);
            let asm = build_assemblage(&rho, &settings, side_of(flag).measuring()).unwrap();
            let (lo, hi) = (a.min(b), a.max(b));
            if feasible_at(lo, &asm).unwrap().is_feasible() {
                prop_assert!(feasible_at(hi, &asm).unwrap().is_feasible());
            }
            let r = direct_radius(&asm).unwrap().r;
            prop_assert!(feasible_at(r + 1e-5, &asm).unwrap().is_feasible());
            Ok(())
        },
    );
    results.push(("monotone feasibility", monotone.map_err(|e| e.to_string())));

    let covariance = runner().run(&(any::<u64>(), 2usize..4, any::<bool>()), |(seed, k, flag)| {
        ran.fetch_add(1, Ordering::Relaxed);
        let mut rng = common::rng(seed);
        let rho = common::random_state(&mut rng);
        let settings = common::random_settings(&mut rng, k);
        let (ua, ub) = (common::random_unitary(&mut rng), common::random_unitary(&mut rng));
        let side = side_of(flag);
        let rot = rotation_of_unitary(if side.measuring() == Party::A { &ua } else { &ub });
        let rotated: Vec<_> = settings
            .iter()
            .map(|s| MeasurementSetting::new(rot * s.axis()).unwrap())
            .collect();
        let before = direct_radius(&build_assemblage(&rho, &settings, side.measuring()).unwrap()).unwrap().r;
        let moved = rho.conjugate_local(&ua, &ub);
        let after = direct_radius(&build_assemblage(&moved, &rotated, side.measuring()).unwrap()).unwrap().r;
        prop_assert!((before - after).abs() < 1e-6);
        Ok(())
    });
    results.push(("rotation covariance", covariance.map_err(|e| e.to_string())));

    let witness = runner().run(&(any::<u64>(), 2usize..4, any::<bool>()), |(seed, n, flag)| {
        ran.fetch_add(1, Ordering::Relaxed);
        let mut rng = common::rng(seed);
        let rho = common::random_state(&mut rng);
        let settings = canonical_settings(n).unwrap();
        let side = side_of(flag);
        let asm = build_assemblage(&rho, &settings, side.measuring()).unwrap();
        if direct_radius(&asm).unwrap().r <= 1.0 {
            prop_assert!(linear_s(&rho, &settings, side).unwrap() <= lhs_bound_c(&settings).unwrap() + 1e-9);
        }
        Ok(())
    });
    results.push(("witness validity", witness.map_err(|e| e.to_string())));

    let failed: Vec<String> = results
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    let ran = ran.into_inner();
    if failed.is_empty() {
        outcome(
            ran == 200 * results.len(),
            format!("{} suites, {ran} cases run", results.len()),
        )
    } else {
        outcome(false, failed.join("; "))
    }
}

fn main() -> ExitCode {
    type Criterion = (&'static str, f64, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("three-setting B->A boundary", 10.0, || boundary(3)),
        ("two-setting B->A boundary", f64::INFINITY, || boundary(2)),
        ("Werner thresholds", f64::INFINITY, werner_thresholds),
        ("Bell-state radii", f64::INFINITY, bell_radii),
        ("one-way witness", f64::INFINITY, one_way_witness),
        ("no one-way labels at theta = pi/4", f64::INFINITY, werner_column),
        ("linear steering inequality", f64::INFINITY, linear_inequality),
        ("brute-force oracle", f64::INFINITY, oracle_equivalence),
        ("bootstrap scaling", f64::INFINITY, bootstrap_scaling),
        ("invariant suites", 60.0, invariants),
    ];
    let mut failures = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut result = run();
        let secs = start.elapsed().as_secs_f64();
        if secs >= *budget {
            result.pass = false;
            result.detail.push_str(&format!("; over the {budget} s budget"));
        }
        if !result.pass {
            failures += 1;
        }
        println!(
            "{} [{:>2}] {name}: {} ({secs:.2} s)",
            if result.pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
