//! Maximization of the minimal hidden-state radius over measurement axes.
//!
//! Each restart runs a compass search on the spherical angles of all axes:
//! every angle is tried at `±step`, improving moves are kept, and the step
//! is halved when no angle improves. Restarts are independent and merged by
//! a deterministic maximum.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assemblage::{build_assemblage, Direction, MeasurementSetting};
use crate::criteria::canonical_settings;
use crate::error::{Error, Result};
use crate::lhs::{direct_radius_within, min_max_radius, RadiusResult, DEFAULT_TOL};
use crate::qubit::TwoQubitState;

const INITIAL_STEP: f64 = 0.25;
const MIN_STEP: f64 = 1e-4;
/// Axes closer than this to parallel or antiparallel are not allowed.
const MIN_SEPARATION_DEG: f64 = 1.0;
/// Optimality gap of the radius evaluations inside the search.
const SEARCH_GAP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub restarts: usize,
    /// Compass sweeps per restart.
    pub max_iters: usize,
    /// A restart stops once a full step-size level gains less than this.
    pub tol: f64,
    pub seed: u64,
    pub include_canonical: bool,
    /// Bisection tolerance of the certificate at the best settings.
    pub certify_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 400,
            tol: 1e-4,
            seed: 0,
            include_canonical: true,
            certify_tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartTrace {
    /// 0 is the canonical start when it is included; random starts follow.
    pub restart: usize,
    pub canonical: bool,
    pub start_r: f64,
    pub r: f64,
    pub settings: Vec<MeasurementSetting>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringRadiusReport {
    #[serde(rename = "R")]
    pub r: f64,
    pub best_settings: Vec<MeasurementSetting>,
    pub best_restart: usize,
    pub direction: Direction,
    pub k: usize,
    pub seed: u64,
    /// Radius at the canonical axes, when they were searched.
    pub canonical_r: Option<f64>,
    /// Bisection at `best_settings`.
    pub certificate: RadiusResult,
    pub restarts: Vec<RestartTrace>,
}

fn too_close(axes: &[Vector3<f64>]) -> bool {
    let limit = MIN_SEPARATION_DEG.to_radians().cos();
    for i in 0..axes.len() {
        for j in i + 1..axes.len() {
            if axes[i].dot(&axes[j]).abs() >= limit {
                return true;
            }
        }
    }
    false
}

fn settings_of(angles: &[f64]) -> Vec<MeasurementSetting> {
    angles
        .chunks(2)
        .map(|c| MeasurementSetting::from_spherical(c[0], c[1]))
        .collect()
}

fn describe(settings: &[MeasurementSetting]) -> String {
    let axes: Vec<String> = settings
        .iter()
        .map(|s| format!("({:.6}, {:.6}, {:.6})", s.axis().x, s.axis().y, s.axis().z))
        .collect();
    axes.join(", ")
}

fn radius_at(rho: &TwoQubitState, settings: &[MeasurementSetting], direction: Direction) -> Result<f64> {
    let asm = build_assemblage(rho, settings, direction.measuring())?;
    direct_radius_within(&asm, SEARCH_GAP)
        .map(|d| d.r)
        .map_err(|e| match e {
            Error::SolverStall(msg) => {
                Error::SolverStall(format!("{msg} at settings [{}]", describe(settings)))
            }
            other => other,
        })
}

struct Ascent {
    settings: Vec<MeasurementSetting>,
    start_r: f64,
    r: f64,
    evaluations: usize,
}

fn compass_search(
    rho: &TwoQubitState,
    start: &[MeasurementSetting],
    direction: Direction,
    max_iters: usize,
    tol: f64,
) -> Result<Ascent> {
    let mut angles: Vec<f64> = start
        .iter()
        .flat_map(|s| {
            let (polar, azimuth) = s.spherical();
            [polar, azimuth]
        })
        .collect();
    let start_r = radius_at(rho, start, direction)?;
    let mut best = start_r;
    let mut evaluations = 1;
    let mut step = INITIAL_STEP;
    let mut level_gain = 0.0;
    for _ in 0..max_iters {
        let mut improved = false;
        for c in 0..angles.len() {
            for sign in [1.0, -1.0] {
                let mut trial = angles.clone();
                trial[c] += sign * step;
                let settings = settings_of(&trial);
                let axes: Vec<_> = settings.iter().map(|s| *s.axis()).collect();
                if too_close(&axes) {
                    continue;
                }
                evaluations += 1;
                let r = radius_at(rho, &settings, direction)?;
                if r > best + 1e-12 {
                    level_gain += r - best;
                    best = r;
                    angles = trial;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
            let converged = level_gain < tol * 1e-2 && step < INITIAL_STEP / 8.0;
            level_gain = 0.0;
            if step < MIN_STEP || converged {
                break;
            }
        }
    }
    Ok(Ascent {
        settings: settings_of(&angles),
        start_r,
        r: best,
        evaluations,
    })
}

fn random_start(k: usize, seed: u64, restart: usize) -> Vec<MeasurementSetting> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    loop {
        let axes: Vec<Vector3<f64>> = (0..k)
            .map(|_| loop {
                let v: Vector3<f64> = Vector3::from_fn(|_, _| StandardNormal.sample(&mut rng));
                let n = v.norm();
                if n > 1e-6 {
                    break v / n;
                }
            })
            .collect();
        if !too_close(&axes) {
            return axes
                .into_iter()
                .map(|a| MeasurementSetting::along(a).expect("nonzero axis"))
                .collect();
        }
    }
}

/// Steering radius `R = max over axes of r`, for `k ∈ {2, 3}` settings.
pub fn steering_radius(
    rho: &TwoQubitState,
    k: usize,
    direction: Direction,
    cfg: &SearchConfig,
) -> Result<SteeringRadiusReport> {
    if !(2..=3).contains(&k) {
        return Err(Error::Param(format!("settings search supports k = 2 or 3, got {k}")));
    }
    if cfg.restarts == 0 {
        return Err(Error::Param("at least one restart is required".into()));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::Param(format!("search tolerance {} must be positive", cfg.tol)));
    }
    let offset = usize::from(cfg.include_canonical);
    let starts: Vec<(usize, bool, Vec<MeasurementSetting>)> = (0..cfg.restarts + offset)
        .map(|i| {
            if i < offset {
                (i, true, canonical_settings(k).expect("k is 2 or 3"))
            } else {
                (i, false, random_start(k, cfg.seed, i))
            }
        })
        .collect();
    let traces: Vec<RestartTrace> = starts
        .into_par_iter()
        .map(|(restart, canonical, start)| {
            let a = compass_search(rho, &start, direction, cfg.max_iters, cfg.tol)?;
            Ok(RestartTrace {
                restart,
                canonical,
                start_r: a.start_r,
                r: a.r,
                settings: a.settings,
                evaluations: a.evaluations,
            })
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, t) in traces.iter().enumerate() {
        if t.r > traces[best].r {
            best = i;
        }
    }
    let best_settings = traces[best].settings.clone();
    let asm = build_assemblage(rho, &best_settings, direction.measuring())?;
    let certificate = min_max_radius(&asm, cfg.certify_tol)?;
    Ok(SteeringRadiusReport {
        r: traces[best].r,
        best_settings,
        best_restart: traces[best].restart,
        direction,
        k,
        seed: cfg.seed,
        canonical_r: traces.iter().find(|t| t.canonical).map(|t| t.start_r),
        certificate,
        restarts: traces,
    })
}

/// Compass search from `settings`; never returns a smaller radius than the
/// start.
pub fn local_refine(
    rho: &TwoQubitState,
    settings: &[MeasurementSetting],
    direction: Direction,
) -> Result<(Vec<MeasurementSetting>, f64)> {
    if settings.is_empty() {
        return Err(Error::Param("local refinement needs at least one setting".into()));
    }
    let cfg = SearchConfig::default();
    let a = compass_search(rho, settings, direction, cfg.max_iters, cfg.tol)?;
    Ok((a.settings, a.r))
}
