//! Closed-form steering regions of the `(p, θ)` family and linear steering
//! inequalities.
//!
//! With `s = sin 2θ`, `k` settings are enough for Alice to steer Bob when
//! `p > 1/√k`, and Bob cannot steer Alice with the same settings while
//! `p ≤ 1/√(1 + (k − 1)s²)`.

use std::f64::consts::FRAC_PI_4;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::assemblage::{correlation_data, Direction, MeasurementSetting};
use crate::error::{Error, Result};
use crate::qubit::TwoQubitState;
use crate::states::FamilyParams;

/// Largest setting count for the brute-force LHS bound.
pub const MAX_BOUND_SETTINGS: usize = 16;

/// Counts accepted by [`canonical_settings`].
pub const CANONICAL_COUNTS: [usize; 5] = [2, 3, 4, 6, 10];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    TwoWay,
    OneWayAtoB,
    Unsteerable,
    /// Neither direction is decided by the available criteria.
    Inconclusive,
}

impl RegionLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::TwoWay => "TwoWay",
            RegionLabel::OneWayAtoB => "OneWayAtoB",
            RegionLabel::Unsteerable => "Unsteerable",
            RegionLabel::Inconclusive => "Inconclusive",
        }
    }
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `(lower, upper)` thresholds on `p` for `k` settings.
pub fn one_way_bounds(k: usize, theta: f64) -> (f64, f64) {
    let s = (2.0 * theta).sin();
    let kf = k as f64;
    let lower = 1.0 / (1.0 + (kf - 1.0)).sqrt();
    let upper = 1.0 / (1.0 + (kf - 1.0) * s * s).sqrt();
    (lower, upper)
}

fn classify_k(k: usize, p: f64, theta: f64) -> Result<RegionLabel> {
    let params = FamilyParams::new(p, theta)?;
    let (p, theta) = (params.p(), params.theta());
    let (lower, upper) = one_way_bounds(k, theta);
    Ok(if p > upper {
        RegionLabel::TwoWay
    } else if p <= lower {
        RegionLabel::Unsteerable
    } else if theta > 0.0 && theta < FRAC_PI_4 {
        RegionLabel::OneWayAtoB
    } else {
        // θ = 0 is a product state
        RegionLabel::Unsteerable
    })
}

pub fn classify_two_settings(p: f64, theta: f64) -> Result<RegionLabel> {
    classify_k(2, p, theta)
}

pub fn classify_three_settings(p: f64, theta: f64) -> Result<RegionLabel> {
    classify_k(3, p, theta)
}

/// `cos²2θ ≥ (2p − 1)/((2 − p)p³)`: Bob cannot steer Alice with any set of
/// projective measurements. `p = 0` counts as unsteerable.
pub fn unsteerable_b_to_a_infinite(p: f64, theta: f64) -> Result<bool> {
    let params = FamilyParams::new(p, theta)?;
    let (p, theta) = (params.p(), params.theta());
    if p == 0.0 {
        return Ok(true);
    }
    let c = (2.0 * theta).cos();
    Ok(c * c >= (2.0 * p - 1.0) / ((2.0 - p) * p * p * p))
}

/// Alice steers Bob with all projective measurements iff `p > 1/2`.
pub fn steerable_a_to_b_infinite(p: f64) -> bool {
    p > 0.5
}

/// Label for unrestricted projective measurements. B→A steerability is only
/// known from the symmetric case `θ = π/4`, where it equals A→B; `θ = 0` is
/// a product state.
pub fn classify_infinite(p: f64, theta: f64) -> Result<RegionLabel> {
    let params = FamilyParams::new(p, theta)?;
    if params.theta() == 0.0 {
        return Ok(RegionLabel::Unsteerable);
    }
    let ab = steerable_a_to_b_infinite(params.p());
    let ba_blocked = unsteerable_b_to_a_infinite(params.p(), params.theta())?;
    Ok(match (ab, ba_blocked) {
        (false, true) => RegionLabel::Unsteerable,
        (true, true) => RegionLabel::OneWayAtoB,
        (true, false) if params.theta() == FRAC_PI_4 => RegionLabel::TwoWay,
        _ => RegionLabel::Inconclusive,
    })
}

/// `S_n = (1/n) Σ_k |n̂_k·T n̂_k|`, with `T` oriented so that the measuring
/// (untrusted) party is the row index.
pub fn linear_s(
    rho: &TwoQubitState,
    settings: &[MeasurementSetting],
    direction: Direction,
) -> Result<f64> {
    if settings.is_empty() {
        return Err(Error::Param("linear inequality needs at least one setting".into()));
    }
    let data = match direction {
        Direction::AtoB => correlation_data(rho),
        Direction::BtoA => correlation_data(rho).swapped(),
    };
    let sum: f64 = settings
        .iter()
        .map(|s| s.axis().dot(&(data.t * s.axis())).abs())
        .sum();
    Ok(sum / settings.len() as f64)
}

/// `C_n = (1/n) max_B |Σ_k B_k n̂_k|` over all sign vectors.
pub fn lhs_bound_c(settings: &[MeasurementSetting]) -> Result<f64> {
    let n = settings.len();
    if n == 0 {
        return Err(Error::Param("linear inequality needs at least one setting".into()));
    }
    if n > MAX_BOUND_SETTINGS {
        return Err(Error::Cap {
            what: "linear-inequality setting count",
            value: n,
            max: MAX_BOUND_SETTINGS,
        });
    }
    // B and −B give the same norm, so fix the sign of the last setting.
    let mut best: f64 = 0.0;
    for signs in 0..1usize << (n - 1) {
        let mut sum = *settings[n - 1].axis();
        for (k, s) in settings[..n - 1].iter().enumerate() {
            if (signs >> k) & 1 == 1 {
                sum -= s.axis();
            } else {
                sum += s.axis();
            }
        }
        best = best.max(sum.norm());
    }
    Ok(best / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearIneqResult {
    pub n: usize,
    pub s: f64,
    pub c: f64,
    pub violation: f64,
}

pub fn linear_inequality(
    rho: &TwoQubitState,
    settings: &[MeasurementSetting],
    direction: Direction,
) -> Result<LinearIneqResult> {
    let s = linear_s(rho, settings, direction)?;
    let c = lhs_bound_c(settings)?;
    Ok(LinearIneqResult {
        n: settings.len(),
        s,
        c,
        violation: s - c,
    })
}

/// `{x̂, ẑ}`, `{x̂, ŷ, ẑ}`, and for 4, 6 and 10 the axes through opposite
/// vertices of the cube, icosahedron and dodecahedron.
pub fn canonical_settings(n: usize) -> Result<Vec<MeasurementSetting>> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let axes: Vec<Vector3<f64>> = match n {
        2 => return Ok(vec![MeasurementSetting::x(), MeasurementSetting::z()]),
        3 => {
            return Ok(vec![
                MeasurementSetting::x(),
                MeasurementSetting::y(),
                MeasurementSetting::z(),
            ])
        }
        4 => vec![
            Vector3::new(1.0, 1.0, 1.0),
            Vector3::new(1.0, -1.0, -1.0),
            Vector3::new(-1.0, 1.0, -1.0),
            Vector3::new(-1.0, -1.0, 1.0),
        ],
        6 => vec![
            Vector3::new(0.0, 1.0, phi),
            Vector3::new(0.0, 1.0, -phi),
            Vector3::new(1.0, phi, 0.0),
            Vector3::new(1.0, -phi, 0.0),
            Vector3::new(phi, 0.0, 1.0),
            Vector3::new(-phi, 0.0, 1.0),
        ],
        10 => {
            let g = 1.0 / phi;
            vec![
                Vector3::new(1.0, 1.0, 1.0),
                Vector3::new(1.0, 1.0, -1.0),
                Vector3::new(1.0, -1.0, 1.0),
                Vector3::new(-1.0, 1.0, 1.0),
                Vector3::new(0.0, g, phi),
                Vector3::new(0.0, g, -phi),
                Vector3::new(g, phi, 0.0),
                Vector3::new(g, -phi, 0.0),
                Vector3::new(phi, 0.0, g),
                Vector3::new(-phi, 0.0, g),
            ]
        }
        _ => {
            return Err(Error::Param(format!(
                "no canonical settings for n = {n}; supported: {CANONICAL_COUNTS:?}"
            )))
        }
    };
    axes.into_iter().map(MeasurementSetting::along).collect()
}
