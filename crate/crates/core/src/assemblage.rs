//! Measurement effects, conditional states and assemblages.
//!
//! A measurement along `n̂` with outcome `a` has effect `(I + (−1)^a n̂·σ)/2`.
//! Conditional states are kept unnormalized: their trace is the Born
//! probability of the outcome.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubit::{
    identity2, kron, operator_from_parts, operator_parts, pauli, pauli_along, ComplexMatrix2,
    Party, TwoQubitState, UNIT_TOL,
};

/// Tolerance for the no-signalling and completeness checks.
pub const NO_SIGNALLING_TOL: f64 = 1e-9;

/// `|n̂_i · n̂_j|` at or above this marks two settings as duplicate/antipodal.
const DUPLICATE_DOT: f64 = 1.0 - 1e-9;

/// Which party steers which.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Alice measures, Bob holds the conditional states.
    #[serde(rename = "ab")]
    AtoB,
    /// Bob measures, Alice holds the conditional states.
    #[serde(rename = "ba")]
    BtoA,
}

impl Direction {
    pub fn measuring(self) -> Party {
        match self {
            Direction::AtoB => Party::A,
            Direction::BtoA => Party::B,
        }
    }

    pub fn steered(self) -> Party {
        self.measuring().other()
    }

    pub fn from_measuring(side: Party) -> Self {
        match side {
            Party::A => Direction::AtoB,
            Party::B => Direction::BtoA,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Direction::AtoB => "ab",
            Direction::BtoA => "ba",
        }
    }
}

/// A projective binary measurement along a unit axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    axis: Vector3<f64>,
}

impl MeasurementSetting {
    pub fn new(axis: Vector3<f64>) -> Result<Self> {
        let norm = axis.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::Normalization { norm });
        }
        Ok(Self { axis })
    }

    /// Normalizes `axis` first; fails only for zero or non-finite input.
    pub fn along(axis: Vector3<f64>) -> Result<Self> {
        let norm = axis.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Normalization { norm });
        }
        Self::new(axis / norm)
    }

    /// Axis at polar angle `polar` from +z and azimuth `azimuth` from +x.
    pub fn from_spherical(polar: f64, azimuth: f64) -> Self {
        let (sp, cp) = polar.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        Self {
            axis: Vector3::new(sp * ca, sp * sa, cp),
        }
    }

    pub fn x() -> Self {
        Self { axis: Vector3::x() }
    }

    pub fn y() -> Self {
        Self { axis: Vector3::y() }
    }

    pub fn z() -> Self {
        Self { axis: Vector3::z() }
    }

    pub fn axis(&self) -> &Vector3<f64> {
        &self.axis
    }

    /// `(polar, azimuth)` of the axis.
    pub fn spherical(&self) -> (f64, f64) {
        let polar = self.axis.z.clamp(-1.0, 1.0).acos();
        let azimuth = self.axis.y.atan2(self.axis.x);
        (polar, azimuth)
    }
}

/// Measurement effect `M_{a|n̂}`.
pub fn effect(a: u8, setting: &MeasurementSetting) -> Result<ComplexMatrix2> {
    let sign = outcome_sign(a)?;
    let n_sigma = pauli_along(setting.axis())?;
    Ok((identity2() + n_sigma.scale(sign)).scale(0.5))
}

fn outcome_sign(a: u8) -> Result<f64> {
    match a {
        0 => Ok(1.0),
        1 => Ok(-1.0),
        _ => Err(Error::Param(format!("outcome {a} is not 0 or 1"))),
    }
}

/// Unnormalized state of the steered party for one (setting, outcome).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalState {
    pub setting_index: usize,
    pub outcome: u8,
    pub matrix: ComplexMatrix2,
}

impl ConditionalState {
    pub fn probability(&self) -> f64 {
        operator_parts(&self.matrix).0
    }

    /// `tr(ρ̃ σ)`, i.e. probability times the normalized Bloch vector.
    pub fn weighted_bloch(&self) -> Vector3<f64> {
        operator_parts(&self.matrix).1
    }

    /// Bloch vector of `ρ̃ / tr ρ̃`; zero when the probability vanishes.
    pub fn normalized_bloch(&self) -> Vector3<f64> {
        let (prob, u) = operator_parts(&self.matrix);
        if prob > 0.0 {
            u / prob
        } else {
            Vector3::zeros()
        }
    }
}

/// `Tr_measuring((M_{a|n̂} ⊗ I) ρ)` for `measuring_side = A`, and the mirror
/// image for `B`. The returned state carries setting index 0.
pub fn conditional_state(
    rho: &TwoQubitState,
    a: u8,
    setting: &MeasurementSetting,
    measuring_side: Party,
) -> Result<ConditionalState> {
    let m = effect(a, setting)?;
    let oriented = match measuring_side {
        Party::A => *rho,
        Party::B => rho.swap_parties(),
    };
    let r = oriented.matrix();
    let matrix = ComplexMatrix2::from_fn(|b, bp| {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for alpha in 0..2 {
            for beta in 0..2 {
                acc += m[(alpha, beta)] * r[(2 * beta + b, 2 * alpha + bp)];
            }
        }
        acc
    });
    Ok(ConditionalState {
        setting_index: 0,
        outcome: a,
        matrix,
    })
}

/// Conditional states for a list of settings, indexed `[setting][outcome]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assemblage {
    settings: Vec<MeasurementSetting>,
    members: Vec<[ConditionalState; 2]>,
    reduced: ComplexMatrix2,
    direction: Direction,
}

impl Assemblage {
    /// Assembles members computed elsewhere (e.g. reconstructed from counts),
    /// checking no-signalling and probability completeness.
    pub fn from_parts(
        settings: Vec<MeasurementSetting>,
        members: Vec<[ConditionalState; 2]>,
        reduced: ComplexMatrix2,
        direction: Direction,
    ) -> Result<Self> {
        if settings.is_empty() {
            return Err(Error::Param("an assemblage needs at least one setting".into()));
        }
        if settings.len() != members.len() {
            return Err(Error::Param(format!(
                "{} settings but {} member pairs",
                settings.len(),
                members.len()
            )));
        }
        check_distinct(&settings)?;
        for (j, pair) in members.iter().enumerate() {
            if pair[0].setting_index != j || pair[1].setting_index != j {
                return Err(Error::Param(format!("member pair {j} has wrong setting index")));
            }
            if pair[0].outcome != 0 || pair[1].outcome != 1 {
                return Err(Error::Param(format!("member pair {j} has wrong outcomes")));
            }
            let sum = pair[0].matrix + pair[1].matrix;
            let dev = (sum - reduced).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if !(dev <= NO_SIGNALLING_TOL) {
                return Err(Error::Validation(format!(
                    "no-signalling violated at setting {j}: deviation {dev:e}"
                )));
            }
            let total = pair[0].probability() + pair[1].probability();
            if !((total - 1.0).abs() <= NO_SIGNALLING_TOL) {
                return Err(Error::Validation(format!(
                    "outcome probabilities of setting {j} sum to {total}"
                )));
            }
        }
        Ok(Self {
            settings,
            members,
            reduced,
            direction,
        })
    }

    pub fn settings(&self) -> &[MeasurementSetting] {
        &self.settings
    }

    pub fn members(&self) -> &[[ConditionalState; 2]] {
        &self.members
    }

    pub fn member(&self, setting: usize, outcome: u8) -> &ConditionalState {
        &self.members[setting][outcome as usize]
    }

    /// Reduced state of the steered party.
    pub fn reduced(&self) -> &ComplexMatrix2 {
        &self.reduced
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn len(&self) -> usize {
        self.settings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.settings.is_empty()
    }

    /// Readable JSON view: per member the probability and both Bloch vectors.
    pub fn to_json(&self) -> serde_json::Value {
        let members: Vec<_> = self
            .members
            .iter()
            .flatten()
            .map(|m| {
                serde_json::json!({
                    "setting_index": m.setting_index,
                    "outcome": m.outcome,
                    "probability": m.probability(),
                    "weighted_bloch": [m.weighted_bloch().x, m.weighted_bloch().y, m.weighted_bloch().z],
                    "normalized_bloch": [m.normalized_bloch().x, m.normalized_bloch().y, m.normalized_bloch().z],
                })
            })
            .collect();
        let reduced = operator_parts(&self.reduced).1;
        serde_json::json!({
            "direction": self.direction,
            "settings": self.settings.iter().map(|s| [s.axis.x, s.axis.y, s.axis.z]).collect::<Vec<_>>(),
            "reduced_bloch": [reduced.x, reduced.y, reduced.z],
            "members": members,
        })
    }
}

fn check_distinct(settings: &[MeasurementSetting]) -> Result<()> {
    for i in 0..settings.len() {
        for j in i + 1..settings.len() {
            if settings[i].axis.dot(&settings[j].axis).abs() >= DUPLICATE_DOT {
                return Err(Error::DuplicateSetting {
                    first: i,
                    second: j,
                });
            }
        }
    }
    Ok(())
}

/// Conditional states of the party opposite `measuring_side`.
pub fn build_assemblage(
    rho: &TwoQubitState,
    settings: &[MeasurementSetting],
    measuring_side: Party,
) -> Result<Assemblage> {
    if settings.is_empty() {
        return Err(Error::Param("an assemblage needs at least one setting".into()));
    }
    check_distinct(settings)?;
    let members = settings
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let mut pair = [
                conditional_state(rho, 0, s, measuring_side)?,
                conditional_state(rho, 1, s, measuring_side)?,
            ];
            pair[0].setting_index = j;
            pair[1].setting_index = j;
            Ok(pair)
        })
        .collect::<Result<Vec<_>>>()?;
    let reduced = *rho.partial_trace(measuring_side).matrix();
    Ok(Assemblage {
        settings: settings.to_vec(),
        members,
        reduced,
        direction: Direction::from_measuring(measuring_side),
    })
}

/// Correlation matrix `T_ij = tr(ρ σ_i⊗σ_j)` and local Bloch vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationData {
    pub t: Matrix3<f64>,
    pub alice: Vector3<f64>,
    pub bob: Vector3<f64>,
}

impl CorrelationData {
    pub fn singular_values(&self) -> Vector3<f64> {
        self.t.singular_values()
    }

    /// The data of the party-swapped state.
    pub fn swapped(&self) -> Self {
        Self {
            t: self.t.transpose(),
            alice: self.bob,
            bob: self.alice,
        }
    }

    /// Predicted unnormalized conditional state of the steered party, from the
    /// correlation form `¼[(1 ± n̂·a)I + (b ± Tᵀn̂)·σ]` (oriented with the
    /// measuring party first).
    pub fn predicted_member(&self, a: u8, n: &Vector3<f64>) -> ComplexMatrix2 {
        let sign = if a == 0 { 1.0 } else { -1.0 };
        let prob = 0.5 * (1.0 + sign * n.dot(&self.alice));
        let u = (self.bob + self.t.transpose() * n * sign) * 0.5;
        operator_from_parts(prob, &u)
    }
}

pub fn correlation_data(rho: &TwoQubitState) -> CorrelationData {
    let m = rho.matrix();
    let t = Matrix3::from_fn(|i, j| (m * kron(&pauli(i), &pauli(j))).trace().re);
    CorrelationData {
        t,
        alice: rho.partial_trace(Party::B).bloch().0,
        bob: rho.partial_trace(Party::A).bloch().0,
    }
}
