//! The `(p, θ)` state family and the JSON state-file format.
//!
//! The family is `p|ψ(θ)⟩⟨ψ(θ)| + (1 − p)·(I/2)⊗ρ_B(θ)` with
//! `|ψ(θ)⟩ = cos θ|HH⟩ + sin θ|VV⟩` and `ρ_B(θ) = Tr_A |ψ(θ)⟩⟨ψ(θ)|`.

use std::f64::consts::FRAC_PI_4;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubit::{ComplexMatrix4, TwoQubitState};

/// Inputs this far above π/4 are accepted and clamped to π/4, so that
/// four-digit decimal approximations such as `0.7854` are usable.
pub const THETA_SLACK: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    p: f64,
    theta: f64,
}

impl FamilyParams {
    pub fn new(p: f64, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Param(format!("p = {p} outside [0, 1]")));
        }
        if !(0.0..=FRAC_PI_4 + THETA_SLACK).contains(&theta) {
            return Err(Error::Param(format!("theta = {theta} outside [0, pi/4]")));
        }
        Ok(Self {
            p,
            theta: theta.min(FRAC_PI_4),
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

pub fn make_family_state(params: FamilyParams) -> TwoQubitState {
    let (s, c) = params.theta.sin_cos();
    let p = params.p;
    let psi = [c, 0.0, 0.0, s];
    let bob = [c * c, s * s];
    let m = ComplexMatrix4::from_fn(|r, col| {
        let mut v = p * psi[r] * psi[col];
        if r == col {
            v += (1.0 - p) * 0.5 * bob[r % 2];
        }
        Complex64::new(v, 0.0)
    });
    TwoQubitState::new(m).expect("family state is a density matrix")
}

/// `p|Φ⁺⟩⟨Φ⁺| + (1 − p)·I/4`.
pub fn make_werner(p: f64) -> Result<TwoQubitState> {
    Ok(make_family_state(FamilyParams::new(p, FRAC_PI_4)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateMeta {
    pub p: f64,
    pub theta: f64,
}

/// On-disk layout: row-major, Alice-first, entries as `[re, im]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct StateFile {
    dim: [usize; 2],
    matrix: [[[f64; 2]; 4]; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<StateMeta>,
}

pub fn state_to_json(state: &TwoQubitState, meta: Option<StateMeta>) -> String {
    let m = state.matrix();
    let file = StateFile {
        dim: [4, 4],
        matrix: std::array::from_fn(|r| std::array::from_fn(|c| [m[(r, c)].re, m[(r, c)].im])),
        meta,
    };
    serde_json::to_string_pretty(&file).expect("state serializes")
}

pub fn state_from_json(text: &str) -> Result<(TwoQubitState, Option<StateMeta>)> {
    let mut de = serde_json::Deserializer::from_str(text);
    let file: StateFile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse {
            line: inner.line(),
            column: inner.column(),
            field,
            message: inner.to_string(),
        }
    })?;
    if file.dim != [4, 4] {
        return Err(Error::Parse {
            line: 0,
            column: 0,
            field: "dim".into(),
            message: format!("expected [4, 4], found {:?}", file.dim),
        });
    }
    let m = ComplexMatrix4::from_fn(|r, c| {
        let [re, im] = file.matrix[r][c];
        Complex64::new(re, im)
    });
    let state = TwoQubitState::new(m)?;
    Ok((state, file.meta))
}

pub fn save_state(path: &Path, state: &TwoQubitState, meta: Option<StateMeta>) -> Result<()> {
    fs::write(path, state_to_json(state, meta))?;
    Ok(())
}

pub fn load_state(path: &Path) -> Result<(TwoQubitState, Option<StateMeta>)> {
    state_from_json(&fs::read_to_string(path)?)
}
