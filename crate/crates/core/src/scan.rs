//! Parameter grids over the `(p, θ)` family: region labels and linear
//! inequality tables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assemblage::{build_assemblage, Direction};
use crate::criteria::{
    canonical_settings, classify_infinite, classify_three_settings, classify_two_settings,
    linear_inequality, unsteerable_b_to_a_infinite, LinearIneqResult, RegionLabel,
};
use crate::error::{Error, Result};
use crate::lhs::direct_radius;
use crate::qubit::{Party, TwoQubitState};
use crate::states::{make_family_state, FamilyParams};

/// `steps` evenly spaced values from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.max
                } else {
                    self.min + (self.max - self.min) * i as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3")]
    Three,
    #[serde(rename = "infinite")]
    Infinite,
}

impl Scenario {
    pub fn settings_count(self) -> Option<usize> {
        match self {
            Scenario::Two => Some(2),
            Scenario::Three => Some(3),
            Scenario::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub p: Range,
    pub theta: Range,
    pub scenario: Scenario,
    /// Adds radii at the canonical settings of the scenario.
    pub with_solver: bool,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("p", &self.p), ("theta", &self.theta)] {
            if r.steps == 0 {
                return Err(Error::Param(format!("{name} steps must be at least 1")));
            }
            if !(r.min <= r.max) {
                return Err(Error::Param(format!("{name} range [{}, {}] is empty", r.min, r.max)));
            }
        }
        FamilyParams::new(self.p.min, self.theta.min)?;
        FamilyParams::new(self.p.max, self.theta.max)?;
        if self.with_solver && self.scenario == Scenario::Infinite {
            return Err(Error::Param(
                "solver columns need a finite scenario (2 or 3 settings)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionRow {
    pub p: f64,
    pub theta: f64,
    pub label_2: RegionLabel,
    pub label_3: RegionLabel,
    pub label_inf: RegionLabel,
    pub bowles_unsteerable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_ab: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_ba: Option<f64>,
}

impl RegionRow {
    /// Label of the scan's scenario.
    pub fn label(&self, scenario: Scenario) -> RegionLabel {
        match scenario {
            Scenario::Two => self.label_2,
            Scenario::Three => self.label_3,
            Scenario::Infinite => self.label_inf,
        }
    }
}

/// Radii at the canonical `k` settings, `(A→B, B→A)`.
pub fn canonical_radii(rho: &TwoQubitState, k: usize) -> Result<(f64, f64)> {
    let settings = canonical_settings(k)?;
    let ab = direct_radius(&build_assemblage(rho, &settings, Party::A)?)?.r;
    let ba = direct_radius(&build_assemblage(rho, &settings, Party::B)?)?.r;
    Ok((ab, ba))
}

pub fn region_row(p: f64, theta: f64, solver_k: Option<usize>) -> Result<RegionRow> {
    let params = FamilyParams::new(p, theta)?;
    let (r_ab, r_ba) = match solver_k {
        Some(k) => {
            let (ab, ba) = canonical_radii(&make_family_state(params), k)?;
            (Some(ab), Some(ba))
        }
        None => (None, None),
    };
    Ok(RegionRow {
        p,
        theta,
        label_2: classify_two_settings(p, theta)?,
        label_3: classify_three_settings(p, theta)?,
        label_inf: classify_infinite(p, theta)?,
        bowles_unsteerable: unsteerable_b_to_a_infinite(p, theta)?,
        r_ab,
        r_ba,
    })
}

/// Rows in grid order: `θ` outer, `p` inner.
pub fn scan_region(spec: &ScanSpec) -> Result<Vec<RegionRow>> {
    spec.validate()?;
    let solver_k = if spec.with_solver {
        spec.scenario.settings_count()
    } else {
        None
    };
    let points: Vec<(f64, f64)> = spec
        .theta
        .values()
        .into_iter()
        .flat_map(|t| spec.p.values().into_iter().map(move |p| (p, t)))
        .collect();
    points
        .into_par_iter()
        .map(|(p, t)| region_row(p, t, solver_k))
        .collect()
}

/// One row per distinct `n`, sorted.
pub fn scan_linear(
    rho: &TwoQubitState,
    ns: &[usize],
    direction: Direction,
) -> Result<Vec<LinearIneqResult>> {
    if ns.is_empty() {
        return Err(Error::Param("no setting counts given".into()));
    }
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| linear_inequality(rho, &canonical_settings(n)?, direction))
        .collect()
}
