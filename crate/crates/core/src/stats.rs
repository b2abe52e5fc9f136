//! Poissonian coincidence counts, linear-inversion reconstruction of the
//! assemblage, and a parametric bootstrap of the radius.
//!
//! For every measuring setting the steered party is measured in the three
//! Pauli bases. The mean total count is split evenly over the
//! `(setting, basis)` pairs.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assemblage::{build_assemblage, Assemblage, ConditionalState, Direction, MeasurementSetting};
use crate::error::{Error, Result};
use crate::lhs::direct_radius;
use crate::qubit::{operator_from_parts, TwoQubitState};

pub const MIN_MEAN_COUNTS: f64 = 100.0;
pub const MIN_RESAMPLES: usize = 10;
pub const DEFAULT_RESAMPLES: usize = 100;
const BASIS_NAMES: [&str; 3] = ["x", "y", "z"];

/// Values indexed `[setting][outcome a][basis][steered outcome]`, where the
/// steered outcome index 0 means `+1`.
pub type Table<T> = Vec<[[[T; 2]; 3]; 2]>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub settings: Vec<MeasurementSetting>,
    pub direction: Direction,
    pub counts: Table<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub mean: f64,
    pub std: f64,
    pub resamples: usize,
    pub seed: u64,
    /// Radius of the assemblage reconstructed from the unresampled counts.
    pub observed: f64,
}

/// Joint outcome probabilities `P(a, β | setting, basis)`; each
/// `(setting, basis)` block sums to one.
pub fn joint_probabilities(
    rho: &TwoQubitState,
    settings: &[MeasurementSetting],
    direction: Direction,
) -> Result<Table<f64>> {
    let asm = build_assemblage(rho, settings, direction.measuring())?;
    Ok((0..asm.len())
        .map(|j| {
            std::array::from_fn(|a| {
                let m = asm.member(j, a as u8);
                let (p, u) = (m.probability(), m.weighted_bloch());
                std::array::from_fn(|b| {
                    let plus = (0.5 * (p + u[b])).max(0.0);
                    let minus = (0.5 * (p - u[b])).max(0.0);
                    [plus, minus]
                })
            })
        })
        .collect())
}

/// Mean count of every cell: `mean_total · P / (3k)`.
pub fn expected_counts(
    rho: &TwoQubitState,
    settings: &[MeasurementSetting],
    direction: Direction,
    mean_total: f64,
) -> Result<Table<f64>> {
    let probs = joint_probabilities(rho, settings, direction)?;
    let scale = mean_total / (3 * settings.len()) as f64;
    Ok(map_table(&probs, |p| p * scale))
}

fn map_table<T: Copy, U>(t: &Table<T>, mut f: impl FnMut(T) -> U) -> Table<U> {
    t.iter()
        .map(|block| {
            std::array::from_fn(|a| std::array::from_fn(|b| std::array::from_fn(|s| f(block[a][b][s]))))
        })
        .collect()
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("positive finite mean");
    d.sample(rng) as u64
}

pub fn simulate_counts(
    rho: &TwoQubitState,
    settings: &[MeasurementSetting],
    direction: Direction,
    mean_total: f64,
    seed: u64,
) -> Result<CountRecord> {
    if !(mean_total >= MIN_MEAN_COUNTS) || !mean_total.is_finite() {
        return Err(Error::Param(format!(
            "mean total counts {mean_total} must be finite and at least {MIN_MEAN_COUNTS}"
        )));
    }
    let means = expected_counts(rho, settings, direction, mean_total)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(CountRecord {
        settings: settings.to_vec(),
        direction,
        counts: map_table(&means, |m| poisson(&mut rng, m)),
    })
}

/// Linear inversion from cell weights (counts or expected counts).
///
/// Every cell of a setting is normalized by the setting's total, with the
/// three bases taken to share it equally: outcome probabilities pool all
/// bases and Bloch component `b` comes from basis `b`. The mismatch between
/// each setting's `Σ_a ρ̃_{a|j}` and the average over settings is split
/// evenly between the two outcomes, so no-signalling holds exactly.
pub fn reconstruct_from_table(
    settings: &[MeasurementSetting],
    direction: Direction,
    table: &Table<f64>,
) -> Result<Assemblage> {
    if table.len() != settings.len() || settings.is_empty() {
        return Err(Error::Param(format!(
            "{} settings but {} count blocks",
            settings.len(),
            table.len()
        )));
    }
    let mut members = Vec::with_capacity(settings.len());
    for (j, block) in table.iter().enumerate() {
        let basis_totals: [f64; 3] =
            std::array::from_fn(|b| (0..2).map(|a| block[a][b][0] + block[a][b][1]).sum());
        for (b, &n) in basis_totals.iter().enumerate() {
            if !(n > 0.0) {
                return Err(Error::InsufficientData(format!(
                    "no counts for setting {j} in basis {}",
                    BASIS_NAMES[b]
                )));
            }
        }
        let total: f64 = basis_totals.iter().sum();
        // each basis gets a third of the setting's counts on average
        let share = total / 3.0;
        let mut pair = Vec::with_capacity(2);
        for a in 0..2 {
            let outcome_total: f64 = (0..3).map(|b| block[a][b][0] + block[a][b][1]).sum();
            if !(outcome_total > 0.0) {
                return Err(Error::InsufficientData(format!(
                    "outcome {a} of setting {j} was never observed"
                )));
            }
            let prob = outcome_total / total;
            let u = Vector3::from_fn(|b, _| (block[a][b][0] - block[a][b][1]) / share);
            pair.push((prob, u));
        }
        members.push(pair);
    }
    let k = members.len() as f64;
    let mut reduced = Vector3::zeros();
    for pair in &members {
        reduced += pair[0].1 + pair[1].1;
    }
    reduced /= k;
    let members: Vec<[ConditionalState; 2]> = members
        .into_iter()
        .enumerate()
        .map(|(j, pair)| {
            let shift = (reduced - pair[0].1 - pair[1].1) * 0.5;
            std::array::from_fn(|a| ConditionalState {
                setting_index: j,
                outcome: a as u8,
                matrix: operator_from_parts(pair[a].0, &(pair[a].1 + shift)),
            })
        })
        .collect();
    Assemblage::from_parts(
        settings.to_vec(),
        members,
        operator_from_parts(1.0, &reduced),
        direction,
    )
}

pub fn reconstruct_assemblage(counts: &CountRecord) -> Result<Assemblage> {
    let table = map_table(&counts.counts, |c| c as f64);
    reconstruct_from_table(&counts.settings, counts.direction, &table)
}

fn radius_of(counts: &CountRecord) -> Result<f64> {
    Ok(direct_radius(&reconstruct_assemblage(counts)?)?.r)
}

/// Resamples every count as `Poisson(count)` and recomputes the radius at
/// the recorded settings; resample `i` uses seed `seed + i`.
pub fn bootstrap_radius(
    counts: &CountRecord,
    k: usize,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapSummary> {
    if counts.settings.len() != k {
        return Err(Error::Param(format!(
            "counts were recorded with {} settings, expected {k}",
            counts.settings.len()
        )));
    }
    if resamples < MIN_RESAMPLES {
        return Err(Error::Param(format!(
            "at least {MIN_RESAMPLES} resamples are required, got {resamples}"
        )));
    }
    let observed = radius_of(counts)?;
    let mut values: Vec<f64> = (0..resamples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i));
            let resampled = CountRecord {
                settings: counts.settings.clone(),
                direction: counts.direction,
                counts: map_table(&counts.counts, |c| poisson(&mut rng, c as f64)),
            };
            radius_of(&resampled)
        })
        .collect::<Result<_>>()?;
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(BootstrapSummary {
        mean,
        std: var.sqrt(),
        resamples,
        seed,
        observed,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvLine {
    setting_index: usize,
    a: u8,
    basis: String,
    bob_outcome: i8,
    count: u64,
}

impl CountRecord {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().flatten().flatten().sum()
    }

    /// Columns `setting_index, a, basis, bob_outcome, count`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (j, block) in self.counts.iter().enumerate() {
            for a in 0..2 {
                for b in 0..3 {
                    for s in 0..2 {
                        w.serialize(CsvLine {
                            setting_index: j,
                            a: a as u8,
                            basis: BASIS_NAMES[b].to_string(),
                            bob_outcome: if s == 0 { 1 } else { -1 },
                            count: block[a][b][s],
                        })
                        .map_err(|e| Error::Io(e.to_string()))?;
                    }
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    /// Inverse of [`CountRecord::to_csv`]; cells missing from the text are zero.
    pub fn from_csv(text: &str, settings: Vec<MeasurementSetting>, direction: Direction) -> Result<Self> {
        let mut counts: Table<u64> = vec![[[[0; 2]; 3]; 2]; settings.len()];
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        for (i, row) in rdr.deserialize::<CsvLine>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::Parse {
                line,
                column: 0,
                field: "row".into(),
                message: e.to_string(),
            })?;
            let bad = |field: &str, message: String| Error::Parse {
                line,
                column: 0,
                field: field.into(),
                message,
            };
            if row.setting_index >= settings.len() {
                return Err(bad("setting_index", format!("{} out of range", row.setting_index)));
            }
            if row.a > 1 {
                return Err(bad("a", format!("outcome {} is not 0 or 1", row.a)));
            }
            let b = BASIS_NAMES
                .iter()
                .position(|&n| n == row.basis)
                .ok_or_else(|| bad("basis", format!("unknown basis {:?}", row.basis)))?;
            let s = match row.bob_outcome {
                1 => 0,
                -1 => 1,
                o => return Err(bad("bob_outcome", format!("outcome {o} is not ±1"))),
            };
            counts[row.setting_index][row.a as usize][b][s] = row.count;
        }
        Ok(Self {
            settings,
            direction,
            counts,
        })
    }
}
