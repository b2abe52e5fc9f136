//! Local-hidden-state models and the minimal maximal hidden-state radius.
//!
//! For an assemblage with `k` settings a model is a weighted family of
//! hidden states, one per deterministic strategy (an outcome for every
//! setting). Writing `p_λ` for the weights and `v_λ = p_λ·R_λ` for the
//! weighted Bloch vectors, the model must reproduce every conditional state:
//!
//! ```text
//! Σ_{λ: λ_j = a} p_λ = tr ρ̃_{a|j}        Σ_{λ: λ_j = a} v_λ = tr(ρ̃_{a|j} σ)
//! ```
//!
//! The radius `r` is the smallest `t` for which some model has
//! `|v_λ| ≤ t·p_λ` for all `λ`. The constraint set grows with `t`, so `r` is
//! found by bisection on [`feasible_at`]; [`direct_radius`] computes the same
//! number from the homogenized program (`q_λ = t·p_λ`), which is linear in
//! `t` and is used where many evaluations are needed.

mod barrier;
mod constraints;

use nalgebra::{DMatrix, DVector, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::assemblage::Assemblage;
use crate::error::{Error, Result};
use barrier::{AffineCone, BarrierOptions, ConeProgram, Control};
use constraints::Constraints;

/// Largest setting count accepted by [`enumerate_strategies`].
pub const MAX_STRATEGY_SETTINGS: usize = 16;
/// Largest setting count the solver accepts (dense linear algebra over 2^k
/// strategies).
pub const MAX_SOLVER_SETTINGS: usize = 8;
/// Constraint residual (and cone margin) below which a radius is feasible.
pub const FEAS_TOL: f64 = 1e-7;
pub const DEFAULT_TOL: f64 = 1e-5;
/// Radii are reported as `|v|/max(p, ε)`.
pub const DISPLAY_EPS: f64 = 1e-12;

/// An assignment of one outcome to each of `k` settings; bit `j` of
/// `index` is the outcome for setting `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub index: usize,
    pub settings: usize,
}

impl DeterministicStrategy {
    pub fn outcome(&self, setting: usize) -> u8 {
        ((self.index >> setting) & 1) as u8
    }

    pub fn outcomes(&self) -> Vec<u8> {
        (0..self.settings).map(|j| self.outcome(j)).collect()
    }
}

pub fn enumerate_strategies(k: usize) -> Result<Vec<DeterministicStrategy>> {
    if k == 0 || k > MAX_STRATEGY_SETTINGS {
        return Err(Error::Cap {
            what: "setting count",
            value: k,
            max: MAX_STRATEGY_SETTINGS,
        });
    }
    Ok((0..1usize << k)
        .map(|index| DeterministicStrategy { index, settings: k })
        .collect())
}

/// Weights `p_λ` and weighted Bloch vectors `v_λ = p_λ R_λ`, one per
/// strategy in index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenStateEnsemble {
    pub weights: Vec<f64>,
    pub vectors: Vec<Vector3<f64>>,
}

impl HiddenStateEnsemble {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `|R_λ|`, defined as 0 for an empty slot.
    pub fn radii(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.vectors)
            .map(|(&p, v)| {
                let n = v.norm();
                if n == 0.0 {
                    0.0
                } else {
                    n / p.max(DISPLAY_EPS)
                }
            })
            .collect()
    }

    pub fn max_radius(&self) -> f64 {
        self.radii().into_iter().fold(0.0, f64::max)
    }

    /// Largest amount by which `|v_λ|` exceeds `t·p_λ`.
    pub fn cone_violation(&self, t: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.vectors)
            .map(|(&p, v)| v.norm() - t * p)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest deviation from the assemblage over every (setting, outcome)
    /// trace and Bloch component, plus the normalization.
    pub fn residual(&self, asm: &Assemblage) -> f64 {
        let k = asm.len();
        let mut worst = (self.weights.iter().sum::<f64>() - 1.0).abs();
        for j in 0..k {
            for a in 0..2u8 {
                let member = asm.member(j, a);
                let mut p = 0.0;
                let mut v = Vector3::zeros();
                for (idx, (w, vec)) in self.weights.iter().zip(&self.vectors).enumerate() {
                    if ((idx >> j) & 1) as u8 == a {
                        p += w;
                        v += vec;
                    }
                }
                worst = worst.max((p - member.probability()).abs());
                worst = worst.max((v - member.weighted_bloch()).amax());
            }
        }
        worst
    }
}

/// Outcome of a fixed-radius feasibility test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Feasibility {
    /// A model with `|v_λ| ≤ t·p_λ − margin` exists.
    Feasible {
        ensemble: HiddenStateEnsemble,
        margin: f64,
    },
    /// No model exists; every candidate violates some cone by at least `gap`.
    Infeasible { gap: f64 },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }
}

fn check_size(asm: &Assemblage) -> Result<()> {
    if asm.len() > MAX_SOLVER_SETTINGS {
        return Err(Error::Cap {
            what: "solver setting count",
            value: asm.len(),
            max: MAX_SOLVER_SETTINGS,
        });
    }
    Ok(())
}

/// Maps reduced coordinates `z = [extra, α, β]` to the full model.
struct Layout<'a> {
    c: &'a Constraints,
}

impl Layout<'_> {
    fn dim(&self) -> usize {
        1 + 4 * self.c.null_dim()
    }

    fn alpha(&self, i: usize) -> usize {
        1 + i
    }

    fn beta(&self, i: usize, comp: usize) -> usize {
        1 + self.c.null_dim() + 3 * i + comp
    }

    /// Reduced coordinates of a point whose weight part differs from the
    /// particular solution by `p_delta` (a null-space vector).
    fn encode(&self, extra: f64, p_delta: &DVector<f64>, v: &[Vector3<f64>]) -> DVector<f64> {
        let mut z = DVector::zeros(self.dim());
        z[0] = extra;
        let d = self.c.null_dim();
        let null = self.c.null();
        for i in 0..d {
            let col = null.column(i);
            z[self.alpha(i)] = col.dot(p_delta);
            for comp in 0..3 {
                let mut acc = 0.0;
                for (s, vs) in v.iter().enumerate() {
                    acc += col[s] * (vs[comp] - self.c.v_part()[s][comp]);
                }
                z[self.beta(i, comp)] = acc;
            }
        }
        z
    }

    /// `(N α, v_part + N β)` on active strategies.
    fn decode(&self, z: &DVector<f64>) -> (DVector<f64>, Vec<Vector3<f64>>) {
        let d = self.c.null_dim();
        let null = self.c.null();
        let n_active = self.c.active().len();
        let mut p_null = DVector::zeros(n_active);
        let mut v = self.c.v_part().to_vec();
        for i in 0..d {
            let col = null.column(i);
            let beta = Vector3::new(z[self.beta(i, 0)], z[self.beta(i, 1)], z[self.beta(i, 2)]);
            for s in 0..n_active {
                p_null[s] += col[s] * z[self.alpha(i)];
                v[s] += beta * col[s];
            }
        }
        (p_null, v)
    }

    /// Cone map with first coordinate `w₀ = lead·z₀ + scale·(N α)_λ + offset₀`.
    fn cone(&self, s: usize, lead: f64, scale: f64, offset0: f64) -> AffineCone {
        let d = self.c.null_dim();
        let null = self.c.null();
        let mut map = DMatrix::zeros(4, self.dim());
        map[(0, 0)] = lead;
        for i in 0..d {
            map[(0, self.alpha(i))] = scale * null[(s, i)];
            for comp in 0..3 {
                map[(1 + comp, self.beta(i, comp))] = null[(s, i)];
            }
        }
        let vp = self.c.v_part()[s];
        AffineCone {
            map,
            offset: Vector4::new(offset0, vp.x, vp.y, vp.z),
        }
    }
}

fn ensemble_from_active(c: &Constraints, p: &DVector<f64>, v: &[Vector3<f64>]) -> HiddenStateEnsemble {
    let total = c.strategy_count();
    let mut weights = vec![0.0; total];
    let mut vectors = vec![Vector3::zeros(); total];
    for (s, &idx) in c.active().iter().enumerate() {
        weights[idx] = p[s];
        vectors[idx] = v[s];
    }
    HiddenStateEnsemble { weights, vectors }
}

/// Decides whether a model with all hidden-state radii at most `t` exists.
///
/// The decision maximizes the cone margin `s` subject to
/// `t·p_λ − s ≥ |v_λ|` over the affine model set; the model exists iff the
/// optimal margin is nonnegative (up to [`FEAS_TOL`]).
pub fn feasible_at(t: f64, asm: &Assemblage) -> Result<Feasibility> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Param(format!("radius {t} must be finite and nonnegative")));
    }
    check_size(asm)?;
    let c = Constraints::new(asm)?;
    feasible_with(&c, t)
}

fn feasible_with(c: &Constraints, t: f64) -> Result<Feasibility> {
    let (p0, v0) = c.product_model();
    if t <= f64::EPSILON {
        // At t = 0 every hidden vector must vanish.
        let worst = c.bloch_data_norm();
        return Ok(if worst <= FEAS_TOL {
            Feasibility::Feasible {
                ensemble: ensemble_from_active(c, &p0, &vec![Vector3::zeros(); p0.len()]),
                margin: 0.0,
            }
        } else {
            Feasibility::Infeasible { gap: worst }
        });
    }
    let layout = Layout { c };
    let cones: Vec<AffineCone> = (0..c.active().len())
        .map(|s| layout.cone(s, -1.0, t, t * c.p_part()[s]))
        .collect();
    let mut objective = DVector::zeros(layout.dim());
    objective[0] = -1.0;
    let program = ConeProgram { objective, cones };

    let s0 = (0..p0.len())
        .map(|s| t * p0[s] - v0[s].norm())
        .fold(f64::INFINITY, f64::min)
        - 1.0;
    let z0 = layout.encode(s0, &(&p0 - c.p_part()), &v0);

    let mut verdict: Option<bool> = None;
    let out = program.solve(z0, &BarrierOptions::default(), |z, _obj, gap| {
        if z[0] >= 0.0 {
            verdict = Some(true);
            return Control::Stop;
        }
        if let Some(gap) = gap {
            if z[0] + gap < -FEAS_TOL {
                verdict = Some(false);
                return Control::Stop;
            }
        }
        Control::Continue
    })?;
    let margin = out.z[0];
    let feasible = verdict.unwrap_or(margin >= -FEAS_TOL);
    if feasible {
        let (p_null, v) = layout.decode(&out.z);
        let p = c.p_part() + p_null;
        Ok(Feasibility::Feasible {
            ensemble: ensemble_from_active(c, &p, &v),
            margin,
        })
    } else {
        let bound = if out.centered { margin + out.gap } else { margin };
        Ok(Feasibility::Infeasible { gap: -bound })
    }
}

/// Result of the bisection for the minimal maximal hidden-state radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusResult {
    /// Upper end of the final bracket: feasible, and within `tol` of the optimum.
    pub r: f64,
    /// Model with every radius at most `r + tol`.
    pub ensemble: HiddenStateEnsemble,
    pub bisection_interval: (f64, f64),
    /// Number of feasibility tests performed.
    pub iterations: usize,
}

/// Bisection bracket start: `max(1, max |normalized Bloch| / min probability) + 1`,
/// raised if needed to the radius of the product-of-marginals model.
fn initial_upper_bound(asm: &Assemblage, c: &Constraints) -> f64 {
    let mut max_norm: f64 = 0.0;
    let mut min_prob = f64::INFINITY;
    for m in asm.members().iter().flatten() {
        let prob = m.probability();
        if prob > constraints::PRUNE_TOL {
            max_norm = max_norm.max(m.normalized_bloch().norm());
            min_prob = min_prob.min(prob);
        }
    }
    let spec_bound = (max_norm / min_prob).max(1.0) + 1.0;
    let (p0, v0) = c.product_model();
    let product = (0..p0.len())
        .map(|s| v0[s].norm() / p0[s])
        .fold(0.0, f64::max);
    spec_bound.max(product * (1.0 + 1e-9) + FEAS_TOL)
}

/// Minimal over models of the maximal hidden-state Bloch radius, to within
/// `tol` (accepted range `[1e-8, 1e-2]`).
pub fn min_max_radius(asm: &Assemblage, tol: f64) -> Result<RadiusResult> {
    if !(1e-8..=1e-2).contains(&tol) {
        return Err(Error::Param(format!("tolerance {tol} outside [1e-8, 1e-2]")));
    }
    check_size(asm)?;
    let c = Constraints::new(asm)?;
    let mut iterations = 0;
    let mut hi = initial_upper_bound(asm, &c);
    loop {
        iterations += 1;
        if feasible_with(&c, hi)?.is_feasible() {
            break;
        }
        if iterations > 60 {
            return Err(Error::SolverStall(format!("no feasible radius found up to {hi:e}")));
        }
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        iterations += 1;
        if feasible_with(&c, mid)?.is_feasible() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    iterations += 1;
    let ensemble = match feasible_with(&c, hi + tol)? {
        Feasibility::Feasible { ensemble, .. } => ensemble,
        Feasibility::Infeasible { gap } => {
            return Err(Error::SolverStall(format!(
                "radius {} infeasible (gap {gap:e}) although {hi} was feasible",
                hi + tol
            )))
        }
    };
    Ok(RadiusResult {
        r: hi,
        ensemble,
        bisection_interval: (lo, hi),
        iterations,
    })
}

/// `min_max_radius(asm).r ≤ 1 + tol` at the default tolerance.
pub fn has_lhsm(asm: &Assemblage) -> Result<bool> {
    Ok(min_max_radius(asm, DEFAULT_TOL)?.r <= 1.0 + DEFAULT_TOL)
}

/// Radius from a single solve of the homogenized program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectRadius {
    pub r: f64,
    pub ensemble: HiddenStateEnsemble,
    pub newton_steps: usize,
}

/// Solves `min t` subject to `|v_λ| ≤ q_λ`, `Σ_{λ_j=a} q_λ = t·P(a|j)`
/// and the Bloch constraints; `p_λ = q_λ/t` recovers the model. Accurate to
/// about `1e-9`.
pub fn direct_radius(asm: &Assemblage) -> Result<DirectRadius> {
    direct_radius_within(asm, 1e-9)
}

/// [`direct_radius`] stopped once the optimum is bracketed to `gap_tol`.
pub(crate) fn direct_radius_within(asm: &Assemblage, gap_tol: f64) -> Result<DirectRadius> {
    check_size(asm)?;
    let c = Constraints::new(asm)?;
    let (p0, v0) = c.product_model();
    if c.bloch_data_norm() <= FEAS_TOL {
        return Ok(DirectRadius {
            r: 0.0,
            ensemble: ensemble_from_active(&c, &p0, &vec![Vector3::zeros(); p0.len()]),
            newton_steps: 0,
        });
    }
    let layout = Layout { c: &c };
    let cones: Vec<AffineCone> = (0..c.active().len())
        .map(|s| layout.cone(s, c.p_part()[s], 1.0, 0.0))
        .collect();
    let mut objective = DVector::zeros(layout.dim());
    objective[0] = 1.0;
    let program = ConeProgram { objective, cones };

    let t0 = (0..p0.len())
        .map(|s| v0[s].norm() / p0[s])
        .fold(0.0, f64::max)
        + 1.0;
    // q = t0·p0 = t0·p_part + N α lies on the homogenized affine set.
    let z0 = layout.encode(t0, &((&p0 - c.p_part()) * t0), &v0);
    let opts = BarrierOptions {
        gap_tol,
        ..BarrierOptions::default()
    };
    let out = program.solve(z0, &opts, |_, _, _| Control::Continue)?;
    let t = out.objective;
    let (q_null, v) = layout.decode(&out.z);
    let q = c.p_part() * t + q_null;
    let p = q / t;
    Ok(DirectRadius {
        r: t,
        ensemble: ensemble_from_active(&c, &p, &v),
        newton_steps: out.newton_steps,
    })
}
