//! Log-barrier path following for small problems of the form
//!
//! ```text
//! minimize   cᵀz
//! subject to G_i z + g_i ∈ Q⁴   for every cone i
//! ```
//!
//! where `Q⁴ = {(w₀, w̄) : w₀ ≥ |w̄|}`. Equality constraints are expected to be
//! eliminated by the caller (variables live in a null-space parametrization).
//! Each cone contributes `−log(w₀² − |w̄|²)`, a barrier of degree 2, so a
//! centered point with barrier weight `τ` is within `2m/τ` of the optimum.

use nalgebra::{Cholesky, DMatrix, DVector, Matrix4, Vector4};

use crate::error::{Error, Result};

/// Newton steps per barrier weight before the point is taken as centered.
const MAX_CENTERING_STEPS: usize = 60;

pub(crate) struct AffineCone {
    pub map: DMatrix<f64>,
    pub offset: Vector4<f64>,
}

impl AffineCone {
    fn eval(&self, z: &DVector<f64>) -> Vector4<f64> {
        let mut w = self.offset;
        for (col, &zc) in z.iter().enumerate() {
            if zc != 0.0 {
                for r in 0..4 {
                    w[r] += self.map[(r, col)] * zc;
                }
            }
        }
        w
    }
}

fn cone_slack(w: &Vector4<f64>) -> f64 {
    if w[0] <= 0.0 {
        return f64::NEG_INFINITY;
    }
    w[0] * w[0] - (w[1] * w[1] + w[2] * w[2] + w[3] * w[3])
}

pub(crate) struct ConeProgram {
    pub objective: DVector<f64>,
    pub cones: Vec<AffineCone>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BarrierOptions {
    /// Stop once the certified gap `2m/τ` is below this.
    pub gap_tol: f64,
    pub tau0: f64,
    pub tau_factor: f64,
    pub max_newton: usize,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-10,
            tau0: 1.0,
            tau_factor: 20.0,
            max_newton: 2_000,
        }
    }
}

/// What the caller wants after a Newton step.
pub(crate) enum Control {
    Continue,
    Stop,
}

pub(crate) struct BarrierOutcome {
    pub z: DVector<f64>,
    pub objective: f64,
    /// Upper bound on `objective − optimum`; only meaningful when `centered`.
    pub gap: f64,
    pub centered: bool,
    pub newton_steps: usize,
}

impl ConeProgram {
    fn degree(&self) -> f64 {
        2.0 * self.cones.len() as f64
    }

    pub fn strictly_feasible(&self, z: &DVector<f64>) -> bool {
        self.cones.iter().all(|c| {
            let w = c.eval(z);
            w[0] > 0.0 && cone_slack(&w) > 0.0
        })
    }

    /// `f(trial) − f(z)` for `f = τ cᵀz − Σ log slack`, evaluated as a sum of
    /// differences so that it stays accurate when `τ cᵀz` is large.
    fn barrier_change(&self, z: &DVector<f64>, trial: &DVector<f64>, tau: f64) -> Option<f64> {
        let mut df = tau * self.objective.dot(&(trial - z));
        for c in &self.cones {
            let s1 = cone_slack(&c.eval(trial));
            if !(s1 > 0.0) {
                return None;
            }
            let s0 = cone_slack(&c.eval(z));
            df -= (s1 / s0).ln();
        }
        Some(df)
    }

    fn gradient_hessian(&self, z: &DVector<f64>, tau: f64) -> (DVector<f64>, DMatrix<f64>) {
        let n = z.len();
        let mut grad = &self.objective * tau;
        let mut hess = DMatrix::<f64>::zeros(n, n);
        let mut hg = DMatrix::<f64>::zeros(4, n);
        let j = Matrix4::from_diagonal(&Vector4::new(1.0, -1.0, -1.0, -1.0));
        for c in &self.cones {
            let w = c.eval(z);
            let s = cone_slack(&w);
            let jw = Vector4::new(w[0], -w[1], -w[2], -w[3]);
            let g_local = jw * (-2.0 / s);
            let h_local = j * (-2.0 / s) + (jw * jw.transpose()) * (4.0 / (s * s));
            for col in 0..n {
                let m = c.map.column(col);
                grad[col] += g_local.dot(&m);
                for r in 0..4 {
                    hg[(r, col)] = h_local[(r, 0)] * m[0]
                        + h_local[(r, 1)] * m[1]
                        + h_local[(r, 2)] * m[2]
                        + h_local[(r, 3)] * m[3];
                }
            }
            hess.gemm_tr(1.0, &c.map, &hg, 1.0);
        }
        (grad, hess)
    }

    fn newton_direction(grad: &DVector<f64>, hess: DMatrix<f64>) -> Option<DVector<f64>> {
        let n = grad.len();
        if let Some(ch) = Cholesky::new(hess.clone()) {
            return Some(-ch.solve(grad));
        }
        let scale = (0..n).map(|i| hess[(i, i)].abs()).fold(0.0, f64::max).max(1.0);
        let mut ridge = 1e-14 * scale;
        for _ in 0..12 {
            let mut h = hess.clone();
            for i in 0..n {
                h[(i, i)] += ridge;
            }
            if let Some(ch) = Cholesky::new(h) {
                return Some(-ch.solve(grad));
            }
            ridge *= 100.0;
        }
        None
    }

    /// Path following from the strictly feasible `z0`. `monitor` is called
    /// after every Newton step with `(z, objective, certified_gap)`, where the
    /// gap is `Some` only at centered points; returning `Control::Stop` ends
    /// the run early.
    pub fn solve<F>(&self, z0: DVector<f64>, opts: &BarrierOptions, mut monitor: F) -> Result<BarrierOutcome>
    where
        F: FnMut(&DVector<f64>, f64, Option<f64>) -> Control,
    {
        if !self.strictly_feasible(&z0) {
            return Err(Error::SolverStall("barrier start is not strictly feasible".into()));
        }
        let nu = self.degree();
        let mut z = z0;
        let mut tau = opts.tau0;
        let mut steps = 0usize;
        loop {
            let mut centering_steps = 0usize;
            loop {
                if steps >= opts.max_newton {
                    return Err(Error::SolverStall(format!(
                        "barrier method exceeded {} Newton steps (tau = {tau:e})",
                        opts.max_newton
                    )));
                }
                let (grad, hess) = self.gradient_hessian(&z, tau);
                let dir = Self::newton_direction(&grad, hess).ok_or_else(|| {
                    Error::SolverStall("singular Newton system".into())
                })?;
                let decrement = -grad.dot(&dir);
                if !decrement.is_finite() {
                    return Err(Error::SolverStall("non-finite Newton decrement".into()));
                }
                if decrement <= 2e-11 {
                    break;
                }
                let mut step = 1.0;
                let mut accepted = false;
                for _ in 0..60 {
                    let trial = &z + &dir * step;
                    if let Some(df) = self.barrier_change(&z, &trial, tau) {
                        if df <= -0.25 * step * decrement {
                            z = trial;
                            accepted = true;
                            break;
                        }
                    }
                    step *= 0.5;
                }
                steps += 1;
                centering_steps += 1;
                if !accepted || centering_steps >= MAX_CENTERING_STEPS {
                    // No measurable progress left at this τ: the point is as
                    // centered as floating point allows.
                    break;
                }
                let obj = self.objective.dot(&z);
                if let Control::Stop = monitor(&z, obj, None) {
                    return Ok(BarrierOutcome {
                        objective: obj,
                        z,
                        gap: f64::INFINITY,
                        centered: false,
                        newton_steps: steps,
                    });
                }
            }
            let gap = nu / tau;
            let obj = self.objective.dot(&z);
            if gap <= opts.gap_tol {
                return Ok(BarrierOutcome {
                    objective: obj,
                    z,
                    gap,
                    centered: true,
                    newton_steps: steps,
                });
            }
            if let Control::Stop = monitor(&z, obj, Some(gap)) {
                return Ok(BarrierOutcome {
                    objective: obj,
                    z,
                    gap,
                    centered: true,
                    newton_steps: steps,
                });
            }
            tau *= opts.tau_factor;
        }
    }
}
