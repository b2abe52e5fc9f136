//! Linear part of the hidden-state model: marginal constraints over the
//! deterministic strategies, their null space and a particular solution.

use nalgebra::{DMatrix, DVector, SymmetricEigen, Vector3};

use crate::assemblage::Assemblage;
use crate::error::{Error, Result};

/// Outcomes with probability at or below this are treated as impossible:
/// every strategy producing them gets weight zero.
pub(crate) const PRUNE_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-10;
const CONSISTENCY_TOL: f64 = 1e-8;

pub(crate) struct Constraints {
    k: usize,
    /// Strategy indices that survive pruning.
    active: Vec<usize>,
    /// `P(a|j)` and `tr(ρ̃_{a|j} σ)` after pruning, indexed `[j][a]`.
    prob: Vec<[f64; 2]>,
    bloch: Vec<[Vector3<f64>; 2]>,
    reduced_bloch: Vector3<f64>,
    p_part: DVector<f64>,
    v_part: Vec<Vector3<f64>>,
    null: DMatrix<f64>,
}

impl Constraints {
    pub fn new(asm: &Assemblage) -> Result<Self> {
        let k = asm.len();
        let (reduced_trace, reduced_bloch) = crate::qubit::operator_parts(asm.reduced());
        let mut prob = Vec::with_capacity(k);
        let mut bloch = Vec::with_capacity(k);
        let mut pruned = Vec::new();
        for j in 0..k {
            let mut pj = [asm.member(j, 0).probability(), asm.member(j, 1).probability()];
            let mut uj = [asm.member(j, 0).weighted_bloch(), asm.member(j, 1).weighted_bloch()];
            for a in 0..2 {
                if pj[a] <= PRUNE_TOL {
                    pj = [0.0, 0.0];
                    pj[1 - a] = reduced_trace;
                    uj[a] = Vector3::zeros();
                    uj[1 - a] = reduced_bloch;
                    pruned.push((j, a));
                    break;
                }
            }
            prob.push(pj);
            bloch.push(uj);
        }
        let active: Vec<usize> = (0..1usize << k)
            .filter(|&idx| pruned.iter().all(|&(j, a)| (idx >> j) & 1 != a))
            .collect();

        // rows: normalization, then outcome 0 of every setting
        let rows = 1 + k;
        let cols = active.len();
        let mut a_mat = DMatrix::<f64>::zeros(rows, cols);
        let mut b_p = DVector::<f64>::zeros(rows);
        let mut b_v = vec![Vector3::<f64>::zeros(); rows];
        for (c, &idx) in active.iter().enumerate() {
            a_mat[(0, c)] = 1.0;
            for j in 0..k {
                if (idx >> j) & 1 == 0 {
                    a_mat[(1 + j, c)] = 1.0;
                }
            }
        }
        b_p[0] = reduced_trace;
        b_v[0] = reduced_bloch;
        for j in 0..k {
            b_p[1 + j] = prob[j][0];
            b_v[1 + j] = bloch[j][0];
        }

        let gram = a_mat.transpose() * &a_mat;
        let eig = SymmetricEigen::new(gram);
        let max_ev = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let mut range = Vec::new();
        let mut null_cols = Vec::new();
        for i in 0..cols {
            if eig.eigenvalues[i] > RANK_TOL * max_ev {
                range.push(i);
            } else {
                null_cols.push(i);
            }
        }
        // pseudo-inverse applied to Aᵀb
        let pinv = |rhs: &DVector<f64>| -> DVector<f64> {
            let atb = a_mat.transpose() * rhs;
            let mut x = DVector::zeros(cols);
            for &i in &range {
                let e = eig.eigenvectors.column(i);
                x += e * (e.dot(&atb) / eig.eigenvalues[i]);
            }
            x
        };
        let p_part = pinv(&b_p);
        let mut v_part = vec![Vector3::zeros(); cols];
        for comp in 0..3 {
            let rhs = DVector::from_iterator(rows, b_v.iter().map(|v| v[comp]));
            let x = pinv(&rhs);
            let res = (&a_mat * &x - &rhs).amax();
            if res > CONSISTENCY_TOL {
                return Err(Error::Validation(format!(
                    "hidden-state constraints are inconsistent (residual {res:e})"
                )));
            }
            for (s, v) in v_part.iter_mut().enumerate() {
                v[comp] = x[s];
            }
        }
        let res = (&a_mat * &p_part - &b_p).amax();
        if res > CONSISTENCY_TOL {
            return Err(Error::Validation(format!(
                "weight constraints are inconsistent (residual {res:e})"
            )));
        }
        let null = if null_cols.is_empty() {
            DMatrix::zeros(cols, 0)
        } else {
            DMatrix::from_columns(
                &null_cols
                    .iter()
                    .map(|&i| eig.eigenvectors.column(i).into_owned())
                    .collect::<Vec<_>>(),
            )
        };
        Ok(Self {
            k,
            active,
            prob,
            bloch,
            reduced_bloch,
            p_part,
            v_part,
            null,
        })
    }

    pub fn strategy_count(&self) -> usize {
        1 << self.k
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn null_dim(&self) -> usize {
        self.null.ncols()
    }

    pub fn null(&self) -> &DMatrix<f64> {
        &self.null
    }

    pub fn p_part(&self) -> &DVector<f64> {
        &self.p_part
    }

    pub fn v_part(&self) -> &[Vector3<f64>] {
        &self.v_part
    }

    /// Largest Bloch-type datum; zero iff the all-zero hidden vectors work.
    pub fn bloch_data_norm(&self) -> f64 {
        self.bloch
            .iter()
            .flatten()
            .map(|u| u.norm())
            .fold(self.reduced_bloch.norm(), f64::max)
    }

    /// The model built from independent marginals:
    /// `p_λ = Π_j P(λ_j|j)` and
    /// `v_λ = p_λ·(Σ_j u_{λ_j|j}/P(λ_j|j) − (k − 1)·u)` with `u` the reduced
    /// Bloch vector. It satisfies every equality constraint, and its weights
    /// are strictly positive on active strategies.
    pub fn product_model(&self) -> (DVector<f64>, Vec<Vector3<f64>>) {
        let n = self.active.len();
        let mut p = DVector::zeros(n);
        let mut v = vec![Vector3::zeros(); n];
        for (s, &idx) in self.active.iter().enumerate() {
            let mut weight = 1.0;
            let mut dir = -self.reduced_bloch * (self.k as f64 - 1.0);
            for j in 0..self.k {
                let a = (idx >> j) & 1;
                weight *= self.prob[j][a];
                dir += self.bloch[j][a] / self.prob[j][a];
            }
            p[s] = weight;
            v[s] = dir * weight;
        }
        (p, v)
    }
}
