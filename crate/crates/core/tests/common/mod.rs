//! Test support: random states and an independent brute-force radius
//! minimizer for two settings.
#![allow(dead_code)]

use nalgebra::{Vector3, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use steerlab::assemblage::{Assemblage, MeasurementSetting};
use steerlab::qubit::{ComplexMatrix2, ComplexMatrix4, TwoQubitState};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// `GG†/tr(GG†)` with `G` a complex Ginibre matrix.
pub fn random_state(rng: &mut ChaCha8Rng) -> TwoQubitState {
    let g = ComplexMatrix4::from_fn(|_, _| Complex64::new(normal(rng), normal(rng)));
    let m = g * g.adjoint();
    let tr = m.trace().re;
    TwoQubitState::new(m.unscale(tr)).expect("Ginibre state is valid")
}

pub fn random_axis(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(normal(rng), normal(rng), normal(rng));
        if v.norm() > 1e-3 {
            return v.normalize();
        }
    }
}

/// `k` random axes, pairwise at least ~8° from parallel.
pub fn random_settings(rng: &mut ChaCha8Rng, k: usize) -> Vec<MeasurementSetting> {
    loop {
        let axes: Vec<_> = (0..k).map(|_| random_axis(rng)).collect();
        let ok = (0..k).all(|i| (i + 1..k).all(|j| axes[i].dot(&axes[j]).abs() < 0.99));
        if ok {
            return axes
                .into_iter()
                .map(|a| MeasurementSetting::new(a).unwrap())
                .collect();
        }
    }
}

/// Haar-like SU(2) element from a random unit quaternion.
pub fn random_unitary(rng: &mut ChaCha8Rng) -> ComplexMatrix2 {
    let q = Vector4::new(normal(rng), normal(rng), normal(rng), normal(rng)).normalize();
    let (a, b) = (Complex64::new(q[0], q[1]), Complex64::new(q[2], q[3]));
    ComplexMatrix2::new(a, -b.conj(), b, a.conj())
}

pub fn max_abs_diff2(a: &ComplexMatrix2, b: &ComplexMatrix2) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Nelder–Mead on `f` from `x0` with initial simplex size `scale`.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], scale: f64, iters: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += scale;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    for _ in 0..iters {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        if (vals[n] - vals[0]).abs() < 1e-13 {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|d| pts[..n].iter().map(|p| p[d]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|d| centroid[d] + t * (pts[n][d] - centroid[d])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
        } else {
            let xc = if fr < vals[n] { along(-0.5) } else { along(0.5) };
            let fc = f(&xc);
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    pts[i] = (0..n).map(|d| pts[0][d] + 0.5 * (pts[i][d] - pts[0][d])).collect();
                    vals[i] = f(&pts[i]);
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (pts[best].clone(), vals[best])
}

/// Brute-force minimal maximal radius for a two-setting assemblage.
///
/// Strategies `(a₀, a₁)` carry weights `p` and weighted Bloch vectors `v`.
/// The marginal equalities leave `p₀₀ = α` and `v₀₀ = w` free:
/// `p₀₁ = P(0|0) − α`, `p₁₀ = P(0|1) − α`, `p₁₁ = 1 − P(0|0) − P(0|1) + α`
/// and likewise for `v`. The objective `max |v|/p` is minimized by
/// multi-start Nelder–Mead in `(α, w)`, with a quadratic penalty keeping
/// the weights positive, followed by a golden-section pass over `α` with
/// Nelder–Mead in `w`.
pub fn brute_force_radius(asm: &Assemblage, seed: u64) -> f64 {
    assert_eq!(asm.len(), 2);
    let p0 = asm.member(0, 0).probability();
    let p1 = asm.member(1, 0).probability();
    let u0 = asm.member(0, 0).weighted_bloch();
    let u1 = asm.member(1, 0).weighted_bloch();
    let (_, u) = steerlab::qubit::operator_parts(asm.reduced());
    let lo = (p0 + p1 - 1.0).max(0.0);
    let hi = p0.min(p1);

    let objective = |alpha: f64, w: Vector3<f64>| -> f64 {
        let p = [alpha, p0 - alpha, p1 - alpha, 1.0 - p0 - p1 + alpha];
        let v = [w, u0 - w, u1 - w, u - u0 - u1 + w];
        let mut worst: f64 = 0.0;
        let mut penalty = 0.0;
        for i in 0..4 {
            if p[i] <= 1e-12 {
                penalty += 1e3 * (1e-12 - p[i] + v[i].norm()).powi(2) + 1e3;
                continue;
            }
            worst = worst.max(v[i].norm() / p[i]);
        }
        worst + penalty
    };

    let mut rng = rng(seed);
    let mut best = f64::INFINITY;
    let mut best_x = vec![0.5 * (lo + hi), 0.0, 0.0, 0.0];
    for _ in 0..12 {
        let alpha = lo + (hi - lo) * rng.random::<f64>();
        let w = random_axis(&mut rng) * 0.3 * rng.random::<f64>();
        let f = |x: &[f64]| objective(x[0], Vector3::new(x[1], x[2], x[3]));
        let mut x = vec![alpha, w.x, w.y, w.z];
        let mut val = f(&x);
        for round in 0..6 {
            let (nx, nv) = nelder_mead(&f, &x, 0.1 / (1 << round) as f64, 2000);
            x = nx;
            val = nv;
        }
        if val < best {
            best = val;
            best_x = x;
        }
    }

    let inner = |alpha: f64, start: Vector3<f64>| -> (f64, Vector3<f64>) {
        let f = |x: &[f64]| objective(alpha, Vector3::new(x[0], x[1], x[2]));
        let mut x = vec![start.x, start.y, start.z];
        let mut val = f(&x);
        for round in 0..5 {
            let (nx, nv) = nelder_mead(&f, &x, 0.05 / (1 << round) as f64, 1500);
            x = nx;
            val = nv;
        }
        (val, Vector3::new(x[0], x[1], x[2]))
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut w = Vector3::new(best_x[1], best_x[2], best_x[3]);
    for _ in 0..40 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        let (fc, wc) = inner(c, w);
        let (fd, wd) = inner(d, w);
        if fc < fd {
            b = d;
            w = wc;
        } else {
            a = c;
            w = wd;
        }
        best = best.min(fc).min(fd);
    }
    best
}
