//! Damped least squares (Levenberg–Marquardt) on products of SU(2).
//!
//! Unknowns are tuples of group elements; each free coordinate contributes
//! three tangent directions through right translation `U ↦ U·exp(δ)`. After
//! every update the coordinates are renormalized onto the sphere.

use nalgebra::{DMatrix, DVector};

use crate::su2::{exp_unchecked, GroupElement};

/// Residual blocks, one 4-vector per equation.
pub(crate) type Blocks = Vec<[f64; 4]>;

pub(crate) fn block(lhs: GroupElement, rhs: GroupElement) -> [f64; 4] {
    [lhs.w - rhs.w, lhs.x - rhs.x, lhs.y - rhs.y, lhs.z - rhs.z]
}

pub(crate) fn block_norm(b: &[f64; 4]) -> f64 {
    (b[0] * b[0] + b[1] * b[1] + b[2] * b[2] + b[3] * b[3]).sqrt()
}

pub(crate) fn max_block(blocks: &Blocks) -> f64 {
    blocks.iter().map(block_norm).fold(0.0, f64::max)
}

fn sum_sq(blocks: &Blocks) -> f64 {
    blocks.iter().map(|b| b.iter().map(|v| v * v).sum::<f64>()).sum()
}

#[derive(Clone, Debug)]
pub(crate) struct Outcome {
    pub point: Vec<GroupElement>,
    /// Largest equation residual at `point`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

const FD_STEP: f64 = 1e-7;
const AXES: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

fn perturb(point: &[GroupElement], coord: usize, axis: usize, h: f64) -> Vec<GroupElement> {
    let mut p = point.to_vec();
    p[coord] = p[coord] * exp_unchecked(AXES[axis], h);
    p
}

/// Minimizes the stacked residual starting at `start`; only coordinates with
/// `free[i]` move. Stops once the largest block is below `tol`.
pub(crate) fn solve(
    start: &[GroupElement],
    free: &[bool],
    residual: &dyn Fn(&[GroupElement]) -> Blocks,
    tol: f64,
    max_iter: usize,
) -> Outcome {
    let vars: Vec<(usize, usize)> =
        (0..start.len()).filter(|&i| free[i]).flat_map(|i| (0..3).map(move |a| (i, a))).collect();
    let mut point = start.to_vec();
    let mut r = residual(&point);
    let mut cost = sum_sq(&r);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < max_iter {
        if max_block(&r) < tol {
            break;
        }
        iterations += 1;
        let m = r.len() * 4;
        let mut jac = DMatrix::<f64>::zeros(m, vars.len());
        for (col, &(coord, axis)) in vars.iter().enumerate() {
            let plus = residual(&perturb(&point, coord, axis, FD_STEP));
            let minus = residual(&perturb(&point, coord, axis, -FD_STEP));
            for (row_block, (p, q)) in plus.iter().zip(&minus).enumerate() {
                for k in 0..4 {
                    jac[(row_block * 4 + k, col)] = (p[k] - q[k]) / (2.0 * FD_STEP);
                }
            }
        }
        let rv = DVector::from_iterator(m, r.iter().flat_map(|b| b.iter().copied()));
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * &rv;
        let mut accepted = false;
        for _ in 0..30 {
            let mut lhs = jtj.clone();
            for d in 0..vars.len() {
                lhs[(d, d)] += lambda;
            }
            let Some(chol) = lhs.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let step = chol.solve(&(-&grad));
            let mut trial = point.clone();
            for (idx, &(coord, axis)) in vars.iter().enumerate() {
                trial[coord] = trial[coord] * exp_unchecked(AXES[axis], step[idx]);
            }
            let tr = residual(&trial);
            let tc = sum_sq(&tr);
            if tc < cost {
                point = trial;
                r = tr;
                cost = tc;
                lambda = (lambda * 0.5).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    let residual_max = max_block(&r);
    Outcome { point, residual: residual_max, iterations, converged: residual_max < tol }
}
