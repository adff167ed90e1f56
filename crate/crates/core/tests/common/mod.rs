// SPDX-License-Identifier: MIT OR Apache-2.0

//! Dense reference implementations used as test oracles.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use prutf::sim::{replicate_rng, standard_normals};
use prutf::AugmentedBoundary;

/// Dense `D^{(r+1)}` built by composing first differences.
pub fn dense_difference(n: usize, r: usize) -> DMatrix<f64> {
    let first = |rows: usize, cols: usize| {
        DMatrix::from_fn(rows, cols, |i, j| {
            if j == i {
                -1.0
            } else if j == i + 1 {
                1.0
            } else {
                0.0
            }
        })
    };
    let mut d = first(n - 1, n);
    for k in 1..=r {
        d = first(n - 1 - k, n - k) * d;
    }
    d
}

/// Rows of `D` outside the augmented boundary set.
pub fn dense_interior_rows(d: &DMatrix<f64>, a: &AugmentedBoundary) -> DMatrix<f64> {
    let keep: Vec<usize> = (0..d.nrows()).filter(|&i| !a.in_augmented(i)).collect();
    DMatrix::from_fn(keep.len(), d.ncols(), |i, j| d[(keep[i], j)])
}

/// `(D₋ᴀD₋ᴀᵀ)⁻¹D₋ᴀ y` by dense LU, scattered back to length `m`.
pub fn dense_contrast(d: &DMatrix<f64>, a: &AugmentedBoundary, y: &[f64]) -> Vec<f64> {
    let di = dense_interior_rows(d, a);
    if di.nrows() == 0 {
        return vec![0.0; d.nrows()];
    }
    let g = &di * di.transpose();
    let rhs = &di * DVector::from_column_slice(y);
    let x = g.lu().solve(&rhs).expect("gram block is invertible");
    let mut out = vec![0.0; d.nrows()];
    let mut k = 0;
    for (i, slot) in out.iter_mut().enumerate() {
        if !a.in_augmented(i) {
            *slot = x[k];
            k += 1;
        }
    }
    out
}

/// Solves `min ½‖y − Dᵀu‖²` subject to `‖u‖∞ ≤ λ`.
///
/// Projected coordinate descent locates the active set, then the free
/// coordinates are solved exactly and the active set is corrected until
/// the projected gradient vanishes.
pub fn box_qp(d: &DMatrix<f64>, y: &[f64], lambda: f64, tol: f64) -> Vec<f64> {
    let q = d * d.transpose();
    let c = d * DVector::from_column_slice(y);
    let m = q.nrows();
    let mut u = vec![0.0; m];
    let clip = |v: f64| v.clamp(-lambda, lambda);
    for _sweep in 0..2000 {
        let mut delta: f64 = 0.0;
        for i in 0..m {
            let mut s = c[i];
            for j in 0..m {
                if j != i {
                    s -= q[(i, j)] * u[j];
                }
            }
            let new = clip(s / q[(i, i)]);
            delta = delta.max((new - u[i]).abs());
            u[i] = new;
        }
        if delta < 1e-6 * lambda.max(1.0) {
            break;
        }
    }
    for _ in 0..200 {
        let grad: Vec<f64> = (0..m)
            .map(|i| (0..m).map(|j| q[(i, j)] * u[j]).sum::<f64>() - c[i])
            .collect();
        if projected_gradient(&u, &grad, lambda) <= tol {
            return u;
        }
        // Active: at a bound with the gradient pushing outwards.
        let active: Vec<bool> = (0..m)
            .map(|i| (u[i] >= lambda && grad[i] <= 0.0) || (u[i] <= -lambda && grad[i] >= 0.0))
            .collect();
        let free: Vec<usize> = (0..m).filter(|&i| !active[i]).collect();
        if free.is_empty() {
            return u;
        }
        let qff = DMatrix::from_fn(free.len(), free.len(), |a, b| q[(free[a], free[b])]);
        let rhs = DVector::from_fn(free.len(), |a, _| {
            let i = free[a];
            c[i] - (0..m).filter(|&j| active[j]).map(|j| q[(i, j)] * u[j]).sum::<f64>()
        });
        let x = qff.lu().solve(&rhs).expect("free block is invertible");
        // Step towards the exact free solution, stopping at the first bound hit.
        let mut step: f64 = 1.0;
        for (a, &i) in free.iter().enumerate() {
            let dir = x[a] - u[i];
            if dir > 0.0 && x[a] > lambda {
                step = step.min((lambda - u[i]) / dir);
            } else if dir < 0.0 && x[a] < -lambda {
                step = step.min((-lambda - u[i]) / dir);
            }
        }
        for (a, &i) in free.iter().enumerate() {
            u[i] = clip(u[i] + step * (x[a] - u[i]));
        }
    }
    u
}

fn projected_gradient(u: &[f64], grad: &[f64], lambda: f64) -> f64 {
    u.iter()
        .zip(grad)
        .map(|(&ui, &g)| {
            let moved = (ui - g).clamp(-lambda, lambda);
            (moved - ui).abs()
        })
        .fold(0.0, f64::max)
}

/// Least-squares fit of a degree-`r` polynomial on each segment, by SVD on a
/// basis centred and scaled per segment.
pub fn regression_fit(y: &[f64], change_points: &[usize], r: usize) -> Vec<f64> {
    let n = y.len();
    let mut bounds = vec![0];
    bounds.extend_from_slice(change_points);
    bounds.push(n);
    let mut out = Vec::with_capacity(n);
    for w in bounds.windows(2) {
        let (s, e) = (w[0], w[1]);
        let half = (e - s) as f64 / 2.0;
        let x = DMatrix::from_fn(e - s, r + 1, |i, k| ((i as f64 + 0.5 - half) / half).powi(k as i32));
        let yy = DVector::from_column_slice(&y[s..e]);
        let beta = x.clone().svd(true, true).solve(&yy, 1e-14).expect("svd solve");
        out.extend((&x * beta).iter().copied());
    }
    out
}

/// Deterministic pseudo-random normals for fixtures.
pub fn normals(seed: u64, len: usize) -> Vec<f64> {
    standard_normals(&mut replicate_rng(seed, 0), len)
}

/// A small piecewise polynomial signal with noise, reproducible from `seed`.
pub fn random_signal(seed: u64, n: usize, r: usize, changes: usize, sigma: f64) -> (Vec<f64>, Vec<usize>) {
    let z = normals(seed, n + 4 * (changes + 1) * (r + 1) + changes);
    let mut cps: Vec<usize> = Vec::new();
    let spacing = n / (changes + 1);
    for j in 0..changes {
        let jitter = (z[n + j].abs() * 2.0) as usize % (spacing / 2).max(1);
        cps.push((j + 1) * spacing + jitter - spacing / 4);
    }
    let mut y = Vec::with_capacity(n);
    let mut seg = 0;
    for i in 1..=n {
        while seg < cps.len() && i > cps[seg] {
            seg += 1;
        }
        let x = i as f64 / n as f64;
        let base = n + changes + seg * (r + 1);
        let value: f64 = (0..=r).map(|k| 3.0 * z[base + k] * x.powi(k as i32)).sum();
        y.push(value + sigma * z[i - 1]);
    }
    (y, cps)
}
