//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's factorizations.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Laplace expansion along the first row. Exponential, so only for small `n`.
pub fn cofactor_det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    match n {
        0 => 1.0,
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        _ => {
            let mut det = 0.0;
            for j in 0..n {
                let minor: Vec<Vec<f64>> = a[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                det += sign * a[0][j] * cofactor_det(&minor);
            }
            det
        }
    }
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| (0..cols).map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum()).collect())
        .collect()
}

pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

/// `G Gᵀ + shift · I`, positive definite for `shift > 0`.
pub fn random_pd<R: Rng>(d: usize, shift: f64, rng: &mut R) -> Vec<Vec<f64>> {
    let g = gaussian_matrix(d, d, rng);
    let mut a = matmul(&g, &transpose(&g));
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += shift;
    }
    a
}

/// `x` drawn uniformly from the unit ball by rejection from the cube.
pub fn unit_ball<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        if x.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            return x;
        }
    }
}

/// Best total mean over every `k`-subset of `means`, by enumeration.
pub fn brute_force_best(means: &[f64], k: usize) -> f64 {
    fn go(means: &[f64], start: usize, left: usize, acc: f64, best: &mut f64) {
        if left == 0 {
            *best = best.max(acc);
            return;
        }
        for i in start..means.len() {
            go(means, i + 1, left - 1, acc + means[i], best);
        }
    }
    let mut best = f64::NEG_INFINITY;
    go(means, 0, k, 0.0, &mut best);
    best
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Gaussian elimination with partial pivoting; returns `(sign, ln|det|)`.
pub fn gauss_log_det(a: &[Vec<f64>]) -> (f64, f64) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut sign = 1.0;
    let mut log = 0.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        if m[p][c] == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        if p != c {
            m.swap(p, c);
            sign = -sign;
        }
        let piv = m[c][c];
        if piv < 0.0 {
            sign = -sign;
        }
        log += piv.abs().ln();
        for r in c + 1..n {
            let f = m[r][c] / piv;
            for j in c..n {
                m[r][j] -= f * m[c][j];
            }
        }
    }
    (sign, log)
}

/// Solves `a y = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(row, &v)| {
        let mut r = row.clone();
        r.push(v);
        r
    }).collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        m.swap(p, c);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for j in c..=n {
                m[r][j] -= f * m[c][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|j| m[r][j] * y[j]).sum();
        y[r] = (m[r][n] - s) / m[r][r];
    }
    y
}

pub fn add_outer(a: &mut [Vec<f64>], x: &[f64]) {
    for (i, row) in a.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v += x[i] * x[j];
        }
    }
}
