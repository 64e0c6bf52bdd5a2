//! Small dense helpers: fixed-size aliases and exact rational elimination.

use nalgebra::{SMatrix, SVector};
use num_traits::Zero;

use crate::scalar::Q;

pub type Mat8 = SMatrix<f64, 8, 8>;
pub type Vec8 = SVector<f64, 8>;

/// Reduced row echelon form over Q. Returns the pivot columns.
pub fn rref(m: &mut [Vec<Q>]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let pv = m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = &*x / &pv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in 0..cols {
                    let t = &f * &m[r][k];
                    m[i][k] = &m[i][k] - t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of the right nullspace over Q, one vector per free column, in
/// increasing free-column order.
pub fn nullspace(m: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let mut a = m.to_vec();
    let cols = if a.is_empty() { 0 } else { a[0].len() };
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::from_integer(1.into());
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -a[row][f].clone();
            }
            v
        })
        .collect()
}

pub fn rank(m: &[Vec<Q>]) -> usize {
    let mut a = m.to_vec();
    rref(&mut a).len()
}

/// Exact solve of A x = b (A given by columns). Returns `None` when b is not
/// in the column span; otherwise the unique solution for independent columns.
pub fn solve_in_span(columns: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let n = b.len();
    let k = columns.len();
    let mut aug: Vec<Vec<Q>> = (0..n)
        .map(|i| {
            let mut row: Vec<Q> = columns.iter().map(|c| c[i].clone()).collect();
            row.push(b[i].clone());
            row
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&k) {
        return None;
    }
    let mut x = vec![Q::zero(); k];
    for (row, &p) in pivots.iter().enumerate() {
        x[p] = aug[row][k].clone();
    }
    Some(x)
}

/// Gram-Schmidt against an orthonormal list; `None` when the residual norm
/// falls below `min_norm`.
pub fn orthonormalize_against(v: &Vec8, basis: &[Vec8], min_norm: f64) -> Option<Vec8> {
    let mut w = *v;
    for _ in 0..2 {
        for b in basis {
            w -= b * b.dot(&w);
        }
    }
    let n = w.norm();
    if n < min_norm {
        None
    } else {
        Some(w / n)
    }
}
