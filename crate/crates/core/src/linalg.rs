//! Exact Gauss–Jordan elimination over Q(√2).

use crate::phasespace::Coeff;

pub type Matrix = Vec<Vec<Coeff>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Coeff::one() } else { Coeff::zero() }).collect())
        .collect()
}

pub fn transpose(m: &Matrix) -> Matrix {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn mul(a: &Matrix, b: &Matrix) -> Matrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = Coeff::zero();
                    for k in 0..inner {
                        if !row[k].is_zero() && !b[k][j].is_zero() {
                            acc += &(&row[k] * &b[k][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Row-reduced echelon form; returns the pivot columns and the determinant
/// factor accumulated from row swaps and pivot scalings (meaningful for
/// square input only).
pub fn rref(m: &mut Matrix) -> (Vec<usize>, Coeff) {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut det = Coeff::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            det = Coeff::zero();
            continue;
        };
        if p != r {
            m.swap(p, r);
            det = -det;
        }
        let inv = m[r][c].inverse().expect("nonzero pivot");
        det = &det * &m[r][c];
        for v in m[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                for j in 0..cols {
                    if !m[r][j].is_zero() {
                        let delta = &factor * &m[r][j];
                        m[i][j] -= &delta;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if pivots.len() < rows.min(cols) {
        det = Coeff::zero();
    }
    (pivots, det)
}

pub fn determinant(m: &Matrix) -> Coeff {
    if m.is_empty() {
        return Coeff::one();
    }
    let mut work = m.clone();
    let (pivots, det) = rref(&mut work);
    if pivots.len() == m.len() {
        det
    } else {
        Coeff::zero()
    }
}

pub fn rank(m: &Matrix) -> usize {
    let mut work = m.clone();
    rref(&mut work).0.len()
}

pub fn inverse(m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let mut aug: Matrix = m
        .iter()
        .zip(identity(n))
        .map(|(row, id)| row.iter().cloned().chain(id).collect())
        .collect();
    let (pivots, _) = rref(&mut aug);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &c)| i != c) {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// One solution of `A x = b` (free variables set to zero), or `None` when
/// the system is inconsistent.
pub fn solve(a: &Matrix, b: &[Coeff]) -> Option<Vec<Coeff>> {
    let cols = a.first().map_or(0, Vec::len);
    let mut aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| row.iter().cloned().chain(std::iter::once(bi.clone())).collect())
        .collect();
    let (pivots, _) = rref(&mut aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![Coeff::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][cols].clone();
    }
    Some(x)
}
