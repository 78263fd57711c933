//! Dense exact linear algebra over the rationals.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type Matrix = Vec<Vec<Scalar>>;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
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
        let inv = Scalar::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                let pivot_row = m[r].clone();
                for (x, p) in m[i].iter_mut().zip(&pivot_row) {
                    *x -= &factor * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Matrix) -> usize {
    let mut m = m.clone();
    rref(&mut m).len()
}

/// Solves the square system `a x = b`.
pub fn solve(a: &Matrix, b: &[Scalar]) -> Result<Vec<Scalar>> {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) || b.len() != n {
        return Err(Error::Invalid("solve expects a square system".into()));
    }
    let mut aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots.contains(&n) {
        return Err(Error::SingularMatrix);
    }
    Ok(aug.into_iter().map(|row| row[n].clone()).collect())
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    let n = a.len();
    let mut aug: Matrix = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| {
                if i == j {
                    Scalar::one()
                } else {
                    Scalar::zero()
                }
            }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots.iter().any(|&c| c >= n) {
        return Err(Error::SingularMatrix);
    }
    Ok(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Coordinates of `target` in the span of linearly independent `columns`.
/// `None` when `target` is outside the span.
pub fn coordinates(columns: &[Vec<Scalar>], target: &[Scalar]) -> Option<Vec<Scalar>> {
    let s = columns.len();
    let rows = target.len();
    let mut aug: Matrix = (0..rows)
        .map(|i| {
            let mut r: Vec<Scalar> = columns.iter().map(|c| c[i].clone()).collect();
            r.push(target[i].clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&s) {
        return None;
    }
    let mut x = vec![Scalar::zero(); s];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][s].clone();
    }
    Some(x)
}
