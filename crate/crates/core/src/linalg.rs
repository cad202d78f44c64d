//! Small dense square matrices and determinants.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major `n x n` matrix. Row `i` is output component `i`, column `j` is
/// input coordinate `j`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            entries: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: r.len(),
                });
            }
            entries.extend_from_slice(r);
        }
        Ok(SquareMatrix { n, entries })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul(&self, rhs: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimensions differ");
        let n = self.n;
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.n {
                self.entries.swap(a * self.n + j, b * self.n + j);
            }
        }
    }

    pub fn det(&self) -> f64 {
        det(self)
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.entries[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.entries[i * self.n + j]
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.n).map(|i| self.row(i)))
            .finish()
    }
}

/// Determinant: closed-form expansion for `n <= 3`, LU with partial pivoting otherwise.
pub fn det(m: &SquareMatrix) -> f64 {
    let a = |i, j| m[(i, j)];
    match m.n {
        0 => 1.0,
        1 => a(0, 0),
        2 => a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0),
        3 => {
            a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
                - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
                + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
        }
        _ => det_lu(m),
    }
}

/// LU determinant with partial pivoting, for any `n`.
pub fn det_lu(m: &SquareMatrix) -> f64 {
    let n = m.n;
    let mut lu = m.clone();
    let mut sign = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| lu[(i, col)].abs().total_cmp(&lu[(j, col)].abs()))
            .unwrap_or(col);
        if lu[(pivot, col)] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            lu.swap_rows(pivot, col);
            sign = -sign;
        }
        let p = lu[(col, col)];
        for i in col + 1..n {
            let factor = lu[(i, col)] / p;
            if factor != 0.0 {
                for j in col + 1..n {
                    let v = lu[(col, j)];
                    lu[(i, j)] -= factor * v;
                }
            }
        }
    }
    (0..n).fold(sign, |acc, i| acc * lu[(i, i)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cofactor_det(rows: &[Vec<f64>]) -> f64 {
        let n = rows.len();
        if n == 1 {
            return rows[0][0];
        }
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<f64>> = rows[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|&(k, _)| k != j)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                s * rows[0][j] * cofactor_det(&minor)
            })
            .sum()
    }

    #[test]
    fn identity_has_unit_determinant() {
        for n in 1..6 {
            assert_eq!(det(&SquareMatrix::identity(n)), 1.0);
            assert_eq!(det_lu(&SquareMatrix::identity(n)), 1.0);
        }
    }

    #[test]
    fn henon_jacobian_determinant_is_b() {
        let b = 0.7;
        let m = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![-b, 2.0 * 1.3]]).unwrap();
        assert!((det(&m) - b).abs() < 1e-15);
    }

    #[test]
    fn lu_and_closed_form_agree_with_cofactor_expansion() {
        let rows = vec![
            vec![0.3, -1.2, 2.5],
            vec![1.1, 0.0, -0.4],
            vec![-2.0, 0.9, 1.7],
        ];
        let m = SquareMatrix::from_rows(&rows).unwrap();
        let oracle = cofactor_det(&rows);
        assert!((det(&m) - oracle).abs() <= 1e-12 * oracle.abs());
        assert!((det_lu(&m) - oracle).abs() <= 1e-12 * oracle.abs());
    }

    #[test]
    fn singular_matrix_gives_zero() {
        let m = SquareMatrix::from_rows(&[
            vec![1.0, 2.0, 3.0, 4.0],
            vec![2.0, 4.0, 6.0, 8.0],
            vec![0.0, 1.0, 0.0, 1.0],
            vec![1.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        assert_eq!(det(&m), 0.0);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    }
}
