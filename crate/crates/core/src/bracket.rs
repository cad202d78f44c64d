//! The Nambu bracket `{f_1, ..., f_n} = d(f_1, ..., f_n) / d(x_1, ..., x_n)`.

use crate::error::{check_finite, Error, Result};
use crate::field::ScalarField;
use crate::jet::Jet;
use crate::linalg::SquareMatrix;

/// Determinant of the matrix `df_i/dx_j` at `x`.
pub fn nambu_bracket(fs: &[ScalarField], x: &[f64]) -> Result<f64> {
    let n = x.len();
    if fs.len() != n {
        return Err(Error::Arity {
            expected: n,
            got: fs.len(),
        });
    }
    check_finite("bracket argument", x)?;
    let seeded = Jet::seed(x);
    let rows = fs
        .iter()
        .map(|f| Ok(f.eval_jet(&seeded)?.gradient(n)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SquareMatrix::from_rows(&rows)?.det())
}

/// `{g_1, ..., g_{n-1}, x_j}` for every `j`, given the gradient rows of the `g`s.
///
/// Each component is a signed `(n-1)`-minor of the gradient matrix.
pub fn bracket_with_coordinates(rows: &[Vec<f64>], n: usize) -> Result<Vec<f64>> {
    if rows.len() + 1 != n {
        return Err(Error::Arity {
            expected: n - 1,
            got: rows.len(),
        });
    }
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut m = SquareMatrix::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            for (k, &v) in r.iter().enumerate() {
                m[(i, k)] = v;
            }
        }
        m[(n - 1, j)] = 1.0;
        out.push(m.det());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords(n: usize) -> Vec<ScalarField> {
        (0..n).map(|i| ScalarField::coordinate(n, i)).collect()
    }

    #[test]
    fn coordinate_functions_bracket_to_one() {
        for n in 1..5 {
            let x: Vec<f64> = (0..n).map(|i| 0.3 + i as f64).collect();
            assert_eq!(nambu_bracket(&coords(n), &x).unwrap(), 1.0);
        }
    }

    #[test]
    fn repeated_field_brackets_to_zero() {
        let f = ScalarField::new("x*y*z", 3, |x| Ok(&(&x[0] * &x[1]) * &x[2]));
        let fs = vec![f.clone(), ScalarField::coordinate(3, 1), f];
        assert!(nambu_bracket(&fs, &[0.5, 1.5, 2.5]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn henon_hamiltonian_and_x_bracket_to_one() {
        // d(X^2 - Y, X)/d(X, Y) = 2X * 0 - (-1) * 1 = 1.
        let h = ScalarField::new("X^2-Y", 2, |x| Ok(x[0].square() - &x[1]));
        let fs = vec![h, ScalarField::coordinate(2, 0)];
        for p in [[0.1, 0.2], [3.0, -7.0], [-1.5, 4.0]] {
            assert!((nambu_bracket(&fs, &p).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn wrong_arity_is_an_error() {
        let fs = coords(2);
        assert!(matches!(
            nambu_bracket(&fs, &[1.0, 2.0, 3.0]),
            Err(Error::Arity { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn two_dimensional_bracket_with_coordinates_is_symplectic() {
        let r = bracket_with_coordinates(&[vec![2.0, 5.0]], 2).unwrap();
        assert_eq!(r, vec![-5.0, 2.0]);
    }
}
