//! The Hénon map `(x, y) -> (y, y^2 - b x + c)`.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::jet::Jet;
use crate::map::{MapDescriptor, Params};

pub fn henon(b: f64, c: f64) -> Result<MapDescriptor> {
    if b == 0.0 || !b.is_finite() || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("henon needs finite b != 0 and c (b = {b}, c = {c})")));
    }
    let mut params = Params::new();
    params.insert("b".into(), b);
    params.insert("c".into(), c);
    Ok(MapDescriptor::new(
        "henon",
        2,
        params,
        move |v| Ok(vec![v[1].clone(), &v[1].square() - &v[0].scale(b) + c]),
        move |v| Ok(vec![(&(&v[0].square() - &v[1]) + c).scale(1.0 / b), v[0].clone()]),
    ))
}

fn level(v: &[Jet], c: f64) -> Jet {
    &(&v[0].square() - &v[1]) + c
}

/// Closed-form Hamiltonian of the `(m-1)`-fold Hénon map, `m` in `{2, 3, 4}`.
///
/// Each equals `b^{m-1} x_0` written in image coordinates.
pub fn henon_hamiltonian(m: usize, b: f64, c: f64) -> Result<ScalarField> {
    if b == 0.0 {
        return Err(Error::InvalidParameter("henon needs b != 0".into()));
    }
    match m {
        2 => Ok(ScalarField::new("X^2-Y+c", 2, move |v| Ok(level(v, c)))),
        3 => Ok(ScalarField::new("(X^2-Y+c)^2/b-Xb+cb", 2, move |v| {
            Ok(&(&level(v, c).square().scale(1.0 / b) - &v[0].scale(b)) + c * b)
        })),
        4 => Ok(ScalarField::new("((X^2-Y+c)^2/b^2-X+c)^2-(X^2-Y+c)b+cb^2", 2, move |v| {
            let l = level(v, c);
            let inner = &(&l.square().scale(1.0 / (b * b)) - &v[0]) + c;
            Ok(&(&inner.square() - &l.scale(b)) + c * b * b)
        })),
        _ => Err(Error::UnsupportedOrder(m)),
    }
}

/// Coefficients `(alpha, beta)` of the flow solution `X = y + alpha`,
/// `Y = y^2 + 2 alpha y + beta` through the image point `(X, Y)` at time `y`.
pub fn henon_solution_family(big_x: f64, big_y: f64, y: f64) -> (f64, f64) {
    let alpha = big_x - y;
    (alpha, big_y - y * y - 2.0 * alpha * y)
}
