//! The Hermite ratio map `(x, y) -> (x, x - k/y)` and exact polynomial checks.
//!
//! With `He_0 = 1`, `He_1 = x` and `He_{k+1} = x He_k - k He_{k-1}`, the ratio
//! `y_k = He_k / He_{k-1}` obeys `y_{k+1} = x - k / y_k`. Parameters `m` count
//! points of the orbit, so an `m`-point map applies the steps `k = 1..m-1`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::jet::Jet;
use crate::map::{chain, MapDescriptor, Params};

use super::poly::ExactPolynomial;

/// Step `k` as a map, with inverse `y = k / (X - Y)`.
pub fn hermite_step_map(k: usize) -> MapDescriptor {
    let kf = k as f64;
    let mut params = Params::new();
    params.insert("k".into(), kf);
    MapDescriptor::new(
        format!("hermite-step-{k}"),
        2,
        params,
        move |v| Ok(vec![v[0].clone(), &v[0] - Jet::constant(kf).guarded_div(&v[1], "y")?]),
        move |v| Ok(vec![v[0].clone(), Jet::constant(kf).guarded_div(&(&v[0] - &v[1]), "X - Y")?]),
    )
}

/// One recurrence step `(x, y) -> (x, x - k/y)`.
pub fn hermite_step(k: usize, x: f64, y: f64) -> Result<(f64, f64)> {
    let out = hermite_step_map(k).forward(&[x, y])?;
    Ok((out[0], out[1]))
}

/// The `m`-point map `(x, y_1) -> (x, y_m)`, steps `k = 1..m-1`.
pub fn hermite(m: usize) -> Result<MapDescriptor> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("hermite needs m >= 2, got {m}")));
    }
    let mut params = Params::new();
    params.insert("m".into(), m as f64);
    chain("hermite", params, (1..m).map(hermite_step_map).collect())
}

/// `det J = (m-1)! / (y_{m-1} ... y_1)^2` evaluated along the orbit of `(x, y)`.
pub fn hermite_det_formula(m: usize, x: f64, y: f64) -> Result<f64> {
    let mut yk = y;
    let mut prod = 1.0;
    let mut fact = 1.0;
    for k in 1..m {
        prod *= yk;
        fact *= k as f64;
        if k + 1 < m {
            yk = hermite_step(k, x, yk)?.1;
        }
    }
    if prod == 0.0 {
        return Err(Error::singular("y product", 0.0));
    }
    Ok(fact / (prod * prod))
}

/// Closed-form Hamiltonian with `y` as time: `m = 2` gives `X (X - Y)^2`,
/// `m = 3` gives `(2 - X (X - Y))^2 / (Y - X)`.
pub fn hermite_hamiltonian(m: usize) -> Result<ScalarField> {
    match m {
        2 => Ok(ScalarField::new("X(X-Y)^2", 2, |v| {
            Ok(&v[0] * &(&v[0] - &v[1]).square())
        })),
        3 => Ok(ScalarField::new("(2-X(X-Y))^2/(Y-X)", 2, |v| {
            let num = (2.0 - &v[0] * &(&v[0] - &v[1])).square();
            num.guarded_div(&(&v[1] - &v[0]), "Y - X")
        })),
        _ => Err(Error::UnsupportedOrder(m)),
    }
}

/// Initial-value curve along which the closed-form Hamiltonian is constant:
/// `m = 2` gives `x = c y^2`, `m = 3` gives `x = c/y^2 + 1/y`.
pub fn hermite_source_constraint(m: usize, c: f64, y: f64) -> Result<f64> {
    if y == 0.0 || !y.is_finite() {
        return Err(Error::singular("y", y));
    }
    match m {
        2 => Ok(c * y * y),
        3 => Ok(c / (y * y) + 1.0 / y),
        _ => Err(Error::UnsupportedOrder(m)),
    }
}

/// The constant `c` of [`hermite_source_constraint`] through `(x, y)`.
pub fn hermite_constraint_constant(m: usize, x: f64, y: f64) -> Result<f64> {
    if y == 0.0 || !y.is_finite() {
        return Err(Error::singular("y", y));
    }
    match m {
        2 => Ok(x / (y * y)),
        3 => Ok((x - 1.0 / y) * y * y),
        _ => Err(Error::UnsupportedOrder(m)),
    }
}

/// `(m-1)/x - (m-2)/x - ... - 1/x`, evaluated from the innermost term out.
pub fn hermite_continued_fraction(m: usize, x: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("continued fraction needs m >= 2, got {m}")));
    }
    let mut d = x;
    for k in 1..m - 1 {
        if d == 0.0 {
            return Err(Error::singular(format!("convergent {k}"), d));
        }
        d = x - k as f64 / d;
    }
    if d == 0.0 {
        return Err(Error::singular(format!("convergent {}", m - 1), d));
    }
    Ok((m - 1) as f64 / d)
}

fn continued_fraction_exact(m: usize, x: &BigRational) -> Option<BigRational> {
    let mut d = x.clone();
    for k in 1..m - 1 {
        if d.is_zero() {
            return None;
        }
        d = x - BigRational::from_integer(BigInt::from(k)) / d;
    }
    if d.is_zero() {
        return None;
    }
    Some(BigRational::from_integer(BigInt::from(m - 1)) / d)
}

/// `He_0 ..= He_n` built from the three-term recurrence.
pub fn hermite_polynomials(n: usize) -> Vec<ExactPolynomial> {
    let mut out = vec![ExactPolynomial::one(), ExactPolynomial::x()];
    for k in 1..n {
        let next = &(&ExactPolynomial::x() * &out[k]) - &out[k - 1].scale_i64(k as i64);
        out.push(next);
    }
    out.truncate(n + 1);
    out
}

/// Rational sample points for the continued-fraction check.
pub fn continued_fraction_points() -> Vec<BigRational> {
    [(1, 2), (-1, 2), (17, 10), (-17, 10), (3, 1)]
        .iter()
        .map(|&(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteRow {
    pub m: usize,
    pub polynomial: String,
    /// `He_m'' - x He_m' + m He_m = 0`.
    pub ode: bool,
    /// The differential-difference identity (needs `m >= 1`).
    pub differential_difference: bool,
    /// `He_{m+1} = x He_m - He_m'`.
    pub raising: bool,
    /// `He_{m-1} = He_m' / m`.
    pub lowering: bool,
    /// Continued fraction equals `(m-1) He_{m-2} / He_{m-1}` (needs `m >= 2`).
    pub continued_fraction: bool,
}

impl HermiteRow {
    pub fn pass(&self) -> bool {
        self.ode && self.differential_difference && self.raising && self.lowering && self.continued_fraction
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteReport {
    pub m_max: usize,
    pub rows: Vec<HermiteRow>,
    pub pass: bool,
}

/// Exact integer/rational verification of the Hermite identities for `1 <= m <= m_max`.
pub fn hermite_checks(m_max: usize) -> Result<HermiteReport> {
    if m_max < 2 {
        return Err(Error::InvalidParameter(format!("hermite checks need m_max >= 2, got {m_max}")));
    }
    let h = hermite_polynomials(m_max + 1);
    let d: Vec<ExactPolynomial> = h.iter().map(ExactPolynomial::derivative).collect();
    let x = ExactPolynomial::x();
    let points = continued_fraction_points();

    let rows = (1..=m_max)
        .map(|m| {
            let mi = m as i64;
            let ode = (&(&d[m].derivative() - &(&x * &d[m])) + &h[m].scale_i64(mi)).is_zero();
            let dd = &(&(&(&h[m] * &d[m + 1]) - &(&h[m + 1] * &d[m])) - &(&h[m] * &h[m]))
                + &(&(&h[m] * &d[m - 1]).scale_i64(mi) - &(&h[m - 1] * &d[m]).scale_i64(mi));
            let raising = h[m + 1] == &(&x * &h[m]) - &d[m];
            let lowering = d[m].div_exact(&BigInt::from(m)).as_ref() == Some(&h[m - 1]);
            let continued_fraction = m < 2
                || points.iter().all(|p| {
                    let den = h[m - 1].eval_rational(p);
                    if den.is_zero() {
                        return continued_fraction_exact(m, p).is_none();
                    }
                    let ratio = h[m - 2].eval_rational(p) * BigRational::from_integer(BigInt::from(m - 1)) / den;
                    continued_fraction_exact(m, p) == Some(ratio)
                });
            HermiteRow {
                m,
                polynomial: h[m].to_string(),
                ode,
                differential_difference: dd.is_zero(),
                raising,
                lowering,
                continued_fraction,
            }
        })
        .collect::<Vec<_>>();
    let pass = rows.iter().all(HermiteRow::pass);
    Ok(HermiteReport { m_max, rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recurrence_ratio(k: usize, x: f64) -> f64 {
        // Independent oracle: He_k / He_{k-1} by the float recurrence.
        let (mut a, mut b) = (1.0, x);
        for j in 1..k {
            let c = x * b - j as f64 * a;
            a = b;
            b = c;
        }
        b / a
    }

    #[test]
    fn first_step_at_two_two() {
        let (x, y) = hermite_step(1, 2.0, 2.0).unwrap();
        assert_eq!((x, y), (2.0, 1.5));
        assert_eq!(y, recurrence_ratio(2, 2.0));
    }

    #[test]
    fn step_round_trip() {
        let s = hermite_step_map(1);
        for x in [0.7, 1.3, 2.5] {
            let back = s.inverse(&s.forward(&[x, x]).unwrap()).unwrap();
            assert!((back[0] - x).abs() < 1e-15 && (back[1] - x).abs() < 1e-14);
        }
    }

    #[test]
    fn y_pole_is_reported() {
        assert!(matches!(hermite_step(1, 1.0, 0.0), Err(Error::SingularPoint { .. })));
    }

    #[test]
    fn chain_determinant_matches_formula() {
        for m in 2..=5 {
            let map = hermite(m).unwrap();
            for &(x, y) in &[(4.5, 1.2), (5.0, 0.9)] {
                let det = map.det_jacobian(&[x, y]).unwrap();
                let f = hermite_det_formula(m, x, y).unwrap();
                assert!((det - f).abs() <= 1e-12 * f.abs(), "m={m}: {det} vs {f}");
            }
        }
    }

    #[test]
    fn hamiltonian_values() {
        let h = hermite_hamiltonian(2).unwrap();
        assert_eq!(h.eval(&[2.0, 1.5]).unwrap(), 0.5);
        assert!(matches!(hermite_hamiltonian(4), Err(Error::UnsupportedOrder(4))));
        let h3 = hermite_hamiltonian(3).unwrap();
        assert!(matches!(h3.eval(&[1.0, 1.0]), Err(Error::SingularPoint { .. })));
    }

    #[test]
    fn source_constraints() {
        assert_eq!(hermite_source_constraint(2, 2.0, 1.0).unwrap(), 2.0);
        assert_eq!(hermite_source_constraint(3, 0.0, 2.0).unwrap(), 0.5);
        assert!(hermite_source_constraint(2, 1.0, 0.0).is_err());
        let c = hermite_constraint_constant(3, 2.25, 2.0).unwrap();
        assert_eq!(hermite_source_constraint(3, c, 2.0).unwrap(), 2.25);
    }

    #[test]
    fn continued_fraction_values() {
        assert!((hermite_continued_fraction(3, 2.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((hermite_continued_fraction(2, 5.0).unwrap() - 0.2).abs() < 1e-16);
        assert!(hermite_continued_fraction(3, 0.0).is_err());
        // He_2 / He_1 at x = 1 vanishes, so the next convergent is singular.
        assert!(hermite_continued_fraction(4, 1.0).is_err());
    }

    #[test]
    fn continued_fraction_matches_polynomial_ratio() {
        let h = hermite_polynomials(11);
        for m in 2..=10 {
            for x in [0.5, -0.5, 1.7, -1.7, 3.0] {
                let ratio = (m - 1) as f64 * h[m - 2].eval(x) / h[m - 1].eval(x);
                let cf = hermite_continued_fraction(m, x).unwrap();
                assert!((cf - ratio).abs() <= 1e-12 * (1.0 + ratio.abs()), "m={m} x={x}");
            }
        }
    }

    #[test]
    fn low_order_polynomials() {
        let h = hermite_polynomials(3);
        assert_eq!(h[2], ExactPolynomial::from_i64(&[-1, 0, 1]));
        assert_eq!(h[3], ExactPolynomial::from_i64(&[0, -3, 0, 1]));
    }

    #[test]
    fn exact_suite_passes() {
        let r = hermite_checks(12).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.rows.len(), 12);
        assert!(hermite_checks(1).is_err());
    }
}
