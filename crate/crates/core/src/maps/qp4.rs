//! The q-difference Painlevé IV map with constants `a, b, c` and `q = abc`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::flows::FlowSystem;
use crate::jet::Jet;
use crate::map::{MapDescriptor, Params};

/// Choice of the second Hamiltonian of the q-PIV flow.
///
/// `Prop2` integrates `det J = q^2` and gives `H_2 = q^2 y(X)`; `PaperDisplay`
/// takes `H_2 = y(X)`. The two coincide when `|q| = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Qp4Normalization {
    Prop2,
    PaperDisplay,
}

impl Qp4Normalization {
    pub const ALL: [Qp4Normalization; 2] = [Qp4Normalization::Prop2, Qp4Normalization::PaperDisplay];

    pub fn as_str(self) -> &'static str {
        match self {
            Qp4Normalization::Prop2 => "prop2",
            Qp4Normalization::PaperDisplay => "paper-display",
        }
    }
}

impl std::str::FromStr for Qp4Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prop2" => Ok(Qp4Normalization::Prop2),
            "paper-display" => Ok(Qp4Normalization::PaperDisplay),
            other => Err(Error::InvalidParameter(format!(
                "unknown normalization `{other}` (expected prop2 or paper-display)"
            ))),
        }
    }
}

fn check_params(a: f64, b: f64, c: f64) -> Result<()> {
    if [a, b, c].iter().any(|v| *v == 0.0 || !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("qp4 needs finite nonzero a, b, c (got {a}, {b}, {c})")));
    }
    Ok(())
}

fn ratio(num: &Jet, den: &Jet, name: &str) -> Result<Jet> {
    num.guarded_div(den, name)
}

pub fn qp4(a: f64, b: f64, c: f64) -> Result<MapDescriptor> {
    check_params(a, b, c)?;
    let mut params = Params::new();
    params.insert("a".into(), a);
    params.insert("b".into(), b);
    params.insert("c".into(), c);
    Ok(MapDescriptor::new(
        "qp4",
        3,
        params,
        move |v| {
            let (x, y, z) = (&v[0], &v[1], &v[2]);
            let p = &(1.0 + &x.scale(a)) + &(x * y).scale(a * b);
            let q = &(1.0 + &y.scale(b)) + &(y * z).scale(b * c);
            let r = &(1.0 + &z.scale(c)) + &(z * x).scale(c * a);
            Ok(vec![
                &y.scale(a * b) * &ratio(&r, &p, "1+ax+abxy")?,
                &z.scale(b * c) * &ratio(&p, &q, "1+by+bcyz")?,
                &x.scale(c * a) * &ratio(&q, &r, "1+cz+cazx")?,
            ])
        },
        move |v| {
            let (x, y, z) = (&v[0], &v[1], &v[2]);
            let p = &(1.0 + &x.scale(1.0 / a)) + &(x * z).scale(1.0 / (a * c));
            let q = &(1.0 + &y.scale(1.0 / b)) + &(y * x).scale(1.0 / (b * a));
            let r = &(1.0 + &z.scale(1.0 / c)) + &(z * y).scale(1.0 / (c * b));
            Ok(vec![
                &z.scale(1.0 / (c * a)) * &ratio(&q, &p, "1+X/a+XZ/ac")?,
                &x.scale(1.0 / (a * b)) * &ratio(&r, &q, "1+Y/b+YX/ba")?,
                &y.scale(1.0 / (b * c)) * &ratio(&p, &r, "1+Z/c+ZY/cb")?,
            ])
        },
    ))
}

/// Nambu flow with `z` as time, `H_1 = x(X)` and `H_2` per `normalization`.
///
/// A normalization is mandatory unless `|abc| = 1`, where both agree.
pub fn qp4_flow(a: f64, b: f64, c: f64, normalization: Option<Qp4Normalization>) -> Result<FlowSystem> {
    let map = qp4(a, b, c)?;
    let q = a * b * c;
    let norm = match normalization {
        Some(n) => n,
        None if (q.abs() - 1.0).abs() < 1e-15 => Qp4Normalization::Prop2,
        None => {
            return Err(Error::InvalidParameter(format!(
                "qp4 with |abc| = {} != 1 needs a normalization (prop2 or paper-display)",
                q.abs()
            )))
        }
    };
    let scale = match norm {
        Qp4Normalization::Prop2 => q * q,
        Qp4Normalization::PaperDisplay => 1.0,
    };
    let h = |j: usize, k: f64, name: String| {
        let inv = map.clone();
        ScalarField::new(name, 3, move |v| Ok(inv.inverse_jet(v)?.swap_remove(j).scale(k)))
    };
    let hams = vec![h(0, 1.0, "x(X,Y,Z)".into()), h(1, scale, format!("{scale}*y(X,Y,Z)"))];
    FlowSystem::new(map, 2, hams)
}

/// Closed-form velocities `(dX/dz, dY/dz, dZ/dz)` as displayed alongside the map.
pub fn qp4_display_rhs(a: f64, b: f64, c: f64, p: &[f64]) -> Result<[f64; 3]> {
    check_params(a, b, c)?;
    let (x, y, z) = (p[0], p[1], p[2]);
    let q = a * b * c;
    let d1 = 1.0 + y / b + x * y / (a * b);
    let d2 = 1.0 + x / a + z * x / (c * a);
    let n = 1.0 + z / c + y * z / (b * c);
    if (d1 * d2).abs() < 1e-12 {
        return Err(Error::singular("(1+Y/b+XY/ab)(1+X/a+ZX/ca)", d1 * d2));
    }
    Ok([
        q * (x / a) * (1.0 + x / a) * n / (b * d1 * d2),
        q * (1.0 + y / b) * n / (a * d1 * d2),
        -c * c * (z / c) * n / (d2 * d1),
    ])
}

/// `r = xyz` and `s = (1+ax)(1+by)(1+cz)`, conserved when `a = b = c = ±1`.
pub fn qp4_invariants(a: f64, b: f64, c: f64, p: &[f64]) -> (f64, f64) {
    (
        p[0] * p[1] * p[2],
        (1.0 + a * p[0]) * (1.0 + b * p[1]) * (1.0 + c * p[2]),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationCandidate {
    pub normalization: Qp4Normalization,
    pub rhs: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationReport {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub point: Vec<f64>,
    /// Central-difference `d(X, Y, Z)/dz` of the map at `point`.
    pub map_derivative: Vec<f64>,
    pub candidates: Vec<NormalizationCandidate>,
    /// The unique candidate within `tol`, if exactly one is.
    pub winner: Option<Qp4Normalization>,
    pub tol: f64,
}

/// Compares the map's `z`-derivative with each candidate Nambu velocity.
///
/// Residuals are `max_j |rhs_j - dF_j/dz| / (1 + max_j |dF_j/dz|)`.
pub fn qp4_normalization_oracle(a: f64, b: f64, c: f64, point: &[f64], tol: f64) -> Result<NormalizationReport> {
    let map = qp4(a, b, c)?;
    let h = 1e-6 * (1.0 + point[2].abs());
    let mut p = point.to_vec();
    let mut m = point.to_vec();
    p[2] += h;
    m[2] -= h;
    let fp = map.forward(&p)?;
    let fm = map.forward(&m)?;
    let deriv: Vec<f64> = (0..3).map(|j| (fp[j] - fm[j]) / (2.0 * h)).collect();
    let scale = 1.0 + deriv.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let image = map.forward(point)?;
    let candidates = Qp4Normalization::ALL
        .iter()
        .map(|&n| {
            let rhs = qp4_flow(a, b, c, Some(n))?.nambu_rhs(&image)?.into_vec();
            let residual = rhs
                .iter()
                .zip(&deriv)
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max)
                / scale;
            Ok(NormalizationCandidate {
                normalization: n,
                rhs,
                residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passing: Vec<_> = candidates.iter().filter(|c| c.residual <= tol).collect();
    let winner = (passing.len() == 1).then(|| passing[0].normalization);
    Ok(NormalizationReport {
        a,
        b,
        c,
        point: point.to_vec(),
        map_derivative: deriv,
        candidates,
        winner,
        tol,
    })
}
