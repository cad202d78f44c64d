//! Three-point periodic discrete KdV map and its two-dimensional reduction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::flows::FlowSystem;
use crate::jet::Jet;
use crate::map::{MapDescriptor, Params};

fn ratio(num: &Jet, den: &Jet, name: &str) -> Result<Jet> {
    num.guarded_div(den, name)
}

/// `(x, y, z) -> (X, Y, Z)` on the branch
/// `X = x (1+xy+xy^2z)/(1+zx+x^2yz)` and cyclic.
pub fn kdv3() -> MapDescriptor {
    MapDescriptor::new(
        "kdv3",
        3,
        Params::new(),
        |v| {
            let (x, y, z) = (&v[0], &v[1], &v[2]);
            let xy = x * y;
            let p = &(1.0 + &xy) + &(&xy * &(y * z));
            let q = &(1.0 + &(z * x)) + &(&(x * x) * &(y * z));
            let r = &(1.0 + &(y * z)) + &(&xy * &(z * z));
            Ok(vec![
                x * &ratio(&p, &q, "1+zx+x^2yz")?,
                y * &ratio(&r, &p, "1+xy+xy^2z")?,
                z * &ratio(&q, &r, "1+yz+xyz^2")?,
            ])
        },
        |v| {
            let (x, y, z) = (&v[0], &v[1], &v[2]);
            let xy = x * y;
            let p = &(1.0 + &(z * x)) + &(&xy * &(z * z));
            let q = &(1.0 + &xy) + &(&(x * x) * &(y * z));
            let r = &(1.0 + &(y * z)) + &(&xy * &(y * z));
            Ok(vec![
                x * &ratio(&p, &q, "1+XY+X^2YZ")?,
                y * &ratio(&q, &r, "1+YZ+XY^2Z")?,
                z * &ratio(&r, &p, "1+ZX+XYZ^2")?,
            ])
        },
    )
}

/// The defining relations `1/x - 1/X - (Y - z)` and cyclic, as residuals.
pub fn kdv3_relations(x: &[f64], big: &[f64]) -> [f64; 3] {
    [
        1.0 / x[0] - 1.0 / big[0] - (big[1] - x[2]),
        1.0 / x[1] - 1.0 / big[1] - (big[2] - x[0]),
        1.0 / x[2] - 1.0 / big[2] - (big[0] - x[1]),
    ]
}

/// Conserved quantities of [`kdv3`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KdvInvariants {
    pub u: f64,
    pub v: f64,
    pub r: f64,
    pub s: f64,
}

impl KdvInvariants {
    pub fn of(p: &[f64]) -> Result<Self> {
        if p.len() != 3 {
            return Err(Error::Dimension {
                expected: 3,
                got: p.len(),
            });
        }
        let (x, y, z) = (p[0], p[1], p[2]);
        let r = x * y * z;
        if r == 0.0 {
            return Err(Error::singular("xyz", r));
        }
        Ok(KdvInvariants {
            u: 1.0 / r + r,
            v: 1.0 / x + 1.0 / y + 1.0 / z + x + y + z,
            r,
            s: (1.0 + x * y) * (1.0 + y * z) * (1.0 + z * x),
        })
    }

    /// Largest relative difference between two invariant sets.
    pub fn max_rel_diff(&self, other: &KdvInvariants) -> f64 {
        [(self.u, other.u), (self.v, other.v), (self.r, other.r), (self.s, other.s)]
            .iter()
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

/// Nambu flow of [`kdv3`] with `z` as time and `H_1 = x(X)`, `H_2 = y(X)`.
pub fn kdv3_flow() -> Result<FlowSystem> {
    let map = kdv3();
    let h = |j: usize, name: &str| {
        let inv = map.clone();
        ScalarField::new(name, 3, move |v| Ok(inv.inverse_jet(v)?.swap_remove(j)))
    };
    let hams = vec![h(0, "x(X,Y,Z)"), h(1, "y(X,Y,Z)")];
    FlowSystem::new(map, 2, hams)
}

/// Closed-form velocities `(dX/dz, dY/dz, dZ/dz)` of the KdV Nambu flow.
pub fn kdv3_display_rhs(p: &[f64]) -> Result<[f64; 3]> {
    let (x, y, z) = (p[0], p[1], p[2]);
    let d = 1.0 + y * z + x * y * y * z;
    if d.abs() < 1e-12 {
        return Err(Error::singular("1+YZ+XY^2Z", d));
    }
    let d2 = d * d;
    let common = 1.0 + 2.0 * z * x + 2.0 * x * y * z * z + x * x * y * y * z * z;
    Ok([
        -x * x * (1.0 - y * y + 2.0 * y * z + y * y * z * z) / d2,
        y * y * common / d2,
        common / d2,
    ])
}

fn check_r(r: f64) -> Result<()> {
    if r == 0.0 || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("kdv2 needs finite r != 0, got {r}")));
    }
    Ok(())
}

/// The reduction of [`kdv3`] to the surface `xyz = r`.
pub fn kdv2(r: f64) -> Result<MapDescriptor> {
    check_r(r)?;
    let mut params = Params::new();
    params.insert("r".into(), r);
    Ok(MapDescriptor::new(
        "kdv2",
        2,
        params,
        move |v| {
            let (x, y) = (&v[0], &v[1]);
            let xy = x * y;
            let a = &(1.0 + &y.scale(r)) + &xy;
            let b = &(r + y) + &xy.scale(r);
            let c = &(r * r + &y.scale(r)) + &xy;
            Ok(vec![ratio(&(&xy * &a), &b, "r+y+rxy")?, ratio(&c, &(x * &a), "x(1+ry+xy)")?])
        },
        move |v| {
            let (x, y) = (&v[0], &v[1]);
            let xy = x * y;
            let a = &(1.0 + &x.scale(r)) + &xy;
            let b = &(r + x) + &xy.scale(r);
            let c = &(r * r + &x.scale(r)) + &xy;
            Ok(vec![ratio(&c, &(y * &a), "Y(1+rX+XY)")?, ratio(&(&xy * &a), &b, "r+X+rXY")?])
        },
    ))
}

/// `det J = (r^2+ry+xy) / (x (r+y+rxy))`.
pub fn kdv2_det_formula(r: f64, x: f64, y: f64) -> Result<f64> {
    let den = x * (r + y + r * x * y);
    if den.abs() < 1e-12 {
        return Err(Error::singular("x(r+y+rxy)", den));
    }
    Ok((r * r + r * y + x * y) / den)
}

/// Log-form Hamiltonian in image coordinates, restricted to positive log arguments.
pub fn kdv2_hamiltonian(r: f64) -> Result<ScalarField> {
    check_r(r)?;
    Ok(ScalarField::new("kdv2 H(X,Y)", 2, move |v| {
        let (x, y) = (&v[0], &v[1]);
        let xy = x * y;
        let a = &(1.0 + &x.scale(r)) + &xy;
        let b = &(r + x) + &xy.scale(r);
        let c = &(r * r + &x.scale(r)) + &xy;
        let first = ratio(&b, &(y * &a.square()), "Y(1+rX+XY)^2")?.ln("(r+X+rXY)/(Y(1+rX+XY)^2)")?;
        let second = ratio(&(&c * &a), &b, "r+X+rXY")?.ln("(r^2+rX+XY)(1+rX+XY)/(r+X+rXY)")?;
        Ok(&first.scale(r) + &second.scale(1.0 / r))
    }))
}

/// The same Hamiltonian in source coordinates: `r ln x + (1/r - r) ln(r+y+rxy)`.
pub fn kdv2_source_hamiltonian(r: f64) -> Result<ScalarField> {
    check_r(r)?;
    Ok(ScalarField::new("kdv2 H(x,y)", 2, move |v| {
        let (x, y) = (&v[0], &v[1]);
        let b = &(r + y) + &(x * y).scale(r);
        Ok(&x.ln("x")?.scale(r) + &b.ln("r+y+rxy")?.scale(1.0 / r - r))
    }))
}

/// Source-curve slope `dx/dy = x (r^2-1)(1+rx) / (r (r^2+ry+xy))`.
pub fn kdv2_dx_dy(r: f64, x: f64, y: f64) -> Result<f64> {
    let den = r * (r * r + r * y + x * y);
    if den.abs() < 1e-12 {
        return Err(Error::singular("r(r^2+ry+xy)", den));
    }
    Ok(x * (r * r - 1.0) * (1.0 + r * x) / den)
}

/// Closed-form `(dX/dy, dY/dy)` along the source curve, in source coordinates.
pub fn kdv2_image_velocity(r: f64, x: f64, y: f64) -> Result<[f64; 2]> {
    let b = r + y + r * x * y;
    let c = r * r + r * y + x * y;
    let a = 1.0 + r * y + x * y;
    if (b * c * r).abs() < 1e-12 || (x * a * a * c * r).abs() < 1e-12 {
        return Err(Error::singular("kdv2 velocity denominator", b * c * x * a));
    }
    let (r2, r3, r4) = (r * r, r * r * r, r * r * r * r);
    let dx = (r3 * x * x * y * y + 4.0 * r2 * y * y * x - 2.0 * x * y * y + 2.0 * r3 * x * y + 2.0 * r3 * y * y
        - r * y * y
        - y
        + 2.0 * r4 * y
        + r2 * y
        + r3)
        * x
        / (b * c * r);
    let dy = (1.0 - r2) * (x * x * y + 2.0 * r * x * y + 2.0 * r2 * x + r2 * y + r3 + r) * b / (x * a * a * c * r);
    Ok([dx, dy])
}
