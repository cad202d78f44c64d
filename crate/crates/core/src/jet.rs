//! First-order forward-mode differentiation.
//!
//! A [`Jet`] carries a value together with its partial derivatives with
//! respect to a fixed set of seed variables. A jet with an empty partials
//! list is a constant; binary operations treat missing partials as zero, so
//! constants mix freely with seeded jets of any width.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use smallvec::SmallVec;

use crate::error::{Error, Result};

type Partials = SmallVec<[f64; 4]>;

#[derive(Clone, PartialEq)]
pub struct Jet {
    value: f64,
    partials: Partials,
}

impl Jet {
    pub fn constant(value: f64) -> Self {
        Jet {
            value,
            partials: Partials::new(),
        }
    }

    /// Coordinate `index` of `width` seed variables, with unit partial `e_index`.
    pub fn variable(value: f64, index: usize, width: usize) -> Self {
        let mut partials: Partials = SmallVec::from_elem(0.0, width);
        partials[index] = 1.0;
        Jet { value, partials }
    }

    pub fn from_parts(value: f64, partials: &[f64]) -> Self {
        Jet {
            value,
            partials: SmallVec::from_slice(partials),
        }
    }

    /// Seeds every coordinate of `xs` as an independent variable.
    pub fn seed(xs: &[f64]) -> Vec<Jet> {
        let n = xs.len();
        xs.iter()
            .enumerate()
            .map(|(i, &v)| Jet::variable(v, i, n))
            .collect()
    }

    pub fn constants(xs: &[f64]) -> Vec<Jet> {
        xs.iter().map(|&v| Jet::constant(v)).collect()
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Partial derivatives; may be shorter than the seed width (missing entries are zero).
    pub fn partials(&self) -> &[f64] {
        &self.partials
    }

    pub fn partial(&self, i: usize) -> f64 {
        self.partials.get(i).copied().unwrap_or(0.0)
    }

    /// Partials padded with zeros to `width`.
    pub fn gradient(&self, width: usize) -> Vec<f64> {
        (0..width).map(|i| self.partial(i)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.partials.iter().all(|p| p.is_finite())
    }

    /// Applies a scalar function with value `f` and derivative `df` at `self`.
    fn chain(&self, f: f64, df: f64) -> Jet {
        Jet {
            value: f,
            partials: self.partials.iter().map(|p| df * p).collect(),
        }
    }

    fn combine(a: &Jet, wa: f64, b: &Jet, wb: f64, value: f64) -> Jet {
        let n = a.partials.len().max(b.partials.len());
        let partials = (0..n).map(|i| wa * a.partial(i) + wb * b.partial(i)).collect();
        Jet { value, partials }
    }

    pub fn recip(&self) -> Jet {
        let r = 1.0 / self.value;
        self.chain(r, -r * r)
    }

    pub fn powi(&self, k: i32) -> Jet {
        if k == 0 {
            return Jet::constant(1.0);
        }
        self.chain(self.value.powi(k), k as f64 * self.value.powi(k - 1))
    }

    pub fn square(&self) -> Jet {
        self.chain(self.value * self.value, 2.0 * self.value)
    }

    pub fn sqrt(&self) -> Jet {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value.exp();
        self.chain(e, e)
    }

    /// Natural logarithm; `what` names the argument in the domain error.
    pub fn ln(&self, what: &str) -> Result<Jet> {
        if !(self.value > 0.0) {
            return Err(Error::LogDomain {
                what: what.to_string(),
                value: self.value,
            });
        }
        Ok(self.chain(self.value.ln(), 1.0 / self.value))
    }

    /// Quotient that refuses denominators with `|den| < 1e-12 * (1 + |num|)`.
    pub fn guarded_div(&self, den: &Jet, what: &str) -> Result<Jet> {
        if !(den.value.abs() >= 1e-12 * (1.0 + self.value.abs())) {
            return Err(Error::singular(what, den.value));
        }
        Ok(self / den)
    }

    pub fn scale(&self, k: f64) -> Jet {
        self.chain(k * self.value, k)
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet({} ; {:?})", self.value, self.partials.as_slice())
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.chain(-self.value, -1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}

impl Add<&Jet> for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        Jet::combine(self, 1.0, rhs, 1.0, self.value + rhs.value)
    }
}

impl Sub<&Jet> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        Jet::combine(self, 1.0, rhs, -1.0, self.value - rhs.value)
    }
}

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        Jet::combine(self, rhs.value, rhs, self.value, self.value * rhs.value)
    }
}

impl Div<&Jet> for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        let q = self.value / rhs.value;
        Jet::combine(self, 1.0 / rhs.value, rhs, -q / rhs.value, q)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        Jet {
            value: self.value + rhs,
            partials: self.partials.clone(),
        }
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self + (-rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Div<f64> for &Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.scale(1.0 / rhs)
    }
}

impl Add<&Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        rhs + self
    }
}

impl Sub<&Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        rhs.chain(self - rhs.value, -1.0)
    }
}

impl Mul<&Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        rhs.scale(self)
    }
}

impl Div<&Jet> for f64 {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        rhs.recip().scale(self)
    }
}

// Owned-operand forwarding.
macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
        impl $tr<f64> for Jet {
            type Output = Jet;
            fn $m(self, rhs: f64) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for f64 {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);
