//! Phase-space points and differentiable scalar fields.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_finite, Error, Result};
use crate::jet::Jet;

/// A point of n-dimensional real phase space. Always non-empty and finite.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct StateVector(pub(crate) Vec<f64>);

impl StateVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Dimension {
                expected: 1,
                got: 0,
            });
        }
        check_finite("state vector", &coords)?;
        Ok(StateVector(coords))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(coords.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Deref for StateVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for StateVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        StateVector::new(v)
    }
}

impl From<StateVector> for Vec<f64> {
    fn from(s: StateVector) -> Vec<f64> {
        s.0
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Builds a [`StateVector`] from literals, panicking on non-finite input.
#[macro_export]
macro_rules! state {
    ($($x:expr),+ $(,)?) => {
        $crate::StateVector::new(vec![$($x as f64),+]).expect("finite state literal")
    };
}

pub type JetFn = dyn Fn(&[Jet]) -> Result<Jet> + Send + Sync;

/// Real-valued function of a phase-space point, evaluable on jets.
#[derive(Clone)]
pub struct ScalarField {
    name: String,
    dim: usize,
    f: Arc<JetFn>,
}

impl ScalarField {
    pub fn new<F>(name: impl Into<String>, dim: usize, f: F) -> Self
    where
        F: Fn(&[Jet]) -> Result<Jet> + Send + Sync + 'static,
    {
        ScalarField {
            name: name.into(),
            dim,
            f: Arc::new(f),
        }
    }

    /// The projection `x -> x_index` (0-based).
    pub fn coordinate(dim: usize, index: usize) -> Self {
        assert!(index < dim, "coordinate index out of range");
        ScalarField::new(format!("x{}", index + 1), dim, move |x| Ok(x[index].clone()))
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        ScalarField::new(format!("{value}"), dim, move |_| Ok(Jet::constant(value)))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `k * self`.
    pub fn scaled(&self, k: f64) -> Self {
        let inner = self.clone();
        ScalarField::new(format!("{k}*{}", self.name), self.dim, move |x| {
            Ok(inner.eval_jet(x)?.scale(k))
        })
    }

    pub fn eval_jet(&self, x: &[Jet]) -> Result<Jet> {
        check_dim(self.dim, x.len())?;
        let v = (self.f)(x)?;
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("field {}", self.name)));
        }
        Ok(v)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_finite("field argument", x)?;
        Ok(self.eval_jet(&Jet::constants(x))?.value())
    }

    /// Gradient by forward-mode differentiation.
    pub fn grad(&self, x: &[f64]) -> Result<StateVector> {
        check_finite("field argument", x)?;
        let v = self.eval_jet(&Jet::seed(x))?;
        StateVector::new(v.gradient(x.len()))
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

/// Free-function form of [`ScalarField::grad`].
pub fn grad(f: &ScalarField, x: &[f64]) -> Result<StateVector> {
    f.grad(x)
}
