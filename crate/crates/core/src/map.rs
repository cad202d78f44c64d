//! Differentiable invertible maps and their compositions.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, check_finite, Error, Result};
use crate::field::StateVector;
use crate::jet::Jet;
use crate::linalg::SquareMatrix;

pub type VectorFn = dyn Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync;

/// Named real parameters, ordered by name.
pub type Params = BTreeMap<String, f64>;

/// A differentiable map bundled with its inverse.
#[derive(Clone)]
pub struct MapDescriptor {
    id: String,
    dim: usize,
    params: Params,
    forward: Arc<VectorFn>,
    inverse: Arc<VectorFn>,
}

impl MapDescriptor {
    pub fn new<F, G>(id: impl Into<String>, dim: usize, params: Params, forward: F, inverse: G) -> Self
    where
        F: Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static,
        G: Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static,
    {
        MapDescriptor {
            id: id.into(),
            dim,
            params,
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
        }
    }

    pub fn identity(dim: usize) -> Self {
        MapDescriptor::new("identity", dim, Params::new(), |x| Ok(x.to_vec()), |x| Ok(x.to_vec()))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    pub fn forward_jet(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        check_dim(self.dim, x.len())?;
        let out = (self.forward)(x)?;
        check_dim(self.dim, out.len())?;
        if out.iter().any(|j| !j.is_finite()) {
            return Err(Error::NonFinite(format!("forward map {}", self.id)));
        }
        Ok(out)
    }

    pub fn inverse_jet(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        check_dim(self.dim, x.len())?;
        let out = (self.inverse)(x)?;
        check_dim(self.dim, out.len())?;
        if out.iter().any(|j| !j.is_finite()) {
            return Err(Error::NonFinite(format!("inverse map {}", self.id)));
        }
        Ok(out)
    }

    pub fn forward(&self, x: &[f64]) -> Result<StateVector> {
        check_finite("map argument", x)?;
        values(self.forward_jet(&Jet::constants(x))?)
    }

    pub fn inverse(&self, x: &[f64]) -> Result<StateVector> {
        check_finite("map argument", x)?;
        values(self.inverse_jet(&Jet::constants(x))?)
    }

    /// Jacobian matrix, entry `(i, j) = dF_i/dx_j`.
    pub fn jacobian(&self, x: &[f64]) -> Result<SquareMatrix> {
        check_finite("map argument", x)?;
        jacobian_of(&self.forward_jet(&Jet::seed(x))?)
    }

    pub fn inverse_jacobian(&self, x: &[f64]) -> Result<SquareMatrix> {
        check_finite("map argument", x)?;
        jacobian_of(&self.inverse_jet(&Jet::seed(x))?)
    }

    pub fn det_jacobian(&self, x: &[f64]) -> Result<f64> {
        Ok(self.jacobian(x)?.det())
    }

    /// Reorders source coordinates so that coordinate `time_index` comes last.
    ///
    /// Image coordinates keep their order, so the induced flow differs from
    /// the unpermuted one exactly by the sign of the permutation.
    pub fn with_time_last(&self, time_index: usize) -> Result<MapDescriptor> {
        let n = self.dim;
        if time_index >= n {
            return Err(Error::Index(format!(
                "time index {} out of range for dimension {n}",
                time_index + 1
            )));
        }
        if time_index == n - 1 {
            return Ok(self.clone());
        }
        let perm = time_last_permutation(n, time_index);
        let (fwd, inv) = (self.clone(), self.clone());
        let p1 = perm.clone();
        let p2 = perm;
        Ok(MapDescriptor::new(
            format!("{}[t={}]", self.id, time_index + 1),
            n,
            self.params.clone(),
            move |xp| fwd.forward_jet(&unpermute(&p1, xp)),
            move |big| Ok(permute(&p2, &inv.inverse_jet(big)?)),
        ))
    }
}

impl fmt::Debug for MapDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapDescriptor")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("params", &self.params)
            .finish()
    }
}

fn values(jets: Vec<Jet>) -> Result<StateVector> {
    StateVector::new(jets.iter().map(Jet::value).collect())
}

pub(crate) fn jacobian_of(out: &[Jet]) -> Result<SquareMatrix> {
    let n = out.len();
    SquareMatrix::from_rows(&out.iter().map(|j| j.gradient(n)).collect::<Vec<_>>())
}

/// `perm[k]` is the original index placed at position `k`.
pub(crate) fn time_last_permutation(n: usize, time_index: usize) -> Vec<usize> {
    (0..n).filter(|&i| i != time_index).chain([time_index]).collect()
}

pub(crate) fn permute<T: Clone>(perm: &[usize], x: &[T]) -> Vec<T> {
    perm.iter().map(|&i| x[i].clone()).collect()
}

pub(crate) fn unpermute<T: Clone>(perm: &[usize], xp: &[T]) -> Vec<T> {
    let mut out = xp.to_vec();
    for (k, &i) in perm.iter().enumerate() {
        out[i] = xp[k].clone();
    }
    out
}

/// Chains `steps` in order: `x -> steps[m-1](... steps[0](x))`.
///
/// Errors raised by step `k` (1-based) come back as [`Error::IterateDomain`].
pub fn chain(id: impl Into<String>, params: Params, steps: Vec<MapDescriptor>) -> Result<MapDescriptor> {
    let first = steps
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty map chain".into()))?;
    let n = first.dim();
    if let Some(bad) = steps.iter().find(|s| s.dim() != n) {
        return Err(Error::Dimension {
            expected: n,
            got: bad.dim(),
        });
    }
    let steps = Arc::new(steps);
    let fwd = Arc::clone(&steps);
    let inv = steps;
    Ok(MapDescriptor::new(
        id,
        n,
        params,
        move |x| {
            let mut cur = x.to_vec();
            for (k, s) in fwd.iter().enumerate() {
                cur = s.forward_jet(&cur).map_err(|e| iterate_error(k + 1, e))?;
            }
            Ok(cur)
        },
        move |big| {
            let m = inv.len();
            let mut cur = big.to_vec();
            for (k, s) in inv.iter().enumerate().rev() {
                cur = s.inverse_jet(&cur).map_err(|e| iterate_error(m - k, e))?;
            }
            Ok(cur)
        },
    ))
}

fn iterate_error(step: usize, e: Error) -> Error {
    match e {
        already @ Error::IterateDomain { .. } => already,
        other => Error::IterateDomain {
            step,
            source: Box::new(other),
        },
    }
}

/// The `m`-fold forward composition of `map`, with the `m`-fold inverse.
pub fn compose(map: &MapDescriptor, m: usize) -> Result<MapDescriptor> {
    if m == 0 {
        return Err(Error::InvalidParameter("composition order must be >= 1".into()));
    }
    if m == 1 {
        return Ok(map.clone());
    }
    chain(format!("{}^{m}", map.id()), map.params().clone(), vec![map.clone(); m])
}

/// Determinants of each step's Jacobian along the orbit of `x`.
pub fn step_determinants(steps: &[MapDescriptor], x: &[f64]) -> Result<Vec<f64>> {
    let mut cur = StateVector::from_slice(x)?;
    let mut dets = Vec::with_capacity(steps.len());
    for (k, s) in steps.iter().enumerate() {
        dets.push(s.det_jacobian(&cur).map_err(|e| iterate_error(k + 1, e))?);
        cur = s.forward(&cur).map_err(|e| iterate_error(k + 1, e))?;
    }
    Ok(dets)
}
