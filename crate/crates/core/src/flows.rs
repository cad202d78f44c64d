//! Nambu-Hamiltonian flows attached to invertible maps.
//!
//! For a map `x -> X` of dimension `n` with one source coordinate `x_t`
//! chosen as time, the Hamiltonians are
//!
//! ```text
//! H_j(X)     = x_j(X),                                   j <= n-2
//! H_{n-1}(X) = integral of det J dx_{n-1} up to x_{n-1}(X)
//! ```
//!
//! and the image point moves by `dX_j/dt = {H_1, ..., H_{n-1}, X_j}`. The
//! source point moves along `dx_j/dt = {H_1, ..., H_{n-1}, x_j}_x / det J`;
//! pushing that curve through the map traces the same orbit.
//!
//! A time coordinate other than the last is handled by reordering source
//! coordinates so that it comes last. Image coordinates keep their order.

use serde::{Deserialize, Serialize};

use crate::bracket::bracket_with_coordinates;
use crate::error::{check_dim, check_finite, Error, Result};
use crate::field::{ScalarField, StateVector};
use crate::integrate::{self, IntegratorConfig, Trajectory};
use crate::jet::Jet;
use crate::map::{jacobian_of, permute, time_last_permutation, unpermute, MapDescriptor};
use crate::quadrature::{integrate_vec, QuadratureConfig};
use crate::sampling::{SampleBox, DEFAULT_SEED};

/// Threshold on `|d det J / d x_t|`, relative to `1 + |det J|`.
pub const DET_CONDITION_TOL: f64 = 1e-7;

/// Immutable flow description: map, time coordinate and `n - 1` Hamiltonians.
#[derive(Clone, Debug)]
pub struct FlowSystem {
    map: MapDescriptor,
    permuted: MapDescriptor,
    perm: Vec<usize>,
    time_index: usize,
    hamiltonians: Vec<ScalarField>,
}

impl FlowSystem {
    /// Flow of `map` with explicitly supplied Hamiltonians over image space.
    ///
    /// `time_index` is 0-based.
    pub fn new(map: MapDescriptor, time_index: usize, hamiltonians: Vec<ScalarField>) -> Result<Self> {
        let n = map.dim();
        if n < 2 {
            return Err(Error::InvalidParameter("flows need dimension >= 2".into()));
        }
        if hamiltonians.len() != n - 1 {
            return Err(Error::Arity {
                expected: n - 1,
                got: hamiltonians.len(),
            });
        }
        for h in &hamiltonians {
            check_dim(n, h.dim())?;
        }
        let permuted = map.with_time_last(time_index)?;
        Ok(FlowSystem {
            perm: time_last_permutation(n, time_index),
            map,
            permuted,
            time_index,
            hamiltonians,
        })
    }

    pub fn map(&self) -> &MapDescriptor {
        &self.map
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }

    pub fn hamiltonians(&self) -> &[ScalarField] {
        &self.hamiltonians
    }

    pub fn with_hamiltonians(&self, hamiltonians: Vec<ScalarField>) -> Result<Self> {
        FlowSystem::new(self.map.clone(), self.time_index, hamiltonians)
    }

    pub fn hamiltonian_values(&self, big_x: &[f64]) -> Result<Vec<f64>> {
        self.hamiltonians.iter().map(|h| h.eval(big_x)).collect()
    }

    /// `det J` at the source point `x` (original coordinate order).
    pub fn det_j(&self, x: &[f64]) -> Result<f64> {
        self.map.det_jacobian(x)
    }

    /// Source point with the time coordinate replaced by `t`.
    pub fn source_at(&self, x: &[f64], t: f64) -> Result<StateVector> {
        check_dim(self.dim(), x.len())?;
        let mut v = x.to_vec();
        v[self.time_index] = t;
        StateVector::new(v)
    }

    /// Image-space velocity `dX_j/dt = {H_1, ..., H_{n-1}, X_j}`.
    pub fn nambu_rhs(&self, big_x: &[f64]) -> Result<StateVector> {
        let n = self.dim();
        check_dim(n, big_x.len())?;
        check_finite("image point", big_x)?;
        let seeded = Jet::seed(big_x);
        let rows = self
            .hamiltonians
            .iter()
            .map(|h| Ok(h.eval_jet(&seeded)?.gradient(n)))
            .collect::<Result<Vec<_>>>()?;
        StateVector::new(bracket_with_coordinates(&rows, n)?)
    }

    /// Source-space velocity `dx_j/dt = {H_1 o F, ..., H_{n-1} o F, x_j} / det J`.
    pub fn source_rhs(&self, x: &[f64]) -> Result<StateVector> {
        let n = self.dim();
        check_dim(n, x.len())?;
        check_finite("source point", x)?;
        let xp = permute(&self.perm, x);
        let image = self.permuted.forward_jet(&Jet::seed(&xp))?;
        let det = jacobian_of(&image)?.det();
        if !(det.abs() > 1e-12) {
            return Err(Error::singular("det J", det));
        }
        let rows = self
            .hamiltonians
            .iter()
            .map(|h| Ok(h.eval_jet(&image)?.gradient(n)))
            .collect::<Result<Vec<_>>>()?;
        let v: Vec<f64> = bracket_with_coordinates(&rows, n)?
            .into_iter()
            .map(|b| b / det)
            .collect();
        StateVector::new(unpermute(&self.perm, &v))
    }

    fn with_ham_values(&self, mut tr: Trajectory) -> Result<Trajectory> {
        for s in &mut tr.samples {
            s.ham_values = self.hamiltonian_values(&s.state)?;
        }
        Ok(tr)
    }

    /// Integrates the Nambu flow from `x0` (image space), recording every step.
    pub fn integrate(&self, x0: &[f64], t0: f64, t1: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
        let tr = integrate::integrate(|_, y| Ok(self.nambu_rhs(y)?.into_vec()), x0, t0, t1, cfg)?;
        self.with_ham_values(tr)
    }

    /// Integrates the Nambu flow, sampling exactly at `times`.
    pub fn integrate_at(&self, x0: &[f64], times: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory> {
        let tr = integrate::integrate_at(|_, y| Ok(self.nambu_rhs(y)?.into_vec()), x0, times, cfg)?;
        self.with_ham_values(tr)
    }

    /// Integrates the source curve in `x` space, sampling at `times`.
    pub fn integrate_source_at(&self, x0: &[f64], times: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory> {
        integrate::integrate_at(|_, y| Ok(self.source_rhs(y)?.into_vec()), x0, times, cfg)
    }
}

/// Per-sample outcome of the `d det J / d x_t = 0` check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetSample {
    pub point: Vec<f64>,
    pub det_j: Option<f64>,
    pub derivative: Option<f64>,
    pub pass: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetConditionReport {
    /// 1-based index of the time coordinate.
    pub time_index: usize,
    pub max_derivative: f64,
    pub samples: Vec<DetSample>,
    pub pass: bool,
}

impl DetConditionReport {
    pub fn failures(&self) -> usize {
        self.samples.iter().filter(|s| !s.pass).count()
    }
}

/// Central difference of `det J` along source coordinate `index`.
fn det_derivative(map: &MapDescriptor, x: &[f64], index: usize, rel_step: f64) -> Result<f64> {
    let h = rel_step * (1.0 + x[index].abs());
    let mut p = x.to_vec();
    let mut m = x.to_vec();
    p[index] += h;
    m[index] -= h;
    Ok((map.det_jacobian(&p)? - map.det_jacobian(&m)?) / (2.0 * h))
}

/// Checks `|d det J / d x_t| <= 1e-7 (1 + |det J|)` at every sample.
///
/// `time_index` is 0-based. Evaluation failures mark the sample as failing.
pub fn check_det_condition(map: &MapDescriptor, time_index: usize, samples: &[StateVector]) -> DetConditionReport {
    let mut max_derivative: f64 = 0.0;
    let samples: Vec<DetSample> = samples
        .iter()
        .map(|x| {
            let r = map
                .det_jacobian(x)
                .and_then(|d| Ok((d, det_derivative(map, x, time_index, 1e-4)?)));
            match r {
                Ok((d, dd)) => {
                    max_derivative = max_derivative.max(dd.abs());
                    DetSample {
                        point: x.to_vec(),
                        det_j: Some(d),
                        derivative: Some(dd),
                        pass: dd.abs() <= DET_CONDITION_TOL * (1.0 + d.abs()),
                        error: None,
                    }
                }
                Err(e) => DetSample {
                    point: x.to_vec(),
                    det_j: None,
                    derivative: None,
                    pass: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let pass = !samples.is_empty() && samples.iter().all(|s| s.pass);
    DetConditionReport {
        time_index: time_index + 1,
        max_derivative,
        samples,
        pass,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetPolicy {
    /// Refuse construction unless `d det J / d x_t = 0` at every sample.
    #[default]
    Require,
    /// Build anyway; the flow then reproduces the map only along the source
    /// curve traced by [`FlowSystem::source_rhs`].
    SourceConstrained,
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    /// 0-based time coordinate; `None` means the last one.
    pub time_index: Option<usize>,
    pub policy: DetPolicy,
    /// Points for the determinant check; `None` draws 16 from `[0.2, 2]^n`.
    pub samples: Option<Vec<StateVector>>,
    pub quadrature: QuadratureConfig,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            time_index: None,
            policy: DetPolicy::Require,
            samples: None,
            quadrature: QuadratureConfig::default(),
        }
    }
}

/// Builds the Hamiltonians of a map numerically.
///
/// `ref_point` supplies (in original coordinate order) the lower limit of the
/// `det J` integral, taken at its coordinate `n - 1` after moving the time
/// coordinate last.
pub fn build_hamiltonians(map: &MapDescriptor, ref_point: &[f64], opts: &BuildOptions) -> Result<FlowSystem> {
    let n = map.dim();
    check_dim(n, ref_point.len())?;
    check_finite("reference point", ref_point)?;
    let time_index = opts.time_index.unwrap_or(n - 1);
    if n < 2 || time_index >= n {
        return Err(Error::Index(format!("time index {} for dimension {n}", time_index + 1)));
    }

    let samples = match &opts.samples {
        Some(s) => s.clone(),
        None => SampleBox::unit(n).sample(16, DEFAULT_SEED),
    };
    let report = check_det_condition(map, time_index, &samples);
    if !report.pass && opts.policy == DetPolicy::Require {
        return Err(Error::DetCondition {
            samples: report.samples.len(),
            failures: report.failures(),
            max_derivative: report.max_derivative,
        });
    }

    let perm = time_last_permutation(n, time_index);
    let permuted = map.with_time_last(time_index)?;
    let lower = permute(&perm, ref_point)[n - 2];

    let mut hamiltonians: Vec<ScalarField> = (0..n - 2)
        .map(|j| {
            let inv = permuted.clone();
            ScalarField::new(format!("x{}(X)", perm[j] + 1), n, move |big| {
                Ok(inv.inverse_jet(big)?.swap_remove(j))
            })
        })
        .collect();
    hamiltonians.push(quadrature_hamiltonian(permuted, lower, opts.quadrature));
    FlowSystem::new(map.clone(), time_index, hamiltonians)
}

/// `H(X) = integral from lower to x_{n-1}(X) of det J ds`, other source
/// coordinates held at their values `x_i(X)`.
///
/// Derivatives follow from differentiating under the integral sign; the
/// integrand's own derivatives are central differences of `det J`.
fn quadrature_hamiltonian(permuted: MapDescriptor, lower: f64, qcfg: QuadratureConfig) -> ScalarField {
    let n = permuted.dim();
    let k = n - 2;
    ScalarField::new(format!("int det J dx{}", n - 1), n, move |big| {
        let xs = permuted.inverse_jet(big)?;
        let base: Vec<f64> = xs.iter().map(Jet::value).collect();
        let upper = base[k];
        let width = xs.iter().map(|j| j.partials().len()).max().unwrap_or(0);
        let others: Vec<usize> = if width > 0 { (0..n).filter(|&i| i != k).collect() } else { vec![] };

        let integral = integrate_vec(
            |s| {
                let mut p = base.clone();
                p[k] = s;
                let mut out = Vec::with_capacity(1 + others.len());
                out.push(permuted.det_jacobian(&p)?);
                for &i in &others {
                    out.push(det_derivative(&permuted, &p, i, 1e-5)?);
                }
                Ok(out)
            },
            lower,
            upper,
            &qcfg,
        )?;
        if width == 0 {
            return Ok(Jet::constant(integral[0]));
        }
        let det_at_upper = permuted.det_jacobian(&base)?;
        let partials: Vec<f64> = (0..width)
            .map(|w| {
                let mut d = det_at_upper * xs[k].partial(w);
                for (slot, &i) in others.iter().enumerate() {
                    d += integral[1 + slot] * xs[i].partial(w);
                }
                d
            })
            .collect();
        Ok(Jet::from_parts(integral[0], &partials))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::Params;

    fn henon(b: f64, c: f64) -> MapDescriptor {
        MapDescriptor::new(
            "henon",
            2,
            Params::new(),
            move |x| Ok(vec![x[1].clone(), x[1].square() - x[0].scale(b) + c]),
            move |y| Ok(vec![(y[0].square() - &y[1] + c) / b, y[0].clone()]),
        )
    }

    fn henon_flow(b: f64, c: f64) -> FlowSystem {
        let h = ScalarField::new("X^2-Y+c", 2, move |x| Ok(x[0].square() - &x[1] + c));
        FlowSystem::new(henon(b, c), 1, vec![h]).unwrap()
    }

    #[test]
    fn henon_nambu_rhs_is_one_two_x() {
        let f = henon_flow(1.0, 0.0);
        for p in [[0.3, 1.0], [2.0, -5.0]] {
            let v = f.nambu_rhs(&p).unwrap();
            assert_eq!(v.as_slice(), &[1.0, 2.0 * p[0]]);
        }
    }

    #[test]
    fn constant_hamiltonian_gives_zero_velocity() {
        let f = FlowSystem::new(henon(1.0, 0.0), 1, vec![ScalarField::constant(2, 4.0)]).unwrap();
        assert_eq!(f.nambu_rhs(&[0.4, 0.5]).unwrap().as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn henon_source_point_does_not_move() {
        let f = henon_flow(0.7, 0.3);
        let v = f.source_rhs(&[0.5, 1.2]).unwrap();
        assert!(v[0].abs() < 1e-15);
        assert!((v[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn henon_flow_reaches_closed_form_endpoint() {
        // X = y + alpha, Y = y^2 + 2 alpha y + beta with alpha = 0.
        let beta = -0.8;
        let f = henon_flow(1.0, 0.0);
        let tr = f.integrate(&[0.0, beta], 0.0, 2.0, &IntegratorConfig::default()).unwrap();
        let end = tr.last();
        assert!((end.state[0] - 2.0).abs() < 1e-9);
        assert!((end.state[1] - (4.0 + beta)).abs() < 1e-9);
        let h0 = tr.samples[0].ham_values[0];
        assert!(tr.samples.iter().all(|s| (s.ham_values[0] - h0).abs() < 1e-9));
    }

    #[test]
    fn wrong_number_of_hamiltonians_is_refused() {
        assert!(matches!(
            FlowSystem::new(henon(1.0, 0.0), 1, vec![]),
            Err(Error::Arity { .. })
        ));
    }

    #[test]
    fn det_condition_detects_time_dependent_jacobian() {
        // (x, y) -> (x, x y^2): det J = 2 x y depends on y.
        let m = MapDescriptor::new(
            "synthetic",
            2,
            Params::new(),
            |x| Ok(vec![x[0].clone(), &x[0] * &x[1].square()]),
            |y| Ok(vec![y[0].clone(), (&y[1] / &y[0]).sqrt()]),
        );
        let pts = SampleBox::unit(2).sample(5, 1);
        let r = check_det_condition(&m, 1, &pts);
        assert!(!r.pass);
        assert!(r.samples.iter().all(|s| (s.derivative.unwrap() - 2.0 * s.point[0]).abs() < 1e-6));
        assert!(check_det_condition(&henon(0.5, 1.0), 0, &pts).pass);
        assert!(check_det_condition(&henon(0.5, 1.0), 1, &pts).pass);
    }

    #[test]
    fn numeric_builder_refuses_failing_det_condition() {
        let m = MapDescriptor::new(
            "synthetic",
            2,
            Params::new(),
            |x| Ok(vec![x[0].clone(), &x[0] * &x[1].square()]),
            |y| Ok(vec![y[0].clone(), (&y[1] / &y[0]).sqrt()]),
        );
        let r = build_hamiltonians(&m, &[1.0, 1.0], &BuildOptions::default());
        assert!(matches!(r, Err(Error::DetCondition { .. })));
    }

    #[test]
    fn numeric_henon_hamiltonian_is_b_x_plus_constant() {
        let (b, c) = (0.8, 0.25);
        let f = build_hamiltonians(&henon(b, c), &[1.0, 1.0], &BuildOptions::default()).unwrap();
        let closed = |p: &[f64]| p[0] * p[0] - p[1] + c;
        let offset = closed(&[1.0, 1.0]) - f.hamiltonians()[0].eval(&[1.0, 1.0]).unwrap();
        for p in [[0.3, 0.9], [1.7, 0.2], [-0.5, 2.0]] {
            let h = f.hamiltonians()[0].eval(&p).unwrap();
            assert!((h + offset - closed(&p)).abs() < 1e-10);
            let g = f.hamiltonians()[0].grad(&p).unwrap();
            assert!((g[0] - 2.0 * p[0]).abs() < 1e-9 && (g[1] + 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn first_coordinate_as_time_flips_hamilton_signs() {
        // With x as time the image moves by dX/dx = dH/dY, dY/dx = -dH/dX for
        // H = integral of det J dy.
        let (b, c) = (0.9, 0.0);
        let opts = BuildOptions {
            time_index: Some(0),
            ..Default::default()
        };
        let f = build_hamiltonians(&henon(b, c), &[1.0, 0.0], &opts).unwrap();
        // Along x with y fixed, X = y is constant and Y = y^2 - b x + c moves at -b.
        let big = henon(b, c).forward(&[0.4, 1.3]).unwrap();
        let v = f.nambu_rhs(&big).unwrap();
        assert!(v[0].abs() < 1e-9);
        assert!((v[1] + b).abs() < 1e-9);
    }
}
