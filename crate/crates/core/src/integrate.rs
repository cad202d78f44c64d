//! Explicit Runge-Kutta integration: classical RK4 and Dormand-Prince 5(4).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Method {
    /// Classical fourth-order Runge-Kutta with fixed step.
    Rk4 { step: f64 },
    /// Adaptive Dormand-Prince 5(4).
    DormandPrince { rel_tol: f64, abs_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::DormandPrince {
                rel_tol: 1e-10,
                abs_tol: 1e-12,
            },
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(step: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4 { step },
            ..Default::default()
        }
    }

    pub fn dormand_prince(rel_tol: f64, abs_tol: f64) -> Self {
        IntegratorConfig {
            method: Method::DormandPrince { rel_tol, abs_tol },
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.method {
            Method::Rk4 { step } => step > 0.0 && step.is_finite(),
            Method::DormandPrince { rel_tol, abs_tol } => rel_tol > 0.0 && abs_tol > 0.0,
        };
        if !ok || self.max_steps == 0 {
            return Err(Error::InvalidParameter(format!("integrator config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: StateVector,
    /// Hamiltonian values at `state`; empty for bare integrations.
    pub ham_values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub stats: Stats,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Stepper<'a, F> {
    rhs: &'a F,
    cfg: IntegratorConfig,
    stats: Stats,
    h: Option<f64>,
}

fn axpy(y: &[f64], h: f64, ks: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (k, &c) in ks.iter().zip(coeffs) {
        if c != 0.0 {
            for (o, v) in out.iter_mut().zip(k) {
                *o += h * c * v;
            }
        }
    }
    out
}

impl<'a, F> Stepper<'a, F>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    fn eval(&mut self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        self.stats.rhs_evals += 1;
        let v = (self.rhs)(t, y)?;
        if v.len() != y.len() {
            return Err(Error::Dimension {
                expected: y.len(),
                got: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("right-hand side".into()));
        }
        Ok(v)
    }

    fn fail(reason: impl Into<String>, t: f64, y: &[f64]) -> Error {
        Error::Integration {
            reason: reason.into(),
            t,
            state: y.to_vec(),
        }
    }

    /// Advances `(t, y)` to exactly `target`.
    fn advance(&mut self, t: &mut f64, y: &mut Vec<f64>, target: f64, record: &mut dyn FnMut(f64, &[f64])) -> Result<()> {
        match self.cfg.method {
            Method::Rk4 { step } => self.advance_rk4(t, y, target, step, record),
            Method::DormandPrince { rel_tol, abs_tol } => {
                self.advance_dopri(t, y, target, rel_tol, abs_tol, record)
            }
        }
    }

    fn advance_rk4(
        &mut self,
        t: &mut f64,
        y: &mut Vec<f64>,
        target: f64,
        step: f64,
        record: &mut dyn FnMut(f64, &[f64]),
    ) -> Result<()> {
        let dir = (target - *t).signum();
        let start = *t;
        let mut k = 0u64;
        while (target - *t) * dir > 0.0 {
            if self.stats.steps >= self.cfg.max_steps {
                return Err(Self::fail("maximum number of steps exceeded", *t, y));
            }
            let remaining = target - *t;
            let last = remaining.abs() <= step * (1.0 + 1e-9);
            let h = if last { remaining } else { dir * step };
            let stage = |s: &mut Self, tt: f64, yy: &[f64]| {
                s.eval(tt, yy).map_err(|e| Self::fail(e.to_string(), *t, y))
            };
            let k1 = stage(self, *t, y)?;
            let k2 = stage(self, *t + h / 2.0, &axpy(y, h / 2.0, &[k1.clone()], &[1.0]))?;
            let k3 = stage(self, *t + h / 2.0, &axpy(y, h / 2.0, &[k2.clone()], &[1.0]))?;
            let k4 = stage(self, *t + h, &axpy(y, h, &[k3.clone()], &[1.0]))?;
            *y = axpy(y, h, &[k1, k2, k3, k4], &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0]);
            k += 1;
            *t = if last { target } else { start + dir * step * k as f64 };
            self.stats.steps += 1;
            record(*t, y);
        }
        Ok(())
    }

    fn initial_step(&mut self, t: f64, y: &[f64], f0: &[f64], span: f64, rtol: f64, atol: f64) -> f64 {
        let sc: Vec<f64> = y.iter().map(|v| atol + rtol * v.abs()).collect();
        let norm = |v: &[f64]| {
            (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
        };
        let d0 = norm(y);
        let d1 = norm(f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span.abs());
        let y1 = axpy(y, h0 * span.signum(), &[f0.to_vec()], &[1.0]);
        let h = match self.eval(t + h0 * span.signum(), &y1) {
            Ok(f1) => {
                let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
                let d2 = norm(&diff) / h0;
                let h1 = if d1.max(d2) <= 1e-15 {
                    (h0 * 1e-3).max(1e-6)
                } else {
                    (0.01 / d1.max(d2)).powf(1.0 / 5.0)
                };
                (100.0 * h0).min(h1)
            }
            Err(_) => h0,
        };
        h.min(span.abs())
    }

    fn advance_dopri(
        &mut self,
        t: &mut f64,
        y: &mut Vec<f64>,
        target: f64,
        rtol: f64,
        atol: f64,
        record: &mut dyn FnMut(f64, &[f64]),
    ) -> Result<()> {
        let span = target - *t;
        if span == 0.0 {
            return Ok(());
        }
        let dir = span.signum();
        let mut k0 = self.eval(*t, y).map_err(|e| Self::fail(e.to_string(), *t, y))?;
        let mut h = match self.h {
            Some(h) => h.min(span.abs()),
            None => self.initial_step(*t, y, &k0, span, rtol, atol),
        };
        while (target - *t) * dir > 0.0 {
            if self.stats.steps + self.stats.rejected >= self.cfg.max_steps {
                return Err(Self::fail("maximum number of steps exceeded", *t, y));
            }
            let min_h = 1e-14 * (1.0 + t.abs());
            if h < min_h {
                return Err(Self::fail("step size underflow", *t, y));
            }
            let remaining = (target - *t).abs();
            let last = h >= remaining * (1.0 - 1e-12);
            let hh = if last { remaining } else { h } * dir;

            let mut ks: Vec<Vec<f64>> = Vec::with_capacity(7);
            ks.push(k0.clone());
            let mut stage_failed = false;
            for s in 1..7 {
                let ys = axpy(y, hh, &ks, &A[s][..s]);
                match self.eval(*t + C[s] * hh, &ys) {
                    Ok(k) => ks.push(k),
                    Err(_) => {
                        stage_failed = true;
                        break;
                    }
                }
            }
            if stage_failed {
                // Trial step reached a singular region; retreat.
                self.stats.rejected += 1;
                h = 0.25 * hh.abs();
                continue;
            }
            let y5 = axpy(y, hh, &ks, &B5);
            let y4 = axpy(y, hh, &ks, &B4);
            let err = (y5
                .iter()
                .zip(&y4)
                .zip(y.iter())
                .map(|((a, b), y0)| {
                    let sc = atol + rtol * a.abs().max(y0.abs());
                    ((a - b) / sc).powi(2)
                })
                .sum::<f64>()
                / y.len() as f64)
                .sqrt();
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                *t = if last { target } else { *t + hh };
                *y = y5;
                k0 = ks.swap_remove(6);
                self.stats.steps += 1;
                record(*t, y);
                if !last {
                    h = hh.abs() * factor;
                } else {
                    self.h = Some(h.max(hh.abs()));
                }
            } else {
                self.stats.rejected += 1;
                h = hh.abs() * factor.min(1.0);
            }
        }
        Ok(())
    }
}

fn check_start(x0: &[f64], t0: f64, t1: f64) -> Result<()> {
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::NonFinite("time span".into()));
    }
    if x0.is_empty() || x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial state".into()));
    }
    Ok(())
}

/// Integrates `dy/dt = rhs(t, y)` from `t0` to `t1`, recording every accepted step.
pub fn integrate<F>(rhs: F, x0: &[f64], t0: f64, t1: f64, cfg: &IntegratorConfig) -> Result<Trajectory>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    cfg.validate()?;
    check_start(x0, t0, t1)?;
    if t0 == t1 {
        return Err(Error::InvalidParameter("empty time span (t0 == t1)".into()));
    }
    let mut stepper = Stepper {
        rhs: &rhs,
        cfg: *cfg,
        stats: Stats::default(),
        h: None,
    };
    let mut samples = vec![Sample {
        t: t0,
        state: StateVector::from_slice(x0)?,
        ham_values: vec![],
    }];
    let mut t = t0;
    let mut y = x0.to_vec();
    let mut record = |tt: f64, yy: &[f64]| {
        samples.push(Sample {
            t: tt,
            state: StateVector(yy.to_vec()),
            ham_values: vec![],
        })
    };
    stepper.advance(&mut t, &mut y, t1, &mut record)?;
    Ok(Trajectory {
        samples,
        stats: stepper.stats,
    })
}

/// Integrates through the strictly monotone `times`, sampling exactly at each.
pub fn integrate_at<F>(rhs: F, x0: &[f64], times: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    cfg.validate()?;
    let (&t0, rest) = times
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("no sample times".into()))?;
    let t_end = *rest
        .last()
        .ok_or_else(|| Error::InvalidParameter("need at least two sample times".into()))?;
    check_start(x0, t0, t_end)?;
    let dir = (t_end - t0).signum();
    if dir == 0.0 || times.windows(2).any(|w| (w[1] - w[0]) * dir <= 0.0) {
        return Err(Error::InvalidParameter("sample times must be strictly monotone".into()));
    }
    let mut stepper = Stepper {
        rhs: &rhs,
        cfg: *cfg,
        stats: Stats::default(),
        h: None,
    };
    let mut samples = vec![Sample {
        t: t0,
        state: StateVector::from_slice(x0)?,
        ham_values: vec![],
    }];
    let mut t = t0;
    let mut y = x0.to_vec();
    for &target in rest {
        stepper.advance(&mut t, &mut y, target, &mut |_, _| {})?;
        samples.push(Sample {
            t: target,
            state: StateVector(y.clone()),
            ham_values: vec![],
        });
    }
    Ok(Trajectory {
        samples,
        stats: stepper.stats,
    })
}
