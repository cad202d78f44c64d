//! Adaptive Gauss-Kronrod (7, 15) quadrature for vector-valued integrands.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-13,
            max_intervals: 200,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre)?;
    let width = fc.len();
    let mut kronrod: Vec<f64> = fc.iter().map(|v| v * WGK[7]).collect();
    let mut gauss: Vec<f64> = fc.iter().map(|v| v * WG[3]).collect();
    for (k, &node) in XGK[..7].iter().enumerate() {
        let dx = half * node;
        let f1 = f(centre - dx)?;
        let f2 = f(centre + dx)?;
        for i in 0..width {
            let s = f1[i] + f2[i];
            kronrod[i] += WGK[k] * s;
            if k % 2 == 1 {
                gauss[i] += WG[k / 2] * s;
            }
        }
    }
    let value: Vec<f64> = kronrod.iter().map(|v| v * half).collect();
    let error = kronrod
        .iter()
        .zip(&gauss)
        .map(|(k, g)| ((k - g) * half).abs())
        .fold(0.0, f64::max);
    Ok(Panel { a, b, value, error })
}

/// Integrates every component of `f` over `[a, b]`.
///
/// Bisects the panel with the largest error until the summed error estimate
/// drops below `max(abs_tol, rel_tol * |integral|)`.
pub fn integrate_vec<F>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    if a == b {
        let width = f(a)?.len();
        return Ok(vec![0.0; width]);
    }
    let mut panels = vec![gk15(&mut f, a, b)?];
    loop {
        let width = panels[0].value.len();
        let mut total = vec![0.0; width];
        let mut err = 0.0;
        for p in &panels {
            for (t, v) in total.iter_mut().zip(&p.value) {
                *t += v;
            }
            err += p.error;
        }
        let scale = total.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        if err <= cfg.abs_tol.max(cfg.rel_tol * scale) {
            return Ok(total);
        }
        if panels.len() >= cfg.max_intervals {
            return Err(Error::Quadrature { estimate: err });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid == p.a || mid == p.b {
            return Err(Error::Quadrature { estimate: err });
        }
        panels.push(gk15(&mut f, p.a, mid)?);
        panels.push(gk15(&mut f, mid, p.b)?);
    }
}

/// Scalar convenience wrapper over [`integrate_vec`].
pub fn integrate<F>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    Ok(integrate_vec(|s| Ok(vec![f(s)?]), a, b, cfg)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let cfg = QuadratureConfig::default();
        let v = integrate(|s| Ok(3.0 * s * s - 2.0 * s + 1.0), -1.0, 2.0, &cfg).unwrap();
        // [s^3 - s^2 + s] from -1 to 2 = 6 - (-3) = 9.
        assert!((v - 9.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let cfg = QuadratureConfig::default();
        let a = integrate(|s| Ok(s.exp()), 0.0, 1.0, &cfg).unwrap();
        let b = integrate(|s| Ok(s.exp()), 1.0, 0.0, &cfg).unwrap();
        assert!((a - (1f64.exp() - 1.0)).abs() < 1e-12);
        assert!((a + b).abs() < 1e-14);
    }

    #[test]
    fn peaked_integrand_converges_adaptively() {
        let cfg = QuadratureConfig::default();
        let v = integrate(|s| Ok(1.0 / (1e-3 + s * s)), -1.0, 1.0, &cfg).unwrap();
        let exact = 2.0 * (1.0 / 1e-3f64.sqrt()) * (1.0 / 1e-3f64.sqrt()).atan();
        assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
    }

    #[test]
    fn vector_components_are_independent() {
        let cfg = QuadratureConfig::default();
        let v = integrate_vec(|s| Ok(vec![1.0, s, s.sin()]), 0.0, 2.0, &cfg).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-14);
        assert!((v[1] - 2.0).abs() < 1e-14);
        assert!((v[2] - (1.0 - 2f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn nonintegrable_singularity_reports_error() {
        let cfg = QuadratureConfig {
            max_intervals: 50,
            ..Default::default()
        };
        let r = integrate(|s| Ok(1.0 / s.abs().max(1e-300)), -1.0, 1.0, &cfg);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
