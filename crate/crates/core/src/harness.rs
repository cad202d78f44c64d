//! End-to-end checks that a Nambu flow reproduces its map.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::FlowSystem;
use crate::integrate::{self, IntegratorConfig, Stats};
use crate::map::{compose, step_determinants, MapDescriptor, Params};
use crate::maps::{catalog_map, hermite_step_map, henon, CatalogEntry, CatalogOptions};

pub const DEFAULT_TOL_DEVIATION: f64 = 1e-6;
pub const DEFAULT_TOL_DRIFT: f64 = 1e-7;
pub const DET_PRODUCT_TOL: f64 = 1e-8;

/// Environment variable capping the worker count of [`conservation_scan`].
pub const THREADS_ENV: &str = "MAPFLOW_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub deviation: f64,
    pub drift: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            deviation: DEFAULT_TOL_DEVIATION,
            drift: DEFAULT_TOL_DRIFT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub catalog: CatalogOptions,
    /// 0-based time coordinate; `None` uses the catalog default.
    pub time_index: Option<usize>,
    pub tolerances: Tolerances,
    /// Number of equal intervals of the time span; one sample per endpoint.
    pub intervals: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            catalog: CatalogOptions::default(),
            time_index: None,
            tolerances: Tolerances::default(),
            intervals: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceSample {
    pub t: f64,
    /// Image point carried by the Nambu flow.
    pub flow: Vec<f64>,
    /// Map image of the source point at time `t`.
    pub map: Vec<f64>,
    /// Source point at time `t`.
    pub source: Vec<f64>,
    pub hamiltonians: Vec<f64>,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceReport {
    pub map_id: String,
    pub params: Params,
    /// 1-based.
    pub time_index: usize,
    pub t0: f64,
    pub t1: f64,
    pub source_constrained: bool,
    pub hamiltonian_names: Vec<String>,
    pub samples: Vec<CorrespondenceSample>,
    pub max_deviation: f64,
    /// Per Hamiltonian, `max_t |H(t) - H(t0)| / (1 + |H(t0)|)`.
    pub drifts: Vec<f64>,
    pub tolerances: Tolerances,
    pub pass: bool,
    pub stats: Stats,
}

impl CorrespondenceReport {
    pub fn max_drift(&self) -> f64 {
        self.drifts.iter().copied().fold(0.0, f64::max)
    }
}

fn sample_times(t0: f64, t1: f64, intervals: usize) -> Result<Vec<f64>> {
    if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
        return Err(Error::InvalidParameter(format!("time span [{t0}, {t1}]")));
    }
    if intervals < 1 {
        return Err(Error::InvalidParameter("need at least one interval".into()));
    }
    let n = intervals as f64;
    Ok((0..=intervals)
        .map(|k| if k == intervals { t1 } else { t0 + (t1 - t0) * (k as f64 / n) })
        .collect())
}

fn relative_deviation(flow: &[f64], map: &[f64]) -> f64 {
    let scale = 1.0 + map.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    flow.iter().zip(map).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
}

/// Checks `flow` against direct evaluation of its map from the source point `x0`.
///
/// The time coordinate of `x0` is replaced by `t0`. When `source_constrained`
/// holds, the source point is integrated along with the image and its time
/// coordinate must track `t`; otherwise the source point is `x0` with only
/// the time coordinate moving.
pub fn verify_flow_correspondence(
    flow: &FlowSystem,
    source_constrained: bool,
    x0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    opts: &VerifyOptions,
) -> Result<CorrespondenceReport> {
    let n = flow.dim();
    let ti = flow.time_index();
    let times = sample_times(t0, t1, opts.intervals)?;
    let start = flow.source_at(x0, t0)?;
    let image0 = flow.map().forward(&start)?;

    let (images, sources, stats): (Vec<Vec<f64>>, Vec<Vec<f64>>, Stats) = if source_constrained {
        let mut y0 = image0.as_slice().to_vec();
        y0.extend_from_slice(start.as_slice());
        let tr = integrate::integrate_at(
            |_, y| {
                let mut v = flow.nambu_rhs(&y[..n])?.into_vec();
                v.extend(flow.source_rhs(&y[n..])?.into_vec());
                Ok(v)
            },
            &y0,
            &times,
            cfg,
        )?;
        let (im, src) = tr
            .samples
            .iter()
            .map(|s| (s.state.as_slice()[..n].to_vec(), s.state.as_slice()[n..].to_vec()))
            .unzip();
        (im, src, tr.stats)
    } else {
        let tr = flow.integrate_at(image0.as_slice(), &times, cfg)?;
        let src = times
            .iter()
            .map(|&t| Ok(flow.source_at(&start, t)?.into_vec()))
            .collect::<Result<Vec<_>>>()?;
        let im = tr.samples.iter().map(|s| s.state.as_slice().to_vec()).collect();
        (im, src, tr.stats)
    };

    let h0 = flow.hamiltonian_values(image0.as_slice())?;
    let mut drifts = vec![0.0f64; h0.len()];
    let mut samples = Vec::with_capacity(times.len());
    for ((&t, big), src) in times.iter().zip(images).zip(sources) {
        let mapped = flow.map().forward(&src)?.into_vec();
        let lag = (src[ti] - t).abs() / (1.0 + t.abs());
        let deviation = relative_deviation(&big, &mapped).max(lag);
        let hv = flow.hamiltonian_values(&big)?;
        for (d, (h, h_0)) in drifts.iter_mut().zip(hv.iter().zip(&h0)) {
            *d = d.max((h - h_0).abs() / (1.0 + h_0.abs()));
        }
        samples.push(CorrespondenceSample {
            t,
            flow: big,
            map: mapped,
            source: src,
            hamiltonians: hv,
            deviation,
        });
    }
    let max_deviation = samples.iter().map(|s| s.deviation).fold(0.0, f64::max);
    let tol = opts.tolerances;
    let pass = max_deviation <= tol.deviation && drifts.iter().all(|d| *d <= tol.drift);
    Ok(CorrespondenceReport {
        map_id: flow.map().id().to_string(),
        params: flow.map().params().clone(),
        time_index: ti + 1,
        t0,
        t1,
        source_constrained,
        hamiltonian_names: flow.hamiltonians().iter().map(|h| h.name().to_string()).collect(),
        samples,
        max_deviation,
        drifts,
        tolerances: tol,
        pass,
        stats,
    })
}

/// Inserts `t` at `time_index` when `x0` omits the time coordinate.
pub fn complete_source(x0: &[f64], dim: usize, time_index: usize, t: f64) -> Result<Vec<f64>> {
    if x0.len() == dim {
        let mut v = x0.to_vec();
        v[time_index] = t;
        Ok(v)
    } else if x0.len() + 1 == dim {
        let mut v = x0.to_vec();
        v.insert(time_index, t);
        Ok(v)
    } else {
        Err(Error::Dimension {
            expected: dim - 1,
            got: x0.len(),
        })
    }
}

fn entry_flow(entry: &CatalogEntry, time_index: Option<usize>) -> Result<(FlowSystem, bool)> {
    let flow = entry.flow(time_index)?;
    let constrained = entry.source_constrained && flow.time_index() == entry.time_index;
    Ok((flow, constrained))
}

/// Builds the catalog flow and runs [`verify_flow_correspondence`].
///
/// `x0` holds either all `n` source coordinates or the `n - 1` non-time ones.
pub fn verify_correspondence(
    map_id: &str,
    params: &Params,
    x0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    opts: &VerifyOptions,
) -> Result<CorrespondenceReport> {
    let entry = catalog_map(map_id, params, &opts.catalog)?;
    let (flow, constrained) = entry_flow(&entry, opts.time_index)?;
    let x = complete_source(x0, entry.dim(), flow.time_index(), t0)?;
    let mut report = verify_flow_correspondence(&flow, constrained, &x, t0, t1, cfg, opts)?;
    report.map_id = entry.id.clone();
    report.params = entry.params.clone();
    Ok(report)
}

/// One axis `lo:hi:count` of a scan grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => vec![],
            1 => vec![self.lo],
            c => (0..c)
                .map(|k| if k + 1 == c { self.hi } else { self.lo + (self.hi - self.lo) * (k as f64 / (c - 1) as f64) })
                .collect(),
        }
    }
}

impl FromStr for GridAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("grid axis `{s}` (expected lo:hi:count)"));
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts.as_slice() else {
            return Err(bad());
        };
        let axis = GridAxis {
            lo: lo.trim().parse().map_err(|_| bad())?,
            hi: hi.trim().parse().map_err(|_| bad())?,
            count: count.trim().parse().map_err(|_| bad())?,
        };
        if !(axis.lo.is_finite() && axis.hi.is_finite()) || axis.count == 0 {
            return Err(bad());
        }
        Ok(axis)
    }
}

impl fmt::Display for GridAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.count)
    }
}

/// Tensor grid over the non-time source coordinates, first axis slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<GridAxis>,
}

impl GridSpec {
    pub fn new(axes: Vec<GridAxis>) -> Self {
        GridSpec { axes }
    }

    pub fn single(point: &[f64]) -> Self {
        GridSpec {
            axes: point.iter().map(|&v| GridAxis { lo: v, hi: v, count: 1 }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.axes.iter().fold(vec![vec![]], |acc, axis| {
            let vals = axis.values();
            acc.iter()
                .flat_map(|p| {
                    vals.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(*v);
                        q
                    })
                })
                .collect()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub index: usize,
    /// Grid point (non-time coordinates).
    pub point: Vec<f64>,
    pub max_deviation: Option<f64>,
    pub max_drift: Option<f64>,
    pub pass: bool,
    pub error: Option<String>,
    pub report: Option<CorrespondenceReport>,
}

impl ScanResult {
    fn from_outcome(index: usize, point: Vec<f64>, outcome: Result<CorrespondenceReport>) -> Self {
        match outcome {
            Ok(r) => ScanResult {
                index,
                point,
                max_deviation: Some(r.max_deviation),
                max_drift: Some(r.max_drift()),
                pass: r.pass,
                error: None,
                report: Some(r),
            },
            Err(e) => ScanResult {
                index,
                point,
                max_deviation: None,
                max_drift: None,
                pass: false,
                error: Some(e.to_string()),
                report: None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub points: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub max_deviation: f64,
    pub max_drift: f64,
    pub pass: bool,
}

impl ScanSummary {
    fn of(results: &[ScanResult]) -> Self {
        let errors = results.iter().filter(|r| r.error.is_some()).count();
        let passed = results.iter().filter(|r| r.pass).count();
        let fold = |f: fn(&ScanResult) -> Option<f64>| results.iter().filter_map(f).fold(0.0, f64::max);
        ScanSummary {
            points: results.len(),
            passed,
            failed: results.len() - passed - errors,
            errors,
            max_deviation: fold(|r| r.max_deviation),
            max_drift: fold(|r| r.max_drift),
            pass: !results.is_empty() && passed == results.len(),
        }
    }
}

/// Report envelope shared by `verify` and `scan`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub map_id: String,
    pub params: Params,
    pub grid: GridSpec,
    /// 1-based.
    pub time_index: usize,
    pub t0: f64,
    pub t1: f64,
    pub results: Vec<ScanResult>,
    pub summary: ScanSummary,
}

impl ScanReport {
    /// Wraps a single correspondence report as a one-point scan.
    pub fn single(report: CorrespondenceReport) -> Self {
        let ti = report.time_index - 1;
        let point: Vec<f64> = report.samples[0]
            .source
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != ti)
            .map(|(_, v)| *v)
            .collect();
        let results = vec![ScanResult::from_outcome(0, point.clone(), Ok(report.clone()))];
        ScanReport {
            map_id: report.map_id,
            params: report.params,
            grid: GridSpec::single(&point),
            time_index: report.time_index,
            t0: report.t0,
            t1: report.t1,
            summary: ScanSummary::of(&results),
            results,
        }
    }
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|n| *n > 0)
}

/// Runs [`verify_correspondence`] at every grid point in parallel.
///
/// Per-point failures are recorded in the results; results keep grid order.
pub fn conservation_scan(
    map_id: &str,
    params: &Params,
    grid: &GridSpec,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    opts: &VerifyOptions,
) -> Result<ScanReport> {
    let entry = catalog_map(map_id, params, &opts.catalog)?;
    let (flow, constrained) = entry_flow(&entry, opts.time_index)?;
    if grid.axes.len() + 1 != entry.dim() {
        return Err(Error::Dimension {
            expected: entry.dim() - 1,
            got: grid.axes.len(),
        });
    }
    let ti = flow.time_index();
    let points = grid.points();
    let run = || -> Vec<ScanResult> {
        points
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let outcome = complete_source(p, entry.dim(), ti, t0)
                    .and_then(|x| verify_flow_correspondence(&flow, constrained, &x, t0, t1, cfg, opts))
                    .map(|mut r| {
                        r.map_id = entry.id.clone();
                        r.params = entry.params.clone();
                        r
                    });
                ScanResult::from_outcome(i, p.clone(), outcome)
            })
            .collect()
    };
    let results = match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("{THREADS_ENV}: {e}")))?
            .install(run),
        None => run(),
    };
    Ok(ScanReport {
        map_id: entry.id.clone(),
        params: entry.params.clone(),
        grid: grid.clone(),
        time_index: ti + 1,
        t0,
        t1,
        summary: ScanSummary::of(&results),
        results,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionReport {
    pub map_id: String,
    pub params: Params,
    pub iterations: usize,
    pub x0: Vec<f64>,
    pub step_dets: Vec<f64>,
    pub det_product: f64,
    pub det_composite: f64,
    pub det_rel_error: f64,
    pub det_pass: bool,
    /// Flow check with the closed-form multi-step Hamiltonian, when one exists.
    pub correspondence: Option<CorrespondenceReport>,
    pub pass: bool,
}

fn with_param(params: &Params, key: &str, value: f64) -> Params {
    let mut p = params.clone();
    p.insert(key.into(), value);
    p
}

/// Determinant multiplicativity and multi-step Hamiltonian conservation.
///
/// `iterations` counts applications of the single-step map. For `henon` the
/// `m` parameter is ignored and the step is the plain Hénon map; for
/// `hermite` the steps are `k = 1..=iterations`, i.e. the map through
/// `iterations + 1` points. Flows are checked from `x0` over the time span
/// `[x0_t, t1]` when a closed-form Hamiltonian is known.
pub fn composition_check(
    map_id: &str,
    params: &Params,
    iterations: usize,
    x0: &[f64],
    t1: f64,
    cfg: &IntegratorConfig,
    opts: &VerifyOptions,
) -> Result<CompositionReport> {
    if iterations == 0 {
        return Err(Error::InvalidParameter("composition needs at least one iteration".into()));
    }
    let (steps, composite, entry): (Vec<MapDescriptor>, MapDescriptor, Option<CatalogEntry>) = match map_id {
        "henon" => {
            let e = catalog_map(map_id, &with_param(params, "m", iterations as f64), &opts.catalog)?;
            let base = henon(e.params["b"], e.params["c"])?;
            (vec![base; iterations], e.map.clone(), Some(e))
        }
        "hermite" => {
            let e = catalog_map(map_id, &with_param(params, "m", (iterations + 1) as f64), &opts.catalog)?;
            ((1..=iterations).map(hermite_step_map).collect(), e.map.clone(), Some(e))
        }
        _ => {
            let e = catalog_map(map_id, params, &opts.catalog)?;
            (vec![e.map.clone(); iterations], compose(&e.map, iterations)?, None)
        }
    };
    let step_dets = step_determinants(&steps, x0)?;
    let det_product: f64 = step_dets.iter().product();
    let det_composite = composite.det_jacobian(x0)?;
    let det_rel_error = (det_composite - det_product).abs() / (1.0 + det_product.abs());
    let det_pass = det_rel_error <= DET_PRODUCT_TOL;

    let correspondence = match &entry {
        Some(e) if e.hamiltonians.is_some() => {
            let (flow, constrained) = entry_flow(e, None)?;
            let t0 = x0[flow.time_index()];
            let mut r = verify_flow_correspondence(&flow, constrained, x0, t0, t1, cfg, opts)?;
            r.map_id = e.id.clone();
            r.params = e.params.clone();
            Some(r)
        }
        _ => None,
    };
    let pass = det_pass && correspondence.as_ref().is_none_or(|r| r.pass);
    Ok(CompositionReport {
        map_id: map_id.to_string(),
        params: entry.as_ref().map_or_else(|| params.clone(), |e| e.params.clone()),
        iterations,
        x0: x0.to_vec(),
        step_dets,
        det_product,
        det_composite,
        det_rel_error,
        det_pass,
        correspondence,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;
    use crate::maps::catalog_entry;

    fn params(kv: &[(&str, f64)]) -> Params {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn henon_flow_matches_map() {
        let r = verify_correspondence(
            "henon",
            &params(&[("b", 1.0), ("c", 0.0)]),
            &[1.0],
            0.0,
            2.0,
            &IntegratorConfig::default(),
            &VerifyOptions::default(),
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.samples.len(), 21);
        let end = &r.samples.last().unwrap().flow;
        assert!((end[0] - 2.0).abs() < 1e-8 && (end[1] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn wrong_hamiltonian_fails() {
        let e = catalog_entry("henon", &[]).unwrap();
        let bad = ScalarField::new("X^2", 2, |v| Ok(v[0].square()));
        let flow = e.flow(None).unwrap().with_hamiltonians(vec![bad]).unwrap();
        let r = verify_flow_correspondence(
            &flow,
            false,
            &[1.0, 0.0],
            0.0,
            2.0,
            &IntegratorConfig::default(),
            &VerifyOptions::default(),
        )
        .unwrap();
        assert!(!r.pass && r.max_deviation > 1e-3);
    }

    #[test]
    fn kdv3_flow_matches_map() {
        let r = verify_correspondence(
            "kdv3",
            &Params::new(),
            &[1.1, 0.9],
            1.0,
            2.0,
            &IntegratorConfig::default(),
            &VerifyOptions::default(),
        )
        .unwrap();
        assert!(r.pass && r.max_deviation < 1e-6, "{}", r.max_deviation);
    }

    #[test]
    fn hermite_two_point_follows_source_curve() {
        let c = 0.7;
        let x0 = [c * 0.25, 0.5];
        let r = verify_correspondence(
            "hermite",
            &params(&[("m", 2.0)]),
            &x0,
            0.5,
            2.0,
            &IntegratorConfig::default(),
            &VerifyOptions::default(),
        )
        .unwrap();
        assert!(r.pass, "{} {:?}", r.max_deviation, r.drifts);
        for s in &r.samples {
            assert!((s.source[0] - c * s.t * s.t).abs() < 1e-7);
        }
    }

    #[test]
    fn grid_points_in_order() {
        let g = GridSpec::new(vec!["0:1:3".parse().unwrap(), "5:6:2".parse().unwrap()]);
        let p = g.points();
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0.0, 5.0]);
        assert_eq!(p[1], vec![0.0, 6.0]);
        assert_eq!(p[5], vec![1.0, 6.0]);
        assert!("1:2".parse::<GridAxis>().is_err());
        assert!("1:2:0".parse::<GridAxis>().is_err());
    }

    #[test]
    fn single_point_scan_equals_verify() {
        let cfg = IntegratorConfig::default();
        let opts = VerifyOptions::default();
        let p = Params::new();
        let scan = conservation_scan("kdv3", &p, &GridSpec::single(&[1.1, 0.9]), 1.0, 2.0, &cfg, &opts).unwrap();
        let direct = verify_correspondence("kdv3", &p, &[1.1, 0.9], 1.0, 2.0, &cfg, &opts).unwrap();
        assert_eq!(scan.results[0].report.as_ref(), Some(&direct));
        assert_eq!(ScanReport::single(direct), scan);
    }

    #[test]
    fn scan_records_point_errors() {
        // x = 1 sends the second Hermite iterate through y = 0 at t0 = 1.
        let g = GridSpec::new(vec!["0.5:1.5:3".parse().unwrap()]);
        let r = conservation_scan(
            "hermite",
            &params(&[("m", 3.0)]),
            &g,
            1.0,
            1.2,
            &IntegratorConfig::default(),
            &VerifyOptions::default(),
        )
        .unwrap();
        assert_eq!(r.results.len(), 3);
        assert!(r.results.iter().enumerate().all(|(i, x)| x.index == i));
        assert!(r.results[1].error.is_some());
        assert!(r.results[0].error.is_none() && r.results[2].error.is_none());
        assert_eq!(r.summary.errors, 1);
        assert!(!r.summary.pass);
    }

    #[test]
    fn single_iteration_composition() {
        let r = composition_check(
            "henon",
            &Params::new(),
            1,
            &[0.2, 0.1],
            1.0,
            &IntegratorConfig::default(),
            &VerifyOptions::default(),
        )
        .unwrap();
        assert!(r.pass);
        assert_eq!(r.step_dets, vec![1.0]);
        assert!(r.correspondence.is_some());
    }

    #[test]
    fn henon_three_iterations_conserve() {
        let r = composition_check(
            "henon",
            &params(&[("b", 1.0), ("c", 0.0)]),
            2,
            &[0.3, -0.2],
            0.8,
            &IntegratorConfig::default(),
            &VerifyOptions::default(),
        )
        .unwrap();
        let c = r.correspondence.unwrap();
        assert!(c.pass && c.max_drift() < 1e-7, "{:?}", c.drifts);
    }
}
