//! Catalog of example maps with closed-form Hamiltonians.
//!
//! Entries are addressed by string id: `hermite`, `henon`, `kdv3`, `kdv2`,
//! `qp4` and `chain1d-henon`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::chain1d::chain1d_henon_map;
use crate::error::{check_dim, Error, Result};
use crate::field::{ScalarField, StateVector};
use crate::flows::{build_hamiltonians, BuildOptions, DetPolicy, FlowSystem};
use crate::map::{compose, MapDescriptor, Params};
use crate::sampling::{SampleBox, DEFAULT_SEED};

pub mod henon;
pub mod hermite;
pub mod kdv;
pub mod poly;
pub mod qp4;

pub use henon::{henon, henon_hamiltonian, henon_solution_family};
pub use hermite::{
    hermite, hermite_checks, hermite_constraint_constant, hermite_continued_fraction, hermite_det_formula,
    hermite_hamiltonian, hermite_polynomials, hermite_source_constraint, hermite_step, hermite_step_map,
    HermiteReport, HermiteRow,
};
pub use kdv::{
    kdv2, kdv2_det_formula, kdv2_dx_dy, kdv2_hamiltonian, kdv2_image_velocity, kdv2_source_hamiltonian, kdv3,
    kdv3_display_rhs, kdv3_flow, kdv3_relations, KdvInvariants,
};
pub use poly::ExactPolynomial;
pub use qp4::{
    qp4, qp4_display_rhs, qp4_flow, qp4_invariants, qp4_normalization_oracle, NormalizationReport, Qp4Normalization,
};

pub const CATALOG_IDS: [&str; 6] = ["hermite", "henon", "kdv3", "kdv2", "qp4", "chain1d-henon"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    /// Integer parameters must hold whole numbers `>= min`.
    pub integer: bool,
    pub min: Option<f64>,
    pub description: &'static str,
}

const fn real(name: &'static str, default: f64, description: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        default,
        integer: false,
        min: None,
        description,
    }
}

const fn count(name: &'static str, default: f64, min: f64, description: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        default,
        integer: true,
        min: Some(min),
        description,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogInfo {
    pub id: &'static str,
    pub dim: usize,
    /// 1-based default time coordinate.
    pub time_index: usize,
    pub source_constrained: bool,
    pub params: Vec<ParamSpec>,
    pub description: &'static str,
}

/// Static description of every catalog map.
pub fn catalog() -> Vec<CatalogInfo> {
    CATALOG_IDS.iter().map(|id| info(id).expect("catalog id")).collect()
}

pub fn info(id: &str) -> Result<CatalogInfo> {
    let i = match id {
        "hermite" => CatalogInfo {
            id: "hermite",
            dim: 2,
            time_index: 2,
            source_constrained: true,
            params: vec![count("m", 2.0, 2.0, "number of orbit points (m - 1 recurrence steps)")],
            description: "Hermite ratio map (x, y) -> (x, x - k/y), k = 1..m-1",
        },
        "henon" => CatalogInfo {
            id: "henon",
            dim: 2,
            time_index: 2,
            source_constrained: false,
            params: vec![
                real("b", 1.0, "Jacobian determinant, nonzero"),
                real("c", 0.0, "additive constant"),
                count("m", 1.0, 1.0, "number of iterations composed"),
            ],
            description: "Henon map (x, y) -> (y, y^2 - b x + c), iterated m times",
        },
        "kdv3" => CatalogInfo {
            id: "kdv3",
            dim: 3,
            time_index: 3,
            source_constrained: false,
            params: vec![],
            description: "three-point periodic discrete KdV map",
        },
        "kdv2" => CatalogInfo {
            id: "kdv2",
            dim: 2,
            time_index: 2,
            source_constrained: true,
            params: vec![real("r", 2.0, "conserved product xyz, nonzero")],
            description: "KdV map reduced to the surface xyz = r",
        },
        "qp4" => CatalogInfo {
            id: "qp4",
            dim: 3,
            time_index: 3,
            source_constrained: false,
            params: vec![
                real("a", 1.0, "nonzero constant"),
                real("b", 1.0, "nonzero constant"),
                real("c", 1.0, "nonzero constant"),
            ],
            description: "q-difference Painleve IV map, det J = (abc)^2",
        },
        "chain1d-henon" => CatalogInfo {
            id: "chain1d-henon",
            dim: 2,
            time_index: 2,
            source_constrained: false,
            params: vec![
                count("m", 2.0, 2.0, "chain length"),
                real("a", 0.0, "boundary value q_{m+1}"),
                real("c", 0.0, "constant in alpha(q) = q^2 + 2q + c"),
            ],
            description: "three-term chain q_k = alpha(q_{k+1}) - q_{k+2} as the map (q_0, q_1) -> (q_{m-1}, q_m)",
        },
        other => return Err(Error::UnknownMap(other.to_string())),
    };
    Ok(i)
}

/// Fills defaults and validates `given` against the schema of `id`.
pub fn resolve_params(id: &str, given: &Params) -> Result<Params> {
    let info = info(id)?;
    if let Some(unknown) = given.keys().find(|k| !info.params.iter().any(|p| p.name == k.as_str())) {
        let known: Vec<_> = info.params.iter().map(|p| p.name).collect();
        return Err(Error::InvalidParameter(format!(
            "unknown parameter `{unknown}` for {id} (known: {})",
            if known.is_empty() { "none".to_string() } else { known.join(", ") }
        )));
    }
    let mut out = Params::new();
    for p in &info.params {
        let v = given.get(p.name).copied().unwrap_or(p.default);
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{} must be finite", p.name)));
        }
        if p.integer && v.fract() != 0.0 {
            return Err(Error::InvalidParameter(format!("{} must be an integer, got {v}", p.name)));
        }
        if let Some(min) = p.min {
            if v < min {
                return Err(Error::InvalidParameter(format!("{} must be >= {min}, got {v}", p.name)));
            }
        }
        out.insert(p.name.to_string(), v);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CatalogOptions {
    pub normalization: Option<Qp4Normalization>,
}

type DetFormula = dyn Fn(&[f64]) -> Result<f64> + Send + Sync;

/// A resolved catalog map with its flow data.
#[derive(Clone)]
pub struct CatalogEntry {
    pub id: String,
    pub params: Params,
    pub map: MapDescriptor,
    /// 0-based default time coordinate.
    pub time_index: usize,
    /// Closed-form Hamiltonians for the default time coordinate, when known.
    pub hamiltonians: Option<Vec<ScalarField>>,
    /// `det J` depends on the time coordinate; the source point must follow
    /// the source curve for the flow to reproduce the map.
    pub source_constrained: bool,
    /// Lower limit of the numeric Hamiltonian integral.
    pub ref_point: StateVector,
    pub sample_box: SampleBox,
    det_formula: Option<Arc<DetFormula>>,
}

impl fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("id", &self.id)
            .field("params", &self.params)
            .field("time_index", &self.time_index)
            .field("source_constrained", &self.source_constrained)
            .finish()
    }
}

impl CatalogEntry {
    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    /// Closed-form `det J`, if the entry has one.
    pub fn det_formula(&self, x: &[f64]) -> Option<Result<f64>> {
        self.det_formula.as_ref().map(|f| f(x))
    }

    pub fn samples(&self, count: usize, seed: u64) -> Vec<StateVector> {
        self.sample_box.sample(count, seed)
    }

    /// Flow for `time_index` (0-based, default the entry's own).
    ///
    /// Closed forms are used for the default time coordinate; otherwise the
    /// Hamiltonians are built numerically.
    pub fn flow(&self, time_index: Option<usize>) -> Result<FlowSystem> {
        let t = time_index.unwrap_or(self.time_index);
        if t >= self.dim() {
            return Err(Error::Index(format!("time index {} for dimension {}", t + 1, self.dim())));
        }
        if t == self.time_index {
            if let Some(h) = &self.hamiltonians {
                return FlowSystem::new(self.map.clone(), t, h.clone());
            }
        }
        self.numeric_flow(Some(t))
    }

    /// Flow with Hamiltonians from quadrature of `det J`.
    pub fn numeric_flow(&self, time_index: Option<usize>) -> Result<FlowSystem> {
        let t = time_index.unwrap_or(self.time_index);
        let policy = if self.source_constrained && t == self.time_index {
            DetPolicy::SourceConstrained
        } else {
            DetPolicy::Require
        };
        let opts = BuildOptions {
            time_index: Some(t),
            policy,
            samples: Some(self.samples(16, DEFAULT_SEED)),
            ..Default::default()
        };
        build_hamiltonians(&self.map, &self.ref_point, &opts)
    }
}

fn coordinate_hamiltonian(map: &MapDescriptor, j: usize, scale: f64, name: &str) -> ScalarField {
    let inv = map.clone();
    ScalarField::new(name, map.dim(), move |v| Ok(inv.inverse_jet(v)?.swap_remove(j).scale(scale)))
}

fn as_count(p: &Params, name: &str) -> usize {
    p[name] as usize
}

/// Resolves `id` with `params` into a ready-to-use entry.
pub fn catalog_map(id: &str, params: &Params, opts: &CatalogOptions) -> Result<CatalogEntry> {
    let p = resolve_params(id, params)?;
    let ones = |n: usize| StateVector::new(vec![1.0; n]).expect("finite");
    let entry = match id {
        "hermite" => {
            let m = as_count(&p, "m");
            let map = hermite(m)?;
            let hamiltonians = match m {
                2 | 3 => Some(vec![hermite_hamiltonian(m)?]),
                _ => None,
            };
            // x = 0 makes the quadrature of det J = 1/y^2 vanish identically;
            // longer chains have a pole at xy = 1 and start inside the box.
            let ref_point = if m == 2 { crate::state![0.0, 1.0] } else { crate::state![5.0, 1.0] };
            CatalogEntry {
                id: id.into(),
                params: p,
                map,
                time_index: 1,
                hamiltonians,
                source_constrained: true,
                ref_point,
                sample_box: SampleBox(vec![(4.0, 6.0), (0.8, 2.0)]),
                det_formula: Some(Arc::new(move |x: &[f64]| hermite_det_formula(m, x[0], x[1]))),
            }
        }
        "henon" => {
            let (b, c, m) = (p["b"], p["c"], as_count(&p, "m"));
            let map = compose(&henon(b, c)?, m)?;
            let hamiltonians = if m <= 3 { Some(vec![henon_hamiltonian(m + 1, b, c)?]) } else { None };
            let det = b.powi(m as i32);
            CatalogEntry {
                id: id.into(),
                params: p,
                map,
                time_index: 1,
                hamiltonians,
                source_constrained: false,
                ref_point: ones(2),
                sample_box: SampleBox(vec![(-0.5, 0.5); 2]),
                det_formula: Some(Arc::new(move |_: &[f64]| Ok(det))),
            }
        }
        "kdv3" => {
            let flow = kdv3_flow()?;
            CatalogEntry {
                id: id.into(),
                params: p,
                map: flow.map().clone(),
                time_index: 2,
                hamiltonians: Some(flow.hamiltonians().to_vec()),
                source_constrained: false,
                ref_point: ones(3),
                sample_box: SampleBox::unit(3),
                det_formula: Some(Arc::new(|_: &[f64]| Ok(1.0))),
            }
        }
        "kdv2" => {
            let r = p["r"];
            CatalogEntry {
                id: id.into(),
                params: p,
                map: kdv2(r)?,
                time_index: 1,
                hamiltonians: Some(vec![kdv2_hamiltonian(r)?]),
                source_constrained: true,
                ref_point: ones(2),
                sample_box: SampleBox::unit(2),
                det_formula: Some(Arc::new(move |x: &[f64]| kdv2_det_formula(r, x[0], x[1]))),
            }
        }
        "qp4" => {
            let (a, b, c) = (p["a"], p["b"], p["c"]);
            let flow = qp4_flow(a, b, c, opts.normalization)?;
            let q2 = (a * b * c).powi(2);
            CatalogEntry {
                id: id.into(),
                params: p,
                map: flow.map().clone(),
                time_index: 2,
                hamiltonians: Some(flow.hamiltonians().to_vec()),
                source_constrained: false,
                ref_point: ones(3),
                sample_box: SampleBox::unit(3),
                det_formula: Some(Arc::new(move |_: &[f64]| Ok(q2))),
            }
        }
        "chain1d-henon" => {
            let (m, c) = (as_count(&p, "m"), p["c"]);
            let map = chain1d_henon_map(m, c)?;
            let h = coordinate_hamiltonian(&map, 0, 1.0, "q0(X)");
            CatalogEntry {
                id: id.into(),
                params: p,
                map,
                time_index: 1,
                hamiltonians: Some(vec![h]),
                source_constrained: false,
                ref_point: ones(2),
                sample_box: SampleBox(vec![(-1.5, -0.5); 2]),
                det_formula: Some(Arc::new(|_: &[f64]| Ok(1.0))),
            }
        }
        other => return Err(Error::UnknownMap(other.to_string())),
    };
    check_dim(entry.map.dim(), entry.ref_point.dim())?;
    Ok(entry)
}

/// Shorthand for [`catalog_map`] with default options.
pub fn catalog_entry(id: &str, params: &[(&str, f64)]) -> Result<CatalogEntry> {
    let p: Params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    catalog_map(id, &p, &CatalogOptions::default())
}
