//! Nambu-Hamiltonian flows built from invertible discrete maps.

pub mod bracket;
pub mod chain1d;
pub mod error;
pub mod field;
pub mod flows;
pub mod harness;
pub mod integrate;
pub mod jet;
pub mod linalg;
pub mod map;
pub mod maps;
pub mod quadrature;
pub mod sampling;

pub use bracket::nambu_bracket;
pub use error::{Error, Result};
pub use field::{grad, ScalarField, StateVector};
pub use flows::{build_hamiltonians, check_det_condition, BuildOptions, DetPolicy, FlowSystem};
pub use integrate::{IntegratorConfig, Method, Trajectory};
pub use jet::Jet;
pub use linalg::SquareMatrix;
pub use map::{compose, MapDescriptor, Params};
pub use maps::{catalog_map, CatalogEntry, CatalogOptions, Qp4Normalization};
pub use harness::{
    composition_check, conservation_scan, verify_correspondence, verify_flow_correspondence, CompositionReport,
    CorrespondenceReport, GridAxis, GridSpec, ScanReport, Tolerances, VerifyOptions,
};
