//! Shared fixtures for the criterion benchmarks.

use mapflow::maps::catalog_entry;
use mapflow::{CatalogEntry, FlowSystem};

/// A catalog entry with its default flow and the image of a fixed source point.
pub struct Fixture {
    pub entry: CatalogEntry,
    pub flow: FlowSystem,
    pub source: Vec<f64>,
    pub image: Vec<f64>,
}

pub fn fixture(id: &str, source: &[f64]) -> Fixture {
    let entry = catalog_entry(id, &[]).expect("catalog id");
    let flow = entry.flow(None).expect("default flow");
    let image = entry.map.forward(source).expect("point in domain").into_vec();
    Fixture {
        entry,
        flow,
        source: source.to_vec(),
        image,
    }
}
