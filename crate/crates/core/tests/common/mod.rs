#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use fractura::elastic::{Mesh, RectangleSpec, Side};
use fractura::evolution::Scenario;
use fractura::geometry::Segment;
use fractura::scenario::ScenarioConfig;

pub fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn strip_config() -> ScenarioConfig {
    ScenarioConfig::load(&scenarios_dir().join("strip_tearing.json")).expect("shipped scenario parses")
}

pub fn strip() -> Scenario {
    strip_config().build(&scenarios_dir(), 1, None).expect("shipped scenario builds")
}

pub fn unit_square(n: usize, dirichlet: &[Side]) -> Mesh {
    Mesh::rectangle(&RectangleSpec {
        x0: 0.0,
        y0: 0.0,
        x1: 1.0,
        y1: 1.0,
        nx: n,
        ny: n,
        dirichlet: dirichlet.to_vec(),
    })
    .unwrap()
}

/// Unit square whose crack graph is the horizontal midline.
pub fn midline_square(n: usize, dirichlet: &[Side]) -> Arc<Mesh> {
    Arc::new(
        unit_square(n, dirichlet)
            .with_crack_lines(&[Segment::from_coords(0.0, 0.5, 1.0, 0.5).unwrap()], true)
            .unwrap(),
    )
}

pub const ALL_SIDES: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
