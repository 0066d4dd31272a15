//! Benchmark fixtures.

use atb_core::experiments::{sharp_transition_d0, table_config, unit_square_d0};
use atb_core::sources::build_sharp_transition;
use atb_core::tree::greedy_grow;
use atb_core::{
    ApproxConfig, BisectionTree, FunctionSource, PixelGrid, RefineConfig, StopRule, Triangle,
};

/// The sharp transition source with its initial triangles.
pub fn sharp(delta: f64) -> (FunctionSource, Vec<Triangle>) {
    let f = build_sharp_transition(delta).expect("positive delta");
    (f, sharp_transition_d0())
}

/// A synthetic image: a bright disk with a soft linear ramp behind it.
pub fn disk_image(size: usize) -> PixelGrid {
    let s = size as f64;
    PixelGrid::from_fn(size, size, |i, j| {
        let (x, y) = ((i as f64 + 0.5) / s, (j as f64 + 0.5) / s);
        let r = ((x - 0.45).powi(2) + (y - 0.55).powi(2)).sqrt();
        if r < 0.3 {
            0.85
        } else {
            0.2 + 0.3 * x
        }
    })
}

pub fn image_source(size: usize) -> (FunctionSource, Vec<Triangle>) {
    (
        FunctionSource::pixel_grid(disk_image(size)),
        unit_square_d0(),
    )
}

/// Greedy tree with `leaves` leaves on the sharp transition.
pub fn sharp_tree(delta: f64, leaves: usize) -> (FunctionSource, BisectionTree, ApproxConfig) {
    let (f, d0) = sharp(delta);
    let acfg = table_config();
    let tree = greedy_grow(
        &f,
        &d0,
        &acfg,
        &RefineConfig::default(),
        StopRule::MaxLeaves(leaves),
    )
    .expect("valid configuration");
    (f, tree, acfg)
}
