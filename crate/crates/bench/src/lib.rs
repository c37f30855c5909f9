//! Benchmark inputs.

use raylab_core::counterexample::build_bounded;
use raylab_core::instances::{packing_instance, random_flow_instance, FlowInstance, OverlapKind, PackingInstance};
use raylab_core::{Digraph, Orientation, RaySpec};

pub fn flow(n: usize) -> FlowInstance {
    random_flow_instance(42, n, 4.0 / n as f64, false)
}

pub fn packing(kind: OverlapKind) -> PackingInstance {
    let sizes: Vec<usize> = (0..10).map(|k| 8 + 10 * k).collect();
    packing_instance(7, kind, &sizes, 60)
}

/// Alternating host with `steps` identifications at `max_m = 3`.
pub fn bounded_host(steps: usize) -> (Digraph, RaySpec) {
    let spec = RaySpec::periodic(&[1], Orientation::Out);
    let (d, _) = build_bounded(&spec, 3, 150, steps).expect("bounded build");
    (d, spec)
}
