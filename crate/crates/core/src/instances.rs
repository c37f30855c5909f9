//! Seeded instance generators for tests, benchmarks and `selftest`.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::digraph::{Digraph, DigraphBuilder, Embedding, VertexId};
use crate::ray::{Orientation, RaySpec};
use crate::tribe::Tribe;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A small digraph with a source set and a sink set.
#[derive(Debug, Clone)]
pub struct FlowInstance {
    pub digraph: Digraph,
    pub arcs: Vec<(VertexId, VertexId)>,
    pub sources: Vec<VertexId>,
    pub sinks: Vec<VertexId>,
}

/// Random digraph on `n` vertices; arcs only go from lower to higher ids
/// when `acyclic` is set.
pub fn random_flow_instance(seed: u64, n: usize, density: f64, acyclic: bool) -> FlowInstance {
    let mut r = rng(seed);
    let mut b = DigraphBuilder::new();
    let vs: Vec<VertexId> = (0..n).map(|_| b.add_vertex()).collect();
    let mut arcs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || (acyclic && j < i) {
                continue;
            }
            if r.gen_bool(density) {
                b.add_arc(vs[i], vs[j]).expect("live");
                arcs.push((vs[i], vs[j]));
            }
        }
    }
    let k = r.gen_range(1..=(n / 3).max(1));
    let mut shuffled = vs.clone();
    shuffled.shuffle(&mut r);
    let (sources, sinks) = if acyclic {
        (vs[..k].to_vec(), vs[n - k..].to_vec())
    } else {
        let overlap = r.gen_bool(0.2);
        let sources: Vec<VertexId> = shuffled[..k].to_vec();
        let from = if overlap { k - 1 } else { k };
        (sources, shuffled[from..from + k].to_vec())
    };
    FlowInstance { digraph: b.freeze(), arcs, sources, sinks }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapKind {
    /// Every member of every layer is its own dipath.
    Disjoint,
    /// Two hub vertices lie on a member of every layer.
    Star,
    /// Members of each layer cross several members of the previous layer
    /// and one member of every older layer.
    Chained,
}

/// A tribe of out-dipaths and the start set for packing.
#[derive(Debug, Clone)]
pub struct PackingInstance {
    pub kind: OverlapKind,
    pub digraph: Digraph,
    pub tribe: Tribe,
    pub starts: BTreeSet<VertexId>,
}

fn add_dipath(b: &mut DigraphBuilder, vs: &[VertexId]) {
    for w in vs.windows(2) {
        b.add_arc(w[0], w[1]).expect("live");
    }
}

/// Layers of sizes `sizes`, each member an out-dipath with `len` arcs.
pub fn packing_instance(seed: u64, kind: OverlapKind, sizes: &[usize], len: usize) -> PackingInstance {
    let mut r = rng(seed);
    let mut b = DigraphBuilder::new();
    let mut layers: Vec<Vec<Vec<VertexId>>> = Vec::new();
    let width = sizes.iter().copied().min().unwrap_or(0);
    let (hubs_a, hubs_b): (Vec<VertexId>, Vec<VertexId>) = match kind {
        OverlapKind::Star => (0..width).map(|_| (b.add_vertex(), b.add_vertex())).unzip(),
        _ => (Vec::new(), Vec::new()),
    };
    let half = (len / 2).max(2);
    for (li, &size) in sizes.iter().enumerate() {
        let mut layer = Vec::with_capacity(size);
        for mi in 0..size {
            let mut vs: Vec<VertexId> = (0..=len).map(|_| b.add_vertex()).collect();
            match kind {
                OverlapKind::Disjoint => {}
                OverlapKind::Star => {
                    if mi < width {
                        vs[1 + (li + mi) % (half - 1)] = hubs_a[mi];
                        vs[half + (3 * li + mi) % (half - 1)] = hubs_b[(mi + li) % width];
                    }
                }
                OverlapKind::Chained => {
                    // several crossings into the previous layer, one into each older layer
                    let mut targets: Vec<(usize, usize)> = Vec::new();
                    if li > 0 {
                        let prev = layers[li - 1].len();
                        targets.extend((0..(li + 1).min(4)).map(|t| (li - 1, (mi + t) % prev)));
                        targets.extend((0..li - 1).map(|lj| (lj, (7 * mi + li) % layers[lj].len())));
                    }
                    let slots: Vec<usize> = (2..len - 1).collect();
                    let mut at: Vec<usize> = slots.choose_multiple(&mut r, targets.len()).copied().collect();
                    at.sort_unstable();
                    for (&(lj, k), &pos) in targets.iter().zip(&at) {
                        let v = layers[lj][k][r.gen_range(1..len)];
                        if !layer.iter().any(|m: &Vec<VertexId>| m.contains(&v)) && !vs.contains(&v) {
                            vs[pos] = v;
                        }
                    }
                }
            }
            add_dipath(&mut b, &vs);
            layer.push(vs);
        }
        layers.push(layer);
    }
    let d = b.freeze();
    let emb: Vec<Vec<Embedding>> = layers
        .iter()
        .map(|l| l.iter().map(|vs| d.dipath(vs).expect("member is a dipath")).collect())
        .collect();
    let starts = emb.iter().flatten().map(Embedding::first).collect();
    let tribe = Tribe::new(RaySpec::all_out(), 0, emb).expect("layers are disjoint");
    PackingInstance { kind, digraph: d, tribe, starts }
}

/// Random tribe whose members share vertices across layers; members
/// realize `pattern` for `len` arcs.
pub fn overlapping_tribe(seed: u64, pattern: &RaySpec, hat_len: usize, sizes: &[usize], len: usize, share: f64) -> (Digraph, Tribe) {
    let mut r = rng(seed);
    let mut b = DigraphBuilder::new();
    let pool: Vec<VertexId> = (0..2 * sizes.iter().sum::<usize>().max(1)).map(|_| b.add_vertex()).collect();
    let mut layers = Vec::new();
    for &size in sizes {
        let mut used = BTreeSet::new();
        let mut layer = Vec::new();
        for _ in 0..size {
            let vs: Vec<VertexId> = (0..=len)
                .map(|_| {
                    if r.gen_bool(share) {
                        let v = *pool.choose(&mut r).expect("non-empty pool");
                        if used.insert(v) {
                            return v;
                        }
                    }
                    b.add_vertex()
                })
                .collect();
            for (k, w) in vs.windows(2).enumerate() {
                match pattern.orientation_at(k) {
                    Orientation::Out => b.add_arc(w[0], w[1]),
                    Orientation::In => b.add_arc(w[1], w[0]),
                }
                .expect("live");
            }
            layer.push(vs);
        }
        layers.push(layer);
    }
    let d = b.freeze();
    let emb = layers
        .iter()
        .map(|l| l.iter().map(|vs| d.embed_walk(vs, pattern).expect("member realizes the pattern")).collect())
        .collect();
    let tribe = Tribe::new(pattern.clone(), hat_len, emb).expect("layers are disjoint");
    (d, tribe)
}

/// Random pattern with a known verdict: `0` single-phase tail, `1`
/// periodic tail, `2` growing tail.
pub fn random_spec(r: &mut impl Rng, class: usize) -> RaySpec {
    let o = |r: &mut dyn rand::RngCore| if r.gen_bool(0.5) { Orientation::Out } else { Orientation::In };
    let prefix: Vec<Orientation> = (0..r.gen_range(0..6)).map(|_| o(r)).collect();
    let base = match class {
        0 => {
            if r.gen_bool(0.5) {
                RaySpec::all_out()
            } else {
                RaySpec::all_in()
            }
        }
        1 => {
            let k = r.gen_range(1..5);
            let period: Vec<usize> = (0..k).map(|_| r.gen_range(1..5)).collect();
            RaySpec::periodic(&period, o(r))
        }
        _ => RaySpec::growing(r.gen_range(1..4), r.gen_range(1..3), o(r)),
    };
    base.with_prefix(&prefix)
}

/// `count` seeded patterns cycling through the three classes.
pub fn spec_corpus(seed: u64, count: usize) -> Vec<(usize, RaySpec)> {
    let mut r = rng(seed);
    (0..count).map(|i| (i % 3, random_spec(&mut r, i % 3))).collect()
}
