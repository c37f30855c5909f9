use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use raylab_core::{ArcId, Digraph, DigraphBuilder, Orientation, RayLabel, RaySpec, VertexId};

fn random_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..=10).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..18)))
}

fn build(n: usize, arcs: &[(usize, usize)]) -> Digraph {
    let mut b = DigraphBuilder::new();
    let vs: Vec<_> = (0..n).map(|_| b.add_vertex()).collect();
    for &(x, y) in arcs {
        if x != y {
            b.add_arc(vs[x], vs[y]).unwrap();
        }
    }
    b.freeze()
}

/// Every simple path of the underlying multigraph, straight from the arc
/// list.
fn naive_paths(d: &Digraph, u: VertexId, v: VertexId) -> BTreeSet<(Vec<VertexId>, Vec<ArcId>)> {
    let mut out = BTreeSet::new();
    let mut stack = vec![(vec![u], Vec::<ArcId>::new())];
    while let Some((vs, arcs)) = stack.pop() {
        let cur = *vs.last().unwrap();
        if cur == v {
            out.insert((vs, arcs));
            continue;
        }
        for (i, a) in d.arcs().iter().enumerate() {
            for (from, to) in [(a.tail, a.head), (a.head, a.tail)] {
                if from == cur && !vs.contains(&to) {
                    let mut nv = vs.clone();
                    nv.push(to);
                    let mut na = arcs.clone();
                    na.push(ArcId(i));
                    stack.push((nv, na));
                }
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn path_enumeration_matches_naive_search((n, arcs) in random_graph(), a in 0usize..10, b in 0usize..10) {
        let d = build(n, &arcs);
        let (u, v) = (VertexId(a % n), VertexId(b % n));
        let got: BTreeSet<_> = d.enumerate_paths(u, v, 1_000_000).unwrap().into_iter().map(|e| (e.vertices, e.arcs)).collect();
        prop_assert_eq!(got, naive_paths(&d, u, v));
    }

    #[test]
    fn distances_are_a_metric((n, arcs) in random_graph()) {
        let d = build(n, &arcs);
        let vs: Vec<_> = d.vertices().collect();
        for &x in &vs {
            for &y in &vs {
                prop_assert_eq!(d.underlying_distance(x, y), d.underlying_distance(y, x));
                for &z in &vs {
                    if let (Some(xy), Some(yz), Some(xz)) = (d.underlying_distance(x, y), d.underlying_distance(y, z), d.underlying_distance(x, z)) {
                        prop_assert!(xz <= xy + yz);
                    }
                }
            }
        }
    }

    #[test]
    fn identifications_keep_arcs_and_partition_ids(len in 2usize..8, picks in prop::collection::vec((0usize..6, 0usize..9, 0usize..6, 0usize..9), 0..6)) {
        let spec = RaySpec::periodic(&[1, 2], Orientation::Out);
        let labels: Vec<RayLabel> = (0..3).flat_map(|m| (0..=m).map(move |n| RayLabel::new(n, m))).collect();
        let mut b = DigraphBuilder::new();
        for &l in &labels {
            b.add_ray_prefix(l, &spec, len).unwrap();
        }
        let before = b.freeze().arc_count();
        for (l0, p0, l1, p1) in picks {
            let u = b.ray_vertex(labels[l0], p0 % (len + 1)).unwrap();
            let v = b.ray_vertex(labels[l1], p1 % (len + 1)).unwrap();
            if u != v {
                b.identify(u, v).unwrap();
            }
        }
        let d = b.freeze();
        prop_assert_eq!(d.arc_count(), before);
        let keys: BTreeSet<(RayLabel, usize)> = d.arcs().iter().filter_map(|a| a.label.map(|l| (l, a.arc_index))).collect();
        prop_assert_eq!(keys.len(), d.arc_count());

        let mut owner: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        for v in d.vertices() {
            for &a in d.aliases(v) {
                prop_assert!(owner.insert(a, v).is_none(), "{} listed twice", a);
            }
        }
        prop_assert_eq!(owner.len(), d.id_bound());
        for (a, v) in owner {
            prop_assert_eq!(d.resolve(a), v);
        }
    }

    #[test]
    fn traced_embeddings_reproduce_the_pattern((n, arcs) in random_graph(), len in 1usize..6, period in prop::collection::vec(1usize..3, 1..3)) {
        let d = build(n, &arcs);
        let spec = RaySpec::periodic(&period, Orientation::Out);
        for v in d.vertices() {
            for e in d.trace_pattern(v, &spec, len, 100_000).unwrap() {
                prop_assert!(d.is_valid_embedding(&e));
                prop_assert_eq!(e.orientations(), spec.orientations(len));
                prop_assert_eq!(e.first(), v);
            }
        }
    }
}

#[test]
fn gadget_embedding_count_matches_hand_count() {
    // two out-dipaths a0->a1->a2 and b0->b1->b2 glued at the middle: four
    // directed 2-arc paths through the merged vertex, none elsewhere
    let mut b = DigraphBuilder::new();
    let a = b.add_ray_prefix(RayLabel::new(0, 0), &RaySpec::all_out(), 2).unwrap();
    b.add_ray_prefix(RayLabel::new(0, 1), &RaySpec::all_out(), 2).unwrap();
    let x = b.ray_vertex(RayLabel::new(0, 0), 1).unwrap();
    let y = b.ray_vertex(RayLabel::new(0, 1), 1).unwrap();
    b.identify(x, y).unwrap();
    let d = b.freeze();
    let total: usize = d.vertices().map(|v| d.trace_pattern(v, &RaySpec::all_out(), 2, 100).unwrap().len()).sum();
    assert_eq!(total, 4);
    assert_eq!(d.trace_pattern(a, &RaySpec::all_out(), 2, 100).unwrap().len(), 2);
}
