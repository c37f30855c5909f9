use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;
use raylab_core::instances::{packing_instance, random_flow_instance, OverlapKind};
use raylab_core::oracle::{brute_max_disjoint_dipaths, SearchBudget};
use raylab_core::packing::{cut_separates, extend_family, pack_out_rays, vertex_disjoint_dipaths_in, FamilyState};
use raylab_core::{Digraph, VertexId};

fn kind(k: u8) -> OverlapKind {
    match k % 3 {
        0 => OverlapKind::Disjoint,
        1 => OverlapKind::Star,
        _ => OverlapKind::Chained,
    }
}

/// Largest number of disjoint out-dipaths with at least `min_len` arcs
/// starting in `x`, by exhaustive search.
fn brute_out_paths(d: &Digraph, x: &BTreeSet<VertexId>, min_len: usize) -> usize {
    let mut paths: Vec<BTreeSet<VertexId>> = Vec::new();
    for &s in x {
        let mut stack = vec![vec![s]];
        while let Some(p) = stack.pop() {
            if p.len() == min_len + 1 {
                paths.push(p.iter().copied().collect());
                continue;
            }
            for &a in d.out_arcs(*p.last().unwrap()) {
                let h = d.arc(a).head;
                if !p.contains(&h) {
                    let mut q = p.clone();
                    q.push(h);
                    stack.push(q);
                }
            }
        }
    }
    fn best(paths: &[BTreeSet<VertexId>], from: usize, used: &mut HashSet<VertexId>) -> usize {
        let mut top = 0;
        for i in from..paths.len() {
            if paths[i].iter().all(|v| !used.contains(v)) {
                used.extend(paths[i].iter().copied());
                top = top.max(1 + best(paths, i + 1, used));
                for v in &paths[i] {
                    used.remove(v);
                }
            }
        }
        top
    }
    best(&paths, 0, &mut HashSet::new())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn menger_paths_and_cut_agree(seed in any::<u64>(), n in 3usize..=12, acyclic in any::<bool>()) {
        let inst = random_flow_instance(seed, n, 0.25, acyclic);
        let r = vertex_disjoint_dipaths_in(&inst.arcs, &inst.sources, &inst.sinks);
        prop_assert_eq!(r.paths.len(), r.cut.len());
        prop_assert!(cut_separates(&inst.arcs, &inst.sources, &inst.sinks, &r.cut));
        let arcs: HashSet<(VertexId, VertexId)> = inst.arcs.iter().copied().collect();
        let mut seen = HashSet::new();
        for p in &r.paths {
            prop_assert!(inst.sources.contains(&p[0]));
            prop_assert!(inst.sinks.contains(p.last().unwrap()));
            for w in p.windows(2) {
                prop_assert!(arcs.contains(&(w[0], w[1])));
            }
            for v in p {
                prop_assert!(seen.insert(*v));
            }
        }
        let brute = brute_max_disjoint_dipaths(&inst.arcs, &inst.sources, &inst.sinks, SearchBudget::default()).unwrap();
        prop_assert_eq!(r.paths.len(), brute);
    }

    #[test]
    fn every_level_keeps_the_family_invariants(seed in 0u64..1000, k in 0u8..3, n in 1usize..=5) {
        let sizes: Vec<usize> = (0..8).map(|i| 8 + 10 * i).collect();
        let inst = packing_instance(seed, kind(k), &sizes, 40);
        let d = &inst.digraph;
        let mut state = FamilyState::default();
        while state.level() < n {
            let l = state.level();
            let demand = if l == 0 { 1 } else { state.prefix_union().len() + l * l + 1 };
            let Some(layer) = inst.tribe.layers.iter().find(|layer| layer.len() >= demand) else { break };
            let (next, trace) = match extend_family(&state, layer, d) {
                Ok(x) => x,
                Err(e) => { prop_assert!(false, "level {}: {}", l, e); unreachable!() }
            };
            prop_assert!(trace.survivors_guard());
            prop_assert!(trace.remaining_guard());
            let mut seen = HashSet::new();
            for (k, r) in next.rays.iter().enumerate() {
                prop_assert!(inst.starts.contains(&r[0]));
                prop_assert!(d.dipath(r).is_ok());
                for v in r {
                    prop_assert!(seen.insert(*v));
                }
                if k < l {
                    let old = state.markers[k];
                    prop_assert!(next.markers[k] > old);
                    prop_assert_eq!(&next.rays[k][..=old], &state.rays[k][..=old]);
                }
            }
            state = next;
        }
    }

    #[test]
    fn small_packings_agree_with_exhaustive_search(seed in any::<u64>(), k in 0u8..3) {
        let inst = packing_instance(seed, kind(k), &[1, 3], 2);
        let live: BTreeSet<VertexId> = inst.tribe.members().flat_map(|e| e.vertices.clone()).collect();
        prop_assert!(live.len() <= 14);
        for n in 1..=2 {
            if let Ok(p) = pack_out_rays(&inst.digraph, &inst.tribe, &inst.starts, n, 2) {
                prop_assert_eq!(p.rays.len(), n);
                prop_assert!(brute_out_paths(&inst.digraph, &inst.starts, 2) >= n);
            }
        }
    }
}
