use proptest::prelude::*;
use raylab_core::instances::overlapping_tribe;
use raylab_core::tribe::{forked_subtribe, forked_subtribe_with_limit, TribeError};
use raylab_core::{Embedding, Orientation, RaySpec, Tribe};

fn pattern() -> RaySpec {
    RaySpec::all_out().with_prefix(&[Orientation::In, Orientation::Out])
}

/// Adds `extra` fresh members to every layer, disjoint from everything.
fn enlarge(t: &Tribe, extra: usize, len: usize) -> Tribe {
    use raylab_core::DigraphBuilder;
    let mut b = DigraphBuilder::new();
    let base = t.members().flat_map(|e| e.vertices.iter().map(|v| v.0)).max().unwrap_or(0) + 1;
    for _ in 0..base {
        b.add_vertex();
    }
    let mut layers = t.layers.clone();
    for layer in &mut layers {
        for _ in 0..extra {
            let vs: Vec<_> = (0..=len).map(|_| b.add_vertex()).collect();
            let mut e = Embedding::trivial(vs[0]);
            e.pattern = Some(t.pattern.clone());
            for (k, w) in vs.windows(2).enumerate() {
                e.vertices.push(w[1]);
                e.arcs.push(raylab_core::ArcId(usize::MAX - k));
                e.forward.push(t.pattern.orientation_at(k) == Orientation::Out);
            }
            layer.push(e);
        }
    }
    Tribe::new(t.pattern.clone(), t.hat_len, layers).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn forked_output_is_a_forked_subtribe(seed in any::<u64>(), sizes in prop::collection::vec(6usize..=14, 2..5), share in 0.0f64..0.5, k in 1usize..=3) {
        let (_, t) = overlapping_tribe(seed, &pattern(), 2, &sizes, 6, share);
        if let Ok(f) = forked_subtribe(&t, k) {
            prop_assert!(f.is_forked());
            prop_assert_eq!(f.layer_sizes(), (0..=k).collect::<Vec<_>>());
            prop_assert!(f.is_subtribe_of(&t));
        }
    }

    #[test]
    fn enlarging_layers_keeps_success(seed in any::<u64>(), sizes in prop::collection::vec(6usize..=12, 2..5), share in 0.0f64..0.4, k in 1usize..=3, extra in 1usize..4) {
        let (_, t) = overlapping_tribe(seed, &pattern(), 2, &sizes, 6, share);
        if forked_subtribe_with_limit(&t, k, usize::MAX).is_ok() {
            let bigger = enlarge(&t, extra, 6);
            let r = forked_subtribe_with_limit(&bigger, k, usize::MAX);
            prop_assert!(!matches!(r, Err(TribeError::InsufficientThickness { .. })), "{:?}", r.err());
        }
    }
}

#[test]
fn thick_tribes_always_fork() {
    let mut ok = 0;
    for seed in 0..40 {
        let (_, t) = overlapping_tribe(seed, &pattern(), 2, &[8, 10, 12, 12], 6, 0.3);
        let f = forked_subtribe(&t, 3).unwrap();
        assert!(f.is_forked() && f.is_subtribe_of(&t));
        ok += 1;
    }
    assert_eq!(ok, 40);
}
