use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use raylab_core::instances::random_spec;
use raylab_core::{classify, prefix_isomorphic, Orientation, RaySpec, TailGen};

fn spec_strategy() -> impl Strategy<Value = RaySpec> {
    (0usize..3, any::<u64>()).prop_map(|(class, seed)| random_spec(&mut ChaCha8Rng::seed_from_u64(seed), class))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phases_and_turns_are_dual(spec in spec_strategy(), horizon in 1usize..300) {
        let phases = spec.phases(horizon);
        prop_assert_eq!(spec.turns(horizon).len() + 1, phases.len());
        for w in phases.windows(2) {
            prop_assert_eq!(w[0].end_vertex(), w[1].start_vertex());
            prop_assert_ne!(w[0].orientation, w[1].orientation);
        }
    }

    #[test]
    fn reversal_keeps_the_verdict_variant(spec in spec_strategy()) {
        let r = spec.reverse();
        prop_assert_eq!(classify(&r).variant(), classify(&spec).variant());
        for i in 0..100 {
            prop_assert_eq!(r.orientation_at(i), spec.orientation_at(i).flip());
        }
    }

    #[test]
    fn growing_tails_never_repeat(start in 1usize..5, step in 1usize..4, out in any::<bool>(), pre in prop::collection::vec(any::<bool>(), 0..5)) {
        let first = if out { Orientation::Out } else { Orientation::In };
        let prefix: Vec<Orientation> = pre.iter().map(|&b| if b { Orientation::Out } else { Orientation::In }).collect();
        let spec = RaySpec::growing(start, step, first).with_prefix(&prefix);
        for k1 in 0..30 {
            for k2 in k1 + 1..=30 {
                prop_assert!(!prefix_isomorphic(&spec, k1, &spec, k2, 100), "shifts {} {}", k1, k2);
            }
        }
    }

    #[test]
    fn periodic_tails_repeat_within_two_periods(period in prop::collection::vec(1usize..5, 1..5), out in any::<bool>()) {
        let first = if out { Orientation::Out } else { Orientation::In };
        let spec = RaySpec::periodic(&period, first);
        let TailGen::Periodic { period: p, .. } = &spec.tail else { unreachable!() };
        let bound = 2 * p.iter().sum::<usize>();
        let found = (0..bound).any(|k1| (k1 + 1..=bound).any(|k2| prefix_isomorphic(&spec, k1, &spec, k2, 100)));
        prop_assert!(found);
    }
}

#[test]
fn shift_coherence_is_exhaustive() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for class in 0..3 {
        for _ in 0..4 {
            let spec = random_spec(&mut r, class);
            for k in 0..=200 {
                let t = spec.tail_spec(k);
                for i in 0..=200 {
                    assert_eq!(t.orientation_at(i), spec.orientation_at(k + i), "{spec} shifted by {k} at {i}");
                }
            }
        }
    }
}
