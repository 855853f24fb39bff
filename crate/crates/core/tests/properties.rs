use hvtm::data::tsv::{format_hex_bits, parse_hex_bits};
use hvtm::data::{Dataset, Manifest, SubsetSpec};
use hvtm::tm::{argmax, clamp_vote};
use hvtm::{bundle, capacity, overlap_likelihood, Hypervector, TokenCodebook};
use proptest::prelude::*;

fn hv_strategy(d: usize) -> impl Strategy<Value = Hypervector> {
    proptest::collection::vec(any::<bool>(), d).prop_map(|b| Hypervector::from_bools(&b))
}

proptest! {
    #[test]
    fn rotate_round_trip(v in hv_strategy(200), k in -1000i64..1000) {
        prop_assert_eq!(v.rotate(k).rotate(-k), v.clone());
        prop_assert_eq!(v.rotate(k).popcount(), v.popcount());
    }

    #[test]
    fn bundle_is_union(a in hv_strategy(130), b in hv_strategy(130)) {
        let u = bundle([&a, &b]).unwrap();
        for p in 0..130 {
            prop_assert_eq!(u.get(p), a.get(p) || b.get(p));
        }
        prop_assert_eq!(u.overlap(&a).unwrap(), a.popcount());
    }

    #[test]
    fn capacity_is_symmetric(d in 0u64..300, s in 0u64..300) {
        prop_assume!(s <= d);
        prop_assert_eq!(capacity(d, s).unwrap(), capacity(d, d - s).unwrap());
    }

    #[test]
    fn overlap_likelihood_monotone(d in 2u64..5000, p in 1u32..6, t in 0u64..10_000) {
        let l = overlap_likelihood(d, p, t);
        prop_assert!((0.0..=1.0).contains(&l));
        prop_assert!(overlap_likelihood(d, p, t + 1) >= l);
        prop_assert!(overlap_likelihood(d + 1, p, t) <= l);
    }

    #[test]
    fn codebook_regenerates(seed in any::<u64>(), ids in proptest::collection::vec("[a-z]{1,6}", 1..20)) {
        let mut a = TokenCodebook::new(512, 5, seed).unwrap();
        let mut b = TokenCodebook::new(512, 5, seed).unwrap();
        for id in &ids {
            a.get_or_insert(id);
        }
        for id in ids.iter().rev() {
            b.get_or_insert(id);
        }
        for id in &ids {
            prop_assert_eq!(a.get(id).unwrap().popcount(), 5);
            prop_assert_eq!(a.get(id), b.get(id));
        }
    }

    #[test]
    fn hex_bits_round_trip(mut bits in proptest::collection::btree_set(0usize..100, 0..30)) {
        let positions: Vec<usize> = std::mem::take(&mut bits).into_iter().collect();
        let hex = format_hex_bits(&positions, 100).unwrap();
        prop_assert_eq!(parse_hex_bits(&hex, 100).unwrap(), positions);
    }

    #[test]
    fn argmax_ignores_common_offset(sums in proptest::collection::vec(-50i64..50, 1..12), c in -100i64..100) {
        let shifted: Vec<i64> = sums.iter().map(|s| s + c).collect();
        prop_assert_eq!(argmax(&sums), argmax(&shifted));
    }

    #[test]
    fn clamp_stays_in_band(v in any::<i32>(), t in 1u32..1000) {
        let c = clamp_vote(v as i64, t);
        prop_assert!(c.abs() <= t as i64);
    }

    #[test]
    fn subset_is_stratified_and_ordered(labels in proptest::collection::vec(0usize..4, 1..200), n in 1usize..20, seed in any::<u64>()) {
        let ds = Dataset {
            samples: labels.iter().enumerate().map(|(i, &y)| (i, y)).collect(),
            class_names: (0..4).map(|c| c.to_string()).collect(),
            manifest: Manifest::default(),
        };
        let sub = ds.subset(SubsetSpec::PerClass(n), seed).unwrap();
        let again = ds.subset(SubsetSpec::PerClass(n), seed).unwrap();
        prop_assert_eq!(&sub.samples, &again.samples);
        for (c, &have) in ds.class_counts().iter().enumerate() {
            prop_assert_eq!(sub.class_counts()[c], have.min(n));
        }
        prop_assert!(sub.samples.windows(2).all(|w| w[0].0 < w[1].0));
    }
}
