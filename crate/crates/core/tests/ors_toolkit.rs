mod common;

use common::*;
use dynmatch::graph::DynamicGraph;
use dynmatch::oracle::exact_matching;
use dynmatch::ors::*;
use dynmatch::stream::UpdateEvent;
use dynmatch::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn inst(n: usize, r: usize, ms: &[&[(usize, usize)]]) -> OrderedMatchingInstance {
    let ms = ms.iter().map(|m| m.iter().map(|&(a, b)| e(a, b)).collect()).collect();
    OrderedMatchingInstance::new(n, r, ms).unwrap()
}

#[test]
fn verifier_examples() {
    let valid = inst(5, 1, &[&[(1, 2), (3, 4)], &[(1, 3)]]);
    assert_eq!(verify_ors(&valid).unwrap(), None);

    let reversed = inst(5, 1, &[&[(1, 3)], &[(1, 2), (3, 4)]]);
    let v = verify_ors(&reversed).unwrap().unwrap();
    assert_eq!((v.kind, v.i, v.witness), (ViolationKind::NotInduced, 2, Some(e(1, 3))));

    let single = inst(6, 2, &[&[(0, 1), (2, 3), (4, 5)]]);
    assert_eq!(verify_ors(&single).unwrap(), None);
    assert_eq!(verify_rs(&single).unwrap(), None);

    let v = verify_rs(&valid).unwrap().unwrap();
    assert_eq!(v.kind, ViolationKind::NotInduced);
    assert_eq!(v.i, 1);
    assert_eq!(v.witness, Some(e(1, 3)));
}

#[test]
fn overlap_examples() {
    let valid = inst(5, 1, &[&[(1, 2), (3, 4)], &[(1, 3)]]);
    assert_eq!(pairwise_overlap_max(&valid), 2);
    assert_eq!(pairwise_overlap_max(&inst(6, 1, &[&[(0, 1)], &[(2, 3)]])), 0);
    assert_eq!(pairwise_overlap_max(&inst(6, 1, &[&[(0, 1)]])), 0);
}

#[test]
fn malformed_instances_rejected() {
    let bad = OrderedMatchingInstance::new(4, 1, vec![vec![e(0, 1), e(1, 2)]]);
    assert!(matches!(bad, Err(Error::MalformedInstance(_))));
    let out_of_range = OrderedMatchingInstance::new(3, 1, vec![vec![e(0, 5)]]);
    assert!(matches!(out_of_range, Err(Error::MalformedInstance(_))));
}

#[test]
fn instance_text_round_trip_and_errors() {
    let valid = inst(5, 1, &[&[(1, 2), (3, 4)], &[(1, 3)]]);
    let text = valid.to_text();
    assert_eq!(OrderedMatchingInstance::parse(&text).unwrap(), valid);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.txt");
    valid.write(&path).unwrap();
    assert_eq!(OrderedMatchingInstance::read(&path).unwrap(), valid);

    match OrderedMatchingInstance::parse("5 1 1\nmatching 1 1\n1 x\n") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn pack_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let p = greedy_ors_pack(8, 4, 200, &mut rng).unwrap();
        assert_eq!(p.t(), 1);
    }
    let p = greedy_ors_pack(16, 1, 2000, &mut rng).unwrap();
    assert!(p.t() >= 8, "t = {}", p.t());
    assert!(greedy_ors_pack(4, 3, 10, &mut rng).is_err());
    assert!(greedy_ors_pack(4, 0, 10, &mut rng).is_err());
}

#[test]
fn hard_sequence_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let one = greedy_ors_pack(8, 4, 50, &mut rng).unwrap();
    let seq = hard_sequence_gen(&one).unwrap();
    assert_eq!(seq.boundaries.len(), 1);

    let p = greedy_ors_pack(30, 5, 500, &mut rng).unwrap();
    assert!(p.t() >= 2);
    let seq = hard_sequence_gen(&p).unwrap();
    assert_eq!(seq.s, 20);
    let mut g = DynamicGraph::new(seq.stream.n).unwrap();
    let (mut b, mut c) = (0, 0);
    for (idx, ev) in seq.stream.events.iter().enumerate() {
        let changed = match *ev {
            UpdateEvent::Insert(x) => g.insert(x).unwrap(),
            UpdateEvent::Delete(x) => g.delete(x).unwrap(),
        };
        assert!(changed, "illegal event {idx}: {ev:?}");
        let done = idx + 1;
        if c < seq.cleared.len() && seq.cleared[c] == done {
            for v in seq.m..seq.m + seq.s {
                assert_eq!(g.degree(v), 0, "singleton {v} not isolated");
            }
            c += 1;
        }
        if b < seq.boundaries.len() && seq.boundaries[b] == done {
            let mu = exact_matching(&g.edge_snapshot(), g.n()).unwrap().size;
            assert_eq!(2 * mu, seq.m + seq.s);
            b += 1;
        }
    }
    assert_eq!(b, seq.boundaries.len());
}

#[test]
fn hard_sequence_rejects_bad_instances() {
    let reversed = inst(5, 1, &[&[(1, 3)], &[(1, 2), (3, 4)]]);
    assert!(hard_sequence_gen(&reversed).is_err());
    let uneven = inst(8, 1, &[&[(0, 1), (2, 3)]]);
    assert!(hard_sequence_gen(&uneven).is_err());
}

#[test]
fn stream_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s = random_stream_gen(10, 30, 1.0, &mut rng).unwrap();
    assert!(s.events.iter().all(|x| x.is_insert()));
    assert!(random_stream_gen(10, 0, 0.5, &mut rng).unwrap().is_empty());
    assert!(churn_stream_gen(10, 0, 4, &mut rng).unwrap().is_empty());
}

fn assert_legal(s: &dynmatch::stream::UpdateStream) {
    let mut g = std::collections::BTreeSet::new();
    for ev in &s.events {
        match *ev {
            UpdateEvent::Insert(x) => assert!(g.insert(x), "insert of present edge {x:?}"),
            UpdateEvent::Delete(x) => assert!(g.remove(&x), "delete of absent edge {x:?}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn verifiers_match_reference(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng);
        prop_assert_eq!(library_verdict(&inst, false), brute_force_verify(&inst, false));
        prop_assert_eq!(library_verdict(&inst, true), brute_force_verify(&inst, true));
        if library_verdict(&inst, true).is_none() {
            prop_assert!(library_verdict(&inst, false).is_none());
        }
    }

    #[test]
    fn packed_instances_are_valid(seed in any::<u64>(), n in 4usize..40, r in 1usize..5) {
        prop_assume!(2 * r <= n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = greedy_ors_pack(n, r, 100, &mut rng).unwrap();
        prop_assert!(p.t() >= 1);
        prop_assert!(p.matchings.iter().all(|m| m.len() == r));
        prop_assert_eq!(verify_ors(&p).unwrap(), None);
        prop_assert_eq!(brute_force_verify(&p, false), None);
    }

    #[test]
    fn generated_streams_are_legal(seed in any::<u64>(), n in 2usize..30, steps in 0usize..300, bias in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_stream_gen(n, steps, bias, &mut rng).unwrap();
        prop_assert_eq!(s.len(), steps);
        assert_legal(&s);
        let window = 5.min(n * (n - 1) / 2);
        let c = churn_stream_gen(n, steps, window, &mut rng).unwrap();
        assert_legal(&c);
        let hubs = 1 + (seed as usize % n);
        let h = hub_stream_gen(n, hubs, steps, bias, &mut rng).unwrap();
        assert_legal(&h);
        prop_assert!(h.events.iter().all(|x| x.edge().u() < hubs));
    }

    #[test]
    fn streams_are_deterministic(seed in any::<u64>()) {
        let a = random_stream_gen(20, 100, 0.6, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = random_stream_gen(20, 100, 0.6, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(a, b);
    }
}
