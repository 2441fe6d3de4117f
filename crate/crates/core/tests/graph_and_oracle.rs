mod common;

use std::collections::BTreeSet;

use common::*;
use dynmatch::baselines::{DynamicMatcher, MaximalBaseline, RebuildBaseline};
use dynmatch::graph::{difference_matrix_probe, materialize_sparse, DynamicGraph, Edge, MAX_VERTICES};
use dynmatch::oracle::exact_matching;
use dynmatch::static_matcher::greedy_matching;
use dynmatch::stream::{UpdateEvent, UpdateStream};
use dynmatch::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph(n: usize, edges: &[(usize, usize)]) -> DynamicGraph {
    let mut g = DynamicGraph::new(n).unwrap();
    for &(a, b) in edges {
        g.insert(e(a, b)).unwrap();
    }
    g
}

#[test]
fn graph_examples() {
    let mut g = DynamicGraph::new(4).unwrap();
    g.insert(e(0, 1)).unwrap();
    assert!(g.has_edge(0, 1).unwrap() && g.has_edge(1, 0).unwrap());
    assert!(!g.insert(e(1, 0)).unwrap());
    assert_eq!(g.edge_count(), 1);
    assert!(matches!(Edge::new(2, 2), Err(Error::InvalidEdge(2, 2))));

    assert!(g.delete(e(0, 1)).unwrap());
    assert!(!g.has_edge(0, 1).unwrap());
    assert!(!g.delete(e(2, 3)).unwrap());
    assert!(g.is_empty());
    g.insert(e(0, 1)).unwrap();
    g.delete(e(0, 1)).unwrap();
    g.insert(e(0, 1)).unwrap();
    assert!(g.contains(e(0, 1)));

    let tri = graph(4, &[(0, 1), (1, 2), (0, 2)]);
    assert!(tri.has_edge(0, 2).unwrap());
    assert!(!tri.has_edge(0, 3).unwrap());
    let before = tri.matrix_probes();
    tri.has_edge(1, 2).unwrap();
    tri.has_edge(1, 3).unwrap();
    assert_eq!(tri.matrix_probes(), before + 2);

    assert!(matches!(tri.has_edge(0, 4), Err(Error::InvalidVertex { .. })));
    assert!(matches!(DynamicGraph::new(MAX_VERTICES + 1), Err(Error::Config(_))));
}

#[test]
fn difference_and_sparse_examples() {
    let g = graph(4, &[(0, 1), (2, 3)]);
    let add = graph(4, &[(0, 1)]);
    assert!(!difference_matrix_probe(&g, &add, 0, 1).unwrap());
    assert!(difference_matrix_probe(&g, &add, 2, 3).unwrap());
    assert!(!difference_matrix_probe(&g, &add, 1, 2).unwrap());

    let none = DynamicGraph::new(4).unwrap();
    let h = graph(4, &[(0, 1), (2, 3)]);
    let del = graph(4, &[(2, 3)]);
    assert_eq!(materialize_sparse(&add, &h, &del), vec![e(0, 1)]);
    assert!(materialize_sparse(&none, &none, &none).is_empty());
    assert!(materialize_sparse(&add, &none, &add).is_empty());
}

#[test]
fn stream_format() {
    let s = UpdateStream::parse("# demo\nn 6\n+ 0 1\n- 0 1\n").unwrap();
    assert_eq!(s.n, 6);
    assert_eq!(s.events, vec![UpdateEvent::Insert(e(0, 1)), UpdateEvent::Delete(e(0, 1))]);
    assert_eq!(UpdateStream::parse(&s.to_text()).unwrap(), s);
    for (text, line) in [("n 3\n+ 0 x\n", 2), ("+ 0 1\n", 1), ("n 3\n\n+ 0 3\n", 3), ("n 3\n* 0 1\n", 2), ("n 3\n+ 1 1\n", 2)] {
        match UpdateStream::parse(text) {
            Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
            other => panic!("{text:?}: {other:?}"),
        }
    }
}

#[test]
fn greedy_examples() {
    assert_eq!(greedy_matching(5, &[e(1, 2), e(2, 3), e(3, 4)]).edges(), vec![e(1, 2), e(3, 4)]);
    assert!(greedy_matching(5, &[]).is_empty());
    assert_eq!(greedy_matching(4, &[e(0, 1), e(0, 2), e(0, 3)]).edges(), vec![e(0, 1)]);
}

#[test]
fn oracle_examples() {
    assert_eq!(exact_matching(&[e(0, 1), e(1, 2), e(0, 2)], 3).unwrap().size, 1);
    let k4: Vec<Edge> = (0..4).flat_map(|a| (a + 1..4).map(move |b| e(a, b))).collect();
    assert_eq!(exact_matching(&k4, 4).unwrap().size, 2);
    let mut petersen = Vec::new();
    for i in 0..5 {
        petersen.push(e(i, (i + 1) % 5));
        petersen.push(e(i, i + 5));
        petersen.push(e(5 + i, 5 + (i + 2) % 5));
    }
    assert_eq!(exact_matching(&petersen, 10).unwrap().size, 5);
    assert_eq!(brute_force_mu(10, &petersen), 5);
}

#[test]
fn oracle_matches_enumeration_on_500_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for i in 0..500 {
        let n = 2 + i % 9;
        let p = [0.2, 0.35, 0.5, 0.8][i % 4];
        let edges = random_graph(n, p, &mut rng);
        let res = exact_matching(&edges, n).unwrap();
        assert_eq!(res.size, brute_force_mu(n, &edges), "graph {i}: {edges:?}");
        assert!(is_matching_in(n, &res.matching.edges(), &edges));
    }
}

#[test]
fn baseline_examples() {
    let mut rb = RebuildBaseline::new(6, 1).unwrap();
    let mut g = DynamicGraph::new(6).unwrap();
    let evs = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)];
    for &(a, b) in &evs {
        rb.apply(UpdateEvent::Insert(e(a, b))).unwrap();
        g.insert(e(a, b)).unwrap();
        assert_eq!(rb.matching().edges(), greedy_matching(6, &g.edge_snapshot()).edges());
    }

    let mut mb = MaximalBaseline::new(4).unwrap();
    mb.apply(UpdateEvent::Insert(e(0, 1))).unwrap();
    mb.apply(UpdateEvent::Insert(e(1, 2))).unwrap();
    let before = mb.matching().edges();
    mb.apply(UpdateEvent::Delete(e(1, 2))).unwrap();
    assert_eq!(mb.matching().edges(), before);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lists_and_matrix_agree(seed in any::<u64>(), n in 2usize..64, steps in 0usize..400) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = dynmatch::ors::random_stream_gen(n, steps, 0.6, &mut rng).unwrap();
        let mut g = DynamicGraph::new(n).unwrap();
        let mut reference = BTreeSet::new();
        for ev in &s.events {
            match *ev {
                UpdateEvent::Insert(x) => { g.insert(x).unwrap(); reference.insert(x); }
                UpdateEvent::Delete(x) => { g.delete(x).unwrap(); reference.remove(&x); }
            }
        }
        let from_lists: BTreeSet<Edge> = g.edges().into_iter().collect();
        let mut from_matrix = BTreeSet::new();
        for a in 0..n {
            for b in a + 1..n {
                if g.has_edge(a, b).unwrap() {
                    from_matrix.insert(e(a, b));
                }
            }
        }
        prop_assert_eq!(&from_lists, &reference);
        prop_assert_eq!(&from_matrix, &reference);
        prop_assert!(g.check_coherence().is_ok());
    }

    #[test]
    fn materialize_matches_set_algebra(seed in any::<u64>(), n in 2usize..64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mk = |rng: &mut ChaCha8Rng| {
            let edges = random_graph(n, 0.1, rng);
            let mut g = DynamicGraph::new(n).unwrap();
            for &x in &edges { g.insert(x).unwrap(); }
            (g, edges)
        };
        let (a, ea) = mk(&mut rng);
        let (b, eb) = mk(&mut rng);
        let (c, ec) = mk(&mut rng);
        let mut expect: BTreeSet<Edge> = ea.into_iter().chain(eb).collect();
        for x in ec { expect.remove(&x); }
        let got: BTreeSet<Edge> = materialize_sparse(&a, &b, &c).into_iter().collect();
        prop_assert_eq!(got, expect);
    }

    #[test]
    fn probe_counters_are_exact(seed in any::<u64>(), k in 0usize..50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = {
            let mut g = DynamicGraph::new(20).unwrap();
            for x in random_graph(20, 0.3, &mut rng) { g.insert(x).unwrap(); }
            g
        };
        let (p0, r0) = (g.matrix_probes(), g.list_reads());
        for i in 0..k { g.has_edge(i % 20, (i + 1) % 20).unwrap(); }
        prop_assert_eq!(g.matrix_probes(), p0 + k as u64);
        let deg = g.neighbors(3).count() as u64;
        prop_assert_eq!(g.list_reads(), r0 + deg);
    }

    #[test]
    fn greedy_is_maximal(seed in any::<u64>(), n in 2usize..64, p in 0.0f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges = random_graph(n, p, &mut rng);
        let m = greedy_matching(n, &edges);
        prop_assert!(m.validate().is_ok());
        prop_assert!(m.is_maximal_in(&edges));
        prop_assert!(is_matching_in(n, &m.edges(), &edges));
    }

    #[test]
    fn baselines_hold_their_bounds(seed in any::<u64>(), n in 2usize..40, steps in 0usize..300) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = dynmatch::ors::random_stream_gen(n, steps, 0.6, &mut rng).unwrap();
        let mut mb = MaximalBaseline::new(n).unwrap();
        let mut g = DynamicGraph::new(n).unwrap();
        for ev in &s.events {
            mb.apply(*ev).unwrap();
            match *ev {
                UpdateEvent::Insert(x) => { g.insert(x).unwrap(); }
                UpdateEvent::Delete(x) => { g.delete(x).unwrap(); }
            }
            let edges = g.edge_snapshot();
            prop_assert!(mb.matching().is_maximal_in(&edges));
            prop_assert!(is_matching_in(n, &mb.matching().edges(), &edges));
            let mu = exact_matching(&edges, n).unwrap().size;
            prop_assert!(2 * mb.matching().len() >= mu);
            prop_assert!(mb.matching().len() <= mu);
        }
    }
}
