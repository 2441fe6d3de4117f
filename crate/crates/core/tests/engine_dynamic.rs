mod common;

use std::collections::BTreeSet;

use common::*;
use dynmatch::certify::Condition;
use dynmatch::engine::{Engine, EngineConfig};
use dynmatch::graph::{DynamicGraph, Edge};
use dynmatch::oracle::exact_matching;
use dynmatch::ors::{hub_stream_gen, random_stream_gen};
use dynmatch::sparsifier::{contract_edge, ContractionMap, Wrapper, WrapperConfig};
use dynmatch::stream::UpdateEvent;
use dynmatch::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ins(a: usize, b: usize) -> UpdateEvent {
    UpdateEvent::Insert(e(a, b))
}

#[test]
fn init_examples() {
    let eng = Engine::new(EngineConfig::new(10, 0.2).with_threshold(32)).unwrap();
    assert!(eng.current_matching().is_empty());
    assert_eq!(eng.c_updates(), 0);
    let m = eng.metrics_snapshot();
    assert_eq!((m.updates, m.matrix_probes, m.list_reads, m.rebuilds), (0, 0, 0, 0));
    assert!(matches!(Engine::new(EngineConfig::new(10, 0.0)), Err(Error::Config(_))));
    assert!(matches!(Engine::new(EngineConfig::new(10, 0.2).with_threshold(0)), Err(Error::Config(_))));
}

#[test]
fn update_examples() {
    let mut eng = Engine::new(EngineConfig::new(10, 0.2).with_threshold(1000)).unwrap();
    eng.update(ins(0, 1)).unwrap();
    eng.update(ins(2, 3)).unwrap();
    eng.update(UpdateEvent::Delete(e(2, 3))).unwrap();
    assert!(!eng.overlays().g_add.contains(e(2, 3)));
    assert!(!eng.overlays().g_del.contains(e(2, 3)));
    assert!(!eng.graph().contains(e(2, 3)));

    let matched = eng.current_matching().edges();
    if let Some(&x) = matched.first() {
        let before = eng.current_matching().len();
        eng.update(UpdateEvent::Delete(x)).unwrap();
        assert_eq!(eng.current_matching().len(), before - 1);
        assert!(eng.current_matching().validate().is_ok());
    }
}

#[test]
fn phase_boundary_example() {
    let t = 12;
    let mut eng = Engine::new(EngineConfig::new(10, 0.2).with_threshold(t)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = random_stream_gen(10, t, 0.7, &mut rng).unwrap();
    for ev in &s.events {
        eng.update(*ev).unwrap();
    }
    assert_eq!(eng.phase_index(), 1);
    assert!(eng.overlays().g_add.is_empty());
    assert!(eng.overlays().g_del.is_empty());
}

#[test]
fn matching_examples() {
    let n = 20;
    let mut eng = Engine::new(EngineConfig::new(n, 0.2).with_seed(4)).unwrap();
    let mut last = None;
    for i in 0..n / 2 {
        last = Some(eng.update(ins(2 * i, 2 * i + 1)).unwrap());
    }
    // 10 updates with period 2: the last update triggered a rebuild.
    assert!(last.unwrap().rebuilt);
    let after = eng.current_matching().len();
    assert!(after >= 6, "{after}");
    let mut deleted = 0;
    for i in 0..n / 2 {
        if eng.c_updates() % eng.rebuild_period() == eng.rebuild_period() - 1 {
            break;
        }
        eng.update(UpdateEvent::Delete(e(2 * i, 2 * i + 1))).unwrap();
        deleted += 1;
        assert!(eng.current_matching().len() + deleted >= after);
    }

    let empty = Engine::new(EngineConfig::new(5, 0.3)).unwrap();
    assert!(empty.current_matching().is_empty());
}

#[test]
fn metrics_examples() {
    let mut eng = Engine::new(EngineConfig::new(12, 0.4).with_seed(2)).unwrap();
    let mut c2 = None;
    for a in 0..12 {
        for b in a + 1..12 {
            let out = eng.update(ins(a, b)).unwrap();
            if out.condition == Some(Condition::C2) {
                c2 = Some(eng.metrics_snapshot());
                break;
            }
        }
        if c2.is_some() {
            break;
        }
    }
    let m = c2.expect("a clique forces a C2 rebuild");
    assert_eq!(m.certificate_log.len(), 1);
    let sum: f64 = m.certificate_log.iter().map(|c| 1.0 / c.degree_proxy).sum();
    assert!((m.current_phase().sum_inverse_d - sum).abs() < 1e-12);
}

#[test]
fn contraction_examples() {
    let id = ContractionMap::identity(8);
    assert_eq!(contract_edge(&id, e(2, 5)), Some(e(2, 5)));
    let mut buckets = vec![0u32; 8];
    buckets[0] = 2;
    buckets[1] = 5;
    buckets[3] = 3;
    buckets[4] = 3;
    let map = ContractionMap::from_buckets(buckets, 6).unwrap();
    assert_eq!(contract_edge(&map, e(3, 4)), None);
    assert_eq!(contract_edge(&map, e(0, 1)), Some(e(2, 5)));
}

#[test]
fn wrapper_mu_8_example() {
    let n = 256;
    // Eight hubs, each adjacent to its own block of leaves: mu = 8.
    let mut edges = Vec::new();
    for h in 0..8 {
        for k in 0..20 {
            edges.push(e(h, 8 + 20 * h + k));
        }
    }
    edges.push(e(0, 1));
    edges.push(e(2, 3));
    assert_eq!(exact_matching(&edges, n).unwrap().size, 8);
    for seed in 0..3 {
        let mut w = Wrapper::new(WrapperConfig::new(n, 0.25).with_seed(seed)).unwrap();
        assert!(w.current_matching().is_empty());
        for &x in &edges {
            w.update(UpdateEvent::Insert(x)).unwrap();
        }
        let got = w.current_matching();
        assert!(got.len() >= 6, "seed {seed}: {}", got.len());
        assert!(is_matching_in(n, &got.edges(), &edges));
    }
}

#[test]
fn wrapper_forwards_at_most_one_event() {
    let mut w = Wrapper::new(WrapperConfig::new(64, 0.5).with_seed(1)).unwrap();
    w.update(ins(3, 9)).unwrap();
    for i in 0..w.instance_count() {
        assert!(w.engine(i).metrics_snapshot().updates <= 1);
    }
}

fn check_engine_run(n: usize, eps: f64, seed: u64, steps: usize, threshold: Option<usize>) -> std::result::Result<(), TestCaseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = random_stream_gen(n, steps, 0.6, &mut rng).unwrap();
    let mut cfg = EngineConfig::new(n, eps).with_seed(seed).with_invariant_checks(true);
    if let Some(t) = threshold {
        cfg = cfg.with_threshold(t);
    }
    let mut eng = Engine::new(cfg).unwrap();
    let mut g = DynamicGraph::new(n).unwrap();
    let mut prev = 0usize;
    for ev in &s.events {
        let out = eng.update(*ev).unwrap();
        match *ev {
            UpdateEvent::Insert(x) => { g.insert(x).unwrap(); }
            UpdateEvent::Delete(x) => { g.delete(x).unwrap(); }
        }
        let edges = g.edge_snapshot();
        let m = eng.current_matching();
        prop_assert!(is_matching_in(n, &m.edges(), &edges));
        if !out.rebuilt {
            prop_assert!(m.len() <= prev);
            let dropped = usize::from(!ev.is_insert());
            prop_assert!(m.len() + dropped >= prev);
        }
        prev = m.len();

        // Overlay algebra by exhaustive pair enumeration.
        let ov = eng.overlays();
        for a in 0..n {
            for b in a + 1..n {
                let x = e(a, b);
                let dense = eng.graph().contains(x) && !ov.g_add.contains(x);
                let sparse = (ov.g_add.contains(x) || ov.h_cert.contains(x)) && !ov.g_del.contains(x);
                prop_assert_eq!(dense || sparse, g.contains(x), "pair {:?}", x);
            }
        }
        prop_assert!(ov.g_add.edge_snapshot().iter().all(|x| !ov.g_del.contains(*x)));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn engine_invariants_hold(seed in any::<u64>(), n in 4usize..48, eps in 0.1f64..0.6, steps in 0usize..300) {
        check_engine_run(n, eps, seed, steps, None)?;
    }

    #[test]
    fn engine_invariants_hold_across_phases(seed in any::<u64>(), n in 4usize..32, t in 1usize..40) {
        check_engine_run(n, 0.3, seed, 200, Some(t))?;
    }

    #[test]
    fn engine_is_deterministic(seed in any::<u64>(), n in 4usize..40) {
        let s = random_stream_gen(n, 150, 0.6, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let run = || {
            let mut eng = Engine::new(EngineConfig::new(n, 0.2).with_seed(seed)).unwrap();
            let mut sizes = Vec::new();
            for ev in &s.events {
                eng.update(*ev).unwrap();
                sizes.push(eng.current_matching().edges());
            }
            (sizes, eng.metrics_snapshot())
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn wrapper_lift_is_valid(seed in any::<u64>(), n in 8usize..64, steps in 0usize..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hubs = (n / 8).max(1);
        let s = hub_stream_gen(n, hubs, steps, 0.7, &mut rng).unwrap();
        let mut w = Wrapper::new(WrapperConfig::new(n, 0.5).with_seed(seed)).unwrap();
        let mut g: BTreeSet<Edge> = BTreeSet::new();
        for ev in &s.events {
            w.update(*ev).unwrap();
            match *ev {
                UpdateEvent::Insert(x) => { g.insert(x); }
                UpdateEvent::Delete(x) => { g.remove(&x); }
            }
            let edges: Vec<Edge> = g.iter().copied().collect();
            let m = w.current_matching();
            prop_assert!(m.validate().is_ok());
            prop_assert!(is_matching_in(n, &m.edges(), &edges));
            for inst in w.instances() {
                prop_assert!(m.len() >= inst.reported);
            }
        }
    }

    #[test]
    fn identity_wrapper_equals_engine(seed in any::<u64>(), n in 4usize..32) {
        let s = random_stream_gen(n, 120, 0.6, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let ec = EngineConfig::new(n, 0.3).with_seed(seed);
        let mut w = Wrapper::from_instances(n, vec![(1, ContractionMap::identity(n), ec.clone())]).unwrap();
        let mut bare = Engine::new(ec).unwrap();
        for ev in &s.events {
            w.update(*ev).unwrap();
            bare.update(*ev).unwrap();
            prop_assert_eq!(w.current_matching().edges(), bare.current_matching().edges());
        }
    }
}
