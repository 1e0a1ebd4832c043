mod common;

use std::collections::BTreeSet;

use common::*;
use dodagx::oracle::{lc_orbit, stabilizer_error, verify_measurement_rule};
use dodagx::protocols::{dodag_x_traced, x_protocol};
use dodagx::sweep::{grid_sweep, small_world_sweep, PartyMode};
use dodagx::{
    build_dodag, dodag_x, generate, measure_x, measure_z, predict_endpoint_neighborhoods, repeater_protocol,
    select_root, x_protocol_pair, x_protocol_triplet, DodagTree, Error, Graph, Measurement, OrderedPath, PartySet,
    TopologySpec,
};
use dodagx::measurement::evolve_endpoint_neighborhoods;
use proptest::prelude::*;

fn small_graph() -> impl Strategy<Value = Graph> {
    (1usize..=8, any::<u64>()).prop_map(|(n, s)| random_graph(n, s))
}

fn tree(max: usize) -> impl Strategy<Value = Graph> {
    (3usize..=max, any::<u64>()).prop_map(|(n, s)| random_tree(n, s))
}

fn tree_with_triplet(max: usize) -> impl Strategy<Value = (Graph, [usize; 3])> {
    (3usize..=max, any::<u64>(), any::<u64>())
        .prop_map(|(n, s, t)| (random_tree(n, s), random_triplets(n, 1, t)[0]))
}

fn dodag_of(g: &Graph) -> (Graph, DodagTree) {
    let t = build_dodag(g, select_root(g).unwrap()).unwrap();
    (t.tree_graph().clone(), t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn local_complement_is_an_involution(g in small_graph(), v in 0usize..8) {
        let v = v % g.vertex_count();
        let once = g.local_complement(v).unwrap();
        prop_assert_eq!(once.neighborhood(v).unwrap(), g.neighborhood(v).unwrap());
        prop_assert_eq!(once.local_complement(v).unwrap(), g.clone());
    }

    #[test]
    fn deleting_a_vertex_drops_its_edges(g in small_graph(), v in 0usize..8) {
        let v = v % g.vertex_count();
        let h = g.delete_vertex(v).unwrap();
        prop_assert_eq!(h.edge_count(), g.edge_count() - g.degree(v));
        prop_assert_eq!(h.active_count(), g.active_count() - 1);
        prop_assert!(!h.is_active(v));
        let (z, m) = measure_z(&g, v).unwrap();
        prop_assert_eq!(z, h);
        prop_assert_eq!(m, Measurement::Z { target: v });
    }

    #[test]
    fn shortest_path_matches_brute_force(g in small_graph(), a in 0usize..8, b in 0usize..8) {
        let n = g.vertex_count();
        let (a, b) = (a % n, b % n);
        let brute = all_simple_paths(&g, a, b).into_iter().map(|p| p.len()).min();
        match g.shortest_path(a, b) {
            Ok(p) => {
                prop_assert_eq!(Some(p.len()), brute);
                prop_assert_eq!(g.distances(a).unwrap()[b], Some(p.len() - 1));
                prop_assert!(p.vertices().windows(2).all(|w| g.has_edge(w[0], w[1])));
                let q = g.shortest_path_through(a, b, &[]).unwrap();
                prop_assert_eq!(q.len(), p.len());
            }
            Err(Error::NoPath { .. }) => prop_assert_eq!(brute, None),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn tree_paths_meet_only_at_the_middle_vertex(g in tree(30), a in any::<usize>(), b in any::<usize>()) {
        let n = g.vertex_count();
        let p = g.shortest_path(a % n, b % n).unwrap();
        for w in p.vertices().windows(3) {
            let both: BTreeSet<_> = g.neighborhood(w[0]).unwrap()
                .intersection(&g.neighborhood(w[2]).unwrap()).copied().collect();
            prop_assert_eq!(both, BTreeSet::from([w[1]]));
        }
    }

    #[test]
    fn z_and_x_rules_agree_with_the_state_vector(n in 2usize..=6, s in any::<u64>(), v in any::<usize>(), w in any::<usize>()) {
        let g = random_graph(n, s);
        let v = v % n;
        let z = Measurement::Z { target: v };
        prop_assert!(verify_measurement_rule(&g, &z).unwrap());
        let nb: Vec<_> = g.neighbors(v).collect();
        if !nb.is_empty() {
            let w = nb[w % nb.len()];
            let x = Measurement::X { target: v, witness: w };
            prop_assert!(verify_measurement_rule(&g, &x).unwrap());
        }
    }

    #[test]
    fn x_requires_a_neighbor_witness(g in small_graph(), v in 0usize..8, w in 0usize..8) {
        let n = g.vertex_count();
        let (v, w) = (v % n, w % n);
        if v != w && !g.has_edge(v, w) {
            let is_witness_error = matches!(measure_x(&g, v, w), Err(Error::WitnessNotNeighbor { .. }));
            prop_assert!(is_witness_error);
        }
    }

    #[test]
    fn x_witnesses_give_lc_equivalent_graphs(n in 3usize..=8, s in any::<u64>(), v in any::<usize>()) {
        let g = random_graph(n, s);
        let v = v % n;
        let nb: Vec<_> = g.neighbors(v).collect();
        prop_assume!(nb.len() >= 2);
        let orbit = lc_orbit(&measure_x(&g, v, nb[0]).unwrap().0).unwrap();
        for &w in &nb[1..] {
            let other = measure_x(&g, v, w).unwrap().0;
            prop_assert!(orbit.contains(&other.edges()));
        }
    }

    #[test]
    fn graph_states_are_stabilized(g in small_graph()) {
        prop_assert!(stabilizer_error(&g).unwrap() < 1e-10);
    }

    #[test]
    fn closed_forms_match_evolution(g in tree(40), a in any::<usize>(), b in any::<usize>()) {
        let n = g.vertex_count();
        let p = g.shortest_path(a % n, b % n).unwrap();
        prop_assume!(p.len() >= 3);
        prop_assert_eq!(
            predict_endpoint_neighborhoods(&g, &p).unwrap(),
            evolve_endpoint_neighborhoods(&g, &p).unwrap()
        );
    }

    #[test]
    fn x_along_a_tree_path_links_the_endpoints(g in tree(40), a in any::<usize>(), b in any::<usize>()) {
        let n = g.vertex_count();
        let p = g.shortest_path(a % n, b % n).unwrap();
        prop_assume!(p.len() >= 2);
        let mut h = g.clone();
        for &v in p.interior() {
            h = measure_x(&h, v, p.source()).unwrap().0;
        }
        prop_assert!(h.has_edge(p.source(), p.target()));
        let o = x_protocol_pair(&g, p.source(), p.target()).unwrap();
        prop_assert!(o.success);
        prop_assert_eq!(o.counts.path_x, p.len() - 2);
    }

    #[test]
    fn dodag_is_a_bfs_spanning_tree(spec in topology_spec()) {
        let g = generate(&spec).unwrap();
        let root = select_root(&g).unwrap();
        let t = build_dodag(&g, root).unwrap();
        let tg = t.tree_graph();
        prop_assert!(tg.is_tree());
        prop_assert_eq!(tg.edge_count(), g.active_count() - 1);
        prop_assert!(tg.edges().iter().all(|&(u, v)| g.has_edge(u, v)));
        let dist = g.distances(root).unwrap();
        for v in g.active_vertices() {
            prop_assert_eq!(t.depth_of(v), dist[v]);
            prop_assert_eq!(t.path_to_root(v).unwrap().len(), dist[v].unwrap() + 1);
        }
        let ecc = g.eccentricity(root).unwrap();
        prop_assert!(g.active_vertices().all(|v| g.eccentricity(v).unwrap() >= ecc));
        prop_assert_eq!(t.depth(), ecc);
    }

    #[test]
    fn generators_are_deterministic_and_connected(spec in topology_spec()) {
        let g = generate(&spec).unwrap();
        prop_assert_eq!(&g, &generate(&spec).unwrap());
        prop_assert!(g.is_connected());
        prop_assert_eq!(g.vertex_count(), spec.vertex_count());
    }

    #[test]
    fn triplets_are_routed_on_trees((g, [a, b, c]) in tree_with_triplet(50)) {
        let (gt, t) = dodag_of(&g);
        let parties = PartySet::new(vec![a, b, c]).unwrap();
        let (out, trace) = dodag_x_traced(&gt, &t, &parties).unwrap();
        prop_assert!(out.success);
        prop_assert_eq!(out.total(), out.log.len());

        let nodes = trace.intersections.nodes();
        let after4 = trace.after_step4.as_ref().unwrap();
        for p in [a, b, c] {
            let near_node = nodes.iter().any(|&x| x != p && after4.has_edge(p, x));
            prop_assert!(nodes.contains(&p) || near_node, "party {p}");
            if nodes.contains(&p) && p != trace.root {
                prop_assert!(after4.has_edge(p, trace.root), "party {p}");
            }
        }

        let x = x_protocol_triplet(&gt, a, b, c).unwrap();
        prop_assert!(x.success);
        prop_assert_eq!(x.total(), out.total());
        let union: BTreeSet<_> = path_set(&gt, a, b).union(&path_set(&gt, b, c)).copied().collect();
        prop_assert_eq!(x.counts.path_x, union.len() - 3);
    }

    #[test]
    fn pairs_are_routed_on_trees((g, [a, b, _]) in tree_with_triplet(50)) {
        let (gt, t) = dodag_of(&g);
        let out = dodag_x(&gt, &t, &PartySet::new(vec![a, b]).unwrap()).unwrap();
        prop_assert!(out.success);
        prop_assert_eq!(out.final_graph.neighborhood(a).unwrap(), BTreeSet::from([b]));
    }

    #[test]
    fn x_protocol_on_connected_graphs_never_breaks_witness_rule(n in 4usize..=16, k in 1usize..=3, p in 0.0f64..=1.0, s in any::<u64>(), t in any::<u64>()) {
        let spec = TopologySpec::SmallWorld { n, k: 2 * k, p, seed: s };
        prop_assume!(2 * k < n);
        let Ok(g) = generate(&spec) else { return Ok(()) };
        let [a, b, c] = random_triplets(n, 1, t)[0];
        match x_protocol(&g, &PartySet::new(vec![a, b, c]).unwrap()) {
            Ok(o) => prop_assert_eq!(o.total(), o.log.len()),
            Err(Error::RoutingFailed { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn repeater_never_beats_x_on_stars(n in 3usize..=20, a in any::<usize>(), b in any::<usize>()) {
        let g = generate(&TopologySpec::Star { n }).unwrap();
        let (a, b) = (a % n, b % n);
        prop_assume!(a != b);
        let x = x_protocol_pair(&g, a, b).unwrap();
        let r = repeater_protocol(&g, a, b).unwrap();
        prop_assert!(x.success && r.success);
        prop_assert_eq!(x.total(), r.total());
    }

    #[test]
    fn json_round_trips(spec in topology_spec()) {
        let g = generate(&spec).unwrap();
        prop_assert_eq!(&Graph::from_json_str(&g.to_json_string()).unwrap(), &g);
        let (_, t) = dodag_of(&g);
        let back = DodagTree::from_json_str(&t.to_json_string()).unwrap();
        prop_assert_eq!(back.root(), t.root());
        prop_assert!(g.active_vertices().all(|v| back.parent(v) == t.parent(v)));
    }
}

fn topology_spec() -> impl Strategy<Value = TopologySpec> {
    prop_oneof![
        (1usize..=7, 1usize..=7).prop_map(|(rows, cols)| TopologySpec::Grid { rows, cols }),
        (2usize..=20).prop_map(|n| TopologySpec::Star { n }),
        (3usize..=20).prop_map(|n| TopologySpec::Ring { n }),
        (1usize..=30, any::<u64>()).prop_map(|(n, seed)| TopologySpec::RandomTree { n, seed }),
        (1usize..=4, 0.0f64..=1.0, any::<u64>())
            .prop_map(|(h, p, seed)| TopologySpec::SmallWorld { n: 24, k: 2 * h, p, seed }),
    ]
}

#[test]
fn path_count_formula_on_fixed_tree() {
    let g = Graph::from_edges(7, [(0, 1), (1, 2), (2, 3), (1, 4), (4, 5), (5, 6)]).unwrap();
    let p = OrderedPath::new(&g, vec![3, 2, 1, 4, 5, 6]).unwrap();
    assert_eq!(p.interior(), &[2, 1, 4, 5]);
    let x = x_protocol_triplet(&g, 3, 0, 6).unwrap();
    assert_eq!(x.counts.path_x, 7 - 3);
    assert!(x.success);
}

#[test]
fn sweeps_are_identical_across_thread_pools() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let mut out = Vec::new();
            grid_sweep(&[2, 3, 4], &[3, 4], PartyMode::all_triplets()).run_to_csv(&mut out).unwrap();
            small_world_sweep(12, &[2, 4], &[0.0, 0.5], 3, 11, PartyMode::sampled_triplets(10, 40))
                .run_to_csv(&mut out)
                .unwrap();
            out
        })
    };
    assert_eq!(run(1), run(3));
}
