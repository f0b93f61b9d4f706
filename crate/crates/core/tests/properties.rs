use mergetree_core::harness::{check_trace, format_trace, parse_trace, random_trace, sort_via_merge, Backend, CheckOptions, Op, TraceShape};
use mergetree_core::reeb::{generate, pair_two_pass, reference_pairing, PairType, ReebGraph};
use mergetree_core::{DynMergeForest, ImplicitForest, RankForest};
use proptest::prelude::*;

fn op() -> impl Strategy<Value = Op> {
    let idx = 0usize..1000;
    prop_oneof![
        (-1e6f64..1e6).prop_map(Op::Insert),
        (idx.clone(), idx.clone()).prop_map(|(v, w)| Op::Merge(v, w)),
        idx.clone().prop_map(Op::Cut),
        idx.clone().prop_map(Op::Delete),
        idx.clone().prop_map(Op::Root),
        (idx.clone(), idx.clone()).prop_map(|(v, w)| Op::Nca(v, w)),
        idx.prop_map(Op::Parent),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn traces_survive_a_text_round_trip(ops in prop::collection::vec(op(), 0..50)) {
        prop_assert_eq!(parse_trace(&format_trace(&ops)).unwrap(), ops);
    }

    #[test]
    fn sorting_matches_the_standard_sort(values in prop::collection::vec(-1e9f64..1e9, 0..200)) {
        let mut want = values.clone();
        want.sort_by(f64::total_cmp);
        prop_assert_eq!(&sort_via_merge(&values, &mut DynMergeForest::new()).unwrap(), &want);
        prop_assert_eq!(&sort_via_merge(&values, &mut RankForest::new()).unwrap(), &want);
    }

    #[test]
    fn random_traces_agree_with_the_oracle(
        seed in any::<u64>(),
        ops in 0usize..400,
        max_live in 2usize..40,
        deletes in any::<bool>(),
        leaf_merges in any::<bool>(),
    ) {
        let shape = TraceShape { ops, max_live, deletes, leaf_merges, ..TraceShape::default() };
        let trace = random_trace(seed, &shape);
        let opts = CheckOptions { parent_maps: true, audit: true };
        let stats = check_trace(&trace, &[Backend::Dyn, Backend::Rank, Backend::Implicit], opts);
        prop_assert!(stats.is_ok(), "{}", stats.unwrap_err());
    }

    #[test]
    fn generated_graphs_survive_a_text_round_trip(seed in any::<u64>(), n in 2usize..120) {
        let g = generate(seed, n);
        g.validate().unwrap();
        prop_assert_eq!(ReebGraph::parse(&g.to_text()).unwrap(), g.clone());
        prop_assert_eq!(g.reversed().reversed(), g);
    }

    #[test]
    fn two_pass_pairs_every_vertex_once(seed in any::<u64>(), n in 2usize..120) {
        let g = generate(seed, n);
        let p = pair_two_pass(&g, &mut ImplicitForest::new(), &mut ImplicitForest::new()).unwrap();
        prop_assert_eq!(p.pairs.len() * 2, g.len());
        let d = p.pairs.iter().filter(|q| q.kind == PairType::D).count();
        prop_assert_eq!(d, g.components());
        prop_assert_eq!(p, reference_pairing(&g).unwrap());
    }
}
