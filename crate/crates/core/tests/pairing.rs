use mergetree_core::reeb::{generate, pair_single_pass, pair_single_pass_stats, pair_two_pass, reference_pairing, ReebGraph};
use mergetree_core::{DynMergeForest, ImplicitForest, NaiveForest, RankForest};

fn all_agree(g: &ReebGraph) {
    let want = reference_pairing(g).unwrap();
    want.check(g).unwrap();
    let (got, stats) = pair_single_pass_stats(g, &mut NaiveForest::new()).unwrap();
    assert_eq!(got, want, "naive");
    assert!(stats.parent_walk_steps <= g.len() as u64);
    assert_eq!(pair_single_pass(g, &mut DynMergeForest::new()).unwrap(), want, "dyn");
    assert_eq!(pair_single_pass(g, &mut RankForest::new()).unwrap(), want, "rank");
    let (mut f, mut r) = (ImplicitForest::new(), ImplicitForest::new());
    assert_eq!(pair_two_pass(g, &mut f, &mut r).unwrap(), want, "two-pass");
}

#[test]
fn generated_graphs_pair_identically() {
    for seed in 0..150 {
        let g = generate(seed, 2 + (seed as usize * 37) % 300);
        all_agree(&g);
    }
}

#[test]
fn disjoint_unions_pair_per_component() {
    for seed in 0..60 {
        let a = generate(seed, 20 + seed as usize % 30);
        let b = generate(seed + 1000, 10 + seed as usize % 17);
        // Interleave the two graphs' vertices by label.
        let mut order: Vec<(f64, usize, usize)> = a.labels.iter().enumerate().map(|(i, &l)| (l, 0, i)).collect();
        order.extend(b.labels.iter().enumerate().map(|(i, &l)| (l + 0.125, 1, i)));
        order.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut index = [vec![0; a.len()], vec![0; b.len()]];
        for (new, &(_, which, old)) in order.iter().enumerate() {
            index[which][old] = new;
        }
        let mut arcs: Vec<(usize, usize)> = a.arcs.iter().map(|&(u, v)| (index[0][u], index[0][v])).collect();
        arcs.extend(b.arcs.iter().map(|&(u, v)| (index[1][u], index[1][v])));
        let g = ReebGraph::new(order.iter().map(|o| o.0).collect(), arcs);
        assert_eq!(g.components(), 2);
        all_agree(&g);
    }
}
