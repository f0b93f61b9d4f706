//! Seeded random Reeb graphs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dsu, ReebGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Move {
    Open,
    Split,
    Join,
    Close,
}

/// Generates a valid connected graph with `n_target` vertices, rounded up to
/// an even count since every valid graph has as many sources and up-forks as
/// sinks and down-forks.
///
/// The generator sweeps upward keeping the open arcs of the part built so far.
/// Each vertex picks uniformly among the moves that can still finish in the
/// remaining budget without disconnecting the graph: open a new source, split
/// an open arc at an up-fork, join two open arcs at a down-fork (a loop when
/// both lie in one component) or close an arc at a sink.
pub fn generate(seed: u64, n_target: usize) -> ReebGraph {
    let n = n_target.max(2).next_multiple_of(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dsu = Dsu::new(n);
    // Open arcs, each named by its tail vertex.
    let mut open: Vec<usize> = Vec::new();
    let mut open_per_comp = vec![0usize; n];
    let mut components = 0usize;
    let mut labels = Vec::with_capacity(n);
    let mut arcs = Vec::with_capacity(n * 3 / 2);
    let mut label = 0.0;
    for x in 0..n {
        let left = n - x - 1;
        let f = open.len();
        let closable: Vec<usize> = (0..f).filter(|&i| open_per_comp[dsu.find(open[i])] >= 2).collect();
        let mut moves = Vec::with_capacity(4);
        if f == 0 || left > f {
            moves.push(Move::Open);
        }
        if f > 0 && left > f {
            moves.push(Move::Split);
        }
        if f >= 2 {
            moves.push(Move::Join);
        }
        if !closable.is_empty() || (f == 1 && left == 0) {
            moves.push(Move::Close);
        }
        let mv = *moves.choose(&mut rng).expect("some move is always feasible");
        let mut take = |i: usize, dsu: &mut Dsu, open: &mut Vec<usize>| {
            let t = open.swap_remove(i);
            open_per_comp[dsu.find(t)] -= 1;
            t
        };
        let tails: Vec<usize> = match mv {
            Move::Open => Vec::new(),
            Move::Split => vec![take(rng.gen_range(0..f), &mut dsu, &mut open)],
            Move::Join => {
                let i = rng.gen_range(0..f);
                let a = take(i, &mut dsu, &mut open);
                let b = take(rng.gen_range(0..f - 1), &mut dsu, &mut open);
                vec![a, b]
            }
            Move::Close => {
                let i = if f == 1 { 0 } else { *closable.choose(&mut rng).unwrap() };
                vec![take(i, &mut dsu, &mut open)]
            }
        };
        let mut roots: Vec<usize> = tails.iter().map(|&t| dsu.find(t)).collect();
        roots.sort_unstable();
        roots.dedup();
        let carried: usize = roots.iter().map(|&r| open_per_comp[r]).sum();
        for &t in &tails {
            arcs.push((t, x));
            dsu.union(t, x);
        }
        let outs = match mv {
            Move::Open | Move::Join => 1,
            Move::Split => 2,
            Move::Close => 0,
        };
        let r = dsu.find(x);
        open_per_comp[r] = carried + outs;
        components = components + 1 - roots.len();
        for _ in 0..outs {
            open.push(x);
        }
        label += rng.gen_range(0.25..1.0);
        labels.push(label);
    }
    debug_assert!(open.is_empty());
    debug_assert_eq!(components, 1);
    ReebGraph { labels, arcs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_graph() {
        let g = generate(7, 2);
        assert_eq!(g.arcs, vec![(0, 1)]);
        g.validate().unwrap();
    }

    #[test]
    fn valid_connected_and_deterministic() {
        for seed in 0..200 {
            let g = generate(seed, 3 + seed as usize % 60);
            g.validate().unwrap();
            assert_eq!(g.components(), 1, "seed {seed}");
            assert_eq!(g.len() % 2, 0);
        }
        assert_eq!(generate(42, 100), generate(42, 100));
    }
}
