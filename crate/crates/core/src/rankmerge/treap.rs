//! Implicit treaps holding solid paths in top-to-bottom order.
//!
//! Every node of the forest is also a treap node, so a path's treap root acts
//! as its header. Each treap node aggregates its subtree's node count and the
//! sum of the dashed sizes `d`, which turns the size equation along a solid
//! path into a prefix sum.

use crate::key::Key;

pub(crate) const NIL: usize = usize::MAX;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

#[derive(Clone, Debug, Default)]
pub(crate) struct PathSeqs {
    l: Vec<usize>,
    r: Vec<usize>,
    p: Vec<usize>,
    prio: Vec<u64>,
    cnt: Vec<usize>,
    d: Vec<i64>,
    dsum: Vec<i64>,
}

impl PathSeqs {
    pub fn with_capacity(n: usize) -> Self {
        PathSeqs {
            l: Vec::with_capacity(n),
            r: Vec::with_capacity(n),
            p: Vec::with_capacity(n),
            prio: Vec::with_capacity(n),
            cnt: Vec::with_capacity(n),
            d: Vec::with_capacity(n),
            dsum: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, d: i64) -> usize {
        let i = self.l.len();
        self.l.push(NIL);
        self.r.push(NIL);
        self.p.push(NIL);
        self.prio.push(splitmix(i as u64));
        self.cnt.push(1);
        self.d.push(d);
        self.dsum.push(d);
        i
    }

    #[inline]
    fn cnt_of(&self, t: usize) -> usize {
        if t == NIL {
            0
        } else {
            self.cnt[t]
        }
    }

    #[inline]
    fn dsum_of(&self, t: usize) -> i64 {
        if t == NIL {
            0
        } else {
            self.dsum[t]
        }
    }

    fn pull(&mut self, t: usize) {
        let (l, r) = (self.l[t], self.r[t]);
        self.cnt[t] = 1 + self.cnt_of(l) + self.cnt_of(r);
        self.dsum[t] = self.d[t] + self.dsum_of(l) + self.dsum_of(r);
    }

    pub fn d(&self, a: usize) -> i64 {
        self.d[a]
    }

    pub fn add_d(&mut self, a: usize, delta: i64) {
        self.d[a] += delta;
        let mut x = a;
        while x != NIL {
            self.dsum[x] += delta;
            x = self.p[x];
        }
    }

    pub fn root(&self, mut a: usize) -> usize {
        while self.p[a] != NIL {
            a = self.p[a];
        }
        a
    }

    pub fn first(&self, mut t: usize) -> usize {
        while self.l[t] != NIL {
            t = self.l[t];
        }
        t
    }

    /// Position of `a` in its sequence, counted from zero at the top.
    pub fn pos(&self, a: usize) -> usize {
        let mut idx = self.cnt_of(self.l[a]);
        let mut x = a;
        while self.p[x] != NIL {
            let par = self.p[x];
            if self.r[par] == x {
                idx += self.cnt_of(self.l[par]) + 1;
            }
            x = par;
        }
        idx
    }

    /// Sum of `d` over the nodes strictly above `a` in its sequence.
    pub fn prefix_before(&self, a: usize) -> i64 {
        let mut s = self.dsum_of(self.l[a]);
        let mut x = a;
        while self.p[x] != NIL {
            let par = self.p[x];
            if self.r[par] == x {
                s += self.dsum_of(self.l[par]) + self.d[par];
            }
            x = par;
        }
        s
    }

    /// Splits the tree rooted at `t` into its first `k` nodes and the rest.
    fn split(&mut self, t: usize, k: usize) -> (usize, usize) {
        if t == NIL {
            return (NIL, NIL);
        }
        let lc = self.cnt_of(self.l[t]);
        if k <= lc {
            let (a, b) = self.split(self.l[t], k);
            self.l[t] = b;
            if b != NIL {
                self.p[b] = t;
            }
            self.pull(t);
            if a != NIL {
                self.p[a] = NIL;
            }
            self.p[t] = NIL;
            (a, t)
        } else {
            let (a, b) = self.split(self.r[t], k - lc - 1);
            self.r[t] = a;
            if a != NIL {
                self.p[a] = t;
            }
            self.pull(t);
            if b != NIL {
                self.p[b] = NIL;
            }
            self.p[t] = NIL;
            (t, b)
        }
    }

    /// Cuts the sequence containing `a` just above `a`. Returns the two roots.
    pub fn split_before(&mut self, a: usize) -> (usize, usize) {
        let k = self.pos(a);
        let root = self.root(a);
        self.split(root, k)
    }

    /// Concatenates sequence `a` followed by sequence `b`; returns the root.
    pub fn join(&mut self, a: usize, b: usize) -> usize {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        if self.prio[a] > self.prio[b] {
            let m = self.join(self.r[a], b);
            self.r[a] = m;
            self.p[m] = a;
            self.pull(a);
            self.p[a] = NIL;
            a
        } else {
            let m = self.join(a, self.l[b]);
            self.l[b] = m;
            self.p[m] = b;
            self.pull(b);
            self.p[b] = NIL;
            b
        }
    }

    /// First node of the sequence rooted at `root` whose key exceeds
    /// `threshold`, assuming keys increase along the sequence.
    pub fn first_greater(&self, root: usize, keys: &[Key], threshold: Key) -> usize {
        let mut best = NIL;
        let mut t = root;
        while t != NIL {
            if keys[t] > threshold {
                best = t;
                t = self.l[t];
            } else {
                t = self.r[t];
            }
        }
        best
    }

    /// Nodes of the sequence rooted at `root`, in order.
    pub fn in_order(&self, root: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.cnt_of(root));
        let mut stack = Vec::new();
        let mut t = root;
        while t != NIL || !stack.is_empty() {
            while t != NIL {
                stack.push(t);
                t = self.l[t];
            }
            let x = stack.pop().unwrap();
            out.push(x);
            t = self.r[x];
        }
        out
    }

    /// Checks parent links, aggregates and the priority heap below `root`.
    pub fn audit_tree(&self, root: usize) -> Result<(), String> {
        if self.p[root] != NIL {
            return Err(format!("treap root {root} has a parent"));
        }
        let mut stack = vec![root];
        while let Some(t) = stack.pop() {
            let mut cnt = 1;
            let mut dsum = self.d[t];
            for c in [self.l[t], self.r[t]] {
                if c != NIL {
                    if self.p[c] != t {
                        return Err(format!("treap child {c} of {t} points elsewhere"));
                    }
                    if self.prio[c] > self.prio[t] {
                        return Err(format!("treap priority order broken at {t}"));
                    }
                    cnt += self.cnt[c];
                    dsum += self.dsum[c];
                    stack.push(c);
                }
            }
            if cnt != self.cnt[t] || dsum != self.dsum[t] {
                return Err(format!("treap aggregates stale at {t}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(n: usize) -> (PathSeqs, usize) {
        let mut s = PathSeqs::default();
        let mut root = NIL;
        for i in 0..n {
            let x = s.push(i as i64 + 1);
            root = s.join(root, x);
        }
        (s, root)
    }

    #[test]
    fn positions_and_prefix_sums() {
        let (s, root) = seq(50);
        assert_eq!(s.in_order(root), (0..50).collect::<Vec<_>>());
        for i in 0..50 {
            assert_eq!(s.pos(i), i);
            assert_eq!(s.prefix_before(i), (i * (i + 1) / 2) as i64);
            assert_eq!(s.root(i), root);
        }
        s.audit_tree(root).unwrap();
    }

    #[test]
    fn split_and_rejoin() {
        let (mut s, _) = seq(30);
        let (a, b) = s.split_before(12);
        assert_eq!(s.in_order(a), (0..12).collect::<Vec<_>>());
        assert_eq!(s.in_order(b), (12..30).collect::<Vec<_>>());
        assert_eq!(s.first(b), 12);
        s.add_d(20, 5);
        s.audit_tree(b).unwrap();
        let r = s.join(a, b);
        assert_eq!(s.in_order(r), (0..30).collect::<Vec<_>>());
        assert_eq!(s.prefix_before(21), (21 * 22 / 2) as i64 + 5);
        s.audit_tree(r).unwrap();
    }

    #[test]
    fn first_greater_scan() {
        let (s, root) = seq(9);
        let keys: Vec<Key> = [9.0, 7.0, 5.0].iter().rev().chain([10.0; 6].iter()).enumerate()
            .map(|(i, &l)| Key::new(l, i as u64))
            .collect();
        // keys[0..3] = 5,7,9 then 10s with rising ids
        assert_eq!(s.first_greater(root, &keys, Key::new(6.0, 0)), 1);
        assert_eq!(s.first_greater(root, &keys, Key::new(11.0, 0)), NIL);
    }
}
