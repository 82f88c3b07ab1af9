//! Stable graphs of genus g with n labelled legs, their automorphism
//! counts, Z_5 decorations and flag assignments.
//!
//! Graphs are tiny (at most 2g − 2 + n vertices), so canonical forms are
//! computed by trying every vertex permutation.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("unstable type: 2g - 2 + n = {0} <= 0")]
    Unstable(i64),
}

/// Undecorated stable graph.  Edge i owns half-edges 2i (at `edges[i].0`)
/// and 2i+1 (at `edges[i].1`); leg j carries label j+1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableGraph {
    pub genus: Vec<u32>,
    pub edges: Vec<(usize, usize)>,
    pub legs: Vec<usize>,
    pub aut: u64,
}

/// A stable graph with a decoration p(v) ∈ Z_5 and the order of the
/// decoration-preserving automorphism group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecoratedStableGraph {
    pub graph: StableGraph,
    pub decoration: Vec<u8>,
    pub aut: u64,
}

/// The flags of a graph in a fixed order: half-edges 0..2E, then legs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flag {
    Half { edge: usize, side: u8 },
    Leg(usize),
}

impl StableGraph {
    pub fn n_vertices(&self) -> usize {
        self.genus.len()
    }

    pub fn total_genus(&self) -> u32 {
        let h1 = self.edges.len() as i64 - self.n_vertices() as i64 + 1;
        (h1 + self.genus.iter().map(|&g| g as i64).sum::<i64>()) as u32
    }

    /// Number of flags (half-edges and legs) at each vertex.
    pub fn valence(&self) -> Vec<usize> {
        let mut val = vec![0; self.n_vertices()];
        for &(a, b) in &self.edges {
            val[a] += 1;
            val[b] += 1;
        }
        for &v in &self.legs {
            val[v] += 1;
        }
        val
    }

    pub fn is_stable(&self) -> bool {
        self.valence().iter().zip(&self.genus).all(|(&n, &g)| 2 * g as i64 - 2 + n as i64 > 0)
    }

    pub fn is_connected(&self) -> bool {
        connected(self.n_vertices(), &self.edges)
    }

    pub fn flags(&self) -> Vec<(Flag, usize)> {
        let mut f = Vec::new();
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            f.push((Flag::Half { edge: i, side: 0 }, a));
            f.push((Flag::Half { edge: i, side: 1 }, b));
        }
        for (j, &v) in self.legs.iter().enumerate() {
            f.push((Flag::Leg(j), v));
        }
        f
    }

    /// dim M̄_{g(v), n(v)} per vertex.
    pub fn vertex_dims(&self) -> Vec<i64> {
        self.valence().iter().zip(&self.genus).map(|(&n, &g)| 3 * g as i64 - 3 + n as i64).collect()
    }

    fn multiplicities(&self) -> BTreeMap<(usize, usize), u32> {
        let mut m = BTreeMap::new();
        for &(a, b) in &self.edges {
            *m.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
        m
    }
}

fn connected(nv: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let r = find(&mut parent, 0);
    (0..nv).all(|v| find(&mut parent, v) == r)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Relabelled form under `perm` (old vertex → new vertex).  `labels` is
/// any per-vertex data that automorphisms must preserve.
type Form = (Vec<(u32, u8)>, Vec<(usize, usize)>, Vec<usize>);

fn form(labels: &[(u32, u8)], edges: &[(usize, usize)], legs: &[usize], perm: &[usize]) -> Form {
    let mut l2 = vec![(0, 0); labels.len()];
    for (v, &x) in labels.iter().enumerate() {
        l2[perm[v]] = x;
    }
    let mut e2: Vec<(usize, usize)> = edges
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (perm[a], perm[b]);
            (x.min(y), x.max(y))
        })
        .collect();
    e2.sort_unstable();
    let legs2 = legs.iter().map(|&v| perm[v]).collect();
    (l2, e2, legs2)
}

/// Canonical form and the number of vertex permutations fixing the graph.
fn canon(labels: &[(u32, u8)], edges: &[(usize, usize)], legs: &[usize], perms: &[Vec<usize>]) -> (Form, u64) {
    let id: Vec<usize> = (0..labels.len()).collect();
    let f0 = form(labels, edges, legs, &id);
    let mut best: Option<Form> = None;
    let mut stab = 0;
    for p in perms {
        let f = form(labels, edges, legs, p);
        if f == f0 {
            stab += 1;
        }
        if best.as_ref().is_none_or(|b| f < *b) {
            best = Some(f);
        }
    }
    (best.expect("at least the identity"), stab)
}

fn edge_factor(mult: &BTreeMap<(usize, usize), u32>) -> u64 {
    let mut r = 1u64;
    for (&(a, b), &m) in mult {
        r *= (1..=m as u64).product::<u64>();
        if a == b {
            r *= 1u64 << m;
        }
    }
    r
}

/// |Aut| of a (possibly decorated) graph: vertex symmetries times
/// permutations of parallel edges times flips of self-loops.  Legs are
/// fixed pointwise.
fn aut_order(labels: &[(u32, u8)], edges: &[(usize, usize)], legs: &[usize]) -> u64 {
    let perms = permutations(labels.len());
    let (_, stab) = canon(labels, edges, legs, &perms);
    let g = StableGraph { genus: vec![], edges: edges.to_vec(), legs: vec![], aut: 0 };
    stab * edge_factor(&g.multiplicities())
}

/// Multisets of size k from 0..m in nondecreasing order.
fn multisets(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// One representative per isomorphism class of stable graphs of type (g, n).
pub fn enumerate(g: u32, n: usize) -> Result<Vec<StableGraph>, GraphError> {
    let chi = 2 * g as i64 - 2 + n as i64;
    if chi <= 0 {
        return Err(GraphError::Unstable(chi));
    }
    let mut seen: HashSet<Form> = HashSet::new();
    let mut out = Vec::new();
    for nv in 1..=chi as usize {
        let perms = permutations(nv);
        let pairs: Vec<(usize, usize)> = (0..nv).flat_map(|i| (i..nv).map(move |j| (i, j))).collect();
        // genera in nonincreasing order; other orders are relabellings
        for gens in multisets(g as usize + 1, nv) {
            let gens: Vec<u32> = gens.iter().rev().map(|&x| x as u32).collect();
            let sum: u32 = gens.iter().sum();
            if sum > g {
                continue;
            }
            let ne = (g - sum) as usize + nv - 1;
            for combo in multisets(pairs.len(), ne) {
                let edges: Vec<(usize, usize)> = combo.iter().map(|&c| pairs[c]).collect();
                if !connected(nv, &edges) {
                    continue;
                }
                let mut val = vec![0i64; nv];
                for &(a, b) in &edges {
                    val[a] += 1;
                    val[b] += 1;
                }
                let need: Vec<i64> = (0..nv).map(|v| (3 - 2 * gens[v] as i64 - val[v]).max(0)).collect();
                if need.iter().sum::<i64>() > n as i64 {
                    continue;
                }
                place_legs(n, nv, &need, &mut vec![], &mut |legs| {
                    let labels: Vec<(u32, u8)> = gens.iter().map(|&x| (x, 0)).collect();
                    let (f, stab) = canon(&labels, &edges, legs, &perms);
                    if seen.insert(f.clone()) {
                        let (l, e, lg) = f;
                        let mut gr = StableGraph { genus: l.iter().map(|x| x.0).collect(), edges: e, legs: lg, aut: 0 };
                        gr.aut = stab * edge_factor(&gr.multiplicities());
                        out.push(gr);
                    }
                });
            }
        }
    }
    Ok(out)
}

fn place_legs(n: usize, nv: usize, need: &[i64], cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if cur.len() == n {
        let mut cnt = vec![0i64; nv];
        for &v in cur.iter() {
            cnt[v] += 1;
        }
        if (0..nv).all(|v| cnt[v] >= need[v]) {
            f(cur);
        }
        return;
    }
    for v in 0..nv {
        cur.push(v);
        place_legs(n, nv, need, cur, f);
        cur.pop();
    }
}

/// All decorations up to isomorphism, each with its own |Aut|.
pub fn decorations(gr: &StableGraph) -> Vec<DecoratedStableGraph> {
    let nv = gr.n_vertices();
    let perms = permutations(nv);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut p = vec![0u8; nv];
    loop {
        let labels: Vec<(u32, u8)> = gr.genus.iter().zip(&p).map(|(&g, &d)| (g, d)).collect();
        let (f, stab) = canon(&labels, &gr.edges, &gr.legs, &perms);
        if seen.insert(f) {
            out.push(DecoratedStableGraph {
                graph: gr.clone(),
                decoration: p.clone(),
                aut: stab * edge_factor(&gr.multiplicities()),
            });
        }
        // odometer over Z_5^V
        let mut i = 0;
        loop {
            if i == nv {
                return out;
            }
            p[i] += 1;
            if p[i] < 5 {
                break;
            }
            p[i] = 0;
            i += 1;
        }
    }
}

/// Recompute |Aut| from scratch; used to cross-check enumeration.
pub fn aut_of(gr: &StableGraph, decoration: Option<&[u8]>) -> u64 {
    let labels: Vec<(u32, u8)> = match decoration {
        Some(d) => gr.genus.iter().zip(d).map(|(&g, &x)| (g, x)).collect(),
        None => gr.genus.iter().map(|&g| (g, 0)).collect(),
    };
    aut_order(&labels, &gr.edges, &gr.legs)
}

/// Every assignment of non-negative integers to the flags whose sum at
/// each vertex is at most dim M̄_{g(v),n(v)}.  Any larger sum forces the
/// vertex integral to vanish: the t-insertions carry ψ-powers ≥ 2 each.
pub fn flag_assignments(gr: &StableGraph) -> Vec<Vec<u32>> {
    let flags = gr.flags();
    let dims = gr.vertex_dims();
    let mut out = Vec::new();
    let mut used = vec![0i64; gr.n_vertices()];
    let mut cur = Vec::with_capacity(flags.len());
    fn rec(i: usize, flags: &[(Flag, usize)], dims: &[i64], used: &mut [i64], cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == flags.len() {
            out.push(cur.clone());
            return;
        }
        let v = flags[i].1;
        let mut a = 0;
        while used[v] + a <= dims[v] {
            used[v] += a;
            cur.push(a as u32);
            rec(i + 1, flags, dims, used, cur, out);
            cur.pop();
            used[v] -= a;
            a += 1;
        }
    }
    rec(0, &flags, &dims, &mut used, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn inv_aut_sum(gs: &[StableGraph]) -> Ratio<u64> {
        gs.iter().map(|g| Ratio::new(1, g.aut)).sum()
    }

    #[test]
    fn g1n1() {
        let gs = enumerate(1, 1).unwrap();
        assert_eq!(gs.len(), 2);
        let mut auts: Vec<u64> = gs.iter().map(|g| g.aut).collect();
        auts.sort();
        assert_eq!(auts, vec![1, 2]);
    }

    #[test]
    fn g2n0() {
        let gs = enumerate(2, 0).unwrap();
        assert_eq!(gs.len(), 7);
        assert_eq!(inv_aut_sum(&gs), Ratio::new(17, 6));
        let theta = gs.iter().find(|g| g.genus == vec![0, 0] && g.edges == vec![(0, 1); 3]).unwrap();
        assert_eq!(theta.aut, 12);
    }

    #[test]
    fn counts() {
        for (g, n, c) in [(1, 2, 5), (2, 1, 16), (2, 2, 75), (3, 0, 42), (1, 3, 23)] {
            let gs = enumerate(g, n).unwrap();
            assert_eq!(gs.len(), c, "G_{{{g},{n}}}");
            for gr in &gs {
                assert!(gr.is_stable() && gr.is_connected());
                assert_eq!(gr.total_genus(), g);
                assert_eq!(aut_of(gr, None), gr.aut);
            }
        }
        assert_eq!(inv_aut_sum(&enumerate(3, 0).unwrap()), Ratio::new(121, 12));
    }

    #[test]
    fn unstable_rejected() {
        assert!(enumerate(0, 2).is_err());
        assert!(enumerate(1, 0).is_err());
    }

    #[test]
    fn decorations_of_theta_graph() {
        let gs = enumerate(2, 0).unwrap();
        let theta = gs.iter().find(|g| g.genus == vec![0, 0] && g.edges == vec![(0, 1); 3]).unwrap();
        let ds = decorations(theta);
        for d in &ds {
            let want = if d.decoration[0] == d.decoration[1] { 12 } else { 6 };
            assert_eq!(d.aut, want);
        }
        let single = gs.iter().find(|g| g.n_vertices() == 1 && g.edges.is_empty()).unwrap();
        assert_eq!(decorations(single).len(), 5);
    }

    #[test]
    fn decorated_orbit_stabilizer() {
        // Σ_{decorated classes} 1/|Aut(Γ,p)| = 5^V / |Aut(Γ)|
        for gr in enumerate(2, 0).unwrap() {
            let s: Ratio<u64> = decorations(&gr).iter().map(|d| Ratio::new(1, d.aut)).sum();
            assert_eq!(s, Ratio::new(5u64.pow(gr.n_vertices() as u32), gr.aut));
        }
    }

    #[test]
    fn flag_assignment_bounds() {
        let gs = enumerate(2, 0).unwrap();
        let single = gs.iter().find(|g| g.n_vertices() == 1 && g.edges.is_empty()).unwrap();
        assert_eq!(flag_assignments(single), vec![Vec::<u32>::new()]);
        for gr in &gs {
            let dims = gr.vertex_dims();
            for a in flag_assignments(gr) {
                let mut s = vec![0i64; gr.n_vertices()];
                for ((_, v), x) in gr.flags().iter().zip(&a) {
                    s[*v] += *x as i64;
                }
                assert!(s.iter().zip(&dims).all(|(x, d)| x <= d));
            }
        }
    }
}
