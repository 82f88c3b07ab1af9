//! Graph-sum potentials F_{g,n}(φ_{c1},…,φ_{cn}), their T-derivatives,
//! the two anomaly equations and the Θ-expansion.
//!
//! Every vertex, edge and leg factor is a rational ring element times a
//! phase ζ^{−E·p(v)}.  The sum over decorations p: V → Z_5 is carried
//! out by tracking the exponent vector E and multiplying by
//! Π_v Σ_p ζ^{−p·E_v} (in Cyc) over |Aut Γ|; by orbit–stabilizer this
//! equals the sum over isomorphism classes of decorated graphs weighted by
//! their own automorphism groups.

use crate::cache::Cache;
use crate::cyclo::{character_sum, zeta_pow, Cyc};
use crate::field::{q, qi, Field, Q};
use crate::freering::{Evaluator, Mono, Poly};
use crate::graphs::{self, GraphError, StableGraph};
use crate::intnum::PsiCache;
use crate::mirror::MirrorData;
use crate::report::Check;
use crate::rmatrix::{k_over_l, RSeries, RTable};
use crate::series::{Series, SeriesError};
use dashmap::DashMap;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CohftError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("R-matrix known to level {have}, level {needed} needed")]
    Depth { needed: usize, have: usize },
    #[error("insertion index {0} is not in 0..5")]
    Insertion(u8),
    #[error("genus {0}: the anomaly equations need g >= 2")]
    Genus(u32),
    #[error("series: {0}")]
    Series(#[from] SeriesError),
    #[error("t-derivative pipelines disagree at k = {k}")]
    Mismatch { k: usize },
}

/// The involution on the Chen–Ruan basis: 0 ↦ 0, i ↦ 5 − i.
pub fn inv(c: usize) -> usize {
    (5 - c % 5) % 5
}

/// Which R-matrix level feeds the ψ^m coefficient of the vertex t-insertion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexConvention {
    /// z^m coefficient of z(1 − R⁻¹(z)1): P̃^{m−1}₀ with phase ζ^{−(m−1)p}.
    Derived,
    /// P̃^m₀ with phase ζ^{−mp}, as the contribution formula is printed.
    AsPrinted,
}

impl VertexConvention {
    fn shift(self) -> i64 {
        match self {
            VertexConvention::Derived => 1,
            VertexConvention::AsPrinted => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Convention {
    pub vertex: VertexConvention,
    /// The denominator in the t-insertion coefficient; 5 for this target.
    pub t_denominator: i64,
}

impl Default for Convention {
    fn default() -> Self {
        Convention { vertex: VertexConvention::Derived, t_denominator: 5 }
    }
}

/// Arithmetic and R-matrix data for one pipeline.
pub trait Backend: Sync {
    type E: Clone + Send + Sync;
    type O: Clone + Send + Sync;
    fn one(&self) -> Self::E;
    fn zero(&self) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn scale(&self, a: &Self::E, c: &Q) -> Self::E;
    /// P̃ᵏᵢ, zero for k < 0.
    fn p(&self, k: i64, i: usize) -> Self::E;
    fn k_over_l(&self, i: usize) -> Self::E;
    fn depth(&self) -> usize;
    fn lift(&self, a: &Self::E, w: &Cyc) -> Self::O;
    fn zero_o(&self) -> Self::O;
    fn add_o(&self, a: &Self::O, b: &Self::O) -> Self::O;
}

/// Ring elements of F[C1^±1, C2^±1].
pub struct Symbolic<'a> {
    pub table: &'a RTable,
}

impl Backend for Symbolic<'_> {
    type E = Poly<Q>;
    type O = Poly<Cyc>;
    fn one(&self) -> Poly<Q> {
        Poly::one()
    }
    fn zero(&self) -> Poly<Q> {
        Poly::zero()
    }
    fn is_zero(&self, a: &Poly<Q>) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &Poly<Q>, b: &Poly<Q>) -> Poly<Q> {
        a.add(b)
    }
    fn mul(&self, a: &Poly<Q>, b: &Poly<Q>) -> Poly<Q> {
        a.mul(b)
    }
    fn scale(&self, a: &Poly<Q>, c: &Q) -> Poly<Q> {
        a.scale_q(c)
    }
    fn p(&self, k: i64, i: usize) -> Poly<Q> {
        self.table.get(k, i)
    }
    fn k_over_l(&self, i: usize) -> Poly<Q> {
        Poly::term(k_over_l(i), qi(1))
    }
    fn depth(&self) -> usize {
        self.table.max_k
    }
    fn lift(&self, a: &Poly<Q>, w: &Cyc) -> Poly<Cyc> {
        a.map(|x| w.scale(x))
    }
    fn zero_o(&self) -> Poly<Cyc> {
        Poly::zero()
    }
    fn add_o(&self, a: &Poly<Cyc>, b: &Poly<Cyc>) -> Poly<Cyc> {
        a.add(b)
    }
}

/// Truncated x-series, with P̃ from the series-side flatness solve.
pub struct SeriesSide<'a> {
    rows: &'a RSeries,
    kl: Vec<Series<Q>>,
    w: i64,
}

impl<'a> SeriesSide<'a> {
    pub fn new(m: &MirrorData, rows: &'a RSeries) -> Result<Self, SeriesError> {
        let l_inv = m.l.inv()?;
        let kl = (0..5).map(|i| m.k[i].mul(&l_inv.pow(i as u32))).collect();
        Ok(SeriesSide { rows, kl, w: m.w })
    }
}

impl Backend for SeriesSide<'_> {
    type E = Series<Q>;
    type O = Series<Cyc>;
    fn one(&self) -> Series<Q> {
        Series::one(self.w)
    }
    fn zero(&self) -> Series<Q> {
        Series::zero(self.w)
    }
    fn is_zero(&self, a: &Series<Q>) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &Series<Q>, b: &Series<Q>) -> Series<Q> {
        a.add(b)
    }
    fn mul(&self, a: &Series<Q>, b: &Series<Q>) -> Series<Q> {
        a.mul(b)
    }
    fn scale(&self, a: &Series<Q>, c: &Q) -> Series<Q> {
        a.scale_q(c)
    }
    fn p(&self, k: i64, i: usize) -> Series<Q> {
        if k < 0 {
            Series::zero(self.w)
        } else {
            self.rows.rows[k as usize][i % 5].clone()
        }
    }
    fn k_over_l(&self, i: usize) -> Series<Q> {
        self.kl[i % 5].clone()
    }
    fn depth(&self) -> usize {
        self.rows.rows.len() - 1
    }
    fn lift(&self, a: &Series<Q>, w: &Cyc) -> Series<Cyc> {
        a.map(|x| w.scale(x))
    }
    fn zero_o(&self) -> Series<Cyc> {
        Series::zero(self.w)
    }
    fn add_o(&self, a: &Series<Cyc>, b: &Series<Cyc>) -> Series<Cyc> {
        a.add(b)
    }
}

/// Stable graphs per (g, n), enumerated once and shared; optionally
/// backed by the on-disk cache.
#[derive(Default)]
pub struct GraphStore {
    map: DashMap<(u32, usize), Arc<Vec<StableGraph>>>,
    disk: Option<Cache>,
}

impl GraphStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_cache(cache: Cache) -> Self {
        GraphStore { map: DashMap::new(), disk: Some(cache) }
    }

    pub fn get(&self, g: u32, n: usize) -> Result<Arc<Vec<StableGraph>>, GraphError> {
        if let Some(v) = self.map.get(&(g, n)) {
            return Ok(v.clone());
        }
        // a broken cache file only costs a re-enumeration
        let cached = self.disk.as_ref().and_then(|c| c.load_graphs(g, n).ok().flatten());
        let v = match cached {
            Some(v) => Arc::new(v),
            None => {
                let v = graphs::enumerate(g, n)?;
                if let Some(c) = &self.disk {
                    let _ = c.store_graphs(g, n, &v);
                }
                Arc::new(v)
            }
        };
        self.map.insert((g, n), v.clone());
        Ok(v)
    }
}

/// A computed potential with bookkeeping.
#[derive(Clone, Debug)]
pub struct Potential<O> {
    pub genus: u32,
    pub insertions: Vec<u8>,
    pub value: O,
    pub graphs: usize,
    pub assignments: usize,
}

type Phased<E> = Arc<Vec<(u8, E)>>;
type EdgeTerms<E> = Arc<Vec<((u8, u8), E)>>;

/// Exponent vectors: at most 2g − 2 + n vertices, well under 16 here.
type EKey = [u8; 16];

pub struct GraphSum<'a, B: Backend> {
    pub backend: B,
    pub psi: &'a PsiCache,
    pub graphs: &'a GraphStore,
    pub conv: Convention,
    vmemo: DashMap<(u32, Vec<u32>), Phased<B::E>>,
    ememo: DashMap<(u32, u32), EdgeTerms<B::E>>,
    lmemo: DashMap<(usize, u32), Phased<B::E>>,
}

fn sign(e: i64) -> Q {
    if e % 2 == 0 {
        qi(1)
    } else {
        qi(-1)
    }
}

fn factorial(k: i64) -> Q {
    (1..=k).fold(qi(1), |a, i| a * qi(i))
}

/// Ordered tuples of integers ≥ 2 with the given length and sum.
fn compositions(total: i64, parts: usize) -> Vec<Vec<u32>> {
    fn rec(rem: i64, parts: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 0 {
            if rem == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let max = rem - 2 * (parts as i64 - 1);
        for m in 2..=max {
            cur.push(m as u32);
            rec(rem - m, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::new(), &mut out);
    out
}

/// Level of R-matrix data a (g, n) graph sum can touch.
pub fn required_depth(g: u32, n: usize) -> usize {
    (3 * g as i64 - 2 + n as i64).max(0) as usize
}

impl<'a, B: Backend> GraphSum<'a, B> {
    pub fn new(backend: B, psi: &'a PsiCache, graphs: &'a GraphStore, conv: Convention) -> Self {
        GraphSum { backend, psi, graphs, conv, vmemo: DashMap::new(), ememo: DashMap::new(), lmemo: DashMap::new() }
    }

    /// Σ_k 5^{2g−2+n+k}/k! Σ_{m_i ≥ 2} ⟨Π τ_{a} Π τ_{m_i}⟩_g Π T_{m_i}, grouped
    /// by phase exponent.  The t-insertion count is bounded by 3g − 3 + n.
    pub fn vertex_terms(&self, g: u32, flags: &[u32]) -> Phased<B::E> {
        let mut key = flags.to_vec();
        key.sort_unstable();
        if let Some(v) = self.vmemo.get(&(g, key.clone())) {
            return v.clone();
        }
        let b = &self.backend;
        let n = key.len() as i64;
        let s: i64 = key.iter().map(|&a| a as i64).sum();
        let dim0 = 3 * g as i64 - 3 + n;
        let shift = self.conv.vertex.shift();
        let mut by_phase: Vec<Option<B::E>> = vec![None; 5];
        for k in 0..=dim0.max(0) {
            if 2 * g as i64 - 2 + n + k <= 0 {
                continue;
            }
            let tot = dim0 + k - s;
            if tot < 2 * k {
                continue;
            }
            let mut acc = b.zero();
            for ms in compositions(tot, k as usize) {
                let mut exps = key.clone();
                exps.extend_from_slice(&ms);
                let w = self.psi.value(g, &exps);
                if w.is_zero() {
                    continue;
                }
                let mut f = b.scale(&b.one(), &w);
                for &m in &ms {
                    let t = b.scale(&b.p(m as i64 - shift, 0), &(sign(m as i64) / qi(self.conv.t_denominator)));
                    f = b.mul(&f, &t);
                }
                acc = b.add(&acc, &f);
            }
            if b.is_zero(&acc) {
                continue;
            }
            let pre = Q::from_integer(5.into()).pow((2 * g as i64 - 2 + n + k) as i32) / factorial(k);
            let e = (tot - shift * k).rem_euclid(5) as usize;
            let term = b.scale(&acc, &pre);
            by_phase[e] = Some(match &by_phase[e] {
                Some(x) => b.add(x, &term),
                None => term,
            });
        }
        let out: Phased<B::E> = Arc::new(
            by_phase.into_iter().enumerate().filter_map(|(e, x)| x.map(|x| (e as u8, x))).collect(),
        );
        self.vmemo.insert((g, key), out.clone());
        out
    }

    /// ((−1)^{b1+b2}/5) Σ_{m ≤ b2} (−1)^m Σ_r P̃^{b1+m+1}_{Inv r} P̃^{b2−m}_r with
    /// phases (b1+m+1+Inv r) at the first vertex and (b2−m+r) at the second.
    pub fn edge_terms(&self, b1: u32, b2: u32) -> EdgeTerms<B::E> {
        if let Some(v) = self.ememo.get(&(b1, b2)) {
            return v.clone();
        }
        let b = &self.backend;
        let mut acc: HashMap<(u8, u8), B::E> = HashMap::new();
        for m in 0..=b2 as i64 {
            for r in 0..5 {
                let f = b.mul(&b.p(b1 as i64 + m + 1, inv(r)), &b.p(b2 as i64 - m, r));
                if b.is_zero(&f) {
                    continue;
                }
                let e1 = (b1 as i64 + m + 1 + inv(r) as i64).rem_euclid(5) as u8;
                let e2 = (b2 as i64 - m + r as i64).rem_euclid(5) as u8;
                let t = b.scale(&f, &(sign(b1 as i64 + b2 as i64 + m) * q(1, 5)));
                let slot = acc.entry((e1, e2)).or_insert_with(|| b.zero());
                *slot = b.add(slot, &t);
            }
        }
        let mut v: Vec<((u8, u8), B::E)> = acc.into_iter().filter(|(_, x)| !b.is_zero(x)).collect();
        v.sort_by_key(|(k, _)| *k);
        let out = Arc::new(v);
        self.ememo.insert((b1, b2), out.clone());
        out
    }

    /// ((−1)^a/5)(K_{Inv c}/L^{Inv c}) P̃^a_{Inv c}, phase a + Inv c.
    pub fn leg_terms(&self, c: usize, a: u32) -> Phased<B::E> {
        if let Some(v) = self.lmemo.get(&(c, a)) {
            return v.clone();
        }
        let b = &self.backend;
        let ic = inv(c);
        let f = b.mul(&b.k_over_l(ic), &b.p(a as i64, ic));
        let f = b.scale(&f, &(sign(a as i64) * q(1, 5)));
        let e = ((a as usize + ic) % 5) as u8;
        let out = Arc::new(if b.is_zero(&f) { vec![] } else { vec![(e, f)] });
        self.lmemo.insert((c, a), out.clone());
        out
    }

    fn conv_into(&self, cur: HashMap<EKey, B::E>, fac: &[(EKey, B::E)]) -> HashMap<EKey, B::E> {
        let b = &self.backend;
        let mut new: HashMap<EKey, B::E> = HashMap::new();
        for (k1, f1) in &cur {
            for (k2, f2) in fac {
                let mut k = [0u8; 16];
                for i in 0..16 {
                    k[i] = (k1[i] + k2[i]) % 5;
                }
                let p = b.mul(f1, f2);
                match new.get_mut(&k) {
                    Some(x) => *x = b.add(x, &p),
                    None => {
                        new.insert(k, p);
                    }
                }
            }
        }
        new.retain(|_, x| !b.is_zero(x));
        new
    }

    /// Contribution of one undecorated graph, summed over decorations and
    /// flag assignments.  Returns the value and the number of assignments.
    pub fn graph_contribution(&self, gr: &StableGraph, ins: &[u8]) -> (B::O, usize) {
        let b = &self.backend;
        let nv = gr.n_vertices();
        let flags = gr.flags();
        let ne = gr.edges.len();
        let mut at_vertex: Vec<Vec<usize>> = vec![vec![]; nv];
        for (i, (_, v)) in flags.iter().enumerate() {
            at_vertex[*v].push(i);
        }
        let mut acc_q = b.zero();
        let mut acc_o = b.zero_o();
        let assignments = graphs::flag_assignments(gr);
        let count = assignments.len();
        let unit = |v: usize, e: u8| {
            let mut k = [0u8; 16];
            k[v] = e;
            k
        };
        // factor order: each vertex, then its legs, then the edges whose later
        // end it is; a vertex is finished after the last factor touching it
        enum Slot {
            Vertex(usize),
            Leg(usize),
            Edge(usize),
        }
        let mut slots = Vec::new();
        for v in 0..nv {
            slots.push(Slot::Vertex(v));
            slots.extend(gr.legs.iter().enumerate().filter(|&(_, &w)| w == v).map(|(li, _)| Slot::Leg(li)));
            slots.extend(gr.edges.iter().enumerate().filter(|&(_, &(x, y))| x.max(y) == v).map(|(ei, _)| Slot::Edge(ei)));
        }
        let mut finished: Vec<Vec<usize>> = vec![vec![]; slots.len()];
        for v in 0..nv {
            let last = slots
                .iter()
                .rposition(|sl| match *sl {
                    Slot::Vertex(w) => w == v,
                    Slot::Leg(li) => gr.legs[li] == v,
                    Slot::Edge(ei) => gr.edges[ei].0 == v || gr.edges[ei].1 == v,
                })
                .expect("every vertex has its own slot");
            finished[last].push(v);
        }
        'assign: for a in assignments {
            let mut cur: HashMap<EKey, B::E> = HashMap::from([([0u8; 16], b.one())]);
            for (si, sl) in slots.iter().enumerate() {
                let fac: Vec<(EKey, B::E)> = match *sl {
                    Slot::Vertex(v) => {
                        let fv: Vec<u32> = at_vertex[v].iter().map(|&i| a[i]).collect();
                        let vt = self.vertex_terms(gr.genus[v], &fv);
                        vt.iter().map(|(e, f)| (unit(v, *e), f.clone())).collect()
                    }
                    Slot::Leg(li) => {
                        let lt = self.leg_terms(ins[li] as usize, a[2 * ne + li]);
                        lt.iter().map(|(e, f)| (unit(gr.legs[li], *e), f.clone())).collect()
                    }
                    Slot::Edge(ei) => {
                        let (v1, v2) = gr.edges[ei];
                        let et = self.edge_terms(a[2 * ei], a[2 * ei + 1]);
                        et.iter()
                            .map(|((e1, e2), f)| {
                                let mut k = [0u8; 16];
                                k[v1] = *e1;
                                k[v2] = (k[v2] + e2) % 5;
                                (k, f.clone())
                            })
                            .collect()
                    }
                };
                cur = self.conv_into(cur, &fac);
                // Σ_p ζ^{−p·E_v} = 0 unless 5 | E_v, so a finished vertex
                // with E_v ≠ 0 kills the term
                for &v in &finished[si] {
                    cur.retain(|k, _| k[v] == 0);
                }
                if cur.is_empty() {
                    continue 'assign;
                }
            }
            for (k, f) in cur {
                // Σ_{p ∈ Z_5^V} Π_v ζ^{−p_v E_v} / |Aut Γ|
                let mut w = Cyc::one();
                for e in k.iter().take(nv) {
                    w = w.mul_ref(&character_sum(-(*e as i64)));
                }
                if w.is_zero() {
                    continue;
                }
                let w = w.scale(&q(1, gr.aut as i64));
                match w.as_q() {
                    Some(r) => acc_q = b.add(&acc_q, &b.scale(&f, &r)),
                    None => acc_o = b.add_o(&acc_o, &b.lift(&f, &w)),
                }
            }
        }
        (b.add_o(&acc_o, &b.lift(&acc_q, &Cyc::one())), count)
    }

    /// F_{g,n}(φ_{c1},…,φ_{cn}) by the decorated-graph sum.
    pub fn potential(&self, g: u32, ins: &[u8]) -> Result<Potential<B::O>, CohftError> {
        if let Some(&c) = ins.iter().find(|&&c| c > 4) {
            return Err(CohftError::Insertion(c));
        }
        let need = required_depth(g, ins.len());
        if self.backend.depth() < need {
            return Err(CohftError::Depth { needed: need, have: self.backend.depth() });
        }
        let gs = self.graphs.get(g, ins.len())?;
        let b = &self.backend;
        let (value, assignments) = gs
            .par_iter()
            .map(|gr| self.graph_contribution(gr, ins))
            .reduce(|| (b.zero_o(), 0), |(x, n), (y, m)| (b.add_o(&x, &y), n + m));
        Ok(Potential { genus: g, insertions: ins.to_vec(), value, graphs: gs.len(), assignments })
    }
}

/// ∂Cont(e)/∂A2 predicted by telescoping: one surviving term.
fn edge_a2_closed(t: &RTable, b1: u32, b2: u32, p1: i64, p2: i64) -> Poly<Cyc> {
    let f = t.get(b1 as i64, 3).mul(&t.get(b2 as i64, 3));
    let ph = zeta_pow(-((b1 as i64 + 3) * p1 + (b2 as i64 + 3) * p2));
    f.map(|x| ph.scale(x)).scale(&Cyc::from_q(&(sign((b1 + b2) as i64) * q(1, 5))))
}

/// ∂Cont(e)/∂D²A1 predicted by telescoping: the m = 0, 1, 2 terms with r = 4.
fn edge_d2a1_closed(t: &RTable, b1: u32, b2: u32, p1: i64, p2: i64) -> Poly<Cyc> {
    let mut s = Poly::zero();
    for m in 0..3i64 {
        let f = t.get(b1 as i64 + m - 2, 4).mul(&t.get(b2 as i64 - m, 4)).shift(Mono::l(-2));
        let ph = zeta_pow(-((b1 as i64 + m + 2) * p1 + (b2 as i64 - m + 4) * p2));
        s.add_assign(&f.map(|x| ph.scale(x)).scale(&Cyc::from_q(&sign(m))));
    }
    s.scale(&Cyc::from_q(&(sign((b1 + b2) as i64) * q(1, 5))))
}

impl GraphSum<'_, Symbolic<'_>> {
    /// Cont(e) for concrete decorations.
    pub fn edge_value(&self, b1: u32, b2: u32, p1: i64, p2: i64) -> Poly<Cyc> {
        let mut s = Poly::zero();
        for ((e1, e2), f) in self.edge_terms(b1, b2).iter() {
            let ph = zeta_pow(-(*e1 as i64 * p1 + *e2 as i64 * p2));
            s.add_assign(&f.map(|x| ph.scale(x)));
        }
        s
    }

    /// Edge symmetry and both edge-derivative closed forms, for
    /// b1 + b2 ≤ max_b and all decorations.
    pub fn edge_checks(&self, max_b: u32) -> Vec<Check> {
        let t = self.backend.table;
        let (mut sym, mut da2, mut dd2) = (true, true, true);
        for b1 in 0..=max_b {
            for b2 in 0..=(max_b - b1) {
                if (b1 + b2 + 1) as usize > t.max_k {
                    continue;
                }
                for p1 in 0..5 {
                    for p2 in 0..5 {
                        let c = self.edge_value(b1, b2, p1, p2);
                        sym &= c == self.edge_value(b2, b1, p2, p1);
                        da2 &= c.partial_a2() == edge_a2_closed(t, b1, b2, p1, p2);
                        dd2 &= c.partial_d2a1() == edge_d2a1_closed(t, b1, b2, p1, p2);
                    }
                }
            }
        }
        vec![
            Check::new(format!("edge symmetry, b1+b2 <= {max_b}"), sym),
            Check::new(format!("edge dA2 lemma, b1+b2 <= {max_b}"), da2),
            Check::new(format!("edge dD2A1 lemma, b1+b2 <= {max_b}"), dd2),
        ]
    }
}

/// ∂/∂T = (1/C1)·D on x-series.
pub fn d_dt(s: &Series<Cyc>, m: &MirrorData) -> Result<Series<Cyc>, SeriesError> {
    Ok(s.d_op().mul(&m.c1.inv()?.to_field()))
}

/// Θ-expansion: coefficients of Θ^d/d! for d ≤ d_max, after x = T⁻¹(Θ).
pub fn gw_expansion(s: &Series<Cyc>, m: &MirrorData, d_max: i64) -> Result<Vec<Cyc>, SeriesError> {
    let x_of_theta = m.t.revert()?.to_field::<Cyc>();
    let f = s.compose(&x_of_theta)?;
    f.require_order(d_max)?;
    Ok((0..=d_max).map(|d| f.coeff(d).scale(&factorial(d))).collect())
}

/// The ½ in front of both right-hand sides, exposed for the coefficient probe.
#[derive(Clone, Debug)]
pub struct HaeOptions {
    pub rhs_factor: Q,
}

impl Default for HaeOptions {
    fn default() -> Self {
        HaeOptions { rhs_factor: q(1, 2) }
    }
}

/// Residuals of both anomaly equations at genus g, in normal form.
pub struct HaeResult {
    pub genus: u32,
    pub first: Poly<Cyc>,
    pub second: Poly<Cyc>,
    /// Whether each left-hand side is itself zero (a vacuous pass).
    pub first_lhs_zero: bool,
    pub second_lhs_zero: bool,
}

impl GraphSum<'_, Symbolic<'_>> {
    pub fn hae(&self, g: u32, opts: &HaeOptions) -> Result<HaeResult, CohftError> {
        if g < 2 {
            return Err(CohftError::Genus(g));
        }
        let fg = self.potential(g, &[])?.value;
        let half = Cyc::from_q(&opts.rhs_factor);
        let rhs = |c: u8| -> Result<Poly<Cyc>, CohftError> {
            let mut r = self.potential(g - 1, &[c, c])?.value;
            for i in 1..g {
                let a = self.potential(g - i, &[c])?.value;
                let b = self.potential(i, &[c])?.value;
                r.add_assign(&a.mul(&b));
            }
            Ok(r.scale(&half))
        };
        // C3/(5L) = L⁴C1⁻²C2⁻²/5 and C2²C3/(5L³) = L²C1⁻²/5
        let pre1 = Poly::term(Mono { c1: -2, c2: -2, l: 4, ..Mono::ONE }, Cyc::from_q(&q(1, 5)));
        let pre2 = Poly::term(Mono { c1: -2, l: 2, ..Mono::ONE }, Cyc::from_q(&q(1, 5)));
        let lhs1 = pre1.mul(&fg.partial_a2());
        let lhs2 = pre2.mul(&fg.partial_d2a1());
        Ok(HaeResult {
            genus: g,
            first_lhs_zero: lhs1.is_zero(),
            second_lhs_zero: lhs2.is_zero(),
            first: lhs1.sub(&rhs(2)?),
            second: lhs2.sub(&rhs(1)?),
        })
    }
}

impl HaeResult {
    pub fn checks(&self, m: Option<&MirrorData>) -> Vec<Check> {
        let g = self.genus;
        let mut out = Vec::new();
        for (name, r, vac) in [("first", &self.first, self.first_lhs_zero), ("second", &self.second, self.second_lhs_zero)] {
            let mut c = Check::new(format!("HAE {name} equation, g = {g} (ring)"), r.is_zero());
            if r.is_zero() && vac {
                c = c.with_note("both sides vanish");
            } else if !r.is_zero() {
                c = c.with_note(format!("{} residual monomials", r.len()));
            }
            out.push(c);
            if let Some(m) = m {
                let ok = r.evaluate(m, m.n).map(|s| s.is_zero()).unwrap_or(false);
                out.push(Check::new(format!("HAE {name} equation, g = {g} (series)"), ok));
            }
        }
        out
    }
}

/// Result of the two t-derivative pipelines.
pub struct TDerivative {
    pub k: usize,
    pub from_graphs: Potential<Poly<Cyc>>,
    pub from_series: Series<Cyc>,
    pub c1_degree_step: Option<i32>,
}

/// ∂^k/∂T^k of F_{g,n}: once as a graph sum with k extra φ1 legs, once as
/// (D/C1)^k on the series form of F_{g,n}.  Disagreement is an error.
pub fn t_derivative(
    gs: &GraphSum<'_, Symbolic<'_>>,
    m: &MirrorData,
    base: &Potential<Poly<Cyc>>,
    k: usize,
) -> Result<TDerivative, CohftError> {
    let mut ins = base.insertions.clone();
    ins.extend(std::iter::repeat_n(1u8, k));
    let from_graphs = if k == 0 { base.clone() } else { gs.potential(base.genus, &ins)? };
    let mut s = ev(&base.value, m)?;
    for _ in 0..k {
        s = d_dt(&s, m)?;
    }
    let lhs = ev(&from_graphs.value, m)?;
    let n = m.n;
    if !(s.order() >= n && lhs.sub(&s).truncate(n).is_zero()) {
        return Err(CohftError::Mismatch { k });
    }
    let c1_degree_step = match (from_graphs.value.c1_inv_degree(), base.value.c1_inv_degree()) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    };
    Ok(TDerivative { k, from_graphs, from_series: s, c1_degree_step })
}

/// Evaluate to an x-series at the working precision (at least order n).
pub fn ev(p: &Poly<Cyc>, m: &MirrorData) -> Result<Series<Cyc>, CohftError> {
    let s = Evaluator::new(m).eval(p);
    s.require_order(m.n)?;
    Ok(s)
}

/// JSON record for one potential.
pub fn potential_json(p: &Potential<Poly<Cyc>>, series: Option<&Series<Cyc>>, order: i64, checks: &[Check]) -> Value {
    json!({
        "genus": p.genus,
        "insertions": p.insertions,
        "ring_element": p.value.to_json(),
        "series": series.map(|s| s.to_json(order)),
        "checks": checks.iter().map(|c| json!({"name": c.name, "residual_zero": c.residual_zero})).collect::<Vec<_>>(),
    })
}
