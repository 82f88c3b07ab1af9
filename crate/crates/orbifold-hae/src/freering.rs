//! The ring C[L^±1][A1, DA1, D²A1, A2] and its extension by C1^±1, C2^±1.
//!
//! One sparse type, `Poly`, covers the whole tower; membership in the
//! Laurent ring or in F is a property of the exponents present.  C3 never
//! appears: it is rewritten as L⁵C1⁻²C2⁻² on the way in.

use crate::field::{q, q_from_str, qi, Field, Q};
use crate::mirror::MirrorData;
use crate::series::{coeff_json, Series};
use serde_json::{json, Value};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::OnceLock;
use thiserror::Error;

/// The four free generators, in exponent-slot order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gen {
    A1 = 0,
    DA1 = 1,
    D2A1 = 2,
    A2 = 3,
}

impl Gen {
    pub const ALL: [Gen; 4] = [Gen::A1, Gen::DA1, Gen::D2A1, Gen::A2];

    pub fn name(self) -> &'static str {
        ["A1", "DA1", "D2A1", "A2"][self as usize]
    }
}

/// Exponents of one monomial C1^c1 C2^c2 A^a L^l.  Field order gives the
/// normal-form ordering (C1-exp, C2-exp, A-multidegree, L-exp).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mono {
    pub c1: i16,
    pub c2: i16,
    pub a: [u16; 4],
    pub l: i32,
}

impl Mono {
    pub const ONE: Mono = Mono { c1: 0, c2: 0, a: [0; 4], l: 0 };

    pub fn l(e: i32) -> Self {
        Mono { l: e, ..Mono::ONE }
    }

    pub fn gen(g: Gen) -> Self {
        let mut m = Mono::ONE;
        m.a[g as usize] = 1;
        m
    }

    pub fn times(self, o: Mono) -> Mono {
        Mono {
            c1: self.c1 + o.c1,
            c2: self.c2 + o.c2,
            a: [self.a[0] + o.a[0], self.a[1] + o.a[1], self.a[2] + o.a[2], self.a[3] + o.a[3]],
            l: self.l + o.l,
        }
    }

    pub fn a_degree(&self) -> u32 {
        self.a.iter().map(|&x| x as u32).sum()
    }

    fn render(&self) -> String {
        let mut parts = Vec::new();
        let mut push = |name: &str, e: i64| {
            if e == 1 {
                parts.push(name.to_string());
            } else if e != 0 {
                parts.push(format!("{name}^{e}"));
            }
        };
        push("C1", self.c1 as i64);
        push("C2", self.c2 as i64);
        for g in Gen::ALL {
            push(g.name(), self.a[g as usize] as i64);
        }
        push("L", self.l as i64);
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" ")
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<C> {
    terms: BTreeMap<Mono, C>,
}

/// Elements of F (no C1, C2 exponents).
pub type FElem<C> = Poly<C>;
/// Elements of F[C1^±1, C2^±1] with C3 eliminated.
pub type ExtElem<C> = Poly<C>;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("evaluation known only to order {have}, {needed} requested")]
    Precision { needed: i64, have: i64 },
}

impl<C: Field> Default for Poly<C> {
    fn default() -> Self {
        Poly { terms: BTreeMap::new() }
    }
}

impl<C: Field> Poly<C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(m: Mono, c: C) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn constant(c: C) -> Self {
        Self::term(Mono::ONE, c)
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn l_pow(e: i32) -> Self {
        Self::term(Mono::l(e), C::one())
    }

    pub fn gen(g: Gen) -> Self {
        Self::term(Mono::gen(g), C::one())
    }

    /// C1^a C2^b.
    pub fn c_pow(a: i16, b: i16) -> Self {
        Self::term(Mono { c1: a, c2: b, ..Mono::ONE }, C::one())
    }

    /// C3 in eliminated form L⁵C1⁻²C2⁻².
    pub fn c3() -> Self {
        Self::term(Mono { c1: -2, c2: -2, l: 5, ..Mono::ONE }, C::one())
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Mono, C)>) -> Self {
        let mut acc: HashMap<Mono, C> = HashMap::new();
        for (m, c) in it {
            match acc.get_mut(&m) {
                Some(x) => x.add_assign_ref(&c),
                None => {
                    acc.insert(m, c);
                }
            }
        }
        Poly { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Mono) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut t = self.terms.clone();
        for (m, c) in &o.terms {
            let e = t.entry(*m).or_insert_with(C::zero);
            e.add_assign_ref(c);
            if e.is_zero() {
                t.remove(m);
            }
        }
        Poly { terms: t }
    }

    pub fn add_assign(&mut self, o: &Self) {
        for (m, c) in &o.terms {
            let e = self.terms.entry(*m).or_insert_with(C::zero);
            e.add_assign_ref(c);
            if e.is_zero() {
                self.terms.remove(m);
            }
        }
    }

    pub fn neg(&self) -> Self {
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, c.neg_ref())).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, a: &C) -> Self {
        if a.is_zero() {
            return Self::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, c.mul_ref(a))).collect() }
    }

    pub fn scale_q(&self, a: &Q) -> Self {
        if *a == qi(0) {
            return Self::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, c.scale(a))).collect() }
    }

    /// Multiply every monomial by `m`.
    pub fn shift(&self, m: Mono) -> Self {
        Poly { terms: self.terms.iter().map(|(k, c)| (k.times(m), c.clone())).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut acc: HashMap<Mono, C> = HashMap::with_capacity(self.len() * o.len());
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let p = c1.mul_ref(c2);
                match acc.entry(m1.times(*m2)) {
                    std::collections::hash_map::Entry::Occupied(mut e) => e.get_mut().add_assign_ref(&p),
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(p);
                    }
                }
            }
        }
        Poly { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    /// Product with a rational-coefficient element.
    pub fn mul_q(&self, o: &Poly<Q>) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut acc: HashMap<Mono, C> = HashMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let p = c1.scale(c2);
                match acc.entry(m1.times(*m2)) {
                    std::collections::hash_map::Entry::Occupied(mut e) => e.get_mut().add_assign_ref(&p),
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(p);
                    }
                }
            }
        }
        Poly { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::one();
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    pub fn map<D: Field>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, f(c))).filter(|(_, c)| !c.is_zero()).collect() }
    }

    /// True when only powers of L occur.
    pub fn is_laurent(&self) -> bool {
        self.terms.keys().all(|m| m.c1 == 0 && m.c2 == 0 && m.a == [0; 4])
    }

    /// True when no C1, C2 exponents occur (membership in F).
    pub fn in_f(&self) -> bool {
        self.terms.keys().all(|m| m.c1 == 0 && m.c2 == 0)
    }

    /// Largest power of C1⁻¹ present, `None` for zero.
    pub fn c1_inv_degree(&self) -> Option<i32> {
        self.terms.keys().map(|m| -(m.c1 as i32)).max()
    }

    /// Smallest power of C1⁻¹ present, `None` for zero.
    pub fn c1_inv_min_degree(&self) -> Option<i32> {
        self.terms.keys().map(|m| -(m.c1 as i32)).min()
    }

    /// Largest total degree in the A-generators.
    pub fn a_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.a_degree()).max()
    }

    /// Range of L-exponents present.
    pub fn l_range(&self) -> Option<(i32, i32)> {
        let lo = self.terms.keys().map(|m| m.l).min()?;
        let hi = self.terms.keys().map(|m| m.l).max()?;
        Some((lo, hi))
    }

    /// All coefficients rational?
    pub fn is_rational(&self) -> bool {
        self.terms.values().all(|c| c.as_q().is_some())
    }

    /// Formal partial derivative with respect to a free generator.
    pub fn partial(&self, g: Gen) -> Self {
        let i = g as usize;
        Self::from_terms(self.terms.iter().filter(|(m, _)| m.a[i] > 0).map(|(m, c)| {
            let mut m2 = *m;
            m2.a[i] -= 1;
            (m2, c.scale(&qi(m.a[i] as i64)))
        }))
    }

    pub fn partial_a2(&self) -> Self {
        self.partial(Gen::A2)
    }

    pub fn partial_d2a1(&self) -> Self {
        self.partial(Gen::D2A1)
    }

    /// The derivation D, closed on the ring through the rewrite rules.
    pub fn d_derive(&self) -> Self {
        let r = rules();
        let mut acc: HashMap<Mono, C> = HashMap::new();
        let mut push = |m: Mono, c: C| match acc.entry(m) {
            std::collections::hash_map::Entry::Occupied(mut e) => e.get_mut().add_assign_ref(&c),
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        };
        for (m, c) in &self.terms {
            // logarithmic part: l·DL/L + c1·X1 + c2·X2
            let mut log = Poly::<Q>::zero();
            if m.l != 0 {
                log.add_assign(&r.dl_over_l.scale_q(&qi(m.l as i64)));
            }
            if m.c1 != 0 {
                log.add_assign(&r.x1.scale_q(&qi(m.c1 as i64)));
            }
            if m.c2 != 0 {
                log.add_assign(&r.x2.scale_q(&qi(m.c2 as i64)));
            }
            for (m2, c2) in log.terms() {
                push(m.times(*m2), c.scale(c2));
            }
            for g in Gen::ALL {
                let e = m.a[g as usize];
                if e == 0 {
                    continue;
                }
                let mut base = *m;
                base.a[g as usize] -= 1;
                let k = qi(e as i64);
                for (m2, c2) in r.d_gen[g as usize].terms() {
                    push(base.times(*m2), c.scale(&(c2 * &k)));
                }
            }
        }
        Poly { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    /// Substitute the mirror series for L, A1, DA1, D²A1, A2, C1, C2.
    /// Fails if the result is not known through order `n`.
    pub fn evaluate(&self, m: &MirrorData, n: i64) -> Result<Series<C>, EvalError> {
        let mut ev = Evaluator::new(m);
        let s = ev.eval(self);
        if s.order() < n {
            return Err(EvalError::Precision { needed: n, have: s.order() });
        }
        Ok(s.truncate(n))
    }

    /// Normal-form monomial list for JSON.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(m, c)| {
                    json!({"c1": m.c1, "c2": m.c2, "a1": m.a[0], "da1": m.a[1], "d2a1": m.a[2], "a2": m.a[3], "l": m.l, "coeff": coeff_json(c)})
                })
                .collect(),
        )
    }
}

impl Poly<Q> {
    /// Inverse of `to_json` for rational coefficients (used by caches).
    pub fn from_json(v: &Value) -> Option<Self> {
        let mut out = Vec::new();
        for t in v.as_array()? {
            let g = |k: &str| t.get(k).and_then(Value::as_i64);
            let m = Mono {
                c1: g("c1")? as i16,
                c2: g("c2")? as i16,
                a: [g("a1")? as u16, g("da1")? as u16, g("d2a1")? as u16, g("a2")? as u16],
                l: g("l")? as i32,
            };
            out.push((m, q_from_str(t.get("coeff")?.as_str()?)?));
        }
        Some(Poly::from_terms(out))
    }
}

impl<C: Field> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("({c}) {}", m.render())).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Images of the generators under D, as rational elements.
pub struct Rules {
    pub dl_over_l: Poly<Q>,
    pub x1: Poly<Q>,
    pub x2: Poly<Q>,
    /// D of A1, DA1, D²A1, A2 respectively.
    pub d_gen: [Poly<Q>; 4],
}

/// 1 − L⁵/5⁵.
pub fn one_minus_l5() -> Poly<Q> {
    Poly::one().sub(&Poly::term(Mono::l(5), q(1, 3125)))
}

/// D³A1 expressed in F; derived from the B4 relation after the linear
/// change X1 = (1 − L⁵/5⁵) − L·A1.
pub const D3A1_RULE: &[((i64, i64), [u16; 4], i32)] = &[
    ((1, 1), [4, 0, 0, 0], 3),
    ((-6, 1), [2, 1, 0, 0], 2),
    ((3, 1953125), [2, 0, 0, 0], 11),
    ((-3, 625), [2, 0, 0, 0], 6),
    ((4, 1), [1, 0, 1, 0], 1),
    ((4, 3125), [1, 1, 0, 0], 6),
    ((-4, 1), [1, 1, 0, 0], 1),
    ((24, 6103515625), [1, 0, 0, 0], 15),
    ((-33, 1953125), [1, 0, 0, 0], 10),
    ((9, 625), [1, 0, 0, 0], 5),
    ((-3, 3125), [0, 0, 1, 0], 5),
    ((3, 1), [0, 0, 1, 0], 0),
    ((3, 1), [0, 2, 0, 0], 1),
    ((-12, 9765625), [0, 1, 0, 0], 10),
    ((14, 3125), [0, 1, 0, 0], 5),
    ((-2, 1), [0, 1, 0, 0], 0),
    ((396, 95367431640625), [0, 0, 0, 0], 19),
    ((-714, 30517578125), [0, 0, 0, 0], 14),
    ((341, 9765625), [0, 0, 0, 0], 9),
    ((-23, 3125), [0, 0, 0, 0], 4),
];

fn table_poly(t: &[((i64, i64), [u16; 4], i32)]) -> Poly<Q> {
    Poly::from_terms(t.iter().map(|&((n, d), a, l)| (Mono { a, l, ..Mono::ONE }, q(n, d))))
}

pub fn d3a1_rule() -> Poly<Q> {
    table_poly(D3A1_RULE)
}

/// DA2 = L·A1² + L·A2² − 3·DA1 − 15(1 − L⁵/5⁵)L⁴/5⁵.
pub fn da2_rule() -> Poly<Q> {
    let l = Poly::<Q>::l_pow(1);
    let a1 = Poly::<Q>::gen(Gen::A1);
    let a2 = Poly::<Q>::gen(Gen::A2);
    l.mul(&a1).mul(&a1)
        .add(&l.mul(&a2).mul(&a2))
        .sub(&Poly::gen(Gen::DA1).scale_q(&qi(3)))
        .sub(&one_minus_l5().mul(&Poly::term(Mono::l(4), q(15, 3125))))
}

pub fn rules() -> &'static Rules {
    static R: OnceLock<Rules> = OnceLock::new();
    R.get_or_init(|| {
        let t = one_minus_l5();
        let la1 = Poly::term(Mono { l: 1, a: [1, 0, 0, 0], ..Mono::ONE }, qi(1));
        let la2 = Poly::term(Mono { l: 1, a: [0, 0, 0, 1], ..Mono::ONE }, qi(1));
        Rules {
            dl_over_l: t.clone(),
            x1: t.sub(&la1),
            x2: t.add(&la1).sub(&la2),
            d_gen: [Poly::gen(Gen::DA1), Poly::gen(Gen::D2A1), d3a1_rule(), da2_rule()],
        }
    })
}

/// Caches powers of the mirror series while evaluating ring elements.
pub struct Evaluator<'a> {
    m: &'a MirrorData,
    l_pows: HashMap<i32, Series<Q>>,
    c1_pows: HashMap<i16, Series<Q>>,
    c2_pows: HashMap<i16, Series<Q>>,
    a_pows: HashMap<(usize, u16), Series<Q>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(m: &'a MirrorData) -> Self {
        Evaluator { m, l_pows: HashMap::new(), c1_pows: HashMap::new(), c2_pows: HashMap::new(), a_pows: HashMap::new() }
    }

    fn int_pow(base: &Series<Q>, e: i64, w: i64) -> Series<Q> {
        if e == 0 {
            return Series::one(w);
        }
        let b = if e > 0 { base.clone() } else { base.inv().expect("mirror series are nonzero") };
        b.pow(e.unsigned_abs() as u32)
    }

    fn l_pow(&mut self, e: i32) -> Series<Q> {
        let (m, w) = (self.m, self.m.w);
        self.l_pows.entry(e).or_insert_with(|| Self::int_pow(&m.l, e as i64, w)).clone()
    }

    fn c_pow(&mut self, which: u8, e: i16) -> Series<Q> {
        let (m, w) = (self.m, self.m.w);
        let (cache, base) = if which == 1 { (&mut self.c1_pows, &m.c1) } else { (&mut self.c2_pows, &m.c2) };
        cache.entry(e).or_insert_with(|| Self::int_pow(base, e as i64, w)).clone()
    }

    fn a_pow(&mut self, i: usize, e: u16) -> Series<Q> {
        let m = self.m;
        let base = [&m.a1, &m.da1, &m.d2a1, &m.a2][i];
        self.a_pows.entry((i, e)).or_insert_with(|| Self::int_pow(base, e as i64, m.w)).clone()
    }

    pub fn eval_mono(&mut self, mo: &Mono) -> Series<Q> {
        let mut s = self.l_pow(mo.l);
        if mo.c1 != 0 {
            s = s.mul(&self.c_pow(1, mo.c1));
        }
        if mo.c2 != 0 {
            s = s.mul(&self.c_pow(2, mo.c2));
        }
        for i in 0..4 {
            if mo.a[i] > 0 {
                s = s.mul(&self.a_pow(i, mo.a[i]));
            }
        }
        s
    }

    pub fn eval<C: Field>(&mut self, p: &Poly<C>) -> Series<C> {
        let mut acc = Series::<C>::zero(self.m.w + 64);
        for (mo, c) in p.terms() {
            let s = self.eval_mono(mo);
            acc = acc.add(&s.map(|x| c.scale(x)));
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mirror::build_all;

    type P = Poly<Q>;

    #[test]
    fn d_of_l() {
        let d = P::l_pow(1).d_derive();
        assert_eq!(d, P::l_pow(1).sub(&P::term(Mono::l(6), q(1, 3125))));
    }

    #[test]
    fn d_renames_generators() {
        assert_eq!(P::gen(Gen::A1).d_derive(), P::gen(Gen::DA1));
        assert_eq!(P::gen(Gen::DA1).d_derive(), P::gen(Gen::D2A1));
    }

    #[test]
    fn partials() {
        let a2 = P::gen(Gen::A2);
        assert_eq!(a2.mul(&a2).partial_a2(), a2.scale_q(&qi(2)));
        let x = P::term(Mono { l: 3, a: [0, 1, 0, 0], ..Mono::ONE }, qi(1));
        assert!(x.partial_a2().is_zero());
        assert_eq!(P::gen(Gen::D2A1).partial_d2a1(), P::one());
        assert!(P::gen(Gen::A1).mul(&P::gen(Gen::DA1)).partial_d2a1().is_zero());
    }

    #[test]
    fn d_commutes_with_evaluation() {
        let m = build_all(24).unwrap();
        let samples = [
            P::gen(Gen::A2),
            P::gen(Gen::D2A1),
            P::gen(Gen::A1).mul(&P::gen(Gen::A2)),
            P::term(Mono { l: -1, a: [0, 1, 0, 0], ..Mono::ONE }, qi(1)),
            P::c_pow(-1, 2).mul(&P::gen(Gen::A1)),
            P::c3(),
        ];
        for f in samples {
            let lhs = f.d_derive().evaluate(&m, 20).unwrap();
            let rhs = f.evaluate(&m, 21).unwrap().d_op().truncate(20);
            assert_eq!(lhs, rhs, "D mismatch on {f}");
        }
    }

    #[test]
    fn eliminated_c3_evaluates_to_c3() {
        let m = build_all(24).unwrap();
        let c3 = P::c3().evaluate(&m, 20).unwrap();
        assert_eq!(c3, m.c3.truncate(20));
        let k = P::c_pow(2, 2).mul(&P::c3()).evaluate(&m, 20).unwrap();
        assert_eq!(k, m.l.pow(5).truncate(20));
    }

    #[test]
    fn json_round_trip() {
        let p = P::c_pow(-1, 0).mul(&P::term(Mono { l: 2, a: [1, 0, 0, 2], ..Mono::ONE }, q(-3, 7))).add(&P::one());
        assert_eq!(P::from_json(&p.to_json()).unwrap(), p);
    }
}
