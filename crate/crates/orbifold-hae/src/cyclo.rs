//! Exact arithmetic in Q(ζ) with ζ a primitive fifth root of unity.
//!
//! Elements are stored in the basis {1, ζ, ζ², ζ³}; ζ⁴ is rewritten as
//! −(1 + ζ + ζ² + ζ³) eagerly, so equality is coordinate-wise.

use crate::field::{q_from_str, q_to_string, qi, Field, Q};
use num_traits::ToPrimitive;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Cyc {
    pub c: [Q; 4],
}

impl Cyc {
    pub fn new(c0: Q, c1: Q, c2: Q, c3: Q) -> Self {
        Cyc { c: [c0, c1, c2, c3] }
    }

    pub fn rational(x: Q) -> Self {
        Cyc::new(x, Q::zero(), Q::zero(), Q::zero())
    }

    /// Reduce a polynomial in ζ (any length) to the basis.
    pub fn from_poly(p: &[Q]) -> Self {
        let mut r: [Q; 5] = Default::default();
        for (i, x) in p.iter().enumerate() {
            r[i % 5] += x;
        }
        let t = r[4].clone();
        Cyc::new(&r[0] - &t, &r[1] - &t, &r[2] - &t, &r[3] - &t)
    }

    /// The image under the Galois automorphism ζ ↦ ζ^k (k coprime to 5).
    pub fn galois(&self, k: u32) -> Self {
        assert!(!k.is_multiple_of(5), "ζ ↦ ζ^{k} is not an automorphism");
        let mut p = vec![Q::zero(); 5];
        for (i, x) in self.c.iter().enumerate() {
            p[(i * k as usize) % 5] += x;
        }
        Cyc::from_poly(&p)
    }

    /// Field norm to Q: the product of the four conjugates.
    pub fn norm(&self) -> Q {
        let n = self
            .mul_ref(&self.galois(2))
            .mul_ref(&self.galois(3))
            .mul_ref(&self.galois(4));
        debug_assert!(n.c[1..].iter().all(|x| x.is_zero()));
        n.c[0].clone()
    }

    /// Embedding ζ ↦ exp(2πi/5); smoke tests only.
    pub fn to_complex(&self) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (i, x) in self.c.iter().enumerate() {
            let a = 2.0 * std::f64::consts::PI * i as f64 / 5.0;
            let v = x.to_f64().unwrap_or(f64::NAN);
            re += v * a.cos();
            im += v * a.sin();
        }
        (re, im)
    }
}

/// ζ^{n mod 5}.
pub fn zeta_pow(n: i64) -> Cyc {
    let e = n.rem_euclid(5) as usize;
    let mut p = vec![Q::zero(); 5];
    p[e] = qi(1);
    Cyc::from_poly(&p)
}

/// Σ_{p=0}^{4} ζ^{e·p}: 5 when 5 | e, else 0.
pub fn character_sum(e: i64) -> Cyc {
    let mut s = Cyc::zero();
    for p in 0..5 {
        s.add_assign_ref(&zeta_pow(e * p));
    }
    s
}

impl Field for Cyc {
    fn zero() -> Self {
        Cyc::rational(Q::zero())
    }
    fn one() -> Self {
        Cyc::rational(qi(1))
    }
    fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }
    fn add_ref(&self, o: &Self) -> Self {
        Cyc::new(
            &self.c[0] + &o.c[0],
            &self.c[1] + &o.c[1],
            &self.c[2] + &o.c[2],
            &self.c[3] + &o.c[3],
        )
    }
    fn sub_ref(&self, o: &Self) -> Self {
        Cyc::new(
            &self.c[0] - &o.c[0],
            &self.c[1] - &o.c[1],
            &self.c[2] - &o.c[2],
            &self.c[3] - &o.c[3],
        )
    }
    fn mul_ref(&self, o: &Self) -> Self {
        if self.c[1..].iter().all(|x| x.is_zero()) {
            return o.scale(&self.c[0]);
        }
        if o.c[1..].iter().all(|x| x.is_zero()) {
            return self.scale(&o.c[0]);
        }
        let mut p = vec![Q::zero(); 7];
        for i in 0..4 {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..4 {
                p[i + j] += &self.c[i] * &o.c[j];
            }
        }
        Cyc::from_poly(&p)
    }
    fn neg_ref(&self) -> Self {
        Cyc::new(-&self.c[0], -&self.c[1], -&self.c[2], -&self.c[3])
    }
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        // a⁻¹ = σ₂(a)σ₃(a)σ₄(a) / N(a)
        let co = self.galois(2).mul_ref(&self.galois(3)).mul_ref(&self.galois(4));
        let n = self.mul_ref(&co);
        debug_assert!(n.c[1..].iter().all(|x| x.is_zero()));
        Some(co.scale(&n.c[0].recip()))
    }
    fn from_q(x: &Q) -> Self {
        Cyc::rational(x.clone())
    }
    fn as_q(&self) -> Option<Q> {
        if self.c[1..].iter().all(|x| x.is_zero()) {
            Some(self.c[0].clone())
        } else {
            None
        }
    }
    fn scale(&self, x: &Q) -> Self {
        Cyc::new(&self.c[0] * x, &self.c[1] * x, &self.c[2] * x, &self.c[3] * x)
    }
    fn coords(&self) -> Vec<String> {
        self.c.iter().map(q_to_string).collect()
    }
    fn add_assign_ref(&mut self, o: &Self) {
        for i in 0..4 {
            self.c[i] += &o.c[i];
        }
    }
}

impl fmt::Display for Cyc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(x) = self.as_q() {
            return write!(f, "{x}");
        }
        let mut parts = Vec::new();
        for (i, x) in self.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            parts.push(match i {
                0 => format!("{x}"),
                1 => format!("({x})z"),
                _ => format!("({x})z^{i}"),
            });
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl Serialize for Cyc {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<String> = self.coords();
        (&v[0], &v[1], &v[2], &v[3]).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cyc {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (a, b, c, e): (String, String, String, String) = Deserialize::deserialize(d)?;
        let p = |s: &str| q_from_str(s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")));
        Ok(Cyc::new(p(&a)?, p(&b)?, p(&c)?, p(&e)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::q;

    fn z() -> Cyc {
        zeta_pow(1)
    }

    #[test]
    fn zeta_times_zeta4_is_one() {
        assert_eq!(z().mul_ref(&zeta_pow(4)), Cyc::one());
    }

    #[test]
    fn minimal_polynomial_kills_everything() {
        let mut s = Cyc::zero();
        for k in 0..5 {
            s = s.add_ref(&zeta_pow(k));
        }
        assert!(s.is_zero());
        let x = Cyc::new(q(3, 7), q(-1, 2), qi(5), q(2, 9));
        assert!(s.mul_ref(&x).is_zero());
    }

    #[test]
    fn zeta_squared_squared() {
        let z4 = zeta_pow(2).mul_ref(&zeta_pow(2));
        assert_eq!(z4, Cyc::new(qi(-1), qi(-1), qi(-1), qi(-1)));
    }

    #[test]
    fn inverses() {
        assert_eq!(z().inv().unwrap(), zeta_pow(4));
        assert_eq!(Cyc::from_i64(2).inv().unwrap(), Cyc::rational(q(1, 2)));
        let a = Cyc::one().add_ref(&z());
        assert_eq!(a.mul_ref(&a.inv().unwrap()), Cyc::one());
        assert!(Cyc::zero().inv().is_none());
    }

    #[test]
    fn zeta_pow_reduces_exponent() {
        assert_eq!(zeta_pow(0), Cyc::one());
        assert_eq!(zeta_pow(7), zeta_pow(2));
        assert_eq!(zeta_pow(-1), zeta_pow(4));
    }

    #[test]
    fn character_sums() {
        assert_eq!(character_sum(0), Cyc::from_i64(5));
        assert_eq!(character_sum(10), Cyc::from_i64(5));
        for e in [1, 2, 3, 4, -1, 6] {
            assert!(character_sum(e).is_zero());
        }
    }

    #[test]
    fn json_is_four_strings() {
        let a = Cyc::new(q(1, 2), qi(0), q(-3, 4), qi(7));
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"["1/2","0/1","-3/4","7/1"]"#);
        let b: Cyc = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn complex_embedding_smoke() {
        let a = Cyc::new(q(1, 3), q(2, 5), qi(-1), q(1, 7));
        let b = a.inv().unwrap();
        let (ar, ai) = a.to_complex();
        let (br, bi) = b.to_complex();
        let re = ar * br - ai * bi;
        let im = ar * bi + ai * br;
        assert!((re - 1.0).abs() < 1e-9 && im.abs() < 1e-9);
    }
}
