//! Series coming out of the I-function: the mirror map, L, C1..C3, the
//! K-products, X1, X2, A1, A2, B1..B4, plus the identities among them.

use crate::field::{q, qi, Q};
use crate::report::Check;
use crate::series::{Series, SeriesError};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

/// Extra orders computed beyond the requested N so quotients by series
/// vanishing at x = 0 still leave N exact coefficients.
pub const MARGIN: i64 = 12;

#[derive(Debug, Error)]
pub enum MirrorError {
    #[error("order must be at least {min}, got {got}")]
    OrderTooSmall { min: i64, got: i64 },
    #[error("constructing {what}: {source}")]
    Construction { what: &'static str, source: SeriesError },
    #[error("I-function term x^{m} produced a positive power of z")]
    PositiveZPower { m: i64 },
}

fn ctx<T>(what: &'static str, r: Result<T, SeriesError>) -> Result<T, MirrorError> {
    r.map_err(|source| MirrorError::Construction { what, source })
}

#[derive(Clone, Debug)]
pub struct MirrorData {
    /// Requested order; every check is carried out through x^n.
    pub n: i64,
    /// Internal working order.
    pub w: i64,
    pub i: BTreeMap<i64, Series<Q>>,
    pub t: Series<Q>,
    pub l: Series<Q>,
    pub c1: Series<Q>,
    pub c2: Series<Q>,
    pub c3: Series<Q>,
    pub k: [Series<Q>; 5],
    pub x1: Series<Q>,
    pub x2: Series<Q>,
    pub a1: Series<Q>,
    pub da1: Series<Q>,
    pub d2a1: Series<Q>,
    pub a2: Series<Q>,
    pub b: [Series<Q>; 4],
}

fn factorial(m: i64) -> BigInt {
    (1..=m).fold(BigInt::one(), |acc, k| acc * k)
}

/// I_k(x) for all k, each computed to order `order`.
///
/// The x^m term of the I-function is x^m/(z^m m!) times the product of
/// (1 − (bz)^5) over 0 ≤ b < m/5 with b ≡ m/5 mod 1.  Expanding in z and
/// binning by the surviving power of 1/z gives the I_k.
pub fn build_i_coeffs(order: i64) -> Result<BTreeMap<i64, Series<Q>>, MirrorError> {
    let mut raw: BTreeMap<i64, Vec<Q>> = BTreeMap::new();
    for m in 0..=order {
        let (qq, r) = (m / 5, m % 5);
        // polynomial in w = z^5
        let mut poly = vec![Q::one()];
        for t in 0..qq {
            let b = q(r, 5) + qi(t);
            let b5 = &b * &b * &b * &b * &b;
            let mut next = vec![Q::zero(); poly.len() + 1];
            for (d, c) in poly.iter().enumerate() {
                next[d] += c;
                next[d + 1] -= c * &b5;
            }
            poly = next;
        }
        let fact = Q::from_integer(factorial(m));
        for (d, c) in poly.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = m - 5 * d as i64;
            if k < 0 {
                return Err(MirrorError::PositiveZPower { m });
            }
            raw.entry(k).or_insert_with(|| vec![Q::zero(); (order + 1) as usize])[m as usize] += c / &fact;
        }
    }
    Ok(raw.into_iter().map(|(k, v)| (k, Series::from_coeffs(v))).collect())
}

/// T(x) from the closed form with the exact Γ-ratio Π_{b<k}(b + 1/5).
pub fn mirror_map_closed_form(order: i64) -> Series<Q> {
    let mut c = vec![Q::zero(); (order + 1) as usize];
    let mut gamma = Q::one();
    let mut k = 0;
    while 5 * k < order {
        let g5 = &gamma * &gamma * &gamma * &gamma * &gamma;
        let sign = if k % 2 == 0 { Q::one() } else { -Q::one() };
        c[(5 * k + 1) as usize] = sign * g5 / Q::from_integer(factorial(5 * k + 1));
        gamma *= qi(k) + q(1, 5);
        k += 1;
    }
    Series::from_coeffs(c)
}

/// 1 − L⁵/5⁵ as a series.
pub fn one_minus_l5(l: &Series<Q>) -> Series<Q> {
    let order = l.order();
    Series::one(order).sub(&l.pow(5).scale(&q(1, 3125)))
}

/// The B_i from their definition 5^{−i}(D + X1)^{i−1} X1.
pub fn b_from_definition(x1: &Series<Q>) -> [Series<Q>; 4] {
    let mut cur = x1.clone();
    let mut out = Vec::new();
    for i in 1..=4u32 {
        out.push(cur.scale(&Q::new(1.into(), BigInt::from(5).pow(i))));
        cur = cur.d_op().add(&x1.mul(&cur));
    }
    out.try_into().expect("four entries")
}

pub fn build_all(n: i64) -> Result<MirrorData, MirrorError> {
    if n < 10 {
        return Err(MirrorError::OrderTooSmall { min: 10, got: n });
    }
    let w = n + MARGIN;
    let i = build_i_coeffs(w)?;
    let get = |k: i64| i.get(&k).cloned().unwrap_or_else(|| Series::zero(w));
    let t = get(1);
    let mut u = vec![Q::zero(); (w + 1) as usize];
    u[0] = Q::one();
    u[5] = q(1, 3125);
    let l = ctx("L", Series::from_coeffs(u).frac_pow(&q(-1, 5)))?.shift(1);
    let c1 = t.d_op();
    let c2 = ctx("C2", get(2).d_op().div(&c1))?.d_op();
    let c3 = ctx("C3", ctx("C3", get(3).d_op().div(&c1))?.d_op().div(&c2))?.d_op();
    let k = [
        Series::one(w),
        c1.clone(),
        c1.mul(&c2),
        c1.mul(&c2).mul(&c3),
        c1.mul(&c2).mul(&c2).mul(&c3),
    ];
    let x1 = ctx("X1", c1.d_op().div(&c1))?;
    let x2 = ctx("X2", c2.d_op().div(&c2))?;
    let dll = ctx("DL/L", l.d_op().div(&l))?;
    let a1 = ctx("A1", dll.sub(&x1).div(&l))?;
    let a2 = ctx("A2", dll.scale(&qi(2)).sub(&x1).sub(&x2).div(&l))?;
    let da1 = a1.d_op();
    let d2a1 = da1.d_op();
    let b = b_from_definition(&x1);
    Ok(MirrorData { n, w, i, t, l, c1, c2, c3, k, x1, x2, a1, da1, d2a1, a2, b })
}

/// True when the series vanishes through x^n (and is known that far).
pub fn vanishes_to(s: &Series<Q>, n: i64) -> bool {
    s.order() >= n && s.truncate(n).is_zero()
}

impl MirrorData {
    pub fn one_minus_l5(&self) -> Series<Q> {
        one_minus_l5(&self.l)
    }

    /// Right side of the B4 relation.
    pub fn b4_rhs(&self) -> Series<Q> {
        let w = self.w;
        let inner = self.b[2]
            .scale(&qi(2))
            .sub(&self.b[1].scale(&q(7, 5)))
            .add(&self.b[0].scale(&q(2, 5)))
            .sub(&Series::constant(q(24, 625), w));
        self.one_minus_l5().mul(&inner)
    }

    pub fn dx2_rhs(&self) -> Series<Q> {
        let t = self.one_minus_l5();
        let (x1, x2) = (&self.x1, &self.x2);
        t.scale(&qi(-10))
            .add(&t.mul(x1).scale(&qi(10)))
            .add(&t.mul(x2).scale(&qi(5)))
            .sub(&x1.mul(x1).scale(&qi(2)))
            .sub(&x1.d_op().scale(&qi(4)))
            .sub(&x1.mul(x2).scale(&qi(2)))
            .sub(&x2.mul(x2))
    }

    /// DA2 = L·A1² + L·A2² − 3·DA1 − 15(1 − L⁵/5⁵)L⁴/5⁵, the form that
    /// actually follows from the DX2 relation.
    pub fn da2_rhs(&self) -> Series<Q> {
        let (l, a1, a2) = (&self.l, &self.a1, &self.a2);
        l.mul(a1).mul(a1)
            .add(&l.mul(a2).mul(a2))
            .sub(&self.da1.scale(&qi(3)))
            .sub(&self.one_minus_l5().mul(&l.pow(4)).scale(&q(15, 3125)))
    }

    /// The variant with −DA1 and L⁵/5⁵; kept to document that it is not an identity.
    pub fn da2_rhs_misprinted(&self) -> Series<Q> {
        let (l, a1, a2) = (&self.l, &self.a1, &self.a2);
        l.mul(a1).mul(a1)
            .add(&l.mul(a2).mul(a2))
            .sub(&self.da1)
            .sub(&self.one_minus_l5().mul(&l.pow(5)).scale(&q(15, 3125)))
    }

    pub fn misprinted_da2_residual(&self) -> Series<Q> {
        self.a2.d_op().sub(&self.da2_rhs_misprinted())
    }

    /// Residual series of every identity among the mirror series, each of
    /// which must vanish through order n.
    pub fn residuals(&self) -> Vec<(&'static str, Series<Q>)> {
        let t = self.one_minus_l5();
        let l = &self.l;
        let mut v = vec![
            ("DL/L = 1 - L^5/5^5", self.l.d_op().div(l).map(|s| s.sub(&t)).unwrap_or_else(|_| Series::one(0))),
            ("C1^2 C2^2 C3 = L^5", self.c1.mul(&self.c1).mul(&self.c2).mul(&self.c2).mul(&self.c3).sub(&l.pow(5))),
            ("B4 relation", self.b[3].sub(&self.b4_rhs())),
            ("DX2 relation", self.x2.d_op().sub(&self.dx2_rhs())),
            ("DA2 rewrite", self.a2.d_op().sub(&self.da2_rhs())),
            ("X1 = (1 - L^5/5^5) - L A1", self.x1.sub(&t.sub(&l.mul(&self.a1)))),
            ("X2 = (1 - L^5/5^5) + L A1 - L A2", self.x2.sub(&t.add(&l.mul(&self.a1)).sub(&l.mul(&self.a2)))),
            ("I_0 = 1", self.i[&0].sub(&Series::one(self.w))),
            ("T matches closed form", self.t.sub(&mirror_map_closed_form(self.w))),
            ("K4 = C1 C2^2 C3", self.k[4].sub(&self.c1.mul(&self.c2).mul(&self.c2).mul(&self.c3))),
        ];
        let b = b_from_definition(&self.x1);
        for (j, bj) in b.iter().enumerate() {
            let name = ["B1 recomputed", "B2 recomputed", "B3 recomputed", "B4 recomputed"][j];
            v.push((name, bj.sub(&self.b[j])));
        }
        v
    }

    pub fn check_identities(&self) -> Vec<Check> {
        let mut out: Vec<Check> = self
            .residuals()
            .into_iter()
            .map(|(name, r)| {
                let ok = vanishes_to(&r, self.n);
                let c = Check::new(name, ok);
                if ok {
                    c
                } else {
                    c.with_note(format!("lowest nonzero power {:?}, known to {}", r.valuation(), r.order()))
                }
            })
            .collect();
        let t = &self.t;
        out.push(Check::new(
            "mirror map T = x + O(x^2)",
            t.coeff(0).is_zero() && t.coeff(1) == Q::one(),
        ));
        out
    }

    /// Named series for emission, in a fixed order.
    pub fn named(&self) -> Vec<(String, &Series<Q>)> {
        let mut v: Vec<(String, &Series<Q>)> = vec![
            ("T".into(), &self.t),
            ("L".into(), &self.l),
            ("C1".into(), &self.c1),
            ("C2".into(), &self.c2),
            ("C3".into(), &self.c3),
            ("X1".into(), &self.x1),
            ("X2".into(), &self.x2),
            ("A1".into(), &self.a1),
            ("A2".into(), &self.a2),
        ];
        for (j, b) in self.b.iter().enumerate() {
            v.push((format!("B{}", j + 1), b));
        }
        for (j, k) in self.k.iter().enumerate() {
            v.push((format!("K{j}"), k));
        }
        for (k, s) in self.i.range(0..=4) {
            v.push((format!("I{k}"), s));
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i_function_small_terms() {
        let i = build_i_coeffs(12).unwrap();
        assert_eq!(i[&0], Series::one(12));
        assert_eq!(i[&1].coeff(6), q(-1, 2_250_000));
        assert_eq!(i[&2].coeff(2), q(1, 2));
        for k in 3..7 {
            assert!(i[&2].coeff(k).is_zero());
        }
    }

    #[test]
    fn first_terms_of_l_and_c1() {
        let m = build_all(12).unwrap();
        assert_eq!(m.l.coeffs(0, 6), vec![qi(0), qi(1), qi(0), qi(0), qi(0), qi(0), q(-1, 15625)]);
        assert_eq!(m.c1.coeff(1), qi(1));
        assert_eq!(m.c1.coeff(6), q(-1, 375_000));
        assert_eq!(m.x1.coeff(0), qi(1));
    }

    #[test]
    fn identities_hold_at_small_order() {
        let m = build_all(20).unwrap();
        for c in m.check_identities() {
            assert!(c.residual_zero, "{c:?}");
        }
    }

    #[test]
    fn misprinted_da2_is_not_an_identity() {
        let m = build_all(15).unwrap();
        let r = m.misprinted_da2_residual();
        assert!(!vanishes_to(&r, 15));
    }

    #[test]
    fn orders_survive_the_divisions() {
        let m = build_all(20).unwrap();
        for (name, s) in m.named() {
            assert!(s.order() >= 20, "{name} known only to {}", s.order());
        }
    }
}
