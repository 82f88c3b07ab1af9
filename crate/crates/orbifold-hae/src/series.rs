//! Truncated Laurent series in x with exact precision tracking.
//!
//! A `Series` stores the coefficients of x^lo .. x^N and is exact modulo
//! x^{N+1}.  Products and quotients compute the precision they can
//! actually guarantee from the operands' valuations, so a division by a
//! series with a zero at x = 0 visibly costs orders instead of silently
//! producing wrong tail coefficients.

use crate::field::{Field, Q};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("series has zero constant term")]
    ZeroConstantTerm,
    #[error("series is zero to its known order")]
    ZeroSeries,
    #[error("expected a power series (no negative powers of x), lowest power is {0}")]
    NotPowerSeries(i64),
    #[error("reversion needs f(0) = 0 and f'(0) != 0")]
    NotInvertibleMap,
    #[error("frac_pow needs constant term 1")]
    NotUnitLeading,
    #[error("precision exhausted: needed order {needed}, have {have}")]
    Precision { needed: i64, have: i64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series<C> {
    lo: i64,
    c: Vec<C>,
}

impl<C: Field> Series<C> {
    /// Power series with the given coefficients of x^0..x^{len-1}.
    pub fn from_coeffs(c: Vec<C>) -> Self {
        Self::from_parts(0, c)
    }

    /// Coefficients of x^lo.. ; exact modulo x^{lo + len}.
    pub fn from_parts(lo: i64, c: Vec<C>) -> Self {
        let mut s = Series { lo, c };
        s.normalize();
        s
    }

    pub fn zero(order: i64) -> Self {
        Series { lo: order + 1, c: Vec::new() }
    }

    pub fn constant(a: C, order: i64) -> Self {
        Self::monomial(a, 0, order)
    }

    pub fn one(order: i64) -> Self {
        Self::constant(C::one(), order)
    }

    /// a·x^e known to order N.
    pub fn monomial(a: C, e: i64, order: i64) -> Self {
        if e > order || a.is_zero() {
            return Self::zero(order);
        }
        let mut c = vec![C::zero(); (order - e + 1) as usize];
        c[0] = a;
        Series { lo: e, c }
    }

    fn normalize(&mut self) {
        let k = self.c.iter().take_while(|x| x.is_zero()).count();
        if k > 0 {
            self.c.drain(..k);
            self.lo += k as i64;
        }
    }

    /// Largest N with the series exact modulo x^{N+1}.
    pub fn order(&self) -> i64 {
        self.lo + self.c.len() as i64 - 1
    }

    fn prec(&self) -> i64 {
        self.lo + self.c.len() as i64
    }

    /// Lowest power with a nonzero coefficient, `None` if zero to its order.
    pub fn valuation(&self) -> Option<i64> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.lo)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Coefficient of x^k.  Panics above the known order.
    pub fn coeff(&self, k: i64) -> C {
        assert!(k <= self.order(), "coefficient x^{k} beyond order {}", self.order());
        if k < self.lo {
            C::zero()
        } else {
            self.c[(k - self.lo) as usize].clone()
        }
    }

    /// Coefficients of x^from ..= x^to (zeros below the valuation).
    pub fn coeffs(&self, from: i64, to: i64) -> Vec<C> {
        (from..=to).map(|k| self.coeff(k)).collect()
    }

    pub fn truncate(&self, order: i64) -> Self {
        if order >= self.order() {
            return self.clone();
        }
        if order < self.lo {
            return Self::zero(order);
        }
        Series { lo: self.lo, c: self.c[..(order - self.lo + 1) as usize].to_vec() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let lo = self.lo.min(o.lo);
        let hi = self.prec().min(o.prec());
        if hi <= lo {
            return Self::zero(hi - 1);
        }
        let c = (lo..hi)
            .map(|k| {
                let a = if k >= self.lo { Some(&self.c[(k - self.lo) as usize]) } else { None };
                let b = if k >= o.lo { Some(&o.c[(k - o.lo) as usize]) } else { None };
                match (a, b) {
                    (Some(a), Some(b)) => a.add_ref(b),
                    (Some(a), None) => a.clone(),
                    (None, Some(b)) => b.clone(),
                    (None, None) => C::zero(),
                }
            })
            .collect();
        Self::from_parts(lo, c)
    }

    pub fn neg(&self) -> Self {
        Series { lo: self.lo, c: self.c.iter().map(|x| x.neg_ref()).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, a: &C) -> Self {
        if a.is_zero() {
            return Self::zero(self.order());
        }
        Series { lo: self.lo, c: self.c.iter().map(|x| x.mul_ref(a)).collect() }
    }

    pub fn scale_q(&self, a: &Q) -> Self {
        Self::from_parts(self.lo, self.c.iter().map(|x| x.scale(a)).collect())
    }

    /// Multiply by x^k.
    pub fn shift(&self, k: i64) -> Self {
        Series { lo: self.lo + k, c: self.c.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let lo = self.lo + o.lo;
        let prec = (self.prec() + o.lo).min(o.prec() + self.lo);
        if self.is_zero() || o.is_zero() || prec <= lo {
            return Self::zero(prec - 1);
        }
        let n = (prec - lo) as usize;
        let mut c = vec![C::zero(); n];
        for (i, a) in self.c.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate().take(n - i) {
                if !b.is_zero() {
                    c[i + j].add_assign_ref(&a.mul_ref(b));
                }
            }
        }
        Self::from_parts(lo, c)
    }

    pub fn pow(&self, e: u32) -> Self {
        if e == 0 {
            return Self::one(self.order());
        }
        let mut r = self.clone();
        for _ in 1..e {
            r = r.mul(self);
        }
        r
    }

    /// D = x d/dx.
    pub fn d_op(&self) -> Self {
        let c = self
            .c
            .iter()
            .enumerate()
            .map(|(i, a)| a.scale(&Q::from_integer((self.lo + i as i64).into())))
            .collect();
        Self::from_parts(self.lo, c)
    }

    /// Inverse of a power series with nonzero constant term.
    pub fn mul_inv(&self) -> Result<Self, SeriesError> {
        if self.lo != 0 || self.c.is_empty() {
            return Err(SeriesError::ZeroConstantTerm);
        }
        Ok(self.inv_unit())
    }

    fn inv_unit(&self) -> Self {
        let n = self.c.len();
        let a0 = self.c[0].inv().expect("leading coefficient nonzero after normalize");
        let mut r: Vec<C> = Vec::with_capacity(n);
        r.push(a0.clone());
        for k in 1..n {
            let mut s = C::zero();
            for i in 1..=k {
                if !self.c[i].is_zero() {
                    s.add_assign_ref(&self.c[i].mul_ref(&r[k - i]));
                }
            }
            r.push(s.mul_ref(&a0).neg_ref());
        }
        Series { lo: -self.lo, c: r }
    }

    /// Inverse of any nonzero Laurent series: x^{-v} times the unit inverse.
    pub fn inv(&self) -> Result<Self, SeriesError> {
        if self.c.is_empty() {
            return Err(SeriesError::ZeroSeries);
        }
        Ok(self.inv_unit())
    }

    pub fn div(&self, o: &Self) -> Result<Self, SeriesError> {
        Ok(self.mul(&o.inv()?))
    }

    /// f^p for f with constant term 1, via k f_k = Σ (p·i − (k−i)) a_i f_{k−i}.
    pub fn frac_pow(&self, p: &Q) -> Result<Self, SeriesError> {
        if self.lo != 0 || self.c.is_empty() || !self.c[0].is_one() {
            return Err(SeriesError::NotUnitLeading);
        }
        let n = self.c.len();
        let mut f: Vec<C> = Vec::with_capacity(n);
        f.push(C::one());
        for k in 1..n {
            let mut s = C::zero();
            for i in 1..=k {
                if self.c[i].is_zero() {
                    continue;
                }
                let w = p * Q::from_integer((i as i64).into()) - Q::from_integer(((k - i) as i64).into());
                s.add_assign_ref(&self.c[i].mul_ref(&f[k - i]).scale(&w));
            }
            f.push(s.scale(&Q::new(1.into(), (k as i64).into())));
        }
        Ok(Series { lo: 0, c: f })
    }

    /// f(g) for a power series f and g with g(0) = 0.
    pub fn compose(&self, g: &Self) -> Result<Self, SeriesError> {
        if self.lo < 0 {
            return Err(SeriesError::NotPowerSeries(self.lo));
        }
        if let Some(v) = g.valuation() {
            if v < 1 {
                return Err(SeriesError::NotInvertibleMap);
            }
        }
        let order = self.order().min(g.order());
        let mut r = Self::zero(order);
        for k in (0..=self.order()).rev() {
            r = r.mul(g).truncate(order);
            r = r.add(&Self::constant(self.coeff(k), order));
        }
        Ok(r.truncate(order))
    }

    /// Compositional inverse by Lagrange inversion: [x^n]g = (1/n)[w^{n−1}](w/f)^n.
    pub fn revert(&self) -> Result<Self, SeriesError> {
        if self.lo != 1 {
            return Err(SeriesError::NotInvertibleMap);
        }
        let h = self.shift(-1).mul_inv()?;
        let order = self.order();
        let mut out = vec![C::zero(); (order + 1) as usize];
        let mut hp = Self::one(h.order());
        for n in 1..=order {
            hp = hp.mul(&h);
            out[n as usize] = hp.coeff(n - 1).scale(&Q::new(1.into(), n.into()));
        }
        Ok(Self::from_parts(0, out))
    }

    /// Coefficient-wise change of field.
    pub fn map<D: Field>(&self, f: impl Fn(&C) -> D) -> Series<D> {
        Series::from_parts(self.lo, self.c.iter().map(f).collect())
    }

    /// Error unless known at least to order `n`.
    pub fn require_order(&self, n: i64) -> Result<(), SeriesError> {
        if self.order() < n {
            Err(SeriesError::Precision { needed: n, have: self.order() })
        } else {
            Ok(())
        }
    }

    /// JSON form: coefficient strings (Cyc coefficients as 4-tuples) from x^lo.
    pub fn to_json(&self, order: i64) -> Value {
        let order = order.min(self.order());
        let lo = self.lo.min(0);
        let cs: Vec<Value> = (lo..=order).map(|k| coeff_json(&self.coeff(k))).collect();
        json!({ "order": order, "lowest_power": lo, "coeffs": cs })
    }
}

pub fn coeff_json<C: Field>(a: &C) -> Value {
    let v = a.coords();
    if v.len() == 1 {
        Value::String(v[0].clone())
    } else {
        json!(v)
    }
}

impl Series<Q> {
    pub fn to_field<C: Field>(&self) -> Series<C> {
        self.map(C::from_q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{q, qi};

    fn s(v: &[i64]) -> Series<Q> {
        Series::from_coeffs(v.iter().map(|&x| qi(x)).collect())
    }

    #[test]
    fn d_examples() {
        assert!(Series::<Q>::one(5).d_op().is_zero());
        assert_eq!(Series::monomial(qi(1), 3, 6).d_op(), Series::monomial(qi(3), 3, 6));
        assert_eq!(s(&[0, 1, 2]).d_op(), s(&[0, 1, 4]));
    }

    #[test]
    fn geometric_inverse() {
        let f = s(&[1, -1, 0, 0, 0, 0]);
        assert_eq!(f.mul_inv().unwrap(), s(&[1, 1, 1, 1, 1, 1]));
        assert_eq!(Series::<Q>::one(4).mul_inv().unwrap(), Series::one(4));
        assert_eq!(s(&[0, 1]).mul_inv(), Err(SeriesError::ZeroConstantTerm));
    }

    #[test]
    fn laurent_inverse_costs_precision() {
        // x + x^2 known mod x^6; its inverse is x^{-1}(1 - x + ...) known mod x^4
        let f = s(&[0, 1, 1, 0, 0, 0]);
        let g = f.inv().unwrap();
        assert_eq!(g.valuation(), Some(-1));
        assert_eq!(g.order(), 3);
        assert_eq!(g.coeffs(-1, 3), vec![qi(1), qi(-1), qi(1), qi(-1), qi(1)]);
        assert!(f.mul(&g).sub(&Series::one(10)).is_zero());
    }

    #[test]
    fn revert_examples() {
        let x = s(&[0, 1, 0, 0, 0]);
        assert_eq!(x.revert().unwrap(), x);
        let f = s(&[0, 1, 1, 0, 0, 0, 0]);
        // Catalan-signed: x - x^2 + 2x^3 - 5x^4 + 14x^5 - 42x^6
        assert_eq!(f.revert().unwrap(), s(&[0, 1, -1, 2, -5, 14, -42]));
        let g = f.revert().unwrap();
        let id = f.compose(&g).unwrap();
        assert_eq!(id.order(), 6);
        assert_eq!(id.coeffs(0, 6), s(&[0, 1, 0, 0, 0, 0, 0]).coeffs(0, 6));
    }

    #[test]
    fn frac_pow_examples() {
        assert_eq!(Series::<Q>::one(6).frac_pow(&q(-1, 5)).unwrap(), Series::one(6));
        assert_eq!(s(&[1, 1, 0, 0]).frac_pow(&qi(2)).unwrap(), s(&[1, 2, 1, 0]));
        let mut v = vec![qi(0); 11];
        v[0] = qi(1);
        v[5] = q(1, 3125);
        let f = Series::from_coeffs(v).frac_pow(&q(-1, 5)).unwrap();
        assert_eq!(f.coeff(5), q(-1, 15625));
        assert_eq!(f.coeff(10), q(3, 25 * 9765625));
    }

    #[test]
    fn truncation_commutes_with_mul() {
        let a = s(&[1, 2, 3, 4, 5, 6, 7]);
        let b = s(&[2, 0, -1, 3, 0, 1, 1]);
        assert_eq!(a.mul(&b).truncate(3), a.truncate(3).mul(&b.truncate(3)));
    }
}
