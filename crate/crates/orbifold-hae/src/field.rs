//! Coefficient fields used by the series and ring layers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;

/// Arbitrary-precision rational.
pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `num/den` rendering used in every JSON output.
pub fn q_to_string(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn q_from_str(s: &str) -> Option<Q> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::new(n, d))
        }
        None => s.trim().parse::<BigInt>().ok().map(Q::from_integer),
    }
}

/// Exact field interface shared by `Q` and `Cyc`.
///
/// Methods take references so big coefficients are never cloned just to
/// feed an operator.
pub trait Field: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add_ref(&self, o: &Self) -> Self;
    fn sub_ref(&self, o: &Self) -> Self;
    fn mul_ref(&self, o: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    /// `None` on zero.
    fn inv(&self) -> Option<Self>;
    fn from_q(x: &Q) -> Self;
    /// The rational value if the element lies in Q.
    fn as_q(&self) -> Option<Q>;
    /// Multiply by a rational scalar.
    fn scale(&self, x: &Q) -> Self;
    /// One string per basis coordinate, for JSON.
    fn coords(&self) -> Vec<String>;

    fn add_assign_ref(&mut self, o: &Self) {
        *self = self.add_ref(o);
    }
    fn from_i64(n: i64) -> Self {
        Self::from_q(&qi(n))
    }
    fn is_one(&self) -> bool {
        *self == Self::one()
    }
}

impl Field for Q {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self - o
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn from_q(x: &Q) -> Self {
        x.clone()
    }
    fn as_q(&self) -> Option<Q> {
        Some(self.clone())
    }
    fn scale(&self, x: &Q) -> Self {
        self * x
    }
    fn coords(&self) -> Vec<String> {
        vec![q_to_string(self)]
    }
    fn add_assign_ref(&mut self, o: &Self) {
        *self += o;
    }
}
