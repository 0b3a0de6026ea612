//! Compensated accumulation for quadrature sums.
//!
//! Two flavours are provided: Neumaier's improved Kahan summation for the
//! default double-precision mode, and a twofold (double-double) accumulator
//! built from error-free transformations for the extended mode.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Arithmetic used inside quadrature sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    Extended,
}

impl std::str::FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "double" => Ok(Precision::Double),
            "extended" => Ok(Precision::Extended),
            other => Err(format!("unknown precision mode `{other}`")),
        }
    }
}

/// `a + b = s + e` exactly.
#[inline]
pub fn two_sum<T: Scalar>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// `a * b = p + e` exactly (via fused multiply-add).
#[inline]
pub fn two_prod<T: Scalar>(a: T, b: T) -> (T, T) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum<T> {
    s: T,
    c: T,
}

impl<T: Scalar> NeumaierSum<T> {
    pub fn new() -> Self {
        Self {
            s: T::zero(),
            c: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c = self.c + ((self.s - t) + x);
        } else {
            self.c = self.c + ((x - t) + self.s);
        }
        self.s = t;
    }

    pub fn value(&self) -> T {
        self.s + self.c
    }
}

/// Unevaluated sum `hi + lo` with roughly twice the working precision.
#[derive(Debug, Clone, Copy, Default)]
pub struct TwoFold<T> {
    hi: T,
    lo: T,
}

impl<T: Scalar> TwoFold<T> {
    pub fn new() -> Self {
        Self {
            hi: T::zero(),
            lo: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let (s, e) = two_sum(self.hi, x);
        let lo = self.lo + e;
        let (hi, lo) = two_sum(s, lo);
        self.hi = hi;
        self.lo = lo;
    }

    /// Accumulates the exact product `a * b`.
    #[inline]
    pub fn add_prod(&mut self, a: T, b: T) {
        let (p, pe) = two_prod(a, b);
        let (s, e) = two_sum(self.hi, p);
        let lo = self.lo + e + pe;
        let (hi, lo) = two_sum(s, lo);
        self.hi = hi;
        self.lo = lo;
    }

    pub fn value(&self) -> T {
        self.hi + self.lo
    }
}

/// Fixed-order weighted sum `sum_i w_i * v_i`.
pub fn dot<T, I>(precision: Precision, pairs: I) -> T
where
    T: Scalar,
    I: IntoIterator<Item = (T, T)>,
{
    match precision {
        Precision::Double => {
            let mut acc = NeumaierSum::new();
            for (w, v) in pairs {
                acc.add(w * v);
            }
            acc.value()
        }
        Precision::Extended => {
            let mut acc = TwoFold::new();
            for (w, v) in pairs {
                acc.add_prod(w, v);
            }
            acc.value()
        }
    }
}

/// Fixed-order compensated sum.
pub fn sum<T, I>(precision: Precision, values: I) -> T
where
    T: Scalar,
    I: IntoIterator<Item = T>,
{
    match precision {
        Precision::Double => {
            let mut acc = NeumaierSum::new();
            values.into_iter().for_each(|v| acc.add(v));
            acc.value()
        }
        Precision::Extended => {
            let mut acc = TwoFold::new();
            values.into_iter().for_each(|v| acc.add(v));
            acc.value()
        }
    }
}
