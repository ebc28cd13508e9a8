//! Prime-field arithmetic and the object value space built on it.
//!
//! Object values are fixed-length vectors over `GF(p)`. Every linear map in
//! the store (encoding, re-encoding, decoding) acts on them coordinate-wise,
//! so the only arithmetic the rest of the crate needs is scalar `GF(p)` math
//! plus an `axpy` on vectors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::CodeError;

/// Largest modulus accepted; keeps every product below `u64::MAX`.
pub const MAX_MODULUS: u64 = 1 << 31;

/// The prime field `GF(p)` for an odd prime `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Builds `GF(p)`, rejecting even or composite moduli.
    pub fn new(p: u64) -> Result<Self, CodeError> {
        if p < 3 || p.is_multiple_of(2) || p >= MAX_MODULUS || !is_prime(p) {
            return Err(CodeError::InvalidModulus(p));
        }
        Ok(Self { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Reduces an arbitrary signed integer into `[0, p)`.
    pub fn element(&self, x: i64) -> u64 {
        x.rem_euclid(self.p as i64) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.p - b) % self.p
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.p - a) % self.p
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a * b) % self.p
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat; `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let a = a % self.p;
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }

    /// Number of bytes needed to store one field element.
    pub fn element_bytes(&self) -> usize {
        let bits = 64 - (self.p - 1).leading_zeros() as usize;
        bits.div_ceil(8).max(1)
    }
}

impl Default for PrimeField {
    fn default() -> Self {
        Self { p: 257 }
    }
}

impl TryFrom<u64> for PrimeField {
    type Error = CodeError;

    fn try_from(p: u64) -> Result<Self, Self::Error> {
        Self::new(p)
    }
}

impl From<PrimeField> for u64 {
    fn from(f: PrimeField) -> u64 {
        f.p
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// An object value (or a codeword symbol): a vector of field elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Value(Vec<u64>);

impl Value {
    pub fn new(coords: Vec<u64>) -> Self {
        Self(coords)
    }

    pub fn zero(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// `self += coeff * other`, coordinate-wise.
    pub fn axpy(&mut self, field: &PrimeField, coeff: u64, other: &Value) {
        debug_assert_eq!(self.len(), other.len());
        for (a, &b) in self.0.iter_mut().zip(&other.0) {
            *a = field.add(*a, field.mul(coeff, b));
        }
    }

    pub fn scaled(&self, field: &PrimeField, coeff: u64) -> Value {
        Value(self.0.iter().map(|&c| field.mul(coeff, c)).collect())
    }

    pub fn sub(&self, field: &PrimeField, other: &Value) -> Value {
        Value(self.0.iter().zip(&other.0).map(|(&a, &b)| field.sub(a, b)).collect())
    }

    /// True when every coordinate is a canonical element of `field`.
    pub fn is_in(&self, field: &PrimeField) -> bool {
        self.0.iter().all(|&c| c < field.modulus())
    }
}

impl From<Vec<u64>> for Value {
    fn from(v: Vec<u64>) -> Self {
        Self(v)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}
