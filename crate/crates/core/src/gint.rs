//! Exact Gaussian integers and the base-(1+i) radix expansion.
//!
//! Every lattice coordinate in this crate is a [`GaussInt`]. Arithmetic is
//! checked: components are `i64`, but results whose magnitude exceeds
//! [`GaussInt::LIMIT`] are reported as [`GintError::Overflow`] instead of
//! silently wrapping.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GintError {
    #[error("gaussian integer overflow")]
    Overflow,
    #[error("{0} is not divisible by 1+i")]
    NotDivisible(GaussInt),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct GaussInt {
    pub re: i64,
    pub im: i64,
}

/// The Gaussian prime `1 + i`.
pub const ONE_PLUS_I: GaussInt = GaussInt { re: 1, im: 1 };

impl GaussInt {
    /// Largest component magnitude accepted as a result of arithmetic.
    pub const LIMIT: i64 = 1 << 40;

    pub const ZERO: GaussInt = GaussInt { re: 0, im: 0 };
    pub const ONE: GaussInt = GaussInt { re: 1, im: 0 };

    pub const fn new(re: i64, im: i64) -> Self {
        GaussInt { re, im }
    }

    fn checked(re: Option<i64>, im: Option<i64>) -> Result<Self, GintError> {
        match (re, im) {
            (Some(re), Some(im)) if re.abs() <= Self::LIMIT && im.abs() <= Self::LIMIT => {
                Ok(GaussInt { re, im })
            }
            _ => Err(GintError::Overflow),
        }
    }

    pub fn add(self, rhs: GaussInt) -> Result<Self, GintError> {
        Self::checked(self.re.checked_add(rhs.re), self.im.checked_add(rhs.im))
    }

    pub fn sub(self, rhs: GaussInt) -> Result<Self, GintError> {
        Self::checked(self.re.checked_sub(rhs.re), self.im.checked_sub(rhs.im))
    }

    pub fn mul(self, rhs: GaussInt) -> Result<Self, GintError> {
        let re = self
            .re
            .checked_mul(rhs.re)
            .zip(self.im.checked_mul(rhs.im))
            .and_then(|(a, b)| a.checked_sub(b));
        let im = self
            .re
            .checked_mul(rhs.im)
            .zip(self.im.checked_mul(rhs.re))
            .and_then(|(a, b)| a.checked_add(b));
        Self::checked(re, im)
    }

    /// `(1+i)^k`, exact.
    pub fn one_plus_i_pow(k: u32) -> Result<Self, GintError> {
        (0..k).try_fold(Self::ONE, |acc, _| acc.mul(ONE_PLUS_I))
    }

    /// Exact division by `1 + i`: `a / (1+i) = ((re+im)/2, (im-re)/2)`.
    pub fn div_one_plus_i(self) -> Result<Self, GintError> {
        let s = self.re.checked_add(self.im).ok_or(GintError::Overflow)?;
        let d = self.im.checked_sub(self.re).ok_or(GintError::Overflow)?;
        if s.rem_euclid(2) != 0 {
            return Err(GintError::NotDivisible(self));
        }
        Self::checked(Some(s / 2), Some(d / 2))
    }

    /// Residue modulo `1 + i`, i.e. the parity of `re + im`.
    pub fn parity(self) -> u8 {
        (self.re.rem_euclid(2) ^ self.im.rem_euclid(2)) as u8
    }

    pub fn norm(self) -> i128 {
        (self.re as i128) * (self.re as i128) + (self.im as i128) * (self.im as i128)
    }

    /// Expands `self` into `m` binary digits over the base `1 + i`,
    /// least-significant first, plus the `(1+i)^m` quotient.
    pub fn digit_expand(self, m: u32) -> RadixDigits {
        let mut digits = Vec::with_capacity(m as usize);
        let mut rest = self;
        for _ in 0..m {
            let d = rest.parity();
            digits.push(d);
            // subtracting a parity digit keeps us in range and makes the value divisible
            rest = GaussInt::new(rest.re - d as i64, rest.im);
            rest = rest
                .div_one_plus_i()
                .expect("parity-adjusted value is divisible by 1+i");
        }
        RadixDigits {
            digits,
            quotient: rest,
        }
    }
}

impl fmt::Display for GaussInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im < 0 {
            write!(f, "{}-{}i", self.re, -self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// Result of [`GaussInt::digit_expand`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadixDigits {
    /// `digits[r]` is the coefficient of `(1+i)^r`.
    pub digits: Vec<u8>,
    pub quotient: GaussInt,
}

impl RadixDigits {
    /// `quotient·(1+i)^m + Σ digits[r]·(1+i)^r`.
    pub fn compose(&self) -> Result<GaussInt, GintError> {
        let mut acc = self.quotient;
        for &d in self.digits.iter().rev() {
            acc = acc.mul(ONE_PLUS_I)?.add(GaussInt::new(d as i64, 0))?;
        }
        Ok(acc)
    }
}
