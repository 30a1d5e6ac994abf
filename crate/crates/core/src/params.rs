//! The dyadic parameter grid `delta = 2^-a`, `sigma = c/a`.
//!
//! On this grid `delta^sigma = 2^-c`, so every interval endpoint, lattice
//! coordinate and mass is an exact binary rational.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{display, exact_log2, is_integer, pow2, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicParams {
    delta_log2: u32,
    sigma_num: u32,
}

impl DyadicParams {
    /// `delta = 2^-delta_log2`, `sigma = sigma_num / delta_log2`.
    pub fn new(delta_log2: u32, sigma_num: u32) -> Result<Self> {
        if delta_log2 == 0 || delta_log2 > 60 {
            return Err(Error::InvalidParameter(format!(
                "delta_log2 = {delta_log2} must lie in 1..=60"
            )));
        }
        if sigma_num == 0 || 2 * sigma_num >= delta_log2 {
            return Err(Error::InvalidParameter(format!(
                "sigma = {sigma_num}/{delta_log2} must satisfy 0 < sigma < 1/2"
            )));
        }
        let p = Self {
            delta_log2,
            sigma_num,
        };
        // 2 delta^(1-sigma) < 1  <=>  a - c > 1
        if delta_log2 - sigma_num <= 1 {
            return Err(Error::Overlap(display(&(Rational::from_integer(2) * p.delta_pow_one_minus_sigma()))));
        }
        Ok(p)
    }

    /// Places `sigma` on the grid for `delta = 2^-delta_log2`; fails unless
    /// `sigma * delta_log2` is an integer.
    pub fn from_sigma(delta_log2: u32, sigma: &Rational) -> Result<Self> {
        let c = sigma * Rational::from_integer(delta_log2 as i128);
        if !is_integer(&c) {
            return Err(Error::NonDyadic(format!(
                "2^-{}",
                display(&c)
            )));
        }
        let c = *c.numer();
        if c <= 0 || c >= delta_log2 as i128 {
            return Err(Error::InvalidParameter(format!(
                "sigma = {} must satisfy 0 < sigma < 1/2",
                display(sigma)
            )));
        }
        Self::new(delta_log2, c as u32)
    }

    /// Validates general `(delta, sigma)` inputs and maps them onto the grid.
    ///
    /// `level` is needed because `1/delta` must be an integer from `k = 2` on.
    pub fn from_delta_sigma(delta: &Rational, sigma: &Rational, level: u32) -> Result<Self> {
        use num_traits::{One, Zero};
        if *delta <= Rational::zero() || *delta >= Rational::one() {
            return Err(Error::InvalidParameter(format!(
                "delta = {} must lie in (0, 1)",
                display(delta)
            )));
        }
        if *sigma <= Rational::zero() || *sigma >= Rational::new(1, 2) {
            return Err(Error::InvalidParameter(format!(
                "sigma = {} must lie in (0, 1/2)",
                display(sigma)
            )));
        }
        if level >= 2 && !is_integer(&delta.recip()) {
            return Err(Error::NonIntegerReciprocal(display(delta)));
        }
        let a = match exact_log2(delta) {
            Some(e) => (-e) as u32,
            None => {
                return Err(Error::NonDyadic(format!(
                    "({})^({})",
                    display(delta),
                    display(sigma)
                )))
            }
        };
        Self::from_sigma(a, sigma)
    }

    pub fn delta_log2(&self) -> u32 {
        self.delta_log2
    }

    pub fn sigma_num(&self) -> u32 {
        self.sigma_num
    }

    pub fn delta(&self) -> Rational {
        pow2(-(self.delta_log2 as i32))
    }

    pub fn delta_f64(&self) -> f64 {
        (-(self.delta_log2 as f64)).exp2()
    }

    pub fn sigma(&self) -> Rational {
        Rational::new(self.sigma_num as i128, self.delta_log2 as i128)
    }

    pub fn sigma_f64(&self) -> f64 {
        self.sigma_num as f64 / self.delta_log2 as f64
    }

    /// `delta^sigma = 2^-c`.
    pub fn delta_pow_sigma(&self) -> Rational {
        pow2(-(self.sigma_num as i32))
    }

    /// `delta^(1 - sigma)`.
    pub fn delta_pow_one_minus_sigma(&self) -> Rational {
        pow2(-((self.delta_log2 - self.sigma_num) as i32))
    }

    /// `L = floor(delta^-sigma) = 2^c`.
    pub fn ell_count(&self) -> u64 {
        1u64 << self.sigma_num
    }

    /// `delta^(j*sigma + m)` for integers `j`, `m`, exactly.
    pub fn delta_power(&self, sigma_mult: i32, delta_mult: i32) -> Rational {
        pow2(-(sigma_mult * self.sigma_num as i32 + delta_mult * self.delta_log2 as i32))
    }
}
