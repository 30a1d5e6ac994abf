//! Exact rational helpers.
//!
//! Every coordinate built on the dyadic grid (profile centers, lattice
//! points, box corners) is an exact rational. `i128` numerators and
//! denominators are plenty for the grid sizes used here.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

/// `2^e` as an exact rational.
pub fn pow2(e: i32) -> Rational {
    assert!(e.abs() < 126, "2^{e} does not fit in i128");
    if e >= 0 {
        Rational::from_integer(1i128 << e)
    } else {
        Rational::new(1, 1i128 << (-e))
    }
}

/// Integer power (possibly negative) of a rational.
pub fn rpow(base: &Rational, e: i32) -> Rational {
    if e >= 0 {
        num_traits::pow(*base, e as usize)
    } else {
        num_traits::pow(base.recip(), (-e) as usize)
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite `f64` into a rational.
pub fn from_f64_exact(x: f64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("{x} is not finite")));
    }
    if x == 0.0 {
        return Ok(Rational::zero());
    }
    let bits = x.to_bits();
    let sign: i128 = if bits >> 63 == 0 { 1 } else { -1 };
    let exponent = ((bits >> 52) & 0x7ff) as i32;
    let mantissa = if exponent == 0 {
        (bits & 0xf_ffff_ffff_ffff) << 1
    } else {
        (bits & 0xf_ffff_ffff_ffff) | 0x10_0000_0000_0000
    } as i128;
    let e = exponent - 1075;
    if !(-120..=60).contains(&e) {
        return Err(Error::InvalidParameter(format!(
            "{x} is outside the exactly representable range"
        )));
    }
    Ok(Rational::from_integer(sign * mantissa) * pow2(e))
}

/// Parses `"num/den"`, an integer, or a finite decimal such as `"0.02"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("cannot parse '{s}' as a rational"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| bad())?;
        let d: i128 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 30 {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int_abs: i128 = if int.is_empty() || int == "-" {
            0
        } else {
            int.trim_start_matches('-').parse().map_err(|_| bad())?
        };
        let den = 10i128.pow(frac.len() as u32);
        let num = int_abs * den + frac.parse::<i128>().map_err(|_| bad())?;
        let r = Rational::new(num, den);
        return Ok(if negative { -r } else { r });
    }
    let n: i128 = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// `log2` of a positive power of two, `None` otherwise.
pub fn exact_log2(r: &Rational) -> Option<i32> {
    if !r.is_positive() {
        return None;
    }
    let (n, d) = (*r.numer(), *r.denom());
    if n.count_ones() != 1 || d.count_ones() != 1 {
        return None;
    }
    Some(n.trailing_zeros() as i32 - d.trailing_zeros() as i32)
}

pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

pub fn floor_to_u64(r: &Rational) -> u64 {
    let f = r.numer().div_floor(r.denom());
    u64::try_from(f.max(0)).unwrap_or(u64::MAX)
}

/// `[numerator, denominator]` pair used by the JSON schemas.
pub fn to_pair(r: &Rational) -> [i128; 2] {
    [*r.numer(), *r.denom()]
}

pub fn from_pair(p: [i128; 2]) -> Result<Rational> {
    if p[1] == 0 {
        return Err(Error::Deserialize("zero denominator".into()));
    }
    Ok(Rational::new(p[0], p[1]))
}

pub fn display(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_decimals_and_integers() {
        assert_eq!(parse_rational("1/40").unwrap(), Rational::new(1, 40));
        assert_eq!(parse_rational("0.02").unwrap(), Rational::new(1, 50));
        assert_eq!(parse_rational("-1.5").unwrap(), Rational::new(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), Rational::from_integer(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn exact_float_conversion_round_trips() {
        for x in [0.5, 1.0 / 1024.0, 3.25, -7.0, 0.1] {
            let r = from_f64_exact(x).unwrap();
            assert_eq!(to_f64(&r), x);
        }
    }

    #[test]
    fn log2_detects_powers_of_two() {
        assert_eq!(exact_log2(&pow2(-12)), Some(-12));
        assert_eq!(exact_log2(&Rational::from_integer(8)), Some(3));
        assert_eq!(exact_log2(&Rational::new(3, 16)), None);
    }

    #[test]
    fn negative_powers() {
        assert_eq!(rpow(&Rational::new(1, 4), -2), Rational::from_integer(16));
        assert_eq!(rpow(&Rational::new(2, 3), 3), Rational::new(8, 27));
    }
}
