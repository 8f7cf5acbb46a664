//! Base-2 logarithms of arbitrary-precision integers.
//!
//! The integer part of `log2(x)` is taken from the bit length and only the
//! leading 128 bits enter floating point, so the absolute error stays near
//! one f64 ulp of the fractional part no matter how large `x` is.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Splits `log2(x)` into an exact integer part and a fraction in `[0, 1)`.
fn log2_split(x: &BigUint) -> Result<(u64, f64)> {
    if x.is_zero() {
        return Err(Error::LogOfZero);
    }
    let bits = x.bits();
    if bits <= 128 {
        let v = x.to_u128().expect("fits in 128 bits");
        let exp = bits - 1;
        // v / 2^exp lies in [1, 2)
        let mantissa = v as f64 / 2f64.powi(exp as i32);
        return Ok(normalize(exp, mantissa.log2()));
    }
    let shift = bits - 128;
    let top = (x >> shift).to_u128().expect("top 128 bits");
    let mantissa = top as f64 / 2f64.powi(127);
    Ok(normalize(shift + 127, mantissa.log2()))
}

fn normalize(int: u64, frac: f64) -> (u64, f64) {
    // rounding of the mantissa can land exactly on 2.0
    if frac >= 1.0 {
        (int + 1, frac - 1.0)
    } else {
        (int, frac.max(0.0))
    }
}

/// `log2(x)` for a positive big integer.
pub fn log2_big(x: &BigUint) -> Result<f64> {
    let (i, f) = log2_split(x)?;
    Ok(i as f64 + f)
}

/// `Σ log2(f)` over positive factors, with exact accumulation of the integer
/// parts.
pub fn log2_product<'a, I>(factors: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a BigUint>,
{
    let mut int = 0u64;
    let mut frac = 0.0f64;
    for f in factors {
        let (i, fr) = log2_split(f)?;
        int += i;
        frac += fr;
    }
    Ok(int as f64 + frac)
}

/// `log2_product(factors) / dim`, keeping the integer part exact before
/// the division.
pub(crate) fn log2_product_per(factors: &[BigUint], dim: u64) -> Result<f64> {
    let mut int = 0u64;
    let mut frac = 0.0f64;
    for f in factors {
        let (i, fr) = log2_split(f)?;
        int += i;
        frac += fr;
    }
    Ok((int / dim) as f64 + ((int % dim) as f64 + frac) / dim as f64)
}
