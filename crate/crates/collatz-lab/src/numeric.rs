//! Float views of arbitrary-precision integers: logarithms and integer
//! base-B logs that stay accurate far beyond the f64 range.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// Natural log of a positive big integer. Uses the top 64 bits plus an exact
/// power-of-two offset, so values of any size keep ~1 ulp accuracy.
pub fn big_ln(x: &BigInt) -> Result<f64> {
    if !x.is_positive() {
        return Err(Error::Domain(format!("ln of non-positive value {x}")));
    }
    let bits = x.bits();
    if bits <= 63 {
        return Ok((x.to_f64().expect("fits f64")).ln());
    }
    let shift = bits - 63;
    let top = (x >> shift).to_f64().expect("63 bits fit f64");
    Ok(top.ln() + shift as f64 * std::f64::consts::LN_2)
}

/// floor(log_base(x)) for x >= 1, exact (computed by integer comparisons).
pub fn integer_log_floor(x: &BigInt, base: u32) -> Result<u64> {
    if base < 2 {
        return Err(Error::Domain("log base must be at least 2".into()));
    }
    if x.is_negative() || x.is_zero() {
        return Err(Error::Domain(format!("log of non-positive value {x}")));
    }
    let b = BigInt::from(base);
    // float estimate, then correct by at most a couple of steps
    let est = (big_ln(x)? / (base as f64).ln()).floor().max(0.0) as u64;
    let mut k = est;
    let mut pow = b.pow(k.try_into().map_err(|_| Error::Domain("log overflow".into()))?);
    while &pow > x {
        k -= 1;
        pow /= &b;
    }
    while &pow * &b <= *x {
        k += 1;
        pow *= &b;
    }
    Ok(k)
}
