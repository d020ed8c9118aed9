//! Closed-form size bounds for minwise and rankwise independent families.
//!
//! All results are exact integers; overflow is reported as
//! [`Error::Overflow`] instead of wrapping.

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::patterns::binomial;

/// `lcm(1, 2, …, k)`; `lcm_upto(0) = 1`.
pub fn lcm_upto(k: usize) -> Result<u128> {
    let mut acc: u128 = 1;
    for i in 2..=k as u128 {
        let g = acc.gcd(&i);
        acc = (acc / g).checked_mul(i).ok_or(Error::Overflow("lcm"))?;
    }
    Ok(acc)
}

pub fn factorial(m: usize) -> Result<u128> {
    (1..=m as u128).try_fold(1u128, |acc, i| acc.checked_mul(i).ok_or(Error::Overflow("factorial")))
}

/// Number of derangements of `m` symbols, via `!m = m · !(m−1) + (−1)^m`.
pub fn subfactorial(m: usize) -> Result<u128> {
    let mut acc: u128 = 1;
    for i in 1..=m {
        let scaled = acc
            .checked_mul(i as u128)
            .ok_or(Error::Overflow("subfactorial"))?;
        acc = if i % 2 == 0 {
            scaled.checked_add(1).ok_or(Error::Overflow("subfactorial"))?
        } else {
            scaled - 1
        };
    }
    Ok(acc)
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if n == 0 || k == 0 {
        return Err(Error::OutOfRange(format!("need n, k >= 1 (got n = {n}, k = {k})")));
    }
    Ok(())
}

/// `max(n, lcm(1..k))`, the minimum size of a k-restricted minwise
/// independent family on `n` symbols.
pub fn lower_bound(n: usize, k: usize) -> Result<u128> {
    check_nk(n, k)?;
    Ok(lcm_upto(k)?.max(n as u128))
}

/// Ceiling of `n^((1 + 1/ln n)·k) · lcm(1..k−1)`.
///
/// Uses `n^(1/ln n) = e`, so the value is `n^k · e^k · lcm(1..k−1)`; `n = 1`
/// takes that continuous extension. The integer part `n^k · lcm` is exact
/// and the `e^k` factor is applied in `f64`, nudged up one ulp before the
/// ceiling, so the result never undershoots the real value for magnitudes
/// below 2^53. Informational only.
pub fn upper_bound(n: usize, k: usize) -> Result<u128> {
    check_nk(n, k)?;
    let power = (n as u128)
        .checked_pow(k as u32)
        .ok_or(Error::Overflow("upper bound"))?;
    let exact = power
        .checked_mul(lcm_upto(k - 1)?)
        .ok_or(Error::Overflow("upper bound"))?;
    let real = exact as f64 * (k as f64).exp();
    if !real.is_finite() || real >= u128::MAX as f64 {
        return Err(Error::Overflow("upper bound"));
    }
    let nudged = f64::from_bits(real.to_bits() + 1);
    Ok(nudged.ceil() as u128)
}

/// Lower bound on the size of a k-rankwise independent family:
/// `E(n,k) = Σ_{i=0}^{⌊k/2⌋} !i · binom(n, i)` for even `k`, plus
/// `!⌈k/2⌉ · binom(n−1, ⌊k/2⌋)` for odd `k`.
pub fn bargachev_bound(n: usize, k: usize) -> Result<u128> {
    check_nk(n, k)?;
    let mut total: u128 = 0;
    for i in 0..=k / 2 {
        let term = subfactorial(i)?
            .checked_mul(binomial(n, i))
            .ok_or(Error::Overflow("rankwise bound"))?;
        total = total.checked_add(term).ok_or(Error::Overflow("rankwise bound"))?;
    }
    if k % 2 == 1 {
        let term = subfactorial(k.div_ceil(2))?
            .checked_mul(binomial(n - 1, k / 2))
            .ok_or(Error::Overflow("rankwise bound"))?;
        total = total.checked_add(term).ok_or(Error::Overflow("rankwise bound"))?;
    }
    Ok(total)
}
