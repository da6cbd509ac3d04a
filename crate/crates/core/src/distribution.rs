//! The limit distribution `F` of the tree rows.
//!
//! For `x = [a0; a1, a2, ...]`,
//! `F(x) = 1 - 2^-a0 + 2^-(a0+a1) - 2^-(a0+a1+a2) + ...`,
//! which is the limit of the row distribution functions
//! `F_n(x) = 2^(1-n) #{j : x_j <= x}` uniformly with `|F - F_n| <= 2^-n`.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::contfrac::{cf_of, ContinuedFraction, PeriodicCf};
use crate::tree::{check_u64_depth, fold_generation, GenerationIndex};
use crate::{to_bigint, Error, Integral, Rational, Result};

/// Argument of `F`: an exact expansion or a truncated one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CfReal<T> {
    Finite(ContinuedFraction<T>),
    Periodic(PeriodicCf<T>),
    /// Leading partial quotients of an unknown number.
    Truncated(Vec<T>),
}

impl<T: Integral> CfReal<T> {
    pub fn rational(q: &Ratio<T>) -> Result<Self> {
        cf_of(q).map(CfReal::Finite)
    }

    /// Number of known partial quotients, `None` for periodic expansions.
    pub fn known_len(&self) -> Option<usize> {
        match self {
            CfReal::Finite(cf) => Some(cf.quotients().len()),
            CfReal::Periodic(_) => None,
            CfReal::Truncated(q) => Some(q.len()),
        }
    }
}

impl<T: fmt::Display + Clone> fmt::Display for CfReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CfReal::Finite(cf) => write!(f, "{cf}"),
            CfReal::Periodic(x) => write!(f, "{x}"),
            CfReal::Truncated(q) => {
                f.write_str("~[")?;
                for (i, a) in q.iter().enumerate() {
                    match i {
                        0 => write!(f, "{a}")?,
                        1 => write!(f, ";{a}")?,
                        _ => write!(f, ",{a}")?,
                    }
                }
                f.write_str("]")
            }
        }
    }
}

fn parse_list<T: FromStr>(s: &str, whole: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| Error::Parse(format!("bad partial quotient {t:?} in {whole:?}"))))
        .collect()
}

/// Accepts `[a0;a1,...]`, `[a0;a1,(b1,b2)]`, `[(1)]`, `~[a0;a1,...]` and
/// plain rationals such as `7/5`.
impl<T: Integral + FromStr> FromStr for CfReal<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (truncated, t) = match t.strip_prefix('~') {
            Some(rest) => (true, rest.trim_start()),
            None => (false, t),
        };
        let Some(body) = t.strip_prefix('[').and_then(|b| b.strip_suffix(']')) else {
            if truncated {
                return Err(Error::Parse(format!("expected ~[...] in {s:?}")));
            }
            let q: Ratio<T> = t.parse().map_err(|_| Error::Parse(format!("expected [a0;a1,...] or a/b, got {s:?}")))?;
            return CfReal::rational(&q);
        };
        let body = body.replace(';', ",");
        let (pre, period) = match body.find('(') {
            Some(open) => {
                let close = body
                    .rfind(')')
                    .filter(|&c| c > open && body[c + 1..].trim().is_empty())
                    .ok_or_else(|| Error::Parse(format!("period must close the expansion in {s:?}")))?;
                (&body[..open], Some(&body[open + 1..close]))
            }
            None => (body.as_str(), None),
        };
        let pre: Vec<T> = parse_list(pre, s)?;
        match (truncated, period) {
            (true, Some(_)) => Err(Error::Parse(format!("a truncation cannot carry a period: {s:?}"))),
            (true, None) => {
                if pre.is_empty() {
                    return Err(Error::Parse("empty truncation".into()));
                }
                ContinuedFraction::non_canonical(pre.clone())?;
                Ok(CfReal::Truncated(pre))
            }
            (false, Some(p)) => Ok(CfReal::Periodic(PeriodicCf::new(pre, parse_list(p, s)?)?)),
            (false, None) => Ok(CfReal::Finite(ContinuedFraction::non_canonical(pre)?)),
        }
    }
}

/// A value of `F`, an exact rational in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CdfValue(Rational);

impl CdfValue {
    #[inline]
    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_inner(self) -> Rational {
        self.0
    }

    /// Whether the denominator is a power of two.
    pub fn is_dyadic(&self) -> bool {
        let d = self.0.denom();
        (d & (d - BigInt::one())).is_zero()
    }
}

impl fmt::Display for CdfValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn exponent<T: Integral>(a: &T) -> Result<u64> {
    a.to_u64().ok_or_else(|| Error::TooLarge(format!("partial quotient {a} as a power of two")))
}

/// `2^-k` as a rational.
fn inv_pow2(k: u64) -> Rational {
    Rational::new_raw(BigInt::one(), BigInt::one() << k)
}

/// `F` of a finite quotient sequence, by the nested form
/// `1 - 2^-a0 (1 - 2^-a1 (1 - ... (1 - 2^-am)))`.
fn cdf_finite<T: Integral>(quotients: &[T]) -> Result<Rational> {
    let (mut numer, mut shift) = (BigInt::one(), 0u64);
    for a in quotients.iter().rev() {
        shift += exponent(a)?;
        numer = (BigInt::one() << shift) - numer;
    }
    Ok(Rational::new(numer, BigInt::one() << shift))
}

/// `sum_j (-1)^(start+j+1) 2^-S_j` with `S_j = s + a_0 + ... + a_j`, and the
/// final `S`.
fn partial_sum<'a, T: Integral + 'a>(quotients: impl Iterator<Item = &'a T>, start: usize, mut s: u64) -> Result<(Rational, u64)> {
    let mut acc = Rational::zero();
    for (i, a) in quotients.enumerate() {
        s += exponent(a)?;
        let term = inv_pow2(s);
        if (start + i) % 2 == 0 {
            acc -= term;
        } else {
            acc += term;
        }
    }
    Ok((acc, s))
}

fn cdf_periodic<T: Integral>(x: &PeriodicCf<T>) -> Result<Rational> {
    let r = x.preperiod().len();
    let l = x.period().len();
    let (head, s) = partial_sum(x.preperiod().iter(), 0, 0)?;
    let (block, q) = partial_sum(x.period().iter(), r, s)?;
    // successive period blocks scale by rho = (-1)^l 2^-(q - s)
    let rho = if l % 2 == 0 { inv_pow2(q - s) } else { -inv_pow2(q - s) };
    Ok(Rational::one() + head + block / (Rational::one() - rho))
}

/// Exact `F(x)` for a finite or eventually periodic expansion.
pub fn cdf_exact<T: Integral>(x: &CfReal<T>) -> Result<CdfValue> {
    match x {
        CfReal::Finite(cf) => cdf_finite(cf.quotients()).map(CdfValue),
        CfReal::Periodic(p) => cdf_periodic(p).map(CdfValue),
        CfReal::Truncated(_) => Err(Error::Truncated),
    }
}

/// `F(q)` for a non-negative rational.
pub fn cdf_rational<T: Integral>(q: &Ratio<T>) -> Result<Rational> {
    cdf_finite(cf_of(q)?.quotients())
}

/// Bounds `(lo, hi)` on `F` over every real whose expansion starts with the
/// given quotients `[a0; ..., ak]`. The width is `2^-(a0 + ... + ak + 1)`.
/// Exact arguments give `lo == hi`.
pub fn cdf_bounds<T: Integral>(x: &CfReal<T>) -> Result<(Rational, Rational)> {
    let q = match x {
        CfReal::Truncated(q) => q,
        exact => {
            let v = cdf_exact(exact)?.into_inner();
            return Ok((v.clone(), v));
        }
    };
    if q.is_empty() {
        return Err(Error::InvalidContinuedFraction("empty truncation".into()));
    }
    let (p, s) = partial_sum(q.iter(), 0, 0)?;
    let p = Rational::one() + p;
    let other = if (q.len() - 1) % 2 == 0 { &p + inv_pow2(s + 1) } else { &p - inv_pow2(s + 1) };
    Ok(if other < p { (other, p) } else { (p, other) })
}

/// `(#{x_j <= x}, #{x_j < x})` over row `n`.
pub fn count_below<T: Integral>(n: GenerationIndex, x: &Ratio<T>) -> Result<(u64, u64)> {
    check_u64_depth(n)?;
    if n.get() > 64 {
        return Err(Error::TooLarge(format!("row {n} is too long to count in u64")));
    }
    if x < &Ratio::zero() {
        return Err(Error::NotPositive(x.to_string()));
    }
    let (c, d) = (to_bigint(x.numer()), to_bigint(x.denom()));
    let pair = (|| Some((c.to_u64()? as u128, d.to_u64()? as u128)))();
    let counts = match pair {
        Some((c, d)) => fold_generation::<u64, _, _, _, _>(
            n,
            || (0u64, 0u64),
            |(le, lt), a, b| {
                let (l, r) = (*a as u128 * d, c * *b as u128);
                (le + (l <= r) as u64, lt + (l < r) as u64)
            },
            |x, y| (x.0 + y.0, x.1 + y.1),
        ),
        None => fold_generation::<u64, _, _, _, _>(
            n,
            || (0u64, 0u64),
            |(le, lt), a, b| {
                let (l, r) = (BigInt::from(*a) * &d, &c * BigInt::from(*b));
                (le + (l <= r) as u64, lt + (l < r) as u64)
            },
            |x, y| (x.0 + y.0, x.1 + y.1),
        ),
    };
    Ok(counts)
}

/// `F_n(x) = 2^(1-n) #{j : x_j <= x}`.
pub fn empirical_cdf<T: Integral>(n: GenerationIndex, x: &Ratio<T>) -> Result<Rational> {
    let (le, _) = count_below(n, x)?;
    Ok(Rational::new(BigInt::from(le), BigInt::one() << (n.get() - 1)))
}

/// `2F(x) - F(x-1) - 1` for `x >= 1` and `2F(x) - F(x/(1-x))` for
/// `0 < x < 1`. Both vanish identically.
pub fn functional_equation_residual<T: Integral>(x: &Ratio<T>) -> Result<Rational> {
    if x <= &Ratio::zero() {
        return Err(Error::NotPositive(x.to_string()));
    }
    let two_f = cdf_rational(x)? * BigInt::from(2);
    let one = Ratio::<T>::one();
    if x >= &one {
        Ok(two_f - cdf_rational(&(x.clone() - one))? - Rational::one())
    } else {
        let y = x.clone() / (one - x.clone());
        Ok(two_f - cdf_rational(&y)?)
    }
}

/// Largest row for [`sup_deviation`]; it keeps a bitmap of `2^n` bits.
pub const MAX_SUP_DEPTH: u64 = 30;

/// `2^n F(a/b)` for a node of row `n`, an integer because the quotient sum
/// of `a/b` is `n`.
fn scaled_cdf(n: u64, mut a: u64, mut b: u64) -> u64 {
    let mut value: i128 = 1 << n;
    let (mut s, mut sign) = (0u64, -1i128);
    while b != 0 {
        s += a / b;
        value += sign << (n - s);
        sign = -sign;
        (a, b) = (b, a % b);
    }
    value as u64
}

/// Exact `sup_x |F(x) - F_n(x)|`.
///
/// The supremum is attained at a node `x_(i)` of the row (the `i`-th
/// smallest), either at the node or just below it, giving
/// `max_i max(|F(x_(i)) - i 2^(1-n)|, |F(x_(i)) - (i-1) 2^(1-n)|)`.
pub fn sup_deviation(n: GenerationIndex) -> Result<Rational> {
    if n.get() > MAX_SUP_DEPTH {
        return Err(Error::TooLarge(format!("row {n} exceeds sup-deviation depth {MAX_SUP_DEPTH}")));
    }
    let depth = n.get();
    let words = ((1u64 << depth) / 64 + 1) as usize;
    let bitmap: Vec<AtomicU64> = (0..words).map(|_| AtomicU64::new(0)).collect();
    fold_generation::<u64, _, _, _, _>(
        n,
        || (),
        |(), a, b| {
            let v = scaled_cdf(depth, *a, *b);
            bitmap[(v / 64) as usize].fetch_or(1 << (v % 64), Ordering::Relaxed);
        },
        |(), ()| (),
    );
    let mut worst = 0u64;
    let mut i = 0u64;
    for (w, word) in bitmap.iter().enumerate() {
        let mut bits = word.load(Ordering::Relaxed);
        while bits != 0 {
            let v = w as u64 * 64 + bits.trailing_zeros() as u64;
            bits &= bits - 1;
            i += 1;
            worst = worst.max(v.abs_diff(2 * i)).max(v.abs_diff(2 * (i - 1)));
        }
    }
    debug_assert_eq!(i, 1 << (depth - 1));
    Ok(Rational::new(BigInt::from(worst), BigInt::one() << depth))
}

/// `log2` of a positive big integer.
fn log2_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().log2();
    }
    let shift = bits - 900;
    (x >> shift).to_f64().unwrap().log2() + shift as f64
}

/// `log2 |q|` for a non-zero rational.
fn log2_ratio(q: &Rational) -> f64 {
    log2_big(&q.numer().abs()) - log2_big(q.denom())
}

/// `|F(y) - F(alpha)| / |y - alpha|`, where `y` is `alpha` with its partial
/// quotient at index `depth` increased by one.
///
/// Growth in `depth` points to an infinite derivative of `F` at `alpha` and
/// decay to a vanishing one. The distance `|y - alpha|` is irrational and is
/// evaluated in floating point as `1 / ((q' t + q'') (q' (t + 1) + q''))`
/// with `t` the complete quotient at `depth` and `q'`, `q''` the preceding
/// convergent denominators.
pub fn difference_quotient<T: Integral>(alpha: &PeriodicCf<T>, depth: usize) -> Result<f64> {
    if depth == 0 {
        return Err(Error::OutOfRange("difference quotient depth must be at least 1".into()));
    }
    let y = alpha.with_incremented(depth);
    let df = cdf_periodic(&y)? - cdf_periodic(alpha)?;
    let t: f64 = alpha.tail(depth).value();

    // convergent denominators in log scale
    let (mut q1, mut q2, mut scale) = (1.0f64, 0.0f64, 0.0f64);
    for i in 0..depth {
        let a = alpha.quotient(i).to_f64().unwrap_or(f64::INFINITY);
        (q1, q2) = (a * q1 + q2, q1);
        if q1 > 1e200 {
            q1 *= 1e-200;
            q2 *= 1e-200;
            scale += 200.0 * 10f64.log2();
        }
    }
    let log_dist = -((q1 * t + q2).log2() + (q1 * (t + 1.0) + q2).log2() + 2.0 * scale);
    Ok((log2_ratio(&df) - log_dist).exp2())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    fn g(n: u64) -> GenerationIndex {
        GenerationIndex::new(n).unwrap()
    }

    fn parse(s: &str) -> CfReal<i64> {
        s.parse().unwrap()
    }

    #[test]
    fn special_values() {
        assert_eq!(cdf_exact(&parse("[1]")).unwrap().into_inner(), big(1, 2));
        assert_eq!(cdf_exact(&parse("[1;(2)]")).unwrap().into_inner(), big(3, 5));
        assert_eq!(cdf_exact(&parse("[(1)]")).unwrap().into_inner(), big(2, 3));
        assert_eq!(cdf_exact(&parse("[0]")).unwrap().into_inner(), big(0, 1));
        assert_eq!(cdf_exact(&parse("~[1]")), Err(Error::Truncated));
    }

    #[test]
    fn parser_forms() {
        assert_eq!(parse("[2;2]"), parse("5/2"));
        assert_eq!(parse("[1;2,(3,4)]").to_string(), "[1;2,(3,4)]");
        assert_eq!(parse("~[1;2]").to_string(), "~[1;2]");
        assert!("[1;(2)".parse::<CfReal<i64>>().is_err());
        assert!("[1;(2),3]".parse::<CfReal<i64>>().is_err());
        assert!("~[]".parse::<CfReal<i64>>().is_err());
        assert!("~[1;(2)]".parse::<CfReal<i64>>().is_err());
        assert!("[1;0]".parse::<CfReal<i64>>().is_err());
    }

    #[test]
    fn bounds_enclose_completions() {
        let (lo, hi) = cdf_bounds(&parse("~[2]")).unwrap();
        for x in [big(2, 1), big(5, 2), big(29, 10)] {
            let f = cdf_rational(&x).unwrap();
            assert!(lo <= f && f <= hi);
        }
        assert_eq!(hi, cdf_rational(&big(3, 1)).unwrap());
        let (lo, hi) = cdf_bounds(&parse("~[1;2]")).unwrap();
        assert!(&hi - &lo <= big(1, 8));
        let (lo, hi) = cdf_bounds(&parse("~[0;1]")).unwrap();
        assert_eq!(hi, big(1, 2));
        assert!(lo < hi);
    }

    #[test]
    fn empirical_examples() {
        assert_eq!(empirical_cdf(g(4), &big(1, 2)).unwrap(), big(1, 4));
        assert_eq!(empirical_cdf(g(1), &big(1, 1)).unwrap(), big(1, 1));
        assert_eq!(empirical_cdf(g(3), &big(1, 1)).unwrap(), big(1, 2));
        assert_eq!(empirical_cdf(g(5), &big(0, 1)).unwrap(), big(0, 1));
    }

    #[test]
    fn residual_examples() {
        for x in [big(3, 2), big(1, 3), big(7, 5), big(1, 1)] {
            assert!(functional_equation_residual(&x).unwrap().is_zero());
        }
    }

    #[test]
    fn sup_deviation_bound() {
        for n in 1..=12 {
            let d = sup_deviation(g(n)).unwrap();
            assert!(d <= big(1, 1i64 << n), "n={n}: {d}");
        }
    }

    #[test]
    fn sup_deviation_matches_direct_evaluation() {
        let n = g(6);
        let mut row: Vec<Rational> = crate::tree::generation::<i64>(n)
            .map(|q| Rational::new((*q.numer()).into(), (*q.denom()).into()))
            .collect();
        row.sort();
        let step = big(1, 32);
        let mut worst = Rational::zero();
        for (i, x) in row.iter().enumerate() {
            let f = cdf_rational(x).unwrap();
            let at = &step * BigInt::from(i as i64 + 1);
            let before = &step * BigInt::from(i as i64);
            worst = worst.max((&f - at).abs()).max((&f - before).abs());
        }
        assert_eq!(sup_deviation(n).unwrap(), worst);
    }

    #[test]
    fn difference_quotient_trends() {
        let golden = PeriodicCf::new(vec![], vec![1i64]).unwrap();
        let v: Vec<f64> = (1..40).step_by(6).map(|d| difference_quotient(&golden, d).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] > w[0]), "{v:?}");
        let five = PeriodicCf::new(vec![], vec![5i64]).unwrap();
        let v: Vec<f64> = (1..40).step_by(6).map(|d| difference_quotient(&five, d).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
        assert!(difference_quotient(&golden, 0).is_err());
    }
}
