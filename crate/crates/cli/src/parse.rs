use num_bigint::BigInt;
use num_traits::Zero;

use cwtree::contfrac::Endpoint;
use cwtree::padic::PadicPrime;
use cwtree::{CfReal, Rational, TreePath};

/// `a/b`, an integer, or a terminating decimal such as `0.0011`.
pub fn rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let bad = || format!("expected a rational like 3/2 or 0.25, got {s:?}");
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rational::new(a, b));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int: BigInt = match int.trim_start_matches(['-', '+']) {
            "" => BigInt::zero(),
            digits => digits.parse().map_err(|_| bad())?,
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac: BigInt = frac.parse().map_err(|_| bad())?;
        let v = Rational::new(int * &scale + frac, scale);
        return Ok(if negative { -v } else { v });
    }
    Ok(Rational::from_integer(s.parse().map_err(|_| bad())?))
}

pub fn positive_rational(s: &str) -> Result<Rational, String> {
    let q = rational(s)?;
    if q <= Rational::zero() {
        return Err(format!("expected a positive rational, got {s:?}"));
    }
    Ok(q)
}

pub fn nonnegative_rational(s: &str) -> Result<Rational, String> {
    let q = rational(s)?;
    if q < Rational::zero() {
        return Err(format!("expected a non-negative rational, got {s:?}"));
    }
    Ok(q)
}

/// Upper interval endpoint, `None` for infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Upper(pub Option<Rational>);

/// Upper endpoint; `inf` stands for infinity.
pub fn upper_endpoint(s: &str) -> Result<Upper, String> {
    match s.trim() {
        "inf" | "infinity" | "∞" => Ok(Upper(None)),
        other => nonnegative_rational(other).map(|q| Upper(Some(q))),
    }
}

/// A rational, or an eventually periodic expansion such as `[1;(2)]`.
pub fn endpoint(s: &str) -> Result<Endpoint<BigInt>, String> {
    if !s.trim_start().starts_with('[') {
        return nonnegative_rational(s).map(Endpoint::Rational);
    }
    match cfreal(s)? {
        CfReal::Finite(cf) => Ok(Endpoint::Rational(cf.value())),
        CfReal::Periodic(x) => Ok(Endpoint::Periodic(x)),
        CfReal::Truncated(_) => Err("an interval endpoint must be exact".into()),
    }
}

pub fn cfreal(s: &str) -> Result<CfReal, String> {
    s.parse().map_err(|e: cwtree::Error| e.to_string())
}

/// A path such as `LRR` or `L^2 R`; `root` or the empty string is the root.
pub fn path(s: &str) -> Result<TreePath, String> {
    match s.trim() {
        "" | "root" => Ok(TreePath::root()),
        other => other.parse().map_err(|e: cwtree::Error| e.to_string()),
    }
}

pub fn prime(s: &str) -> Result<PadicPrime, String> {
    let p: u64 = s.trim().parse().map_err(|_| format!("expected a prime, got {s:?}"))?;
    PadicPrime::new(p).map_err(|e| e.to_string())
}

pub fn depth(s: &str) -> Result<u64, String> {
    let n: u64 = s.trim().parse().map_err(|_| format!("expected a positive integer, got {s:?}"))?;
    if n < 1 {
        return Err("depth must be at least 1".into());
    }
    Ok(n)
}

pub fn render(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    #[test]
    fn rationals() {
        assert_eq!(rational("6/4").unwrap(), q(3, 2));
        assert_eq!(rational("0.0011").unwrap(), q(11, 10_000));
        assert_eq!(rational("-1.5").unwrap(), q(-3, 2));
        assert_eq!(rational("7").unwrap(), q(7, 1));
        assert!(rational("1/0").is_err());
        assert!(rational("1.").is_err());
        assert!(positive_rational("0").is_err());
        assert_eq!(render(&q(4, 2)), "2/1");
    }

    #[test]
    fn endpoints() {
        assert!(matches!(endpoint("[1;(2)]").unwrap(), Endpoint::Periodic(_)));
        assert_eq!(endpoint("[1;2]").unwrap(), Endpoint::Rational(q(3, 2)));
        assert!(endpoint("~[1;2]").is_err());
        assert_eq!(upper_endpoint("inf").unwrap(), Upper(None));
    }
}
