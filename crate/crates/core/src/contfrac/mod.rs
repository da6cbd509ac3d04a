//! Regular continued fractions and their link to positions in the tree.
//!
//! A positive rational `[a0; a1, ..., am]` sits in row `a0 + a1 + ... + am`,
//! and its path from the root is read off the partial quotients from the
//! last one to the first (see [`path_of`]).

mod hit;
mod path;

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use num_traits::{Float, Zero};

use crate::tree::GenerationIndex;
use crate::{Error, Integral, Result};

pub use hit::{construct_hit, hit_interval, Endpoint, HitConstruction};
pub use path::{path_of, path_of_quotients, rational_at, Direction, TreePath};

/// Finite continued fraction `[a0; a1, ..., am]`.
///
/// Canonical expansions have `a_m >= 2` whenever `m >= 1`. Expansions built
/// with [`ContinuedFraction::non_canonical`] may end in `1` and are flagged.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContinuedFraction<T> {
    quotients: Vec<T>,
    canonical: bool,
}

fn validate_quotients<T: Integral>(q: &[T]) -> Result<()> {
    let Some(first) = q.first() else {
        return Err(Error::InvalidContinuedFraction("no partial quotients".into()));
    };
    if first < &T::zero() {
        return Err(Error::InvalidContinuedFraction(format!("a0 = {first} is negative")));
    }
    if let Some((j, a)) = q.iter().enumerate().skip(1).find(|(_, a)| *a < &T::one()) {
        return Err(Error::InvalidContinuedFraction(format!("a{j} = {a} must be at least 1")));
    }
    Ok(())
}

impl<T: Integral> ContinuedFraction<T> {
    /// Canonical expansion; rejects a trailing quotient `1` after `a0`.
    pub fn new(quotients: Vec<T>) -> Result<Self> {
        validate_quotients(&quotients)?;
        if quotients.len() > 1 && quotients.last().unwrap().is_one() {
            return Err(Error::InvalidContinuedFraction(
                "last partial quotient must be at least 2".into(),
            ));
        }
        Ok(Self { quotients, canonical: true })
    }

    /// Expansion that may end in `1`, e.g. `[4; 1, 1]`.
    pub fn non_canonical(quotients: Vec<T>) -> Result<Self> {
        validate_quotients(&quotients)?;
        let canonical = quotients.len() == 1 || !quotients.last().unwrap().is_one();
        Ok(Self { quotients, canonical })
    }

    #[inline]
    pub fn quotients(&self) -> &[T] {
        &self.quotients
    }

    #[inline]
    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// Index `m` of the last partial quotient.
    pub fn last_index(&self) -> usize {
        self.quotients.len() - 1
    }

    /// Rewrites `[..., a, 1]` as `[..., a + 1]`.
    pub fn canonicalize(mut self) -> Self {
        if !self.canonical {
            self.quotients.pop();
            let last = self.quotients.last_mut().unwrap();
            *last = last.clone() + T::one();
            self.canonical = true;
        }
        self
    }

    pub fn quotient_sum(&self) -> T {
        self.quotients.iter().fold(T::zero(), |acc, a| acc + a.clone())
    }

    /// Exact value.
    pub fn value(&self) -> Ratio<T> {
        let (p, q) = convergent_pair(&self.quotients);
        // consecutive convergent numerators and denominators are coprime
        Ratio::new_raw(p, q)
    }

    /// All convergents `[a0], [a0; a1], ...`.
    pub fn convergents(&self) -> Vec<Ratio<T>> {
        let (mut p0, mut q0) = (T::one(), T::zero());
        let (mut p1, mut q1) = (T::zero(), T::one());
        let mut out = Vec::with_capacity(self.quotients.len());
        for a in &self.quotients {
            let p = a.clone() * p0.clone() + p1;
            let q = a.clone() * q0.clone() + q1;
            p1 = p0;
            q1 = q0;
            p0 = p.clone();
            q0 = q.clone();
            out.push(Ratio::new_raw(p, q));
        }
        out
    }
}

impl<T: fmt::Display> fmt::Display for ContinuedFraction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_quotients(f, &self.quotients, &[])
    }
}

fn write_quotients<T: fmt::Display>(f: &mut fmt::Formatter<'_>, pre: &[T], period: &[T]) -> fmt::Result {
    f.write_str("[")?;
    for (i, a) in pre.iter().enumerate() {
        match i {
            0 => write!(f, "{a}")?,
            1 => write!(f, ";{a}")?,
            _ => write!(f, ",{a}")?,
        }
    }
    if !period.is_empty() {
        match pre.len() {
            0 => {}
            1 => f.write_str(";")?,
            _ => f.write_str(",")?,
        }
        f.write_str("(")?;
        for (i, a) in period.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")?;
    }
    f.write_str("]")
}

/// `(p, q)` with `p/q = [a0; ..., am]`.
pub(crate) fn convergent_pair<T: Integral>(quotients: &[T]) -> (T, T) {
    let (mut p0, mut q0) = (T::one(), T::zero());
    let (mut p1, mut q1) = (T::zero(), T::one());
    for a in quotients {
        let p = a.clone() * p0.clone() + p1;
        let q = a.clone() * q0.clone() + q1;
        p1 = p0;
        q1 = q0;
        p0 = p;
        q0 = q;
    }
    (p0, q0)
}

/// Canonical expansion by the Euclidean algorithm. `0` expands to `[0]`.
pub fn cf_of<T: Integral>(q: &Ratio<T>) -> Result<ContinuedFraction<T>> {
    if q < &Ratio::zero() {
        return Err(Error::NotPositive(q.to_string()));
    }
    let (mut a, mut b) = (q.numer().clone(), q.denom().clone());
    let mut quotients = Vec::new();
    loop {
        let (d, r) = a.div_rem(&b);
        quotients.push(d);
        if r.is_zero() {
            break;
        }
        a = b;
        b = r;
    }
    Ok(ContinuedFraction { quotients, canonical: true })
}

/// Exact value of an expansion (canonical or not).
pub fn rational_of<T: Integral>(cf: &ContinuedFraction<T>) -> Ratio<T> {
    cf.value()
}

/// Row index of `q`, the sum of its partial quotients.
pub fn depth_of<T: Integral>(q: &Ratio<T>) -> Result<GenerationIndex> {
    if q <= &Ratio::zero() {
        return Err(Error::NotPositive(q.to_string()));
    }
    let sum = cf_of(q)?.quotient_sum();
    let n = sum
        .to_u64()
        .ok_or_else(|| Error::TooLarge(format!("quotient sum {sum} exceeds u64")))?;
    GenerationIndex::new(n)
}

/// Eventually periodic expansion `[p0; p1, ..., (b0, ..., bl-1)]`, the
/// expansion of a quadratic irrational.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PeriodicCf<T> {
    preperiod: Vec<T>,
    period: Vec<T>,
}

impl<T: Integral> PeriodicCf<T> {
    pub fn new(preperiod: Vec<T>, period: Vec<T>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidContinuedFraction("empty period".into()));
        }
        if let Some(a) = period.iter().find(|a| *a < &T::one()) {
            return Err(Error::InvalidContinuedFraction(format!("period quotient {a} must be at least 1")));
        }
        if !preperiod.is_empty() {
            validate_quotients(&preperiod)?;
        }
        Ok(Self { preperiod, period })
    }

    #[inline]
    pub fn preperiod(&self) -> &[T] {
        &self.preperiod
    }

    #[inline]
    pub fn period(&self) -> &[T] {
        &self.period
    }

    /// Partial quotient at index `i`.
    pub fn quotient(&self, i: usize) -> &T {
        if i < self.preperiod.len() {
            &self.preperiod[i]
        } else {
            &self.period[(i - self.preperiod.len()) % self.period.len()]
        }
    }

    /// The first `len` partial quotients.
    pub fn prefix(&self, len: usize) -> Vec<T> {
        (0..len).map(|i| self.quotient(i).clone()).collect()
    }

    /// Complete quotient `[a_k; a_{k+1}, ...]`.
    pub fn tail(&self, k: usize) -> PeriodicCf<T> {
        let r = self.preperiod.len();
        if k < r {
            Self { preperiod: self.preperiod[k..].to_vec(), period: self.period.clone() }
        } else {
            let shift = (k - r) % self.period.len();
            let mut period = self.period[shift..].to_vec();
            period.extend_from_slice(&self.period[..shift]);
            Self { preperiod: Vec::new(), period }
        }
    }

    /// The expansion with the partial quotient at index `k` increased by one.
    pub fn with_incremented(&self, k: usize) -> PeriodicCf<T> {
        let keep = (k + 1).max(self.preperiod.len());
        let mut preperiod = self.prefix(keep);
        preperiod[k] = preperiod[k].clone() + T::one();
        let tail = self.tail(keep);
        debug_assert!(tail.preperiod.is_empty());
        Self { preperiod, period: tail.period }
    }

    /// Floating point value.
    pub fn value<F: Float>(&self) -> F {
        let to_f = |x: &T| F::from(x.to_f64().unwrap_or(f64::INFINITY)).unwrap();
        // purely periodic part y solves q y^2 + (q' - p) y - p' = 0
        let n = self.period.len();
        let (p, q) = convergent_pair(&self.period);
        let (pp, qp) = convergent_pair(&self.period[..n - 1]);
        let (p, q, pp, qp) = (to_f(&p), to_f(&q), to_f(&pp), to_f(&qp));
        let two = F::one() + F::one();
        let four = two * two;
        let b = p - qp;
        let y = (b + (b * b + four * q * pp).sqrt()) / (two * q);
        if self.preperiod.is_empty() {
            return y;
        }
        let r = self.preperiod.len();
        let (p1, q1) = convergent_pair(&self.preperiod);
        let (p2, q2) = convergent_pair(&self.preperiod[..r - 1]);
        (to_f(&p1) * y + to_f(&p2)) / (to_f(&q1) * y + to_f(&q2))
    }

    /// Convergent `p_k/q_k`; below the value for even `k`, above for odd `k`.
    pub fn convergent(&self, k: usize) -> Ratio<T> {
        let (p, q) = convergent_pair(&self.prefix(k + 1));
        Ratio::new_raw(p, q)
    }
}

impl<T: fmt::Display> fmt::Display for PeriodicCf<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_quotients(f, &self.preperiod, &self.period)
    }
}

/// Compares two quotient sequences as real numbers. `None` marks the end
/// of a finite expansion and acts as an infinite quotient. Gives up after
/// `limit` indices and reports equality.
pub(crate) fn cmp_quotients<T: Integral>(
    a: impl Fn(usize) -> Option<T>,
    b: impl Fn(usize) -> Option<T>,
    limit: usize,
) -> Ordering {
    for i in 0..limit {
        let ord = match (a(i), b(i)) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => Ordering::Greater,
            (Some(_), None) => Ordering::Less,
            (Some(x), Some(y)) => x.cmp(&y),
        };
        if ord != Ordering::Equal {
            return if i % 2 == 0 { ord } else { ord.reverse() };
        }
    }
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Ratio<i64> {
        Ratio::new(a, b)
    }

    #[test]
    fn expansion_examples() {
        assert_eq!(cf_of(&q(5, 2)).unwrap().quotients(), &[2, 2]);
        assert_eq!(cf_of(&q(1, 1)).unwrap().quotients(), &[1]);
        assert_eq!(cf_of(&q(4, 3)).unwrap().quotients(), &[1, 3]);
        assert_eq!(cf_of(&q(0, 1)).unwrap().quotients(), &[0]);
    }

    #[test]
    fn value_examples() {
        let cf = |v: Vec<i64>| ContinuedFraction::non_canonical(v).unwrap();
        assert_eq!(rational_of(&cf(vec![2, 2])), q(5, 2));
        assert_eq!(rational_of(&cf(vec![0, 2])), q(1, 2));
        assert_eq!(rational_of(&cf(vec![4, 1, 1])), q(9, 2));
        assert!(!cf(vec![4, 1, 1]).is_canonical());
        assert_eq!(cf(vec![4, 1, 1]).canonicalize().quotients(), &[4, 2]);
    }

    #[test]
    fn depth_examples() {
        assert_eq!(depth_of(&q(4, 3)).unwrap().get(), 4);
        assert_eq!(depth_of(&q(1, 1)).unwrap().get(), 1);
        assert_eq!(depth_of(&q(5, 2)).unwrap().get(), 4);
        assert!(depth_of(&q(0, 1)).is_err());
    }

    #[test]
    fn canonical_validation() {
        assert!(ContinuedFraction::new(vec![1i64, 1]).is_err());
        assert!(ContinuedFraction::new(vec![1i64, 0, 2]).is_err());
        assert!(ContinuedFraction::<i64>::new(vec![]).is_err());
        assert!(ContinuedFraction::new(vec![1i64]).is_ok());
    }

    #[test]
    fn periodic_values() {
        let sqrt2 = PeriodicCf::new(vec![1i64], vec![2]).unwrap();
        assert!((sqrt2.value::<f64>() - 2f64.sqrt()).abs() < 1e-15);
        let golden = PeriodicCf::new(vec![], vec![1i64]).unwrap();
        assert!((golden.value::<f64>() - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        let mixed = PeriodicCf::new(vec![0i64, 2], vec![1, 3]).unwrap();
        // compare against a long truncation
        let v = ContinuedFraction::non_canonical(mixed.prefix(40)).unwrap().value();
        let approx = *v.numer() as f64 / *v.denom() as f64;
        assert!((mixed.value::<f64>() - approx).abs() < 1e-12);
    }

    #[test]
    fn periodic_tail_and_increment() {
        let x = PeriodicCf::new(vec![3i64], vec![1, 2]).unwrap();
        assert_eq!(x.tail(2).period(), &[2, 1]);
        let y = x.with_incremented(2);
        assert_eq!(y.prefix(6), vec![3, 1, 3, 1, 2, 1]);
        assert!(PeriodicCf::<i64>::new(vec![1], vec![]).is_err());
        assert_eq!(x.to_string(), "[3;(1,2)]");
    }

    #[test]
    fn lexicographic_comparison() {
        let exp = |v: Vec<i64>| move |i: usize| v.get(i).copied();
        assert_eq!(cmp_quotients(exp(vec![1]), exp(vec![1, 2]), 10), Ordering::Less);
        assert_eq!(cmp_quotients(exp(vec![0]), exp(vec![0, 5]), 10), Ordering::Less);
        assert_eq!(cmp_quotients(exp(vec![2, 3]), exp(vec![2, 4]), 10), Ordering::Greater);
        assert_eq!(cmp_quotients(exp(vec![2, 3]), exp(vec![2, 3]), 10), Ordering::Equal);
    }
}
