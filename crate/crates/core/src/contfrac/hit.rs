use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use num_integer::Integer;
use num_traits::Zero;

use super::{cf_of, cmp_quotients, convergent_pair, rational_at, PeriodicCf, TreePath};
use crate::{Error, Integral, Result};

/// Interval endpoint: a non-negative rational or a quadratic irrational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint<T: Clone + Integer> {
    Rational(Ratio<T>),
    Periodic(PeriodicCf<T>),
}

impl<T: fmt::Display + Clone + Integer> fmt::Display for Endpoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Rational(q) => write!(f, "{q}"),
            Endpoint::Periodic(x) => write!(f, "{x}"),
        }
    }
}

impl<T: Clone + Integer> From<Ratio<T>> for Endpoint<T> {
    fn from(q: Ratio<T>) -> Self {
        Endpoint::Rational(q)
    }
}

impl<T: Clone + Integer> From<PeriodicCf<T>> for Endpoint<T> {
    fn from(x: PeriodicCf<T>) -> Self {
        Endpoint::Periodic(x)
    }
}

/// Quotient sequence of an endpoint, expanded lazily for periodic ones.
enum Expansion<T> {
    Finite(Vec<T>),
    Periodic(PeriodicCf<T>),
}

impl<T: Integral> Expansion<T> {
    fn of(e: &Endpoint<T>) -> Result<Self> {
        Ok(match e {
            Endpoint::Rational(q) => Expansion::Finite(cf_of(q)?.quotients),
            Endpoint::Periodic(x) => Expansion::Periodic(x.clone()),
        })
    }

    fn get(&self, i: usize) -> Option<T> {
        match self {
            Expansion::Finite(v) => v.get(i).cloned(),
            Expansion::Periodic(x) => Some(x.quotient(i).clone()),
        }
    }

    /// Index bound past which two different expansions must have differed.
    fn horizon(&self) -> (usize, usize) {
        match self {
            Expansion::Finite(v) => (v.len() + 1, 1),
            Expansion::Periodic(x) => (x.preperiod().len(), x.period().len()),
        }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        let (ha, pa) = self.horizon();
        let (hb, pb) = other.horizon();
        cmp_quotients(|i| self.get(i), |i| other.get(i), ha + hb + pa * pb + 1)
    }
}

/// The point found by [`construct_hit`], with its construction record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HitConstruction<T: Clone + Integer> {
    /// Partial quotients as constructed; may end in `1`.
    pub quotients: Vec<T>,
    /// Least index at which the (possibly shrunk) endpoints differ.
    pub split_index: usize,
    /// Whether the interval had to be replaced by a rational subinterval.
    pub shrunk: bool,
    /// Value of `quotients`, reduced.
    pub value: Ratio<T>,
}

/// A rational strictly inside `(alpha, beta)` whose path starts with
/// `prefix`. See [`construct_hit`] for the construction.
pub fn hit_interval<T: Integral>(alpha: &Endpoint<T>, beta: &Endpoint<T>, prefix: &TreePath) -> Result<Ratio<T>> {
    construct_hit(alpha, beta, prefix).map(|h| h.value)
}

/// Builds `x = [x0, ..., xk, s, c0, ..., cm]` where `x0..x(k-1)` are the
/// common quotients of the endpoints, `xk` is one more than the smaller
/// quotient at the first difference, `s` is `1` or `1,1` so that `c0` lands
/// at an even index, and `[c0; ..., cm]` is the node reached by `prefix`.
/// When the quotients at the first difference are closer than 2, the
/// interval is first replaced by `([y, N], [y, N + 2])` for a rational `y`
/// inside it and `N` large.
pub fn construct_hit<T: Integral>(
    alpha: &Endpoint<T>,
    beta: &Endpoint<T>,
    prefix: &TreePath,
) -> Result<HitConstruction<T>> {
    let empty = || Error::EmptyInterval(alpha.to_string(), beta.to_string());
    if let Endpoint::Rational(a) = alpha {
        if a < &Ratio::zero() {
            return Err(Error::NotPositive(a.to_string()));
        }
    }
    let ea = Expansion::of(alpha)?;
    let eb = Expansion::of(beta)?;
    if ea.cmp(&eb) != Ordering::Less {
        return Err(empty());
    }

    let mut k = 0;
    while ea.get(k) == eb.get(k) {
        k += 1;
    }
    let mut head: Vec<T> = (0..k).map(|i| ea.get(i).unwrap()).collect();
    let (lo, gap_ok) = match (ea.get(k), eb.get(k)) {
        (Some(a), Some(b)) => {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let ok = hi - lo.clone() >= T::one() + T::one();
            (lo, ok)
        }
        (Some(a), None) | (None, Some(a)) => (a, true),
        (None, None) => unreachable!("distinct expansions"),
    };

    let (lo, shrunk) = if gap_ok {
        (lo, false)
    } else {
        let (y, n) = shrink(alpha, beta, &ea, &eb)?;
        head = y;
        k = head.len();
        (n, true)
    };
    let mut quotients = head;
    quotients.push(lo + T::one());

    let tail = if prefix.is_root() { Vec::new() } else { cf_of(&rational_at::<T>(prefix)?)?.quotients };
    if tail.is_empty() || k % 2 == 1 {
        quotients.extend([T::one(), T::one()]);
    } else {
        quotients.push(T::one());
    }
    let mut tail = tail.into_iter();
    if let Some(c0) = tail.next() {
        if c0.is_zero() {
            let c1 = tail.next().expect("a node below 1 has at least two quotients");
            let last = quotients.last_mut().unwrap();
            *last = last.clone() + c1;
        } else {
            quotients.push(c0);
        }
    }
    quotients.extend(tail);

    let (p, q) = convergent_pair(&quotients);
    Ok(HitConstruction { quotients, split_index: k, shrunk, value: Ratio::new_raw(p, q) })
}

/// Finds `y = [y0; ..., yr]` strictly inside the interval and `N` with
/// `[y, N]` and `[y, N + 2]` both inside.
fn shrink<T: Integral>(
    alpha: &Endpoint<T>,
    beta: &Endpoint<T>,
    ea: &Expansion<T>,
    eb: &Expansion<T>,
) -> Result<(Vec<T>, T)> {
    let inside = |qs: &[T]| {
        let e = Expansion::Finite(qs.to_vec());
        ea.cmp(&e) == Ordering::Less && e.cmp(eb) == Ordering::Less
    };
    let below_beta = |x: &Ratio<T>| {
        let e = Expansion::Finite(cf_of(x).unwrap().quotients);
        e.cmp(eb) == Ordering::Less
    };

    let lower = match alpha {
        Endpoint::Rational(a) => a.clone(),
        Endpoint::Periodic(x) => (1..).step_by(2).map(|j| x.convergent(j)).find(|c| below_beta(c)).unwrap(),
    };
    let upper = match beta {
        Endpoint::Rational(b) => b.clone(),
        Endpoint::Periodic(x) => (0..).step_by(2).map(|j| x.convergent(j)).find(|c| c > &lower).unwrap(),
    };
    let two = T::one() + T::one();
    let y = (lower + upper) / Ratio::from_integer(two.clone());
    let y = cf_of(&y)?.quotients;

    let mut n = two.clone();
    let mut candidate = y.clone();
    loop {
        candidate.truncate(y.len());
        candidate.push(n.clone());
        let near = inside(&candidate);
        candidate.pop();
        candidate.push(n.clone() + two.clone());
        if near && inside(&candidate) {
            return Ok((y, n));
        }
        n = n * two.clone();
    }
}

#[cfg(test)]
mod tests {
    use super::super::path_of;
    use super::*;

    fn q(a: i64, b: i64) -> Endpoint<i64> {
        Endpoint::Rational(Ratio::new(a, b))
    }

    fn check(alpha: Endpoint<i64>, beta: Endpoint<i64>, prefix: &str) -> Ratio<i64> {
        let prefix: TreePath = prefix.parse().unwrap();
        let x = hit_interval(&alpha, &beta, &prefix).unwrap();
        let xf = *x.numer() as f64 / *x.denom() as f64;
        let val = |e: &Endpoint<i64>| match e {
            Endpoint::Rational(r) => *r.numer() as f64 / *r.denom() as f64,
            Endpoint::Periodic(p) => p.value::<f64>(),
        };
        assert!(val(&alpha) < xf && xf < val(&beta), "{x} not in ({alpha}, {beta})");
        assert!(prefix.is_prefix_of(&path_of(&x).unwrap()), "{x} path does not start with {prefix}");
        x
    }

    #[test]
    fn empty_prefix_example() {
        assert_eq!(check(q(3, 1), q(5, 1), ""), Ratio::new(9, 2));
    }

    #[test]
    fn prefixed_examples() {
        check(q(1, 1), q(2, 1), "LR");
        check(q(3, 1), q(5, 1), "L");
        check(q(3, 1), q(5, 1), "RRL");
        check(q(0, 1), q(1, 100), "LRLR");
        check(q(1, 1), q(4, 3), "R");
        check(q(7, 5), q(10, 7), "LLRRL");
    }

    #[test]
    fn irrational_endpoints() {
        let sqrt2 = Endpoint::Periodic(PeriodicCf::new(vec![1i64], vec![2]).unwrap());
        let golden = Endpoint::Periodic(PeriodicCf::new(vec![], vec![1i64]).unwrap());
        check(sqrt2.clone(), golden.clone(), "LR");
        check(q(1, 1), sqrt2.clone(), "R");
        check(sqrt2, q(3, 2), "");
    }

    #[test]
    fn empty_interval() {
        assert!(hit_interval(&q(1, 2), &q(1, 2), &TreePath::root()).is_err());
        assert!(hit_interval(&q(2, 1), &q(1, 2), &TreePath::root()).is_err());
    }
}
