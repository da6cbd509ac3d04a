//! Navigation and row enumeration of the Calkin–Wilf tree.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::One;
use rayon::prelude::*;

use crate::exact::FractionSum;
use crate::{Error, Rational, Result};

/// Index `n >= 1` of a tree row. Row `n` holds `2^(n-1)` rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GenerationIndex(u64);

impl GenerationIndex {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            Err(Error::ZeroGeneration)
        } else {
            Ok(Self(n))
        }
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// Number of elements in the row, `2^(n-1)`.
    pub fn row_len(self) -> BigUint {
        BigUint::one() << (self.0 - 1)
    }

    /// `2^(n-1)` when it fits a machine word.
    pub fn row_len_u64(self) -> Option<u64> {
        (self.0 <= 64).then(|| 1u64 << (self.0 - 1))
    }
}

impl fmt::Display for GenerationIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn check_positive<T: Integer + Clone + fmt::Display>(q: &Ratio<T>) -> Result<()> {
    if q.numer() <= &T::zero() || q.denom() <= &T::zero() {
        Err(Error::NotPositive(format!("{}/{}", q.numer(), q.denom())))
    } else {
        Ok(())
    }
}

/// Left and right child of `a/b`: `a/(a+b)` and `(a+b)/b`.
pub fn children<T: Integer + Clone + fmt::Display>(q: &Ratio<T>) -> Result<(Ratio<T>, Ratio<T>)> {
    check_positive(q)?;
    let (a, b) = (q.numer().clone(), q.denom().clone());
    let s = a.clone() + b.clone();
    // gcd(a, a+b) = gcd(a+b, b) = gcd(a, b) = 1
    Ok((Ratio::new_raw(a, s.clone()), Ratio::new_raw(s, b)))
}

/// Parent of a non-root node.
pub fn mother<T: Integer + Clone + fmt::Display>(q: &Ratio<T>) -> Result<Ratio<T>> {
    check_positive(q)?;
    let (a, b) = (q.numer().clone(), q.denom().clone());
    match a.cmp(&b) {
        std::cmp::Ordering::Equal => Err(Error::Root),
        std::cmp::Ordering::Less => Ok(Ratio::new_raw(a.clone(), b - a)),
        std::cmp::Ordering::Greater => Ok(Ratio::new_raw(a - b.clone(), b)),
    }
}

/// Successor in the row-by-row reading of the tree, `1/(2*floor(x) + 1 - x)`.
pub fn newman_next<T: Integer + Clone + fmt::Display>(x: &Ratio<T>) -> Result<Ratio<T>> {
    check_positive(x)?;
    let (a, b) = (x.numer().clone(), x.denom().clone());
    let k = a.div_floor(&b);
    let two_k_plus_one = k.clone() + k + T::one();
    // (2k+1)b - a > b - (a mod b) > 0, and gcd(b, (2k+1)b - a) = gcd(a, b)
    let den = two_k_plus_one * b.clone() - a;
    Ok(Ratio::new_raw(b, den))
}

/// Ordered, lazily produced row of the tree (or of a subtree).
///
/// Holds one node per level of the current path, so memory is `O(depth)`
/// and advancing costs amortized `O(1)` additions.
#[derive(Debug, Clone)]
pub struct GenerationStream<T> {
    stack: Vec<(T, T)>,
    rights: Vec<bool>,
    depth: usize,
    state: StreamState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StreamState {
    Fresh,
    Running,
    Done,
}

impl<T: Integer + Clone> GenerationStream<T> {
    /// Row `n` of the whole tree.
    pub fn new(n: GenerationIndex) -> Self {
        Self::below((T::one(), T::one()), (n.get() - 1) as usize)
    }

    /// The nodes `depth` levels below `root = (a, b)`, left to right.
    pub fn below(root: (T, T), depth: usize) -> Self {
        let mut stack = Vec::with_capacity(depth + 1);
        stack.push(root);
        while stack.len() <= depth {
            let (a, b) = stack.last().unwrap().clone();
            let s = a.clone() + b;
            stack.push((a, s));
        }
        Self { stack, rights: vec![false; depth], depth, state: StreamState::Fresh }
    }

    fn advance(&mut self) -> bool {
        match self.state {
            StreamState::Done => return false,
            StreamState::Fresh => {
                self.state = StreamState::Running;
                return true;
            }
            StreamState::Running => {}
        }
        while self.rights.last() == Some(&true) {
            self.rights.pop();
            self.stack.pop();
        }
        if self.rights.pop().is_none() {
            self.state = StreamState::Done;
            return false;
        }
        self.stack.pop();
        let (a, b) = self.stack.last().unwrap().clone();
        self.stack.push((a + b.clone(), b));
        self.rights.push(true);
        while self.rights.len() < self.depth {
            let (a, b) = self.stack.last().unwrap().clone();
            let s = a.clone() + b;
            self.stack.push((a, s));
            self.rights.push(false);
        }
        true
    }

    /// Folds over `(numerator, denominator)` pairs without building `Ratio`s.
    pub fn fold_pairs<A>(mut self, init: A, mut f: impl FnMut(A, &T, &T) -> A) -> A {
        let mut acc = init;
        while self.advance() {
            let (a, b) = self.stack.last().unwrap();
            acc = f(acc, a, b);
        }
        acc
    }
}

impl<T: Integer + Clone> Iterator for GenerationStream<T> {
    type Item = Ratio<T>;

    fn next(&mut self) -> Option<Ratio<T>> {
        if self.advance() {
            let (a, b) = self.stack.last().unwrap().clone();
            Some(Ratio::new_raw(a, b))
        } else {
            None
        }
    }
}

/// Row `n` of the tree as a stream.
pub fn generation<T: Integer + Clone>(n: GenerationIndex) -> GenerationStream<T> {
    GenerationStream::new(n)
}

/// Rows below this depth are folded on the calling thread.
const PARALLEL_THRESHOLD: u64 = 14;
const SPLIT_DEPTH: usize = 8;

/// Folds row `n` over `(a, b)` pairs, splitting it into `2^8` subtrees that
/// are processed in parallel. Partial results are combined left to right, so
/// the outcome does not depend on scheduling.
pub fn fold_generation<T, A, Id, F, R>(n: GenerationIndex, identity: Id, fold: F, reduce: R) -> A
where
    T: Integer + Clone + Send + Sync,
    A: Send,
    Id: Fn() -> A + Sync,
    F: Fn(A, &T, &T) -> A + Sync,
    R: Fn(A, A) -> A,
{
    let depth = (n.get() - 1) as usize;
    if n.get() < PARALLEL_THRESHOLD {
        return GenerationStream::<T>::below((T::one(), T::one()), depth).fold_pairs(identity(), &fold);
    }
    let roots: Vec<(T, T)> = GenerationStream::<T>::below((T::one(), T::one()), SPLIT_DEPTH)
        .map(Ratio::into_raw)
        .collect();
    let parts: Vec<A> = roots
        .into_par_iter()
        .map(|root| GenerationStream::below(root, depth - SPLIT_DEPTH).fold_pairs(identity(), &fold))
        .collect();
    parts.into_iter().reduce(reduce).unwrap_or_else(identity)
}

/// Largest row depth whose entries are guaranteed to fit in `u64`
/// (numerators and denominators are bounded by Fibonacci numbers).
pub(crate) const MAX_U64_DEPTH: u64 = 90;

pub(crate) fn check_u64_depth(n: GenerationIndex) -> Result<()> {
    if n.get() > MAX_U64_DEPTH {
        Err(Error::TooLarge(format!("row {n} exceeds machine-word enumeration depth {MAX_U64_DEPTH}")))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumMode {
    ClosedForm,
    ExactEnumeration,
}

/// Sum of row `n`: `3 * 2^(n-2) - 1/2`, either from the closed form or by
/// exact summation over the enumerated row.
pub fn generation_sum(n: GenerationIndex, mode: SumMode) -> Result<Rational> {
    match mode {
        SumMode::ClosedForm => {
            let three_halves_pow = BigInt::from(3) << (n.get() - 1);
            Ok(Rational::new(three_halves_pow - 1, BigInt::from(2)))
        }
        SumMode::ExactEnumeration => {
            check_u64_depth(n)?;
            let sums = fold_generation::<u64, _, _, _, _>(
                n,
                || FractionSum::new(1),
                |mut acc, a, b| {
                    acc.add_power_terms(*b, *a);
                    acc
                },
                FractionSum::merge,
            );
            Ok(sums.finish(1, &BigUint::one()).swap_remove(1))
        }
    }
}

/// Mean of row `n`, `3/2 - 2^(-n)`.
pub fn generation_mean(n: GenerationIndex) -> Rational {
    let pow = BigInt::one() << n.get();
    Rational::new(BigInt::from(3) * &pow - 2, pow * 2)
}

/// Whether `q` is a node of row `n`, by walking up to the root.
pub fn in_generation<T: Integer + Clone + fmt::Display>(q: &Ratio<T>, n: GenerationIndex) -> bool {
    if check_positive(q).is_err() {
        return false;
    }
    let mut cur = q.clone();
    let mut level = 1u64;
    while !cur.is_one() {
        if level >= n.get() {
            return false;
        }
        cur = mother(&cur).expect("non-root positive node");
        level += 1;
    }
    level == n.get()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: u64, b: u64) -> Ratio<u64> {
        Ratio::new(a, b)
    }

    fn row(n: u64) -> Vec<Ratio<u64>> {
        generation(GenerationIndex::new(n).unwrap()).collect()
    }

    #[test]
    fn children_examples() {
        assert_eq!(children(&r(1, 1)).unwrap(), (r(1, 2), r(2, 1)));
        assert_eq!(children(&r(1, 2)).unwrap(), (r(1, 3), r(3, 2)));
        assert_eq!(children(&r(3, 5)).unwrap(), (r(3, 8), r(8, 5)));
        assert!(children(&Ratio::new(0i64, 1)).is_err());
        assert!(children(&Ratio::new(-1i64, 2)).is_err());
    }

    #[test]
    fn mother_examples() {
        assert_eq!(mother(&r(3, 5)).unwrap(), r(3, 2));
        assert_eq!(mother(&r(2, 1)).unwrap(), r(1, 1));
        assert_eq!(mother(&r(8, 5)).unwrap(), r(3, 5));
        assert_eq!(mother(&r(1, 1)), Err(Error::Root));
    }

    #[test]
    fn newman_examples() {
        assert_eq!(newman_next(&r(1, 1)).unwrap(), r(1, 2));
        assert_eq!(newman_next(&r(2, 3)).unwrap(), r(3, 1));
        assert_eq!(newman_next(&r(3, 2)).unwrap(), r(2, 3));
    }

    #[test]
    fn small_rows() {
        assert_eq!(row(1), vec![r(1, 1)]);
        assert_eq!(row(3), vec![r(1, 3), r(3, 2), r(2, 3), r(3, 1)]);
        assert_eq!(
            row(4),
            vec![r(1, 4), r(4, 3), r(3, 5), r(5, 2), r(2, 5), r(5, 3), r(3, 4), r(4, 1)]
        );
    }

    #[test]
    fn row_endpoints_and_length() {
        for n in 1..=12u64 {
            let v = row(n);
            assert_eq!(v.len() as u64, 1 << (n - 1));
            assert_eq!(v[0], r(1, n));
            assert_eq!(*v.last().unwrap(), r(n, 1));
        }
    }

    #[test]
    fn subtree_stream_matches_children() {
        let below: Vec<_> = GenerationStream::below((3u64, 2u64), 1).collect();
        assert_eq!(below, vec![r(3, 5), r(5, 2)]);
        let leaf: Vec<_> = GenerationStream::below((3u64, 2u64), 0).collect();
        assert_eq!(leaf, vec![r(3, 2)]);
    }

    #[test]
    fn zero_generation_rejected() {
        assert_eq!(GenerationIndex::new(0), Err(Error::ZeroGeneration));
    }

    #[test]
    fn sums_and_means() {
        let g = |n| GenerationIndex::new(n).unwrap();
        assert_eq!(generation_sum(g(1), SumMode::ClosedForm).unwrap(), Rational::from_integer(1.into()));
        assert_eq!(generation_sum(g(4), SumMode::ExactEnumeration).unwrap(), Rational::new(23.into(), 2.into()));
        assert_eq!(generation_mean(g(1)), Rational::from_integer(1.into()));
        assert_eq!(generation_mean(g(2)), Rational::new(5.into(), 4.into()));
    }

    #[test]
    fn parallel_fold_matches_sequential() {
        let n = GenerationIndex::new(16).unwrap();
        let seq = generation::<u64>(n).fold(0u64, |acc, q| acc.wrapping_mul(31).wrapping_add(*q.numer()));
        let par_count = fold_generation::<u64, _, _, _, _>(n, || 0u64, |acc, _, _| acc + 1, |x, y| x + y);
        assert_eq!(par_count, 1 << 15);
        let seq_again = generation::<u64>(n).fold(0u64, |acc, q| acc.wrapping_mul(31).wrapping_add(*q.numer()));
        assert_eq!(seq, seq_again);
    }

    #[test]
    fn membership() {
        let n4 = GenerationIndex::new(4).unwrap();
        assert!(in_generation(&r(5, 2), n4));
        assert!(!in_generation(&r(3, 2), n4));
        assert!(in_generation(&r(1, 1), GenerationIndex::new(1).unwrap()));
    }
}
