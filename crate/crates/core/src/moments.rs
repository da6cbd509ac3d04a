//! Moments of the limit distribution.
//!
//! `M_L` is the `L`-th moment of `F` and `m_L` the `L`-th moment of
//! `x / (x + 1)` under `F`. They are linked through the ordered Bell numbers
//! `b_s` by `M_L = sum_i C(L, i) m_i b_(L-i)`, and `m` obeys the symmetry
//! `m_L = sum_s C(L, s) (-1)^s m_s` inherited from `F(y) + F(1/y) = 1`.

use std::fmt::{self, Write as _};
use std::ops::{Add, Mul, Sub};

use num_bigint::{BigInt, BigUint};
use num_traits::{Float, One, ToPrimitive, Zero};

use crate::exact::FractionSum;
use crate::tree::{check_u64_depth, fold_generation, GenerationIndex};
use crate::{Error, Rational, Result};

/// Ordered Bell numbers `b_0, ..., b_L`.
pub fn ordered_bell_table(l: usize) -> Vec<BigUint> {
    let mut b: Vec<BigUint> = Vec::with_capacity(l + 1);
    b.push(BigUint::one());
    for n in 1..=l {
        let binom = binomial_row(n);
        let next = (0..n).fold(BigUint::zero(), |acc, s| acc + &binom[s] * &b[s]);
        b.push(next);
    }
    b
}

/// `b_L`, the number of ordered set partitions of `L` elements.
pub fn ordered_bell(l: usize) -> BigUint {
    ordered_bell_table(l).pop().unwrap()
}

/// `C(n, 0), ..., C(n, n)`.
pub fn binomial_row(n: usize) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for k in 0..n {
        c = c * BigUint::from(n - k) / BigUint::from(k + 1);
        row.push(c.clone());
    }
    row
}

/// Partial sum `sum_{k=0}^{N} k^L / 2^(k+1)` of the series for `b_L`.
pub fn bell_series_check(l: u32, n: u64) -> Rational {
    let den = BigInt::one() << (n + 1);
    let numer = (0..=n).fold(BigInt::zero(), |acc, k| acc + (BigInt::from(k).pow(l) << (n - k)));
    Rational::new(numer, den)
}

/// Upper bound on the omitted tail `sum_{k>N} k^L / 2^(k+1)`, available once
/// consecutive terms shrink by a factor below one.
pub fn bell_series_tail_bound(l: u32, n: u64) -> Option<Rational> {
    let (n1, n2) = (BigInt::from(n + 1), BigInt::from(n + 2));
    // ratio of consecutive terms past N is at most ((N+2)/(N+1))^L / 2
    let ratio = Rational::new(n2.pow(l), n1.pow(l) * 2);
    if ratio >= Rational::one() {
        return None;
    }
    let first = Rational::new(n1.pow(l), BigInt::one() << (n + 2));
    Some(first / (Rational::one() - ratio))
}

/// Which moment sequence a statistic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MomentKind {
    /// `M_L`, moments of `x`.
    Plain,
    /// `m_L`, moments of `x / (x + 1)`.
    Compressed,
}

impl fmt::Display for MomentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MomentKind::Plain => "M",
            MomentKind::Compressed => "m",
        })
    }
}

/// Exact row averages `2^(1-n) sum_j g(x_j)^L` for `L = 0..=l_max`, with
/// `g(x) = x` or `x / (x + 1)`.
pub fn empirical_moments(n: GenerationIndex, l_max: usize, kind: MomentKind) -> Result<Vec<Rational>> {
    check_u64_depth(n)?;
    let sums = fold_generation::<u64, _, _, _, _>(
        n,
        || FractionSum::new(l_max),
        |mut acc, a, b| {
            match kind {
                MomentKind::Plain => acc.add_power_terms(*b, *a),
                MomentKind::Compressed => acc.add_power_terms(a + b, *a),
            }
            acc
        },
        FractionSum::merge,
    );
    Ok(sums.finish(l_max, &(BigUint::one() << (n.get() - 1))))
}

/// Exact `2^(1-n) sum_j g(x_j)^L` for a single `L`.
pub fn empirical_moment(l: usize, n: GenerationIndex, kind: MomentKind) -> Result<Rational> {
    Ok(empirical_moments(n, l, kind)?.swap_remove(l))
}

/// Floating point row averages for `L = 0..=l_max`.
pub fn empirical_moments_float<F: Float + Send>(n: GenerationIndex, l_max: usize, kind: MomentKind) -> Result<Vec<F>> {
    check_u64_depth(n)?;
    let sums = fold_generation::<u64, _, _, _, _>(
        n,
        || vec![F::zero(); l_max + 1],
        |mut acc, a, b| {
            let den = match kind {
                MomentKind::Plain => *b,
                MomentKind::Compressed => a + b,
            };
            let x = F::from(*a).unwrap() / F::from(den).unwrap();
            let mut p = F::one();
            for s in acc.iter_mut() {
                *s = *s + p;
                p = p * x;
            }
            acc
        },
        |mut x, y| {
            for (s, t) in x.iter_mut().zip(y) {
                *s = *s + t;
            }
            x
        },
    );
    let len = F::from(2.0).unwrap().powi((n.get() - 1) as i32);
    Ok(sums.into_iter().map(|s| s / len).collect())
}

/// Values the moment relations can be evaluated in.
pub trait MomentScalar: Clone + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn from_biguint(n: &BigUint) -> Self;
}

impl MomentScalar for Rational {
    fn from_biguint(n: &BigUint) -> Self {
        Rational::from_integer(BigInt::from(n.clone()))
    }
}

impl MomentScalar for f64 {
    fn from_biguint(n: &BigUint) -> Self {
        n.to_f64().unwrap_or(f64::INFINITY)
    }
}

impl MomentScalar for f32 {
    fn from_biguint(n: &BigUint) -> Self {
        n.to_f32().unwrap_or(f32::INFINITY)
    }
}

fn require<S>(values: &[S], l: usize) -> Result<()> {
    if values.len() <= l {
        Err(Error::OutOfRange(format!("need {} moments, got {}", l + 1, values.len())))
    } else {
        Ok(())
    }
}

/// `M_L = sum_i C(L, i) m_i b_(L-i)`.
pub fn big_m_from_m<S: MomentScalar>(m: &[S], l: usize) -> Result<S> {
    require(m, l)?;
    let binom = binomial_row(l);
    let bell = ordered_bell_table(l);
    Ok((0..=l).fold(S::zero(), |acc, i| acc + S::from_biguint(&(&binom[i] * &bell[l - i])) * m[i].clone()))
}

/// `m_L = M_L - sum_{s<L} C(L, s) M_s`.
pub fn m_from_big_m<S: MomentScalar>(big_m: &[S], l: usize) -> Result<S> {
    require(big_m, l)?;
    let binom = binomial_row(l);
    Ok((0..l).fold(big_m[l].clone(), |acc, s| acc - S::from_biguint(&binom[s]) * big_m[s].clone()))
}

/// `m_L - sum_s C(L, s) (-1)^s m_s`.
pub fn m_symmetry_residual<S: MomentScalar>(m: &[S], l: usize) -> Result<S> {
    require(m, l)?;
    let binom = binomial_row(l);
    let (even, odd) = (0..=l).fold((S::zero(), S::zero()), |(e, o), s| {
        let term = S::from_biguint(&binom[s]) * m[s].clone();
        if s % 2 == 0 {
            (e + term, o)
        } else {
            (e, o + term)
        }
    });
    Ok(m[l].clone() - even + odd)
}

/// Main term `m(log 2) / (2 log 2) * L! / (log 2)^L` of the large-`L`
/// asymptotics of `M_L`.
pub fn asymptotic_moment<F: Float>(l: u32, m_log2: F) -> F {
    let ln2 = F::from(std::f64::consts::LN_2).unwrap();
    let two = F::one() + F::one();
    let mut v = m_log2 / (two * ln2);
    for k in 1..=l {
        v = v * F::from(k).unwrap() / ln2;
    }
    v
}

/// Estimate of `m(t) = integral exp(t x / (x + 1)) dF(x)` from one row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenFunPoint {
    pub t: f64,
    pub n: u64,
    pub value: f64,
    /// Bound on `|m(t) - value|` from the uniform distribution bound:
    /// `exp(t x / (x + 1))` is monotone with total variation `|e^t - 1|`.
    pub error_bound: f64,
}

impl GenFunPoint {
    /// The corresponding value `M(t) = m(t) / (2 - e^t)`, for `t < log 2`.
    pub fn plain(&self) -> Option<f64> {
        (self.t < std::f64::consts::LN_2).then(|| self.value * bell_gf(self.t))
    }
}

/// `b(t) = sum_s b_s t^s / s! = 1 / (2 - e^t)` for `t < log 2`.
pub fn bell_gf(t: f64) -> f64 {
    1.0 / (2.0 - t.exp())
}

/// Row estimate `2^(1-n) sum_j exp(t x_j / (x_j + 1))`.
pub fn m_of_t(t: f64, n: GenerationIndex) -> Result<GenFunPoint> {
    check_u64_depth(n)?;
    let sum = fold_generation::<u64, _, _, _, _>(
        n,
        || 0.0f64,
        |acc, a, b| acc + (t * (*a as f64) / ((a + b) as f64)).exp(),
        |x, y| x + y,
    );
    let value = if t == 0.0 { 1.0 } else { sum / 2f64.powi((n.get() - 1) as i32) };
    let error_bound = t.exp_m1().abs() * 2f64.powi(-(n.get() as i32));
    Ok(GenFunPoint { t, n: n.get(), value, error_bound })
}

/// Where a table entry comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Exact,
    Empirical(u64),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Exact => f.write_str("exact"),
            Provenance::Empirical(n) => write!(f, "empirical({n})"),
        }
    }
}

/// One row of a [`MomentTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct MomentRow {
    pub l: usize,
    pub big_m_empirical: f64,
    pub m_empirical: f64,
    pub big_m_from_relation: f64,
    pub asymptotic: f64,
    /// `asymptotic / big_m_empirical`.
    pub ratio: f64,
    pub bell: BigUint,
    pub provenance: Provenance,
}

/// Moment estimates from one row for `L = 0..=l_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub l_max: usize,
    pub n: u64,
    pub m_log2: f64,
    pub rows: Vec<MomentRow>,
}

impl MomentTable {
    pub fn build(l_max: usize, n: GenerationIndex) -> Result<Self> {
        let big_m = empirical_moments_float::<f64>(n, l_max, MomentKind::Plain)?;
        let m = empirical_moments_float::<f64>(n, l_max, MomentKind::Compressed)?;
        let m_log2 = m_of_t(std::f64::consts::LN_2, n)?.value;
        let bell = ordered_bell_table(l_max);
        let rows = (0..=l_max)
            .map(|l| {
                let relation = big_m_from_m(&m, l).unwrap();
                let asymptotic = asymptotic_moment(l as u32, m_log2);
                let exact = l == 0;
                MomentRow {
                    l,
                    big_m_empirical: big_m[l],
                    m_empirical: m[l],
                    big_m_from_relation: relation,
                    asymptotic,
                    ratio: asymptotic / big_m[l],
                    bell: bell[l].clone(),
                    provenance: if exact { Provenance::Exact } else { Provenance::Empirical(n.get()) },
                }
            })
            .collect();
        Ok(Self { l_max, n: n.get(), m_log2, rows })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("L,M_empirical,m_empirical,M_from_relation,asymptotic,ratio\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12}",
                r.l, r.big_m_empirical, r.m_empirical, r.big_m_from_relation, r.asymptotic, r.ratio
            )
            .unwrap();
        }
        out
    }
}
