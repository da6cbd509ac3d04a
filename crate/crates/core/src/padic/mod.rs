//! p-adic statistics of the tree rows.
//!
//! For a prime `p`, the proportion of a row lying in a p-adic ball or in
//! `{ord_p(x) <= -k}` follows a finite Markov chain whose states are such
//! sets, with transitions `S -> S - 1` and `S -> S / (1 - S)` of
//! probability `1/2` each. The chains are doubly stochastic and primitive,
//! so the limits are uniform averages over an orbit. This yields
//!
//! * `mu(z, nu) = 1 / (p^nu + p^(nu-1))` for p-adic integers `z`,
//! * `mu(z, nu) = 1 / (p^(nu+2l) + p^(nu+2l-1))` when `ord_p(z) = -l < 0`,
//! * `mu(0, -nu) = 1 - 1 / (p^(nu+1) + p^nu)` for `nu >= 0`,
//!
//! where `mu(z, nu)` is the limiting share of `{x : ord_p(x - z) >= nu}`.

mod chain;
mod poly;
mod state;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use crate::tree::{check_u64_depth, fold_generation, GenerationIndex};
use crate::{to_bigint, Error, Integral, Rational, Result};

pub use chain::{
    build_orbit, char_poly, orbit_of, residue_distribution, residue_matrix, ResidueDistribution, TransitionMatrix,
    CHAR_POLY_MAX_P, DEFAULT_MAX_STATES, DENSE_LIMIT, POWER_TEST_LIMIT,
};
pub use poly::Polynomial;
pub use state::PadicState;

/// A prime number, checked on construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PadicPrime(u64);

impl PadicPrime {
    pub fn new(p: u64) -> Result<Self> {
        let prime = p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0);
        if prime {
            Ok(Self(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// `p^e`; panics on overflow.
    pub fn pow(self, e: u32) -> u64 {
        self.0.checked_pow(e).unwrap_or_else(|| panic!("{}^{e} overflows u64", self.0))
    }

    fn big_pow(self, e: u64) -> BigInt {
        BigInt::from(self.0).pow(e as u32)
    }
}

impl fmt::Display for PadicPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn ord_int(x: &BigInt, p: u64) -> i64 {
    let p = BigInt::from(p);
    let mut x = x.abs();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        x = q;
        v += 1;
    }
}

pub(crate) fn ord_p_big(q: &Ratio<BigInt>, p: PadicPrime) -> i64 {
    ord_int(q.numer(), p.get()) - ord_int(q.denom(), p.get())
}

/// Exponent of `p` in a non-zero rational.
pub fn ord_p<T: Integral>(q: &Ratio<T>, p: PadicPrime) -> Result<i64> {
    if q.is_zero() {
        return Err(Error::InfiniteValuation);
    }
    Ok(ord_int(&to_bigint(q.numer()), p.get()) - ord_int(&to_bigint(q.denom()), p.get()))
}

pub(crate) fn inv_mod_prime(a: u64, p: u64) -> u64 {
    let g = (a as i128).extended_gcd(&(p as i128));
    g.x.rem_euclid(p as i128) as u64
}

/// `(E(n), O(n))`: members of row `n` with an even part, and with both
/// parts odd, by enumeration.
pub fn parity_counts(n: GenerationIndex) -> Result<(u64, u64)> {
    check_u64_depth(n)?;
    Ok(fold_generation::<u64, _, _, _, _>(
        n,
        || (0u64, 0u64),
        |(e, o), a, b| if (a & b) & 1 == 1 { (e, o + 1) } else { (e + 1, o) },
        |x, y| (x.0 + y.0, x.1 + y.1),
    ))
}

/// `((2^n + 2(-1)^n) / 3, (2^(n-1) + 2(-1)^(n-1)) / 3)`.
pub fn parity_closed_form(n: GenerationIndex) -> (BigInt, BigInt) {
    let f = |k: u64| {
        let sign = if k % 2 == 0 { 2 } else { -2 };
        ((BigInt::one() << k) + sign) / 3
    };
    (f(n.get()), f(n.get() - 1))
}

/// Limiting share `mu(z, nu)` of each row in `{x : ord_p(x - z) >= nu}`.
///
/// When `ord_p(z) >= nu` the set equals the one for `z = 0`.
pub fn mu<T: Integral>(p: PadicPrime, z: &Ratio<T>, nu: i64) -> Rational {
    let centered_at_zero = z.is_zero() || ord_p(z, p).unwrap() >= nu;
    let one = Rational::one();
    let level_share = |k: i64| -> Rational {
        // 1 / (p^k + p^(k-1)) with k >= 1
        let k = k as u64;
        Rational::new(BigInt::one(), p.big_pow(k) + p.big_pow(k - 1))
    };
    if centered_at_zero {
        return if nu >= 1 { level_share(nu) } else { one - level_share(1 - nu) };
    }
    let v = ord_p(z, p).unwrap();
    if v >= 0 {
        level_share(nu)
    } else {
        level_share(nu - 2 * v)
    }
}

/// The state whose limiting share is `mu(z, nu)`, and whether the share is
/// that of its complement.
fn mu_state<T: Integral>(p: PadicPrime, z: &Ratio<T>, nu: i64) -> Result<(PadicState, bool)> {
    let big = |k: i64| u32::try_from(k).map_err(|_| Error::OutOfRange(format!("level {k}")));
    if z.is_zero() || ord_p(z, p)? >= nu {
        return Ok(if nu >= 1 {
            (PadicState::ball(p, 0, big(nu)?), false)
        } else {
            (PadicState::G { level: big(1 - nu)? }, true)
        });
    }
    let z = Ratio::new(to_bigint(z.numer()), to_bigint(z.denom()));
    let v = ord_p_big(&z, p);
    let lambda = big((-v).max(0))?;
    let modulus = p.pow(big(nu + lambda as i64)?);
    // residue of z * p^lambda modulo p^(nu + lambda)
    let scaled = &z * Rational::from_integer(BigInt::from(p.get()).pow(lambda));
    let m = BigInt::from(modulus);
    let den_inv = scaled.denom().mod_floor(&m).extended_gcd(&m).x;
    let residue = (scaled.numer() * den_inv).mod_floor(&m).to_u64().unwrap();
    Ok((PadicState::F { lambda, residue, level: nu }, false))
}

/// `mu(z, nu)` recomputed from the stationary vector of the orbit chain
/// through the corresponding state.
pub fn mu_from_orbit<T: Integral>(p: PadicPrime, z: &Ratio<T>, nu: i64, max_states: usize) -> Result<Rational> {
    let (state, complement) = mu_state(p, z, nu)?;
    let chain = orbit_of(p, state, max_states)?;
    let pi = chain.stationary()?;
    let one = Rational::one();
    let share: Rational = chain
        .states()
        .iter()
        .zip(&pi)
        .filter(|(s, _)| s.contains_big(p, &one))
        .map(|(_, w)| w.clone())
        .sum();
    Ok(if complement { one - share } else { share })
}

/// Share of row `n` in `{x : ord_p(x - z) >= nu}`, counting `x = z`.
pub fn empirical_mu<T: Integral>(p: PadicPrime, z: &Ratio<T>, nu: i64, n: GenerationIndex) -> Result<Rational> {
    check_u64_depth(n)?;
    let (c, d) = (to_bigint(z.numer()), to_bigint(z.denom()));
    let (Some(c), Some(d)) = (c.to_i64(), d.to_i64()) else {
        return Err(Error::TooLarge(format!("center {z} must fit 64-bit parts")));
    };
    let pv = p.get() as i128;
    let ord = |mut x: i128| {
        let mut v = 0i64;
        while x % pv == 0 {
            x /= pv;
            v += 1;
        }
        v
    };
    let vd = ord(d as i128);
    // a/b - c/d = (a d - c b) / (b d)
    let count = fold_generation::<u64, _, _, _, _>(
        n,
        || 0u64,
        |acc, a, b| {
            let num = *a as i128 * d as i128 - c as i128 * *b as i128;
            let hit = num == 0 || ord(num) - ord(*b as i128) - vd >= nu;
            acc + hit as u64
        },
        |x, y| x + y,
    );
    Ok(Rational::new(count.into(), BigInt::one() << (n.get() - 1)))
}

/// Evaluation of `Z_p(s) = sum_nu p^(-nu s) mu(ord_p(x) = nu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaValue<F> {
    pub closed_form: F,
    pub sphere_sum: F,
    /// Bound on the spheres left out of `sphere_sum`.
    pub tail_bound: F,
    /// Spheres `|nu| <= terms` were summed.
    pub terms: u32,
}

/// `Z_p(s) = (p-1)^2 / ((p - p^-s)(p - p^s))` for `-1 < s < 1`, alongside
/// the sphere sum with masses `mu(0, nu) - mu(0, nu + 1)`.
pub fn zeta_p<F: Float>(p: PadicPrime, s: F, tolerance: F) -> Result<ZetaValue<F>> {
    let one = F::one();
    if !(s > -one && s < one) {
        return Err(Error::OutOfRange("s must lie in (-1, 1)".into()));
    }
    let pf = F::from(p.get()).unwrap();
    let closed_form = (pf - one).powi(2) / ((pf - pf.powf(-s)) * (pf - pf.powf(s)));

    // masses decay like p^-|nu|, weights grow like p^(|nu| |s|)
    let r = pf.powf(-(one - s.abs()));
    let c = (pf - one) / (pf + one) * (one + one);
    let tail = |k: u32| c * r.powi(k as i32 + 1) / (one - r);
    let mut terms = 0u32;
    while tail(terms) > tolerance && terms < 100_000 {
        terms += 1;
    }
    let zero = Ratio::<i64>::zero();
    let sphere = |nu: i64| (mu(p, &zero, nu) - mu(p, &zero, nu + 1)).to_f64().unwrap();
    let mut sphere_sum = F::from(sphere(0)).unwrap();
    for k in 1..=terms as i64 {
        let weights = pf.powf(-s * F::from(k).unwrap()) * F::from(sphere(k)).unwrap()
            + pf.powf(s * F::from(k).unwrap()) * F::from(sphere(-k)).unwrap();
        sphere_sum = sphere_sum + weights;
    }
    Ok(ZetaValue { closed_form, sphere_sum, tail_bound: tail(terms), terms })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> PadicPrime {
        PadicPrime::new(n).unwrap()
    }

    fn q(a: i64, b: i64) -> Ratio<i64> {
        Ratio::new(a, b)
    }

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    fn g(n: u64) -> GenerationIndex {
        GenerationIndex::new(n).unwrap()
    }

    #[test]
    fn primes() {
        assert!(PadicPrime::new(2).is_ok());
        assert!(PadicPrime::new(97).is_ok());
        assert_eq!(PadicPrime::new(1), Err(Error::NotPrime(1)));
        assert_eq!(PadicPrime::new(91), Err(Error::NotPrime(91)));
    }

    #[test]
    fn valuations() {
        assert_eq!(ord_p(&q(4, 3), p(2)).unwrap(), 2);
        assert_eq!(ord_p(&q(3, 8), p(2)).unwrap(), -3);
        assert_eq!(ord_p(&q(5, 3), p(5)).unwrap(), 1);
        assert_eq!(ord_p(&q(0, 1), p(5)), Err(Error::InfiniteValuation));
    }

    #[test]
    fn parity_examples() {
        assert_eq!(parity_counts(g(1)).unwrap(), (0, 1));
        assert_eq!(parity_counts(g(4)).unwrap(), (6, 2));
        assert_eq!(parity_counts(g(10)).unwrap(), (342, 170));
        for n in 1..=16 {
            let (e, o) = parity_counts(g(n)).unwrap();
            assert_eq!(parity_closed_form(g(n)), (e.into(), o.into()));
        }
    }

    #[test]
    fn mu_examples() {
        assert_eq!(mu(p(2), &q(0, 1), 0), r(2, 3));
        assert_eq!(mu(p(3), &q(1, 1), 1), r(1, 4));
        assert_eq!(mu(p(2), &q(1, 2), 0), r(1, 6));
        assert_eq!(mu(p(3), &q(9, 1), 2), mu(p(3), &q(0, 1), 2));
        for prime in [2, 3, 5] {
            let pp = p(prime);
            assert_eq!(mu(pp, &q(0, 1), 0), r(prime as i64, prime as i64 + 1));
        }
    }

    #[test]
    fn mu_spheres_nonnegative_and_telescoping() {
        for prime in [2, 3, 5] {
            let pp = p(prime);
            let zero = q(0, 1);
            for nu in -5..=5 {
                assert!(mu(pp, &zero, nu) >= mu(pp, &zero, nu + 1));
            }
            let total = mu(pp, &zero, -40) - mu(pp, &zero, 41);
            assert!((r(1, 1) - total) < Rational::new(1.into(), BigInt::from(prime).pow(39)));
        }
    }

    #[test]
    fn mu_matches_orbit_stationary() {
        for prime in [2u64, 3, 5] {
            let pp = p(prime);
            let pi = prime as i64;
            for z in [q(0, 1), q(1, 1), q(2, 1), q(pi, 1), q(1, pi), q(2, pi), q(pi + 1, pi)] {
                for nu in -2..=2 {
                    let closed = mu(pp, &z, nu);
                    let chain = mu_from_orbit(pp, &z, nu, 10_000).unwrap();
                    assert_eq!(closed, chain, "p={prime} z={z} nu={nu}");
                }
            }
        }
    }

    #[test]
    fn empirical_examples() {
        assert_eq!(empirical_mu(p(2), &q(0, 1), 1, g(4)).unwrap(), r(3, 8));
        let e = empirical_mu(p(2), &q(0, 1), 0, g(16)).unwrap().to_f64().unwrap();
        assert!((e - 2.0 / 3.0).abs() < 0.01);
        let e = empirical_mu(p(3), &q(2, 1), 1, g(14)).unwrap().to_f64().unwrap();
        assert!((e - 0.25).abs() < 0.02);
    }

    #[test]
    fn zeta_values() {
        for prime in [2, 3, 5] {
            let z = zeta_p(p(prime), 0.0, 1e-12).unwrap();
            assert!((z.closed_form - 1.0).abs() < 1e-15);
            for s in [0.25, 0.5, 0.75] {
                let a = zeta_p(p(prime), s, 1e-12).unwrap();
                let b = zeta_p(p(prime), -s, 1e-12).unwrap();
                assert!((a.closed_form - a.sphere_sum).abs() <= 1e-9);
                assert!((a.closed_form - b.closed_form).abs() <= 1e-12);
            }
        }
        assert!(zeta_p(p(2), 1.0, 1e-12).is_err());
    }
}
