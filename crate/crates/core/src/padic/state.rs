use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};

use super::{ord_p_big, PadicPrime};
use crate::{to_bigint, Integral};

/// A set of rationals tracked by the p-adic chains.
///
/// * `G { level: k }` is `{x : ord_p(x) <= -k}`, with `k >= 1`.
/// * `F { residue, lambda, level }` is the ball
///   `{x : ord_p(x - residue / p^lambda) >= level}`. Integer centers have
///   `lambda = 0` and `level >= 1`; otherwise `residue` is prime to `p` and
///   `level > -lambda`. The residue is reduced modulo `p^(level + lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PadicState {
    G { level: u32 },
    F { lambda: u32, residue: u64, level: i64 },
}

impl PadicState {
    /// Integer ball `{x : x = i mod p^level}`.
    pub fn ball(p: PadicPrime, i: u64, level: u32) -> Self {
        let m = p.pow(level);
        PadicState::F { lambda: 0, residue: i % m, level: level as i64 }
    }

    /// Tag as used in orbit dumps.
    pub fn tag(&self) -> &'static str {
        match self {
            PadicState::G { .. } => "G",
            PadicState::F { .. } => "F",
        }
    }

    /// Signed level: `-k` for `G`, the ball level for `F`.
    pub fn level(&self) -> i64 {
        match *self {
            PadicState::G { level } => -(level as i64),
            PadicState::F { level, .. } => level,
        }
    }

    /// Center as a rational: `0` for `G`, `residue / p^lambda` for `F`.
    pub fn center(&self, p: PadicPrime) -> Ratio<BigInt> {
        match *self {
            PadicState::G { .. } => Ratio::zero(),
            PadicState::F { lambda, residue, .. } => {
                Ratio::new(BigInt::from(residue), BigInt::from(p.get()).pow(lambda))
            }
        }
    }

    /// Center written as `"i"` or `"u/p^lambda"`.
    pub fn residue_string(&self, p: PadicPrime) -> String {
        self.center(p).to_string()
    }

    /// Shift by one: `{x - 1 : x in S}`.
    pub fn tau(&self, p: PadicPrime) -> Self {
        match *self {
            g @ PadicState::G { .. } => g,
            PadicState::F { lambda, residue, level } => {
                let m = p.pow((level + lambda as i64) as u32);
                let step = p.pow(lambda) % m;
                PadicState::F { lambda, residue: (residue + m - step) % m, level }
            }
        }
    }

    /// Image under `x -> x / (1 - x)`, the inverse of `x -> x / (x + 1)`.
    pub fn sigma(&self, p: PadicPrime) -> Self {
        match *self {
            PadicState::G { level } => PadicState::F { lambda: 0, residue: p.pow(level) - 1, level: level as i64 },
            PadicState::F { lambda: 0, residue: c, level } => {
                let modulus = p.pow(level as u32);
                if c % p.get() != 1 % p.get() {
                    let one_minus = (1 + modulus - c % modulus) % modulus;
                    let r = mul_mod(c, inv_mod(one_minus, modulus), modulus);
                    return PadicState::F { lambda: 0, residue: r, level };
                }
                if c == 1 % modulus {
                    return PadicState::G { level: level as u32 };
                }
                // c = 1 + p^mu u with u prime to p and mu < level
                let mu = ord_u64(c - 1, p.get());
                let rest = p.pow(level as u32 - mu);
                let w = ((c - 1) / p.pow(mu)) % rest;
                let w = (rest - w) % rest;
                let r = mul_mod(c % rest, inv_mod(w, rest), rest);
                PadicState::F { lambda: mu, residue: r, level: level - 2 * mu as i64 }
            }
            PadicState::F { lambda, residue: k, level } => {
                let new_level = level + 2 * lambda as i64;
                let modulus = p.pow(new_level as u32);
                let pl = p.pow(lambda) % modulus;
                let d = (pl + modulus - k % modulus) % modulus;
                PadicState::F { lambda: 0, residue: mul_mod(k % modulus, inv_mod(d, modulus), modulus), level: new_level }
            }
        }
    }

    /// Whether `x` lies in the set.
    pub fn contains<T: Integral>(&self, p: PadicPrime, x: &Ratio<T>) -> bool {
        let x = Ratio::new(to_bigint(x.numer()), to_bigint(x.denom()));
        self.contains_big(p, &x)
    }

    pub(crate) fn contains_big(&self, p: PadicPrime, x: &Ratio<BigInt>) -> bool {
        match *self {
            PadicState::G { level } => !x.is_zero() && ord_p_big(x, p) <= -(level as i64),
            PadicState::F { level, .. } => {
                let d = x - self.center(p);
                d.is_zero() || ord_p_big(&d, p) >= level
            }
        }
    }

    /// Whether the canonical-form invariants hold.
    pub fn is_admissible(&self, p: PadicPrime) -> bool {
        match *self {
            PadicState::G { level } => level >= 1,
            PadicState::F { lambda: 0, residue, level } => level >= 1 && residue < p.pow(level as u32),
            PadicState::F { lambda, residue, level } => {
                level + lambda as i64 >= 1
                    && residue % p.get() != 0
                    && residue < p.pow((level + lambda as i64) as u32)
            }
        }
    }
}

impl fmt::Display for PadicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PadicState::G { level } => write!(f, "G(0,-{level})"),
            PadicState::F { lambda: 0, residue, level } => write!(f, "F({residue},{level})"),
            PadicState::F { lambda, residue, level } => write!(f, "F({residue}p^-{lambda},{level})"),
        }
    }
}

fn ord_u64(mut x: u64, p: u64) -> u32 {
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Inverse of a unit `a` modulo `m`; `m = 1` gives `0`.
fn inv_mod(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let g = (a as i128).extended_gcd(&(m as i128));
    debug_assert!(g.gcd.is_one(), "{a} is not a unit modulo {m}");
    g.x.rem_euclid(m as i128) as u64
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

    #[test]
    fn residue_maps() {
        let p3 = p(3);
        assert_eq!(PadicState::ball(p3, 2, 1).tau(p3), PadicState::ball(p3, 1, 1));
        assert_eq!(PadicState::ball(p3, 0, 1).tau(p3), PadicState::ball(p3, 2, 1));
        // 2 / (1 - 2) = -2 = 1 mod 3
        assert_eq!(PadicState::ball(p3, 2, 1).sigma(p3), PadicState::ball(p3, 1, 1));
        assert_eq!(PadicState::ball(p3, 1, 1).sigma(p3), PadicState::G { level: 1 });
        assert_eq!(PadicState::G { level: 1 }.sigma(p3), PadicState::ball(p3, 2, 1));
        assert_eq!(PadicState::G { level: 2 }.tau(p3), PadicState::G { level: 2 });
    }

    #[test]
    fn sigma_valuation_cases() {
        let p3 = p(3);
        // 4 / (1 - 4) = -4/3 and -4 = 5 mod 9
        let s = PadicState::ball(p3, 4, 3).sigma(p3);
        assert_eq!(s, PadicState::F { lambda: 1, residue: 5, level: 1 });
        assert!(s.is_admissible(p3));
        let back = s.sigma(p3);
        assert!(back.is_admissible(p3));
        assert_eq!(back.level(), 3);
    }

    /// Applying the maps to sample points lands in the mapped set.
    #[test]
    fn maps_commute_with_points() {
        for prime in [2u64, 3, 5] {
            let pp = p(prime);
            let states = [
                PadicState::ball(pp, 1 + prime, 3),
                PadicState::ball(pp, 2, 2),
                PadicState::ball(pp, prime * prime + 1, 3),
                PadicState::G { level: 2 },
                PadicState::ball(pp, 4, 2).sigma(pp),
            ];
            for s in states {
                for num in 1..120i64 {
                    for den in 1..30i64 {
                        let x = q(num, den);
                        if !s.contains(pp, &x) {
                            continue;
                        }
                        let shifted = x - 1;
                        assert!(s.tau(pp).contains(pp, &shifted), "tau {s} at {x}");
                        if x != q(1, 1) {
                            let y = x / (q(1, 1) - x);
                            assert!(s.sigma(pp).contains(pp, &y), "sigma {s} at {x}");
                        }
                    }
                }
            }
        }
    }
}
