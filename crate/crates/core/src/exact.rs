//! Exact summation of many fractions `numer^l / base^l`.
//!
//! Terms are grouped by `base` with integer numerator sums, then combined
//! once over the common denominator `lcm(bases)^l`.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::Rational;

#[derive(Debug, Clone, Default)]
struct Acc {
    small: u128,
    big: BigUint,
}

impl Acc {
    fn add_small(&mut self, x: u128) {
        match self.small.checked_add(x) {
            Some(s) => self.small = s,
            None => {
                self.big += self.small;
                self.small = x;
            }
        }
    }

    fn add_big(&mut self, x: &BigUint) {
        self.big += x;
    }

    fn merge(&mut self, other: Acc) {
        self.add_small(other.small);
        self.big += other.big;
    }

    fn total(&self) -> BigUint {
        &self.big + self.small
    }
}

enum Power {
    Small(u128),
    Big(BigUint),
}

impl Power {
    fn times(self, x: u64) -> Power {
        match self {
            Power::Small(p) => match p.checked_mul(x as u128) {
                Some(q) => Power::Small(q),
                None => Power::Big(BigUint::from(p) * x),
            },
            Power::Big(p) => Power::Big(p * x),
        }
    }
}

/// Power sums `sum numer^l` for `l = 0..=max_power`, grouped by `base`.
#[derive(Debug, Clone)]
pub(crate) struct FractionSum {
    max_power: usize,
    groups: HashMap<u64, Vec<Acc>>,
}

impl FractionSum {
    pub(crate) fn new(max_power: usize) -> Self {
        Self { max_power, groups: HashMap::new() }
    }

    /// Records `numer^l / base^l` for every `l <= max_power`.
    pub(crate) fn add_power_terms(&mut self, base: u64, numer: u64) {
        let max_power = self.max_power;
        let accs = self.groups.entry(base).or_insert_with(|| vec![Acc::default(); max_power + 1]);
        let mut pow = Power::Small(1);
        for acc in accs.iter_mut() {
            match &pow {
                Power::Small(p) => acc.add_small(*p),
                Power::Big(p) => acc.add_big(p),
            }
            pow = pow.times(numer);
        }
    }

    pub(crate) fn merge(mut self, other: FractionSum) -> FractionSum {
        for (base, accs) in other.groups {
            match self.groups.get_mut(&base) {
                Some(mine) => {
                    for (m, o) in mine.iter_mut().zip(accs) {
                        m.merge(o);
                    }
                }
                None => {
                    self.groups.insert(base, accs);
                }
            }
        }
        self
    }

    /// Exact values `sum numer^l / (base^l * extra_den)` for each `l`.
    pub(crate) fn finish(&self, max_power: usize, extra_den: &BigUint) -> Vec<Rational> {
        let mut bases: Vec<u64> = self.groups.keys().copied().collect();
        bases.sort_unstable();
        let mut lcm = BigUint::one();
        for &b in &bases {
            let r = (&lcm % b).iter_u64_digits().next().unwrap_or(0);
            let g = r.gcd(&b);
            lcm *= b / g;
        }
        (0..=max_power.min(self.max_power))
            .map(|l| {
                let common = lcm.pow(l as u32);
                let mut numer = BigUint::zero();
                for &b in &bases {
                    let scale = &common / BigUint::from(b).pow(l as u32);
                    numer += self.groups[&b][l].total() * scale;
                }
                Rational::new(BigInt::from(numer), BigInt::from(common * extra_den))
            })
            .collect()
    }
}
