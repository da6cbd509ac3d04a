//! Random descent through the tree.
//!
//! The walk starts at `X_1 = 1/1` and moves from `X_k = a/b` to the left
//! child `a/(a+b)` or the right child `(a+b)/b` with probability `1/2` each,
//! so `X_k` is a uniform element of row `k`. Every open interval is visited
//! with probability one.
//!
//! # Generator
//!
//! Moves come from SplitMix64 used in counter mode. With
//! `GAMMA = 0x9E3779B97F4A7C15` and
//!
//! ```text
//! mix(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!          z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!          return z ^ (z >> 31)
//! ```
//!
//! (all arithmetic modulo `2^64`), trial `t` of seed `s` has the key
//! `k = mix(s + (t + 1) * GAMMA)` and the word stream
//! `w_i = mix(k + (i + 1) * GAMMA)` for `i = 0, 1, ...`. Move `j = 1, 2, ...`
//! (from `X_j` to `X_(j+1)`) reads bit `(j - 1) % 64` of `w_((j - 1) / 64)`,
//! counting from the least significant bit; `0` is left and `1` is right.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::contfrac::Direction;
use crate::{Error, Rational, Result};

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based move source for one trial.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    index: u64,
    word: u64,
    used: u32,
}

impl CounterRng {
    pub fn new(seed: u64, trial: u64) -> Self {
        let key = mix64(seed.wrapping_add(trial.wrapping_add(1).wrapping_mul(GAMMA)));
        Self { key, index: 0, word: 0, used: 64 }
    }

    /// Word `i` of the stream, independent of the current position.
    pub fn word_at(&self, i: u64) -> u64 {
        mix64(self.key.wrapping_add(i.wrapping_add(1).wrapping_mul(GAMMA)))
    }

    pub fn next_move(&mut self) -> Direction {
        if self.used == 64 {
            self.word = self.word_at(self.index);
            self.index += 1;
            self.used = 0;
        }
        let bit = self.word >> self.used & 1;
        self.used += 1;
        if bit == 0 {
            Direction::L
        } else {
            Direction::R
        }
    }
}

/// Open interval `(lo, hi)`; `hi = None` stands for infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    lo: Rational,
    hi: Option<Rational>,
}

impl Interval {
    pub fn new(lo: Rational, hi: Option<Rational>) -> Result<Self> {
        if lo < Rational::zero() {
            return Err(Error::NotPositive(lo.to_string()));
        }
        if let Some(h) = &hi {
            if h <= &lo {
                return Err(Error::EmptyInterval(lo.to_string(), h.to_string()));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> Option<&Rational> {
        self.hi.as_ref()
    }

    /// `lo < a/b < hi`.
    fn contains_pair(&self, a: &BigInt, b: &BigInt) -> bool {
        let above = a * self.lo.denom() > self.lo.numer() * b;
        above && self.hi.as_ref().is_none_or(|h| a * h.denom() < h.numer() * b)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.contains_pair(x.numer(), x.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkConfig {
    pub seed: u64,
    pub max_steps: u64,
    pub interval: Interval,
}

impl WalkConfig {
    pub fn new(seed: u64, max_steps: u64, interval: Interval) -> Result<Self> {
        if max_steps == 0 {
            return Err(Error::OutOfRange("max_steps must be at least 1".into()));
        }
        Ok(Self { seed, max_steps, interval })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkOutcome {
    /// First step `k` with `X_k` in the interval.
    pub hit_step: Option<u64>,
    /// Number of values visited, `X_1` included.
    pub steps: u64,
    pub final_value: Rational,
}

/// Trial `trial` of the walk, stopped at the first hit or after
/// `max_steps` values.
pub fn simulate_trial(config: &WalkConfig, trial: u64) -> WalkOutcome {
    let mut rng = CounterRng::new(config.seed, trial);
    let (mut a, mut b) = (BigInt::one(), BigInt::one());
    let mut step = 1;
    loop {
        if config.interval.contains_pair(&a, &b) {
            return WalkOutcome { hit_step: Some(step), steps: step, final_value: Rational::new_raw(a, b) };
        }
        if step == config.max_steps {
            return WalkOutcome { hit_step: None, steps: step, final_value: Rational::new_raw(a, b) };
        }
        match rng.next_move() {
            Direction::L => b += &a,
            Direction::R => a += &b,
        }
        step += 1;
    }
}

/// Trial `0` of the walk.
pub fn simulate_walk(config: &WalkConfig) -> WalkOutcome {
    simulate_trial(config, 0)
}

/// `X_1, ..., X_len` of trial `trial`, ignoring the interval.
pub fn trajectory(seed: u64, trial: u64, len: u64) -> Vec<Rational> {
    let mut rng = CounterRng::new(seed, trial);
    let (mut a, mut b) = (BigInt::one(), BigInt::one());
    let mut out = Vec::with_capacity(len as usize);
    for k in 0..len {
        if k > 0 {
            match rng.next_move() {
                Direction::L => b += &a,
                Direction::R => a += &b,
            }
        }
        out.push(Rational::new_raw(a.clone(), b.clone()));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct HitStatistics {
    pub trials: u64,
    pub hits: u64,
    pub fraction: f64,
    /// Hit step to number of trials first hitting there.
    pub histogram: BTreeMap<u64, u64>,
}

impl HitStatistics {
    /// Wilson score interval for the hit probability at normal quantile `z`.
    pub fn wilson_interval(&self, z: f64) -> (f64, f64) {
        let n = self.trials as f64;
        let p = self.fraction;
        let denom = 1.0 + z * z / n;
        let center = (p + z * z / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
        ((center - half).max(0.0), (center + half).min(1.0))
    }

    /// `step,count` lines with a header.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("step,count\n");
        for (s, c) in &self.histogram {
            writeln!(out, "{s},{c}").unwrap();
        }
        out
    }
}

/// Runs trials `0..trials` in parallel; the result does not depend on the
/// thread count.
pub fn hit_statistics(config: &WalkConfig, trials: u64) -> Result<HitStatistics> {
    if trials == 0 {
        return Err(Error::OutOfRange("trials must be at least 1".into()));
    }
    let steps: Vec<Option<u64>> = (0..trials).into_par_iter().map(|t| simulate_trial(config, t).hit_step).collect();
    let mut histogram = BTreeMap::new();
    for s in steps.iter().flatten() {
        *histogram.entry(*s).or_insert(0) += 1;
    }
    let hits = histogram.values().sum::<u64>();
    Ok(HitStatistics { trials, hits, fraction: hits as f64 / trials as f64, histogram })
}
