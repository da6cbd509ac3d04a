use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::poly::Polynomial;
use super::{PadicPrime, PadicState};
use crate::tree::{check_u64_depth, fold_generation, GenerationIndex};
use crate::{Error, Rational, Result};

/// Row-stochastic matrix with exact entries, stored by rows as sorted
/// `(column, value)` lists, optionally labelled by chain states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    states: Vec<PadicState>,
    rows: Vec<Vec<(usize, Rational)>>,
}

/// Default cap on orbit sizes.
pub const DEFAULT_MAX_STATES: usize = 100_000;
/// Largest chain solved by dense elimination in [`TransitionMatrix::stationary`].
pub const DENSE_LIMIT: usize = 400;
/// Largest chain whose powers are tested entrywise in
/// [`TransitionMatrix::positive_power`].
pub const POWER_TEST_LIMIT: usize = 128;

impl TransitionMatrix {
    /// Unlabelled matrix; rows must be stochastic.
    pub fn from_dense(rows: &[Vec<Rational>]) -> Result<Self> {
        let n = rows.len();
        let sparse: Vec<Vec<(usize, Rational)>> = rows
            .iter()
            .map(|r| {
                if r.len() != n {
                    return Err(Error::OutOfRange(format!("row of length {} in a {n}x{n} matrix", r.len())));
                }
                Ok(r.iter().cloned().enumerate().filter(|(_, v)| !v.is_zero()).collect())
            })
            .collect::<Result<_>>()?;
        let m = Self { states: Vec::new(), rows: sparse };
        if !m.is_row_stochastic() {
            return Err(Error::OutOfRange("rows do not sum to 1".into()));
        }
        Ok(m)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// State labels; empty for unlabelled matrices.
    #[inline]
    pub fn states(&self) -> &[PadicState] {
        &self.states
    }

    #[inline]
    pub fn rows(&self) -> &[Vec<(usize, Rational)>] {
        &self.rows
    }

    pub fn index_of(&self, s: &PadicState) -> Option<usize> {
        self.states.iter().position(|t| t == s)
    }

    pub fn entry(&self, i: usize, j: usize) -> Rational {
        self.rows[i].iter().find(|(c, _)| *c == j).map(|(_, v)| v.clone()).unwrap_or_else(Rational::zero)
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        let n = self.len();
        self.rows
            .iter()
            .map(|r| {
                let mut d = vec![Rational::zero(); n];
                for (j, v) in r {
                    d[*j] = v.clone();
                }
                d
            })
            .collect()
    }

    pub fn is_row_stochastic(&self) -> bool {
        self.rows.iter().all(|r| {
            r.iter().all(|(_, v)| v > &Rational::zero()) && r.iter().map(|(_, v)| v).sum::<Rational>().is_one()
        })
    }

    fn columns(&self) -> Vec<Vec<Rational>> {
        let mut cols = vec![Vec::new(); self.len()];
        for r in &self.rows {
            for (j, v) in r {
                cols[*j].push(v.clone());
            }
        }
        cols
    }

    /// Every column holds a single `1` or exactly two entries `1/2`.
    pub fn has_orbit_column_pattern(&self) -> bool {
        let half = Rational::new(1.into(), 2.into());
        self.columns().iter().all(|c| match c.as_slice() {
            [one] => one.is_one(),
            [a, b] => *a == half && *b == half,
            _ => false,
        })
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        self.is_row_stochastic() && self.columns().iter().all(|c| c.iter().sum::<Rational>().is_one())
    }

    fn reach(&self, from: usize, reverse: bool) -> Vec<Option<usize>> {
        let n = self.len();
        let adj: Vec<Vec<usize>> = if reverse {
            let mut r = vec![Vec::new(); n];
            for (i, row) in self.rows.iter().enumerate() {
                for (j, _) in row {
                    r[*j].push(i);
                }
            }
            r
        } else {
            self.rows.iter().map(|r| r.iter().map(|(j, _)| *j).collect()).collect()
        };
        let mut dist = vec![None; n];
        dist[from] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &v in &adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_irreducible(&self) -> bool {
        !self.is_empty()
            && self.reach(0, false).iter().all(Option::is_some)
            && self.reach(0, true).iter().all(Option::is_some)
    }

    /// Period of an irreducible chain, `None` if reducible.
    pub fn period(&self) -> Option<u64> {
        if !self.is_irreducible() {
            return None;
        }
        let level = self.reach(0, false);
        let mut g = 0u64;
        for (u, row) in self.rows.iter().enumerate() {
            for (v, _) in row {
                let (lu, lv) = (level[u].unwrap() as i64, level[*v].unwrap() as i64);
                g = g.gcd(&((lu + 1 - lv).unsigned_abs()));
            }
        }
        Some(g)
    }

    /// Smallest `k` with every entry of `P^k` positive, searched up to the
    /// Wielandt bound `(n-1)^2 + 1`. Limited to [`POWER_TEST_LIMIT`] states.
    pub fn positive_power(&self) -> Result<Option<usize>> {
        let n = self.len();
        if n > POWER_TEST_LIMIT {
            return Err(Error::TooLarge(format!("{n} states for the power test (limit {POWER_TEST_LIMIT})")));
        }
        let words = n.div_ceil(64);
        let adj: Vec<Vec<u64>> = self
            .rows
            .iter()
            .map(|r| {
                let mut bits = vec![0u64; words];
                for (j, _) in r {
                    bits[j / 64] |= 1 << (j % 64);
                }
                bits
            })
            .collect();
        let full = |row: &[u64]| (0..n).all(|j| row[j / 64] >> (j % 64) & 1 == 1);
        let mut power = adj.clone();
        let bound = (n - 1) * (n - 1) + 1;
        for k in 1..=bound {
            if power.iter().all(|r| full(r)) {
                return Ok(Some(k));
            }
            power = power
                .iter()
                .map(|r| {
                    let mut next = vec![0u64; words];
                    for j in 0..n {
                        if r[j / 64] >> (j % 64) & 1 == 1 {
                            for (w, a) in next.iter_mut().zip(&adj[j]) {
                                *w |= a;
                            }
                        }
                    }
                    next
                })
                .collect();
        }
        Ok(None)
    }

    /// The unique stationary distribution `pi P = pi`.
    ///
    /// Chains up to [`DENSE_LIMIT`] states are solved by exact elimination.
    /// Larger doubly stochastic chains have the uniform vector, which is
    /// returned after checking the column sums.
    pub fn stationary(&self) -> Result<Vec<Rational>> {
        match self.period() {
            None => return Err(Error::Reducible),
            Some(1) => {}
            Some(d) => return Err(Error::Periodic(d)),
        }
        let n = self.len();
        if n > DENSE_LIMIT {
            if self.is_doubly_stochastic() {
                return Ok(vec![Rational::new(BigInt::one(), BigInt::from(n)); n]);
            }
            return Err(Error::TooLarge(format!("{n} states for dense elimination (limit {DENSE_LIMIT})")));
        }
        // solve (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1
        let mut a = vec![vec![Rational::zero(); n + 1]; n];
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                a[*j][i] += v;
            }
        }
        for (i, r) in a.iter_mut().enumerate() {
            r[i] -= Rational::one();
        }
        a[n - 1] = vec![Rational::one(); n + 1];
        solve_in_place(&mut a)
    }

    /// `max |(P^k)_ij - pi_j|` in floating point; tends to zero exactly when
    /// every eigenvalue other than `1` has modulus below one.
    pub fn mixing_residual(&self, squarings: u32) -> Result<f64> {
        let pi: Vec<f64> = self.stationary()?.iter().map(|v| v.to_f64().unwrap()).collect();
        let n = self.len();
        let mut m: Vec<Vec<f64>> = self.to_dense().iter().map(|r| r.iter().map(|v| v.to_f64().unwrap()).collect()).collect();
        for _ in 0..squarings {
            let mut next = vec![vec![0.0; n]; n];
            for i in 0..n {
                for k in 0..n {
                    let a = m[i][k];
                    if a != 0.0 {
                        for j in 0..n {
                            next[i][j] += a * m[k][j];
                        }
                    }
                }
            }
            m = next;
        }
        Ok(m.iter().flat_map(|r| r.iter().zip(&pi).map(|(v, p)| (v - p).abs())).fold(0.0, f64::max))
    }

    /// `det(x I - P)`, by reduction to Hessenberg form.
    pub fn char_poly(&self) -> Polynomial {
        let mut h = self.to_dense();
        let n = h.len();
        for m in 1..n.saturating_sub(1) {
            let Some(i) = (m..n).find(|&i| !h[i][m - 1].is_zero()) else { continue };
            if i != m {
                h.swap(i, m);
                for row in h.iter_mut() {
                    row.swap(i, m);
                }
            }
            for j in m + 1..n {
                if h[j][m - 1].is_zero() {
                    continue;
                }
                let u = &h[j][m - 1] / &h[m][m - 1];
                for c in 0..n {
                    let t = &u * &h[m][c];
                    h[j][c] -= t;
                }
                for row in h.iter_mut() {
                    let t = &u * &row[j];
                    row[m] += t;
                }
            }
        }
        let mut polys = vec![Polynomial::from_ints(&[1])];
        for m in 1..=n {
            let mut pm = polys[m - 1].times_x_minus(&h[m - 1][m - 1]);
            let mut t = Rational::one();
            for i in 1..m {
                t *= &h[m - i][m - i - 1];
                let c = &t * &h[m - i - 1][m - 1];
                pm.sub_scaled(&polys[m - i - 1], &c);
            }
            polys.push(pm);
        }
        polys.pop().unwrap()
    }

    /// `P^(n-1) f` for the indicator `f` of states containing `1`; its
    /// entries are the proportions of row `n` lying in each state.
    pub fn row_distribution(&self, p: PadicPrime, n: GenerationIndex) -> Vec<Rational> {
        let one = Rational::one();
        let mut f: Vec<Rational> = self
            .states
            .iter()
            .map(|s| if s.contains_big(p, &one) { Rational::one() } else { Rational::zero() })
            .collect();
        for _ in 1..n.get() {
            f = self.rows.iter().map(|r| r.iter().map(|(j, v)| v * &f[*j]).sum()).collect();
        }
        f
    }
}

/// Gauss-Jordan elimination on an augmented `n x (n+1)` system.
fn solve_in_place(a: &mut [Vec<Rational>]) -> Result<Vec<Rational>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(Error::Reducible)?;
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
    }
    Ok(a.iter().map(|r| r[n].clone()).collect())
}

/// Display order: integer balls by level and residue, then non-integer
/// centers, then `G`.
fn state_key(s: &PadicState) -> (u8, i64, u64, u32) {
    match *s {
        PadicState::F { lambda: 0, residue, level } => (0, level, residue, 0),
        PadicState::F { lambda, residue, level } => (1, level, residue, lambda),
        PadicState::G { level } => (2, level as i64, 0, 0),
    }
}

/// Closure of `{start}` under `tau` and `sigma` with the chain
/// `F_(n+1)(S) = F_n(tau S) / 2 + F_n(sigma S) / 2` on it.
pub fn orbit_of(p: PadicPrime, start: PadicState, max_states: usize) -> Result<TransitionMatrix> {
    let mut seen: HashMap<PadicState, ()> = HashMap::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([start]);
    seen.insert(start, ());
    while let Some(s) = queue.pop_front() {
        assert!(s.is_admissible(p), "inadmissible state {s} in the orbit of {start}");
        order.push(s);
        if order.len() > max_states {
            return Err(Error::TooLarge(format!("orbit of {start} exceeds {max_states} states")));
        }
        for t in [s.tau(p), s.sigma(p)] {
            if seen.insert(t, ()).is_none() {
                queue.push_back(t);
            }
        }
    }
    order.sort_by_key(state_key);
    let index: HashMap<PadicState, usize> = order.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let half = Rational::new(1.into(), 2.into());
    let rows = order
        .iter()
        .map(|s| {
            let (a, b) = (index[&s.tau(p)], index[&s.sigma(p)]);
            if a == b {
                vec![(a, Rational::one())]
            } else {
                let mut r = vec![(a, half.clone()), (b, half.clone())];
                r.sort_by_key(|(j, _)| *j);
                r
            }
        })
        .collect();
    Ok(TransitionMatrix { states: order, rows })
}

/// Orbit of `G(0, -kappa)`, which has `p^kappa + p^(kappa-1)` states.
pub fn build_orbit(p: PadicPrime, kappa: u32, max_states: usize) -> Result<TransitionMatrix> {
    if kappa < 1 {
        return Err(Error::OutOfRange("kappa must be at least 1".into()));
    }
    let size = p
        .get()
        .checked_pow(kappa)
        .and_then(|a| a.checked_add(p.get().pow(kappa - 1)))
        .filter(|&s| s <= max_states as u64)
        .ok_or_else(|| Error::TooLarge(format!("orbit for p={p}, kappa={kappa} exceeds {max_states} states")))?;
    let m = orbit_of(p, PadicState::G { level: kappa }, max_states)?;
    debug_assert_eq!(m.len() as u64, size);
    Ok(m)
}

/// Chain on residues `0, ..., p-1, infinity` modulo `p`.
pub fn residue_matrix(p: PadicPrime) -> TransitionMatrix {
    build_orbit(p, 1, DEFAULT_MAX_STATES).expect("p + 1 states")
}

/// Largest prime accepted by [`char_poly`] by default.
pub const CHAR_POLY_MAX_P: u64 = 50;

/// Characteristic polynomial of the residue chain modulo `p`.
pub fn char_poly(p: PadicPrime, max_p: u64) -> Result<Polynomial> {
    if p.get() > max_p {
        return Err(Error::TooLarge(format!("p = {p} exceeds the dense bound {max_p}")));
    }
    Ok(residue_matrix(p).char_poly())
}

/// Residue proportions of one row, by counting and by the chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueDistribution {
    pub p: u64,
    pub n: u64,
    /// `"0", ..., "p-1", "inf"`.
    pub labels: Vec<String>,
    pub counting: Vec<Rational>,
    pub recurrence: Vec<Rational>,
}

impl ResidueDistribution {
    pub fn agree(&self) -> bool {
        self.counting == self.recurrence
    }
}

/// Proportions `L_i(n)` of row `n` with `a/b = i (mod p)`, and `b = 0` for
/// the last entry.
pub fn residue_distribution(p: PadicPrime, n: GenerationIndex) -> Result<ResidueDistribution> {
    check_u64_depth(n)?;
    let pv = p.get();
    let inverses: Vec<u64> = (0..pv).map(|b| if b == 0 { 0 } else { super::inv_mod_prime(b, pv) }).collect();
    let counts = fold_generation::<u64, _, _, _, _>(
        n,
        || vec![0u64; pv as usize + 1],
        |mut acc, a, b| {
            let b = b % pv;
            let slot = if b == 0 { pv } else { (a % pv) * inverses[b as usize] % pv };
            acc[slot as usize] += 1;
            acc
        },
        |mut x, y| {
            for (s, t) in x.iter_mut().zip(y) {
                *s += t;
            }
            x
        },
    );
    let row = BigInt::one() << (n.get() - 1);
    let counting = counts.iter().map(|&c| Rational::new(c.into(), row.clone())).collect();
    let recurrence = residue_matrix(p).row_distribution(p, n);
    let mut labels: Vec<String> = (0..pv).map(|i| i.to_string()).collect();
    labels.push("inf".into());
    Ok(ResidueDistribution { p: pv, n: n.get(), labels, counting, recurrence })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> PadicPrime {
        PadicPrime::new(n).unwrap()
    }

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    fn g(n: u64) -> GenerationIndex {
        GenerationIndex::new(n).unwrap()
    }

    #[test]
    fn orbit_sizes() {
        for (prime, kappa, size) in [(3, 1, 4), (3, 2, 12), (2, 3, 12), (2, 1, 3), (5, 2, 30), (7, 1, 8)] {
            let m = build_orbit(p(prime), kappa, DEFAULT_MAX_STATES).unwrap();
            assert_eq!(m.len(), size, "p={prime} kappa={kappa}");
            assert!(m.is_row_stochastic());
            assert!(m.has_orbit_column_pattern());
            assert!(m.positive_power().unwrap().is_some());
        }
        assert!(build_orbit(p(3), 0, 100).is_err());
        assert!(build_orbit(p(3), 12, 1000).is_err());
    }

    #[test]
    fn stationary_vectors() {
        let m = build_orbit(p(3), 1, 100).unwrap();
        assert_eq!(m.stationary().unwrap(), vec![q(1, 4); 4]);
        let m = build_orbit(p(3), 2, 100).unwrap();
        assert_eq!(m.stationary().unwrap(), vec![q(1, 12); 12]);
        let two = TransitionMatrix::from_dense(&[vec![q(1, 2), q(1, 2)], vec![q(1, 2), q(1, 2)]]).unwrap();
        assert_eq!(two.stationary().unwrap(), vec![q(1, 2); 2]);
        let biased = TransitionMatrix::from_dense(&[vec![q(1, 2), q(1, 2)], vec![q(1, 4), q(3, 4)]]).unwrap();
        assert_eq!(biased.stationary().unwrap(), vec![q(1, 3), q(2, 3)]);
    }

    #[test]
    fn bad_chains_rejected() {
        let swap = TransitionMatrix::from_dense(&[vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]]).unwrap();
        assert_eq!(swap.stationary(), Err(Error::Periodic(2)));
        let split = TransitionMatrix::from_dense(&[vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]]).unwrap();
        assert_eq!(split.stationary(), Err(Error::Reducible));
        assert!(TransitionMatrix::from_dense(&[vec![q(1, 2), q(1, 3)], vec![q(0, 1), q(1, 1)]]).is_err());
    }

    #[test]
    fn p7_characteristic_polynomial() {
        let f = char_poly(p(7), CHAR_POLY_MAX_P).unwrap();
        let expected = [
            Polynomial::from_ints(&[-1, 1]),
            Polynomial::from_ints(&[-1, 2]),
            Polynomial::from_ints(&[1, 0, 2]),
            Polynomial::from_ints(&[1, 1, 0, 2, 4]),
        ]
        .iter()
        .fold(Polynomial::from_ints(&[1]), |acc, x| &acc * x)
        .scale(&q(1, 16));
        assert_eq!(f, expected);
    }

    #[test]
    fn char_poly_small_cases() {
        let f = char_poly(p(3), CHAR_POLY_MAX_P).unwrap();
        assert_eq!(f.degree(), Some(4));
        assert!(f.eval(&Rational::one()).is_zero());
        let two = TransitionMatrix::from_dense(&[vec![q(1, 2), q(1, 2)], vec![q(1, 4), q(3, 4)]]).unwrap();
        // x^2 - (5/4) x + 1/4
        assert_eq!(two.char_poly(), Polynomial::new(vec![q(1, 4), q(-5, 4), q(1, 1)]));
        assert!(char_poly(p(53), CHAR_POLY_MAX_P).is_err());
    }

    #[test]
    fn residues_count_and_recur_alike() {
        for prime in [2, 3, 5, 7] {
            for n in 1..=12 {
                let d = residue_distribution(p(prime), g(n)).unwrap();
                assert!(d.agree(), "p={prime} n={n}");
            }
        }
        let d = residue_distribution(p(3), g(1)).unwrap();
        assert_eq!(d.counting[1], q(1, 1));
    }

    #[test]
    fn spectral_gap() {
        for (prime, kappa) in [(2, 2), (3, 1), (3, 2), (5, 1)] {
            let m = build_orbit(p(prime), kappa, 100).unwrap();
            assert!(m.mixing_residual(10).unwrap() < 1e-9);
        }
    }
}
