use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::Zero;

use super::{cf_of, validate_quotients};
use crate::{Error, Integral, Result};

/// A move from a node to one of its children.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// `a/b -> a/(a+b)`
    L,
    /// `a/b -> (a+b)/b`
    R,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::L => Direction::R,
            Direction::R => Direction::L,
        }
    }

    fn as_char(self) -> char {
        match self {
            Direction::L => 'L',
            Direction::R => 'R',
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Root-anchored path, stored as maximal runs of equal moves.
///
/// Parses both `"L^3 R^2 L"` and `"LLLRRL"`; displays the flat form.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TreePath {
    runs: Vec<(Direction, u64)>,
}

impl TreePath {
    /// The empty path, reaching the root.
    pub fn root() -> Self {
        Self::default()
    }

    /// Rejects zero counts and adjacent runs in the same direction.
    pub fn from_runs(runs: Vec<(Direction, u64)>) -> Result<Self> {
        if let Some(i) = runs.iter().position(|&(_, c)| c == 0) {
            return Err(Error::MalformedPath(format!("run {i} has count 0")));
        }
        if let Some(i) = runs.windows(2).position(|w| w[0].0 == w[1].0) {
            return Err(Error::MalformedPath(format!(
                "runs {i} and {} both move {}",
                i + 1,
                runs[i].0
            )));
        }
        Ok(Self { runs })
    }

    /// Builds a path from single moves, merging repeats.
    pub fn from_moves(moves: impl IntoIterator<Item = Direction>) -> Self {
        let mut path = Self::root();
        for d in moves {
            path.push(d, 1);
        }
        path
    }

    /// Appends `count` moves in direction `d`.
    pub fn push(&mut self, d: Direction, count: u64) {
        if count == 0 {
            return;
        }
        match self.runs.last_mut() {
            Some((last, c)) if *last == d => *c += count,
            _ => self.runs.push((d, count)),
        }
    }

    #[inline]
    pub fn runs(&self) -> &[(Direction, u64)] {
        &self.runs
    }

    /// Number of moves; the reached node lies in row `depth + 1`.
    pub fn depth(&self) -> u64 {
        self.runs.iter().map(|&(_, c)| c).sum()
    }

    pub fn is_root(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn moves(&self) -> impl Iterator<Item = Direction> + '_ {
        self.runs.iter().flat_map(|&(d, c)| std::iter::repeat(d).take(c as usize))
    }

    pub fn is_prefix_of(&self, other: &TreePath) -> bool {
        let n = self.runs.len();
        if n == 0 {
            return true;
        }
        if other.runs.len() < n || self.runs[..n - 1] != other.runs[..n - 1] {
            return false;
        }
        let (d, c) = self.runs[n - 1];
        let (e, k) = other.runs[n - 1];
        d == e && c <= k
    }

    /// Run-length notation, e.g. `L^3 R^2 L`.
    pub fn to_run_notation(&self) -> String {
        let parts: Vec<String> = self
            .runs
            .iter()
            .map(|&(d, c)| if c == 1 { d.to_string() } else { format!("{d}^{c}") })
            .collect();
        parts.join(" ")
    }
}

impl fmt::Display for TreePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(d, c) in &self.runs {
            for _ in 0..c {
                write!(f, "{d}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for TreePath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut path = TreePath::root();
        let mut chars = s.chars().peekable();
        while let Some(ch) = chars.next() {
            let d = match ch {
                'L' | 'l' => Direction::L,
                'R' | 'r' => Direction::R,
                c if c.is_whitespace() || c == ',' => continue,
                c => return Err(Error::MalformedPath(format!("unexpected character {c:?}"))),
            };
            let mut count = 1;
            if chars.peek() == Some(&'^') {
                chars.next();
                let mut digits = String::new();
                while let Some(c) = chars.peek().filter(|c| c.is_ascii_digit()) {
                    digits.push(*c);
                    chars.next();
                }
                count = digits
                    .parse::<u64>()
                    .map_err(|_| Error::MalformedPath(format!("bad exponent after {d} in {s:?}")))?;
                if count == 0 {
                    return Err(Error::MalformedPath(format!("zero exponent in {s:?}")));
                }
            }
            path.push(d, count);
        }
        Ok(path)
    }
}

/// Path of the node with partial quotients `[a0; ..., am]`, which may be
/// non-canonical.
///
/// The runs are read from the last quotient back to the first; the run for
/// index `j` moves left when `j` is odd and right when `j` is even. The last
/// quotient contributes `am - 1` moves and the others contribute `aj`.
pub fn path_of_quotients<T: Integral>(quotients: &[T]) -> Result<TreePath> {
    validate_quotients(quotients)?;
    if quotients.len() == 1 && quotients[0].is_zero() {
        return Err(Error::NotPositive("0".into()));
    }
    let m = quotients.len() - 1;
    let mut path = TreePath::root();
    for (j, a) in quotients.iter().enumerate().rev() {
        let count = if j == m { a.clone() - T::one() } else { a.clone() };
        let count = count
            .to_u64()
            .ok_or_else(|| Error::TooLarge(format!("partial quotient {a} as a run length")))?;
        let d = if j % 2 == 1 { Direction::L } else { Direction::R };
        path.push(d, count);
    }
    Ok(path)
}

/// Path from the root to `q`.
pub fn path_of<T: Integral>(q: &Ratio<T>) -> Result<TreePath> {
    if q <= &Ratio::zero() {
        return Err(Error::NotPositive(q.to_string()));
    }
    path_of_quotients(cf_of(q)?.quotients())
}

/// Node reached by following `path` from the root.
pub fn rational_at<T: Integral>(path: &TreePath) -> Result<Ratio<T>> {
    let (mut a, mut b) = (T::one(), T::one());
    for &(d, c) in path.runs() {
        let k = T::from_u64(c).ok_or_else(|| Error::TooLarge(format!("run length {c}")))?;
        match d {
            Direction::L => b = b + k * a.clone(),
            Direction::R => a = a + k * b.clone(),
        }
    }
    Ok(Ratio::new_raw(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Ratio<i64> {
        Ratio::new(a, b)
    }

    fn p(s: &str) -> TreePath {
        s.parse().unwrap()
    }

    #[test]
    fn path_examples() {
        assert_eq!(path_of(&q(3, 2)).unwrap(), p("LR"));
        assert_eq!(path_of(&q(1, 1)).unwrap(), TreePath::root());
        assert_eq!(path_of(&q(5, 2)).unwrap(), p("LRR"));
        assert_eq!(path_of(&q(5, 3)).unwrap(), p("RLR"));
        assert_eq!(path_of(&q(1, 2)).unwrap(), p("L"));
    }

    #[test]
    fn rational_at_examples() {
        assert_eq!(rational_at::<i64>(&p("LR")).unwrap(), q(3, 2));
        assert_eq!(rational_at::<i64>(&TreePath::root()).unwrap(), q(1, 1));
        assert_eq!(rational_at::<i64>(&p("LLR")).unwrap(), q(4, 3));
    }

    #[test]
    fn non_canonical_paths_agree() {
        assert_eq!(path_of_quotients(&[4i64, 1, 1]).unwrap(), path_of(&q(9, 2)).unwrap());
    }

    #[test]
    fn parse_and_display() {
        let path = p("L^3 R^2 L");
        assert_eq!(path.runs(), &[(Direction::L, 3), (Direction::R, 2), (Direction::L, 1)]);
        assert_eq!(path.to_string(), "LLLRRL");
        assert_eq!(path.to_run_notation(), "L^3 R^2 L");
        assert_eq!(p("LLLRRL"), path);
        assert_eq!(path.depth(), 6);
        assert!("LX".parse::<TreePath>().is_err());
        assert!("L^0".parse::<TreePath>().is_err());
        assert!("L^".parse::<TreePath>().is_err());
    }

    #[test]
    fn run_validation() {
        assert!(TreePath::from_runs(vec![(Direction::L, 0)]).is_err());
        assert!(TreePath::from_runs(vec![(Direction::L, 1), (Direction::L, 2)]).is_err());
        assert!(TreePath::from_runs(vec![(Direction::L, 1), (Direction::R, 2)]).is_ok());
    }

    #[test]
    fn prefixes() {
        assert!(p("LR").is_prefix_of(&p("LRRL")));
        assert!(p("L").is_prefix_of(&p("LLR")));
        assert!(!p("LL").is_prefix_of(&p("LR")));
        assert!(!p("LRR").is_prefix_of(&p("LR")));
        assert!(TreePath::root().is_prefix_of(&p("R")));
    }

    #[test]
    fn round_trip_small() {
        for a in 1..60i64 {
            for b in 1..60i64 {
                let x = q(a, b);
                let path = path_of(&x).unwrap();
                assert_eq!(rational_at::<i64>(&path).unwrap(), x);
                assert_eq!(path.depth() + 1, super::super::depth_of(&x).unwrap().get());
            }
        }
    }
}
