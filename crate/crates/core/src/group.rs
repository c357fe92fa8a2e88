//! Finite groups given by Cayley tables.

use serde::{Deserialize, Serialize};

use crate::error::{GsbmError, Result};
use crate::numeric::permutations;

/// Associativity is checked exhaustively up to this order.
pub const ASSOCIATIVITY_CHECK_LIMIT: usize = 64;

/// A finite group on elements `0..order`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroup {
    name: String,
    cayley: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    /// Validates a multiplication table (`cayley[g][h] = g·h`).
    pub fn from_cayley(name: impl Into<String>, cayley: Vec<Vec<usize>>) -> Result<Self> {
        let k = cayley.len();
        if k < 2 {
            return Err(GsbmError::InvalidGroup(format!("order {k} < 2")));
        }
        for (g, row) in cayley.iter().enumerate() {
            if row.len() != k {
                return Err(GsbmError::InvalidGroup(format!("row {g} has length {}", row.len())));
            }
            if !is_permutation(row.iter().copied(), k) {
                return Err(GsbmError::InvalidGroup(format!("row {g} is not a permutation")));
            }
        }
        for h in 0..k {
            if !is_permutation(cayley.iter().map(|row| row[h]), k) {
                return Err(GsbmError::InvalidGroup(format!("column {h} is not a permutation")));
            }
        }
        let identity = (0..k)
            .find(|&e| (0..k).all(|g| cayley[e][g] == g && cayley[g][e] == g))
            .ok_or_else(|| GsbmError::InvalidGroup("no identity element".into()))?;
        let mut inverse = vec![0; k];
        for g in 0..k {
            inverse[g] = (0..k)
                .find(|&h| cayley[g][h] == identity)
                .ok_or_else(|| GsbmError::InvalidGroup(format!("element {g} has no inverse")))?;
            if cayley[inverse[g]][g] != identity {
                return Err(GsbmError::InvalidGroup(format!("left and right inverse of {g} differ")));
            }
        }
        if k <= ASSOCIATIVITY_CHECK_LIMIT {
            for a in 0..k {
                for b in 0..k {
                    let ab = cayley[a][b];
                    for c in 0..k {
                        if cayley[ab][c] != cayley[a][cayley[b][c]] {
                            return Err(GsbmError::InvalidGroup(format!(
                                "associativity fails at ({a},{b},{c})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(Self {
            name: name.into(),
            cayley,
            identity,
            inverse,
        })
    }

    /// The cyclic group `Z_k` under addition mod k.
    pub fn cyclic(k: usize) -> Result<Self> {
        let table = (0..k).map(|g| (0..k).map(|h| (g + h) % k.max(1)).collect()).collect();
        Self::from_cayley(format!("Z{k}"), table)
    }

    /// The symmetric group on `m` points, elements in lexicographic order of
    /// their one-line notation, product `(σ·τ)(i) = σ(τ(i))`.
    pub fn symmetric(m: usize) -> Result<Self> {
        if !(2..=5).contains(&m) {
            return Err(GsbmError::InvalidGroup(format!("Sym({m}) not supported; use 2..=5")));
        }
        let elems = permutations(m);
        let index_of = |p: &[usize]| elems.iter().position(|e| e.as_slice() == p).unwrap();
        let table = elems
            .iter()
            .map(|s| {
                elems
                    .iter()
                    .map(|t| {
                        let st: Vec<usize> = (0..m).map(|i| s[t[i]]).collect();
                        index_of(&st)
                    })
                    .collect()
            })
            .collect();
        Self::from_cayley(format!("S{m}"), table)
    }

    /// Parses names like `Z4`, `S3`, `Sym3`, `Sym([3])`.
    pub fn by_name(name: &str) -> Result<Self> {
        let trimmed: String = name.chars().filter(|c| !c.is_whitespace()).collect();
        let lower = trimmed.to_ascii_lowercase();
        let parse_num = |s: &str| -> Result<usize> {
            s.trim_matches(|c| c == '(' || c == ')' || c == '[' || c == ']')
                .parse()
                .map_err(|_| GsbmError::InvalidGroup(format!("unknown group {name:?}")))
        };
        if let Some(rest) = lower.strip_prefix("sym") {
            Self::symmetric(parse_num(rest)?)
        } else if let Some(rest) = lower.strip_prefix('s') {
            Self::symmetric(parse_num(rest)?)
        } else if let Some(rest) = lower.strip_prefix('z').or_else(|| lower.strip_prefix('c')) {
            Self::cyclic(parse_num(rest)?)
        } else {
            Err(GsbmError::InvalidGroup(format!("unknown group {name:?}")))
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.cayley.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.cayley[g][h]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn cayley(&self) -> &[Vec<usize>] {
        &self.cayley
    }

    pub fn is_abelian(&self) -> bool {
        let k = self.order();
        (0..k).all(|g| (0..k).all(|h| self.cayley[g][h] == self.cayley[h][g]))
    }

    /// Multiplicative order of `g`.
    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut n = 1;
        while x != self.identity {
            x = self.mul(x, g);
            n += 1;
        }
        n
    }
}

fn is_permutation(it: impl Iterator<Item = usize>, k: usize) -> bool {
    let mut seen = vec![false; k];
    for x in it {
        if x >= k || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    seen.into_iter().all(|s| s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_groups_validate() {
        for k in 2..8 {
            let g = FiniteGroup::cyclic(k).unwrap();
            assert_eq!(g.order(), k);
            assert!(g.is_abelian());
            assert_eq!(g.identity(), 0);
            assert_eq!(g.inv(1), k - 1);
        }
        let s3 = FiniteGroup::symmetric(3).unwrap();
        assert_eq!(s3.order(), 6);
        assert!(!s3.is_abelian());
        assert!((0..6).any(|g| s3.element_order(g) == 3));
        assert_eq!(FiniteGroup::by_name("Sym([3])").unwrap(), s3);
        assert_eq!(FiniteGroup::by_name("Z4").unwrap().order(), 4);
    }

    #[test]
    fn rejects_bad_tables() {
        // Latin square without associativity: a quasigroup of order 3 with no identity
        let bad = vec![vec![0, 2, 1], vec![2, 1, 0], vec![1, 0, 2]];
        assert!(FiniteGroup::from_cayley("q", bad).is_err());
        let not_latin = vec![vec![0, 1], vec![0, 1]];
        assert!(FiniteGroup::from_cayley("x", not_latin).is_err());
        assert!(FiniteGroup::from_cayley("tiny", vec![vec![0]]).is_err());
        assert!(FiniteGroup::by_name("Q8").is_err());
    }
}
