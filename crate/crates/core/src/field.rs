//! Arithmetic over the prime field Z_q, rank by elimination, and the
//! canonical enumeration of Z_q^k used to lay out full factorials.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An odd prime level count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u32")]
pub struct PrimeLevel(u32);

impl PrimeLevel {
    pub fn new(q: i64) -> Result<Self> {
        check_odd_prime(q)
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_usize(self) -> usize {
        self.0 as usize
    }

    /// Reduces any integer into {0, ..., q-1}.
    #[inline]
    pub fn reduce(self, x: i64) -> u32 {
        x.rem_euclid(self.0 as i64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.0 as u64) as u32
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.0 as u64 - (b % self.0) as u64) % self.0 as u64) as u32
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        self.sub(0, a)
    }

    /// Multiplicative inverse of a nonzero element (Fermat).
    pub fn inv(self, a: u32) -> Option<u32> {
        let a = a % self.0;
        if a == 0 {
            return None;
        }
        let mut base = a as u64;
        let mut exp = self.0 as u64 - 2;
        let m = self.0 as u64;
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % m;
            }
            base = base * base % m;
            exp >>= 1;
        }
        Some(acc as u32)
    }
}

impl fmt::Display for PrimeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<i64> for PrimeLevel {
    type Error = Error;

    fn try_from(q: i64) -> Result<Self> {
        check_odd_prime(q)
    }
}

impl From<PrimeLevel> for u32 {
    fn from(q: PrimeLevel) -> u32 {
        q.0
    }
}

/// Validates that `q` is an odd prime. Trial division; level counts in
/// practice stay far below where that matters.
pub fn check_odd_prime(q: i64) -> Result<PrimeLevel> {
    if q < 3 {
        return Err(Error::InvalidLevel {
            q,
            reason: if q == 2 {
                "even; an odd prime is required"
            } else {
                "less than 3"
            },
        });
    }
    if q % 2 == 0 {
        return Err(Error::InvalidLevel {
            q,
            reason: "even; an odd prime is required",
        });
    }
    if q > u32::MAX as i64 {
        return Err(Error::InvalidLevel {
            q,
            reason: "too large",
        });
    }
    let mut d = 3i64;
    while d * d <= q {
        if q % d == 0 {
            return Err(Error::InvalidLevel {
                q,
                reason: "composite",
            });
        }
        d += 2;
    }
    Ok(PrimeLevel(q as u32))
}

/// A coefficient vector over Z_q with every entry reduced.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoefVector(Vec<u32>);

impl CoefVector {
    pub fn new(q: PrimeLevel, coefficients: impl IntoIterator<Item = i64>) -> Self {
        CoefVector(coefficients.into_iter().map(|c| q.reduce(c)).collect())
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.0
    }
}

/// Rank of `rows` over GF(q), by row reduction. Entries are reduced mod q
/// first, so unreduced input is accepted.
pub fn rank_mod(rows: &[Vec<u32>], q: PrimeLevel) -> Result<usize> {
    let Some(first) = rows.first() else {
        return Ok(0);
    };
    let width = first.len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
        return Err(Error::Shape(format!(
            "row {i} has {} entries, expected {width}",
            r.len()
        )));
    }
    let mut m: Vec<Vec<u32>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x % q.get()).collect())
        .collect();
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = q.inv(m[rank][col]).expect("nonzero pivot");
        for c in col..width {
            m[rank][c] = q.mul(m[rank][c], inv);
        }
        for r in 0..m.len() {
            if r != rank && m[r][col] != 0 {
                let f = m[r][col];
                for c in col..width {
                    let t = q.mul(f, m[rank][c]);
                    m[r][c] = q.sub(m[r][c], t);
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    Ok(rank)
}

/// True when the two vectors are linearly dependent over GF(q) (including the
/// case where either is zero).
pub fn proportional(a: &[u32], b: &[u32], q: PrimeLevel) -> bool {
    rank_mod(&[a.to_vec(), b.to_vec()], q).map_or(false, |r| r < 2)
}

/// All tuples of Z_q^k in lexicographic order, last coordinate fastest.
pub fn enumerate_tuples(q: PrimeLevel, k: usize) -> TupleIter {
    TupleIter {
        q: q.get(),
        current: if k == 0 { None } else { Some(vec![0; k]) },
    }
}

#[derive(Debug, Clone)]
pub struct TupleIter {
    q: u32,
    current: Option<Vec<u32>>,
}

impl Iterator for TupleIter {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let mut pos = cur.len();
        loop {
            if pos == 0 {
                self.current = None;
                break;
            }
            pos -= 1;
            cur[pos] += 1;
            if cur[pos] < self.q {
                break;
            }
            cur[pos] = 0;
        }
        Some(out)
    }
}
