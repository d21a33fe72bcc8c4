//! Recursive structure of regular designs: starting from an independent set
//! of columns, repeatedly add any design column that is a restricted linear
//! combination of two columns already reached.

use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{Combinations, GeneratorSet};
use crate::error::Result;
use crate::field::{rank_mod, PrimeLevel};
use crate::optimal::enumerate_q2_generators_capped;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RecursiveType {
    TypeI,
    TypeII,
    TypeIII,
    NotRecursive,
}

impl fmt::Display for RecursiveType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecursiveType::TypeI => "type-I",
            RecursiveType::TypeII => "type-II",
            RecursiveType::TypeIII => "type-III",
            RecursiveType::NotRecursive => "not recursive",
        })
    }
}

/// Which coefficients `c1`, `c2` the step `w = c1 w1 + c2 w2` may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `c1, c2` in `{1, q-1}`.
    I,
    /// `c1` in `{1, q-1}`, `c2` free.
    II,
    /// Both free.
    III,
}

impl Regime {
    fn coefficients(self, q: PrimeLevel) -> (Vec<u32>, Vec<u32>) {
        let unit = vec![1, q.get() - 1];
        let all: Vec<u32> = (0..q.get()).collect();
        match self {
            Regime::I => (unit.clone(), unit),
            Regime::II => (unit, all),
            Regime::III => (all.clone(), all),
        }
    }

    fn label(self) -> RecursiveType {
        match self {
            Regime::I => RecursiveType::TypeI,
            Regime::II => RecursiveType::TypeII,
            Regime::III => RecursiveType::TypeIII,
        }
    }
}

/// True when some independent starting set reaches every column under the
/// regime.
pub fn satisfies(gen: &GeneratorSet, regime: Regime) -> bool {
    let q = gen.q();
    let cols = gen.column_vectors();
    let n = cols.len();
    let k = gen.independent();
    let (c1s, c2s) = regime.coefficients(q);
    let index: HashSet<&[u32]> = cols.iter().map(Vec::as_slice).collect();
    Combinations::new(n, k).any(|start| {
        let basis: Vec<Vec<u32>> = start.iter().map(|&i| cols[i].clone()).collect();
        if rank_mod(&basis, q).ok() != Some(k) {
            return false;
        }
        let mut reached = vec![false; n];
        start.iter().for_each(|&i| reached[i] = true);
        closure(&cols, &index, &mut reached, &c1s, &c2s, q)
    })
}

fn closure(
    cols: &[Vec<u32>],
    index: &HashSet<&[u32]>,
    reached: &mut [bool],
    c1s: &[u32],
    c2s: &[u32],
    q: PrimeLevel,
) -> bool {
    let mut w = vec![0u32; cols[0].len()];
    loop {
        let mut grew = false;
        let members: Vec<usize> = (0..cols.len()).filter(|&i| reached[i]).collect();
        for &a in &members {
            for &b in &members {
                if a == b {
                    continue;
                }
                for &c1 in c1s {
                    for &c2 in c2s {
                        for ((x, &p), &r) in w.iter_mut().zip(&cols[a]).zip(&cols[b]) {
                            *x = q.add(q.mul(c1, p), q.mul(c2, r));
                        }
                        if !index.contains(w.as_slice()) {
                            continue;
                        }
                        let hit = cols.iter().position(|c| *c == w).expect("indexed column");
                        if !reached[hit] {
                            reached[hit] = true;
                            grew = true;
                        }
                    }
                }
            }
        }
        if reached.iter().all(|&r| r) {
            return true;
        }
        if !grew {
            return false;
        }
    }
}

/// The strongest regime under which the design is recursive.
pub fn classify(gen: &GeneratorSet) -> RecursiveType {
    [Regime::I, Regime::II, Regime::III]
        .into_iter()
        .find(|&r| satisfies(gen, r))
        .map_or(RecursiveType::NotRecursive, Regime::label)
}

/// Cumulative tallies: a type-I design also counts as type-II and type-III.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RecursiveCounts {
    pub type_i: u64,
    pub type_ii: u64,
    pub type_iii: u64,
    pub total: u64,
}

/// Classifies every q^2-run generator set with n columns.
pub fn count_recursive(q: PrimeLevel, n: usize, cap: u64) -> Result<RecursiveCounts> {
    let gens = enumerate_q2_generators_capped(q, n, cap)?;
    let labels: Vec<RecursiveType> = gens.par_iter().map(classify).collect();
    let mut c = RecursiveCounts {
        total: gens.len() as u64,
        ..Default::default()
    };
    for l in labels {
        match l {
            RecursiveType::TypeI => {
                c.type_i += 1;
                c.type_ii += 1;
                c.type_iii += 1;
            }
            RecursiveType::TypeII => {
                c.type_ii += 1;
                c.type_iii += 1;
            }
            RecursiveType::TypeIII => c.type_iii += 1,
            RecursiveType::NotRecursive => {}
        }
    }
    Ok(c)
}
