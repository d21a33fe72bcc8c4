//! Designs as level arrays, regular designs from linear generators, and the
//! level permutations applied to them.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{enumerate_tuples, proportional, PrimeLevel};

/// Largest number of rows `expand` will materialize.
pub const DEFAULT_RUN_CAP: u64 = 1_000_000;

/// An N x n array over Z_q, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Design {
    q: PrimeLevel,
    runs: usize,
    factors: usize,
    cells: Vec<u32>,
}

impl Design {
    pub fn new(q: PrimeLevel, rows: Vec<Vec<u32>>) -> Result<Self> {
        let runs = rows.len();
        let factors = rows.first().map_or(0, Vec::len);
        if runs == 0 || factors == 0 {
            return Err(Error::Shape("a design needs at least one run and one factor".into()));
        }
        let mut cells = Vec::with_capacity(runs * factors);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != factors {
                return Err(Error::Shape(format!(
                    "run {i} has {} levels, expected {factors}",
                    row.len()
                )));
            }
            cells.extend(row);
        }
        Self::from_cells(q, runs, factors, cells)
    }

    pub fn from_cells(q: PrimeLevel, runs: usize, factors: usize, cells: Vec<u32>) -> Result<Self> {
        if runs == 0 || factors == 0 || cells.len() != runs * factors {
            return Err(Error::Shape(format!(
                "{} cells cannot form a {runs} x {factors} design",
                cells.len()
            )));
        }
        if let Some(&bad) = cells.iter().find(|&&x| x >= q.get()) {
            return Err(Error::OutOfRange {
                what: "level",
                value: bad as i64,
                lo: 0,
                hi: q.get() as i64 - 1,
            });
        }
        Ok(Design {
            q,
            runs,
            factors,
            cells,
        })
    }

    #[inline]
    pub fn q(&self) -> PrimeLevel {
        self.q
    }

    #[inline]
    pub fn runs(&self) -> usize {
        self.runs
    }

    #[inline]
    pub fn factors(&self) -> usize {
        self.factors
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u32] {
        &self.cells[i * self.factors..(i + 1) * self.factors]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.cells.chunks_exact(self.factors)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.cells[i * self.factors + j]
    }

    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = u32> + '_ {
        self.rows().map(move |r| r[j])
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.rows().map(<[u32]>::to_vec).collect()
    }

    /// Applies a level map to every entry.
    pub fn map_levels(&self, f: impl Fn(u32) -> u32) -> Design {
        Design {
            cells: self.cells.iter().map(|&x| f(x)).collect(),
            ..self.clone()
        }
    }

    /// Adds `c` to every entry mod q.
    pub fn shift(&self, c: u32) -> Design {
        let q = self.q;
        self.map_levels(|x| q.add(x, c))
    }

    /// `(q-1)J - D`.
    pub fn reflect(&self) -> Design {
        let top = self.q.get() - 1;
        self.map_levels(|x| top - x)
    }

    /// The sub-design formed by the given columns, in the given order.
    pub fn project(&self, columns: &[usize]) -> Result<Design> {
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.factors) {
            return Err(Error::Shape(format!(
                "column {bad} does not exist in a {}-factor design",
                self.factors
            )));
        }
        let cells = self
            .rows()
            .flat_map(|r| columns.iter().map(move |&c| r[c]))
            .collect();
        Design::from_cells(self.q, self.runs, columns.len(), cells)
    }

    fn sorted_rows(&self) -> Vec<&[u32]> {
        let mut rows: Vec<&[u32]> = self.rows().collect();
        rows.sort_unstable();
        rows
    }

    /// Serializes to the text format: a `# q=<q> N=<N> n=<n>` header, then
    /// one space-separated run per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("# q={} N={} n={}\n", self.q, self.runs, self.factors);
        for row in self.rows() {
            let mut first = true;
            for x in row {
                if !first {
                    s.push(' ');
                }
                first = false;
                write!(s, "{x}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str, source_name: &str) -> Result<Design> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(source_name, 1, "empty design file"))?;
        let (q, runs, factors) = parse_header(header)
            .ok_or_else(|| {
                Error::parse(source_name, hline + 1, "expected header `# q=<q> N=<N> n=<n>`")
            })?;
        let q = PrimeLevel::new(q).map_err(|e| Error::parse(source_name, hline + 1, e.to_string()))?;
        let mut cells = Vec::with_capacity(runs * factors);
        let mut seen = 0;
        for (ln, line) in lines {
            let before = cells.len();
            for tok in line.split_whitespace() {
                let v: u32 = tok.parse().map_err(|_| {
                    Error::parse(source_name, ln + 1, format!("`{tok}` is not a level"))
                })?;
                if v >= q.get() {
                    return Err(Error::parse(
                        source_name,
                        ln + 1,
                        format!("level {v} is outside 0..{}", q.get()),
                    ));
                }
                cells.push(v);
            }
            if cells.len() - before != factors {
                return Err(Error::parse(
                    source_name,
                    ln + 1,
                    format!("expected {factors} levels, found {}", cells.len() - before),
                ));
            }
            seen += 1;
        }
        if seen != runs {
            return Err(Error::parse(
                source_name,
                hline + 1,
                format!("header declares N={runs} but {seen} runs follow"),
            ));
        }
        Design::from_cells(q, runs, factors, cells)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Design> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Design::from_text(&text, &path.display().to_string())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

fn parse_header(line: &str) -> Option<(i64, usize, usize)> {
    let rest = line.trim().strip_prefix('#')?;
    let (mut q, mut runs, mut factors) = (None, None, None);
    for kv in rest.split_whitespace() {
        let (k, v) = kv.split_once('=')?;
        match k {
            "q" => q = v.parse().ok(),
            "N" => runs = v.parse().ok(),
            "n" => factors = v.parse().ok(),
            _ => return None,
        }
    }
    Some((q?, runs?, factors?))
}

/// The m x (n-m) coefficients defining a regular q^(n-m) design: dependent
/// column i is `sum_j coefs[i][j] * x_j` over the independent columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GeneratorSet {
    q: PrimeLevel,
    coefs: Vec<Vec<u32>>,
}

impl GeneratorSet {
    pub fn new(q: PrimeLevel, coefs: Vec<Vec<i64>>) -> Result<Self> {
        let reduced = coefs
            .into_iter()
            .map(|r| r.into_iter().map(|c| q.reduce(c)).collect())
            .collect();
        Self::from_reduced(q, reduced)
    }

    pub fn from_reduced(q: PrimeLevel, coefs: Vec<Vec<u32>>) -> Result<Self> {
        let m = coefs.len();
        if m == 0 {
            return Err(Error::InvalidGenerators("at least one generator is required".into()));
        }
        let k = coefs[0].len();
        if k == 0 {
            return Err(Error::InvalidGenerators("generators need at least one coefficient".into()));
        }
        if let Some((i, r)) = coefs.iter().enumerate().find(|(_, r)| r.len() != k) {
            return Err(Error::InvalidGenerators(format!(
                "generator {} has {} coefficients, expected {k}",
                i + 1,
                r.len()
            )));
        }
        if coefs.iter().flatten().any(|&c| c >= q.get()) {
            return Err(Error::InvalidGenerators("coefficients must be reduced mod q".into()));
        }
        if let Some(i) = coefs.iter().position(|r| r.iter().all(|&c| c == 0)) {
            return Err(Error::InvalidGenerators(format!("generator {} is zero", i + 1)));
        }
        let gen = GeneratorSet { q, coefs };
        let cols = gen.column_vectors();
        for a in 0..cols.len() {
            for b in a + 1..cols.len() {
                if proportional(&cols[a], &cols[b], q) {
                    return Err(Error::InvalidGenerators(format!(
                        "columns {} and {} are proportional mod {q}; the design would not have strength 2",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        Ok(gen)
    }

    /// Parses `"c11,c12;c21,c22"`: generators separated by `;`, coefficients
    /// by `,`.
    pub fn parse(q: PrimeLevel, spec: &str) -> Result<Self> {
        let rows = spec
            .split(';')
            .map(|row| {
                row.split(',')
                    .map(|t| {
                        t.trim().parse::<i64>().map_err(|_| {
                            Error::InvalidGenerators(format!("`{}` is not an integer", t.trim()))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        GeneratorSet::new(q, rows)
    }

    #[inline]
    pub fn q(&self) -> PrimeLevel {
        self.q
    }

    /// Number of dependent columns.
    #[inline]
    pub fn m(&self) -> usize {
        self.coefs.len()
    }

    /// Number of independent columns.
    #[inline]
    pub fn independent(&self) -> usize {
        self.coefs[0].len()
    }

    /// Total columns.
    #[inline]
    pub fn n(&self) -> usize {
        self.m() + self.independent()
    }

    pub fn coefs(&self) -> &[Vec<u32>] {
        &self.coefs
    }

    /// Every column written in the basis of the independent columns: unit
    /// vectors first, then the generator rows.
    pub fn column_vectors(&self) -> Vec<Vec<u32>> {
        let k = self.independent();
        (0..k)
            .map(|j| (0..k).map(|i| u32::from(i == j)).collect())
            .chain(self.coefs.iter().cloned())
            .collect()
    }

    /// The same design with the dependent columns listed in another order.
    pub fn with_dependent_order(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.m()];
        for &i in order {
            if i >= self.m() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Shape("not a permutation of the dependent columns".into()));
            }
        }
        if order.len() != self.m() {
            return Err(Error::Shape("not a permutation of the dependent columns".into()));
        }
        Ok(GeneratorSet {
            q: self.q,
            coefs: order.iter().map(|&i| self.coefs[i].clone()).collect(),
        })
    }

    pub fn to_flag(&self) -> String {
        self.coefs
            .iter()
            .map(|r| r.iter().map(u32::to_string).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Shifts `b` applied to the dependent columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PermutationVector(Vec<u32>);

impl PermutationVector {
    pub fn new(q: PrimeLevel, values: impl IntoIterator<Item = i64>) -> Self {
        PermutationVector(values.into_iter().map(|v| q.reduce(v)).collect())
    }

    pub fn zeros(m: usize) -> Self {
        PermutationVector(vec![0; m])
    }

    pub fn parse(q: PrimeLevel, spec: &str) -> Result<Self> {
        let vals = spec
            .split(',')
            .map(|t| {
                t.trim().parse::<i64>().map_err(|_| {
                    Error::InvalidGenerators(format!("`{}` is not an integer shift", t.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PermutationVector::new(q, vals))
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Componentwise difference mod q.
    pub fn sub(&self, other: &PermutationVector, q: PrimeLevel) -> PermutationVector {
        PermutationVector(self.0.iter().zip(&other.0).map(|(&a, &b)| q.sub(a, b)).collect())
    }
}

impl From<Vec<u32>> for PermutationVector {
    fn from(v: Vec<u32>) -> Self {
        PermutationVector(v)
    }
}

/// The regular design: independent columns run through Z_q^(n-m) in
/// `enumerate_tuples` order, dependent columns follow the generators.
pub fn expand(gen: &GeneratorSet) -> Result<Design> {
    expand_with_cap(gen, DEFAULT_RUN_CAP)
}

pub fn expand_with_cap(gen: &GeneratorSet, cap: u64) -> Result<Design> {
    build(gen, None, cap)
}

/// `D_b`: the regular design with dependent column i shifted by `b_i`.
pub fn linear_permute(gen: &GeneratorSet, b: &PermutationVector) -> Result<Design> {
    if b.len() != gen.m() {
        return Err(Error::Shape(format!(
            "permutation has {} entries but there are {} dependent columns",
            b.len(),
            gen.m()
        )));
    }
    build(gen, Some(b.as_slice()), DEFAULT_RUN_CAP)
}

fn build(gen: &GeneratorSet, shift: Option<&[u32]>, cap: u64) -> Result<Design> {
    let q = gen.q();
    let k = gen.independent();
    let runs = (q.get() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if runs > cap as u128 {
        return Err(Error::RunCap { runs, cap });
    }
    let runs = runs as usize;
    let n = gen.n();
    let mut cells = Vec::with_capacity(runs * n);
    for base in enumerate_tuples(q, k) {
        cells.extend_from_slice(&base);
        for (i, row) in gen.coefs().iter().enumerate() {
            let mut acc = shift.map_or(0u64, |b| b[i] as u64);
            for (c, x) in row.iter().zip(&base) {
                acc += *c as u64 * *x as u64;
            }
            cells.push((acc % q.get() as u64) as u32);
        }
    }
    Design::from_cells(q, runs, n, cells)
}

fn check_level(x: u32, q: PrimeLevel) -> Result<()> {
    if x >= q.get() {
        return Err(Error::OutOfRange {
            what: "level",
            value: x as i64,
            lo: 0,
            hi: q.get() as i64 - 1,
        });
    }
    Ok(())
}

/// `W(x) = 2x` below q/2, `2(q-x)-1` otherwise.
pub fn williams_value(x: u32, q: PrimeLevel) -> Result<u32> {
    check_level(x, q)?;
    Ok(williams_unchecked(x, q.get()))
}

#[inline]
fn williams_unchecked(x: u32, q: u32) -> u32 {
    if 2 * x < q {
        2 * x
    } else {
        2 * (q - x) - 1
    }
}

/// `W^-1(x) = x/2` for even x, `q - (x+1)/2` for odd x.
pub fn williams_inverse(x: u32, q: PrimeLevel) -> Result<u32> {
    check_level(x, q)?;
    Ok(if x % 2 == 0 {
        x / 2
    } else {
        q.get() - (x + 1) / 2
    })
}

/// Applies the Williams transformation to every entry.
pub fn williams(design: &Design) -> Design {
    let q = design.q().get();
    let table: Vec<u32> = (0..q).map(|x| williams_unchecked(x, q)).collect();
    design.map_levels(|x| table[x as usize])
}

/// Largest t <= t_max such that every t-column projection contains each of
/// the q^t level combinations equally often; 0 when some column is already
/// unbalanced.
pub fn strength(design: &Design, t_max: usize) -> usize {
    let q = design.q().as_usize();
    let n = design.factors();
    let runs = design.runs();
    let mut verified = 0;
    for t in 1..=t_max.min(n) {
        let Some(cells) = q.checked_pow(t as u32) else {
            break;
        };
        if runs % cells != 0 {
            break;
        }
        let expected = runs / cells;
        let mut counts = vec![0usize; cells];
        let balanced = Combinations::new(n, t).all(|cols| {
            counts.iter_mut().for_each(|c| *c = 0);
            for row in design.rows() {
                let idx = cols.iter().fold(0usize, |a, &c| a * q + row[c] as usize);
                counts[idx] += 1;
            }
            counts.iter().all(|&c| c == expected)
        });
        if !balanced {
            break;
        }
        verified = t;
    }
    verified
}

/// True when `(q-1)J - D` has the same runs as `D`.
pub fn is_mirror_symmetric(design: &Design) -> bool {
    let reflected = design.reflect();
    design.sorted_rows() == reflected.sorted_rows()
}

/// Equality of designs as multisets of runs.
pub fn same_design(a: &Design, b: &Design) -> Result<bool> {
    if a.q() != b.q() || a.runs() != b.runs() || a.factors() != b.factors() {
        return Err(Error::Shape(format!(
            "cannot compare a {}x{} q={} design with a {}x{} q={} design",
            a.runs(),
            a.factors(),
            a.q(),
            b.runs(),
            b.factors(),
            b.q()
        )));
    }
    Ok(a.sorted_rows() == b.sorted_rows())
}

/// k-subsets of 0..n in lexicographic order.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let k = cur.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if cur[i] < self.n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
        if k == 0 {
            self.current = None;
        }
        Some(out)
    }
}
