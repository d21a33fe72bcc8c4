//! β-wordlength patterns and their sequential comparison.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::design::Design;
use crate::error::{Error, Result};
use crate::field::PrimeLevel;
use crate::orthopoly::{orthonormal_basis, OrthonormalBasis};

/// Values at or below this are treated as zero.
pub const ZERO_TOL: f64 = 1e-8;
/// Relative tolerance used when ranking patterns.
pub const COMPARE_TOL: f64 = 1e-8;

/// Largest q^n for which the full pattern is computed through the run-count
/// tensor.
const TENSOR_CELLS_MAX: usize = 1 << 24;

/// `(β_1, ..., β_kmax)` of a design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaPattern {
    q: PrimeLevel,
    n: usize,
    values: Vec<f64>,
}

impl BetaPattern {
    pub fn new(q: PrimeLevel, n: usize, values: Vec<f64>) -> Result<Self> {
        let full = n * (q.as_usize() - 1);
        if values.len() > full {
            return Err(Error::Shape(format!(
                "{} values exceed K = n(q-1) = {full}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= -1e-12)) {
            return Err(Error::Shape(format!("β value {v} is negative")));
        }
        Ok(BetaPattern {
            q,
            n,
            values: values.into_iter().map(|v| v.max(0.0)).collect(),
        })
    }

    pub fn q(&self) -> PrimeLevel {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Values for k = 1..=len.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `β_k`, 1-based.
    pub fn beta(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.values.get(i)).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// K = n(q-1).
    pub fn full_len(&self) -> usize {
        self.n * (self.q.as_usize() - 1)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.full_len()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

fn check_k(design: &Design, k: usize) -> Result<()> {
    let full = design.factors() * (design.q().as_usize() - 1);
    if k == 0 || k > full {
        return Err(Error::OutOfRange {
            what: "k",
            value: k as i64,
            lo: 1,
            hi: full as i64,
        });
    }
    Ok(())
}

fn check_basis(design: &Design, basis: &OrthonormalBasis) -> Result<()> {
    if basis.q() != design.q().as_usize() {
        return Err(Error::Shape(format!(
            "basis is for q={} but the design has q={}",
            basis.q(),
            design.q()
        )));
    }
    Ok(())
}

/// `p_u(x_ij)` laid out as `[j][u][i]`.
struct ColumnTable {
    runs: usize,
    q: usize,
    data: Vec<f64>,
}

impl ColumnTable {
    fn new(design: &Design, basis: &OrthonormalBasis) -> Self {
        let (runs, n, q) = (design.runs(), design.factors(), basis.q());
        let mut data = vec![0.0; n * q * runs];
        for (i, row) in design.rows().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                for u in 0..q {
                    data[(j * q + u) * runs + i] = basis.value(u, x as usize);
                }
            }
        }
        ColumnTable { runs, q, data }
    }

    #[inline]
    fn column(&self, j: usize, u: usize) -> &[f64] {
        let start = (j * self.q + u) * self.runs;
        &self.data[start..start + self.runs]
    }
}

/// `β_k = N^-2 sum_{|u|=k} (sum_i prod_j p_{u_j}(x_ij))^2`, summed over the
/// compositions of k with parts at most q-1.
pub fn beta_k(design: &Design, k: usize, basis: &OrthonormalBasis) -> Result<f64> {
    check_basis(design, basis)?;
    check_k(design, k)?;
    Ok(beta_k_unchecked(design, k, &ColumnTable::new(design, basis)))
}

fn beta_k_unchecked(design: &Design, k: usize, table: &ColumnTable) -> f64 {
    let runs = design.runs();
    let n = design.factors();
    let ones = vec![1.0; runs];
    let mut scratch = vec![vec![0.0; runs]; n];
    let mut acc = 0.0;
    compose(table, n, 0, k, &ones, &mut scratch, &mut acc);
    (acc / (runs as f64 * runs as f64)).max(0.0)
}

fn compose(
    table: &ColumnTable,
    n: usize,
    j: usize,
    rem: usize,
    prod: &[f64],
    scratch: &mut [Vec<f64>],
    acc: &mut f64,
) {
    if rem == 0 {
        let s: f64 = prod.iter().sum();
        *acc += s * s;
        return;
    }
    if j == n || rem > (n - j) * (table.q - 1) {
        return;
    }
    let (buf, rest) = scratch.split_first_mut().unwrap();
    compose(table, n, j + 1, rem, prod, rest, acc);
    for u in 1..=rem.min(table.q - 1) {
        for ((b, p), c) in buf.iter_mut().zip(prod).zip(table.column(j, u)) {
            *b = p * c;
        }
        compose(table, n, j + 1, rem - u, buf, rest, acc);
    }
}

/// Number of u in {0..q-1}^n with |u| = k.
fn composition_count(q: usize, n: usize, k: usize) -> u128 {
    let mut ways = vec![0u128; k + 1];
    ways[0] = 1;
    for _ in 0..n {
        let mut next = vec![0u128; k + 1];
        for (s, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for u in 0..q.min(k - s + 1) {
                next[s + u] = next[s + u].saturating_add(w);
            }
        }
        ways = next;
    }
    ways[k]
}

/// Cost of the tensor route for a whole pattern, when it fits in memory.
fn tensor_cost(q: usize, n: usize) -> Option<u128> {
    q.checked_pow(n as u32)
        .filter(|&c| c <= TENSOR_CELLS_MAX)
        .map(|c| (n * c * q) as u128)
}

fn direct_cost(q: usize, n: usize, runs: usize, k: usize) -> u128 {
    composition_count(q, n, k).saturating_mul(runs as u128 * k.min(n) as u128)
}

fn kernel_cost(q: usize, n: usize, runs: usize) -> u128 {
    let pairs = runs as u128 * (runs as u128 + 1) / 2;
    pairs.saturating_mul((n * n * q * q / 2 + 1) as u128)
}

fn full_cost(q: usize, n: usize, runs: usize) -> u128 {
    let k = kernel_cost(q, n, runs);
    tensor_cost(q, n).map_or(k, |t| t.min(k))
}

/// True when computing the whole pattern is cheaper than the direct sum for
/// β_k alone.
pub(crate) fn prefer_full(design: &Design, k: usize) -> bool {
    let (q, n, runs) = (design.q().as_usize(), design.factors(), design.runs());
    full_cost(q, n, runs) < direct_cost(q, n, runs, k)
}

/// Whole pattern `β_1..β_K` through the cheaper of the tensor and pair-kernel
/// routes.
pub(crate) fn full_pattern(design: &Design, basis: &OrthonormalBasis) -> Vec<f64> {
    let (q, n, runs) = (design.q().as_usize(), design.factors(), design.runs());
    match tensor_cost(q, n) {
        Some(t) if t <= kernel_cost(q, n, runs) => tensor_pattern(design, basis),
        _ => kernel_pattern(design, basis),
    }
}

/// Pattern for k = 1..=k_max (all K when `None`).
pub fn beta_pattern(design: &Design, k_max: Option<usize>) -> Result<BetaPattern> {
    beta_pattern_with(design, &orthonormal_basis(design.q()), k_max)
}

pub fn beta_pattern_with(
    design: &Design,
    basis: &OrthonormalBasis,
    k_max: Option<usize>,
) -> Result<BetaPattern> {
    check_basis(design, basis)?;
    let full = design.factors() * (design.q().as_usize() - 1);
    let k_max = k_max.unwrap_or(full);
    check_k(design, k_max)?;

    let q = design.q().as_usize();
    let n = design.factors();
    let direct: u128 = (1..=k_max)
        .map(|k| direct_cost(q, n, design.runs(), k))
        .fold(0u128, u128::saturating_add);
    let values = match full_cost(q, n, design.runs()) {
        f if f <= direct => {
            let mut all = full_pattern(design, basis);
            all.truncate(k_max);
            all
        }
        _ => {
            let table = ColumnTable::new(design, basis);
            (1..=k_max)
                .map(|k| beta_k_unchecked(design, k, &table))
                .collect()
        }
    };
    BetaPattern::new(design.q(), n, values)
}

/// Lazily evaluated β_k values for one design, for staged comparisons.
pub struct BetaEvaluator<'a> {
    design: &'a Design,
    table: ColumnTable,
    cache: Vec<Option<f64>>,
}

impl<'a> BetaEvaluator<'a> {
    pub fn new(design: &'a Design, basis: &OrthonormalBasis) -> Result<Self> {
        check_basis(design, basis)?;
        let full = design.factors() * (design.q().as_usize() - 1);
        Ok(BetaEvaluator {
            design,
            table: ColumnTable::new(design, basis),
            cache: vec![None; full],
        })
    }

    pub fn beta(&mut self, k: usize) -> Result<f64> {
        check_k(self.design, k)?;
        if let Some(v) = self.cache[k - 1] {
            return Ok(v);
        }
        let v = beta_k_unchecked(self.design, k, &self.table);
        self.cache[k - 1] = Some(v);
        Ok(v)
    }
}

/// Full pattern via the run-count tensor: transform each axis by the basis,
/// then bucket squared coefficients by |u|.
pub(crate) fn tensor_pattern(design: &Design, basis: &OrthonormalBasis) -> Vec<f64> {
    let q = basis.q();
    let n = design.factors();
    let cells = q.pow(n as u32);
    let mut f = vec![0.0f64; cells];
    for row in design.rows() {
        let idx = row.iter().fold(0usize, |a, &x| a * q + x as usize);
        f[idx] += 1.0;
    }
    let mut g = vec![0.0f64; cells];
    let mut tmp = vec![0.0f64; q];
    // axis j has stride q^(n-1-j)
    for j in 0..n {
        let stride = q.pow((n - 1 - j) as u32);
        let block = stride * q;
        for base in (0..cells).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                for (x, t) in tmp.iter_mut().enumerate() {
                    *t = f[start + x * stride];
                }
                for u in 0..q {
                    let p = basis.row(u);
                    g[start + u * stride] = p.iter().zip(&tmp).map(|(a, b)| a * b).sum();
                }
            }
        }
        std::mem::swap(&mut f, &mut g);
    }
    let full = n * (q - 1);
    let mut out = vec![0.0f64; full + 1];
    let mut digits = vec![0usize; n];
    let mut weight = 0usize;
    for v in &f {
        out[weight] += v * v;
        // advance the mixed-radix counter, tracking the digit sum
        for d in digits.iter_mut().rev() {
            *d += 1;
            weight += 1;
            if *d < q {
                break;
            }
            weight -= q;
            *d = 0;
        }
    }
    let norm = (design.runs() as f64).powi(2);
    out.into_iter().skip(1).map(|v| (v / norm).max(0.0)).collect()
}

/// `K_xy[u] = p_u(x) p_u(y)`, flattened as `[x][y][u]`.
fn pair_kernel(basis: &OrthonormalBasis) -> Vec<f64> {
    let q = basis.q();
    let mut k = vec![0.0; q * q * q];
    for x in 0..q {
        for y in 0..q {
            for u in 0..q {
                k[(x * q + y) * q + u] = basis.value(u, x) * basis.value(u, y);
            }
        }
    }
    k
}

/// Full pattern as `N^-2 sum_{i,i'} [z^k] prod_j K_{x_ij x_i'j}(z)`.
pub(crate) fn kernel_pattern(design: &Design, basis: &OrthonormalBasis) -> Vec<f64> {
    let q = basis.q();
    let n = design.factors();
    let full = n * (q - 1);
    let kern = pair_kernel(basis);
    let mut acc = vec![0.0f64; full + 1];
    let mut poly = vec![0.0f64; full + 1];
    let mut next = vec![0.0f64; full + 1];
    for i in 0..design.runs() {
        let a = design.row(i);
        for i2 in i..design.runs() {
            let b = design.row(i2);
            poly[0] = 1.0;
            let mut deg = 0;
            for j in 0..n {
                let kv = &kern[(a[j] as usize * q + b[j] as usize) * q..][..q];
                next[..=deg + q - 1].iter_mut().for_each(|v| *v = 0.0);
                for (d, &pd) in poly[..=deg].iter().enumerate() {
                    for (u, &ku) in kv.iter().enumerate() {
                        next[d + u] += pd * ku;
                    }
                }
                deg += q - 1;
                std::mem::swap(&mut poly, &mut next);
            }
            let w = if i == i2 { 1.0 } else { 2.0 };
            for (a, p) in acc.iter_mut().zip(&poly) {
                *a += w * p;
            }
        }
    }
    let norm = (design.runs() as f64).powi(2);
    acc.into_iter().skip(1).map(|v| (v / norm).max(0.0)).collect()
}

/// `sum_{k odd} β_k`, as `(P(1) - P(-1)) / 2` with `P(z) = sum_k β_k z^k`
/// evaluated through the pair kernel.
pub fn odd_beta_sum(design: &Design) -> f64 {
    beta_sums(design).1
}

/// `(sum_k β_k, sum_{k odd} β_k)` over k >= 1. With many factors both
/// carry rounding error proportional to the first.
pub fn beta_sums(design: &Design) -> (f64, f64) {
    let basis = orthonormal_basis(design.q());
    let q = basis.q();
    let (kp, km): (Vec<f64>, Vec<f64>) = (0..q * q)
        .map(|xy| {
            let (x, y) = (xy / q, xy % q);
            (0..q).fold((0.0, 0.0), |(p, m), u| {
                let t = basis.value(u, x) * basis.value(u, y);
                (p + t, if u % 2 == 0 { m + t } else { m - t })
            })
        })
        .unzip();
    let (mut plus, mut minus) = (0.0, 0.0);
    for i in 0..design.runs() {
        let a = design.row(i);
        for i2 in i..design.runs() {
            let b = design.row(i2);
            let (mut pp, mut pm) = (1.0, 1.0);
            for (&x, &y) in a.iter().zip(b) {
                let idx = x as usize * q + y as usize;
                pp *= kp[idx];
                pm *= km[idx];
            }
            let w = if i == i2 { 1.0 } else { 2.0 };
            plus += w * pp;
            minus += w * pm;
        }
    }
    let n2 = (design.runs() as f64).powi(2);
    let total = (plus / n2 - 1.0).max(0.0);
    let odd = ((plus - minus) / (2.0 * n2)).max(0.0);
    (total, odd)
}

#[inline]
fn differs(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() > tol * 1f64.max(a.abs()).max(b.abs())
}

/// Compares two values under the relative tolerance used for patterns.
pub fn compare_values(a: f64, b: f64, tol: f64) -> Ordering {
    if differs(a, b, tol) {
        a.partial_cmp(&b).unwrap_or(Ordering::Equal)
    } else {
        Ordering::Equal
    }
}

/// Sequential comparison: the first k where the values differ decides.
pub fn compare_patterns(a: &BetaPattern, b: &BetaPattern, tol: f64) -> Result<Ordering> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "cannot compare patterns of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(compare_slices(a.values(), b.values(), tol))
}

pub(crate) fn compare_slices(a: &[f64], b: &[f64], tol: f64) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| compare_values(x, y, tol))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// `sum_k β_k`; equals `q^n / N - 1` for designs with distinct runs.
pub fn beta_sum_check(design: &Design) -> f64 {
    beta_pattern(design, None).map_or(f64::NAN, |p| p.sum())
}
