//! Closed-form level shifts, exhaustive searches over shifted families, and
//! the generator space of q^2-run designs.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aberration::{
    beta_pattern_with, beta_sums, compare_values, full_pattern, prefer_full, BetaEvaluator, BetaPattern, COMPARE_TOL,
};
use crate::design::{
    is_mirror_symmetric, linear_permute, williams, williams_inverse, Design, GeneratorSet,
    PermutationVector,
};
use crate::error::{Error, Result};
use crate::field::{enumerate_tuples, PrimeLevel};
use crate::orthopoly::{orthonormal_basis, OrthonormalBasis};

/// Default cap on candidates evaluated by one search.
pub const DEFAULT_SEARCH_CAP: u64 = 2_000_000;

/// A β value at or below this counts as zero in the theorem checks.
pub const THEOREM_TOL: f64 = 1e-9;

/// Which transformation follows the linear shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `D_b`.
    Linear,
    /// `E_b = W(D_b)`.
    Williams,
}

impl Family {
    pub fn build(self, gen: &GeneratorSet, b: &PermutationVector) -> Result<Design> {
        let d = linear_permute(gen, b)?;
        Ok(match self {
            Family::Linear => d,
            Family::Williams => williams(&d),
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Linear => "linear",
            Family::Williams => "williams",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Family::Linear),
            "williams" => Ok(Family::Williams),
            other => Err(Error::Unsupported(format!(
                "family `{other}`; expected `linear` or `williams`"
            ))),
        }
    }
}

/// `W^-1((q-1)/2)`: `(q-1)/4` when q = 1 mod 4, `(3q-1)/4` otherwise.
pub fn gamma(q: PrimeLevel) -> u32 {
    let q = q.get();
    if q % 4 == 1 {
        (q - 1) / 4
    } else {
        (3 * q - 1) / 4
    }
}

fn shift_by_row_sums(gen: &GeneratorSet, factor: u32) -> PermutationVector {
    let q = gen.q();
    gen.coefs()
        .iter()
        .map(|row| {
            let s = row.iter().fold(0u32, |a, &c| q.add(a, c));
            q.mul(q.sub(1, s), factor)
        })
        .collect::<Vec<_>>()
        .into()
}

/// `b*_i = (1 - sum_j c_ij) gamma mod q`.
pub fn b_star(gen: &GeneratorSet) -> PermutationVector {
    shift_by_row_sums(gen, gamma(gen.q()))
}

/// `b~_i = (1 - sum_j c_ij) (q-1)/2 mod q`.
pub fn b_tilde(gen: &GeneratorSet) -> PermutationVector {
    shift_by_row_sums(gen, (gen.q().get() - 1) / 2)
}

/// A minimizer other than the reported winner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tie {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub generators: Option<Vec<Vec<u32>>>,
    pub b: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub q: u32,
    pub n: usize,
    pub family: Family,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub generators: Option<Vec<Vec<u32>>>,
    pub b: Vec<u32>,
    pub beta: Vec<f64>,
    /// Every minimizer within tolerance, winner included, in canonical order.
    pub ties: Vec<Tie>,
    pub evaluations: u64,
    /// Last k at which the candidate set shrank.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub deciding_k: Option<usize>,
}

impl SearchReport {
    pub fn pattern(&self) -> Result<BetaPattern> {
        BetaPattern::new(PrimeLevel::new(self.q as i64)?, self.n, self.beta.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Outcome of a staged minimization over candidates `0..count`.
struct Selection {
    survivors: Vec<usize>,
    deciding_k: Option<usize>,
    winner: BetaPattern,
}

/// Keeps, for k = 1, 2, ..., only the candidates whose β_k is within
/// tolerance of the smallest; survivors are the pattern minimizers and the
/// first one is the canonical winner.
fn staged_select<F>(
    count: usize,
    build: F,
    basis: &OrthonormalBasis,
    k_max: usize,
) -> Result<Selection>
where
    F: Fn(usize) -> Result<Design> + Sync,
{
    if count == 0 {
        return Err(Error::Shape("no candidates to search".into()));
    }
    let mut survivors: Vec<usize> = (0..count).collect();
    // full patterns of survivors, filled once the direct sums get expensive
    let mut full: Vec<Option<Vec<f64>>> = vec![None; count];
    let mut deciding_k = None;
    for k in 1..=k_max {
        if survivors.len() == 1 {
            break;
        }
        let values: Vec<(f64, Option<Vec<f64>>)> = survivors
            .par_iter()
            .map(|&c| {
                if let Some(p) = &full[c] {
                    return Ok((p[k - 1], None));
                }
                let d = build(c)?;
                if prefer_full(&d, k) {
                    let p = full_pattern(&d, basis);
                    Ok((p[k - 1], Some(p)))
                } else {
                    Ok((BetaEvaluator::new(&d, basis)?.beta(k)?, None))
                }
            })
            .collect::<Result<_>>()?;
        let values: Vec<f64> = survivors
            .iter()
            .zip(values)
            .map(|(&c, (v, p))| {
                if p.is_some() {
                    full[c] = p;
                }
                v
            })
            .collect();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let before = survivors.len();
        survivors = survivors
            .into_iter()
            .zip(&values)
            .filter(|(_, &v)| compare_values(v, min, COMPARE_TOL).is_eq())
            .map(|(c, _)| c)
            .collect();
        if survivors.len() < before {
            deciding_k = Some(k);
        }
    }
    let winner = beta_pattern_with(&build(survivors[0])?, basis, Some(k_max))?;
    Ok(Selection {
        survivors,
        deciding_k,
        winner,
    })
}

fn resolve_k_max(q: PrimeLevel, n: usize, k_max: Option<usize>) -> Result<usize> {
    let full = n * (q.as_usize() - 1);
    match k_max {
        None => Ok(full),
        Some(k) if (1..=full).contains(&k) => Ok(k),
        Some(k) => Err(Error::OutOfRange {
            what: "k_max",
            value: k as i64,
            lo: 1,
            hi: full as i64,
        }),
    }
}

fn all_shifts(q: PrimeLevel, m: usize, cap: u64) -> Result<Vec<PermutationVector>> {
    let size = (q.get() as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if size > cap as u128 {
        return Err(Error::SearchCap { size, cap });
    }
    Ok(enumerate_tuples(q, m).map(PermutationVector::from).collect())
}

/// Evaluates every `b` in Z_q^m and reports the minimizers of the pattern
/// `(β_1, ..., β_kmax)` of `D_b` or `E_b`.
pub fn best_b(
    gen: &GeneratorSet,
    family: Family,
    k_max: Option<usize>,
    cap: u64,
) -> Result<SearchReport> {
    let q = gen.q();
    let k_max = resolve_k_max(q, gen.n(), k_max)?;
    let shifts = all_shifts(q, gen.m(), cap)?;
    let basis = orthonormal_basis(q);
    let sel = staged_select(shifts.len(), |i| family.build(gen, &shifts[i]), &basis, k_max)?;
    Ok(SearchReport {
        q: q.get(),
        n: gen.n(),
        family,
        generators: Some(gen.coefs().to_vec()),
        b: shifts[sel.survivors[0]].as_slice().to_vec(),
        beta: sel.winner.into_values(),
        ties: sel
            .survivors
            .iter()
            .map(|&i| Tie {
                generators: None,
                b: shifts[i].as_slice().to_vec(),
            })
            .collect(),
        evaluations: shifts.len() as u64,
        deciding_k: sel.deciding_k,
    })
}

/// Every `b` for which `β_3` of the family member is at most `THEOREM_TOL`.
pub fn zero_beta3_shifts(
    gen: &GeneratorSet,
    family: Family,
    cap: u64,
) -> Result<Vec<PermutationVector>> {
    let q = gen.q();
    resolve_k_max(q, gen.n(), Some(3))?;
    let basis = orthonormal_basis(q);
    let shifts = all_shifts(q, gen.m(), cap)?;
    let flags: Vec<bool> = shifts
        .par_iter()
        .map(|b| {
            let d = family.build(gen, b)?;
            Ok(BetaEvaluator::new(&d, &basis)?.beta(3)? <= THEOREM_TOL)
        })
        .collect::<Result<_>>()?;
    Ok(shifts
        .into_iter()
        .zip(flags)
        .filter_map(|(b, z)| z.then_some(b))
        .collect())
}

/// Candidate dependent columns `(c1, c2)`, `c1` in `1..=(q-1)/2`, `c2` in
/// `1..q`, ordered by `c1` then `c2`.
pub fn q2_pool(q: PrimeLevel) -> Vec<[u32; 2]> {
    let q = q.get();
    (1..=(q - 1) / 2)
        .flat_map(|c1| (1..q).map(move |c2| [c1, c2]))
        .collect()
}

fn pool_proportional(a: [u32; 2], b: [u32; 2], q: PrimeLevel) -> bool {
    q.mul(a[0], b[1]) == q.mul(a[1], b[0])
}

fn check_q2_n(q: PrimeLevel, n: usize) -> Result<()> {
    let hi = q.as_usize() + 1;
    if !(3..=hi).contains(&n) {
        return Err(Error::OutOfRange {
            what: "n",
            value: n as i64,
            lo: 3,
            hi: hi as i64,
        });
    }
    Ok(())
}

/// `C(q-1, n-2) ((q-1)/2)^(n-2)`.
pub fn q2_generator_count(q: PrimeLevel, n: usize) -> Result<u128> {
    check_q2_n(q, n)?;
    let r = n as u128 - 2;
    let d = q.get() as u128 - 1;
    let mut binom = 1u128;
    for i in 0..r {
        binom = binom * (d - i) / (i + 1);
    }
    Ok(binom * (d / 2).pow(r as u32))
}

/// Every q^2-run generator set with `n - 2` dependent columns drawn from
/// `q2_pool`, pairwise non-proportional, listed in pool order.
pub fn enumerate_q2_generators(q: PrimeLevel, n: usize) -> Result<Vec<GeneratorSet>> {
    enumerate_q2_generators_capped(q, n, DEFAULT_SEARCH_CAP)
}

pub fn enumerate_q2_generators_capped(
    q: PrimeLevel,
    n: usize,
    cap: u64,
) -> Result<Vec<GeneratorSet>> {
    let size = q2_generator_count(q, n)?;
    if size > cap as u128 {
        return Err(Error::SearchCap { size, cap });
    }
    let pool = q2_pool(q);
    let mut out = Vec::with_capacity(size as usize);
    let mut chosen = Vec::with_capacity(n - 2);
    collect_sets(q, &pool, n - 2, 0, &mut chosen, &mut out);
    debug_assert_eq!(out.len() as u128, size);
    Ok(out)
}

fn collect_sets(
    q: PrimeLevel,
    pool: &[[u32; 2]],
    r: usize,
    from: usize,
    chosen: &mut Vec<[u32; 2]>,
    out: &mut Vec<GeneratorSet>,
) {
    if chosen.len() == r {
        let coefs = chosen.iter().map(|c| c.to_vec()).collect();
        out.push(GeneratorSet::from_reduced(q, coefs).expect("pool vectors are valid generators"));
        return;
    }
    for i in from..pool.len() {
        if chosen.iter().all(|&c| !pool_proportional(c, pool[i], q)) {
            chosen.push(pool[i]);
            collect_sets(q, pool, r, i + 1, chosen, out);
            chosen.pop();
        }
    }
}

/// `x1, x2, x1+x2, x1+2x2, ...`, the first n columns.
pub fn standard_q2_generators(q: PrimeLevel, n: usize) -> Result<GeneratorSet> {
    check_q2_n(q, n)?;
    let coefs = (1..=n as i64 - 2).map(|c| vec![1, c]).collect();
    GeneratorSet::new(q, coefs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardDesign {
    pub generators: Vec<Vec<u32>>,
    pub beta: Vec<f64>,
}

/// The standard design next to the best `D_b~` and `E_b*` over the generator
/// space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Q2Report {
    pub q: u32,
    pub n: usize,
    pub standard: StandardDesign,
    pub linear: SearchReport,
    pub williams: SearchReport,
}

pub fn search_q2(q: PrimeLevel, n: usize, k_max: Option<usize>, cap: u64) -> Result<Q2Report> {
    let k_max = resolve_k_max(q, n, k_max)?;
    let gens = enumerate_q2_generators_capped(q, n, cap)?;
    let basis = orthonormal_basis(q);
    let std_gen = standard_q2_generators(q, n)?;
    let std_pattern =
        beta_pattern_with(&linear_permute(&std_gen, &PermutationVector::zeros(n - 2))?, &basis, Some(k_max))?;
    let family_report = |family: Family| -> Result<SearchReport> {
        let shift = |g: &GeneratorSet| match family {
            Family::Linear => b_tilde(g),
            Family::Williams => b_star(g),
        };
        let sel = staged_select(
            gens.len(),
            |i| family.build(&gens[i], &shift(&gens[i])),
            &basis,
            k_max,
        )?;
        let win = &gens[sel.survivors[0]];
        Ok(SearchReport {
            q: q.get(),
            n,
            family,
            generators: Some(win.coefs().to_vec()),
            b: shift(win).as_slice().to_vec(),
            beta: sel.winner.into_values(),
            ties: sel
                .survivors
                .iter()
                .map(|&i| Tie {
                    generators: Some(gens[i].coefs().to_vec()),
                    b: shift(&gens[i]).as_slice().to_vec(),
                })
                .collect(),
            evaluations: gens.len() as u64,
            deciding_k: sel.deciding_k,
        })
    };
    Ok(Q2Report {
        q: q.get(),
        n,
        standard: StandardDesign {
            generators: std_gen.coefs().to_vec(),
            beta: std_pattern.into_values(),
        },
        linear: family_report(Family::Linear)?,
        williams: family_report(Family::Williams)?,
    })
}

/// The q^2-run design holding `x1`, `x2` and every pool column, each shifted
/// by its own `b*` and then Williams-transformed. Every enumerated `E_b*` is a
/// column projection of it.
pub fn universal_williams_design(q: PrimeLevel) -> Result<Design> {
    let pool = q2_pool(q);
    let coefs: Vec<Vec<u32>> = pool.iter().map(|c| c.to_vec()).collect();
    let shifts: Vec<u32> = coefs
        .iter()
        .map(|row| {
            let s = q.add(row[0], row[1]);
            q.mul(q.sub(1, s), gamma(q))
        })
        .collect();
    let width = 2 + pool.len();
    let mut cells = Vec::with_capacity(q.as_usize().pow(2) * width);
    for x in enumerate_tuples(q, 2) {
        cells.extend_from_slice(&x);
        for (c, s) in pool.iter().zip(&shifts) {
            let v = (c[0] * x[0] + c[1] * x[1] + s) % q.get();
            cells.push(v);
        }
    }
    let d = Design::from_cells(q, q.as_usize().pow(2), width, cells)?;
    Ok(williams(&d))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub q: u32,
    /// Generator sets checked one by one, per n.
    pub direct: Vec<(usize, u64)>,
    /// Column triples of the universal design checked (β_3 route) or 0.
    pub triples: u64,
    pub holds: bool,
    /// First counterexample found, if any.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counterexample: Option<Vec<Vec<u32>>>,
}

/// `β_3(E_b*) = 0` for every enumerated generator set.
///
/// For strength-2 designs β_3 is a sum of nonnegative terms, one per column
/// triple, and each term depends only on those three shifted columns; all
/// enumerated `E_b*` are projections of `universal_williams_design`, so
/// checking every non-proportional triple there covers every n at once.
/// Generator sets for n up to `n_direct` are also checked one by one.
pub fn verify_beta3_vanishes(q: PrimeLevel, n_direct: usize, cap: u64) -> Result<TheoremCheck> {
    let basis = orthonormal_basis(q);
    let mut check = TheoremCheck {
        q: q.get(),
        direct: Vec::new(),
        triples: 0,
        holds: true,
        counterexample: None,
    };
    for n in 3..=n_direct.min(q.as_usize() + 1) {
        let gens = enumerate_q2_generators_capped(q, n, cap)?;
        let bad = gens
            .par_iter()
            .map(|g| {
                let d = williams(&linear_permute(g, &b_star(g))?);
                Ok((BetaEvaluator::new(&d, &basis)?.beta(3)? > THEOREM_TOL).then(|| g.coefs().to_vec()))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .next();
        check.direct.push((n, gens.len() as u64));
        if let Some(c) = bad {
            check.holds = false;
            check.counterexample.get_or_insert(c);
        }
    }

    let u = universal_williams_design(q)?;
    let mut vectors = vec![[1u32, 0], [0, 1]];
    vectors.extend(q2_pool(q));
    let width = vectors.len();
    let p1 = basis.row(1);
    let cols: Vec<Vec<f64>> = (0..width)
        .map(|j| u.column(j).map(|x| p1[x as usize]).collect())
        .collect();
    let runs = u.runs() as f64;
    let triples: Vec<(usize, usize, usize)> = (0..width)
        .flat_map(|a| (a + 1..width).flat_map(move |b| (b + 1..width).map(move |c| (a, b, c))))
        .filter(|&(a, b, c)| {
            !pool_proportional(vectors[a], vectors[b], q)
                && !pool_proportional(vectors[a], vectors[c], q)
                && !pool_proportional(vectors[b], vectors[c], q)
        })
        .collect();
    let bad = triples
        .par_iter()
        .find_first(|&&(a, b, c)| {
            let s: f64 = (0..u.runs())
                .map(|i| cols[a][i] * cols[b][i] * cols[c][i])
                .sum();
            (s / runs).powi(2) > THEOREM_TOL
        });
    check.triples = triples.len() as u64;
    if let Some(&(a, b, c)) = bad {
        check.holds = false;
        check
            .counterexample
            .get_or_insert_with(|| [a, b, c].iter().map(|&i| vectors[i].to_vec()).collect());
    }
    Ok(check)
}

/// Mirror symmetry of `E_b*`, with every odd-k β vanishing, for each
/// enumerated generator set. Checked through the universal design
/// (projections of a mirror-symmetric design are mirror symmetric) and
/// directly for n up to `n_direct`.
pub fn verify_mirror_symmetry(q: PrimeLevel, n_direct: usize, cap: u64) -> Result<TheoremCheck> {
    let mut check = TheoremCheck {
        q: q.get(),
        direct: Vec::new(),
        triples: 0,
        holds: true,
        counterexample: None,
    };
    for n in 3..=n_direct.min(q.as_usize() + 1) {
        let gens = enumerate_q2_generators_capped(q, n, cap)?;
        let bad = gens
            .par_iter()
            .map(|g| {
                let e = williams(&linear_permute(g, &b_star(g))?);
                let ok = is_mirror_symmetric(&e) && odd_sum_vanishes(&e);
                Ok((!ok).then(|| g.coefs().to_vec()))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .next();
        check.direct.push((n, gens.len() as u64));
        if let Some(c) = bad {
            check.holds = false;
            check.counterexample.get_or_insert(c);
        }
    }
    let u = universal_williams_design(q)?;
    if !is_mirror_symmetric(&u) || !odd_sum_vanishes(&u) {
        check.holds = false;
    }
    Ok(check)
}

fn odd_sum_vanishes(design: &Design) -> bool {
    let (total, odd) = beta_sums(design);
    odd <= THEOREM_TOL * total.max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessCheck {
    pub q: u32,
    /// Type-II generator sets examined.
    pub checked: u64,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counterexample: Option<Vec<Vec<u32>>>,
}

/// For every type-II recursive q^2-run generator set with at most `m_max`
/// dependent columns, `b*` is the only shift giving `β_3(E_b) = 0`.
pub fn verify_unique_zero_beta3(q: PrimeLevel, m_max: usize, cap: u64) -> Result<UniquenessCheck> {
    let mut check = UniquenessCheck {
        q: q.get(),
        checked: 0,
        holds: true,
        counterexample: None,
    };
    for n in 3..=(m_max + 2).min(q.as_usize() + 1) {
        let gens: Vec<GeneratorSet> = enumerate_q2_generators_capped(q, n, cap)?
            .into_iter()
            .filter(|g| crate::recursion::satisfies(g, crate::recursion::Regime::II))
            .collect();
        check.checked += gens.len() as u64;
        for g in gens {
            let zeros = zero_beta3_shifts(&g, Family::Williams, cap)?;
            if zeros != [b_star(&g)] {
                check.holds = false;
                check.counterexample.get_or_insert_with(|| g.coefs().to_vec());
            }
        }
    }
    Ok(check)
}

/// Checks `W^-1(q-1-x) = 2 gamma - W^-1(x)` for every level.
pub fn gamma_reflection_identity(q: PrimeLevel) -> bool {
    let g = gamma(q);
    (0..q.get()).all(|x| {
        let lhs = williams_inverse(q.get() - 1 - x, q).expect("level in range");
        let rhs = q.sub(q.mul(2, g), williams_inverse(x, q).expect("level in range"));
        lhs == rhs
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::williams_value;
    use crate::field::check_odd_prime;

    fn q(n: i64) -> PrimeLevel {
        check_odd_prime(n).unwrap()
    }

    fn gen(qv: i64, c: &[&[i64]]) -> GeneratorSet {
        GeneratorSet::new(q(qv), c.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma(q(7)), 5);
        assert_eq!(gamma(q(5)), 1);
        assert_eq!(gamma(q(13)), 3);
        for qv in [3, 5, 7, 11, 13, 17, 19, 23, 29] {
            let p = q(qv);
            assert_eq!(williams_value(gamma(p), p).unwrap(), (p.get() - 1) / 2);
            assert!(gamma_reflection_identity(p));
        }
    }

    #[test]
    fn closed_form_shifts() {
        assert_eq!(b_star(&gen(7, &[&[2, 2]])).as_slice(), &[6]);
        let g = gen(7, &[&[1, 1], &[1, 2], &[1, 4], &[1, 5], &[2, 5], &[2, 6]]);
        assert_eq!(b_star(&g).as_slice(), &[2, 4, 1, 3, 5, 0]);
        assert_eq!(b_star(&gen(17, &[&[2, 4]])).as_slice(), &[14]);
        assert_eq!(b_tilde(&gen(7, &[&[2, 2]])).as_slice(), &[5]);
        assert_eq!(b_tilde(&gen(5, &[&[1, 1]])).as_slice(), &[3]);
        assert_eq!(b_tilde(&gen(7, &[&[3, 5], &[2, 6]])).as_slice(), &[0, 0]);
    }

    #[test]
    fn best_b_examples() {
        let r = best_b(&gen(5, &[&[1, 1]]), Family::Williams, None, DEFAULT_SEARCH_CAP).unwrap();
        assert_eq!(r.b, vec![4]);
        assert!(r.beta[2] < 1e-9);
        assert!((r.beta[3] - 0.027).abs() < 5e-4);
        assert_eq!(r.evaluations, 5);
        assert_eq!(r.ties.len(), 1);

        let g = gen(7, &[&[2, 2]]);
        let zeros = zero_beta3_shifts(&g, Family::Williams, DEFAULT_SEARCH_CAP).unwrap();
        assert_eq!(zeros, vec![PermutationVector::new(q(7), [6])]);
        let zl: Vec<u32> = zero_beta3_shifts(&g, Family::Linear, DEFAULT_SEARCH_CAP)
            .unwrap()
            .iter()
            .map(|b| b.as_slice()[0])
            .collect();
        assert_eq!(zl, vec![0, 3, 5]);
        let r = best_b(&g, Family::Linear, None, DEFAULT_SEARCH_CAP).unwrap();
        let tied: Vec<u32> = r.ties.iter().map(|t| t.b[0]).collect();
        assert_eq!(tied, vec![0, 3]);
        assert_eq!(r.b, vec![0]);
        assert!((r.beta[3] - 0.0417).abs() < 5e-5);
        assert_eq!(r.deciding_k, Some(4));
    }

    #[test]
    fn search_cap_is_enforced() {
        let g = gen(7, &[&[1, 1], &[1, 2], &[1, 3]]);
        assert!(matches!(
            best_b(&g, Family::Williams, Some(3), 100),
            Err(Error::SearchCap { .. })
        ));
    }

    #[test]
    fn q2_enumeration_sizes() {
        assert_eq!(enumerate_q2_generators(q(5), 3).unwrap().len(), 8);
        assert_eq!(enumerate_q2_generators(q(7), 8).unwrap().len(), 729);
        assert!(enumerate_q2_generators(q(5), 7).is_err());
        assert!(enumerate_q2_generators(q(5), 2).is_err());
        for qv in [5, 7] {
            let p = q(qv);
            let mut total = 0u128;
            for n in 3..=qv as usize + 1 {
                let got = enumerate_q2_generators(p, n).unwrap();
                assert_eq!(got.len() as u128, q2_generator_count(p, n).unwrap());
                let mut sorted = got.clone();
                sorted.sort();
                sorted.dedup();
                assert_eq!(sorted.len(), got.len());
                total += got.len() as u128;
            }
            // plus the empty choice
            assert_eq!(total + 1, ((qv as u128 + 1) / 2).pow(qv as u32 - 1));
        }
        assert_eq!(q2_generator_count(q(11), 8).unwrap(), 210 * 15625);
    }

    #[test]
    fn q2_search_five_levels_three_factors() {
        let r = search_q2(q(5), 3, None, DEFAULT_SEARCH_CAP).unwrap();
        assert!((r.standard.beta[2] - 0.125).abs() < 5e-4);
        assert!((r.standard.beta[3] - 0.525).abs() < 5e-4);
        assert_eq!(r.linear.generators, Some(vec![vec![1, 2]]));
        assert!(r.linear.beta[2] < 1e-9);
        assert!((r.linear.beta[3] - 0.271).abs() < 5e-4);
        assert_eq!(r.williams.generators, Some(vec![vec![1, 1]]));
        assert!((r.williams.beta[3] - 0.027).abs() < 5e-4);
        let json = serde_json::to_value(&r.williams).unwrap();
        for key in ["q", "n", "family", "generators", "b", "beta", "ties", "evaluations"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert_eq!(json["family"], "williams");
    }

    #[test]
    fn search_is_deterministic_across_pools() {
        let a = search_q2(q(7), 4, Some(6), DEFAULT_SEARCH_CAP).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool
            .install(|| search_q2(q(7), 4, Some(6), DEFAULT_SEARCH_CAP))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn universal_checks_small_levels() {
        for qv in [5, 7, 11] {
            let t = verify_beta3_vanishes(q(qv), (qv as usize + 1).min(5), DEFAULT_SEARCH_CAP).unwrap();
            assert!(t.holds, "{t:?}");
            let m = verify_mirror_symmetry(q(qv), (qv as usize + 1).min(5), DEFAULT_SEARCH_CAP).unwrap();
            assert!(m.holds, "{m:?}");
        }
    }

    #[test]
    fn unique_zero_for_type_two() {
        let c = verify_unique_zero_beta3(q(5), 2, DEFAULT_SEARCH_CAP).unwrap();
        assert!(c.holds);
        assert_eq!(c.checked, 8 + 24);
    }

    #[test]
    fn seventeen_level_counterexample() {
        let zeros = zero_beta3_shifts(&gen(17, &[&[2, 4]]), Family::Williams, DEFAULT_SEARCH_CAP)
            .unwrap();
        let bs: Vec<u32> = zeros.iter().map(|b| b.as_slice()[0]).collect();
        assert!(bs.contains(&14) && bs.contains(&4), "{bs:?}");
    }

    #[test]
    fn standard_generators() {
        let g = standard_q2_generators(q(7), 5).unwrap();
        assert_eq!(g.coefs(), &[vec![1, 1], vec![1, 2], vec![1, 3]]);
    }
}
