//! Running minima of partial sums and the symmetric-group identities built on
//! them: the generalized Hunt–Dyson formula and the composition form of the
//! Bohnenblust–Spitzer theorem.
//!
//! Sign convention used throughout: `neg(x) = min(0, x)` and `pos(x) = max(0, x)`.
//! A running minimum `M_m(v) = min(0, v1, v1+v2, ...)` is therefore `<= 0`, and
//! every right-hand side is written with `neg` directly (no double negation).

use std::ops::{AddAssign, Mul, Sub};

use crate::error::{LabError, Result};

/// Largest vector length accepted by the permutation sums (9! = 362880).
pub const DEFAULT_MAX_LEN: usize = 9;

#[inline]
pub fn neg(x: f64) -> f64 {
    x.min(0.0)
}

#[inline]
pub fn pos(x: f64) -> f64 {
    x.max(0.0)
}

/// An ordered tuple `(κ1, ..., κm)` of reals, `m >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntVector {
    values: Vec<f64>,
}

impl IntVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(LabError::InvalidArgument("empty vector".into()));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(LabError::InvalidArgument("non-finite entry".into()));
        }
        Ok(Self { values })
    }

    pub fn from_ints(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| x as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// An ordered list of positive parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composition {
    parts: Vec<usize>,
}

impl Composition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(LabError::InvalidArgument(
                "composition parts must be positive".into(),
            ));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }
}

/// Enumeration limits for the symmetric-group sums.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationBudget {
    pub max_len: usize,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self { max_len: DEFAULT_MAX_LEN }
    }
}

impl EnumerationBudget {
    fn check(&self, m: usize) -> Result<()> {
        if m > self.max_len {
            return Err(LabError::Budget {
                what: "permutation length",
                size: m,
                cap: self.max_len,
            });
        }
        Ok(())
    }
}

/// Which running extremum the identities use. `Max` is the mirrored
/// statement: maxima of partial sums with positive parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

impl Extremum {
    #[inline]
    fn clip(self, x: f64) -> f64 {
        match self {
            Extremum::Min => neg(x),
            Extremum::Max => pos(x),
        }
    }

    #[inline]
    fn running(self, v: &[f64]) -> f64 {
        match self {
            Extremum::Min => min_partial_sum(v),
            Extremum::Max => max_partial_sum(v),
        }
    }
}

/// `min(0, v1, v1+v2, ..., v1+...+vm)`; zero for the empty slice.
pub fn min_partial_sum(v: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut m: f64 = 0.0;
    for &x in v {
        s += x;
        m = m.min(s);
    }
    m
}

/// `max(0, v1, v1+v2, ...)`.
pub fn max_partial_sum(v: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut m: f64 = 0.0;
    for &x in v {
        s += x;
        m = m.max(s);
    }
    m
}

/// Integer version of [`min_partial_sum`].
pub fn min_partial_sum_i(v: &[i64]) -> i64 {
    let mut s = 0;
    let mut m = 0;
    for &x in v {
        s += x;
        m = m.min(s);
    }
    m
}

/// Consecutive block sums of `v` permuted by `perm` (0-based indices:
/// entry `i` of the permuted vector is `v[perm[i]]`), split per `c`.
pub fn block_sums(v: &IntVector, c: &Composition, perm: &[usize]) -> Result<Vec<f64>> {
    let m = v.len();
    if c.total() != m {
        return Err(LabError::LengthMismatch { expected: m, got: c.total() });
    }
    if perm.len() != m {
        return Err(LabError::LengthMismatch { expected: m, got: perm.len() });
    }
    let mut seen = vec![false; m];
    for &p in perm {
        if p >= m || seen[p] {
            return Err(LabError::InvalidArgument("perm is not a bijection".into()));
        }
        seen[p] = true;
    }
    let permuted: Vec<f64> = perm.iter().map(|&p| v.values[p]).collect();
    Ok(split_sums(&permuted, c.parts()))
}

fn split_sums(v: &[f64], parts: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(parts.len());
    let mut start = 0;
    for &k in parts {
        out.push(v[start..start + k].iter().sum());
        start += k;
    }
    out
}

/// Visits every composition of `total` into exactly `parts` positive parts,
/// in lexicographic order.
pub fn for_each_composition<F: FnMut(&[usize])>(total: usize, parts: usize, mut f: F) {
    if parts == 0 {
        if total == 0 {
            f(&[]);
        }
        return;
    }
    if total < parts {
        return;
    }
    let mut buf = vec![0usize; parts];
    fn rec<F: FnMut(&[usize])>(buf: &mut [usize], idx: usize, rest: usize, f: &mut F) {
        let left = buf.len() - idx;
        if left == 1 {
            buf[idx] = rest;
            f(buf);
            return;
        }
        for k in 1..=rest - (left - 1) {
            buf[idx] = k;
            rec(buf, idx + 1, rest - k, f);
        }
    }
    rec(&mut buf, 0, total, &mut f);
}

/// All compositions of `total` into `parts` parts, lexicographically ordered.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_composition(total, parts, |c| out.push(c.to_vec()));
    out
}

/// Visits all permutations of `v` (Heap's algorithm). The callback sees the
/// permuted values.
pub fn for_each_permutation<F: FnMut(&[f64])>(v: &[f64], mut f: F) {
    let mut a = v.to_vec();
    let n = a.len();
    let mut c = vec![0usize; n];
    f(&a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn multinomial(n: usize, parts: &[usize]) -> f64 {
    let mut r = factorial(n);
    for &l in parts {
        r /= factorial(l);
    }
    r
}

/// `Σ_τ [M_m(v_τ)^n − M_{m−1}(v_τ)^n]` by exhaustive enumeration.
pub fn ghd_lhs(v: &IntVector, n: u32, budget: EnumerationBudget) -> Result<f64> {
    ghd_lhs_with(Extremum::Min, v, n, budget)
}

/// Right-hand side of the generalized Hunt–Dyson formula:
/// `Σ_τ Σ_j (1/j!) Σ_k Σ_l multinomial(n; l) Π neg(block_i)^{l_i} / k_i`.
pub fn ghd_rhs(v: &IntVector, n: u32, budget: EnumerationBudget) -> Result<f64> {
    ghd_rhs_with(Extremum::Min, v, n, budget)
}

pub fn ghd_lhs_with(ext: Extremum, v: &IntVector, n: u32, budget: EnumerationBudget) -> Result<f64> {
    check_power(n)?;
    let m = v.len();
    budget.check(m)?;
    let mut total = 0.0;
    for_each_permutation(v.values(), |p| {
        let a = ext.running(p);
        let b = ext.running(&p[..m - 1]);
        total += a.powi(n as i32) - b.powi(n as i32);
    });
    Ok(total)
}

pub fn ghd_rhs_with(ext: Extremum, v: &IntVector, n: u32, budget: EnumerationBudget) -> Result<f64> {
    check_power(n)?;
    let m = v.len();
    budget.check(m)?;
    let n = n as usize;
    // (1/j!, compositions of m, compositions of n with multinomials)
    let mut levels = Vec::new();
    for j in 1..=m.min(n) {
        let ks = compositions(m, j);
        let ls: Vec<(Vec<usize>, f64)> = compositions(n, j)
            .into_iter()
            .map(|l| {
                let w = multinomial(n, &l);
                (l, w)
            })
            .collect();
        levels.push((1.0 / factorial(j), ks, ls));
    }
    let mut total = 0.0;
    let mut clipped = Vec::with_capacity(m);
    for_each_permutation(v.values(), |p| {
        for (inv_jf, ks, ls) in &levels {
            let mut sj = 0.0;
            for k in ks {
                clipped.clear();
                let mut start = 0;
                let mut denom = 1.0;
                for &part in k {
                    clipped.push(ext.clip(p[start..start + part].iter().sum()));
                    start += part;
                    denom *= part as f64;
                }
                let mut sl = 0.0;
                for (l, w) in ls {
                    let mut prod = *w;
                    for (c, &li) in clipped.iter().zip(l) {
                        prod *= c.powi(li as i32);
                    }
                    sl += prod;
                }
                sj += sl / denom;
            }
            total += inv_jf * sj;
        }
    });
    Ok(total)
}

fn check_power(n: u32) -> Result<()> {
    if n == 0 {
        return Err(LabError::InvalidArgument("power n must be >= 1".into()));
    }
    Ok(())
}

/// Classical Hunt–Dyson right-hand side `(m−1)!·neg(Σ v)`.
///
/// This is the signed value, so it coincides with `ghd_rhs(v, 1)`.
pub fn hd_classic_rhs(v: &IntVector) -> f64 {
    factorial(v.len() - 1) * neg(v.values().iter().sum())
}

/// Hunt–Dyson left-hand side summed over cyclic rotations only; equals
/// `neg(Σ v)`, i.e. the classical right-hand side divided by `(m−1)!`.
pub fn hd_cyclic_lhs(v: &IntVector) -> f64 {
    let m = v.len();
    let mut rotated = v.values().to_vec();
    let mut total = 0.0;
    for _ in 0..m {
        total += min_partial_sum(&rotated) - min_partial_sum(&rotated[..m - 1]);
        rotated.rotate_left(1);
    }
    total
}

/// Both sides of the composition form of the Bohnenblust–Spitzer theorem:
/// `Σ_τ f(M_m(v_τ))` and
/// `Σ_τ Σ_j (1/j!) Σ_{k1+...+kj=m} f(Σ_i neg(block_i)) / (k1···kj)`.
pub fn cf_bst_both_sides<T, F>(v: &IntVector, f: F, budget: EnumerationBudget) -> Result<(T, T)>
where
    T: Copy + Default + AddAssign + Sub<Output = T> + Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    cf_bst_both_sides_with(Extremum::Min, v, f, budget)
}

pub fn cf_bst_both_sides_with<T, F>(
    ext: Extremum,
    v: &IntVector,
    f: F,
    budget: EnumerationBudget,
) -> Result<(T, T)>
where
    T: Copy + Default + AddAssign + Sub<Output = T> + Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    let m = v.len();
    budget.check(m)?;
    let mut levels = Vec::new();
    for j in 1..=m {
        let ks: Vec<(Vec<usize>, f64)> = compositions(m, j)
            .into_iter()
            .map(|k| {
                let d: f64 = k.iter().map(|&x| x as f64).product();
                (k, 1.0 / (d * factorial(j)))
            })
            .collect();
        levels.push(ks);
    }
    let mut lhs = Kahan::default();
    let mut rhs = Kahan::default();
    for_each_permutation(v.values(), |p| {
        lhs.add(f(ext.running(p)));
        for ks in &levels {
            for (k, w) in ks {
                let mut start = 0;
                let mut arg = 0.0;
                for &part in k {
                    arg += ext.clip(p[start..start + part].iter().sum());
                    start += part;
                }
                rhs.add(f(arg) * *w);
            }
        }
    });
    Ok((lhs.sum, rhs.sum))
}

/// Compensated running sum.
#[derive(Default)]
struct Kahan<T> {
    sum: T,
    carry: T,
}

impl<T: Copy + AddAssign + Sub<Output = T>> Kahan<T> {
    fn add(&mut self, x: T) {
        let y = x - self.carry;
        let mut t = self.sum;
        t += y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}
