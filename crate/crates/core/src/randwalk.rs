//! Joint law of `(S_p, T_{p+q})` for a random walk with a finite step law,
//! where `T_r = max(0, S_1, ..., S_r)`.
//!
//! [`enumerate_lhs`] sums over all paths; [`formula_rhs_coeff`] evaluates the
//! coefficient of `a^p b^q` in the block-decomposition formula, which
//! replaces the path by independent blocks with harmonic weights and reads
//! the maximum through Ω.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{compositions, factorial};
use crate::error::{LabError, Result};
use crate::omega::omega_rw;

type C = Complex64;

/// Default cap on enumerated paths or block tuples.
pub const DEFAULT_PATH_BUDGET: usize = 10_000_000;

/// A finitely supported step distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDist")]
pub struct StepDist {
    support: Vec<f64>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDist {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl TryFrom<RawDist> for StepDist {
    type Error = LabError;

    fn try_from(r: RawDist) -> Result<Self> {
        StepDist::new(r.support, r.probs)
    }
}

impl StepDist {
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(LabError::LengthMismatch { expected: support.len(), got: probs.len() });
        }
        if support.is_empty() {
            return Err(LabError::InvalidArgument("empty support".into()));
        }
        if support.iter().chain(&probs).any(|x| !x.is_finite()) {
            return Err(LabError::InvalidArgument("non-finite entry".into()));
        }
        if probs.iter().any(|&p| p < 0.0) {
            return Err(LabError::InvalidArgument("negative probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(LabError::InvalidArgument(format!("probabilities sum to {total}")));
        }
        Ok(Self { support, probs })
    }

    /// Fair `±1` steps.
    pub fn symmetric() -> Self {
        Self { support: vec![-1.0, 1.0], probs: vec![0.5, 0.5] }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `E e^{iθX}`.
    pub fn char_fn(&self, theta: f64) -> C {
        self.support.iter().zip(&self.probs).map(|(&x, &p)| C::from_polar(p, theta * x)).sum()
    }

    /// Law of the sum of `n` independent steps, with merged atoms.
    pub fn convolution_power(&self, n: usize) -> Vec<(f64, f64)> {
        let mut law = vec![(0.0, 1.0)];
        for _ in 0..n {
            let mut next = Vec::with_capacity(law.len() * self.support.len());
            for &(v, p) in &law {
                for (&x, &q) in self.support.iter().zip(&self.probs) {
                    if q > 0.0 {
                        next.push((v + x, p * q));
                    }
                }
            }
            law = merge_atoms(next);
        }
        law
    }
}

fn merge_atoms(mut atoms: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (v, p) in atoms {
        match out.last_mut() {
            Some(last) if (last.0 - v).abs() <= 1e-12 * (1.0 + v.abs()) => last.1 += p,
            _ => out.push((v, p)),
        }
    }
    out
}

/// `E e^{iαS_p + iβT_{p+q}}` with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkMoment {
    pub p: usize,
    pub q: usize,
    pub alpha: f64,
    pub beta: f64,
    pub value: C,
}

fn check_pq(p: usize, q: usize) -> Result<()> {
    if p == 0 || q == 0 {
        return Err(LabError::InvalidArgument("p and q must be positive".into()));
    }
    Ok(())
}

/// Exact `E e^{iαS_p + iβT_{p+q}}` by walking every path.
pub fn enumerate_lhs(dist: &StepDist, p: usize, q: usize, alpha: f64, beta: f64) -> Result<C> {
    enumerate_lhs_with(dist, p, q, alpha, beta, DEFAULT_PATH_BUDGET)
}

pub fn enumerate_lhs_with(dist: &StepDist, p: usize, q: usize, alpha: f64, beta: f64, budget: usize) -> Result<C> {
    check_pq(p, q)?;
    let paths = dist.support.len().checked_pow((p + q) as u32).unwrap_or(usize::MAX);
    if paths > budget {
        return Err(LabError::Budget { what: "random walk paths", size: paths, cap: budget });
    }
    let mut acc = C::new(0.0, 0.0);
    walk(dist, p, p + q, 0, 0.0, 0.0, 0.0, 1.0, alpha, beta, &mut acc);
    Ok(acc)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    dist: &StepDist,
    p: usize,
    len: usize,
    depth: usize,
    s: f64,
    s_p: f64,
    max: f64,
    prob: f64,
    alpha: f64,
    beta: f64,
    acc: &mut C,
) {
    if depth == len {
        *acc += C::from_polar(prob, alpha * s_p + beta * max);
        return;
    }
    for (&x, &w) in dist.support.iter().zip(&dist.probs) {
        if w == 0.0 {
            continue;
        }
        let s2 = s + x;
        let sp2 = if depth + 1 == p { s2 } else { s_p };
        walk(dist, p, len, depth + 1, s2, sp2, max.max(s2), prob * w, alpha, beta, acc);
    }
}

/// Coefficient of `a^p b^q` in the block formula:
///
/// ```text
/// Σ_{j<=p, k<=q} 1/(j!k!) Σ_{l ⊨ p into j} Σ_{m ⊨ q into k} 1/(Π l_i Π m_i)
///     E e^{iα ΣY + iβ Ω(Y, Z)}
/// ```
///
/// with independent blocks `Y_i ~ step^{*l_i}`, `Z_i ~ step^{*m_i}`.
pub fn formula_rhs_coeff(dist: &StepDist, p: usize, q: usize, alpha: f64, beta: f64, budget: usize) -> Result<C> {
    check_pq(p, q)?;
    let laws: Vec<Vec<(f64, f64)>> = (0..=p.max(q)).map(|n| dist.convolution_power(n)).collect();
    let mut total = C::new(0.0, 0.0);
    let mut visited = 0usize;
    for j in 1..=p {
        for k in 1..=q {
            let jk = factorial(j) * factorial(k);
            for ls in compositions(p, j) {
                for ms in compositions(q, k) {
                    let harmonic: f64 = ls.iter().chain(&ms).map(|&x| x as f64).product();
                    let blocks: Vec<&[(f64, f64)]> = ls.iter().chain(&ms).map(|&n| laws[n].as_slice()).collect();
                    let count = blocks.iter().try_fold(1usize, |a, b| a.checked_mul(b.len())).unwrap_or(usize::MAX);
                    visited = visited.saturating_add(count);
                    if visited > budget {
                        return Err(LabError::Budget { what: "block outcomes", size: visited, cap: budget });
                    }
                    let e = block_expectation(&blocks, j, alpha, beta)?;
                    total += e / (jk * harmonic);
                }
            }
        }
    }
    Ok(total)
}

/// `E e^{iαΣY + iβΩ(Y,Z)}` over the product of the block laws; the first
/// `j` blocks are the `Y`s.
fn block_expectation(blocks: &[&[(f64, f64)]], j: usize, alpha: f64, beta: f64) -> Result<C> {
    let n = blocks.len();
    let mut idx = vec![0usize; n];
    let mut vals = vec![0.0; n];
    let mut acc = C::new(0.0, 0.0);
    loop {
        let mut prob = 1.0;
        for (i, b) in blocks.iter().enumerate() {
            vals[i] = b[idx[i]].0;
            prob *= b[idx[i]].1;
        }
        let (y, z) = vals.split_at(j);
        let om = omega_rw(y, z)?;
        acc += C::from_polar(prob, alpha * y.iter().sum::<f64>() + beta * om);
        let mut i = 0;
        loop {
            if i == n {
                return Ok(acc);
            }
            idx[i] += 1;
            if idx[i] < blocks[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Both sides on a grid of frequencies.
pub fn compare_grid(dist: &StepDist, p: usize, q: usize, grid: &[(f64, f64)]) -> Result<Vec<(WalkMoment, C)>> {
    grid.iter()
        .map(|&(alpha, beta)| {
            let value = enumerate_lhs(dist, p, q, alpha, beta)?;
            let rhs = formula_rhs_coeff(dist, p, q, alpha, beta, DEFAULT_PATH_BUDGET)?;
            Ok((WalkMoment { p, q, alpha, beta, value }, rhs))
        })
        .collect()
}
