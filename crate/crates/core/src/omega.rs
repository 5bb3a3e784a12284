//! Piecewise-linear functionals of running minima.
//!
//! Convention: the displayed formulas write `-(x)_-` for `min(0, x)`; here that
//! is [`neg`](crate::combinatorics::neg) and `(x)_+` is `pos`. Every `Ω` below
//! is spelled out twice: once as the literal nested expression, once as the
//! running minimum of an assembled vector (`*_blocks`). The test suite demands
//! they agree, which is what pins the sign convention.

use crate::combinatorics::{max_partial_sum, min_partial_sum_i};
use crate::error::{LabError, Result};

#[inline]
fn neg(x: i64) -> i64 {
    x.min(0)
}

#[inline]
fn pos(x: i64) -> i64 {
    x.max(0)
}

fn sum_neg(v: &[i64]) -> i64 {
    v.iter().map(|&x| neg(x)).sum()
}

fn sum_pos(v: &[i64]) -> i64 {
    v.iter().map(|&x| pos(x)).sum()
}

/// `min(0, x, x + y)`.
pub fn m2(x: i64, y: i64) -> i64 {
    0.min(x).min(x + y)
}

/// Arguments `(κ1, κ2, μ, ν, ρ)`; which lists are used depends on the variant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OmegaArgs {
    pub kappa: (i64, i64),
    pub mu: Vec<i64>,
    pub nu: Vec<i64>,
    pub rho: Vec<i64>,
}

impl OmegaArgs {
    pub fn new(kappa: (i64, i64), mu: Vec<i64>, nu: Vec<i64>, rho: Vec<i64>) -> Self {
        Self { kappa, mu, nu, rho }
    }

    /// `κ1 + κ2 + Σμ + Σν + Σρ`.
    pub fn total(&self) -> i64 {
        self.kappa.0 + self.kappa.1 + self.mu.iter().sum::<i64>() + self.nu.iter().sum::<i64>()
            + self.rho.iter().sum::<i64>()
    }
}

fn require(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(LabError::InvalidArgument(what.into()))
    }
}

/// `Ω⁽¹⁾_j(κ1, κ2, μ)`, three lines summed:
///
/// ```text
///   M2 + neg(κ1 + κ2 − M2 + Σneg μ)
/// + neg κ1 + neg(pos κ1 + Σneg μ + neg(Σpos μ + κ2))
/// + Σneg μ + neg(Σpos μ + M2)
/// ```
pub fn omega1(a: &OmegaArgs) -> Result<i64> {
    require(!a.mu.is_empty(), "omega1 needs a nonempty mu")?;
    let (k1, k2) = a.kappa;
    let mm = m2(k1, k2);
    let (nm, pm) = (sum_neg(&a.mu), sum_pos(&a.mu));
    let line1 = mm + neg(k1 + k2 - mm + nm);
    let line2 = neg(k1) + neg(pos(k1) + nm + neg(pm + k2));
    let line3 = nm + neg(pm + mm);
    Ok(line1 + line2 + line3)
}

/// `Ω⁽²⁾_{j,k}(κ1, κ2, μ, ν)`, three lines summed:
///
/// ```text
///   neg κ1 + neg(pos κ1 + Σneg μ + neg(Σpos μ + κ2 + Σneg ν))
/// + Σneg μ + neg(Σpos μ + κ1 + neg κ2 + neg(pos κ2 + Σneg ν))
/// + Σneg μ + neg(Σpos μ + κ1 + Σneg ν + neg(Σpos ν + κ2))
/// ```
pub fn omega2(a: &OmegaArgs) -> Result<i64> {
    require(!a.mu.is_empty() && !a.nu.is_empty(), "omega2 needs nonempty mu and nu")?;
    let (k1, k2) = a.kappa;
    let (nm, pm) = (sum_neg(&a.mu), sum_pos(&a.mu));
    let (nn, pn) = (sum_neg(&a.nu), sum_pos(&a.nu));
    let line1 = neg(k1) + neg(pos(k1) + nm + neg(pm + k2 + nn));
    let line2 = nm + neg(pm + k1 + neg(k2) + neg(pos(k2) + nn));
    let line3 = nm + neg(pm + k1 + nn + neg(pn + k2));
    Ok(line1 + line2 + line3)
}

/// `Ω⁽³⁾_{j,k,l}(κ1, κ2, μ, ν, ρ)
///  = Σneg μ + neg(Σpos μ + κ1 + Σneg ν + neg(Σpos ν + κ2 + Σneg ρ))`.
pub fn omega3(a: &OmegaArgs) -> Result<i64> {
    require(
        !a.mu.is_empty() && !a.nu.is_empty() && !a.rho.is_empty(),
        "omega3 needs nonempty mu, nu and rho",
    )?;
    let (k1, k2) = a.kappa;
    let inner = neg(sum_pos(&a.nu) + k2 + sum_neg(&a.rho));
    Ok(sum_neg(&a.mu) + neg(sum_pos(&a.mu) + k1 + sum_neg(&a.nu) + inner))
}

fn sorted(v: &[i64]) -> Vec<i64> {
    let mut s = v.to_vec();
    s.sort_unstable();
    s
}

fn run_min(pieces: &[&[i64]]) -> i64 {
    let flat: Vec<i64> = pieces.iter().flat_map(|p| p.iter().copied()).collect();
    min_partial_sum_i(&flat)
}

/// Second transcription of [`omega1`]: with `sμ` the ascending sort of `μ`,
/// `M(κ1,κ2,sμ) + M(κ1,sμ,κ2) + M(sμ,κ1,κ2)`.
pub fn omega1_blocks(a: &OmegaArgs) -> Result<i64> {
    require(!a.mu.is_empty(), "omega1 needs a nonempty mu")?;
    let (k1, k2) = ([a.kappa.0], [a.kappa.1]);
    let s = sorted(&a.mu);
    Ok(run_min(&[&k1, &k2, &s]) + run_min(&[&k1, &s, &k2]) + run_min(&[&s, &k1, &k2]))
}

/// Second transcription of [`omega2`]:
/// `M(κ1,sμ,κ2,sν) + M(sμ,κ1,κ2,sν) + M(sμ,κ1,sν,κ2)`.
pub fn omega2_blocks(a: &OmegaArgs) -> Result<i64> {
    require(!a.mu.is_empty() && !a.nu.is_empty(), "omega2 needs nonempty mu and nu")?;
    let (k1, k2) = ([a.kappa.0], [a.kappa.1]);
    let (sm, sn) = (sorted(&a.mu), sorted(&a.nu));
    Ok(run_min(&[&k1, &sm, &k2, &sn])
        + run_min(&[&sm, &k1, &k2, &sn])
        + run_min(&[&sm, &k1, &sn, &k2]))
}

/// Second transcription of [`omega3`]: `M(sμ, κ1, sν, κ2, sρ)`.
pub fn omega3_blocks(a: &OmegaArgs) -> Result<i64> {
    require(
        !a.mu.is_empty() && !a.nu.is_empty() && !a.rho.is_empty(),
        "omega3 needs nonempty mu, nu and rho",
    )?;
    let (k1, k2) = ([a.kappa.0], [a.kappa.1]);
    Ok(run_min(&[&sorted(&a.mu), &k1, &sorted(&a.nu), &k2, &sorted(&a.rho)]))
}

/// Random-walk functional `Σpos y + pos(Σneg y + Σpos z)`; nonnegative.
pub fn omega_rw(y: &[f64], z: &[f64]) -> Result<f64> {
    require(!y.is_empty() && !z.is_empty(), "omega_rw needs nonempty y and z")?;
    let np: f64 = y.iter().map(|v| v.min(0.0)).sum();
    let pp: f64 = y.iter().map(|v| v.max(0.0)).sum();
    let pz: f64 = z.iter().map(|v| v.max(0.0)).sum();
    Ok(pp + (np + pz).max(0.0))
}

/// Second transcription of [`omega_rw`]: the running maximum of `y` sorted
/// descending followed by `z` sorted descending.
pub fn omega_rw_blocks(y: &[f64], z: &[f64]) -> Result<f64> {
    require(!y.is_empty() && !z.is_empty(), "omega_rw needs nonempty y and z")?;
    let mut ys = y.to_vec();
    let mut zs = z.to_vec();
    ys.sort_by(|a, b| b.total_cmp(a));
    zs.sort_by(|a, b| b.total_cmp(a));
    ys.extend(zs);
    Ok(max_partial_sum(&ys))
}

/// Running minimum of `μ` and its two-piece rewrite at split point `j`:
/// `M_j + neg(S_j − M_j + M_{p−j}(μ_{j+1..p}))`.
pub fn split_one(mu: &[i64], j: usize) -> Result<(i64, i64)> {
    let p = mu.len();
    if j < 1 || j + 1 > p {
        return Err(LabError::InvalidArgument(format!("split point {j} outside 1..={}", p.saturating_sub(1))));
    }
    let (a, b) = mu.split_at(j);
    let mj = min_partial_sum_i(a);
    let sj: i64 = a.iter().sum();
    Ok((min_partial_sum_i(mu), mj + neg(sj - mj + min_partial_sum_i(b))))
}

/// Running minimum of `μ` and the three-piece rewrite isolating `μ_{j+1}`:
/// `M_j + neg(S_j − M_j + μ_{j+1} + M_{p−j−1}(μ_{j+2..p}))`.
pub fn split_two(mu: &[i64], j: usize) -> Result<(i64, i64)> {
    let p = mu.len();
    if j < 1 || j + 2 > p {
        return Err(LabError::InvalidArgument(format!("split point {j} outside 1..={}", p.saturating_sub(2))));
    }
    let a = &mu[..j];
    let mj = min_partial_sum_i(a);
    let sj: i64 = a.iter().sum();
    let rest = min_partial_sum_i(&mu[j + 1..]);
    Ok((min_partial_sum_i(mu), mj + neg(sj - mj + mu[j] + rest)))
}
