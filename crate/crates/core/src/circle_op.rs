//! The circle model: trigonometric symbols, the operator `B = T(b0) + T(bsub)·D`
//! as a finite matrix over Fourier modes `−N..N`, spectral projections and
//! Fourier blocks.
//!
//! Levels: mode `j` sits on level `|j|`, so `π_0` is mode 0, `π_k` (k ≥ 1) is
//! `{k, −k}` and `P_n` keeps `|j| <= n` (dimension `2n + 1`). A block `B_κ`
//! keeps the entries `(j, k)` with `|j| − |k| = κ`.
//!
//! Everything here is computed on the truncated matrix. Operations that must
//! agree with the infinite operator check an interior budget and return
//! [`LabError::CutoffTooSmall`] instead of silently truncating.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LabError, Result};

type C = Complex64;
pub type CMatrix = DMatrix<C>;

const ZERO: C = C { re: 0.0, im: 0.0 };
const ONE: C = C { re: 1.0, im: 0.0 };

/// Relative tolerance for the conjugate-symmetry (real-valuedness) flag.
const REAL_FLAG_TOL: f64 = 1e-13;

/// A trigonometric polynomial `Σ_{|k|<=K} c_k e^{ikx}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    degree: usize,
    coeffs: Vec<C>,
    real: bool,
}

impl TrigPoly {
    /// `coeffs` lists modes `−K..K`; its length must be odd.
    pub fn new(coeffs: Vec<C>) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(LabError::InvalidArgument("trig poly needs 2K+1 coefficients".into()));
        }
        let degree = coeffs.len() / 2;
        let real = is_conjugate_symmetric(&coeffs);
        Ok(Self { degree, coeffs, real })
    }

    /// Builds from sparse `(mode, coefficient)` pairs.
    pub fn from_modes(modes: &[(i64, C)]) -> Self {
        let degree = modes.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut coeffs = vec![ZERO; 2 * degree + 1];
        for &(k, c) in modes {
            coeffs[(k + degree as i64) as usize] += c;
        }
        Self::new(coeffs).expect("odd length by construction")
    }

    pub fn constant(c: f64) -> Self {
        Self::from_modes(&[(0, C::new(c, 0.0))])
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `a + c·cos(k x)`.
    pub fn cosine(a: f64, c: f64, k: i64) -> Self {
        if k == 0 {
            return Self::constant(a + c);
        }
        Self::from_modes(&[(0, C::new(a, 0.0)), (k, C::new(c / 2.0, 0.0)), (-k, C::new(c / 2.0, 0.0))])
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Whether `c_{−k} = conj(c_k)` for all k (the function is real-valued).
    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Coefficients for modes `−K..K`.
    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Coefficient of mode `k`, zero outside the stored range.
    pub fn coeff(&self, k: i64) -> C {
        let d = self.degree as i64;
        if k.abs() > d {
            ZERO
        } else {
            self.coeffs[(k + d) as usize]
        }
    }

    pub fn eval(&self, x: f64) -> C {
        let d = self.degree as i64;
        (-d..=d).map(|k| self.coeff(k) * C::from_polar(1.0, k as f64 * x)).sum()
    }

    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let d = self.degree + other.degree;
        let mut out = vec![ZERO; 2 * d + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        TrigPoly::new(out).expect("odd length")
    }

    /// `self^j` by repeated convolution (`j = 0` gives 1).
    pub fn pow(&self, j: usize) -> TrigPoly {
        let mut acc = TrigPoly::constant(1.0);
        for _ in 0..j {
            acc = acc.mul(self);
        }
        acc
    }

    /// All powers `self^0 ..= self^jmax`.
    pub fn powers(&self, jmax: usize) -> Vec<TrigPoly> {
        let mut out = Vec::with_capacity(jmax + 1);
        out.push(TrigPoly::constant(1.0));
        for j in 1..=jmax {
            let next = out[j - 1].mul(self);
            out.push(next);
        }
        out
    }

    pub fn scale(&self, s: C) -> TrigPoly {
        TrigPoly::new(self.coeffs.iter().map(|&c| c * s).collect()).expect("odd length")
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let d = self.degree.max(other.degree) as i64;
        TrigPoly::new((-d..=d).map(|k| self.coeff(k) + other.coeff(k)).collect()).expect("odd length")
    }

    /// Drops modes above `k` in absolute value.
    pub fn truncate(&self, k: usize) -> TrigPoly {
        let k = k.min(self.degree) as i64;
        TrigPoly::new((-k..=k).map(|m| self.coeff(m)).collect()).expect("odd length")
    }

    /// Largest sampled modulus on a uniform grid (a sup-norm estimate).
    pub fn sup_norm(&self) -> f64 {
        let p = 8 * self.degree + 16;
        (0..p)
            .map(|i| self.eval(2.0 * std::f64::consts::PI * i as f64 / p as f64).norm())
            .fold(0.0, f64::max)
    }

    /// `Σ |c_k|`, an upper bound for the sup norm.
    pub fn l1_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }
}

fn is_conjugate_symmetric(coeffs: &[C]) -> bool {
    let n = coeffs.len();
    let scale = coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
    (0..n).all(|i| (coeffs[i] - coeffs[n - 1 - i].conj()).norm() <= REAL_FLAG_TOL * scale)
}

#[derive(Serialize, Deserialize)]
struct TrigPolyJson {
    degree: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for TrigPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TrigPolyJson {
            degree: self.degree,
            re: self.coeffs.iter().map(|c| c.re).collect(),
            im: self.coeffs.iter().map(|c| c.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TrigPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let j = TrigPolyJson::deserialize(d)?;
        let n = 2 * j.degree + 1;
        if j.re.len() != n || j.im.len() != n {
            return Err(D::Error::custom(format!("expected {n} coefficients for degree {}", j.degree)));
        }
        TrigPoly::new(j.re.iter().zip(&j.im).map(|(&a, &b)| C::new(a, b)).collect())
            .map_err(D::Error::custom)
    }
}

/// Minimum number of trapezoid points for degree `k`.
pub fn min_samples(k: usize) -> usize {
    4 * k + 8
}

/// Fourier coefficients `f̂_k`, `|k| <= K`, of a sampled `2π`-periodic function
/// by the trapezoid rule on `points` uniform nodes (computed with an FFT).
///
/// Exact for trigonometric polynomials of degree `<= K` when
/// `points >= 4K + 8`; fewer points are rejected.
pub fn fourier_coeffs<F: Fn(f64) -> C>(f: F, k: usize, points: usize) -> Result<TrigPoly> {
    if points < min_samples(k) {
        return Err(LabError::InvalidArgument(format!(
            "need at least {} sample points for degree {k}, got {points}",
            min_samples(k)
        )));
    }
    let mut buf: Vec<C> = (0..points)
        .map(|i| f(2.0 * std::f64::consts::PI * i as f64 / points as f64))
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(points).process(&mut buf);
    let inv = 1.0 / points as f64;
    let coeffs = (-(k as i64)..=k as i64)
        .map(|m| buf[m.rem_euclid(points as i64) as usize] * inv)
        .collect();
    TrigPoly::new(coeffs)
}

/// Real-valued convenience wrapper around [`fourier_coeffs`].
pub fn fourier_coeffs_real<F: Fn(f64) -> f64>(f: F, k: usize, points: usize) -> Result<TrigPoly> {
    fourier_coeffs(|x| C::new(f(x), 0.0), k, points)
}

/// Sampling resolution used for symbol compositions (`log b`, `1/b`).
fn composition_points(b: &TrigPoly, k: usize) -> usize {
    (min_samples(k).max(min_samples(b.degree()))).max(256).next_power_of_two() * 2
}

/// Minimum of a real symbol on a fine grid; errors if the symbol is complex
/// or not strictly positive.
pub fn check_positive(b: &TrigPoly) -> Result<f64> {
    if !b.is_real() {
        return Err(LabError::InvalidArgument("symbol must be real-valued".into()));
    }
    let p = composition_points(b, b.degree());
    let min = (0..p)
        .map(|i| b.eval(2.0 * std::f64::consts::PI * i as f64 / p as f64).re)
        .fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(LabError::NonPositiveSymbol { min });
    }
    Ok(min)
}

/// `log b` truncated to degree `k` (spectral truncation of the sampled log).
pub fn log_symbol(b: &TrigPoly, k: usize) -> Result<TrigPoly> {
    check_positive(b)?;
    let p = composition_points(b, k);
    fourier_coeffs(|x| C::new(b.eval(x).re.ln(), 0.0), k, p)
}

/// `num / den` truncated to degree `k`; `den` must be strictly positive.
pub fn quotient_symbol(num: &TrigPoly, den: &TrigPoly, k: usize) -> Result<TrigPoly> {
    check_positive(den)?;
    let p = composition_points(&num.add(den), k);
    fourier_coeffs(|x| num.eval(x) / den.eval(x), k, p)
}

/// `level(j) = |j|`.
#[inline]
pub fn level(mode: i64) -> i64 {
    mode.abs()
}

/// The matrix of an operator over modes `−N..N` (row/column index `mode + N`).
#[derive(Debug, Clone, PartialEq)]
pub struct BandedOperator {
    cutoff: usize,
    bandwidth: usize,
    entries: CMatrix,
}

impl BandedOperator {
    /// Wraps a `(2N+1)²` matrix; the bandwidth is measured from the entries.
    pub fn from_matrix(entries: CMatrix) -> Result<Self> {
        let dim = entries.nrows();
        if dim != entries.ncols() || dim.is_multiple_of(2) {
            return Err(LabError::InvalidArgument("operator matrix must be (2N+1) square".into()));
        }
        let mut bw = 0;
        for j in 0..dim {
            for i in 0..dim {
                if entries[(i, j)] != ZERO {
                    bw = bw.max(i.abs_diff(j));
                }
            }
        }
        Ok(Self { cutoff: dim / 2, bandwidth: bw, entries })
    }

    pub fn identity(cutoff: usize) -> Self {
        Self { cutoff, bandwidth: 0, entries: CMatrix::identity(2 * cutoff + 1, 2 * cutoff + 1) }
    }

    /// Diagonal operator with entry `d(mode)` on each mode.
    pub fn diagonal<F: Fn(i64) -> C>(cutoff: usize, d: F) -> Self {
        let n = cutoff as i64;
        let entries = CMatrix::from_fn(2 * cutoff + 1, 2 * cutoff + 1, |i, j| {
            if i == j {
                d(i as i64 - n)
            } else {
                ZERO
            }
        });
        Self::from_matrix(entries).expect("square")
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn dim(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    #[inline]
    pub fn index(&self, mode: i64) -> usize {
        (mode + self.cutoff as i64) as usize
    }

    #[inline]
    pub fn mode(&self, index: usize) -> i64 {
        index as i64 - self.cutoff as i64
    }

    /// Entry `(j, k)` addressed by modes.
    pub fn entry(&self, j: i64, k: i64) -> C {
        let n = self.cutoff as i64;
        if j.abs() > n || k.abs() > n {
            return ZERO;
        }
        self.entries[(self.index(j), self.index(k))]
    }

    /// Largest `| |j| − |k| |` over nonzero entries.
    pub fn level_bandwidth(&self) -> usize {
        let dim = self.dim();
        let mut bw = 0;
        for c in 0..dim {
            for r in 0..dim {
                if self.entries[(r, c)] != ZERO {
                    bw = bw.max(level(self.mode(r)).abs_diff(level(self.mode(c))) as usize);
                }
            }
        }
        bw
    }

    fn check_budget(&self, needed: i64) -> Result<()> {
        if needed > self.cutoff as i64 {
            return Err(LabError::CutoffTooSmall { needed, have: self.cutoff as i64 });
        }
        Ok(())
    }

    /// `P_n · op · P_n` (zero for `n < 0`); `n > N` is an error.
    pub fn project(&self, n: i64) -> Result<BandedOperator> {
        self.check_budget(n)?;
        let mut out = self.entries.clone();
        let dim = self.dim();
        for c in 0..dim {
            for r in 0..dim {
                if level(self.mode(r)) > n || level(self.mode(c)) > n {
                    out[(r, c)] = ZERO;
                }
            }
        }
        Ok(Self { cutoff: self.cutoff, bandwidth: self.bandwidth, entries: out })
    }

    /// The `(2n+1)²` principal block on levels `<= n` (the range of `P_n`).
    pub fn compress(&self, n: usize) -> Result<CMatrix> {
        self.check_budget(n as i64)?;
        let start = self.cutoff - n;
        Ok(self.entries.view((start, start), (2 * n + 1, 2 * n + 1)).into_owned())
    }

    /// Keeps the entries with `|j| − |k| = κ`.
    pub fn fourier_block(&self, kappa: i64) -> BandedOperator {
        Self::from_matrix(block_of(&self.entries, self.cutoff, kappa)).expect("square")
    }

    /// Max-norm of `B_κ P_n − P_{n+κ} B_κ`.
    pub fn commutation_residual(&self, kappa: i64, n: i64) -> Result<f64> {
        self.check_budget(n + kappa.abs() + self.bandwidth as i64)?;
        let bk = block_of(&self.entries, self.cutoff, kappa);
        let left = &bk * projector(self.cutoff, n);
        let right = projector(self.cutoff, n + kappa) * &bk;
        Ok(max_abs(&(left - right)))
    }

    /// Max-norm of `ν G_ν − ([A, G])_ν` with `A = diag(level)`.
    pub fn ad_a_block_residual(&self, nu: i64) -> Result<f64> {
        self.check_budget(nu.abs())?;
        let a = level_diagonal(self.cutoff);
        let comm = &a * &self.entries - &self.entries * &a;
        let lhs = block_of(&self.entries, self.cutoff, nu) * C::new(nu as f64, 0.0);
        let rhs = block_of(&comm, self.cutoff, nu);
        Ok(max_abs(&(lhs - rhs)))
    }

    /// `(op^j)_ν` taken from the matrix power.
    pub fn power_block(&self, j: usize, nu: i64) -> Result<BandedOperator> {
        self.check_budget((j * self.bandwidth) as i64 + nu.abs())?;
        let p = self.power(j);
        Self::from_matrix(block_of(&p, self.cutoff, nu))
    }

    /// `Σ_{κ1+...+κj=ν} B_{κ1}···B_{κj}`, the convolution form of [`Self::power_block`].
    pub fn power_block_convolution(&self, j: usize, nu: i64) -> Result<BandedOperator> {
        self.check_budget((j * self.bandwidth) as i64 + nu.abs())?;
        if j == 0 {
            return Self::from_matrix(if nu == 0 {
                CMatrix::identity(self.dim(), self.dim())
            } else {
                CMatrix::zeros(self.dim(), self.dim())
            });
        }
        let blocks = self.blocks();
        let mut acc = blocks.clone();
        for _ in 1..j {
            acc = convolve(&acc, &blocks, None);
        }
        let m = acc.remove(&nu).unwrap_or_else(|| CMatrix::zeros(self.dim(), self.dim()));
        Self::from_matrix(m)
    }

    /// Nonzero Fourier blocks keyed by `κ`.
    pub fn blocks(&self) -> Graded {
        let lbw = self.level_bandwidth() as i64;
        let mut out = Graded::new();
        for k in -lbw..=lbw {
            let b = block_of(&self.entries, self.cutoff, k);
            if b.iter().any(|&z| z != ZERO) {
                out.insert(k, b);
            }
        }
        out
    }

    /// `op^j` using the band structure of `op`.
    pub fn power(&self, j: usize) -> CMatrix {
        let mut acc = CMatrix::identity(self.dim(), self.dim());
        for _ in 0..j {
            acc = mul_banded(&acc, self);
        }
        acc
    }

    /// Signed convolution powers: `B_−^1 = Σ_{κ<0} B_κ`,
    /// `B_−^{j+1} = (B ∗ B_−^j)_−`, `B_+^1 = Σ_{κ>=0} B_κ`,
    /// `B_+^{j+1} = (B_+^j ∗ B)_+`, for `j = 1..=max_power`.
    pub fn plus_minus_parts(&self, max_power: usize) -> Result<PlusMinus> {
        self.check_budget((max_power * self.bandwidth) as i64)?;
        let blocks = self.blocks();
        let minus1: Graded = blocks.iter().filter(|(k, _)| **k < 0).map(|(k, m)| (*k, m.clone())).collect();
        let plus1: Graded = blocks.iter().filter(|(k, _)| **k >= 0).map(|(k, m)| (*k, m.clone())).collect();
        let mut minus = vec![minus1];
        let mut plus = vec![plus1];
        for _ in 1..max_power {
            let next_minus = convolve(&blocks, minus.last().unwrap(), Some(Sign::Negative));
            let next_plus = convolve(plus.last().unwrap(), &blocks, Some(Sign::NonNegative));
            minus.push(next_minus);
            plus.push(next_plus);
        }
        Ok(PlusMinus { dim: self.dim(), minus, plus })
    }

    /// `(Tr((P_n B P_n)^m), Tr(P_n B^m P_n))`, exact when `n + m·bw <= N`.
    pub fn trace_pow(&self, n: usize, m: usize) -> Result<(C, C)> {
        self.check_budget((n + m * self.bandwidth) as i64)?;
        let pbp = self.compress(n)?;
        let mut acc = pbp.clone();
        for _ in 1..m {
            acc = &acc * &pbp;
        }
        let full = self.power(m);
        let start = self.cutoff - n;
        let dim = 2 * n + 1;
        let tr_full: C = (start..start + dim).map(|i| full[(i, i)]).sum();
        Ok((acc.trace(), tr_full))
    }

    /// Right-hand side of the exact finite-n identity
    /// `Tr((P_nBP_n)^m) − Tr(P_nB^mP_n)
    ///    = −Σ_{Σκ=0} Σ_{j=M_m(κ)+1}^{0} Tr(π_{n+j} B_{κ1}···B_{κm})`,
    /// computed from the Fourier blocks only.
    pub fn block_identity_rhs(&self, n: usize, m: usize) -> Result<C> {
        self.check_budget((n + m * self.bandwidth) as i64)?;
        let blocks = self.blocks();
        let keys: Vec<i64> = blocks.keys().copied().collect();
        let mut total = ZERO;
        let mut idx = vec![0usize; m];
        loop {
            let kap: Vec<i64> = idx.iter().map(|&i| keys[i]).collect();
            if kap.iter().sum::<i64>() == 0 {
                let mm = crate::combinatorics::min_partial_sum_i(&kap);
                if mm < 0 {
                    let mut prod = blocks[&kap[0]].clone();
                    for k in &kap[1..] {
                        prod = &prod * &blocks[k];
                    }
                    for j in (mm + 1)..=0 {
                        total -= level_trace(&prod, self.cutoff, n as i64 + j);
                    }
                }
            }
            // odometer over keys^m
            let mut p = 0;
            loop {
                if p == m {
                    return Ok(total);
                }
                idx[p] += 1;
                if idx[p] < keys.len() {
                    break;
                }
                idx[p] = 0;
                p += 1;
            }
        }
    }

    /// `Tr log(P_n B P_n)` by the Neumann series, with an LU cross-check.
    pub fn trace_log(&self, n: usize, series_terms: usize) -> Result<TraceLog> {
        let pbp = self.compress(n)?;
        let dim = pbp.nrows();
        let x = CMatrix::identity(dim, dim) - &pbp;
        let radius = norm_radius(&x);
        if radius >= 1.0 {
            return Err(LabError::Divergent { radius });
        }
        let terms = neumann_terms(radius, dim, TRACE_LOG_TAIL)?;
        if terms > series_terms {
            return Err(LabError::DivergentTail {
                estimate: tail_bound(radius, dim, series_terms),
                tolerance: TRACE_LOG_TAIL,
            });
        }
        let mut pow = x.clone();
        let mut series = ZERO;
        for m in 1..=terms {
            series -= pow.trace() / m as f64;
            if m < terms {
                pow = &pow * &x;
            }
        }
        let (lu, branch_ambiguous) = lu_log_det(&pbp);
        Ok(TraceLog { series, lu, terms, radius, branch_ambiguous })
    }

    /// `log det(P_n B P_n)` for every `n = 0..=n_max`, from one elimination
    /// in level order (modes `0, 1, −1, 2, −2, ...`), so each `P_nBP_n` is a
    /// leading principal block. Falls back to per-n LU if a pivot is tiny.
    pub fn log_det_series(&self, n_max: usize) -> Result<Vec<C>> {
        self.check_budget(n_max as i64)?;
        let order: Vec<usize> = level_order(n_max).into_iter().map(|m| self.index(m)).collect();
        let dim = order.len();
        let mut a = CMatrix::from_fn(dim, dim, |i, j| self.entries[(order[i], order[j])]);
        let scale = max_abs(&a).max(f64::MIN_POSITIVE);
        let mut logs = Vec::with_capacity(dim);
        let mut acc = ZERO;
        for k in 0..dim {
            let piv = a[(k, k)];
            if piv.norm() < 1e-12 * scale {
                return (0..=n_max).map(|n| Ok(lu_log_det(&self.compress(n)?).0)).collect();
            }
            acc += piv.ln();
            logs.push(acc);
            for i in k + 1..dim {
                let f = a[(i, k)] / piv;
                if f == ZERO {
                    continue;
                }
                for j in k + 1..dim {
                    let t = a[(k, j)];
                    if t != ZERO {
                        a[(i, j)] -= f * t;
                    }
                }
            }
        }
        Ok((0..=n_max).map(|n| logs[2 * n]).collect())
    }
}

/// Tail tolerance for [`BandedOperator::trace_log`].
pub const TRACE_LOG_TAIL: f64 = 1e-12;

/// Result of [`BandedOperator::trace_log`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceLog {
    pub series: C,
    pub lu: C,
    pub terms: usize,
    pub radius: f64,
    pub branch_ambiguous: bool,
}

/// `B = T(b0) + T(bsub)·D` with `D e^{ikx} = e^{ikx}/|k|` (and `D 1 = 0`):
/// entry `(j, k) = b̂0_{j−k} + b̂sub_{j−k}·d_k`.
pub fn build_operator(b0: &TrigPoly, bsub: &TrigPoly, cutoff: usize) -> Result<BandedOperator> {
    let deg = b0.degree().max(bsub.degree());
    if cutoff < deg {
        return Err(LabError::CutoffTooSmall { needed: deg as i64, have: cutoff as i64 });
    }
    let n = cutoff as i64;
    let dim = 2 * cutoff + 1;
    let entries = CMatrix::from_fn(dim, dim, |r, c| {
        let (j, k) = (r as i64 - n, c as i64 - n);
        let d = if k == 0 { 0.0 } else { 1.0 / k.abs() as f64 };
        b0.coeff(j - k) + bsub.coeff(j - k) * d
    });
    BandedOperator::from_matrix(entries)
}

/// Blocks of a graded operator keyed by `κ`.
pub type Graded = BTreeMap<i64, CMatrix>;

/// Output of [`BandedOperator::plus_minus_parts`]: `minus[j−1]` is `B_−^j`.
#[derive(Debug, Clone)]
pub struct PlusMinus {
    dim: usize,
    pub minus: Vec<Graded>,
    pub plus: Vec<Graded>,
}

impl PlusMinus {
    /// `(B_±^j)_κ`, zero if absent.
    pub fn minus_block(&self, j: usize, kappa: i64) -> CMatrix {
        self.minus[j - 1].get(&kappa).cloned().unwrap_or_else(|| CMatrix::zeros(self.dim, self.dim))
    }

    pub fn plus_block(&self, j: usize, kappa: i64) -> CMatrix {
        self.plus[j - 1].get(&kappa).cloned().unwrap_or_else(|| CMatrix::zeros(self.dim, self.dim))
    }
}

/// Sum of all blocks of a graded family.
pub fn graded_total(g: &Graded, dim: usize) -> CMatrix {
    let mut out = CMatrix::zeros(dim, dim);
    for m in g.values() {
        out += m;
    }
    out
}

#[derive(Clone, Copy)]
enum Sign {
    Negative,
    NonNegative,
}

/// `(a ∗ b)_ν = Σ_κ a_κ · b_{ν−κ}`, optionally keeping only one sign of `ν`.
fn convolve(a: &Graded, b: &Graded, keep: Option<Sign>) -> Graded {
    let mut out = Graded::new();
    for (ka, ma) in a {
        for (kb, mb) in b {
            let nu = ka + kb;
            let keep_it = match keep {
                None => true,
                Some(Sign::Negative) => nu < 0,
                Some(Sign::NonNegative) => nu >= 0,
            };
            if !keep_it {
                continue;
            }
            let p = ma * mb;
            match out.get_mut(&nu) {
                Some(m) => *m += p,
                None => {
                    out.insert(nu, p);
                }
            }
        }
    }
    out
}

/// Entries with `|j| − |k| = κ` of a matrix over modes `−N..N`.
pub fn block_of(m: &CMatrix, cutoff: usize, kappa: i64) -> CMatrix {
    let n = cutoff as i64;
    CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
        if level(r as i64 - n) - level(c as i64 - n) == kappa {
            m[(r, c)]
        } else {
            ZERO
        }
    })
}

/// `P_n` as a matrix (zero for `n < 0`, identity for `n >= N`).
pub fn projector(cutoff: usize, n: i64) -> CMatrix {
    let c = cutoff as i64;
    CMatrix::from_fn(2 * cutoff + 1, 2 * cutoff + 1, |r, s| {
        if r == s && level(r as i64 - c) <= n {
            ONE
        } else {
            ZERO
        }
    })
}

/// `A = diag(level)`.
pub fn level_diagonal(cutoff: usize) -> CMatrix {
    let c = cutoff as i64;
    CMatrix::from_fn(2 * cutoff + 1, 2 * cutoff + 1, |r, s| {
        if r == s {
            C::new(level(r as i64 - c) as f64, 0.0)
        } else {
            ZERO
        }
    })
}

/// `Tr(π_k X)`: the diagonal entries of modes `±k` (mode 0 for `k = 0`).
pub fn level_trace(x: &CMatrix, cutoff: usize, k: i64) -> C {
    let c = cutoff as i64;
    if k < 0 || k > c {
        return ZERO;
    }
    if k == 0 {
        return x[(cutoff, cutoff)];
    }
    x[((c + k) as usize, (c + k) as usize)] + x[((c - k) as usize, (c - k) as usize)]
}

/// Modes in level order `0, 1, −1, 2, −2, ..., n, −n`.
pub fn level_order(n: usize) -> Vec<i64> {
    let mut out = vec![0];
    for k in 1..=n as i64 {
        out.push(k);
        out.push(-k);
    }
    out
}

/// `y · op`, touching only the band of `op`.
pub fn mul_banded(y: &CMatrix, op: &BandedOperator) -> CMatrix {
    let dim = op.dim();
    let bw = op.bandwidth();
    let x = op.matrix();
    let mut out = CMatrix::zeros(y.nrows(), dim);
    for k in 0..dim {
        let lo = k.saturating_sub(bw);
        let hi = (k + bw).min(dim - 1);
        for j in lo..=hi {
            let xjk = x[(j, k)];
            if xjk == ZERO {
                continue;
            }
            for i in 0..y.nrows() {
                out[(i, k)] += y[(i, j)] * xjk;
            }
        }
    }
    out
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `sqrt(‖X‖₁‖X‖∞)`, an upper bound for the spectral norm.
pub fn norm_radius(x: &CMatrix) -> f64 {
    let col = (0..x.ncols()).map(|j| x.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let row = (0..x.nrows()).map(|i| x.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    (col * row).sqrt()
}

/// `dim · r^{M+1} / ((M+1)(1−r))`, a bound for `|Σ_{m>M} Tr(X^m)/m|`.
fn tail_bound(r: f64, dim: usize, m: usize) -> f64 {
    dim as f64 * r.powi(m as i32 + 1) / ((m as f64 + 1.0) * (1.0 - r))
}

/// Smallest `M` with [`tail_bound`] below `tol`.
pub fn neumann_terms(r: f64, dim: usize, tol: f64) -> Result<usize> {
    if r >= 1.0 {
        return Err(LabError::Divergent { radius: r });
    }
    if r == 0.0 {
        return Ok(1);
    }
    let mut m = 1;
    while tail_bound(r, dim, m) >= tol {
        m += 1;
        if m > 100_000 {
            return Err(LabError::DivergentTail { estimate: tail_bound(r, dim, m), tolerance: tol });
        }
    }
    Ok(m)
}

/// `log det` by LU with partial pivoting (principal branch per pivot).
/// The flag is set when some pivot has nonpositive real part, i.e. when the
/// branch of the summed logarithm is not determined by the pivots alone.
pub fn lu_log_det(m: &CMatrix) -> (C, bool) {
    let lu = m.clone().lu();
    let u = lu.u();
    let mut acc = ZERO;
    let mut ambiguous = false;
    for i in 0..u.nrows() {
        let p = u[(i, i)];
        if p.re <= 0.0 {
            ambiguous = true;
        }
        acc += p.ln();
    }
    let sign: C = lu.p().determinant();
    if sign.re < 0.0 {
        acc += C::new(0.0, std::f64::consts::PI);
    }
    (acc, ambiguous)
}

/// Matrix logarithm of the whole truncated operator by the Neumann series
/// `log B = −Σ (I − B)^m / m`, terms chosen by the same tail rule as
/// [`BandedOperator::trace_log`] with tolerance `tol`.
pub fn log_operator(op: &BandedOperator, tol: f64) -> Result<CMatrix> {
    let dim = op.dim();
    let x = BandedOperator::from_matrix(CMatrix::identity(dim, dim) - op.matrix())?;
    let r = norm_radius(x.matrix());
    let terms = neumann_terms(r, 1, tol)?;
    let mut pow = x.matrix().clone();
    let mut acc = CMatrix::zeros(dim, dim);
    for m in 1..=terms {
        acc -= &pow * C::new(1.0 / m as f64, 0.0);
        if m < terms {
            pow = mul_banded(&pow, &x);
        }
    }
    Ok(acc)
}

/// Which half of the cosphere bundle of the circle: `ξ = +1` or `ξ = −1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    Plus,
    Minus,
}

impl Component {
    pub fn sign(self) -> i64 {
        match self {
            Component::Plus => 1,
            Component::Minus => -1,
        }
    }

    pub const BOTH: [Component; 2] = [Component::Plus, Component::Minus];
}

/// Fourier coefficient along the geodesic `t ↦ x + ξt`:
/// `∫ e^{−iνt} f(x + ξt) dt/2π = f̂_{ξν} e^{iξνx}`.
pub fn geodesic_coefficient(f: &TrigPoly, x: f64, comp: Component, nu: i64) -> C {
    let k = comp.sign() * nu;
    f.coeff(k) * C::from_polar(1.0, (k as f64) * x)
}

/// `∫ dx/2π Σ_ξ f̂_ν(x,ξ) ĝ_{−ν}(x,ξ)`, by the trapezoid rule in `x`.
pub fn cotangent_pairing(f: &TrigPoly, g: &TrigPoly, nu: i64, points: usize) -> C {
    let mut acc = ZERO;
    for i in 0..points {
        let x = 2.0 * std::f64::consts::PI * i as f64 / points as f64;
        for comp in Component::BOTH {
            acc += geodesic_coefficient(f, x, comp, nu) * geodesic_coefficient(g, x, comp, -nu);
        }
    }
    acc / points as f64
}

/// CSV text `n,value` with a header line.
pub fn series_csv(header: &str, rows: &[(usize, f64)]) -> String {
    let mut s = format!("n,{header}\n");
    for (n, v) in rows {
        s.push_str(&format!("{n},{v:.17e}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn fourier_examples() {
        let t = fourier_coeffs_real(|x| 1.0 + x.cos(), 2, 16).unwrap();
        let want = [0.0, 0.5, 1.0, 0.5, 0.0];
        for (k, w) in (-2..=2).zip(want) {
            assert!((t.coeff(k) - c(w)).norm() < 1e-15);
        }
        assert!(t.is_real());
        let t = fourier_coeffs_real(|_| 3.5, 3, 20).unwrap();
        assert!((t.coeff(0) - c(3.5)).norm() < 1e-15);
        assert!((1..=3).all(|k| t.coeff(k).norm() < 1e-15 && t.coeff(-k).norm() < 1e-15));
        assert!(fourier_coeffs_real(|x| x.cos(), 4, 10).is_err());
    }

    #[test]
    fn build_examples() {
        let b0 = TrigPoly::cosine(1.0, 0.3, 1);
        let bsub = TrigPoly::cosine(0.0, 0.2, 1);
        let op = build_operator(&b0, &bsub, 4).unwrap();
        assert!((op.entry(2, 1) - c(0.25)).norm() < 1e-15);
        assert!((op.entry(1, 0) - c(0.15)).norm() < 1e-15);
        assert_eq!(op.bandwidth(), 1);
        let t = build_operator(&b0, &TrigPoly::zero(), 4).unwrap();
        assert_eq!(t.entry(3, 2), t.entry(-1, -2));
        assert!(build_operator(&TrigPoly::cosine(1.0, 0.1, 5), &TrigPoly::zero(), 4).is_err());
    }

    #[test]
    fn projection() {
        let op = build_operator(&TrigPoly::cosine(1.0, 0.3, 1), &TrigPoly::zero(), 5).unwrap();
        assert_eq!(op.project(5).unwrap(), op);
        assert!(op.project(-1).unwrap().matrix().iter().all(|&z| z == ZERO));
        let p = op.project(2).unwrap();
        assert_eq!(p.entry(2, 1), op.entry(2, 1));
        assert_eq!(p.entry(3, 2), ZERO);
        assert!(op.project(6).is_err());
    }

    #[test]
    fn blocks_partition_entries() {
        let op = build_operator(&TrigPoly::cosine(1.0, 0.3, 1), &TrigPoly::cosine(0.0, 0.2, 1), 6).unwrap();
        let sum = graded_total(&op.blocks(), op.dim());
        assert!(max_abs(&(sum - op.matrix())) == 0.0);
        let b1 = op.fourier_block(1);
        assert_eq!(b1.entry(3, 2), op.entry(3, 2));
        assert_eq!(b1.entry(-3, -2), op.entry(-3, -2));
        assert_eq!(b1.entry(2, 3), ZERO);
        let d = BandedOperator::diagonal(4, |m| c(m as f64));
        assert_eq!(d.fourier_block(0), d);
        assert!(d.fourier_block(1).matrix().iter().all(|&z| z == ZERO));
    }

    #[test]
    fn trace_pow_examples() {
        let cc = 0.3;
        let op = build_operator(&TrigPoly::cosine(1.0, cc, 1), &TrigPoly::zero(), 12).unwrap();
        for n in 1..6 {
            let (a, b) = op.trace_pow(n, 2).unwrap();
            assert!((a - b + c(cc * cc / 2.0)).norm() < 1e-14);
            let (a, b) = op.trace_pow(n, 1).unwrap();
            assert!((a - b).norm() < 1e-14);
        }
        assert!(op.trace_pow(11, 2).is_err());
        let d = BandedOperator::diagonal(6, |m| c(1.0 + 0.1 * m as f64));
        let (a, b) = d.trace_pow(3, 3).unwrap();
        assert!((a - b).norm() < 1e-13);
    }

    #[test]
    fn trace_log_examples() {
        let id = BandedOperator::identity(5);
        let t = id.trace_log(3, 10).unwrap();
        assert_eq!(t.series, ZERO);
        let d = BandedOperator::diagonal(5, |m| c(1.0 + 0.05 * m as f64));
        let t = d.trace_log(4, 200).unwrap();
        let want: f64 = (-4..=4).map(|m| (1.0 + 0.05 * m as f64).ln()).sum();
        assert!((t.series - c(want)).norm() < 1e-12);
        assert!((t.lu - c(want)).norm() < 1e-12);
        let big = BandedOperator::diagonal(3, |_| c(2.5));
        assert!(matches!(big.trace_log(2, 100), Err(LabError::Divergent { .. })));
    }

    #[test]
    fn trig_json_roundtrip() {
        let t = TrigPoly::from_modes(&[(-1, C::new(0.5, 0.25)), (2, C::new(-1.0, 0.0))]);
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.contains("\"degree\":2"));
        let back: TrigPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<TrigPoly>(r#"{"degree":1,"re":[1.0],"im":[0.0]}"#).is_err());
    }

    #[test]
    fn positivity() {
        assert!(check_positive(&TrigPoly::cosine(1.0, 0.5, 1)).is_ok());
        assert!(matches!(
            check_positive(&TrigPoly::cosine(1.0, 2.0, 1)),
            Err(LabError::NonPositiveSymbol { .. })
        ));
        assert!(log_symbol(&TrigPoly::cosine(1.0, -1.0, 1), 8).is_err());
    }
}
