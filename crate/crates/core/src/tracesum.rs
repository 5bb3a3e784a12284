//! Partial sums of per-level traces `Tr(π_k G)` and their asymptotics.
//!
//! A [`TraceSequence`] carries `Tr(π_k G)` for `k = 0..=K` and a residue model
//! `Tr(π_k G) ≈ Σ_l R_l k^{d−1−l}` for `k >= 1`.
//!
//! Mode 0: on the circle `P_n` also contains `π_0`, which the `k >= 1` partial
//! sums do not see. `Tr(π_0 G)` is folded into the constant term by
//! [`prop3_predict`]; synthetic sequences simply set it to zero.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

type C = Complex64;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `ζ(2..=12)`.
const ZETA_TABLE: [f64; 11] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_2,
    1.082_323_233_711_138_2,
    1.036_927_755_143_37,
    1.017_343_061_984_449,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_3,
    1.002_008_392_826_082_2,
    1.000_994_575_127_818_1,
    1.000_494_188_604_119_5,
    1.000_246_086_553_308,
];

/// Riemann zeta at integers `l >= 2` (table up to 12, direct sum beyond,
/// where the terms past `k = 60` are below double precision).
pub fn zeta(l: u32) -> f64 {
    assert!(l >= 2, "zeta pole at 1");
    if (l as usize) < ZETA_TABLE.len() + 2 {
        return ZETA_TABLE[l as usize - 2];
    }
    (1..=60).rev().map(|k| (k as f64).powi(-(l as i32))).sum()
}

/// Exact `Σ_{k=1}^n k^m` next to the asymptotic form from the standard
/// expansions (Faulhaber for `m >= 0`, harmonic and zeta limits for `m < 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSum {
    pub exact: f64,
    pub predicted: f64,
    /// The remainder is `O(n^{remainder_exponent})`.
    pub remainder_exponent: i32,
}

pub fn power_sum(n: u64, m: i32) -> Result<PowerSum> {
    if n == 0 {
        return Err(LabError::InvalidArgument("power_sum needs n >= 1".into()));
    }
    // summed from the small terms up for accuracy
    let exact: f64 = (1..=n).rev().map(|k| (k as f64).powi(m)).sum();
    let nf = n as f64;
    let (predicted, remainder_exponent) = match m {
        m if m >= 0 => {
            let mf = m as f64;
            let mut p = nf.powi(m + 1) / (mf + 1.0);
            if m >= 1 {
                p += 0.5 * nf.powi(m);
            }
            if m >= 2 {
                p += mf / 12.0 * nf.powi(m - 1);
            }
            (p, m - 2)
        }
        -1 => (nf.ln() + EULER_GAMMA + 0.5 / nf, -2),
        -2 => (zeta(2) - 1.0 / nf, -2),
        m => (zeta((-m) as u32), m + 1),
    };
    Ok(PowerSum { exact, predicted, remainder_exponent })
}

/// Per-level traces with a residue model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSequence {
    pub d: u32,
    /// `Tr(π_k G)` for `k = 0..=K`.
    pub traces: Vec<C>,
    /// `R_0, R_1, ...`.
    pub residues: Vec<C>,
}

impl TraceSequence {
    pub fn new(d: u32, traces: Vec<C>, residues: Vec<C>) -> Result<Self> {
        if d == 0 {
            return Err(LabError::InvalidArgument("dimension must be >= 1".into()));
        }
        if traces.len() < 2 {
            return Err(LabError::InvalidArgument("need traces for k = 0 and k >= 1".into()));
        }
        Ok(Self { d, traces, residues })
    }

    /// Traces generated from prescribed residues plus an explicit tail
    /// `ε_k`, with `Tr(π_0 G) = 0`.
    pub fn synthetic<F: Fn(usize) -> C>(d: u32, residues: Vec<C>, kmax: usize, tail: F) -> Result<Self> {
        let mut traces = vec![C::new(0.0, 0.0)];
        for k in 1..=kmax {
            traces.push(model(d, &residues, k as f64) + tail(k));
        }
        Self::new(d, traces, residues)
    }

    pub fn kmax(&self) -> usize {
        self.traces.len() - 1
    }

    /// `ε_k = Tr(π_k G) − Σ_l R_l k^{d−1−l}`, for `k >= 1`.
    pub fn tail(&self, k: usize) -> C {
        self.traces[k] - model(self.d, &self.residues, k as f64)
    }

    /// `Σ_{k=1}^n Tr(π_k G)` from the stored traces.
    pub fn partial_sum(&self, n: usize) -> C {
        self.traces[1..=n].iter().sum()
    }

    /// CSV text `k,trace_re,trace_im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,trace_re,trace_im\n");
        for (k, t) in self.traces.iter().enumerate() {
            s.push_str(&format!("{k},{:.17e},{:.17e}\n", t.re, t.im));
        }
        s
    }

    /// JSON sidecar with `d` and the residues.
    pub fn residue_sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "d": self.d,
            "kmax": self.kmax(),
            "residues_re": self.residues.iter().map(|r| r.re).collect::<Vec<_>>(),
            "residues_im": self.residues.iter().map(|r| r.im).collect::<Vec<_>>(),
        })
    }
}

fn model(d: u32, residues: &[C], k: f64) -> C {
    residues
        .iter()
        .enumerate()
        .map(|(l, r)| r * k.powi(d as i32 - 1 - l as i32))
        .sum()
}

/// `C(G) = Σ_{k>=1} ε_k`, summed to `K` and extended by a power-law tail
/// `ε_k ≈ a k^{−q}` with `q = L + 2 − d` for residues `R_0..R_L` (the order
/// of the first residue not in the model), `a` read off the last computed tail value.
///
/// Errors when the tail is not decaying over the last half of the range.
pub fn c_constant(ts: &TraceSequence) -> Result<C> {
    let kmax = ts.kmax();
    let eps: Vec<C> = (1..=kmax).map(|k| ts.tail(k)).collect();
    let head: C = eps.iter().rev().sum();
    let q = ts.residues.len() as i32 + 1 - ts.d as i32;
    // round-off level of the traces themselves, below which ε_k is noise
    let scale = ts.traces.iter().map(|t| t.norm()).fold(0.0, f64::max);
    let floor = 1e-11 * scale + f64::MIN_POSITIVE;
    let quarter = kmax / 4;
    if quarter >= 2 {
        let mean = |r: std::ops::Range<usize>| r.clone().map(|i| eps[i].norm()).sum::<f64>() / r.len() as f64;
        let late = mean(kmax - quarter..kmax);
        let early = mean(kmax - 2 * quarter..kmax - quarter);
        if late > early && late > floor {
            return Err(LabError::NonDecayingTail(format!(
                "mean |eps| rose from {early:.3e} to {late:.3e}"
            )));
        }
    }
    if q <= 1 {
        if eps[kmax - 1].norm() > floor {
            return Err(LabError::NonDecayingTail(format!("tail order k^-{q} is not summable")));
        }
        return Ok(head);
    }
    let k = kmax as f64;
    let a = eps[kmax - 1] * k.powi(q);
    let qf = q as f64;
    // Σ_{k>K} k^{-q} ≈ K^{1−q}/(q−1) − K^{−q}/2
    let rest = k.powf(1.0 - qf) / (qf - 1.0) - 0.5 * k.powf(-qf);
    Ok(head + a * rest)
}

/// Asymptotic value of `Tr(P_n G P_n) = Tr(π_0 G) + Σ_{k=1}^n Tr(π_k G)`:
///
/// * `d = 1`: `n R0 + log n R1 + [C + γR1 + Σ_{l>=2} ζ(l) R_l] + (R1/2 − R2)/n`
/// * `d = 2`: `n²R0/2 + n(R0/2 + R1) + log n R2 + [C + γR2 + Σ_{l>=2} ζ(l) R_{l+1}]`
/// * `d >= 3`: `n^d R0/d + n^{d−1}(R0/2 + R1/(d−1))
///    + n^{d−2}((d−1)R0/12 + R1/2 + R2/(d−2)) + log n R_d`
///
/// where `C = Tr(π_0 G) + c_constant(ts)`.
pub fn prop3_predict(ts: &TraceSequence, n: usize) -> Result<C> {
    let d = ts.d as usize;
    if ts.residues.len() < d + 1 {
        return Err(LabError::MissingResidues { needed: d + 1, have: ts.residues.len() });
    }
    let r = |l: usize| ts.residues.get(l).copied().unwrap_or(C::new(0.0, 0.0));
    let nf = n as f64;
    let ln = nf.ln();
    Ok(match d {
        1 => {
            let zsum: C = (2..ts.residues.len()).map(|l| r(l) * zeta(l as u32)).sum();
            let c0 = ts.traces[0] + c_constant(ts)? + r(1) * EULER_GAMMA + zsum;
            r(0) * nf + r(1) * ln + c0 + (r(1) * 0.5 - r(2)) / nf
        }
        2 => {
            let zsum: C = (3..ts.residues.len()).map(|l| r(l) * zeta(l as u32 - 1)).sum();
            let c0 = ts.traces[0] + c_constant(ts)? + r(2) * EULER_GAMMA + zsum;
            r(0) * (0.5 * nf * nf) + (r(0) * 0.5 + r(1)) * nf + r(2) * ln + c0
        }
        _ => {
            let df = d as f64;
            r(0) * (nf.powi(d as i32) / df)
                + (r(0) * 0.5 + r(1) / (df - 1.0)) * nf.powi(d as i32 - 1)
                + (r(0) * ((df - 1.0) / 12.0) + r(1) * 0.5 + r(2) / (df - 2.0)) * nf.powi(d as i32 - 2)
                + r(d) * ln
        }
    })
}

/// Remainder exponent of [`prop3_predict`]: `−2`, `−1`, `d − 3`.
pub fn prop3_remainder_exponent(d: u32) -> i32 {
    match d {
        1 => -2,
        2 => -1,
        d => d as i32 - 3,
    }
}

/// Residues fitted by least squares, with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueFit {
    pub residues: Vec<C>,
    pub condition: f64,
    pub residual_norm: f64,
    pub points: Vec<usize>,
}

/// Largest condition number [`fit_residues`] accepts.
pub const MAX_CONDITION: f64 = 1e12;

/// Fits `Tr(π_k G) ≈ Σ_{l=0}^{L} R_l k^{d−1−l}` on log-spaced `k` in
/// `window` (inclusive), equal weights. Columns are normalised before the
/// SVD; the reported condition number is that of the normalised system.
pub fn fit_residues(traces: &[C], d: u32, window: (usize, usize), l_max: usize) -> Result<ResidueFit> {
    let (lo, hi) = window;
    if lo < 1 || hi >= traces.len() || lo >= hi {
        return Err(LabError::InvalidArgument(format!("bad window {lo}..={hi}")));
    }
    let width = hi - lo + 1;
    let nb = l_max + 1;
    if 2 * nb > width {
        return Err(LabError::InvalidArgument(format!("L = {l_max} too large for window of {width}")));
    }
    let target = width.min((16 * nb).max(64));
    let points = log_spaced(lo, hi, target);
    let basis = |k: f64, l: usize| k.powi(d as i32 - 1 - l as i32);
    let mut a = DMatrix::<f64>::from_fn(points.len(), nb, |i, l| basis(points[i] as f64, l));
    let mut norms = vec![0.0; nb];
    for (l, nrm) in norms.iter_mut().enumerate() {
        *nrm = a.column(l).norm();
        a.column_mut(l).scale_mut(1.0 / *nrm);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(LabError::IllConditioned { condition });
    }
    let mut residues = vec![C::new(0.0, 0.0); nb];
    let mut residual_norm: f64 = 0.0;
    for part in 0..2 {
        let pick = |z: C| if part == 0 { z.re } else { z.im };
        let b = DVector::from_iterator(points.len(), points.iter().map(|&k| pick(traces[k])));
        let x = svd.solve(&b, 0.0).map_err(|e| LabError::InvalidArgument(e.into()))?;
        let res = &a * &x - &b;
        residual_norm = residual_norm.max(res.amax());
        for l in 0..nb {
            let v = x[l] / norms[l];
            if part == 0 {
                residues[l].re = v;
            } else {
                residues[l].im = v;
            }
        }
    }
    Ok(ResidueFit { residues, condition, residual_norm, points })
}

/// About `count` distinct integers spread logarithmically over `lo..=hi`.
pub fn log_spaced(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    if count > hi - lo {
        return (lo..=hi).collect();
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<usize> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as usize)
        .map(|k| k.clamp(lo, hi))
        .collect();
    out.dedup();
    out
}
