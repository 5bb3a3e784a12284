use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use szego_lab::circle_op::{build_operator, check_positive, series_csv, TrigPoly};
use szego_lab::funcmaps::PowerSeries;
use szego_lab::report::{Case, Report};
use szego_lab::szego::{
    expansion_pipeline, relative_error, sslt_constant, trace_difference, upsilon_series_with, ExpansionConfig,
    Truncation,
};

use super::echo;
use crate::symbol::Symbol;
use crate::Ctx;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub b0: Symbol,
    pub bsub: Symbol,
    /// Test functions as coefficient lists `[c1, c2, ...]` of `Σ c_m z^m`.
    pub functions: Vec<Vec<f64>>,
    /// `n` values at which the remainder is compared with its value at `2n`.
    pub order_n: Vec<usize>,
    /// Trace-difference series written to CSV: `n = step, 2·step, ..., max`.
    pub series_max: usize,
    pub series_step: usize,
    /// Strong-limit check is run at this `n` when `bsub` is zero.
    pub sslt_n: usize,
    pub expansion: ExpansionConfig,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub sslt: f64,
    /// Accepted `|R(n)/R(2n)|` band for an `n^{-2}` remainder.
    pub ratio_band: (f64, f64),
    /// Remainders below this are treated as exact and checked in absolute terms.
    pub remainder_floor: f64,
    pub c1: f64,
    pub c_log: f64,
    pub c0: f64,
    pub c_minus1: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { sslt: 1e-6, ratio_band: (2.8, 5.5), remainder_floor: 1e-10, c1: 1e-3, c_log: 5e-2, c0: 5e-2, c_minus1: 5e-2 }
    }
}

impl Default for Config {
    fn default() -> Self {
        Self {
            b0: Symbol::OnePlusCCos { c: 0.2 },
            bsub: Symbol::Cosine { a0: 0.0, c: 0.1, k: 1 },
            functions: vec![vec![0.0, 1.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0, 1.0]],
            order_n: vec![32, 64],
            series_max: 128,
            series_step: 4,
            sslt_n: 64,
            expansion: ExpansionConfig::default(),
            tolerances: Tolerances::default(),
        }
    }
}

const SSLT: &str = "strong Szego limit theorem";
const ORDER: &str = "trace difference minus Upsilon_2 + Upsilon_3,sub/n is O(n^-2)";
const EXPANSION: &str = "log-determinant expansion c1 n + c_log log n + c0 + c_-1/n";

fn label(f: &[f64]) -> String {
    let terms: Vec<String> = f
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(i, c)| if *c == 1.0 { format!("z^{}", i + 1) } else { format!("{c}z^{}", i + 1) })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join("+")
    }
}

/// `Tr f(P_nBP_n) − Tr P_n f(B) P_n` for a polynomial `f`.
fn poly_difference(b0: &TrigPoly, bsub: &TrigPoly, f: &[f64], n: usize) -> szego_lab::Result<f64> {
    let mut acc = 0.0;
    for (i, &c) in f.iter().enumerate() {
        if c != 0.0 && i >= 1 {
            acc += c * trace_difference(b0, bsub, n, i + 1)?;
        }
    }
    Ok(acc)
}

pub fn run(cfg: Config, ctx: &Ctx) -> Result<Report> {
    let b0 = cfg.b0.to_poly().context("b0")?;
    let bsub = cfg.bsub.to_poly().context("bsub")?;
    check_positive(&b0).context("b0 must be a positive real symbol")?;
    anyhow::ensure!(cfg.series_step >= 1, "series_step must be positive");
    for f in &cfg.functions {
        anyhow::ensure!(!f.is_empty(), "empty test function");
    }
    let tol = &cfg.tolerances;
    let mut report = Report::new("szego", echo(&cfg, ctx.tolerance_scale));

    if cfg.bsub.is_zero() {
        let name = format!("sslt n={}", cfg.sslt_n);
        let case = (|| -> szego_lab::Result<Case> {
            let op = build_operator(&b0, &bsub, cfg.sslt_n)?;
            let logs = op.log_det_series(cfg.sslt_n)?;
            let lam0 = szego_lab::circle_op::log_symbol(&b0, 64)?.coeff(0).re;
            let lhs = logs[cfg.sslt_n].re - (2 * cfg.sslt_n + 1) as f64 * lam0;
            let rhs = sslt_constant(&b0)?;
            Ok(Case::compare(&name, SSLT, lhs, rhs, (lhs - rhs).abs(), ctx.tol(tol.sslt)))
        })()
        .unwrap_or_else(|e| Case::errored(&name, SSLT, e));
        report.push(case);
    }

    let (lo, hi) = tol.ratio_band;
    let centre = (lo + hi) / 2.0;
    for f in &cfg.functions {
        let series = PowerSeries::from_real(f)?;
        let ups = upsilon_series_with(&series, &b0, &bsub, Truncation::Exact)?;
        let remainder = |n: usize| -> szego_lab::Result<f64> {
            Ok(poly_difference(&b0, &bsub, f, n)? - ups.upsilon2 - ups.upsilon3_sub / n as f64)
        };
        for &n in &cfg.order_n {
            let name = format!("order f={} n={n}", label(f));
            let case = match (remainder(n), remainder(2 * n)) {
                (Ok(r1), Ok(r2)) if r1.abs() <= tol.remainder_floor => {
                    Case::compare(&name, ORDER, r1, 0.0, r1.abs().max(r2.abs()), ctx.tol(tol.remainder_floor))
                }
                (Ok(r1), Ok(r2)) => {
                    let ratio = (r1 / r2).abs();
                    Case::compare(&name, ORDER, ratio, [lo, hi], (ratio - centre).abs(), ctx.tol((hi - lo) / 2.0))
                }
                (Err(e), _) | (_, Err(e)) => Case::errored(&name, ORDER, e),
            };
            report.push(case);
        }
    }

    if let Some(f) = cfg.functions.first() {
        let ns: Vec<usize> = (cfg.series_step..=cfg.series_max).step_by(cfg.series_step).collect();
        let rows: Vec<szego_lab::Result<(usize, f64)>> =
            ns.par_iter().map(|&n| Ok((n, poly_difference(&b0, &bsub, f, n)?))).collect();
        let rows: Vec<(usize, f64)> = rows.into_iter().collect::<szego_lab::Result<_>>()?;
        ctx.write("trace_difference.csv", &series_csv("trace_difference", &rows))?;
    }

    match expansion_pipeline(&b0, &bsub, &cfg.expansion) {
        Ok(out) => {
            let p = out.prediction;
            ctx.write("log_det.csv", &series_csv("log_det", &out.log_det))?;
            ctx.write("traces.csv", &out.traces.to_csv())?;
            ctx.write("residues.json", &(serde_json::to_string_pretty(&out.traces.residue_sidecar())? + "\n"))?;
            let fit4 = out.fit4.with_predictions(
                vec![Some(p.c1), Some(p.c_log), Some(p.c0), Some(p.c_minus1)],
                vec![Some(ctx.tol(tol.c1)), Some(ctx.tol(tol.c_log)), Some(ctx.tol(tol.c0)), None],
            );
            let fit5 = out.fit5.with_predictions(
                vec![Some(p.c1), Some(p.c_log), Some(p.c0), Some(p.c_minus1), None],
                vec![
                    Some(ctx.tol(tol.c1)),
                    Some(ctx.tol(tol.c_log)),
                    Some(ctx.tol(tol.c0)),
                    Some(ctx.tol(tol.c_minus1)),
                    None,
                ],
            );
            ctx.write("fit4.json", &(serde_json::to_string_pretty(&fit4)? + "\n"))?;
            ctx.write("fit5.json", &(serde_json::to_string_pretty(&fit5)? + "\n"))?;
            let c = &fit5.coefficients;
            for (i, (name, pred, t)) in
                [("c1", p.c1, tol.c1), ("c_log", p.c_log, tol.c_log), ("c0", p.c0, tol.c0), ("c_minus1", p.c_minus1, tol.c_minus1)]
                    .into_iter()
                    .enumerate()
            {
                report.push(Case::compare(name, EXPANSION, c[i], pred, relative_error(c[i], pred), ctx.tol(t)));
            }
        }
        Err(e) => report.push(Case::errored("expansion", EXPANSION, e)),
    }
    Ok(report)
}
