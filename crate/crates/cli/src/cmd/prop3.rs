use anyhow::Result;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use szego_lab::report::{Case, Report};
use szego_lab::tracesum::{
    c_constant, fit_residues, power_sum, prop3_predict, prop3_remainder_exponent, zeta, TraceSequence,
};

use super::echo;
use crate::Ctx;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub dims: Vec<u32>,
    /// Prescribed `R_0, R_1, ...`.
    pub residues: Vec<f64>,
    /// Ratio of the geometric tail added to the synthetic traces.
    pub tail_ratio: f64,
    pub kmax: usize,
    pub fit_window: (usize, usize),
    pub fit_order: usize,
    pub n_range: (usize, usize),
    /// Partial sums at this `n` are compared with the harmonic and ζ expansions.
    pub power_sum_n: u64,
    pub tol_power_sum: f64,
    pub tol_constant: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            dims: vec![1, 2, 3],
            residues: vec![1.5, -0.7, 0.4, 0.25, -0.1],
            tail_ratio: 0.5,
            kmax: 600,
            fit_window: (60, 600),
            fit_order: 4,
            n_range: (16, 256),
            power_sum_n: 100,
            tol_power_sum: 1e-4,
            tol_constant: 1e-10,
        }
    }
}

const ROUND_TRIP: &str = "partial sums of per-level traces against the residue model";
const POWER_SUM: &str = "power sums against harmonic and zeta expansions";
const CONSTANT: &str = "regularized trace constant of a geometric tail";

pub fn run(cfg: Config, ctx: &Ctx) -> Result<Report> {
    anyhow::ensure!(cfg.n_range.0 >= 1 && cfg.n_range.0 <= cfg.n_range.1, "bad n_range");
    anyhow::ensure!(cfg.n_range.1 <= cfg.kmax, "n_range exceeds kmax");
    anyhow::ensure!(cfg.tail_ratio.abs() < 1.0, "tail_ratio must lie in (-1, 1)");
    let mut report = Report::new("prop3", echo(&cfg, ctx.tolerance_scale));
    let res: Vec<C> = cfg.residues.iter().map(|&r| C::new(r, 0.0)).collect();
    let tail = |k: usize| C::new(cfg.tail_ratio.powi(k as i32), 0.0);
    // bound on |err|/n^e: the omitted residue size plus the tail sum
    let bound = cfg.residues.iter().map(|r| r.abs()).sum::<f64>() + 1.0;

    for &d in &cfg.dims {
        let name = format!("round_trip d={d}");
        let case = (|| -> szego_lab::Result<Case> {
            let ts = TraceSequence::synthetic(d, res.clone(), cfg.kmax, tail)?;
            let fit = fit_residues(&ts.traces, d, cfg.fit_window, cfg.fit_order)?;
            let refit = TraceSequence::new(d, ts.traces.clone(), fit.residues)?;
            let e = prop3_remainder_exponent(d);
            let mut worst: f64 = 0.0;
            for n in cfg.n_range.0..=cfg.n_range.1 {
                let err = (refit.partial_sum(n) - prop3_predict(&refit, n)?).norm();
                worst = worst.max(err / (n as f64).powi(e));
            }
            Ok(Case::compare(&name, ROUND_TRIP, worst, format!("n^{e}"), worst, ctx.tol(bound)))
        })()
        .unwrap_or_else(|e| Case::errored(&name, ROUND_TRIP, e));
        report.push(case);
    }

    let n = cfg.power_sum_n;
    for (m, label) in [(-1, "harmonic"), (-2, "zeta(2)"), (-3, "zeta(3)")] {
        let name = format!("power_sum {label} n={n}");
        let case = match power_sum(n, m) {
            Ok(s) => {
                let rhs = if m == -3 { zeta(3) } else { s.predicted };
                Case::compare(&name, POWER_SUM, s.exact, rhs, (s.exact - rhs).abs(), ctx.tol(cfg.tol_power_sum))
            }
            Err(e) => Case::errored(&name, POWER_SUM, e),
        };
        report.push(case);
    }

    let name = "constant geometric_tail";
    let case = (|| -> szego_lab::Result<Case> {
        let ts = TraceSequence::synthetic(1, vec![C::new(0.0, 0.0); 2], cfg.kmax, tail)?;
        let got = c_constant(&ts)?.re;
        let want = cfg.tail_ratio / (1.0 - cfg.tail_ratio);
        Ok(Case::compare(name, CONSTANT, got, want, (got - want).abs(), ctx.tol(cfg.tol_constant)))
    })()
    .unwrap_or_else(|e| Case::errored(name, CONSTANT, e));
    report.push(case);
    ctx.write(
        "prop3_traces.csv",
        &TraceSequence::synthetic(1, res.clone(), cfg.n_range.1, tail)?.to_csv(),
    )?;
    Ok(report)
}
