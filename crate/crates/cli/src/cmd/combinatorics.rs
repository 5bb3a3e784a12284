use anyhow::Result;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use szego_lab::combinatorics::{
    cf_bst_both_sides, ghd_lhs, ghd_rhs, hd_classic_rhs, EnumerationBudget, IntVector, DEFAULT_MAX_LEN,
};
use szego_lab::report::{Case, Report};
use szego_lab::LabError;

use super::{echo, rng};
use crate::Ctx;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Vector lengths `1..=max_len`.
    pub max_len: usize,
    /// Powers `1..=max_power` for the generalized identity.
    pub max_power: u32,
    pub samples: usize,
    /// Entries are drawn uniformly from `[-range, range]`.
    pub range: f64,
    pub seed: u64,
    /// Largest length enumeration is allowed to touch.
    pub budget: usize,
    pub tol_ghd: f64,
    pub tol_cf: f64,
    pub tol_hd: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            max_len: 6,
            max_power: 4,
            samples: 50,
            range: 3.0,
            seed: 0,
            budget: DEFAULT_MAX_LEN,
            tol_ghd: 1e-9,
            tol_cf: 1e-9,
            tol_hd: 1e-12,
        }
    }
}

const HD: &str = "Hunt-Dyson identity (power 1)";
const GHD: &str = "generalized Hunt-Dyson identity";
const CF: &str = "composition form of Bohnenblust-Spitzer";

type TestFn = fn(f64) -> f64;
const FUNCTIONS: [(&str, TestFn); 4] =
    [("x", |x| x), ("x^2", |x| x * x), ("exp(0.3x)", |x| (0.3 * x).exp()), ("cos", f64::cos)];

/// Worst sample `(lhs, rhs, err)`; errors from the first failing sample.
fn worst<F>(vectors: &[Vec<f64>], f: F) -> std::result::Result<(f64, f64, f64), LabError>
where
    F: Fn(&IntVector) -> std::result::Result<(f64, f64, f64), LabError> + Sync,
{
    let all: Vec<_> = vectors.par_iter().map(|v| f(&IntVector::new(v.clone())?)).collect();
    let mut best: Option<(f64, f64, f64)> = None;
    for r in all {
        let r = r?;
        if best.is_none_or(|b| r.2 > b.2 || r.2.is_nan()) {
            best = Some(r);
        }
    }
    Ok(best.unwrap_or_default())
}

fn push(report: &mut Report, name: String, identity: &str, tol: f64, r: std::result::Result<(f64, f64, f64), LabError>) {
    report.push(match r {
        Ok((l, rh, err)) => Case::compare(name, identity, l, rh, err, tol),
        Err(e) => Case::errored(name, identity, e),
    });
}

pub fn run(mut cfg: Config, ctx: &Ctx) -> Result<Report> {
    anyhow::ensure!(cfg.max_len >= 1 && cfg.max_power >= 1 && cfg.samples >= 1, "max_len, max_power and samples must be positive");
    anyhow::ensure!(cfg.budget >= 1, "budget must be positive");
    if let Some(s) = ctx.seed {
        cfg.seed = s;
    }
    let budget = EnumerationBudget { max_len: cfg.budget };
    let mut report = Report::new("combinatorics", echo(&cfg, ctx.tolerance_scale));
    for m in 1..=cfg.max_len {
        let mut r = rng(cfg.seed, m as u64);
        let vectors: Vec<Vec<f64>> =
            (0..cfg.samples).map(|_| (0..m).map(|_| r.gen_range(-cfg.range..=cfg.range)).collect()).collect();

        let hd = worst(&vectors, |v| {
            let (l, rh) = (ghd_lhs(v, 1, budget)?, hd_classic_rhs(v));
            Ok((l, rh, (l - rh).abs() / rh.abs().max(1.0)))
        });
        push(&mut report, format!("hd m={m}"), HD, ctx.tol(cfg.tol_hd), hd);

        for n in 1..=cfg.max_power {
            let res = worst(&vectors, |v| {
                let (l, rh) = (ghd_lhs(v, n, budget)?, ghd_rhs(v, n, budget)?);
                Ok((l, rh, (l - rh).abs() / l.abs().max(1.0)))
            });
            push(&mut report, format!("ghd m={m} n={n}"), GHD, ctx.tol(cfg.tol_ghd), res);
        }

        for (fname, f) in FUNCTIONS {
            let res = worst(&vectors, |v| {
                let (l, rh): (f64, f64) = cf_bst_both_sides(v, f, budget)?;
                Ok((l, rh, (l - rh).abs()))
            });
            push(&mut report, format!("cf_bst m={m} f={fname}"), CF, ctx.tol(cfg.tol_cf), res);
        }
    }
    Ok(report)
}
