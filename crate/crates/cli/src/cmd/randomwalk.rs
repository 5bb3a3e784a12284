use anyhow::Result;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use szego_lab::randwalk::{enumerate_lhs_with, formula_rhs_coeff, StepDist};
use szego_lab::report::{Case, Report};

use super::echo;
use crate::Ctx;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub distributions: Vec<StepDist>,
    /// All `p, q >= 1` with `p + q <= max_total`.
    pub max_total: usize,
    /// Frequencies used for both `α` and `β`.
    pub frequencies: Vec<f64>,
    pub budget: usize,
    pub tolerance: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            distributions: vec![
                StepDist::symmetric(),
                StepDist::new(vec![-1.0, 0.0, 2.0], vec![0.5, 0.3, 0.2]).expect("valid law"),
            ],
            max_total: 6,
            frequencies: vec![-2.0, -0.7, 0.0, 0.9, std::f64::consts::PI],
            budget: szego_lab::randwalk::DEFAULT_PATH_BUDGET,
            tolerance: 1e-9,
        }
    }
}

/// `(α, β, |lhs|, |rhs|, |lhs − rhs|)` at one grid point.
type Point = (f64, f64, f64, f64, f64);

const WALK: &str = "joint characteristic function of S_p and T_{p+q}";

pub fn run(cfg: Config, ctx: &Ctx) -> Result<Report> {
    anyhow::ensure!(!cfg.distributions.is_empty(), "no step distributions");
    anyhow::ensure!(!cfg.frequencies.is_empty(), "no frequencies");
    let mut report = Report::new("randomwalk", echo(&cfg, ctx.tolerance_scale));
    for (di, dist) in cfg.distributions.iter().enumerate() {
        for p in 1..cfg.max_total {
            for q in 1..=cfg.max_total - p {
                let grid: Vec<(f64, f64)> =
                    cfg.frequencies.iter().flat_map(|&a| cfg.frequencies.iter().map(move |&b| (a, b))).collect();
                let vals: Vec<szego_lab::Result<Point>> = grid
                    .par_iter()
                    .map(|&(a, b)| {
                        let l = enumerate_lhs_with(dist, p, q, a, b, cfg.budget)?;
                        let r = formula_rhs_coeff(dist, p, q, a, b, cfg.budget)?;
                        Ok((a, b, l.norm(), r.norm(), (l - r).norm()))
                    })
                    .collect();
                let name = format!("walk dist={di} p={p} q={q}");
                let case = match vals.into_iter().collect::<szego_lab::Result<Vec<_>>>() {
                    Ok(v) => {
                        let w = v.iter().copied().fold(v[0], |acc, x| if x.4 > acc.4 { x } else { acc });
                        Case::compare(
                            &name,
                            WALK,
                            serde_json::json!({ "alpha": w.0, "beta": w.1, "abs": w.2 }),
                            serde_json::json!({ "alpha": w.0, "beta": w.1, "abs": w.3 }),
                            w.4,
                            ctx.tol(cfg.tolerance),
                        )
                    }
                    Err(e) => Case::errored(&name, WALK, e),
                };
                report.push(case);
            }
        }
    }
    Ok(report)
}
