use anyhow::Result;
use num_complex::Complex64 as C;
use rand::Rng;
use serde::{Deserialize, Serialize};

use szego_lab::funcmaps::{phi_merge_check, w2_integral, w2_log, w2_monomial};
use szego_lab::omega::{omega1, omega1_blocks, omega2, omega2_blocks, omega3, omega3_blocks, split_one, split_two, OmegaArgs};
use szego_lab::report::{Case, Report};

use super::{echo, rng};
use crate::Ctx;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub samples: usize,
    pub merge_max_p: usize,
    pub w2_grid: usize,
    pub w2_max_degree: usize,
    /// Split identities are checked exhaustively up to this length.
    pub split_max_len: u32,
    pub split_range: i64,
    pub tol_merge: f64,
    pub tol_w2: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 200,
            merge_max_p: 8,
            w2_grid: 10,
            w2_max_degree: 6,
            split_max_len: 6,
            split_range: 3,
            tol_merge: 1e-12,
            tol_w2: 1e-8,
        }
    }
}

const MERGE: &str = "Phi-merge identity";
const W2: &str = "W2 integral representation";
const W2_LOG: &str = "W2 closed form for log with base point 1";
const SPLIT: &str = "min-splitting identities";
const OMEGA: &str = "Omega transcriptions agree";

pub fn run(mut cfg: Config, ctx: &Ctx) -> Result<Report> {
    anyhow::ensure!(cfg.w2_grid >= 2 && cfg.samples >= 1, "w2_grid >= 2 and samples >= 1 required");
    anyhow::ensure!(cfg.split_range >= 0 && cfg.split_max_len >= 2, "bad split settings");
    if let Some(s) = ctx.seed {
        cfg.seed = s;
    }
    let mut report = Report::new("funcmaps", echo(&cfg, ctx.tolerance_scale));

    for p in 3..=cfg.merge_max_p {
        let mut r = rng(cfg.seed, 100 + p as u64);
        let mut worst = (C::new(0.0, 0.0), C::new(0.0, 0.0), 0.0);
        let mut failure = None;
        for _ in 0..cfg.samples {
            let mut draw =
                || -> Vec<C> { (0..p - 2).map(|_| C::new(r.gen_range(-0.8..0.8), r.gen_range(-0.8..0.8))).collect() };
            let (x, y, z) = (draw(), draw(), draw());
            match phi_merge_check(p, &x, &y, &z) {
                Ok((l, rh)) if (l - rh).norm() >= worst.2 => worst = (l, rh, (l - rh).norm()),
                Ok(_) => {}
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
        }
        let name = format!("merge p={p}");
        report.push(match failure {
            None => Case::compare(
                &name,
                MERGE,
                [worst.0.re, worst.0.im],
                [worst.1.re, worst.1.im],
                worst.2,
                ctx.tol(cfg.tol_merge),
            ),
            Some(e) => Case::errored(&name, MERGE, e),
        });
    }

    let grid: Vec<f64> = (0..cfg.w2_grid).map(|i| 0.5 + 1.5 * i as f64 / (cfg.w2_grid - 1) as f64).collect();
    for m in 1..=cfg.w2_max_degree as i32 {
        let fp = move |x: f64| m as f64 * x.powi(m - 1);
        let fpp = move |x: f64| (m * (m - 1)) as f64 * x.powi((m - 2).max(0));
        let mut worst = (0.0, 0.0, 0.0);
        for &x1 in &grid {
            for &x2 in &grid {
                let v = w2_integral(&fp, &fpp, x1, x2, 0.0, 1e-12);
                let want = w2_monomial(m as usize, C::new(x1, 0.0), C::new(x2, 0.0)).re;
                if (v - want).abs() >= worst.2 {
                    worst = (v, want, (v - want).abs());
                }
            }
        }
        report.push(Case::compare(format!("w2 z^{m}"), W2, worst.0, worst.1, worst.2, ctx.tol(cfg.tol_w2)));
    }

    let fp = |x: f64| 1.0 / x;
    let fpp = |x: f64| -1.0 / (x * x);
    let mut worst = (0.0, 0.0, 0.0);
    for &x1 in &grid {
        for &x2 in &grid {
            let v = w2_integral(&fp, &fpp, x1, x2, 1.0, 1e-12);
            let want = w2_log(x1, x2)?;
            if (v - want).abs() >= worst.2 {
                worst = (v, want, (v - want).abs());
            }
        }
    }
    report.push(Case::compare("w2 log", W2_LOG, worst.0, worst.1, worst.2, ctx.tol(cfg.tol_w2)));

    let (checked, bad) = splits(cfg.split_max_len, cfg.split_range)?;
    report.push(Case::compare(
        format!("splits len<={} range={}", cfg.split_max_len, cfg.split_range),
        SPLIT,
        checked,
        checked - bad,
        bad as f64,
        0.0,
    ));

    let mut r = rng(cfg.seed, 7);
    let mut draw = |len: usize| -> Vec<i64> { (0..len).map(|_| r.gen_range(-4..=4)).collect() };
    let mut mismatches = 0u64;
    for i in 0..cfg.samples {
        let (k1, k2) = (draw(1)[0], draw(1)[0]);
        let (a, b, c) = (draw(1 + i % 3), draw(1 + (i / 3) % 3), draw(1 + (i / 9) % 3));
        let args = OmegaArgs::new((k1, k2), a, b, c);
        let pairs = [
            (omega1(&args)?, omega1_blocks(&args)?),
            (omega2(&args)?, omega2_blocks(&args)?),
            (omega3(&args)?, omega3_blocks(&args)?),
        ];
        mismatches += pairs.iter().filter(|(x, y)| x != y || *x > 0).count() as u64;
    }
    report.push(Case::compare("omega transcriptions", OMEGA, cfg.samples * 3, mismatches, mismatches as f64, 0.0));
    Ok(report)
}

/// Exhaustive split checks over vectors with entries in `[-range, range]`.
fn splits(max_len: u32, range: i64) -> Result<(u64, u64)> {
    let side = (2 * range + 1) as u64;
    let (mut checked, mut bad) = (0u64, 0u64);
    for len in 2..=max_len {
        let total = side.checked_pow(len).ok_or_else(|| anyhow::anyhow!("split enumeration overflows"))?;
        anyhow::ensure!(total <= 100_000_000, "split enumeration of {total} vectors exceeds budget");
        let mut mu = vec![-range; len as usize];
        for _ in 0..total {
            for j in 1..len as usize {
                let (a, b) = split_one(&mu, j)?;
                bad += (a != b) as u64;
                checked += 1;
                if j + 2 <= len as usize {
                    let (a, b) = split_two(&mu, j)?;
                    bad += (a != b) as u64;
                    checked += 1;
                }
            }
            for v in mu.iter_mut() {
                *v += 1;
                if *v <= range {
                    break;
                }
                *v = -range;
            }
        }
    }
    Ok((checked, bad))
}
