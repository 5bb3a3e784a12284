pub mod combinatorics;
pub mod funcmaps;
pub mod prop3;
pub mod randomwalk;
pub mod szego;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Seeded generator; `salt` keeps independent streams per sweep.
pub fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt)
}

/// Resolved config plus the run flags that change verdicts.
pub fn echo(cfg: &impl Serialize, tolerance_scale: f64) -> serde_json::Value {
    serde_json::json!({ "config": cfg, "tolerance_scale": tolerance_scale })
}
