//! Symbols as they appear in config files.

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use szego_lab::circle_op::{fourier_coeffs_real, TrigPoly};
use szego_lab::Result;

/// Fourier modes kept for analytic presets.
const PRESET_MODES: usize = 40;
const PRESET_POINTS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Symbol {
    /// `exp(a cos x)`
    ExpCos { a: f64 },
    /// `1 + c cos x`
    OnePlusCCos { c: f64 },
    /// `a0 + c cos(kx)`
    Cosine {
        a0: f64,
        c: f64,
        #[serde(default = "one")]
        k: i64,
    },
    /// Explicit coefficients as `[k, re, im]` triples.
    Modes { modes: Vec<(i64, f64, f64)> },
    Zero,
}

fn one() -> i64 {
    1
}

impl Symbol {
    pub fn to_poly(&self) -> Result<TrigPoly> {
        match *self {
            Symbol::ExpCos { a } => fourier_coeffs_real(|x| (a * x.cos()).exp(), PRESET_MODES, PRESET_POINTS),
            Symbol::OnePlusCCos { c } => Ok(TrigPoly::cosine(1.0, c, 1)),
            Symbol::Cosine { a0, c, k } => Ok(TrigPoly::cosine(a0, c, k)),
            Symbol::Modes { ref modes } => {
                let m: Vec<(i64, C)> = modes.iter().map(|&(k, re, im)| (k, C::new(re, im))).collect();
                Ok(TrigPoly::from_modes(&m))
            }
            Symbol::Zero => Ok(TrigPoly::zero()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Symbol::Zero => true,
            Symbol::Cosine { a0, c, .. } => *a0 == 0.0 && *c == 0.0,
            Symbol::Modes { modes } => modes.iter().all(|m| m.1 == 0.0 && m.2 == 0.0),
            _ => false,
        }
    }
}
