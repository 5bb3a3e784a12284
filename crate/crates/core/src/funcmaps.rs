//! Multilinear maps acting on power series without constant term.
//!
//! Each map is defined on monomials `z^m` and extended linearly. The monomial
//! forms are the evaluation path; the integral representations
//! ([`w2_integral`], [`w2_tilde_integral`], [`phi2_integral`]) exist only to
//! cross-check them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combinatorics::for_each_composition;
use crate::error::{LabError, Result};
use crate::quad;

type C = Complex64;

/// Above this degree composition sums switch from enumeration to the
/// generating-product recursion.
pub const ENUMERATION_MAX_DEGREE: usize = 20;

/// `f(z) = Σ_{m=1}^{M} c_m z^m`; `coeffs[0]` is `c_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries {
    coeffs: Vec<C>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<C>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(LabError::InvalidArgument("power series needs degree >= 1".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| C::new(c, 0.0)).collect())
    }

    /// `z^m`.
    pub fn monomial(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(LabError::InvalidArgument("monomial degree must be >= 1".into()));
        }
        let mut c = vec![C::new(0.0, 0.0); m];
        c[m - 1] = C::new(1.0, 0.0);
        Ok(Self { coeffs: c })
    }

    /// `a z / (1 − a z)` truncated at degree `degree`.
    pub fn geometric(a: C, degree: usize) -> Result<Self> {
        Self::new((1..=degree).map(|m| a.powu(m as u32)).collect())
    }

    /// `log(1 + z)` truncated at degree `degree`.
    pub fn log1p(degree: usize) -> Result<Self> {
        Self::new(
            (1..=degree)
                .map(|m| C::new(if m % 2 == 1 { 1.0 } else { -1.0 } / m as f64, 0.0))
                .collect(),
        )
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Coefficient of `z^m` (zero outside `1..=degree`).
    pub fn coeff(&self, m: usize) -> C {
        if m == 0 || m > self.coeffs.len() {
            C::new(0.0, 0.0)
        } else {
            self.coeffs[m - 1]
        }
    }

    /// `α·self + β·other`.
    pub fn combine(&self, alpha: C, other: &PowerSeries, beta: C) -> PowerSeries {
        let deg = self.degree().max(other.degree());
        PowerSeries {
            coeffs: (1..=deg).map(|m| alpha * self.coeff(m) + beta * other.coeff(m)).collect(),
        }
    }

    /// `z^{−2}(f − T_t[f])` for `t >= 2`: drops `c_1..c_t` and shifts by two.
    /// `None` when nothing survives.
    pub fn taylor_tail_shifted(&self, t: usize) -> Option<PowerSeries> {
        debug_assert!(t >= 2);
        if self.degree() <= t {
            return None;
        }
        // new coefficient of z^k is c_{k+2}, kept only for k + 2 > t
        let coeffs: Vec<C> = (1..=self.degree() - 2)
            .map(|k| if k + 2 > t { self.coeff(k + 2) } else { C::new(0.0, 0.0) })
            .collect();
        Some(PowerSeries { coeffs })
    }
}

/// Output of a map evaluation together with its arity and the degree used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapValue {
    pub value: C,
    pub arity: usize,
    pub degree: usize,
}

/// Maps that can be applied to a [`PowerSeries`] through [`apply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapKind {
    W2,
    W2Tilde,
    W3,
    F(usize),
    Phi(usize),
}

impl MapKind {
    pub fn arity(self) -> usize {
        match self {
            MapKind::W2 | MapKind::W2Tilde => 2,
            MapKind::W3 => 3,
            MapKind::F(j) | MapKind::Phi(j) => j,
        }
    }
}

/// Applies `kind` to `f` at `x` by linearity over monomials.
pub fn apply(kind: MapKind, f: &PowerSeries, x: &[C]) -> Result<MapValue> {
    check_arity(kind.arity(), x)?;
    let value = match kind {
        MapKind::Phi(j) => phi_series(j, f, x)?,
        _ => {
            let mut acc = C::new(0.0, 0.0);
            for m in 1..=f.degree() {
                let c = f.coeff(m);
                if c == C::new(0.0, 0.0) {
                    continue;
                }
                let v = match kind {
                    MapKind::W2 => w2_monomial(m, x[0], x[1]),
                    MapKind::W2Tilde => w2_tilde_monomial(m, x[0], x[1]),
                    MapKind::W3 => w3_monomial(m, x[0], x[1], x[2]),
                    MapKind::F(j) => f_map_monomial(j, m, x)?,
                    MapKind::Phi(_) => unreachable!(),
                };
                acc += c * v;
            }
            acc
        }
    };
    Ok(MapValue { value, arity: kind.arity(), degree: f.degree() })
}

fn check_arity(j: usize, x: &[C]) -> Result<()> {
    if x.len() != j {
        return Err(LabError::LengthMismatch { expected: j, got: x.len() });
    }
    Ok(())
}

/// `W2[z^m](x1, x2) = (m/2) Σ_{j=1}^{m−1} x1^j x2^{m−j} / (j(m−j))`.
pub fn w2_monomial(m: usize, x1: C, x2: C) -> C {
    let mut acc = C::new(0.0, 0.0);
    for j in 1..m {
        acc += x1.powu(j as u32) * x2.powu((m - j) as u32) / (j * (m - j)) as f64;
    }
    acc * (m as f64 / 2.0)
}

/// `W2[log](x1, x2) = −½ log x1 log x2`, integrals taken from base point 1.
pub fn w2_log(x1: f64, x2: f64) -> Result<f64> {
    if x1 <= 0.0 || x2 <= 0.0 {
        return Err(LabError::InvalidArgument("w2_log needs positive arguments".into()));
    }
    Ok(-0.5 * x1.ln() * x2.ln())
}

/// `W̃2[z^m](x1, x2) = (m/2) Σ_{j=1}^{m−1} x1^j x2^{m−1−j} / j`. Not symmetric.
pub fn w2_tilde_monomial(m: usize, x1: C, x2: C) -> C {
    let mut acc = C::new(0.0, 0.0);
    for j in 1..m {
        acc += x1.powu(j as u32) * x2.powu((m - 1 - j) as u32) / j as f64;
    }
    acc * (m as f64 / 2.0)
}

/// `W3[z^m](x1,x2,x3) = Σ_{k1+k2+k3=m} x1^{k1} x2^{k2} x3^{k3} / (k1 k2)`.
pub fn w3_monomial(m: usize, x1: C, x2: C, x3: C) -> C {
    f_map_monomial(3, m, &[x1, x2, x3]).expect("arity is fixed")
}

/// `F_{j+1}`-type map with `j = x.len()` slots: compositions of `m` into `j`
/// parts weighted by `Π_{i<j} x_i^{k_i}/k_i · x_j^{k_j}` (last slot unweighted).
pub fn f_map_monomial(j: usize, m: usize, x: &[C]) -> Result<C> {
    check_arity(j, x)?;
    if j == 0 {
        return Err(LabError::InvalidArgument("arity must be >= 1".into()));
    }
    if m < j {
        return Ok(C::new(0.0, 0.0));
    }
    if m > ENUMERATION_MAX_DEGREE {
        return Ok(weighted_products(x, m, true)[m]);
    }
    let mut acc = C::new(0.0, 0.0);
    for_each_composition(m, j, |k| {
        let mut t = C::new(1.0, 0.0);
        for (i, (&xi, &ki)) in x.iter().zip(k).enumerate() {
            t *= xi.powu(ki as u32);
            if i + 1 < j {
                t /= ki as f64;
            }
        }
        acc += t;
    });
    Ok(acc)
}

/// `Φ_j[z^m](x) = Σ_{l1+...+lj=m, li>=1} Π x_i^{l_i} / l_i`; zero for `m < j`.
pub fn phi_monomial(j: usize, m: usize, x: &[C]) -> Result<C> {
    check_arity(j, x)?;
    if m < j {
        return Ok(C::new(0.0, 0.0));
    }
    if m > ENUMERATION_MAX_DEGREE {
        return Ok(weighted_products(x, m, false)[m]);
    }
    let mut acc = C::new(0.0, 0.0);
    for_each_composition(m, j, |l| {
        let mut t = C::new(1.0, 0.0);
        for (&xi, &li) in x.iter().zip(l) {
            t *= xi.powu(li as u32) / li as f64;
        }
        acc += t;
    });
    Ok(acc)
}

/// Coefficients `0..=deg` of `Π_i g_i(t)` with `g_i(t) = Σ_{l>=1} x_i^l t^l / l`
/// (for the last factor the `1/l` is dropped when `last_unweighted`).
///
/// Coefficient `m` is the composition sum for degree `m`.
pub fn weighted_products(x: &[C], deg: usize, last_unweighted: bool) -> Vec<C> {
    let zero = C::new(0.0, 0.0);
    let mut acc = vec![zero; deg + 1];
    acc[0] = C::new(1.0, 0.0);
    for (i, &xi) in x.iter().enumerate() {
        let plain = last_unweighted && i + 1 == x.len();
        let mut factor = vec![zero; deg + 1];
        let mut p = C::new(1.0, 0.0);
        for (l, slot) in factor.iter_mut().enumerate().skip(1) {
            p *= xi;
            *slot = if plain { p } else { p / l as f64 };
        }
        let mut next = vec![zero; deg + 1];
        for (a, &ca) in acc.iter().enumerate() {
            if ca == zero {
                continue;
            }
            for b in 1..=deg.saturating_sub(a) {
                next[a + b] += ca * factor[b];
            }
        }
        acc = next;
    }
    acc
}

/// Complete homogeneous symmetric polynomial `h_m(x1..xj)`, by the recursion
/// `h_m(x1..xj) = h_m(x1..x_{j−1}) + xj·h_{m−1}(x1..xj)`.
pub fn phi_tilde(j: usize, m: usize, x: &[C]) -> Result<C> {
    check_arity(j, x)?;
    let zero = C::new(0.0, 0.0);
    // h[d] = h_d over the variables processed so far
    let mut h = vec![zero; m + 1];
    h[0] = C::new(1.0, 0.0);
    for &xi in x {
        for d in 1..=m {
            let prev = h[d - 1];
            h[d] += xi * prev;
        }
    }
    Ok(h[m])
}

/// `Φ_j[f](x) = Σ_m c_m Φ_j[z^m](x)`.
pub fn phi_series(j: usize, f: &PowerSeries, x: &[C]) -> Result<C> {
    check_arity(j, x)?;
    let deg = f.degree();
    if deg < j {
        return Ok(C::new(0.0, 0.0));
    }
    let w = weighted_products(x, deg, false);
    Ok((j..=deg).map(|m| f.coeff(m) * w[m]).sum())
}

/// Both sides of the merge identity for `Φ` maps at total degree `p >= 3`:
///
/// ```text
/// Σ_{a+b+c=p} Σ_{α<=a,β<=b,γ<=c} Φ_α[z^a](x) Φ_β[z^b](y) Φ_γ[z^c](z) / (α!β!γ!)
///   = Σ_{α,β,γ>=1} Φ_{α+β+γ}[z^p](x_1..x_α, y_1..y_β, z_1..z_γ) / (α!β!γ!)
/// ```
///
/// Each list needs at least `p − 2` entries.
pub fn phi_merge_check(p: usize, x: &[C], y: &[C], z: &[C]) -> Result<(C, C)> {
    if p < 3 {
        return Err(LabError::InvalidArgument("merge identity needs p >= 3".into()));
    }
    for v in [x, y, z] {
        if v.len() < p - 2 {
            return Err(LabError::LengthMismatch { expected: p - 2, got: v.len() });
        }
    }
    let fact = |n: usize| crate::combinatorics::factorial(n);
    let mut lhs = C::new(0.0, 0.0);
    for a in 1..=p - 2 {
        for b in 1..=p - 1 - a {
            let c = p - a - b;
            let sa: C = (1..=a).map(|al| phi_monomial(al, a, &x[..al]).unwrap() / fact(al)).sum();
            let sb: C = (1..=b).map(|be| phi_monomial(be, b, &y[..be]).unwrap() / fact(be)).sum();
            let sc: C = (1..=c).map(|ga| phi_monomial(ga, c, &z[..ga]).unwrap() / fact(ga)).sum();
            lhs += sa * sb * sc;
        }
    }
    let mut rhs = C::new(0.0, 0.0);
    let mut args = Vec::with_capacity(p);
    for al in 1..=p - 2 {
        for be in 1..=p - 1 - al {
            for ga in 1..=p - al - be {
                args.clear();
                args.extend_from_slice(&x[..al]);
                args.extend_from_slice(&y[..be]);
                args.extend_from_slice(&z[..ga]);
                let v = phi_monomial(args.len(), p, &args)?;
                rhs += v / (fact(al) * fact(be) * fact(ga));
            }
        }
    }
    Ok((lhs, rhs))
}

/// Integrand `(g(a) − g(b))/(a − b)`, replaced by `g'((a+b)/2)` near the diagonal.
fn divided_difference(g: &dyn Fn(f64) -> f64, dg: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(1.0);
    if (a - b).abs() <= 1e-6 * scale {
        dg(0.5 * (a + b))
    } else {
        (g(a) - g(b)) / (a - b)
    }
}

/// `½ ∫_{base}^{x1} ∫_{base}^{x2} (f'(ξ1) − f'(ξ2))/(ξ1 − ξ2) dξ2 dξ1` by
/// quadrature; `fp = f'`, `fpp = f''` (the diagonal limit).
pub fn w2_integral(
    fp: &dyn Fn(f64) -> f64,
    fpp: &dyn Fn(f64) -> f64,
    x1: f64,
    x2: f64,
    base: f64,
    tol: f64,
) -> f64 {
    0.5 * quad::integrate_2d(|s, t| divided_difference(fp, fpp, s, t), (base, x1), (base, x2), tol)
}

/// `½ ∫_{base}^{x1} (f'(ξ) − f'(x2))/(ξ − x2) dξ` by quadrature.
pub fn w2_tilde_integral(
    fp: &dyn Fn(f64) -> f64,
    fpp: &dyn Fn(f64) -> f64,
    x1: f64,
    x2: f64,
    base: f64,
    tol: f64,
) -> f64 {
    0.5 * quad::integrate(|s| divided_difference(fp, fpp, s, x2), base, x1, tol)
}

/// `∫_0^{x1} ∫_0^{x2} (g(ξ1) − g(ξ2))/(ξ1 − ξ2) dξ2 dξ1` with `g(ξ) = f(ξ)/ξ`;
/// equals `Φ2[f](x1, x2)`.
pub fn phi2_integral(
    g: &dyn Fn(f64) -> f64,
    dg: &dyn Fn(f64) -> f64,
    x1: f64,
    x2: f64,
    tol: f64,
) -> f64 {
    quad::integrate_2d(|s, t| divided_difference(g, dg, s, t), (0.0, x1), (0.0, x2), tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    fn close(a: C, b: f64) -> bool {
        (a - c(b)).norm() < 1e-12
    }

    #[test]
    fn w2_examples() {
        assert!(close(w2_monomial(2, c(3.0), c(4.0)), 12.0));
        assert!(close(w2_monomial(1, c(3.0), c(4.0)), 0.0));
        assert!(close(w2_monomial(3, c(1.0), c(1.0)), 1.5));
        let e = std::f64::consts::E;
        assert!((w2_log(e, e).unwrap() + 0.5).abs() < 1e-15);
        assert_eq!(w2_log(1.0, 7.0).unwrap(), 0.0);
        assert!((w2_log(e * e, e).unwrap() + 1.0).abs() < 1e-15);
        assert!(w2_log(0.0, 1.0).is_err());
    }

    #[test]
    fn w2_tilde_examples() {
        assert!(close(w2_tilde_monomial(2, c(5.0), c(7.0)), 5.0));
        assert!(close(w2_tilde_monomial(1, c(5.0), c(7.0)), 0.0));
        assert!(close(w2_tilde_monomial(3, c(2.0), c(3.0)), 12.0));
    }

    #[test]
    fn w3_and_f_examples() {
        assert!(close(w3_monomial(2, c(1.0), c(1.0), c(1.0)), 0.0));
        assert!(close(w3_monomial(3, c(1.0), c(1.0), c(1.0)), 1.0));
        assert!(close(w3_monomial(4, c(1.0), c(1.0), c(1.0)), 2.0));
        let (a, b) = (C::new(0.3, 1.1), C::new(-0.7, 0.2));
        assert!((f_map_monomial(2, 2, &[a, b]).unwrap() - a * b).norm() < 1e-15);
        assert!(close(f_map_monomial(3, 2, &[c(1.0), c(2.0), c(3.0)]).unwrap(), 0.0));
        assert!(close(f_map_monomial(2, 3, &[c(1.0), c(1.0)]).unwrap(), 1.5));
        assert!(f_map_monomial(2, 3, &[c(1.0)]).is_err());
    }

    #[test]
    fn phi_examples() {
        assert!(close(phi_monomial(2, 1, &[c(1.0), c(2.0)]).unwrap(), 0.0));
        let (x, y) = (C::new(0.5, -0.25), C::new(1.5, 0.75));
        assert!((phi_monomial(2, 2, &[x, y]).unwrap() - x * y).norm() < 1e-15);
        assert!(close(phi_monomial(1, 3, &[c(2.0)]).unwrap(), 8.0 / 3.0));
        assert!((phi_tilde(2, 2, &[x, y]).unwrap() - (x * x + x * y + y * y)).norm() < 1e-15);
        assert!(close(phi_tilde(3, 0, &[x, y, x]).unwrap(), 1.0));
        assert!(close(phi_tilde(1, 4, &[c(3.0)]).unwrap(), 81.0));
    }

    #[test]
    fn phi_series_examples() {
        let (x, y) = (C::new(0.5, -0.25), C::new(1.5, 0.75));
        let f = PowerSeries::monomial(2).unwrap();
        assert!((phi_series(2, &f, &[x, y]).unwrap() - x * y).norm() < 1e-15);
        let f = PowerSeries::monomial(1).unwrap();
        assert_eq!(phi_series(2, &f, &[x, y]).unwrap(), C::new(0.0, 0.0));
        let f = PowerSeries::from_real(&[0.0, 1.0, 1.0]).unwrap();
        assert!(close(phi_series(2, &f, &[c(1.0), c(1.0)]).unwrap(), 2.0));
    }

    #[test]
    fn large_degree_switches_to_recursion() {
        let x = [C::new(0.4, 0.1), C::new(-0.3, 0.2), C::new(0.5, -0.6)];
        let m = 12;
        let enumerated = phi_monomial(3, m, &x).unwrap();
        let dp = weighted_products(&x, m, false)[m];
        assert!((enumerated - dp).norm() < 1e-14);
        let enumerated = f_map_monomial(3, m, &x).unwrap();
        let dp = weighted_products(&x, m, true)[m];
        assert!((enumerated - dp).norm() < 1e-14);
        // m = 21 goes through the recursion; it must continue the sequence smoothly
        let a = phi_monomial(1, 21, &[c(0.9)]).unwrap();
        assert!(close(a, 0.9f64.powi(21) / 21.0));
    }

    #[test]
    fn taylor_tail() {
        let f = PowerSeries::from_real(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let g = f.taylor_tail_shifted(2).unwrap();
        assert_eq!(g.coeffs().iter().map(|z| z.re).collect::<Vec<_>>(), vec![3.0, 4.0, 5.0]);
        let g = f.taylor_tail_shifted(4).unwrap();
        assert_eq!(g.coeffs().iter().map(|z| z.re).collect::<Vec<_>>(), vec![0.0, 0.0, 5.0]);
        assert!(f.taylor_tail_shifted(5).is_none());
    }

    #[test]
    fn merge_small() {
        let x = [c(1.0); 1];
        let (l, r) = phi_merge_check(3, &x, &x, &x).unwrap();
        assert!((l - r).norm() < 1e-14);
        // p=3: only a=b=c=1, α=β=γ=1 → 1; rhs Φ3[z^3](1,1,1) = 1
        assert!(close(l, 1.0));
        let z0 = [c(0.0); 4];
        assert_eq!(phi_merge_check(6, &z0, &z0, &z0).unwrap(), (c(0.0), c(0.0)));
        assert!(phi_merge_check(6, &x, &z0, &z0).is_err());
    }
}
