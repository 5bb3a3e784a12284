//! Thin wrappers around double-exponential quadrature, used only by the
//! cross-checks (closed forms are always the primary evaluation path).

use quadrature::double_exponential;

/// `∫_a^b f`, with `a > b` allowed (signed orientation).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate(f, b, a, tol);
    }
    double_exponential::integrate(f, a, b, tol).integral
}

/// Iterated integral `∫_{a1}^{b1} ∫_{a2}^{b2} f(x, y) dy dx`.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(f: F, x: (f64, f64), y: (f64, f64), tol: f64) -> f64 {
    let width = (y.1 - y.0).abs().max(1.0);
    integrate(|s| integrate(|t| f(s, t), y.0, y.1, tol / (10.0 * width)), x.0, x.1, tol)
}

/// `(1/2π) ∫_0^{2π} f(x) e^{−ikx} dx`, split into real and imaginary parts.
pub fn fourier_coefficient<F: Fn(f64) -> f64>(f: F, k: i64, tol: f64) -> (f64, f64) {
    let two_pi = 2.0 * std::f64::consts::PI;
    let kf = k as f64;
    let re = integrate(|x| f(x) * (kf * x).cos(), 0.0, two_pi, tol) / two_pi;
    let im = -integrate(|x| f(x) * (kf * x).sin(), 0.0, two_pi, tol) / two_pi;
    (re, im)
}
