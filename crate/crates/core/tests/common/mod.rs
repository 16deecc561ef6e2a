//! Independent reference solutions for `-u'' = λu + u³` on `(0, 1)` with `u(0) = u(1) = 0`.
//!
//! Shooting with classical RK4 on `(u, u', ∫u²)`; nothing here touches the library.

#![allow(dead_code)]

const STEPS: usize = 20_000;

/// `(u(1), ∫₀¹ u²)` for the initial slope `s`.
fn integrate(s: f64, lambda: f64) -> (f64, f64) {
    let rhs = |y: [f64; 3]| [y[1], -lambda * y[0] - y[0].powi(3), y[0] * y[0]];
    let h = 1.0 / STEPS as f64;
    let mut y = [0.0, s, 0.0];
    let add = |y: [f64; 3], k: [f64; 3], c: f64| [y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2]];
    for _ in 0..STEPS {
        let k1 = rhs(y);
        let k2 = rhs(add(y, k1, h / 2.0));
        let k3 = rhs(add(y, k2, h / 2.0));
        let k4 = rhs(add(y, k3, h));
        for i in 0..3 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    (y[0], y[2])
}

/// Mass of the positive solution with multiplier `lambda < π²`.
pub fn shooting_mass(lambda: f64) -> f64 {
    // u(1) > 0 for small slopes and changes sign where the first hump ends at x = 1.
    let mut lo = 1e-5;
    assert!(integrate(lo, lambda).0 > 0.0, "lambda too close to pi^2");
    let mut hi = lo;
    while integrate(hi, lambda).0 > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if integrate(mid, lambda).0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    integrate(0.5 * (lo + hi), lambda).1
}

/// Multiplier of the positive solution with mass `mu` (the mass decreases in `lambda`).
pub fn shooting_lambda(mu: f64) -> f64 {
    let pi2 = std::f64::consts::PI.powi(2);
    let (mut lo, mut hi) = (0.0, pi2 - 1e-6);
    assert!(shooting_mass(lo) > mu && shooting_mass(hi) < mu);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if shooting_mass(mid) > mu {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `∫u²` of the λ = 0 solution from the first integrals: with `w'' = -w³`, `w(0) = 0`,
/// `w'(0) = 1` and amplitude `W = 2^{1/4}`, `u(x) = a w(ax)` where `a = 2∫₀^W dw/√(1 - w⁴/2)`
/// and the mass is `2a ∫₀^W w² dw/√(1 - w⁴/2)`. Evaluated independently to 30 digits.
pub const MASS_AT_ZERO_MULTIPLIER: f64 = 6.283_185_307_179_584;

/// Multipliers of the positive solution at masses `0.05`, `0.0005` and `0.002/9`,
/// computed independently with an adaptive high-order integrator.
pub const LAMBDA_AT_0_05: f64 = 9.794_580_623_825_116;
pub const LAMBDA_AT_0_0005: f64 = 9.868_854_398_714_655;
pub const LAMBDA_AT_0_002_OVER_9: f64 = 9.869_271_067_286_984;

/// First eigenvalue of `-u'' = λu`, `u'(0) = u(0)`, `u'(1) = -u(1)`: the square of the
/// smallest root of `2k cos k + (1 - k²) sin k = 0`.
pub const ROBIN_LAMBDA1: f64 = 1.707_052_975_550_922;

/// Smallest positive root of the Robin characteristic equation, by bisection.
pub fn robin_lambda1() -> f64 {
    let g = |k: f64| 2.0 * k * k.cos() + (1.0 - k * k) * k.sin();
    let (mut lo, mut hi) = (0.5, 2.0);
    assert!(g(lo) > 0.0 && g(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo * lo
}
