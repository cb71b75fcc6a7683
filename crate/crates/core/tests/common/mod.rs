//! Independent reference values shared by the integration tests.
#![allow(dead_code)]

/// Exact solution of `f' = f - f³` with `f(0) = c0`.
pub fn logistic_exact(c0: f64, t: f64) -> f64 {
    (1.0 + (c0.powi(-2) - 1.0) * (-2.0 * t).exp()).powf(-0.5)
}

/// Classical RK4 on `f' = f - f³`, for cross-checking the closed form.
pub fn logistic_rk4(c0: f64, t: f64, steps: usize) -> f64 {
    let g = |f: f64| f - f * f * f;
    let h = t / steps as f64;
    let mut f = c0;
    for _ in 0..steps {
        let k1 = g(f);
        let k2 = g(f + 0.5 * h * k1);
        let k3 = g(f + 0.5 * h * k2);
        let k4 = g(f + h * k3);
        f += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    f
}

/// The forward-Euler map applied `m` times to a constant.
pub fn logistic_euler(c0: f64, dt: f64, m: usize) -> f64 {
    let mut f = c0;
    for _ in 0..m {
        f += dt * (f - f * f * f);
    }
    f
}

// 40-digit mpmath evaluations.

/// Stated classical bound, n = 1, α = ½, β = -1, d = 0.2, t1 = 0.5, t2 = 1.
pub const PAPER_RHS_N1: f64 = 0.114_528_908_594_948_44;
/// Same inputs, exp(-d²/(4(1-α)Δt) - ∫φ) with ∫φ by quadrature.
pub const TIGHT_RHS_N1: f64 = 0.311_321_851_066_895_32;
/// Stated bound, n = 2, α = ½, β = -2, d = 0.3, t1 = 0.1, t2 = 0.6.
pub const PAPER_RHS_N2: f64 = 0.002_200_510_363_455_363_9;
/// ∫_{0.3}^{2.1} φ for n = 1, α = ½, β = -1.
pub const PHI_INTEGRAL_N1: f64 = 3.958_157_525_249_807_5;

/// Positive roots of `g₁ = g₂` for n = 1, 2, 3.
pub const CROSSINGS: [f64; 3] = [
    0.517_638_090_205_041_52,
    0.362_605_720_002_691_40,
    0.294_018_923_598_457_55,
];
/// Where the tanh gradient-bound gap changes sign, `√2 atanh(crossing)`.
pub const GAP_SIGN_CHANGES: [f64; 3] = [
    0.810_496_989_476_753_75,
    0.537_235_470_244_544_20,
    0.428_449_904_607_805_19,
];

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
