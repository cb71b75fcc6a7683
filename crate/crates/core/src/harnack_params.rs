//! Constants of the differential Harnack estimate for the Allen-Cahn flow.
//!
//! The Harnack quantity is `h = Δu + α|∇u|² + β e^{2u} + φ(t)` with
//! `u = log f`. Admissible `(α, β)` and the curvature bound `k` determine
//! the constants
//!
//! ```text
//! a = -(2/β)(1 + n/(4β(1-α)))
//! b = 2(1 + n/(2β(1-α)))
//! c = 2n/(1-α)
//! q = ½ sqrt((b+d)² + 4ac)
//! ```
//!
//! and `φ(t) = (b + d + 2q coth(qt)) / (2a)` solves the Riccati equation
//! `aφ² - (b+d)φ - c + φ' = 0` with `φ → +∞` as `t → 0⁺`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when comparing `β` against the admissibility bound, so
/// that the bound itself (computed in floating point) is accepted.
const BETA_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarnackParams {
    pub alpha: f64,
    pub beta: f64,
    /// Manifold dimension.
    pub n: u32,
    /// Ricci lower bound magnitude, `Ric ≥ -k`.
    pub k: f64,
    /// Shift `d ≥ 0` in the `φ` equation; `0` is the limiting estimate.
    pub d: f64,
}

impl HarnackParams {
    /// Validated constructor with `d = 0`.
    pub fn new(alpha: f64, beta: f64, n: u32, k: f64) -> Result<Self> {
        let p = HarnackParams {
            alpha,
            beta,
            n,
            k,
            d: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// `α = ½, β = -n, k = 0`: the choice available on manifolds with
    /// nonnegative Ricci curvature, where `a = 1/n, b = 0, c = 4n, q = 2`.
    pub fn ricci_flat(n: u32) -> Self {
        HarnackParams {
            alpha: 0.5,
            beta: -f64::from(n),
            n,
            k: 0.0,
            d: 0.0,
        }
    }

    pub fn with_shift(mut self, d: f64) -> Result<Self> {
        self.d = d;
        self.validate()?;
        Ok(self)
    }

    /// Checks every admissibility condition, naming the first one violated.
    pub fn validate(&self) -> Result<()> {
        let max = beta_admissible_max(self.alpha, self.n, self.k)?;
        if !self.d.is_finite() || self.d < 0.0 {
            return Err(Error::Domain(format!("shift d must be >= 0, got {}", self.d)));
        }
        if !self.beta.is_finite() || self.beta >= 0.0 {
            return Err(Error::Inadmissible(format!(
                "beta must be negative, got {}",
                self.beta
            )));
        }
        let n = f64::from(self.n);
        let second_case = -n / (2.0 * (1.0 - self.alpha));
        if self.beta > second_case * (1.0 - BETA_SLACK) {
            return Err(Error::Inadmissible(format!(
                "beta = {} exceeds -n/(2(1-alpha)) = {second_case}; only beta <= -n/(2(1-alpha)) is supported",
                self.beta
            )));
        }
        if self.beta > max + BETA_SLACK * max.abs() {
            return Err(Error::Inadmissible(format!(
                "beta = {} exceeds the admissible maximum {max}",
                self.beta
            )));
        }
        Ok(())
    }

    pub fn derive(&self) -> Result<DerivedConstants> {
        derive_constants(self)
    }
}

/// `min{-n(α+2)/(2α²-2α+3n), -nk/(4α), -n/(2(1-α))}`.
pub fn beta_admissible_max(alpha: f64, n: u32, k: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0,1), got {alpha}")));
    }
    if n == 0 {
        return Err(Error::Domain("dimension n must be at least 1".into()));
    }
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::Domain(format!("k must be >= 0, got {k}")));
    }
    let n = f64::from(n);
    let p2_bound = -n * (alpha + 2.0) / (2.0 * alpha * alpha - 2.0 * alpha + 3.0 * n);
    let curvature_bound = -n * k / (4.0 * alpha);
    let riccati_bound = -n / (2.0 * (1.0 - alpha));
    Ok(p2_bound.min(curvature_bound).min(riccati_bound))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub q: f64,
    /// The shift `d` the constants (through `q`) were built with.
    pub d: f64,
}

pub fn derive_constants(p: &HarnackParams) -> Result<DerivedConstants> {
    p.validate()?;
    let n = f64::from(p.n);
    let (beta, r) = (p.beta, 1.0 - p.alpha);
    let a = -(2.0 / beta) * (1.0 + n / (4.0 * beta * r));
    // b vanishes exactly at β = -n/(2(1-α)); clip the rounding residue.
    let b = (2.0 * (1.0 + n / (2.0 * beta * r))).max(0.0);
    let c = 2.0 * n / r;
    let bd = b + p.d;
    let q = 0.5 * (bd * bd + 4.0 * a * c).sqrt();
    Ok(DerivedConstants { a, b, c, q, d: p.d })
}

impl DerivedConstants {
    pub fn phi(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok((self.b + self.d + 2.0 * self.q / (self.q * t).tanh()) / (2.0 * self.a))
    }

    /// `φ'(t) = -q² csch²(qt) / a`.
    pub fn phi_dot(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let s = (self.q * t).sinh();
        Ok(-(self.q * self.q) / (self.a * s * s))
    }

    /// `lim_{t→∞} φ(t) = (b + d + 2q)/(2a)`, also `inf_{t>0} φ`.
    pub fn phi_limit(&self) -> f64 {
        (self.b + self.d + 2.0 * self.q) / (2.0 * self.a)
    }

    /// `∫_{t1}^{t2} φ` in closed form:
    /// `(b+d+2q)/(2a)·Δt + (1/a)·ln((1 - e^{-2q t2}) / (1 - e^{-2q t1}))`.
    pub fn phi_integral(&self, t1: f64, t2: f64) -> Result<f64> {
        check_time(t1)?;
        check_time(t2)?;
        let q = self.q;
        let log_ratio = (-(-2.0 * q * t2).exp_m1()).ln() - (-(-2.0 * q * t1).exp_m1()).ln();
        Ok(self.phi_limit() * (t2 - t1) + log_ratio / self.a)
    }

    /// Residuals of `2 + c/(2β) = b` and `2 + c/(4β) = -aβ`, relative to the
    /// magnitude of the right-hand side (floored at 1).
    pub fn identity_residuals(&self, beta: f64) -> (f64, f64) {
        let r1 = (2.0 + self.c / (2.0 * beta) - self.b) / self.b.abs().max(1.0);
        let rhs = -self.a * beta;
        let r2 = (2.0 + self.c / (4.0 * beta) - rhs) / rhs.abs().max(1.0);
        (r1, r2)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("phi needs t > 0, got {t}")))
    }
}

pub fn phi(t: f64, dc: &DerivedConstants) -> Result<f64> {
    dc.phi(t)
}

/// `aφ² - (b+d)φ - c + φ'` for the `φ` built into `dc`, with the analytic
/// derivative. Passing `d = dc.d` gives the defining equation (residual 0).
pub fn phi_ode_residual(t: f64, dc: &DerivedConstants, d: f64) -> Result<f64> {
    let p = dc.phi(t)?;
    let pd = dc.phi_dot(t)?;
    Ok(dc.a * p * p - (dc.b + d) * p - dc.c + pd)
}

/// Whether `inf φ = (b+d+2q)/(2a)` reaches the floor `nk/(2α)` that keeps
/// the curvature terms of the gradient group nonnegative.
pub fn phi_floor_check(dc: &DerivedConstants, p: &HarnackParams) -> bool {
    dc.phi_limit() >= f64::from(p.n) * p.k / (2.0 * p.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn beta_bound_examples() {
        // expressions: -5/5.5, 0, -2
        assert_eq!(beta_admissible_max(0.5, 2, 0.0).unwrap(), -2.0);
        // expressions: -1, 0, -1
        assert_eq!(beta_admissible_max(0.5, 1, 0.0).unwrap(), -1.0);
        assert!(beta_admissible_max(1.2, 2, 0.0).is_err());
        assert!(beta_admissible_max(0.0, 2, 0.0).is_err());
        // k = 10 makes the curvature term the binding one
        assert_eq!(beta_admissible_max(0.5, 2, 10.0).unwrap(), -10.0);
    }

    #[test]
    fn ricci_flat_constants() {
        for n in 1..=3 {
            let dc = HarnackParams::ricci_flat(n).derive().unwrap();
            let nf = f64::from(n);
            assert!(close(dc.a, 1.0 / nf, 1e-15));
            assert_eq!(dc.b, 0.0);
            assert!(close(dc.c, 4.0 * nf, 1e-15));
            assert!(close(dc.q, 2.0, 1e-15));
        }
    }

    #[test]
    fn constants_beta_minus_four() {
        let dc = HarnackParams::new(0.5, -4.0, 2, 0.0).unwrap().derive().unwrap();
        assert!(close(dc.a, 0.375, 1e-15));
        assert!(close(dc.b, 1.0, 1e-15));
        assert!(close(dc.c, 8.0, 1e-15));
        assert!(close(dc.q, 0.5 * 13f64.sqrt(), 1e-15));
        assert!(close(2.0 + 8.0 / -8.0, dc.b, 0.0));
        assert!(close(2.0 + 8.0 / -16.0, -dc.a * -4.0, 0.0));
    }

    #[test]
    fn inadmissible_rejected() {
        let p = HarnackParams {
            alpha: 0.5,
            beta: -0.1,
            n: 1,
            k: 0.0,
            d: 0.0,
        };
        let err = derive_constants(&p).unwrap_err();
        assert!(matches!(err, Error::Inadmissible(_)), "{err}");
        assert!(HarnackParams::new(0.5, 1.0, 1, 0.0).is_err());
        // beta = -1 is admissible for n = 1 but not for n = 2
        assert!(HarnackParams::new(0.5, -1.0, 1, 0.0).is_ok());
        assert!(HarnackParams::new(0.5, -1.0, 2, 1.0).is_err());
        assert!(HarnackParams::new(0.5, -2.0, 2, 10.0).is_err());
        assert!(HarnackParams::ricci_flat(2).with_shift(-0.1).is_err());
    }

    #[test]
    fn phi_closed_forms() {
        for n in 1..=3u32 {
            let dc = HarnackParams::ricci_flat(n).derive().unwrap();
            let nf = f64::from(n);
            for t in [0.01f64, 0.25, 1.0, 3.0] {
                let e = (4.0 * t).exp();
                let expect = 2.0 * nf * (e + 1.0) / (e - 1.0);
                assert!(close(dc.phi(t).unwrap(), expect, 1e-12 * expect));
            }
            assert!(close(dc.phi(60.0).unwrap(), 2.0 * nf, 1e-12));
            assert_eq!(dc.phi_limit(), 2.0 * nf);
        }
        // n = 2, t = 1/4: 4(e+1)/(e-1)
        let dc = HarnackParams::ricci_flat(2).derive().unwrap();
        assert!(close(dc.phi(0.25).unwrap(), 8.655_813_654_954_611, 1e-12));
        assert!(dc.phi(0.0).is_err());
        assert!(dc.phi(-1.0).is_err());
    }

    #[test]
    fn phi_ode_special_case() {
        let dc = HarnackParams::ricci_flat(3).derive().unwrap();
        assert!(phi_ode_residual(1.0, &dc, 0.0).unwrap().abs() < 1e-10);
    }

    #[test]
    fn shifted_ode_residuals() {
        let p = HarnackParams::new(0.5, -4.0, 2, 0.0)
            .unwrap()
            .with_shift(0.1)
            .unwrap();
        let dc = p.derive().unwrap();
        for t in [0.1, 1.0, 10.0] {
            assert!(phi_ode_residual(t, &dc, 0.1).unwrap().abs() < 1e-10);
            let drift = phi_ode_residual(t, &dc, 0.0).unwrap();
            let expect = 0.1 * dc.phi(t).unwrap();
            assert!(close(drift, expect, 1e-10), "{drift} vs {expect}");
        }
    }

    #[test]
    fn floor_check_examples() {
        let p = HarnackParams::ricci_flat(2);
        assert!(phi_floor_check(&p.derive().unwrap(), &p));
        // k = 1, beta = -2: inf phi = (0 + 4)/1 = 4 >= nk/(2 alpha) = 2
        let p = HarnackParams::new(0.5, -2.0, 2, 1.0).unwrap();
        let dc = p.derive().unwrap();
        assert!(close(dc.phi_limit(), 4.0, 1e-14));
        assert!(phi_floor_check(&dc, &p));
    }

    #[test]
    fn small_time_series() {
        let p = HarnackParams::new(0.3, -2.5, 2, 0.2).unwrap();
        let dc = p.derive().unwrap();
        let t = 1e-4;
        let series = 1.0 / (dc.a * t) + (dc.b + dc.d) / (2.0 * dc.a);
        let phi = dc.phi(t).unwrap();
        assert!(((phi - series) / phi).abs() < 1e-4);
    }
}
