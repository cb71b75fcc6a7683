//! One-dimensional standing and traveling waves: profile residuals for
//! `c p' + p'' = p³ - p`, the formal gradient bound
//! `|p'|² ≤ p²[(2n-1) - (n-1)p²]`, Modica's bound `|p'|² ≤ ½(p²-1)²`, and
//! the comparison of the two polynomials on `[-1, 1]`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::torus_grid::{ScalarField, TorusGrid};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Sampled profile on a uniform, strictly increasing abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveProfile {
    xs: Vec<f64>,
    ps: Vec<f64>,
    slope: Option<Vec<f64>>,
    c: f64,
}

impl WaveProfile {
    pub fn new(xs: Vec<f64>, ps: Vec<f64>, c: f64) -> Result<Self> {
        if xs.len() < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: xs.len(),
            });
        }
        if xs.len() != ps.len() {
            return Err(Error::InvalidParameter(format!(
                "{} abscissae but {} values",
                xs.len(),
                ps.len()
            )));
        }
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidParameter(format!("wave speed must be >= 0, got {c}")));
        }
        if xs.iter().chain(&ps).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("profile samples must be finite".into()));
        }
        let h = xs[1] - xs[0];
        if !(h > 0.0) {
            return Err(Error::InvalidParameter("abscissae must increase".into()));
        }
        let scale = xs[0].abs().max(xs[xs.len() - 1].abs()).max(h);
        if xs
            .windows(2)
            .any(|w| (w[1] - w[0] - h).abs() > 1e-9 * scale)
        {
            return Err(Error::InvalidParameter("abscissae must be uniformly spaced".into()));
        }
        Ok(WaveProfile {
            xs,
            ps,
            slope: None,
            c,
        })
    }

    /// Attaches exact slope values `p'(x_i)`.
    pub fn with_slope(mut self, slope: Vec<f64>) -> Result<Self> {
        if slope.len() != self.ps.len() || slope.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "slope must have one finite value per sample".into(),
            ));
        }
        self.slope = Some(slope);
        Ok(self)
    }

    /// Drops the stored slope so gap evaluators fall back to differences.
    pub fn without_slope(mut self) -> Self {
        self.slope = None;
        self
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ps(&self) -> &[f64] {
        &self.ps
    }

    pub fn stored_slope(&self) -> Option<&[f64]> {
        self.slope.as_deref()
    }

    pub fn speed(&self) -> f64 {
        self.c
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        (self.xs[self.xs.len() - 1] - self.xs[0]) / (self.xs.len() - 1) as f64
    }

    /// Stored slope, or second-order differences (central inside,
    /// one-sided at the ends).
    pub fn slope(&self) -> Vec<f64> {
        if let Some(s) = &self.slope {
            return s.clone();
        }
        let (p, h, m) = (&self.ps, self.spacing(), self.ps.len());
        if m < 3 {
            return vec![(p[1] - p[0]) / h; m];
        }
        let mut out = Vec::with_capacity(m);
        out.push((-3.0 * p[0] + 4.0 * p[1] - p[2]) / (2.0 * h));
        out.extend(p.windows(3).map(|w| (w[2] - w[0]) / (2.0 * h)));
        out.push((3.0 * p[m - 1] - 4.0 * p[m - 2] + p[m - 3]) / (2.0 * h));
        out
    }

    /// The samples as a one-dimensional field, for `AC-FIELD v1` output.
    /// The grid length is `len · h`; the offset `xs[0]` is not recorded.
    pub fn to_field(&self) -> Result<ScalarField> {
        let grid = TorusGrid::new(&[self.spacing() * self.len() as f64], &[self.len()])?;
        ScalarField::new(grid, self.ps.clone())
    }
}

/// `x0, x0 + h, …` up to `x1`, with the step shrunk so the last sample
/// lands on `x1`.
pub fn uniform_xs(x0: f64, x1: f64, h: f64) -> Result<Vec<f64>> {
    if !(x1 > x0 && h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need x0 < x1 and h > 0, got [{x0}, {x1}], h = {h}"
        )));
    }
    let cells = ((x1 - x0) / h * (1.0 - 1e-12)).ceil() as usize;
    let step = (x1 - x0) / cells as f64;
    Ok((0..=cells).map(|i| x0 + i as f64 * step).collect())
}

/// `p(x) = tanh(x/√2)` with its exact slope `(1 - p²)/√2`.
pub fn tanh_profile(xs: &[f64]) -> Result<WaveProfile> {
    let ps: Vec<f64> = xs.iter().map(|&x| (x / SQRT_2).tanh()).collect();
    let slope = ps.iter().map(|&p| (1.0 - p * p) / SQRT_2).collect();
    WaveProfile::new(xs.to_vec(), ps, 0.0)?.with_slope(slope)
}

pub fn constant_profile(xs: &[f64], value: f64) -> Result<WaveProfile> {
    WaveProfile::new(xs.to_vec(), vec![value; xs.len()], 0.0)?.with_slope(vec![0.0; xs.len()])
}

/// `max_i |c p'_i + p''_i - p_i³ + p_i|` over interior samples, with
/// central differences.
pub fn traveling_wave_residual(w: &WaveProfile) -> Result<f64> {
    if w.len() < 5 {
        return Err(Error::TooFewSamples {
            needed: 5,
            got: w.len(),
        });
    }
    let h = w.spacing();
    let c = w.speed();
    Ok(w.ps
        .windows(3)
        .map(|s| {
            let d1 = (s[2] - s[0]) / (2.0 * h);
            let d2 = (s[2] - 2.0 * s[1] + s[0]) / (h * h);
            (c * d1 + d2 - s[1].powi(3) + s[1]).abs()
        })
        .fold(0.0, f64::max))
}

/// Outcome of the shooting solve.
#[derive(Debug, Clone)]
pub struct StandingWave {
    pub profile: WaveProfile,
    /// The recovered slope `p'(0)`.
    pub slope_at_zero: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    Overshoot,
    Undershoot,
}

fn rk4_step(p: f64, v: f64, h: f64) -> (f64, f64) {
    let acc = |p: f64| p * p * p - p;
    let (k1p, k1v) = (v, acc(p));
    let (k2p, k2v) = (v + 0.5 * h * k1v, acc(p + 0.5 * h * k1p));
    let (k3p, k3v) = (v + 0.5 * h * k2v, acc(p + 0.5 * h * k2p));
    let (k4p, k4v) = (v + h * k3v, acc(p + h * k3p));
    (
        p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )
}

/// Integrates `p'' = p³ - p` from `(0, s)` over `steps` steps of `h`.
/// Returns the classification and, when `trace` is set, the samples.
fn shoot(s: f64, h: f64, steps: usize, trace: Option<&mut Vec<(f64, f64)>>) -> Shot {
    let (mut p, mut v) = (0.0, s);
    let mut trace = trace;
    if let Some(t) = trace.as_deref_mut() {
        t.push((p, v));
    }
    for _ in 0..steps {
        (p, v) = rk4_step(p, v, h);
        if p > 1.0 {
            return Shot::Overshoot;
        }
        if v < 0.0 {
            return Shot::Undershoot;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push((p, v));
        }
    }
    // near p = 1 the growing mode is e^{√2 x} with weight v + √2(p - 1)
    if v + SQRT_2 * (p - 1.0) > 0.0 {
        Shot::Overshoot
    } else {
        Shot::Undershoot
    }
}

/// Largest half-width accepted. The growing mode at `p = 1` amplifies the
/// `1e-12` slope resolution by `e^{√2 X}` while the profile approaches 1
/// like `e^{-√2 X}`; past `X ≈ 10` the first outgrows the second and the
/// final shot leaves the band before reaching `X`.
pub const MAX_HALF_WIDTH: f64 = 10.0;

/// Shooting for the odd heteroclinic `p'' = p³ - p`, `p(0) = 0`,
/// `p(X) → 1`: RK4 with step `h` (shrunk to divide `X`), bisection on
/// `p'(0) ∈ [0.5, 1]` to width `1e-12`. The profile on `[-X, X]` is the
/// forward solution mirrored, so it is exactly odd.
pub fn shoot_standing_wave(half_width: f64, h: f64) -> Result<StandingWave> {
    if !(half_width >= 5.0 && half_width <= MAX_HALF_WIDTH) {
        return Err(Error::InvalidParameter(format!(
            "half-width must lie in [5, {MAX_HALF_WIDTH}], got {half_width}"
        )));
    }
    if !(h > 0.0 && h <= 0.05) {
        return Err(Error::InvalidParameter(format!("step must lie in (0, 0.05], got {h}")));
    }
    let steps = (half_width / h * (1.0 - 1e-12)).ceil() as usize;
    let h = half_width / steps as f64;

    let (mut lo, mut hi) = (0.5, 1.0);
    if shoot(lo, h, steps, None) != Shot::Undershoot || shoot(hi, h, steps, None) != Shot::Overshoot
    {
        return Err(Error::Domain("slope bracket [0.5, 1] does not straddle the heteroclinic".into()));
    }
    const MAX_BISECTIONS: usize = 200;
    let mut iterations = 0;
    while hi - lo > 1e-12 {
        if iterations == MAX_BISECTIONS {
            return Err(Error::NoConvergence(MAX_BISECTIONS));
        }
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        match shoot(mid, h, steps, None) {
            Shot::Overshoot => hi = mid,
            Shot::Undershoot => lo = mid,
        }
    }
    let s = 0.5 * (lo + hi);

    let mut trace = Vec::with_capacity(steps + 1);
    shoot(s, h, steps, Some(&mut trace));
    // an escape on the final shot truncates the trace; keep the last state
    // frozen rather than report values past the escape
    let last = *trace.last().expect("trace starts with the initial state");
    trace.resize(steps + 1, last);

    let m = 2 * steps + 1;
    let mut xs = Vec::with_capacity(m);
    let mut ps = Vec::with_capacity(m);
    let mut slope = Vec::with_capacity(m);
    for i in (1..=steps).rev() {
        xs.push(-(i as f64) * h);
        ps.push(-trace[i].0);
        slope.push(trace[i].1);
    }
    for (i, &(p, v)) in trace.iter().enumerate() {
        xs.push(i as f64 * h);
        ps.push(p);
        slope.push(v);
    }
    let profile = WaveProfile::new(xs, ps, 0.0)?.with_slope(slope)?;
    Ok(StandingWave {
        profile,
        slope_at_zero: s,
        iterations,
    })
}

/// `p²[(2n-1) - (n-1)p²] - |p'|²` per sample; positive where the formal
/// gradient bound holds.
pub fn corollary_bound_gap(w: &WaveProfile, n: u32) -> Vec<f64> {
    let nf = f64::from(n);
    w.ps
        .iter()
        .zip(w.slope())
        .map(|(&p, d)| p * p * ((2.0 * nf - 1.0) - (nf - 1.0) * p * p) - d * d)
        .collect()
}

/// `½(p² - 1)² - |p'|²` per sample.
pub fn modica_bound_gap(w: &WaveProfile) -> Vec<f64> {
    w.ps
        .iter()
        .zip(w.slope())
        .map(|(&p, d)| 0.5 * (p * p - 1.0).powi(2) - d * d)
        .collect()
}

/// Abscissae where sampled `values` change sign, by linear interpolation
/// between neighbours. Exact zeros count once.
pub fn sign_changes(xs: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..xs.len().min(values.len()).saturating_sub(1) {
        let (a, b) = (values[i], values[i + 1]);
        if a == 0.0 {
            out.push(xs[i]);
        } else if a * b < 0.0 {
            out.push(xs[i] + (xs[i + 1] - xs[i]) * a / (a - b));
        }
    }
    if values.last() == Some(&0.0) && xs.len() == values.len() {
        out.push(xs[xs.len() - 1]);
    }
    out
}

/// `x²(2n-1-(n-1)x²)`, the formal bound.
pub fn corollary_polynomial(n: u32, x: f64) -> f64 {
    let nf = f64::from(n);
    x * x * (2.0 * nf - 1.0 - (nf - 1.0) * x * x)
}

/// `½(x²-1)²`, Modica's bound.
pub fn modica_polynomial(x: f64) -> f64 {
    0.5 * (x * x - 1.0).powi(2)
}

/// Sampled `g₁`, `g₂` on `[-1, 1]` and their crossings.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialComparison {
    pub n: u32,
    pub xs: Vec<f64>,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    /// Roots of `g₁ = g₂` in `[-1, 1]`, ascending, refined by bisection.
    pub crossings: Vec<f64>,
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn polynomial_comparison(n: u32, samples: usize) -> Result<PolynomialComparison> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension n must be at least 1".into()));
    }
    if samples < 100 {
        return Err(Error::TooFewSamples {
            needed: 100,
            got: samples,
        });
    }
    let xs: Vec<f64> = (0..samples)
        .map(|i| -1.0 + 2.0 * i as f64 / (samples - 1) as f64)
        .collect();
    let g1: Vec<f64> = xs.iter().map(|&x| corollary_polynomial(n, x)).collect();
    let g2: Vec<f64> = xs.iter().map(|&x| modica_polynomial(x)).collect();
    let diff = |x: f64| corollary_polynomial(n, x) - modica_polynomial(x);
    let mut crossings = Vec::new();
    for i in 0..samples - 1 {
        let (a, b) = (diff(xs[i]), diff(xs[i + 1]));
        if a == 0.0 {
            crossings.push(xs[i]);
        } else if a * b < 0.0 {
            crossings.push(bisect(diff, xs[i], xs[i + 1]));
        }
    }
    if diff(xs[samples - 1]) == 0.0 {
        crossings.push(xs[samples - 1]);
    }
    Ok(PolynomialComparison {
        n,
        xs,
        g1,
        g2,
        crossings,
    })
}

impl PolynomialComparison {
    /// `x,g1,g2` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,g1,g2\n");
        for i in 0..self.xs.len() {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", self.xs[i], self.g1[i], self.g2[i]);
        }
        out
    }

    pub fn crossings_text(&self) -> String {
        let mut out = format!("n={}\n", self.n);
        for x in &self.crossings {
            let _ = writeln!(out, "crossing={x:.16e}");
        }
        out
    }
}
