//! Evaluation of the Harnack quantity on computed trajectories and checks
//! of the differential estimate `h ≥ 0`, the sign of the grouped terms
//! `P₂, P₃` (with `P₄ ≡ 0` on closed manifolds), the `u = log f` evolution
//! equation, and the integrated (classical) Harnack ratio bound.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ac_solver::{Trajectory, CONFINEMENT_FLOOR};
use crate::error::{Error, Result};
use crate::harnack_params::{derive_constants, DerivedConstants, HarnackParams};
use crate::torus_grid::{gradient_sq, laplacian, ScalarField, TorusGrid};

/// Default earliest snapshot time included in the checks.
pub const DEFAULT_T_MIN: f64 = 0.05;
/// Default tolerance on `h ≥ 0` at `N = 512` on T¹.
pub const DEFAULT_TOL: f64 = 1e-2;

/// `u = log f`, refusing values below the floor `1e-12`.
pub fn log_field(f: &ScalarField) -> Result<ScalarField> {
    if let Some((index, &value)) = f
        .values()
        .iter()
        .enumerate()
        .find(|(_, &v)| !(v >= CONFINEMENT_FLOOR))
    {
        return Err(Error::FloorBreach {
            index,
            value,
            floor: CONFINEMENT_FLOOR,
        });
    }
    f.map(f64::ln)
}

/// `h = Δ_h u + α|∇_h u|² + β e^{2u} + φ(t)`.
pub fn harnack_quantity(
    u: &ScalarField,
    p: &HarnackParams,
    dc: &DerivedConstants,
    t: f64,
) -> Result<ScalarField> {
    let phi = dc.phi(t)?;
    let lap = laplacian(u);
    let grad = gradient_sq(u);
    let values = u
        .values()
        .iter()
        .zip(lap.values())
        .zip(grad.values())
        .map(|((&uv, &l), &g)| l + p.alpha * g + p.beta * (2.0 * uv).exp() + phi)
        .collect();
    ScalarField::new(*u.grid(), values)
}

/// The grouped terms on the right of
/// `(∂_t - Δ)h - 2∇u·∇h ≥ h P₁ + P₂ + P₃ + P₄`, with `ψ ≡ 0`.
#[derive(Debug, Clone)]
pub struct PTerms {
    pub p1: ScalarField,
    pub p2: ScalarField,
    pub p3: ScalarField,
    /// Identically zero: no spatial correction is needed on a closed manifold.
    pub p4: ScalarField,
    /// Lower bound on `P₃` from completing the square in `e^{2u}`:
    /// `-Q²/P + (2(1-α)/n) φ² + φ'` with `P = 2β²(1-α)/n`,
    /// `Q = (2β(1-α)/n + 1) φ + β`. Independent of `x`.
    pub p3_lower_bound: f64,
}

pub fn p_terms(
    u: &ScalarField,
    h: &ScalarField,
    p: &HarnackParams,
    dc: &DerivedConstants,
    t: f64,
) -> Result<PTerms> {
    let phi = dc.phi(t)?;
    let phi_dot = dc.phi_dot(t)?;
    let (alpha, beta) = (p.alpha, p.beta);
    let n = f64::from(p.n);
    let r = 1.0 - alpha;
    let grad = gradient_sq(u);
    let cross = 4.0 * alpha * beta * r / n - 6.0 * beta - 2.0 * alpha - 4.0;

    let len = u.len();
    let (mut p1, mut p2, mut p3) = (
        Vec::with_capacity(len),
        Vec::with_capacity(len),
        Vec::with_capacity(len),
    );
    for i in 0..len {
        let g = grad.values()[i];
        let e2 = (2.0 * u.values()[i]).exp();
        p1.push(
            2.0 * r / n * h.values()[i]
                - 4.0 * r / n * (alpha * g + beta * e2 + phi)
                - 2.0 * e2,
        );
        p2.push(
            2.0 * r / n * alpha * alpha * g * g - 2.0 * p.k * r * g
                + 4.0 * alpha * r / n * phi * g
                + g * e2 * cross,
        );
        p3.push(
            e2 * e2 * 2.0 * beta * beta * r / n
                + e2 * (4.0 * beta * r / n * phi + 2.0 * phi + 2.0 * beta)
                + 2.0 * r / n * phi * phi
                + phi_dot,
        );
    }
    let quad = 2.0 * beta * beta * r / n;
    let lin = (2.0 * beta * r / n + 1.0) * phi + beta;
    let p3_lower_bound = -lin * lin / quad + 2.0 * r / n * phi * phi + phi_dot;

    let grid = *u.grid();
    Ok(PTerms {
        p1: ScalarField::new(grid, p1)?,
        p2: ScalarField::new(grid, p2)?,
        p3: ScalarField::new(grid, p3)?,
        p4: ScalarField::zeros(grid),
        p3_lower_bound,
    })
}

/// Per-snapshot summary of the Harnack quantity.
#[derive(Debug, Clone)]
pub struct HarnackSnapshot {
    pub t: f64,
    pub h_field: ScalarField,
    pub h_min: f64,
    pub argmin: usize,
    pub p2_min: f64,
    pub p3_min: f64,
    pub p3_lower_bound: f64,
}

pub fn analyze_snapshot(
    f: &ScalarField,
    p: &HarnackParams,
    dc: &DerivedConstants,
    t: f64,
) -> Result<HarnackSnapshot> {
    let u = log_field(f)?;
    let h = harnack_quantity(&u, p, dc, t)?;
    let terms = p_terms(&u, &h, p, dc, t)?;
    let (argmin, h_min) = h.argmin();
    Ok(HarnackSnapshot {
        t,
        h_min,
        argmin,
        p2_min: terms.p2.min(),
        p3_min: terms.p3.min(),
        p3_lower_bound: terms.p3_lower_bound,
        h_field: h,
    })
}

/// Central-in-time residual of `u_t = Δu + |∇u|² + 1 - e^{2u}` at
/// snapshot `j`:
/// `(u_{j+1} - u_{j-1})/(t_{j+1} - t_{j-1}) - (Δ_h u_j + |∇_h u_j|² + 1 - e^{2u_j})`.
pub fn u_evolution_residual(traj: &Trajectory, j: usize) -> Result<ScalarField> {
    let snaps = traj.snapshots();
    if j == 0 || j + 1 >= snaps.len() {
        return Err(Error::Index {
            index: j,
            valid: format!("1..{}", snaps.len().saturating_sub(1)),
        });
    }
    let before = log_field(&snaps[j - 1].field)?;
    let here = log_field(&snaps[j].field)?;
    let after = log_field(&snaps[j + 1].field)?;
    let span = snaps[j + 1].t - snaps[j - 1].t;
    let lap = laplacian(&here);
    let grad = gradient_sq(&here);
    let values = (0..here.len())
        .map(|i| {
            let u = here.values()[i];
            let dudt = (after.values()[i] - before.values()[i]) / span;
            dudt - (lap.values()[i] + grad.values()[i] + 1.0 - (2.0 * u).exp())
        })
        .collect();
    ScalarField::new(*here.grid(), values)
}

/// Where a check attained its worst margin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Location {
    pub t: f64,
    pub x: Vec<f64>,
}

impl Location {
    fn at(grid: &TorusGrid, t: f64, index: usize) -> Self {
        Location {
            t,
            x: grid.coords(index),
        }
    }
}

/// One named inequality: passes iff `value - threshold >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub threshold: f64,
    pub margin: f64,
    pub location: Option<Location>,
    pub note: String,
}

impl CheckRecord {
    pub fn new(name: &str, value: f64, threshold: f64, location: Option<Location>) -> Self {
        let margin = value - threshold;
        CheckRecord {
            name: name.to_string(),
            passed: margin >= 0.0,
            value,
            threshold,
            margin,
            location,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

/// Per-snapshot row of the `h_min` time series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HminRow {
    pub t: f64,
    pub h_min: f64,
    pub argmin: Vec<f64>,
    pub p2_min: f64,
    pub p3_min: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub title: String,
    pub params: HarnackParams,
    pub constants: Option<DerivedConstants>,
    pub tolerances: Vec<(String, f64)>,
    pub checks: Vec<CheckRecord>,
    /// Set when the configuration was rejected before any check ran.
    pub config_error: Option<String>,
    pub skipped: Vec<String>,
    #[serde(skip)]
    pub series: Vec<HminRow>,
}

impl VerificationReport {
    fn empty(title: &str, params: HarnackParams) -> Self {
        VerificationReport {
            title: title.to_string(),
            params,
            constants: None,
            tolerances: Vec::new(),
            checks: Vec::new(),
            config_error: None,
            skipped: Vec::new(),
            series: Vec::new(),
        }
    }

    /// Overall verdict: no configuration error and every check passed.
    pub fn passed(&self) -> bool {
        self.config_error.is_none() && self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// One `key=value` record per check, preceded by the parameters,
    /// constants and tolerances in force.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "report {}", self.title);
        let p = &self.params;
        let _ = writeln!(
            out,
            "params alpha={} beta={} n={} k={} d={}",
            p.alpha, p.beta, p.n, p.k, p.d
        );
        if let Some(c) = &self.constants {
            let _ = writeln!(out, "constants a={} b={} c={} q={}", c.a, c.b, c.c, c.q);
        }
        for (name, v) in &self.tolerances {
            let _ = writeln!(out, "tolerance {name}={v}");
        }
        if let Some(e) = &self.config_error {
            let _ = writeln!(out, "config_error {e}");
        }
        for c in &self.checks {
            let loc = match &c.location {
                Some(l) => format!(
                    " t={} x={}",
                    l.t,
                    l.x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
                ),
                None => String::new(),
            };
            let _ = write!(
                out,
                "check name={} status={} value={:.16e} threshold={:.16e} margin={:.16e}{loc}",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.value,
                c.threshold,
                c.margin
            );
            if !c.note.is_empty() {
                let _ = write!(out, " note=\"{}\"", c.note);
            }
            out.push('\n');
        }
        for s in &self.skipped {
            let _ = writeln!(out, "skipped {s}");
        }
        let _ = writeln!(
            out,
            "overall {}",
            if self.passed() { "pass" } else { "FAIL" }
        );
        out
    }

    pub fn to_json(&self) -> String {
        let mut value = serde_json::to_value(self).unwrap_or(serde_json::Value::Null);
        if let serde_json::Value::Object(map) = &mut value {
            map.insert("passed".into(), serde_json::Value::Bool(self.passed()));
        }
        serde_json::to_string_pretty(&value).unwrap_or_default()
    }

    /// `t,h_min,x0[,x1,x2],p2_min,p3_min` with 17 significant digits.
    pub fn series_csv(&self) -> String {
        let dim = self.series.first().map_or(1, |r| r.argmin.len());
        let mut out = String::from("t,h_min,");
        for a in 0..dim {
            let _ = write!(out, "x{a},");
        }
        out.push_str("p2_min,p3_min\n");
        for r in &self.series {
            let _ = write!(out, "{:.16e},{:.16e},", r.t, r.h_min);
            for x in &r.argmin {
                let _ = write!(out, "{x:.16e},");
            }
            let _ = writeln!(out, "{:.16e},{:.16e}", r.p2_min, r.p3_min);
        }
        out
    }
}

/// Snapshots with `t ≥ t_min`, allowing half a step of slack for the
/// nearest-step snapshot placement.
fn in_window(traj: &Trajectory, t: f64, t_min: f64) -> bool {
    t > 0.0 && t >= t_min - 0.5 * traj.dt()
}

/// Checks `h ≥ -tol`, `P₂ ≥ -tol`, `P₃ ≥ -tol` and `P₄ ≡ 0` on every
/// snapshot with `t ≥ t_min`, and that `P₃` dominates its completed-square
/// bound, which in turn is at least `d·φ(t)`.
///
/// Inadmissible parameters give a report with `config_error` set; a
/// snapshot below the logarithm floor is an `Err`.
pub fn verify_differential(
    traj: &Trajectory,
    p: &HarnackParams,
    t_min: f64,
    tol: f64,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::empty("differential_harnack", *p);
    report.tolerances = vec![("t_min".into(), t_min), ("h_tol".into(), tol)];
    let dc = match derive_constants(p) {
        Ok(dc) => dc,
        Err(e) => {
            report.config_error = Some(e.to_string());
            return Ok(report);
        }
    };
    report.constants = Some(dc);
    let grid = *traj.grid();

    let mut worst_h: Option<(f64, Location)> = None;
    let mut worst_p2: Option<(f64, f64)> = None;
    let mut worst_p3: Option<(f64, f64)> = None;
    let mut worst_square = f64::INFINITY;
    let mut worst_chain = f64::INFINITY;
    let mut worst_p4 = 0.0f64;
    let mut checked = 0usize;

    for snap in traj.snapshots().iter().filter(|s| s.t > 0.0) {
        let u = log_field(&snap.field)?;
        let h = harnack_quantity(&u, p, &dc, snap.t)?;
        let terms = p_terms(&u, &h, p, &dc, snap.t)?;
        let (argmin, h_min) = h.argmin();
        let (p2_min, p3_min) = (terms.p2.min(), terms.p3.min());
        report.series.push(HminRow {
            t: snap.t,
            h_min,
            argmin: grid.coords(argmin),
            p2_min,
            p3_min,
        });
        if !in_window(traj, snap.t, t_min) {
            continue;
        }
        checked += 1;
        if worst_h.as_ref().is_none_or(|(v, _)| h_min < *v) {
            worst_h = Some((h_min, Location::at(&grid, snap.t, argmin)));
        }
        if worst_p2.is_none_or(|(v, _)| p2_min < v) {
            worst_p2 = Some((p2_min, snap.t));
        }
        if worst_p3.is_none_or(|(v, _)| p3_min < v) {
            worst_p3 = Some((p3_min, snap.t));
        }
        let lb = terms.p3_lower_bound;
        let scale = lb.abs().max(1.0);
        worst_square = worst_square.min((p3_min - lb) / scale);
        let phi = dc.phi(snap.t)?;
        worst_chain = worst_chain.min((lb - dc.d * phi) / scale);
        worst_p4 = worst_p4.max(terms.p4.max_abs());
    }

    if checked == 0 {
        report.config_error = Some(format!("no snapshot with t >= {t_min}"));
        return Ok(report);
    }
    let (h_min, h_loc) = worst_h.expect("checked > 0");
    report
        .checks
        .push(CheckRecord::new("harnack_nonnegative", h_min, -tol, Some(h_loc)));
    let (p2, t2) = worst_p2.expect("checked > 0");
    report.checks.push(
        CheckRecord::new("p2_nonnegative", p2, -tol, None).with_note(format!("worst at t={t2}")),
    );
    let (p3, t3) = worst_p3.expect("checked > 0");
    report.checks.push(
        CheckRecord::new("p3_nonnegative", p3, -tol, None).with_note(format!("worst at t={t3}")),
    );
    report.checks.push(
        CheckRecord::new("p3_above_completed_square", worst_square, -1e-9, None)
            .with_note("relative to max(1, |bound|)"),
    );
    report.checks.push(
        CheckRecord::new("completed_square_above_d_phi", worst_chain, -1e-9, None)
            .with_note("relative to max(1, |bound|)"),
    );
    report
        .checks
        .push(CheckRecord::new("p4_zero", -worst_p4, 0.0, None));
    Ok(report)
}

fn check_pair_times(t1: f64, t2: f64) -> Result<()> {
    if !(t1 > 0.0 && t2 > t1 && t2.is_finite()) {
        return Err(Error::Domain(format!(
            "classical Harnack needs 0 < t1 < t2, got t1 = {t1}, t2 = {t2}"
        )));
    }
    Ok(())
}

/// The stated classical Harnack lower bound
/// `exp(-d²/(4(1-α)Δt)) · ((e^{-2qt₂}-1)/(e^{-2qt₁}-1))^{-1/a} · exp(-(4q+b)/(2a)·Δt)`.
pub fn classical_harnack_rhs_paper(
    p: &HarnackParams,
    dc: &DerivedConstants,
    d_geo: f64,
    t1: f64,
    t2: f64,
) -> Result<f64> {
    check_pair_times(t1, t2)?;
    let dt = t2 - t1;
    let q = dc.q;
    let ratio = (-2.0 * q * t2).exp_m1() / (-2.0 * q * t1).exp_m1();
    let log = -d_geo * d_geo / (4.0 * (1.0 - p.alpha) * dt)
        - ratio.ln() / dc.a
        - (4.0 * q + dc.b) / (2.0 * dc.a) * dt;
    Ok(log.exp())
}

/// `exp(-d²/(4(1-α)Δt) - ∫_{t1}^{t2} φ)`, the bound obtained by integrating
/// `φ` exactly.
pub fn classical_harnack_rhs_tight(
    p: &HarnackParams,
    dc: &DerivedConstants,
    d_geo: f64,
    t1: f64,
    t2: f64,
) -> Result<f64> {
    check_pair_times(t1, t2)?;
    let dt = t2 - t1;
    let log = -d_geo * d_geo / (4.0 * (1.0 - p.alpha) * dt) - dc.phi_integral(t1, t2)?;
    Ok(log.exp())
}

/// `∫_{t1}^{t2} φ` by adaptive Simpson quadrature to relative accuracy `rel_tol`.
pub fn phi_integral_quadrature(
    dc: &DerivedConstants,
    t1: f64,
    t2: f64,
    rel_tol: f64,
) -> Result<f64> {
    check_pair_times(t1, t2)?;
    let f = |t: f64| dc.phi(t).expect("t > 0 inside the interval");
    let (fa, fm, fb) = (f(t1), f(0.5 * (t1 + t2)), f(t2));
    let whole = (t2 - t1) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = rel_tol * whole.abs();
    Ok(adaptive_simpson(&f, t1, t2, fa, fm, fb, whole, tol, 60))
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// A space-time pair `(x1, t1)`, `(x2, t2)` given by grid point and snapshot indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceTimePair {
    pub x1: usize,
    pub snap1: usize,
    pub x2: usize,
    pub snap2: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalOptions {
    pub pairs: usize,
    pub seed: u64,
    pub t_min: f64,
    /// Slack subtracted from both bounds before comparing with the ratio.
    pub tol: f64,
}

impl Default for ClassicalOptions {
    fn default() -> Self {
        ClassicalOptions {
            pairs: 100,
            seed: 7,
            t_min: DEFAULT_T_MIN,
            tol: 0.0,
        }
    }
}

/// Draws `count` pairs on distinct snapshots with `t ≥ t_min`, ordered so
/// that `t1 < t2`.
pub fn sample_pairs(
    traj: &Trajectory,
    count: usize,
    seed: u64,
    t_min: f64,
) -> Result<Vec<SpaceTimePair>> {
    let eligible: Vec<usize> = (0..traj.len())
        .filter(|&i| in_window(traj, traj.snapshots()[i].t, t_min))
        .collect();
    if eligible.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need two snapshots with t >= {t_min}, have {}",
            eligible.len()
        )));
    }
    let points = traj.grid().len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let a = rng.random_range(0..eligible.len());
            let mut b = rng.random_range(0..eligible.len() - 1);
            if b >= a {
                b += 1;
            }
            let (s1, s2) = (eligible[a.min(b)], eligible[a.max(b)]);
            SpaceTimePair {
                x1: rng.random_range(0..points),
                snap1: s1,
                x2: rng.random_range(0..points),
                snap2: s2,
            }
        })
        .collect())
}

/// Random-pair classical Harnack check, see [`verify_classical_pairs`].
pub fn verify_classical(
    traj: &Trajectory,
    p: &HarnackParams,
    opts: &ClassicalOptions,
) -> Result<VerificationReport> {
    let pairs = sample_pairs(traj, opts.pairs, opts.seed, opts.t_min)?;
    let mut report = verify_classical_pairs(traj, p, &pairs, opts.tol)?;
    report.tolerances.push(("t_min".into(), opts.t_min));
    report.tolerances.push(("seed".into(), opts.seed as f64));
    Ok(report)
}

/// For each pair with `t2 > t1` checks
/// `f(x2,t2)/f(x1,t1) ≥ rhs_paper - tol`, `≥ rhs_tight - tol`,
/// `rhs_tight ≥ rhs_paper`, and that the closed-form `∫φ` matches
/// quadrature to `1e-10`. Pairs with `t2 ≤ t1` are skipped and listed.
pub fn verify_classical_pairs(
    traj: &Trajectory,
    p: &HarnackParams,
    pairs: &[SpaceTimePair],
    tol: f64,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::empty("classical_harnack", *p);
    report.tolerances = vec![("ratio_tol".into(), tol)];
    let dc = match derive_constants(p) {
        Ok(dc) => dc,
        Err(e) => {
            report.config_error = Some(e.to_string());
            return Ok(report);
        }
    };
    report.constants = Some(dc);
    let grid = *traj.grid();
    let snaps = traj.snapshots();

    let mut worst_paper: Option<(f64, Location)> = None;
    let mut worst_tight: Option<(f64, Location)> = None;
    let mut worst_order: Option<(f64, Location)> = None;
    let mut worst_integral = 0.0f64;
    let mut used = 0usize;

    for (k, pair) in pairs.iter().enumerate() {
        if pair.snap1 >= snaps.len() || pair.snap2 >= snaps.len() {
            return Err(Error::Index {
                index: pair.snap1.max(pair.snap2),
                valid: format!("0..{}", snaps.len()),
            });
        }
        grid.check_index(pair.x1)?;
        grid.check_index(pair.x2)?;
        let (t1, t2) = (snaps[pair.snap1].t, snaps[pair.snap2].t);
        if !(t2 > t1) || t1 <= 0.0 {
            report.skipped.push(format!(
                "pair {k}: t1={t1} t2={t2} (needs 0 < t1 < t2)"
            ));
            continue;
        }
        used += 1;
        let f1 = snaps[pair.snap1].field.values()[pair.x1];
        let f2 = snaps[pair.snap2].field.values()[pair.x2];
        let ratio = f2 / f1;
        let d_geo = grid.geodesic_distance(pair.x1, pair.x2)?;
        let paper = classical_harnack_rhs_paper(p, &dc, d_geo, t1, t2)?;
        let tight = classical_harnack_rhs_tight(p, &dc, d_geo, t1, t2)?;
        let loc = Location {
            t: t2,
            x: grid.coords(pair.x2),
        };
        let mp = ratio - (paper - tol);
        let mt = ratio - (tight - tol);
        let mo = tight - paper;
        if worst_paper.as_ref().is_none_or(|(v, _)| mp < *v) {
            worst_paper = Some((mp, loc.clone()));
        }
        if worst_tight.as_ref().is_none_or(|(v, _)| mt < *v) {
            worst_tight = Some((mt, loc.clone()));
        }
        if worst_order.as_ref().is_none_or(|(v, _)| mo < *v) {
            worst_order = Some((mo, loc));
        }
        let closed = dc.phi_integral(t1, t2)?;
        let quad = phi_integral_quadrature(&dc, t1, t2, 1e-13)?;
        worst_integral = worst_integral.max(((closed - quad) / closed).abs());
    }

    if used == 0 {
        report.config_error = Some("no usable pair (all had t2 <= t1)".into());
        return Ok(report);
    }
    let (v, l) = worst_paper.expect("used > 0");
    report.checks.push(CheckRecord::new("ratio_above_paper_bound", v, 0.0, Some(l)).with_note(
        format!("{used} pairs; value is ratio - (rhs_paper - tol)"),
    ));
    let (v, l) = worst_tight.expect("used > 0");
    report.checks.push(
        CheckRecord::new("ratio_above_tight_bound", v, 0.0, Some(l))
            .with_note("value is ratio - (rhs_tight - tol)"),
    );
    let (v, l) = worst_order.expect("used > 0");
    report.checks.push(
        CheckRecord::new("tight_bound_dominates_paper", v, 0.0, Some(l))
            .with_note("value is rhs_tight - rhs_paper"),
    );
    report.checks.push(
        CheckRecord::new("phi_integral_quadrature", -worst_integral, -1e-10, None)
            .with_note("value is -max relative gap between closed form and quadrature"),
    );
    Ok(report)
}

/// Observed convergence order from three successive halvings of `h`:
/// `log2(|v₀ - v₁| / |v₁ - v₂|)`.
pub fn richardson_slope(coarse: f64, medium: f64, fine: f64) -> f64 {
    ((coarse - medium).abs() / (medium - fine).abs()).log2()
}

/// `log2(e_coarse / e_fine)` for two errors one halving apart.
pub fn error_slope(coarse_err: f64, fine_err: f64) -> f64 {
    (coarse_err / fine_err).log2()
}
