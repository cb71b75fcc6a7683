//! Time integration of `f_t = Δf + f - f³` on a flat torus.
//!
//! Two schemes share the same discrete Laplacian: forward Euler, and an
//! IMEX step `(I - dt Δ_h) f' = f + dt (f - f³)` whose linear solve is exact
//! in the discrete Fourier basis. While evolving, every intermediate field is
//! checked against the band `[ε, 1 - ε]`, `ε = 1e-12`. Values are never
//! clamped; leaving the band aborts the run.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus_grid::{forward_gradient_sq_into, laplacian_into, ScalarField, TorusGrid};

/// Width of the forbidden margin at 0 and 1.
pub const CONFINEMENT_FLOOR: f64 = 1e-12;
/// Largest step allowed for the explicitly treated reaction term, from
/// `dt · max|1 - 3f²| ≤ 0.1` on `[0, 1]`.
pub const REACTION_DT_LIMIT: f64 = 0.05;
pub const DEFAULT_SIGMA: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    ExplicitEuler,
    Imex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeStep {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub dt: TimeStep,
    /// CFL safety factor in `(0, 1]`.
    pub sigma: f64,
}

impl SchemeConfig {
    pub fn explicit_auto() -> Self {
        SchemeConfig {
            kind: SchemeKind::ExplicitEuler,
            dt: TimeStep::Auto,
            sigma: DEFAULT_SIGMA,
        }
    }

    pub fn explicit(dt: f64) -> Self {
        SchemeConfig {
            kind: SchemeKind::ExplicitEuler,
            dt: TimeStep::Fixed(dt),
            sigma: DEFAULT_SIGMA,
        }
    }

    pub fn imex(dt: f64) -> Self {
        SchemeConfig {
            kind: SchemeKind::Imex,
            dt: TimeStep::Fixed(dt),
            sigma: DEFAULT_SIGMA,
        }
    }

    /// The step the scheme will nominally use on `grid`.
    pub fn resolve_dt(&self, grid: &TorusGrid) -> Result<f64> {
        if !(self.sigma > 0.0 && self.sigma <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma must lie in (0, 1], got {}",
                self.sigma
            )));
        }
        match (self.kind, self.dt) {
            (_, TimeStep::Fixed(dt)) if !(dt.is_finite() && dt > 0.0) => Err(
                Error::InvalidParameter(format!("dt must be positive, got {dt}")),
            ),
            (SchemeKind::ExplicitEuler, TimeStep::Fixed(dt)) => {
                check_cfl(grid, dt)?;
                Ok(dt)
            }
            (SchemeKind::Imex, TimeStep::Fixed(dt)) => Ok(dt),
            (SchemeKind::ExplicitEuler, TimeStep::Auto) => Ok(auto_explicit_dt(grid, self.sigma)),
            (SchemeKind::Imex, TimeStep::Auto) => Ok(REACTION_DT_LIMIT),
        }
    }
}

/// `σ / Σ_i(2/h_i²)`, further capped by the reaction limit.
pub fn auto_explicit_dt(grid: &TorusGrid, sigma: f64) -> f64 {
    (sigma / grid.stencil_stiffness()).min(REACTION_DT_LIMIT)
}

/// The hard stability limit of forward Euler (`σ = 1`).
pub fn explicit_stability_limit(grid: &TorusGrid) -> f64 {
    auto_explicit_dt(grid, 1.0)
}

fn check_cfl(grid: &TorusGrid, dt: f64) -> Result<()> {
    let limit = explicit_stability_limit(grid);
    if dt > 1.01 * limit {
        Err(Error::CflViolation { dt, limit })
    } else {
        Ok(())
    }
}

#[inline]
fn reaction(f: f64) -> f64 {
    f - f * f * f
}

/// One forward Euler step `f + dt (Δ_h f + f - f³)`.
pub fn step_explicit(f: &ScalarField, dt: f64) -> Result<ScalarField> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    check_cfl(f.grid(), dt)?;
    let mut lap = vec![0.0; f.len()];
    let mut out = vec![0.0; f.len()];
    explicit_kernel(f.grid(), f.values(), &mut lap, &mut out, dt);
    ScalarField::new(*f.grid(), out)
}

/// Writes the Euler update into `out` and returns `(min, max)` of it.
fn explicit_kernel(
    grid: &TorusGrid,
    cur: &[f64],
    lap: &mut [f64],
    out: &mut [f64],
    dt: f64,
) -> (f64, f64) {
    if grid.dim() == 1 {
        return explicit_kernel_line(cur, out, dt, 1.0 / grid.spacing(0).powi(2));
    }
    laplacian_into(grid, cur, lap);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for ((o, &c), &l) in out.iter_mut().zip(cur).zip(lap.iter()) {
        let v = c + dt * (l + reaction(c));
        *o = v;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Fused single-pass version of [`explicit_kernel`] on T¹.
fn explicit_kernel_line(cur: &[f64], out: &mut [f64], dt: f64, w: f64) -> (f64, f64) {
    let n = cur.len();
    let update = |m: f64, c: f64, p: f64| c + dt * (w * (m - 2.0 * c + p) + reaction(c));
    out[0] = update(cur[n - 1], cur[0], cur[1]);
    out[n - 1] = update(cur[n - 2], cur[n - 1], cur[0]);
    let (mut lo, mut hi) = (out[0].min(out[n - 1]), out[0].max(out[n - 1]));
    for (o, win) in out[1..n - 1].iter_mut().zip(cur.windows(3)) {
        let v = update(win[0], win[1], win[2]);
        *o = v;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// One IMEX step `(I - dt Δ_h)⁻¹ (f + dt (f - f³))`.
pub fn step_imex(f: &ScalarField, dt: f64) -> Result<ScalarField> {
    let mut stepper = ImexStepper::new(*f.grid(), dt)?;
    let mut out = vec![0.0; f.len()];
    stepper.step(f.values(), &mut out);
    ScalarField::new(*f.grid(), out)
}

struct AxisFft {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Reusable IMEX stepper: FFT plans and the diagonal of `(I - dt Δ_h)⁻¹`.
pub struct ImexStepper {
    grid: TorusGrid,
    dt: f64,
    axes: Vec<AxisFft>,
    /// `1 / (N (1 - dt λ_κ))`, with `λ_κ = Σ_i (2/h_i²)(cos(2πκ_i/N_i) - 1)`.
    inverse_symbol: Vec<f64>,
    spectrum: Vec<Complex64>,
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl ImexStepper {
    pub fn new(grid: TorusGrid, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let mut planner = FftPlanner::new();
        let axes: Vec<AxisFft> = grid
            .points()
            .iter()
            .map(|&n| AxisFft {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
            .collect();
        let eig: Vec<Vec<f64>> = (0..grid.dim())
            .map(|a| {
                let n = grid.points()[a];
                let w = 2.0 / grid.spacing(a).powi(2);
                (0..n)
                    .map(|k| w * ((2.0 * PI * k as f64 / n as f64).cos() - 1.0))
                    .collect()
            })
            .collect();
        let total = grid.len() as f64;
        let inverse_symbol = (0..grid.len())
            .map(|i| {
                let m = grid.multi_index(i);
                let lambda: f64 = (0..grid.dim()).map(|a| eig[a][m[a]]).sum();
                1.0 / (total * (1.0 - dt * lambda))
            })
            .collect();
        let scratch_len = axes
            .iter()
            .map(|a| {
                a.forward
                    .get_inplace_scratch_len()
                    .max(a.inverse.get_inplace_scratch_len())
            })
            .max()
            .unwrap_or(0);
        let max_n = grid.points().iter().copied().max().unwrap_or(1);
        Ok(ImexStepper {
            grid,
            dt,
            axes,
            inverse_symbol,
            spectrum: vec![Complex64::new(0.0, 0.0); grid.len()],
            line: vec![Complex64::new(0.0, 0.0); max_n],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn transform(&mut self, inverse: bool) {
        for axis in 0..self.grid.dim() {
            let (outer, n, inner) = self.grid.axis_layout(axis);
            let plan = if inverse {
                &self.axes[axis].inverse
            } else {
                &self.axes[axis].forward
            };
            if inner == 1 {
                for chunk in self.spectrum.chunks_exact_mut(n) {
                    plan.process_with_scratch(chunk, &mut self.scratch);
                }
                continue;
            }
            let line = &mut self.line[..n];
            for o in 0..outer {
                for k in 0..inner {
                    let base = o * n * inner + k;
                    for (j, z) in line.iter_mut().enumerate() {
                        *z = self.spectrum[base + j * inner];
                    }
                    plan.process_with_scratch(line, &mut self.scratch);
                    for (j, z) in line.iter().enumerate() {
                        self.spectrum[base + j * inner] = *z;
                    }
                }
            }
        }
    }

    /// Advances `cur` by one step into `out`, returning `(min, max)`.
    pub fn step(&mut self, cur: &[f64], out: &mut [f64]) -> (f64, f64) {
        let dt = self.dt;
        for (z, &c) in self.spectrum.iter_mut().zip(cur) {
            *z = Complex64::new(c + dt * reaction(c), 0.0);
        }
        self.transform(false);
        for (z, &s) in self.spectrum.iter_mut().zip(&self.inverse_symbol) {
            *z *= s;
        }
        self.transform(true);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (o, z) in out.iter_mut().zip(&self.spectrum) {
            *o = z.re;
            lo = lo.min(z.re);
            hi = hi.max(z.re);
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: ScalarField,
}

/// Extremes observed by the confinement monitor over a whole run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfinementSummary {
    pub steps: usize,
    pub min_seen: f64,
    pub max_seen: f64,
    pub breaches: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    snapshots: Vec<Snapshot>,
    scheme: SchemeConfig,
    /// Step actually used.
    dt: f64,
    monitor: Option<ConfinementSummary>,
}

impl Trajectory {
    /// Assembles a trajectory from stored snapshots (e.g. read from disk).
    pub fn from_snapshots(snapshots: Vec<Snapshot>, scheme: SchemeConfig, dt: f64) -> Result<Self> {
        let first = snapshots
            .first()
            .ok_or_else(|| Error::InvalidParameter("trajectory has no snapshots".into()))?;
        if first.t != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "first snapshot must be at t = 0, got {}",
                first.t
            )));
        }
        let grid = *first.field.grid();
        for w in snapshots.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(Error::InvalidParameter(format!(
                    "snapshot times not increasing: {} then {}",
                    w[0].t, w[1].t
                )));
            }
            if *w[1].field.grid() != grid {
                return Err(Error::InvalidParameter(
                    "snapshots live on different grids".into(),
                ));
            }
        }
        Ok(Trajectory {
            snapshots,
            scheme,
            dt,
            monitor: None,
        })
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn grid(&self) -> &TorusGrid {
        self.snapshots[0].field.grid()
    }

    pub fn scheme(&self) -> &SchemeConfig {
        &self.scheme
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("nonempty")
    }

    pub fn confinement(&self) -> Option<&ConfinementSummary> {
        self.monitor.as_ref()
    }
}

fn check_band(min: f64, max: f64) -> bool {
    min >= CONFINEMENT_FLOOR && max <= 1.0 - CONFINEMENT_FLOOR
}

/// Evolves `f0` to `t_end`, keeping snapshots at the steps nearest to the
/// multiples of `snapshot_every` (plus `t = 0` and `t_end`).
///
/// The step count is `ceil(t_end / dt)` and the step is shrunk to
/// `t_end / steps` so the run ends exactly at `t_end`.
pub fn evolve(
    f0: &ScalarField,
    t_end: f64,
    scheme: SchemeConfig,
    snapshot_every: f64,
) -> Result<Trajectory> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidParameter(format!("t_end must be positive, got {t_end}")));
    }
    if !(snapshot_every.is_finite() && snapshot_every > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "snapshot_every must be positive, got {snapshot_every}"
        )));
    }
    if !check_band(f0.min(), f0.max()) {
        return Err(Error::InvalidParameter(format!(
            "initial data must lie in (0, 1); range is [{}, {}]",
            f0.min(),
            f0.max()
        )));
    }
    let grid = *f0.grid();
    let nominal = scheme.resolve_dt(&grid)?;
    let steps = ((t_end / nominal) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;

    let mut marks: Vec<usize> = Vec::new();
    let mut j = 0usize;
    loop {
        let k = ((j as f64 * snapshot_every) / dt).round() as usize;
        if k >= steps {
            break;
        }
        if marks.last() != Some(&k) {
            marks.push(k);
        }
        j += 1;
    }
    marks.push(steps);

    let mut cur = f0.values().to_vec();
    let mut next = vec![0.0; cur.len()];
    let mut lap = vec![0.0; cur.len()];
    let mut imex = match scheme.kind {
        SchemeKind::Imex => Some(ImexStepper::new(grid, dt)?),
        SchemeKind::ExplicitEuler => None,
    };
    let mut summary = ConfinementSummary {
        steps,
        min_seen: f0.min(),
        max_seen: f0.max(),
        breaches: 0,
    };

    let mut snapshots = Vec::with_capacity(marks.len());
    let mut mark = marks.iter().peekable();
    for step in 0..=steps {
        if mark.peek() == Some(&&step) {
            mark.next();
            let t = step as f64 * dt;
            // the band check below works on min/max, which skip NaN; the
            // finiteness check here catches it at the next snapshot
            let field = ScalarField::new(grid, cur.clone()).map_err(|_| {
                Error::ConfinementBreach {
                    t,
                    min: f64::NAN,
                    max: f64::NAN,
                }
            })?;
            snapshots.push(Snapshot { t, field });
        }
        if step == steps {
            break;
        }
        let (lo, hi) = match imex.as_mut() {
            Some(s) => s.step(&cur, &mut next),
            None => explicit_kernel(&grid, &cur, &mut lap, &mut next, dt),
        };
        summary.min_seen = summary.min_seen.min(lo);
        summary.max_seen = summary.max_seen.max(hi);
        if !check_band(lo, hi) {
            return Err(Error::ConfinementBreach {
                t: (step + 1) as f64 * dt,
                min: lo,
                max: hi,
            });
        }
        std::mem::swap(&mut cur, &mut next);
    }
    // pin the final time to t_end exactly
    if let Some(last) = snapshots.last_mut() {
        last.t = t_end;
    }

    Ok(Trajectory {
        snapshots,
        scheme,
        dt,
        monitor: Some(summary),
    })
}

/// Random band-limited initial data: a real Fourier series with all
/// wavevectors `|κ_i| ≤ modes`, affinely rescaled so its samples span
/// exactly `[fmin, fmax]`. The same seed always gives the same field.
pub fn generate_ic(
    grid: &TorusGrid,
    seed: u64,
    fmin: f64,
    fmax: f64,
    modes: u32,
) -> Result<ScalarField> {
    if !(fmin > 0.0 && fmin < fmax && fmax < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < fmin < fmax < 1, got fmin = {fmin}, fmax = {fmax}"
        )));
    }
    if modes == 0 {
        return Err(Error::InvalidParameter("modes must be at least 1".into()));
    }
    let dim = grid.dim();
    let m = modes as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let side = (2 * m + 1) as usize;
    let mut terms: Vec<([f64; 3], f64, f64)> = Vec::new();
    for code in 0..side.pow(dim as u32) {
        let mut kappa = [0i64; 3];
        let mut c = code;
        for axis in (0..dim).rev() {
            kappa[axis] = (c % side) as i64 - m;
            c /= side;
        }
        // one representative of each ±κ pair, κ = 0 excluded
        match kappa[..dim].iter().find(|&&k| k != 0) {
            Some(&first) if first > 0 => {}
            _ => continue,
        }
        let amplitude: f64 = rng.random_range(-1.0..1.0);
        let phase: f64 = rng.random_range(0.0..2.0 * PI);
        let mut wave = [0.0; 3];
        for axis in 0..dim {
            wave[axis] = 2.0 * PI * kappa[axis] as f64 / grid.lengths()[axis];
        }
        terms.push((wave, amplitude, phase));
    }

    let raw: Vec<f64> = (0..grid.len())
        .map(|i| {
            let x = grid.coords(i);
            terms
                .iter()
                .map(|(w, a, p)| {
                    let arg: f64 = (0..dim).map(|ax| w[ax] * x[ax]).sum::<f64>() + p;
                    a * arg.cos()
                })
                .sum()
        })
        .collect();
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi - lo > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "seed {seed} produced a constant field"
        )));
    }
    let scale = (fmax - fmin) / (hi - lo);
    let values = raw
        .iter()
        .map(|&v| {
            if v == lo {
                fmin
            } else if v == hi {
                fmax
            } else {
                (fmin + (v - lo) * scale).clamp(fmin, fmax)
            }
        })
        .collect();
    ScalarField::new(*grid, values)
}

/// Ginzburg-Landau energy `Σ [½|D⁺f|² + ¼(f² - 1)²] · Π h_i`, the Lyapunov
/// functional of the semi-discrete flow.
pub fn discrete_energy(f: &ScalarField) -> f64 {
    let mut grad = vec![0.0; f.len()];
    forward_gradient_sq_into(f.grid(), f.values(), &mut grad);
    let sum: f64 = f
        .values()
        .iter()
        .zip(&grad)
        .map(|(&v, &g)| 0.5 * g + 0.25 * (v * v - 1.0).powi(2))
        .sum();
    sum * f.grid().cell_volume()
}
