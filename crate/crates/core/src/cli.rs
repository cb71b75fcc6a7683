//! The `ac-harnack` command line: `params`, `simulate`,
//! `verify-differential`, `verify-classical` and `waves`.
//!
//! Exit codes: 0 all checks pass, 1 a verification check failed,
//! 2 configuration error, 3 runtime guard (confinement or log floor),
//! 4 I/O or malformed input files.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::ac_solver::{evolve, SchemeConfig, SchemeKind, Snapshot, TimeStep, Trajectory};
use crate::config::{OutputFormat, RunConfig};
use crate::error::{Error, Result};
use crate::field_io::{read_field, write_field};
use crate::harnack_params::{beta_admissible_max, derive_constants, phi_floor_check};
use crate::harnack_verify::{
    verify_classical, verify_classical_pairs, verify_differential, CheckRecord, ClassicalOptions,
    VerificationReport,
};
use crate::wave_tools::{
    corollary_bound_gap, modica_bound_gap, polynomial_comparison, shoot_standing_wave,
    sign_changes, tanh_profile, uniform_xs,
};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_GUARD: u8 = 3;
pub const EXIT_IO: u8 = 4;

const MANIFEST_MAGIC: &str = "AC-TRAJECTORY v1";
pub const MANIFEST_NAME: &str = "manifest.txt";

#[derive(Debug, Parser)]
#[command(name = "ac-harnack", version, about = "Allen-Cahn flow and Harnack estimate checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces every seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Admissibility verdict, derived constants and φ samples.
    Params(Common),
    /// Evolve the initial data and write snapshots plus a manifest.
    Simulate(Common),
    /// Check h ≥ -tol and the signs of the grouped terms.
    VerifyDifferential(Common),
    /// Check the integrated Harnack ratio bound on space-time pairs.
    VerifyClassical(Common),
    /// Polynomial comparison, Modica margin, gradient-bound gap, shooting.
    Waves(Common),
}

/// Exit code for an error raised before or during a subcommand.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ConfinementBreach { .. } | Error::FloorBreach { .. } | Error::NoConvergence(_) => {
            EXIT_GUARD
        }
        Error::Io { .. } | Error::Format { .. } => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    let (name, common) = match &cli.command {
        Command::Params(c) => ("params", c),
        Command::Simulate(c) => ("simulate", c),
        Command::VerifyDifferential(c) => ("verify-differential", c),
        Command::VerifyClassical(c) => ("verify-classical", c),
        Command::Waves(c) => ("waves", c),
    };
    let started = Instant::now();
    let outcome = Context::new(common).and_then(|ctx| {
        let passed = match &cli.command {
            Command::Params(_) => ctx.params(),
            Command::Simulate(_) => ctx.simulate(),
            Command::VerifyDifferential(_) => ctx.verify_differential(),
            Command::VerifyClassical(_) => ctx.verify_classical(),
            Command::Waves(_) => ctx.waves(),
        }?;
        ctx.log(name, started)?;
        Ok(passed)
    });
    match outcome {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("ac-harnack {name}: {e}");
            exit_code(&e)
        }
    }
}

struct Context {
    config: RunConfig,
    out: Option<PathBuf>,
    quiet: bool,
}

impl Context {
    fn new(common: &Common) -> Result<Self> {
        let mut config = RunConfig::load(&common.config)?;
        if let Some(seed) = common.seed {
            config.override_seed(seed);
        }
        let out = common
            .out
            .clone()
            .or_else(|| config.output.directory.as_ref().map(|d| config.resolve(d)));
        Ok(Context {
            config,
            out,
            quiet: common.quiet,
        })
    }

    fn say(&self, text: &str) {
        if !self.quiet {
            print!("{text}");
        }
    }

    fn out_dir(&self) -> Result<Option<&Path>> {
        match &self.out {
            Some(dir) => {
                fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                Ok(Some(dir))
            }
            None => Ok(None),
        }
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        if let Some(dir) = self.out_dir()? {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }

    fn wants(&self, format: OutputFormat) -> bool {
        self.config.output.formats.contains(&format)
    }

    /// Wall-clock timing lives here only, so reports stay byte-identical.
    fn log(&self, command: &str, started: Instant) -> Result<()> {
        let line = format!(
            "command={command} elapsed_ms={}\n",
            started.elapsed().as_millis()
        );
        self.write("run.log", &line)
    }

    fn params(&self) -> Result<bool> {
        let h = self
            .config
            .harnack
            .as_ref()
            .ok_or_else(|| Error::Config("missing [harnack] section".into()))?;
        let p = self.config.harnack_params()?;
        let dc = derive_constants(&p)?;
        let max = beta_admissible_max(p.alpha, p.n, p.k)?;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "params alpha={} beta={} n={} k={} d={}",
            p.alpha, p.beta, p.n, p.k, p.d
        );
        let _ = writeln!(out, "beta_source {}", match h.beta {
            crate::config::AutoOr::Auto(_) => "auto",
            crate::config::AutoOr::Value(_) => "explicit",
        });
        let _ = writeln!(out, "admissible yes beta_max={max}");
        let _ = writeln!(
            out,
            "constants a={:.16e} b={:.16e} c={:.16e} q={:.16e}",
            dc.a, dc.b, dc.c, dc.q
        );
        let (r1, r2) = dc.identity_residuals(p.beta);
        let _ = writeln!(out, "identity 2+c/(2beta)=b residual={r1:.3e}");
        let _ = writeln!(out, "identity 2+c/(4beta)=-a*beta residual={r2:.3e}");
        for t in [0.01, 0.1, 1.0, 10.0] {
            let _ = writeln!(out, "phi t={t} value={:.16e}", dc.phi(t)?);
        }
        let _ = writeln!(
            out,
            "phi_floor inf_phi={:.16e} meets_nk/(2alpha)={}",
            dc.phi_limit(),
            phi_floor_check(&dc, &p)
        );
        self.say(&out);
        self.write("params.txt", &out)?;
        Ok(true)
    }

    fn run_simulation(&self) -> Result<Trajectory> {
        let plan = self.config.simulation_plan()?;
        evolve(&plan.initial, plan.t_end, plan.scheme, plan.snapshot_every)
    }

    fn simulate(&self) -> Result<bool> {
        let plan = self.config.simulation_plan()?;
        let dir = self
            .out_dir()?
            .ok_or_else(|| Error::Config("simulate needs --out or output.directory".into()))?
            .to_path_buf();
        let traj = evolve(&plan.initial, plan.t_end, plan.scheme, plan.snapshot_every)?;
        write_trajectory(&dir, &traj)?;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "snapshots={} dt={:e} t_end={}",
            traj.len(),
            traj.dt(),
            traj.last().t
        );
        if let Some(c) = traj.confinement() {
            let _ = writeln!(
                out,
                "confinement steps={} min={:.16e} max={:.16e} breaches={}",
                c.steps, c.min_seen, c.max_seen, c.breaches
            );
            self.write(
                "confinement.txt",
                &format!(
                    "steps={}\nmin={:.16e}\nmax={:.16e}\nbreaches={}\n",
                    c.steps, c.min_seen, c.max_seen, c.breaches
                ),
            )?;
        }
        let last = traj.last();
        let _ = writeln!(
            out,
            "final min={:.16e} max={:.16e}",
            last.field.min(),
            last.field.max()
        );
        self.say(&out);
        Ok(true)
    }

    fn trajectory(&self) -> Result<Trajectory> {
        match &self.config.input {
            Some(input) => read_trajectory(&self.config.resolve(&input.manifest)),
            None => self.run_simulation(),
        }
    }

    fn emit_report(&self, report: &VerificationReport, stem: &str) -> Result<()> {
        let text = report.to_text();
        self.say(&text);
        if self.wants(OutputFormat::Text) {
            self.write(&format!("{stem}.txt"), &text)?;
        }
        if self.wants(OutputFormat::Json) {
            self.write(&format!("{stem}.json"), &report.to_json())?;
        }
        Ok(())
    }

    fn verify_differential(&self) -> Result<bool> {
        let p = self.config.harnack_params()?;
        let (t_min, tol) = self.config.harnack_window()?;
        let traj = self.trajectory()?;
        let report = verify_differential(&traj, &p, t_min, tol)?;
        self.emit_report(&report, "differential_report")?;
        if self.wants(OutputFormat::Csv) {
            self.write("h_min.csv", &report.series_csv())?;
        }
        Ok(report.passed())
    }

    fn verify_classical(&self) -> Result<bool> {
        let p = self.config.harnack_params()?;
        let (t_min, _) = self.config.harnack_window()?;
        let c = self.config.classical();
        let traj = self.trajectory()?;
        let report = match self.config.pair_list() {
            Some(pairs) => verify_classical_pairs(&traj, &p, &pairs, c.tol)?,
            None => verify_classical(
                &traj,
                &p,
                &ClassicalOptions {
                    pairs: c.pairs,
                    seed: c.seed,
                    t_min,
                    tol: c.tol,
                },
            )?,
        };
        self.emit_report(&report, "classical_report")?;
        Ok(report.passed())
    }

    fn waves(&self) -> Result<bool> {
        let w = self.config.waves();
        if w.n == 0 {
            return Err(Error::Config("waves.n must be at least 1".into()));
        }
        let cmp = polynomial_comparison(w.n, w.samples)
            .map_err(|e| Error::Config(e.to_string()))?;

        let xs = uniform_xs(-w.half_width, w.half_width, w.h)
            .map_err(|e| Error::Config(e.to_string()))?;
        let tanh = tanh_profile(&xs)?;
        let modica_exact = modica_bound_gap(&tanh)
            .iter()
            .fold(0.0f64, |m, g| m.max(g.abs()));
        let modica_fd = modica_bound_gap(&tanh.clone().without_slope())
            .iter()
            .fold(0.0f64, |m, g| m.max(g.abs()));

        let near = uniform_xs(w.h, 1.0, w.h).map_err(|e| Error::Config(e.to_string()))?;
        let gap = corollary_bound_gap(&tanh_profile(&near)?, w.n);
        let changes = sign_changes(&near, &gap);

        let sw = shoot_standing_wave(w.half_width, w.h).map_err(|e| match e {
            Error::NoConvergence(_) => e,
            other => Error::Config(other.to_string()),
        })?;
        let slope_err = (sw.slope_at_zero - std::f64::consts::FRAC_1_SQRT_2).abs();
        let inner = tanh_profile(sw.profile.xs())?;
        let shoot_dist = sw
            .profile
            .xs()
            .iter()
            .zip(sw.profile.ps().iter().zip(inner.ps()))
            .filter(|(x, _)| x.abs() <= 0.5 * w.half_width)
            .fold(0.0f64, |m, (_, (a, b))| m.max((a - b).abs()));

        let checks = vec![
            CheckRecord::new("modica_tanh_analytic", -modica_exact, -1e-12, None),
            CheckRecord::new("shooting_slope_at_zero", -slope_err, -1e-6, None)
                .with_note(format!("p'(0) = {:.16e}", sw.slope_at_zero)),
            CheckRecord::new("shooting_vs_tanh", -shoot_dist, -1e-5, None)
                .with_note("max-norm on [-X/2, X/2]"),
        ];
        let mut out = String::new();
        let _ = writeln!(out, "report waves n={} samples={} half_width={} h={}", w.n, w.samples, w.half_width, w.h);
        for x in &cmp.crossings {
            let _ = writeln!(out, "crossing x={x:.16e}");
        }
        let _ = writeln!(out, "modica_fd_max_gap={modica_fd:.16e}");
        match changes.first() {
            Some(x) => {
                let _ = writeln!(out, "corollary_gap_sign_change x={x:.16e}");
            }
            None => {
                let _ = writeln!(out, "corollary_gap_sign_change none on (0, 1]");
            }
        }
        let _ = writeln!(out, "shooting_iterations={}", sw.iterations);
        for c in &checks {
            let _ = writeln!(
                out,
                "check name={} status={} value={:.16e} threshold={:.16e} margin={:.16e}",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.value,
                c.threshold,
                c.margin
            );
        }
        let passed = checks.iter().all(|c| c.passed);
        let _ = writeln!(out, "overall {}", if passed { "pass" } else { "FAIL" });
        self.say(&out);

        if self.wants(OutputFormat::Csv) {
            self.write("figure1.csv", &cmp.to_csv())?;
        }
        self.write("crossings.txt", &cmp.crossings_text())?;
        if self.wants(OutputFormat::Text) {
            self.write("waves_report.txt", &out)?;
        }
        if self.wants(OutputFormat::Json) {
            let json = serde_json::json!({
                "n": w.n,
                "crossings": cmp.crossings,
                "modica_fd_max_gap": modica_fd,
                "corollary_gap_sign_changes": changes,
                "checks": checks
                    .iter()
                    .map(|c| serde_json::to_value(c).unwrap_or_default())
                    .collect::<Vec<_>>(),
                "passed": passed,
            });
            self.write("waves_report.json", &serde_json::to_string_pretty(&json).unwrap_or_default())?;
        }
        if let Some(dir) = self.out_dir()? {
            write_field(&dir.join("standing_wave.acf"), &sw.profile.to_field()?, 0.0)?;
        }
        Ok(passed)
    }
}

fn snapshot_name(i: usize) -> String {
    format!("snap_{i:05}.acf")
}

/// Writes every snapshot as an `AC-FIELD v1` file plus `manifest.txt`:
///
/// ```text
/// AC-TRAJECTORY v1
/// scheme=explicit_euler dt=0.0000015 sigma=0.8
/// snapshot t=0 file=snap_00000.acf
/// ```
pub fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let kind = match traj.scheme().kind {
        SchemeKind::ExplicitEuler => "explicit_euler",
        SchemeKind::Imex => "imex",
    };
    let mut manifest = format!(
        "{MANIFEST_MAGIC}\nscheme={kind} dt={} sigma={}\n",
        traj.dt(),
        traj.scheme().sigma
    );
    for (i, s) in traj.snapshots().iter().enumerate() {
        let name = snapshot_name(i);
        write_field(&dir.join(&name), &s.field, s.t)?;
        let _ = writeln!(manifest, "snapshot t={} file={name}", s.t);
    }
    let path = dir.join(MANIFEST_NAME);
    fs::write(&path, manifest).map_err(|e| Error::io(path, e))
}

fn bad_manifest(detail: impl Into<String>) -> Error {
    Error::Format {
        what: "trajectory manifest",
        detail: detail.into(),
    }
}

fn key<'a>(token: Option<&'a str>, name: &str) -> Result<&'a str> {
    token
        .and_then(|t| t.strip_prefix(name))
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| bad_manifest(format!("expected {name}=...")))
}

/// Reads a manifest written by [`write_trajectory`]; snapshot files are
/// resolved against the manifest's directory.
pub fn read_trajectory(manifest: &Path) -> Result<Trajectory> {
    let text = fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
    let dir = manifest.parent().unwrap_or(Path::new("."));
    let mut lines = text.lines();
    if lines.next() != Some(MANIFEST_MAGIC) {
        return Err(bad_manifest(format!("first line must be {MANIFEST_MAGIC:?}")));
    }
    let mut head = lines
        .next()
        .ok_or_else(|| bad_manifest("missing scheme line"))?
        .split_whitespace();
    let kind = match key(head.next(), "scheme")? {
        "explicit_euler" => SchemeKind::ExplicitEuler,
        "imex" => SchemeKind::Imex,
        other => return Err(bad_manifest(format!("unknown scheme {other:?}"))),
    };
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad_manifest(format!("bad number {s:?}")));
    let dt = num(key(head.next(), "dt")?)?;
    let sigma = num(key(head.next(), "sigma")?)?;

    let mut snapshots = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some("snapshot") {
            return Err(bad_manifest(format!("unexpected line {line:?}")));
        }
        let t = num(key(tokens.next(), "t")?)?;
        let file = key(tokens.next(), "file")?;
        let (field, ft) = read_field(&dir.join(file))?;
        if ft != t {
            return Err(bad_manifest(format!("{file} is stamped t={ft}, manifest says t={t}")));
        }
        snapshots.push(Snapshot { t, field });
    }
    let scheme = SchemeConfig {
        kind,
        dt: TimeStep::Fixed(dt),
        sigma,
    };
    Trajectory::from_snapshots(snapshots, scheme, dt).map_err(|e| bad_manifest(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus_grid::{ScalarField, TorusGrid};

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = TorusGrid::uniform(1, 1.0, 16).unwrap();
        let f0 = ScalarField::from_fn(g, |x| 0.5 + 0.1 * (6.0 * x[0]).sin()).unwrap();
        let traj = evolve(&f0, 0.1, SchemeConfig::explicit_auto(), 0.05).unwrap();
        write_trajectory(dir.path(), &traj).unwrap();
        let back = read_trajectory(&dir.path().join(MANIFEST_NAME)).unwrap();
        assert_eq!(back.snapshots(), traj.snapshots());
        assert_eq!(back.dt(), traj.dt());
    }

    #[test]
    fn exit_code_mapping() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::Inadmissible("x".into())), EXIT_CONFIG);
        let floor = Error::FloorBreach {
            index: 0,
            value: 0.0,
            floor: 1e-12,
        };
        assert_eq!(exit_code(&floor), EXIT_GUARD);
        let io = Error::io("x", std::io::Error::other("boom"));
        assert_eq!(exit_code(&io), EXIT_IO);
    }
}
