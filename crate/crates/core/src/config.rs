//! TOML run configuration. Unknown keys are rejected.
//!
//! ```toml
//! [grid]
//! dim = 1
//! lengths = [1.0]
//! points = [512]
//!
//! [ic]
//! type = "fourier"      # or "constant" with `value`
//! seed = 1
//! fmin = 0.1
//! fmax = 0.9
//! modes = 4
//!
//! [scheme]
//! kind = "explicit_euler" # or "imex"
//! dt = "auto"             # or a number
//! sigma = 0.8
//!
//! [time]
//! t_end = 5.0
//! snapshot_every = 0.05
//!
//! [harnack]
//! alpha = 0.5
//! beta = "auto"           # or a number
//! k = 0.0
//! t_min = 0.05
//! tol = 1e-2
//!
//! [classical]
//! pairs = 100
//! seed = 7
//!
//! [output]
//! directory = "out"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::ac_solver::{generate_ic, SchemeConfig, SchemeKind, TimeStep, DEFAULT_SIGMA};
use crate::error::{Error, Result};
use crate::harnack_params::{beta_admissible_max, HarnackParams};
use crate::harnack_verify::{SpaceTimePair, DEFAULT_T_MIN, DEFAULT_TOL};
use crate::torus_grid::{ScalarField, TorusGrid, MAX_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

/// `"auto"` or an explicit number.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AutoOr {
    Auto(AutoTag),
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub lengths: Vec<f64>,
    pub points: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IcType {
    Constant,
    Fourier,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcSection {
    #[serde(rename = "type")]
    pub kind: IcType,
    pub value: Option<f64>,
    pub seed: Option<u64>,
    pub fmin: Option<f64>,
    pub fmax: Option<f64>,
    pub modes: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub kind: SchemeKind,
    #[serde(default = "auto")]
    pub dt: AutoOr,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
}

fn auto() -> AutoOr {
    AutoOr::Auto(AutoTag::Auto)
}

fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: f64,
    pub snapshot_every: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnackSection {
    pub alpha: f64,
    #[serde(default = "auto")]
    pub beta: AutoOr,
    /// Defaults to the grid dimension.
    pub n: Option<u32>,
    #[serde(default)]
    pub k: f64,
    #[serde(default)]
    pub d: f64,
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_t_min() -> f64 {
    DEFAULT_T_MIN
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSection {
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_pair_seed")]
    pub seed: u64,
    #[serde(default)]
    pub tol: f64,
    /// Hand-written pairs `[x1, snapshot1, x2, snapshot2]` (flat point and
    /// snapshot indices); replaces random sampling when present.
    pub pair_list: Option<Vec<[usize; 4]>>,
}

fn default_pairs() -> usize {
    100
}

fn default_pair_seed() -> u64 {
    7
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Text, OutputFormat::Json, OutputFormat::Csv]
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: None,
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    /// Trajectory manifest written by `simulate`; relative paths resolve
    /// against the config file's directory.
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavesSection {
    #[serde(default = "default_wave_n")]
    pub n: u32,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_wave_h")]
    pub h: f64,
}

fn default_wave_n() -> u32 {
    2
}

fn default_samples() -> usize {
    2001
}

fn default_half_width() -> f64 {
    8.0
}

fn default_wave_h() -> f64 {
    1e-2
}

impl Default for WavesSection {
    fn default() -> Self {
        WavesSection {
            n: default_wave_n(),
            samples: default_samples(),
            half_width: default_half_width(),
            h: default_wave_h(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: Option<GridSection>,
    pub ic: Option<IcSection>,
    pub scheme: Option<SchemeSection>,
    pub time: Option<TimeSection>,
    pub harnack: Option<HarnackSection>,
    pub classical: Option<ClassicalSection>,
    #[serde(default)]
    pub output: OutputSection,
    pub input: Option<InputSection>,
    pub waves: Option<WavesSection>,
    /// Directory of the file the config was read from.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T> {
    section
        .as_ref()
        .ok_or_else(|| cfg(format!("missing [{name}] section")))
}

/// Everything a simulation needs, validated.
#[derive(Debug, Clone)]
pub struct SimulationPlan {
    pub initial: ScalarField,
    pub scheme: SchemeConfig,
    pub t_end: f64,
    pub snapshot_every: f64,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| cfg(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::parse(&text)?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    /// Replaces every seed in the file.
    pub fn override_seed(&mut self, seed: u64) {
        if let Some(ic) = self.ic.as_mut() {
            ic.seed = Some(seed);
        }
        if let Some(c) = self.classical.as_mut() {
            c.seed = seed;
        }
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        let g = require(&self.grid, "grid")?;
        if g.dim == 0 || g.dim > MAX_DIM {
            return Err(cfg(format!("grid.dim must be 1, 2 or 3, got {}", g.dim)));
        }
        if g.lengths.len() != g.dim || g.points.len() != g.dim {
            return Err(cfg(format!(
                "grid.lengths and grid.points need {} entries each",
                g.dim
            )));
        }
        TorusGrid::new(&g.lengths, &g.points)
    }

    pub fn initial_condition(&self, grid: &TorusGrid) -> Result<ScalarField> {
        let ic = require(&self.ic, "ic")?;
        match ic.kind {
            IcType::Constant => {
                let v = ic.value.ok_or_else(|| cfg("ic.value is required for type = \"constant\""))?;
                if !(v > 0.0 && v < 1.0) {
                    return Err(cfg(format!("ic.value must lie in (0, 1), got {v}")));
                }
                ScalarField::constant(*grid, v)
            }
            IcType::Fourier => {
                let get = |v: Option<f64>, name: &str| {
                    v.ok_or_else(|| cfg(format!("ic.{name} is required for type = \"fourier\"")))
                };
                let seed = ic.seed.ok_or_else(|| cfg("ic.seed is required for type = \"fourier\""))?;
                let modes = ic.modes.ok_or_else(|| cfg("ic.modes is required for type = \"fourier\""))?;
                generate_ic(grid, seed, get(ic.fmin, "fmin")?, get(ic.fmax, "fmax")?, modes)
            }
        }
    }

    pub fn scheme(&self) -> Result<SchemeConfig> {
        let s = require(&self.scheme, "scheme")?;
        Ok(SchemeConfig {
            kind: s.kind,
            dt: match s.dt {
                AutoOr::Auto(_) => TimeStep::Auto,
                AutoOr::Value(v) => TimeStep::Fixed(v),
            },
            sigma: s.sigma,
        })
    }

    /// Validates grid, initial data, scheme and time window together.
    pub fn simulation_plan(&self) -> Result<SimulationPlan> {
        let grid = self.grid()?;
        let initial = self.initial_condition(&grid)?;
        let scheme = self.scheme()?;
        scheme.resolve_dt(&grid)?;
        let time = require(&self.time, "time")?;
        if !(time.t_end > 0.0 && time.t_end.is_finite()) {
            return Err(cfg(format!("time.t_end must be positive, got {}", time.t_end)));
        }
        if !(time.snapshot_every > 0.0 && time.snapshot_every.is_finite()) {
            return Err(cfg(format!(
                "time.snapshot_every must be positive, got {}",
                time.snapshot_every
            )));
        }
        Ok(SimulationPlan {
            initial,
            scheme,
            t_end: time.t_end,
            snapshot_every: time.snapshot_every,
        })
    }

    /// Harnack parameters with `β = "auto"` resolved: `-n` when `α = ½` and
    /// `k = 0`, otherwise the admissible maximum.
    pub fn harnack_params(&self) -> Result<HarnackParams> {
        let h = require(&self.harnack, "harnack")?;
        let n = match (h.n, &self.grid) {
            (Some(n), _) => n,
            (None, Some(g)) => g.dim as u32,
            (None, None) => return Err(cfg("harnack.n is required without a [grid] section")),
        };
        let beta = match h.beta {
            AutoOr::Value(b) => b,
            AutoOr::Auto(_) if h.alpha == 0.5 && h.k == 0.0 => -f64::from(n),
            AutoOr::Auto(_) => beta_admissible_max(h.alpha, n, h.k)?,
        };
        let p = HarnackParams {
            alpha: h.alpha,
            beta,
            n,
            k: h.k,
            d: h.d,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn harnack_window(&self) -> Result<(f64, f64)> {
        let h = require(&self.harnack, "harnack")?;
        if !(h.t_min >= 0.0 && h.tol >= 0.0) {
            return Err(cfg("harnack.t_min and harnack.tol must be >= 0"));
        }
        Ok((h.t_min, h.tol))
    }

    pub fn classical(&self) -> ClassicalSection {
        self.classical.clone().unwrap_or(ClassicalSection {
            pairs: default_pairs(),
            seed: default_pair_seed(),
            tol: 0.0,
            pair_list: None,
        })
    }

    pub fn pair_list(&self) -> Option<Vec<SpaceTimePair>> {
        self.classical.as_ref()?.pair_list.as_ref().map(|list| {
            list.iter()
                .map(|&[x1, snap1, x2, snap2]| SpaceTimePair {
                    x1,
                    snap1,
                    x2,
                    snap2,
                })
                .collect()
        })
    }

    pub fn waves(&self) -> WavesSection {
        self.waves.clone().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MAIN: &str = r#"
[grid]
dim = 1
lengths = [1.0]
points = [64]

[ic]
type = "constant"
value = 0.5

[scheme]
kind = "explicit_euler"
dt = "auto"

[time]
t_end = 1.0
snapshot_every = 0.5

[harnack]
alpha = 0.5
"#;

    #[test]
    fn parses_and_resolves_auto_beta() {
        let c = RunConfig::parse(MAIN).unwrap();
        let p = c.harnack_params().unwrap();
        assert_eq!((p.beta, p.n), (-1.0, 1));
        assert_eq!(c.harnack_window().unwrap(), (0.05, 1e-2));
        let plan = c.simulation_plan().unwrap();
        assert_eq!(plan.initial.values()[0], 0.5);
        assert_eq!(plan.scheme.dt, TimeStep::Auto);
    }

    #[test]
    fn auto_beta_off_the_featured_choice() {
        let text = MAIN.replace("alpha = 0.5", "alpha = 0.3\nk = 0.5");
        let p = RunConfig::parse(&text).unwrap().harnack_params().unwrap();
        assert_eq!(p.beta, beta_admissible_max(0.3, 1, 0.5).unwrap());
    }

    #[test]
    fn explicit_values() {
        let text = MAIN
            .replace("dt = \"auto\"", "dt = 1e-5")
            .replace("alpha = 0.5", "alpha = 0.5\nbeta = -2.0\nn = 2");
        let c = RunConfig::parse(&text).unwrap();
        assert_eq!(c.scheme().unwrap().dt, TimeStep::Fixed(1e-5));
        assert_eq!(c.harnack_params().unwrap().beta, -2.0);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse(&MAIN.replace("value = 0.5", "value = 0.5\nvalu = 1")).is_err());
        assert!(RunConfig::parse(&format!("{MAIN}\n[extra]\nx = 1\n")).is_err());
        assert!(RunConfig::parse(&MAIN.replace("\"auto\"", "\"automatic\"")).is_err());
    }

    #[test]
    fn validation_errors() {
        let c = RunConfig::parse(&MAIN.replace("dim = 1", "dim = 4")).unwrap();
        assert!(matches!(c.grid(), Err(Error::Config(_))));
        let c = RunConfig::parse(&MAIN.replace("alpha = 0.5", "alpha = 1.2")).unwrap();
        assert!(c.harnack_params().is_err());
        let c = RunConfig::parse(&MAIN.replace("value = 0.5", "value = 1.5")).unwrap();
        assert!(c.simulation_plan().is_err());
        let c = RunConfig::parse(&MAIN.replace("type = \"constant\"", "type = \"fourier\"")).unwrap();
        assert!(c.simulation_plan().is_err());
    }

    #[test]
    fn seed_override() {
        let text = MAIN.replace(
            "type = \"constant\"\nvalue = 0.5",
            "type = \"fourier\"\nseed = 1\nfmin = 0.1\nfmax = 0.9\nmodes = 3",
        );
        let mut c = RunConfig::parse(&text).unwrap();
        let a = c.simulation_plan().unwrap().initial;
        c.override_seed(2);
        let b = c.simulation_plan().unwrap().initial;
        assert_ne!(a, b);
    }
}
