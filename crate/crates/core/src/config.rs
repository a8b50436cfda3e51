//! Experiment configuration.
//!
//! [`ExperimentConfig`] is what a user writes: every field is optional and
//! unknown keys are rejected. [`ExperimentConfig::resolve`] fills the gaps,
//! first from the preset of the chosen experiment and then from the generic
//! defaults, producing a [`Settings`] value the runners consume.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{PeriodicGrid, PowerOptions, QuadGrid, DEFAULT_MAX_ITER, DEFAULT_POWER_TOL};
use crate::propagators::SplitScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    HarmonicRate,
    Correction,
    MatrixBch,
    Chernoff,
    Dirichlet,
    Unitary,
}

impl ExperimentKind {
    pub const ALL: [Self; 6] = [
        Self::HarmonicRate,
        Self::Correction,
        Self::MatrixBch,
        Self::Chernoff,
        Self::Dirichlet,
        Self::Unitary,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::HarmonicRate => "harmonic-rate",
            Self::Correction => "correction",
            Self::MatrixBch => "matrix-bch",
            Self::Chernoff => "chernoff",
            Self::Dirichlet => "dirichlet",
            Self::Unitary => "unitary",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<QuadGrid> {
        QuadGrid::new(self.x_min, self.x_max, self.n_points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicSpec {
    pub length: f64,
    pub n_points: usize,
}

impl PeriodicSpec {
    pub fn build(&self) -> Result<PeriodicGrid> {
        PeriodicGrid::new(self.length, self.n_points)
    }
}

/// Source of the matrix pair in the matrix experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    /// `A = diag(1, 0)`, `B = [[1, 1], [1, 1]]`
    Fixed,
    Random,
    Commuting,
    Zero,
}

/// Potential of the unitary experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    Cos,
    Zero,
}

impl PotentialKind {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Self::Cos => x.cos(),
            Self::Zero => 0.0,
        }
    }
}

/// User-facing configuration; all fields optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_values: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodic: Option<PeriodicSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SplitScheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    /// Trapezoid steps in `s` for time integrals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_steps: Option<usize>,
    /// Half-width of the measurement window `|x|, |y| ≤ window`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    /// Points of the coarser grid used by the quadrature correction kernel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<PairKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialKind>,
    /// Number of random states in the unitary experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<usize>,
    /// Step count of the unitary reference solution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_ref: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<Vec<(f64, f64)>>,
}

pub const DEFAULT_T_VALUES: [f64; 3] = [0.5, 1.0, 2.0];
pub const DEFAULT_N_VALUES: [u32; 7] = [4, 8, 16, 32, 64, 128, 256];
pub const DEFAULT_GRID: GridSpec = GridSpec { x_min: -8.0, x_max: 8.0, n_points: 1025 };
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_WINDOW: f64 = 6.0;
pub const DEFAULT_S_STEPS: usize = 256;
pub const DEFAULT_QUAD_POINTS: usize = 257;
pub const DEFAULT_PROBES: [(f64, f64); 3] = [(0.3, 0.6), (0.5, 0.5), (0.4, 0.4)];
/// Largest accepted step count of the unitary reference.
pub const MAX_REFERENCE_STEPS: u32 = 1 << 20;

/// Named thresholds with their defaults. Names are `<experiment>.<criterion>`.
pub const TOLERANCE_DEFAULTS: &[(&str, f64)] = &[
    ("power.tol", DEFAULT_POWER_TOL),
    ("power.max_iter", DEFAULT_MAX_ITER as f64),
    ("harmonic.slope_min", -2.2),
    ("harmonic.slope_max", -1.8),
    ("harmonic.band_lo", 0.5),
    ("harmonic.band_hi", 2.0),
    ("harmonic.band_n_min", 16.0),
    ("correction.ratio_min", 1.6),
    ("correction.ratio_max", 4.6),
    ("correction.decay_factor", 8.0),
    ("correction.origin_tol", 5e-4),
    ("correction.quadrature_tol", 1e-3),
    ("correction.sign_fraction", 0.1),
    ("matrix.nonsym_slope_min", -1.15),
    ("matrix.nonsym_slope_max", -0.85),
    ("matrix.sym_slope_min", -2.2),
    ("matrix.sym_slope_max", -1.8),
    ("matrix.lead_rel_tol", 0.05),
    ("matrix.exact_tol", 1e-12),
    ("chernoff.alpha_min", 0.9),
    ("chernoff.bound_factor", 1.5),
    ("chernoff.spectral_tol", 1e-10),
    ("chernoff.product_slope_max", -0.9),
    ("chernoff.exact_tol", 1e-12),
    ("dirichlet.slope_max", -0.15),
    ("dirichlet.margin", 0.2),
    ("dirichlet.min_points", 1025.0),
    ("dirichlet.width_spacings", 3.0),
    ("unitary.slope_min", -2.25),
    ("unitary.slope_max", -1.75),
    ("unitary.unitarity_tol", 1e-10),
    ("unitary.exact_tol", 1e-12),
];

/// Resolved thresholds; every known name has a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Tolerances {
    pub fn with_overrides(overrides: &BTreeMap<String, f64>) -> Result<Self> {
        let mut map: BTreeMap<String, f64> =
            TOLERANCE_DEFAULTS.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        for (k, &v) in overrides {
            match map.get_mut(k) {
                Some(slot) if v.is_finite() => *slot = v,
                Some(_) => return invalid(format!("tolerance '{k}' must be finite")),
                None => return invalid(format!("unknown tolerance '{k}'")),
            }
        }
        Ok(Self(map))
    }

    /// Panics on names missing from [`TOLERANCE_DEFAULTS`].
    pub fn get(&self, name: &str) -> f64 {
        *self.0.get(name).unwrap_or_else(|| panic!("tolerance '{name}' is not defined"))
    }

    pub fn power_options(&self, seed: u64) -> PowerOptions {
        PowerOptions { tol: self.get("power.tol"), max_iter: self.get("power.max_iter") as usize, seed }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::with_overrides(&BTreeMap::new()).expect("defaults are valid")
    }
}

/// Fully resolved parameters of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub kind: ExperimentKind,
    pub t_values: Vec<f64>,
    pub n_values: Vec<u32>,
    pub grid: QuadGrid,
    pub periodic: PeriodicGrid,
    pub scheme: SplitScheme,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub s_steps: usize,
    pub window: f64,
    pub quad_points: usize,
    pub dim: usize,
    pub pair: PairKind,
    pub mass: f64,
    pub potential: PotentialKind,
    pub batch: usize,
    pub n_ref: u32,
    pub probes: Vec<(f64, f64)>,
}

impl Settings {
    pub fn power_options(&self) -> PowerOptions {
        self.tolerances.power_options(self.seed)
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances.get(name)
    }
}

impl ExperimentConfig {
    /// Checks the fields that are present, independent of the experiment.
    pub fn validate(&self) -> Result<()> {
        if let Some(ts) = &self.t_values {
            if ts.is_empty() {
                return invalid("t_values must not be empty");
            }
            if let Some(t) = ts.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
                return invalid(format!("t_values must be positive, got {t}"));
            }
        }
        if let Some(ns) = &self.n_values {
            if ns.first() == Some(&0) {
                return invalid("n_values must be positive");
            }
            if ns.windows(2).any(|w| w[0] >= w[1]) {
                return invalid("n_values must be strictly increasing");
            }
        }
        if let Some(g) = &self.grid {
            g.build()?;
        }
        if let Some(p) = &self.periodic {
            p.build()?;
        }
        Tolerances::with_overrides(&self.tolerances)?;
        if let Some(s) = self.s_steps {
            if s < 8 {
                return invalid(format!("s_steps must be at least 8, got {s}"));
            }
        }
        if let Some(w) = self.window {
            if !(w > 0.0 && w.is_finite()) {
                return invalid(format!("window must be positive, got {w}"));
            }
        }
        if let Some(q) = self.quad_points {
            if q < 3 {
                return invalid(format!("quad_points must be at least 3, got {q}"));
            }
        }
        if self.dim == Some(0) {
            return invalid("dim must be at least 1");
        }
        if let Some(m) = self.mass {
            if !(m >= 0.0 && m.is_finite()) {
                return invalid(format!("mass must be nonnegative, got {m}"));
            }
        }
        if self.batch == Some(0) {
            return invalid("batch must be at least 1");
        }
        if self.n_ref == Some(0) {
            return invalid("n_ref must be positive");
        }
        Ok(())
    }

    /// Explicit values win, then the experiment's preset, then generic defaults.
    pub fn resolve(&self, kind: ExperimentKind) -> Result<Settings> {
        self.validate()?;
        let preset = Preset::of(kind);
        let t_values = self
            .t_values
            .clone()
            .or(preset.t_values.map(<[f64]>::to_vec))
            .unwrap_or_else(|| DEFAULT_T_VALUES.to_vec());
        let n_values = self
            .n_values
            .clone()
            .or(preset.n_values.map(<[u32]>::to_vec))
            .unwrap_or_else(|| DEFAULT_N_VALUES.to_vec());
        if n_values.len() < 2 {
            return invalid(format!("{kind} needs at least 2 n_values for a rate fit"));
        }
        let grid = self.grid.or(preset.grid).unwrap_or(DEFAULT_GRID).build()?;
        let periodic = self
            .periodic
            .unwrap_or(PeriodicSpec { length: std::f64::consts::TAU, n_points: 512 })
            .build()?;
        let n_max = *n_values.last().expect("nonempty");
        let n_ref = match self.n_ref {
            Some(r) => r,
            None => n_max
                .checked_mul(64)
                .ok_or_else(|| Error::InvalidArgument("reference step count overflows".into()))?,
        };
        Ok(Settings {
            kind,
            t_values,
            n_values,
            grid,
            periodic,
            scheme: self.scheme.unwrap_or_default(),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            tolerances: Tolerances::with_overrides(&self.tolerances)?,
            s_steps: self.s_steps.unwrap_or(DEFAULT_S_STEPS),
            window: self.window.unwrap_or(DEFAULT_WINDOW),
            quad_points: self.quad_points.unwrap_or(DEFAULT_QUAD_POINTS),
            dim: self.dim.unwrap_or(preset.dim),
            pair: self.pair.unwrap_or(preset.pair),
            mass: self.mass.unwrap_or(1.0),
            potential: self.potential.unwrap_or(PotentialKind::Cos),
            batch: self.batch.unwrap_or(16),
            n_ref,
            probes: self.probes.clone().unwrap_or_else(|| DEFAULT_PROBES.to_vec()),
        })
    }
}

struct Preset {
    t_values: Option<&'static [f64]>,
    n_values: Option<&'static [u32]>,
    grid: Option<GridSpec>,
    dim: usize,
    pair: PairKind,
}

impl Preset {
    fn of(kind: ExperimentKind) -> Self {
        let base = Self { t_values: None, n_values: None, grid: None, dim: 2, pair: PairKind::Fixed };
        match kind {
            ExperimentKind::HarmonicRate => base,
            ExperimentKind::Correction => {
                Self { t_values: Some(&[1.0]), n_values: Some(&[16, 32, 64, 128, 256]), ..base }
            }
            ExperimentKind::MatrixBch => Self { t_values: Some(&[1.0]), ..base },
            ExperimentKind::Chernoff => Self { t_values: Some(&[1.0]), dim: 6, pair: PairKind::Random, ..base },
            ExperimentKind::Dirichlet => Self {
                t_values: Some(&[0.1]),
                n_values: Some(&[2, 4, 8, 16, 32, 64]),
                grid: Some(GridSpec { x_min: 0.0, x_max: 1.0, n_points: 1025 }),
                ..base
            },
            ExperimentKind::Unitary => {
                Self { t_values: Some(&[1.0]), n_values: Some(&[4, 8, 16, 32, 64]), ..base }
            }
        }
    }
}
