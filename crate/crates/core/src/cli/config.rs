//! Run configuration read from TOML. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::conservation::IndexBox;
use crate::error::{Error, Result};
use crate::field::{
    AnalyticGenerator, DcPolicy, DipolePulse, LorentzianPulse, Mode, Multimode, PlaneWavePulse,
    PulseEnvelope, StandingWave,
};
use crate::grid::SpaceTimeGrid;
use crate::kernel::{Boundary, ScaleGrid};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// ESTF file with real fields; when absent the generator runs.
    pub input: Option<PathBuf>,
    pub generator: GeneratorConfig,
    pub grid: GridConfig,
    pub scales: ScalesConfig,
    pub boundary: BoundaryConfig,
    pub dc: DcConfig,
    pub volume: Option<VolumeConfig>,
    /// Overrides keyed by check name.
    pub tolerances: BTreeMap<String, f64>,
    /// Random interior nodes sampled by the analyticity spot check.
    pub probes: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            generator: GeneratorConfig::default(),
            grid: GridConfig::default(),
            scales: ScalesConfig::default(),
            boundary: BoundaryConfig::Periodic,
            dc: DcConfig::Zero,
            volume: None,
            tolerances: BTreeMap::new(),
            probes: 64,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.scale_grid()?;
        if let Some((name, v)) = self.tolerances.iter().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::Config(format!("tolerance {name} = {v} must be positive")));
        }
        if let Some(v) = &self.volume {
            v.index_box().validate(&self.grid()?)?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<SpaceTimeGrid<f64>> {
        SpaceTimeGrid::new(self.grid.counts, self.grid.spacings, self.grid.origin)
    }

    pub fn scale_grid(&self) -> Result<ScaleGrid<f64>> {
        let s = &self.scales;
        let grid = match (&s.values, s.spacing) {
            (Some(v), _) => ScaleGrid::new(v.clone())?,
            (None, Spacing::Log) => ScaleGrid::log_spaced(s.min, s.max, s.count)?,
            (None, Spacing::Linear) => ScaleGrid::linear(s.min, s.max, s.count)?,
        };
        Ok(if s.static_limit { grid.with_static_limit() } else { grid })
    }

    pub fn boundary(&self) -> Boundary {
        match self.boundary {
            BoundaryConfig::Periodic => Boundary::Periodic,
            BoundaryConfig::Windowed => Boundary::Windowed,
        }
    }

    pub fn dc_policy(&self) -> DcPolicy<f64> {
        match self.dc {
            DcConfig::Zero => DcPolicy::Zero,
            DcConfig::TimeMean => DcPolicy::TimeMean,
        }
    }

    pub fn tolerance(&self, check: &str, default: f64) -> f64 {
        self.tolerances.get(check).copied().unwrap_or(default)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// `[nx, ny, nz, nt]`
    pub counts: [usize; 4],
    /// `[dx, dy, dz, dt]`
    pub spacings: [f64; 4],
    pub origin: [f64; 4],
}

impl Default for GridConfig {
    fn default() -> Self {
        let h = std::f64::consts::TAU / 64.0;
        GridConfig { counts: [1, 1, 64, 128], spacings: [h, h, h, h / 2.0], origin: [0.0; 4] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalesConfig {
    /// Explicit scales; overrides `min`, `max`, `count` and `spacing`.
    pub values: Option<Vec<f64>>,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
    pub static_limit: bool,
}

impl Default for ScalesConfig {
    fn default() -> Self {
        ScalesConfig { values: None, min: 0.05, max: 1.0, count: 32, spacing: Spacing::Log, static_limit: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryConfig {
    Periodic,
    Windowed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DcConfig {
    Zero,
    TimeMean,
}

/// Inclusive node-index box.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeConfig {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

impl VolumeConfig {
    pub fn index_box(&self) -> IndexBox {
        IndexBox::new(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub omega: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub polarization: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorConfig {
    StandingWave {
        #[serde(default = "one")]
        e0: f64,
        #[serde(default = "one")]
        k: f64,
    },
    PlaneWavePulse {
        #[serde(default = "one")]
        amplitude: f64,
        width: f64,
        #[serde(default)]
        carrier: f64,
        #[serde(default)]
        t0: f64,
    },
    Multimode {
        modes: Vec<ModeConfig>,
    },
    DipolePulse {
        #[serde(default = "one")]
        amplitude: f64,
        width: f64,
        #[serde(default)]
        carrier: f64,
        #[serde(default)]
        t0: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig::StandingWave { e0: 1.0, k: 1.0 }
    }
}

impl GeneratorConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            GeneratorConfig::StandingWave { .. } => "standing_wave",
            GeneratorConfig::PlaneWavePulse { .. } => "plane_wave_pulse",
            GeneratorConfig::Multimode { .. } => "multimode",
            GeneratorConfig::DipolePulse { .. } => "dipole_pulse",
        }
    }

    pub fn build(&self) -> Result<Box<dyn AnalyticGenerator<f64>>> {
        Ok(match *self {
            GeneratorConfig::StandingWave { e0, k } => Box::new(StandingWave::new(e0, k)?),
            GeneratorConfig::PlaneWavePulse { amplitude, width, carrier, t0 } => Box::new(PlaneWavePulse::new(
                PulseEnvelope::Lorentzian(LorentzianPulse::new(amplitude, width, carrier, t0)?),
            )?),
            GeneratorConfig::Multimode { ref modes } => Box::new(Multimode::new(
                modes.iter().map(|m| Mode { omega: m.omega, amplitude: m.amplitude, polarization: m.polarization }).collect(),
            )?),
            GeneratorConfig::DipolePulse { amplitude, width, carrier, t0 } => {
                Box::new(DipolePulse::new(LorentzianPulse::new(amplitude, width, carrier, t0)?))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(RunConfig::parse("bogus = 1"), Err(Error::Config(_))));
        assert!(RunConfig::parse("[grid]\ncounts = [1,1,8,8]\nwidth = 2").is_err());
        assert!(RunConfig::parse("[generator]\nkind = \"standing_wave\"\nomega = 2.0").is_err());
    }

    #[test]
    fn generator_table_parses() {
        let cfg = RunConfig::parse(
            "[generator]\nkind = \"multimode\"\nmodes = [{ omega = 1.0, amplitude = 1.0 }, { omega = 2.0, amplitude = 0.5 }]",
        )
        .unwrap();
        assert_eq!(cfg.generator.kind(), "multimode");
        cfg.generator.build().unwrap();
    }
}
