//! Run configuration: a TOML file whose keys may be written flat with dotted
//! section names (`model.S = 100.0`) or as ordinary tables.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wrmm_core::{
    FunctionSpec, Quadrature, SampleSet, ShiftSpec, Side, SolverOptions, SpreadDomain, SpreadModel,
};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub samples: SamplesConfig,
    pub model: ModelConfig,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default)]
    pub robust: RobustConfig,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub validate: ValidateConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Written into manifests; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool: Option<ToolInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplesConfig {
    /// CSV of standardized buy-side arrivals, relative to the config file.
    pub plus: PathBuf,
    pub minus: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub eta: f64,
    pub gamma: f64,
    #[serde(with = "spec_text")]
    pub f_plus: FunctionSpec,
    #[serde(with = "spec_text")]
    pub f_minus: FunctionSpec,
    #[serde(with = "spec_text")]
    pub h_plus: FunctionSpec,
    #[serde(with = "spec_text")]
    pub h_minus: FunctionSpec,
}

impl ModelConfig {
    pub fn model(&self) -> SpreadModel {
        SpreadModel {
            s: self.s,
            q: self.q,
            eta: self.eta,
            gamma: self.gamma,
            f_plus: self.f_plus,
            f_minus: self.f_minus,
            h_plus: self.h_plus,
            h_minus: self.h_minus,
        }
    }
}

mod spec_text {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};
    use wrmm_core::FunctionSpec;

    pub fn serialize<S: Serializer>(spec: &FunctionSpec, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(spec)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<FunctionSpec, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    /// Defaults to 10% of the mid-price.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_max: Option<f64>,
    pub grid_n: usize,
    pub quadrature: Quadrature,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            eps_max: None,
            grid_n: wrmm_core::policy::DEFAULT_GRID_N,
            quadrature: Quadrature::Trapezoid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobustConfig {
    /// Squared W₂ budget per side.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Confidence level for bootstrap radius selection.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    pub resamples: usize,
}

impl Default for RobustConfig {
    fn default() -> Self {
        Self {
            delta: None,
            chi: None,
            resamples: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    /// Radii to compare; defaults to `[0, δ]` with δ from `[robust]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    pub episodes: usize,
    pub shift: ShiftSpec,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            deltas: None,
            episodes: 10_000,
            shift: ShiftSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub deltas: Vec<f64>,
    /// Relative tolerance for oracle comparisons.
    pub tolerance: f64,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            deltas: vec![0.01, 0.04, 0.25],
            tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Defaults to `out/` next to the config file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
    pub command: String,
}

/// How the ambiguity radius is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusSource {
    Fixed(f64),
    Selected { chi: f64, resamples: usize },
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads a config and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let base = std::path::absolute(&base).unwrap_or(base);
        cfg.resolve_paths(&base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &Path| {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        self.samples.plus = join(&self.samples.plus);
        self.samples.minus = join(&self.samples.minus);
        self.output.dir = Some(join(self.output.dir.as_deref().unwrap_or(Path::new("out"))));
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output
            .dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn radius(&self) -> Result<RadiusSource, CliError> {
        match (self.robust.delta, self.robust.chi) {
            (Some(d), None) => Ok(RadiusSource::Fixed(d)),
            (None, Some(chi)) => Ok(RadiusSource::Selected {
                chi,
                resamples: self.robust.resamples,
            }),
            (Some(_), Some(_)) => Err(CliError::Config(
                "robust.delta and robust.chi are mutually exclusive".into(),
            )),
            (None, None) => Err(CliError::Config(
                "one of robust.delta or robust.chi is required".into(),
            )),
        }
    }

    /// Range checks on every numeric field that the core does not check
    /// itself before doing work.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.radius()?;
        if let Some(d) = self.robust.delta {
            if !(d >= 0.0 && d.is_finite()) {
                return bad(format!("robust.delta must be a finite value >= 0, got {d}"));
            }
        }
        if let Some(c) = self.robust.chi {
            if !(c > 0.0 && c < 1.0) {
                return bad(format!("robust.chi must lie in (0, 1), got {c}"));
            }
        }
        if self.robust.resamples < wrmm_core::profile::MIN_RESAMPLES {
            return bad(format!(
                "robust.resamples must be at least {}, got {}",
                wrmm_core::profile::MIN_RESAMPLES,
                self.robust.resamples
            ));
        }
        self.model.model().validate(self.domain()?.eps_max)?;
        self.solver.validate()?;
        if let Some(ds) = &self.simulate.deltas {
            if ds.is_empty() || ds.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
                return bad("simulate.deltas must be a non-empty list of values >= 0".into());
            }
        }
        if self.simulate.episodes < wrmm_core::simulator::MIN_EPISODES {
            return bad(format!(
                "simulate.episodes must be at least {}, got {}",
                wrmm_core::simulator::MIN_EPISODES,
                self.simulate.episodes
            ));
        }
        self.simulate.shift.validate()?;
        if self
            .validate
            .deltas
            .iter()
            .any(|d| !(*d > 0.0 && d.is_finite()))
        {
            return bad("validate.deltas must be positive".into());
        }
        if !(self.validate.tolerance > 0.0) {
            return bad("validate.tolerance must be positive".into());
        }
        for p in [&self.samples.plus, &self.samples.minus] {
            if !p.is_file() {
                return bad(format!("sample file not found: {}", p.display()));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<SpreadDomain, CliError> {
        let eps_max = self.domain.eps_max.unwrap_or(0.1 * self.model.s.abs());
        Ok(SpreadDomain::new(
            eps_max,
            self.domain.grid_n,
            self.domain.quadrature,
        )?)
    }

    pub fn read_samples(&self) -> Result<(SampleSet, SampleSet), CliError> {
        let read = |side: Side, path: &Path| -> Result<SampleSet, CliError> {
            SampleSet::read_csv(side, path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        };
        Ok((
            read(Side::Buy, &self.samples.plus)?,
            read(Side::Sell, &self.samples.minus)?,
        ))
    }

    /// The config as a rerunnable manifest.
    pub fn manifest(&self, command: &str) -> Result<String, CliError> {
        let mut m = self.clone();
        m.tool = Some(ToolInfo {
            name: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
        });
        toml::to_string(&m).map_err(|e| CliError::Config(format!("manifest: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLAT: &str = r#"
seed = 3
samples.plus = "buy.csv"
samples.minus = "sell.csv"
model.S = 100.0
model.Q = 1.0
model.eta = 0.05
model.gamma = 2.0
model.f_plus = "exp_decay(2, 0.5)"
model.f_minus = "exp_decay(2, 0.5)"
model.h_plus = "constant(1)"
model.h_minus = "affine(1, -0.01)"
domain.grid_n = 65
robust.delta = 0.1
simulate.shift.plus.mean_shift = 0.2
"#;

    #[test]
    fn dotted_keys_parse() {
        let c = RunConfig::from_toml(FLAT).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.model.s, 100.0);
        assert_eq!(c.model.h_minus, FunctionSpec::affine(1.0, -0.01));
        assert_eq!(c.domain.grid_n, 65);
        assert_eq!(c.domain().unwrap().eps_max, 10.0);
        assert_eq!(c.radius().unwrap(), RadiusSource::Fixed(0.1));
        assert_eq!(c.simulate.shift.plus.mean_shift, 0.2);
        assert_eq!(c.simulate.shift.plus.sd_scale, 1.0);
        assert_eq!(c.solver, SolverOptions::default());
    }

    #[test]
    fn manifest_round_trips() {
        let c = RunConfig::from_toml(FLAT).unwrap();
        let text = c.manifest("solve").unwrap();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(back.tool.as_ref().unwrap().command, "solve");
        assert_eq!(RunConfig { tool: None, ..back }, c);
    }

    #[test]
    fn radius_choice_is_exclusive() {
        let both = format!("{FLAT}robust.chi = 0.1\n");
        let c = RunConfig::from_toml(&both).unwrap();
        assert!(matches!(c.radius(), Err(CliError::Config(_))));
        let none = FLAT.replace("robust.delta = 0.1\n", "");
        assert!(RunConfig::from_toml(&none).unwrap().radius().is_err());
    }

    #[test]
    fn unknown_keys_and_bad_specs_are_rejected() {
        assert!(RunConfig::from_toml(&format!("{FLAT}model.kappa = 1\n")).is_err());
        assert!(RunConfig::from_toml(&FLAT.replace("constant(1)", "cubic(1)")).is_err());
    }
}
