//! Run configuration, read from TOML. Unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;

use crate::error::Error;
use crate::extremal::{check_tol, ExtremalState};
use crate::metric::{validate_geodesic_parallel, Domain, MetricChart};

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum MetricSpec {
    Builtin(String),
    Table(MetricTable),
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MetricTable {
    pub builtin: Option<String>,
    pub g11: Option<String>,
    pub g12: Option<String>,
    pub g22: Option<String>,
    /// `[[x1_min, x1_max], [x2_min, x2_max]]`.
    pub domain: Option<[[f64; 2]; 2]>,
    #[serde(default)]
    pub geodesic_parallel: bool,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum OutputKind {
    TrajectoryCsv,
    EventsJson,
    FrontSvg,
    ReportText,
}

impl OutputKind {
    pub fn file_name(self) -> &'static str {
        match self {
            OutputKind::TrajectoryCsv => "trajectory.csv",
            OutputKind::EventsJson => "events.json",
            OutputKind::FrontSvg => "front.svg",
            OutputKind::ReportText => "report.txt",
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Slice {
    #[default]
    All,
    /// `phi = 0` and `B = 0`: lifts of Riemannian geodesics in the flat chart.
    Straight,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub count: usize,
    pub slice: Slice,
    /// Half-width of the uniform range of `p1`, `p2` and `phi`.
    pub momentum: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { count: 100, slice: Slice::All, momentum: 1.0 }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RenderConfig {
    /// Also draw the leaf-space curve in a second panel.
    pub leaf: bool,
    pub width: f64,
    pub samples_per_step: usize,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self { leaf: false, width: 640.0, samples_per_step: 8 }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub metric: MetricSpec,
    /// `[x1, x2, theta, p1, p2, phi]`; required by single-trajectory commands.
    pub initial: Option<[f64; 6]>,
    pub window: [f64; 2],
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub outputs: Vec<OutputKind>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub render: RenderConfig,
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] Error),
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let [t0, t1] = self.window;
        if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
            return Err(Error::EmptyWindow(t0, t1).into());
        }
        check_tol(self.tol)?;
        let chart = self.chart()?;
        if let Some(s) = self.initial {
            if !s.iter().all(|v| v.is_finite()) {
                return Err(ConfigError::Invalid("initial state must be finite".into()));
            }
            chart.metric_at(s[0], s[1])?;
        }
        if !(self.sweep.momentum > 0.0 && self.sweep.momentum.is_finite()) {
            return Err(ConfigError::Invalid("sweep.momentum must be positive".into()));
        }
        Ok(())
    }

    pub fn chart(&self) -> Result<MetricChart, ConfigError> {
        match &self.metric {
            MetricSpec::Builtin(name) => Ok(MetricChart::builtin(name)?),
            MetricSpec::Table(t) => match (&t.builtin, &t.g11, &t.g12, &t.g22) {
                (Some(name), None, None, None) if t.domain.is_none() => Ok(MetricChart::builtin(name)?),
                (None, Some(g11), g12, Some(g22)) => {
                    let [d1, d2] = t.domain.ok_or_else(|| ConfigError::Invalid("metric.domain is required".into()))?;
                    if !(d1[0] < d1[1] && d2[0] < d2[1]) {
                        return Err(ConfigError::Invalid("metric.domain bounds must be increasing".into()));
                    }
                    let g12 = g12.as_deref().unwrap_or("0");
                    let chart =
                        MetricChart::from_expressions(g11, g12, g22, Domain::new((d1[0], d1[1]), (d2[0], d2[1])), t.geodesic_parallel)?;
                    if t.geodesic_parallel {
                        let rep = validate_geodesic_parallel(&chart, 21);
                        if !rep.passed {
                            return Err(ConfigError::Invalid(format!(
                                "metric is not geodesic parallel (violation {:e} > {:e})",
                                rep.max_violation(),
                                rep.tolerance
                            )));
                        }
                    }
                    Ok(chart)
                }
                _ => Err(ConfigError::Invalid("metric needs either `builtin` alone or `g11`, `g22` (optional `g12`) with `domain`".into())),
            },
        }
    }

    pub fn initial_state(&self) -> Result<ExtremalState, ConfigError> {
        self.initial.map(ExtremalState::from_array).ok_or_else(|| ConfigError::Invalid("`initial` is required for this command".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_and_full() {
        let c = RunConfig::from_toml("metric = \"flat\"\ninitial = [0, 0, 0, 0, 1, 1]\nwindow = [0, 20]\n").unwrap();
        assert_eq!(c.tol, 1e-10);
        assert!(c.chart().unwrap().is_flat());
        let c = RunConfig::from_toml(
            r#"
            window = [0.0, 5.0]
            tol = 1e-9
            outputs = ["trajectory-csv", "front-svg"]
            seed = 7
            [metric]
            g11 = "1"
            g22 = "cos(x1)^2"
            domain = [[-1.0, 1.0], [-3.0, 3.0]]
            geodesic_parallel = true
            [sweep]
            count = 10
            slice = "straight"
            "#,
        )
        .unwrap();
        assert_eq!(c.outputs, vec![OutputKind::TrajectoryCsv, OutputKind::FrontSvg]);
        assert_eq!(c.sweep.slice, Slice::Straight);
        assert!((c.chart().unwrap().coeffs(0.5, 0.0).g22 - 0.5_f64.cos().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            "metric = \"flat\"\nwindow = [0, 1]\nextra = 1\n",
            "metric = \"torus\"\nwindow = [0, 1]\n",
            "metric = \"flat\"\nwindow = [1, 1]\n",
            "metric = \"flat\"\nwindow = [0, 1]\ntol = 0.1\n",
            "metric = \"sphere\"\nwindow = [0, 1]\ninitial = [2, 0, 0, 0, 0, 0]\n",
            "window = [0, 1]\n[metric]\ng11 = \"1\"\ng22 = \"1 +\"\ndomain = [[0, 1], [0, 1]]\n",
            "window = [0, 1]\n[metric]\ng11 = \"1\"\ng22 = \"1\"\n",
            "window = [0, 1]\n[metric]\nbuiltin = \"flat\"\ncolour = 1\n",
            "window = [0, 1]\n[metric]\ng11 = \"1 + x1^2\"\ng22 = \"1\"\ndomain = [[-1, 1], [-1, 1]]\ngeodesic_parallel = true\n",
        ];
        for text in bad {
            assert!(RunConfig::from_toml(text).is_err(), "{text}");
        }
    }
}
