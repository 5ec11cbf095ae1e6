//! Sweep specifications and the optional JSON config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ModelId;
use crate::noise_figure::Regime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Grid {
    pub fn single(x: f64) -> Self {
        Self {
            start: x,
            stop: x,
            count: 1,
            spacing: Spacing::Linear,
        }
    }

    pub fn linear(start: f64, stop: f64, count: usize) -> Self {
        Self {
            start,
            stop,
            count,
            spacing: Spacing::Linear,
        }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidSpec(format!("{name} grid needs at least one point")));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::InvalidSpec(format!("{name} grid bounds must be finite")));
        }
        if self.spacing == Spacing::Log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(Error::InvalidSpec(format!("{name} log grid needs positive bounds")));
        }
        Ok(())
    }

    /// Grid values; the end points are hit exactly.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    return self.stop;
                }
                let (a, b) = (last - i as f64, i as f64);
                match self.spacing {
                    // weighted form keeps symmetric and integer-step grids exact
                    Spacing::Linear => (self.start * a + self.stop * b) / last,
                    Spacing::Log => ((self.start.ln() * a + self.stop.ln() * b) / last).exp(),
                }
            })
            .collect()
    }

    fn scaled(self, k: f64) -> Self {
        Self {
            start: self.start * k,
            stop: self.stop * k,
            ..self
        }
    }
}

/// Which modes carry the coherent input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Injection {
    /// The leading `p` modes.
    Leading(usize),
    /// Explicit per-mode flags.
    Flags(Vec<bool>),
}

impl Injection {
    pub fn flags(&self, n: usize) -> Result<Vec<bool>> {
        match self {
            Injection::Leading(p) if (1..=n).contains(p) => Ok((0..n).map(|k| k < *p).collect()),
            Injection::Leading(p) => Err(Error::InvalidSpec(format!("injected count {p} not in 1..={n}"))),
            Injection::Flags(f) if f.len() == n => Ok(f.clone()),
            Injection::Flags(f) => Err(Error::InvalidSpec(format!(
                "{} injection flags given for a {n}-mode model",
                f.len()
            ))),
        }
    }

    fn count(&self) -> usize {
        match self {
            Injection::Leading(p) => *p,
            Injection::Flags(f) => f.iter().filter(|&&y| y).count(),
        }
    }
}

/// How noise figures are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMethod {
    /// Large-amplitude closed forms.
    #[default]
    ClosedForm,
    /// Full moments at finite `alpha_sq`.
    Exact,
}

impl SweepMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepMethod::ClosedForm => "closed-form",
            SweepMethod::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub const DEFAULT_ALPHA_SQ: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub model: ModelId,
    pub xi_grid: Grid,
    /// Radians; ignored for PIA.
    pub theta_grid: Grid,
    pub regime: Regime,
    pub injected: Injection,
    pub method: SweepMethod,
    pub alpha_sq: f64,
    /// 1-based; `None` reports every mode.
    pub modes: Option<Vec<usize>>,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl SweepSpec {
    pub fn new(model: ModelId, xi_grid: Grid, regime: Regime) -> Self {
        let injected = match regime {
            Regime::Pia => Injection::Leading(1),
            Regime::Psa => Injection::Leading(2),
        };
        Self {
            model,
            xi_grid,
            theta_grid: Grid::single(0.0),
            regime,
            injected,
            method: SweepMethod::ClosedForm,
            alpha_sq: DEFAULT_ALPHA_SQ,
            modes: None,
            output: None,
            format: Format::Csv,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.xi_grid.validate("xi")?;
        self.theta_grid.validate("theta")?;
        if self.xi_grid.start < 0.0 || self.xi_grid.stop < 0.0 {
            return Err(Error::InvalidSpec("xi must be non-negative".into()));
        }
        if !(self.alpha_sq > 0.0 && self.alpha_sq.is_finite()) {
            return Err(Error::InvalidSpec(format!("alpha_sq must be positive, got {}", self.alpha_sq)));
        }
        match self.regime {
            Regime::Pia if self.injected.count() != 1 => {
                return Err(Error::InvalidSpec("PIA injects the signal only".into()));
            }
            Regime::Psa if self.injected.count() < 2 => {
                return Err(Error::InvalidSpec("PSA needs at least two injected modes".into()));
            }
            _ => {}
        }
        if let Injection::Flags(f) = &self.injected {
            let need = if self.regime == Regime::Psa { 2 } else { 1 };
            if f.len() < need || !f[..need].iter().all(|&y| y) {
                return Err(Error::InvalidSpec(match self.regime {
                    Regime::Psa => "PSA needs the signal and idler (modes 1 and 2) injected".into(),
                    Regime::Pia => "PIA needs the signal (mode 1) injected".into(),
                }));
            }
        }
        if let Some(modes) = &self.modes {
            if modes.is_empty() || modes.contains(&0) {
                return Err(Error::InvalidSpec("reported modes are 1-based and non-empty".into()));
            }
        }
        Ok(())
    }
}

/// Sweep settings read from a JSON file. Every field is optional; command
/// line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub model: Option<String>,
    pub xi: Option<Grid>,
    pub theta: Option<Grid>,
    /// Interpret `theta` bounds in units of pi.
    pub theta_in_pi: Option<bool>,
    pub regime: Option<Regime>,
    pub injected: Option<Injection>,
    pub method: Option<SweepMethod>,
    pub alpha_sq: Option<f64>,
    pub modes: Option<Vec<usize>>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

impl SweepConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| Error::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Fills unset fields from `base`.
    pub fn or(self, base: SweepConfig) -> SweepConfig {
        SweepConfig {
            model: self.model.or(base.model),
            xi: self.xi.or(base.xi),
            theta: self.theta.or(base.theta),
            theta_in_pi: self.theta_in_pi.or(base.theta_in_pi),
            regime: self.regime.or(base.regime),
            injected: self.injected.or(base.injected),
            method: self.method.or(base.method),
            alpha_sq: self.alpha_sq.or(base.alpha_sq),
            modes: self.modes.or(base.modes),
            output: self.output.or(base.output),
            format: self.format.or(base.format),
        }
    }

    pub fn into_spec(self) -> Result<SweepSpec> {
        let model: ModelId = self
            .model
            .as_deref()
            .ok_or_else(|| Error::InvalidSpec("no model given".into()))?
            .parse()?;
        let xi = self.xi.ok_or_else(|| Error::InvalidSpec("no xi grid given".into()))?;
        let regime = self.regime.unwrap_or(Regime::Pia);
        let mut spec = SweepSpec::new(model, xi, regime);
        if let Some(theta) = self.theta {
            spec.theta_grid = if self.theta_in_pi.unwrap_or(false) {
                theta.scaled(std::f64::consts::PI)
            } else {
                theta
            };
        }
        if let Some(inj) = self.injected {
            spec.injected = inj;
        }
        spec.method = self.method.unwrap_or_default();
        spec.alpha_sq = self.alpha_sq.unwrap_or(DEFAULT_ALPHA_SQ);
        spec.modes = self.modes;
        spec.output = self.output;
        spec.format = self.format.unwrap_or_default();
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_values() {
        let g = Grid::linear(0.0, 1.0, 5);
        assert_eq!(g.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(Grid::single(2.0).values(), vec![2.0]);
        let l = Grid {
            spacing: Spacing::Log,
            ..Grid::linear(1e-4, 1e-2, 3)
        };
        let v = l.values();
        assert!((v[1] - 1e-3).abs() < 1e-15);
        assert_eq!(v[2], 1e-2);
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::linear(0.0, 1.0, 0).validate("xi").is_err());
        let l = Grid {
            spacing: Spacing::Log,
            ..Grid::linear(0.0, 1.0, 3)
        };
        assert!(l.validate("xi").is_err());
    }

    #[test]
    fn psa_needs_two_injected() {
        let mut s = SweepSpec::new(ModelId::FourMode, Grid::single(1.0), Regime::Psa);
        assert!(s.validate().is_ok());
        s.injected = Injection::Leading(1);
        assert!(s.validate().is_err());
        s.injected = Injection::Flags(vec![true, false, true, false]);
        assert!(s.validate().is_err());
    }

    #[test]
    fn config_merge_prefers_flags() {
        let file = SweepConfig {
            model: Some("two".into()),
            alpha_sq: Some(5.0),
            ..Default::default()
        };
        let flags = SweepConfig {
            model: Some("four".into()),
            xi: Some(Grid::single(1.0)),
            ..Default::default()
        };
        let spec = flags.or(file).into_spec().unwrap();
        assert_eq!(spec.model, ModelId::FourMode);
        assert_eq!(spec.alpha_sq, 5.0);
    }

    #[test]
    fn config_theta_in_pi() {
        let cfg = SweepConfig {
            model: Some("two".into()),
            xi: Some(Grid::single(1.0)),
            theta: Some(Grid::linear(-2.0, 2.0, 3)),
            theta_in_pi: Some(true),
            regime: Some(Regime::Psa),
            ..Default::default()
        };
        let spec = cfg.into_spec().unwrap();
        assert_eq!(spec.theta_grid.values()[0], -2.0 * std::f64::consts::PI);
    }

    #[test]
    fn config_json_shape() {
        let cfg: SweepConfig = serde_json::from_str(
            r#"{"model": "four", "xi": {"start": 0, "stop": 5, "count": 11},
                "regime": "psa", "injected": [true, true, false, false]}"#,
        )
        .unwrap();
        assert_eq!(cfg.injected, Some(Injection::Flags(vec![true, true, false, false])));
        assert!(serde_json::from_str::<SweepConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
