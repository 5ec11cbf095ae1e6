//! Grid evaluation behind `sweep` and `preset`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{SweepMethod, SweepSpec};
use crate::error::{Error, Result};
use crate::mode_algebra::{InputState, TransferMatrix};
use crate::models::{load_custom, ModelId, NonlinearPhase};
use crate::moments::{moments_general, moments_pia, MomentReport};
use crate::noise_figure::{
    gain_pia, gain_psa, gain_psa_general, nf_from_moments, nf_pia, nf_psa_general, nf_psa_two_injected,
    PhaseConfig, Regime,
};
use crate::numeric::to_db;

pub const FLAG_UNDEFINED_NF: &str = "undefined_nf";
pub const FLAG_ZERO_GAIN: &str = "zero_gain";

/// One output row: a grid point and a reported mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub xi: f64,
    pub theta: Option<f64>,
    pub mode: usize,
    pub gain_linear: f64,
    pub gain_db: Option<f64>,
    pub nf_linear: Option<f64>,
    pub nf_db: Option<f64>,
    pub mean_out: f64,
    pub var_out: f64,
    pub method: String,
    pub flags: String,
}

enum Source {
    Fixed(TransferMatrix),
    Model(ModelId),
}

impl Source {
    fn matrix(&self, xi: f64) -> Result<TransferMatrix> {
        match self {
            Source::Fixed(m) => Ok(m.clone()),
            Source::Model(id) => id.build(NonlinearPhase::new(xi)?),
        }
    }
}

/// Evaluates every grid point; rows come out ordered by xi, theta, mode.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let source = match &spec.model {
        ModelId::Custom(path) => Source::Fixed(load_custom(path)?),
        id => Source::Model(id.clone()),
    };
    let thetas: Vec<Option<f64>> = match spec.regime {
        Regime::Pia => vec![None],
        Regime::Psa => spec.theta_grid.values().into_iter().map(Some).collect(),
    };
    let points: Vec<(f64, Option<f64>)> = spec
        .xi_grid
        .values()
        .into_iter()
        .flat_map(|xi| thetas.iter().map(move |&t| (xi, t)))
        .collect();

    let blocks: Vec<Vec<ResultRow>> = points
        .par_iter()
        .map(|&(xi, theta)| {
            let m = source.matrix(xi)?;
            evaluate_point(&m, spec, xi, theta)
        })
        .collect::<Result<_>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

fn reported_modes(spec: &SweepSpec, n: usize) -> Result<Vec<usize>> {
    match &spec.modes {
        None => Ok((1..=n).collect()),
        Some(modes) => {
            if let Some(&bad) = modes.iter().find(|&&j| j == 0 || j > n) {
                return Err(Error::ModeOutOfRange { index: bad, n });
            }
            Ok(modes.clone())
        }
    }
}

/// Undefined noise figures become empty fields; anything else is an error.
fn defined(nf: Result<f64>) -> Result<Option<f64>> {
    match nf {
        Ok(x) => Ok(Some(x)),
        Err(Error::UndefinedNoiseFigure { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn input_with(flags: &[bool], amplitude: f64, phases: &[f64]) -> Result<InputState> {
    let alphas = flags
        .iter()
        .zip(phases)
        .map(|(&y, &p)| {
            if y {
                Complex64::from_polar(amplitude, p)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    InputState::new(alphas, flags.to_vec())
}

fn evaluate_point(m: &TransferMatrix, spec: &SweepSpec, xi: f64, theta: Option<f64>) -> Result<Vec<ResultRow>> {
    let n = m.n();
    let modes = reported_modes(spec, n)?;
    let flags = spec.injected.flags(n)?;
    let amp = spec.alpha_sq.sqrt();
    let exact = spec.method == SweepMethod::Exact;

    let mut rows = Vec::with_capacity(modes.len());
    match theta {
        None => {
            let alpha1 = Complex64::new(amp, 0.0);
            let report = if exact {
                moments_general(m, &InputState::signal_only(n, alpha1)?)?
            } else {
                moments_pia(m, alpha1)?
            };
            for &j in &modes {
                let gain = gain_pia(m, j)?;
                let nf = if exact {
                    nf_from_moments(spec.alpha_sq, spec.alpha_sq, &report, j)
                } else {
                    nf_pia(m, j)
                };
                rows.push(make_row(spec, xi, None, j, gain, defined(nf)?, &report)?);
            }
        }
        Some(t) => {
            let two = flags.iter().filter(|&&y| y).count() == 2;
            for &j in &modes {
                let phases = PhaseConfig::realizing(m, j, t)?;
                let unit = input_with(&flags, 1.0, phases.mode_phases())?;
                let report = moments_general(m, &input_with(&flags, amp, phases.mode_phases())?)?;
                let (gain, nf) = if exact {
                    (
                        gain_psa_general(m, j, &unit)?,
                        nf_from_moments(spec.alpha_sq, spec.alpha_sq, &report, j),
                    )
                } else if two {
                    (gain_psa(m, j, t)?, nf_psa_two_injected(m, j, t))
                } else {
                    (gain_psa_general(m, j, &unit)?, nf_psa_general(m, j, &unit))
                };
                rows.push(make_row(spec, xi, Some(t), j, gain, defined(nf)?, &report)?);
            }
        }
    }
    Ok(rows)
}

fn make_row(
    spec: &SweepSpec,
    xi: f64,
    theta: Option<f64>,
    j: usize,
    gain: f64,
    nf: Option<f64>,
    report: &MomentReport,
) -> Result<ResultRow> {
    let out = report.mode(j)?;
    let gain_db = to_db(gain);
    let mut flags = Vec::new();
    if nf.is_none() {
        flags.push(FLAG_UNDEFINED_NF);
    }
    if gain_db.is_none() {
        flags.push(FLAG_ZERO_GAIN);
    }
    Ok(ResultRow {
        xi,
        theta,
        mode: j,
        gain_linear: gain,
        gain_db,
        nf_linear: nf,
        nf_db: nf.and_then(to_db),
        mean_out: out.mean_out,
        var_out: out.var_out,
        method: spec.method.as_str().to_string(),
        flags: flags.join(";"),
    })
}

/// Noise-figure extremes of one mode over a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSummary {
    pub mode: usize,
    pub rows: usize,
    pub undefined: usize,
    /// `(nf_linear, xi, theta)` at the minimum and maximum.
    pub min: Option<(f64, f64, Option<f64>)>,
    pub max: Option<(f64, f64, Option<f64>)>,
}

pub fn summarize(rows: &[ResultRow]) -> Vec<ModeSummary> {
    let mut modes: Vec<usize> = rows.iter().map(|r| r.mode).collect();
    modes.sort_unstable();
    modes.dedup();
    modes
        .into_iter()
        .map(|mode| {
            let mut s = ModeSummary {
                mode,
                rows: 0,
                undefined: 0,
                min: None,
                max: None,
            };
            for r in rows.iter().filter(|r| r.mode == mode) {
                s.rows += 1;
                let Some(nf) = r.nf_linear else {
                    s.undefined += 1;
                    continue;
                };
                if s.min.is_none_or(|(v, _, _)| nf < v) {
                    s.min = Some((nf, r.xi, r.theta));
                }
                if s.max.is_none_or(|(v, _, _)| nf > v) {
                    s.max = Some((nf, r.xi, r.theta));
                }
            }
            s
        })
        .collect()
}
