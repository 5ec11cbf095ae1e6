//! Gains and noise figures, from output moments or from the large-amplitude
//! closed forms.
//!
//! All noise figures are normalised to the input signal-to-noise ratio of the
//! signal (mode 1), including for modes that are not injected. In the closed
//! forms the terms due to parametric fluorescence alone are dropped, which is
//! the `|alpha|^2 >> 1` limit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode_algebra::{InputState, PairKind, TransferMatrix};
use crate::moments::MomentReport;
use crate::numeric::{to_db, wrap_phase, CompensatedSum};

/// Output levels below this fraction of the available gain are treated as
/// perfect deamplification.
const ZERO_GAIN_FRACTION: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Pia,
    Psa,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Pia => "pia",
            Regime::Psa => "psa",
        })
    }
}

/// Gain and noise figure of one output mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseEntry {
    /// 1-based mode.
    pub mode: usize,
    pub regime: Regime,
    /// Relative phase in (-pi, pi]; PSA only.
    pub theta: Option<f64>,
    pub gain_linear: f64,
    pub gain_db: Option<f64>,
    pub nf_linear: f64,
    pub nf_db: Option<f64>,
}

impl NoiseEntry {
    pub fn new(mode: usize, regime: Regime, theta: Option<f64>, gain: f64, nf: f64) -> Self {
        Self {
            mode,
            regime,
            theta: theta.map(wrap_phase),
            gain_linear: gain,
            gain_db: to_db(gain),
            nf_linear: nf,
            nf_db: to_db(nf),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    pub entries: Vec<NoiseEntry>,
}

impl NoiseReport {
    /// Phase-insensitive gain and noise figure of every output mode.
    pub fn pia(m: &TransferMatrix) -> Result<Self> {
        let entries = (1..=m.n())
            .map(|j| Ok(NoiseEntry::new(j, Regime::Pia, None, gain_pia(m, j)?, nf_pia(m, j)?)))
            .collect::<Result<_>>()?;
        Ok(Self { entries })
    }

    /// Phase-sensitive figures of every output mode, each seeing `theta`.
    pub fn psa(m: &TransferMatrix, theta: f64) -> Result<Self> {
        let entries = (1..=m.n())
            .map(|j| {
                let nf = nf_psa_two_injected(m, j, theta)?;
                Ok(NoiseEntry::new(j, Regime::Psa, Some(theta), gain_psa(m, j, theta)?, nf))
            })
            .collect::<Result<_>>()?;
        Ok(Self { entries })
    }

    /// Entry of 1-based mode `j`.
    pub fn mode(&self, j: usize) -> Option<&NoiseEntry> {
        self.entries.iter().find(|e| e.mode == j)
    }
}

/// Input phases `theta_k` of every mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    mode_phases: Vec<f64>,
}

impl PhaseConfig {
    pub fn new(mode_phases: Vec<f64>) -> Self {
        Self { mode_phases }
    }

    pub fn from_input(input: &InputState) -> Self {
        Self::new(input.alphas().iter().map(|a| a.arg()).collect())
    }

    pub fn mode_phases(&self) -> &[f64] {
        &self.mode_phases
    }

    /// Input phases giving relative phase `theta` between the signal/idler
    /// pair for output mode `j`. The idler and all other modes get phase 0;
    /// the signal phase absorbs `theta` and the matrix phases of row `j`.
    pub fn realizing(m: &TransferMatrix, j: usize, theta: f64) -> Result<Self> {
        let j0 = m.check_mode(j)?;
        if m.n() < 2 {
            return Err(Error::InvalidInput("relative phase needs at least two modes".into()));
        }
        let (t1, t2) = (m.row(j0)[0].arg(), m.row(j0)[1].arg());
        let signal = match m.signature().kind0(0, 1) {
            PairKind::A | PairKind::C => theta - t1 + t2,
            PairKind::B => theta + t1 - t2,
            PairKind::D => t1 - t2 - theta,
        };
        let mut phases = vec![0.0; m.n()];
        phases[0] = signal;
        Ok(Self::new(phases))
    }

    /// Relative phase of the pair `(k, l)`, `k < l`, as seen by output mode `j`;
    /// the variant (A, B, C or D) follows from the pair's operator types.
    pub fn relative_phase(&self, m: &TransferMatrix, j: usize, k: usize, l: usize) -> Result<f64> {
        let j0 = m.check_mode(j)?;
        let (k0, l0) = (m.check_mode(k)?, m.check_mode(l)?);
        if k0 >= l0 {
            return Err(Error::PairOrder { k, l });
        }
        if self.mode_phases.len() != m.n() {
            return Err(Error::DimensionMismatch {
                expected: m.n(),
                found: self.mode_phases.len(),
            });
        }
        Ok(relative_phase0(m, &self.mode_phases, j0, k0, l0))
    }
}

fn relative_phase0(m: &TransferMatrix, phases: &[f64], j0: usize, k0: usize, l0: usize) -> f64 {
    let row = m.row(j0);
    let (tjk, tjl) = (row[k0].arg(), row[l0].arg());
    let (tk, tl) = (phases[k0], phases[l0]);
    match m.signature().kind0(k0, l0) {
        PairKind::A => tjk - tjl + tk + tl,
        PairKind::B => -tjk + tjl + tk + tl,
        PairKind::C => tjk - tjl + tk - tl,
        PairKind::D => tjk - tjl - tk + tl,
    }
}

/// Noise figure from exact moments:
/// `(<N_1>_in^2 / <dN_1^2>_in) * (<dN_j^2>_out / <N_j>_out^2)`.
pub fn nf_from_moments(mean_in: f64, var_in: f64, report: &MomentReport, j: usize) -> Result<f64> {
    if !(mean_in > 0.0 && var_in > 0.0) {
        return Err(Error::InvalidInput(
            "noise figure needs a signal with positive input mean and variance".into(),
        ));
    }
    let out = report.mode(j)?;
    if out.mean_out <= 0.0 {
        return Err(Error::UndefinedNoiseFigure {
            mode: j,
            reason: "zero output mean",
        });
    }
    let snr_in = mean_in / var_in * mean_in;
    Ok(snr_in * (out.var_out / out.mean_out) / out.mean_out)
}

/// Phase-insensitive gain `|mu_j1|^2` (a conversion efficiency for `j != 1`).
pub fn gain_pia(m: &TransferMatrix, j: usize) -> Result<f64> {
    let j0 = m.check_mode(j)?;
    Ok(m.row(j0)[0].norm_sqr())
}

/// `1 + sum_{k>=2} |mu_jk|^2 / |mu_j1|^2`.
pub fn nf_pia(m: &TransferMatrix, j: usize) -> Result<f64> {
    let j0 = m.check_mode(j)?;
    let row = m.row(j0);
    let g = row[0].norm_sqr();
    if g == 0.0 {
        return Err(Error::UndefinedNoiseFigure {
            mode: j,
            reason: "no coupling from the signal",
        });
    }
    let rest = row[1..].iter().map(|z| z.norm_sqr()).collect::<CompensatedSum>().value();
    Ok(1.0 + rest / g)
}

fn signal_idler(m: &TransferMatrix, j: usize) -> Result<(usize, f64, f64)> {
    let j0 = m.check_mode(j)?;
    if m.n() < 2 {
        return Err(Error::InvalidInput("phase-sensitive operation needs at least two modes".into()));
    }
    let row = m.row(j0);
    Ok((j0, row[0].norm(), row[1].norm()))
}

/// Signal and idler injected with equal amplitudes:
/// `|mu_j1|^2 + |mu_j2|^2 + 2 |mu_j1| |mu_j2| cos(theta)`.
pub fn gain_psa(m: &TransferMatrix, j: usize, theta: f64) -> Result<f64> {
    let (_, a, b) = signal_idler(m, j)?;
    Ok(a * a + b * b + 2.0 * a * b * theta.cos())
}

/// Large-amplitude noise figure with signal and idler injected at equal
/// photon numbers, everything else in vacuum.
pub fn nf_psa_two_injected(m: &TransferMatrix, j: usize, theta: f64) -> Result<f64> {
    let (j0, a, b) = signal_idler(m, j)?;
    let row = m.row(j0);
    let w: Vec<f64> = row.iter().map(|z| z.norm_sqr()).collect();
    let injected = |k: usize| if k < 2 { 1.0 } else { 0.0 };

    let mut num = CompensatedSum::new();
    num.add(w[0] * w[0]);
    num.add(w[1] * w[1]);
    for k in 0..w.len() {
        for l in k + 1..w.len() {
            num.add(w[k] * w[l] * (injected(k) + injected(l)));
        }
    }
    let total = w.iter().copied().collect::<CompensatedSum>().value();
    num.add(2.0 * a * b * theta.cos() * total);

    let omega = a * a + b * b + 2.0 * a * b * theta.cos();
    if omega <= ZERO_GAIN_FRACTION * (a * a + b * b) {
        return Err(Error::UndefinedNoiseFigure {
            mode: j,
            reason: "zero phase-sensitive gain",
        });
    }
    Ok(num.value() / omega / omega)
}

struct InjectedPattern {
    flags: Vec<f64>,
    phases: Vec<f64>,
}

fn injected_pattern(m: &TransferMatrix, input: &InputState) -> Result<InjectedPattern> {
    input.check_dim(m.n())?;
    let injected = input.injected();
    if !injected[0] {
        return Err(Error::InvalidInput("the signal (mode 1) must be injected".into()));
    }
    let amp = input.alphas()[0].norm();
    for (k, a) in input.alphas().iter().enumerate() {
        if injected[k] && (a.norm() - amp).abs() > 1e-9 * amp.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "injected modes need equal amplitudes (mode {} has {}, signal has {amp})",
                k + 1,
                a.norm()
            )));
        }
    }
    Ok(InjectedPattern {
        flags: injected.iter().map(|&y| if y { 1.0 } else { 0.0 }).collect(),
        phases: PhaseConfig::from_input(input).mode_phases,
    })
}

/// Generalised phase-sensitive gain `Omega_j`: output of mode `j` per input
/// photon when every injected mode carries the same photon number.
pub fn gain_psa_general(m: &TransferMatrix, j: usize, input: &InputState) -> Result<f64> {
    let j0 = m.check_mode(j)?;
    let pattern = injected_pattern(m, input)?;
    Ok(omega(m, j0, &pattern))
}

fn omega(m: &TransferMatrix, j0: usize, p: &InjectedPattern) -> f64 {
    let row = m.row(j0);
    let n = m.n();
    let mut acc = CompensatedSum::new();
    for k in 0..n {
        acc.add(p.flags[k] * row[k].norm_sqr());
    }
    for k in 0..n {
        for l in k + 1..n {
            if p.flags[k] * p.flags[l] == 0.0 {
                continue;
            }
            let theta = relative_phase0(m, &p.phases, j0, k, l);
            acc.add(2.0 * row[k].norm() * row[l].norm() * theta.cos());
        }
    }
    acc.value()
}

/// Large-amplitude noise figure for any set of injected modes sharing the
/// same photon number (phases may differ), the signal among them.
///
/// Numerator: `sum_{k inj} |mu_jk|^4 + sum_{k<l} |mu_jk mu_jl|^2 (y_k + y_l)
/// + sum_{k<l inj} 2 |mu_jk mu_jl| cos(Theta_kl) sum_m |mu_jm|^2`,
/// divided by `Omega_j^2`. The trailing row sum runs over every mode `m`;
/// for the signal/idler pair this is the familiar
/// `|mu_j1|^2 + |mu_j2|^2 + sum_{m>=3} |mu_jm|^2`.
pub fn nf_psa_general(m: &TransferMatrix, j: usize, input: &InputState) -> Result<f64> {
    let j0 = m.check_mode(j)?;
    let p = injected_pattern(m, input)?;
    let row = m.row(j0);
    let n = m.n();
    let w: Vec<f64> = row.iter().map(|z| z.norm_sqr()).collect();
    let total = w.iter().copied().collect::<CompensatedSum>().value();

    let mut num = CompensatedSum::new();
    let mut scale = 0.0;
    for k in 0..n {
        num.add(p.flags[k] * w[k] * w[k]);
        scale += p.flags[k] * w[k];
    }
    for k in 0..n {
        for l in k + 1..n {
            num.add(w[k] * w[l] * (p.flags[k] + p.flags[l]));
            if p.flags[k] * p.flags[l] != 0.0 {
                let theta = relative_phase0(m, &p.phases, j0, k, l);
                num.add(2.0 * row[k].norm() * row[l].norm() * theta.cos() * total);
            }
        }
    }

    let om = omega(m, j0, &p);
    if om <= ZERO_GAIN_FRACTION * scale {
        return Err(Error::UndefinedNoiseFigure {
            mode: j,
            reason: "zero phase-sensitive gain",
        });
    }
    Ok(num.value() / om / om)
}
