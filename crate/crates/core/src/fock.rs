//! Brute-force photon statistics on a truncated multi-mode Fock space.
//!
//! Output operators are applied matrix-free to a product of truncated
//! coherent states. Coherent amplitudes occupy levels `0..cutoff`; the working
//! space carries two extra levels per mode so the two raising operations in
//! `b_j^dag b_j` never fall off the top. Whatever would still leak is tracked.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode_algebra::{Ladder, TransferMatrix};
use crate::moments::{clamp_non_negative, Method, ModeMoments, MomentReport};
use crate::numeric::CompensatedSum;

/// Largest state vector the oracle will allocate.
pub const MAX_DIMENSION: u128 = 2_000_000;
/// Largest accepted coherent-state truncation loss.
pub const MAX_TRUNCATION_LOSS: f64 = 1e-8;
/// Levels beyond the cutoff kept free for raising operators.
const HEADROOM: usize = 2;
const HERMITICITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FockConfig {
    /// Per-mode coherent-state cutoff: levels `0..cutoff` are populated.
    pub cutoff: usize,
    /// Occupation of the highest populated level must fall below this before
    /// a cutoff is tried.
    pub convergence_factor: f64,
    /// Cutoff at which the search gives up.
    pub max_cutoff: usize,
    /// Allowed relative change of every moment between `D` and `D + 2`.
    pub rel_tol: f64,
}

impl Default for FockConfig {
    fn default() -> Self {
        Self {
            cutoff: 8,
            convergence_factor: 1e-10,
            max_cutoff: 40,
            rel_tol: 1e-6,
        }
    }
}

impl FockConfig {
    pub fn with_cutoff(cutoff: usize) -> Self {
        Self {
            cutoff,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<()> {
        if self.cutoff < 2 {
            return Err(Error::InvalidInput(format!("cutoff must be at least 2, got {}", self.cutoff)));
        }
        if !(self.convergence_factor > 0.0 && self.convergence_factor < 1.0) {
            return Err(Error::InvalidInput(format!(
                "convergence factor must lie in (0, 1), got {}",
                self.convergence_factor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    amplitudes: Vec<Complex64>,
    n_modes: usize,
    /// Basis levels per mode (cutoff plus headroom).
    levels: usize,
    truncation_loss: f64,
    leaked: f64,
}

impl FockState {
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect::<CompensatedSum>().value()
    }

    /// Probability lost by truncating the coherent states, before renormalising.
    pub fn truncation_loss(&self) -> f64 {
        self.truncation_loss
    }

    /// Squared norm discarded by raising operators at the top level.
    pub fn leaked_weight(&self) -> f64 {
        self.leaked
    }

    /// Amplitude of the occupation pattern `occ` (mode 1 first).
    pub fn amplitude(&self, occ: &[usize]) -> Option<Complex64> {
        if occ.len() != self.n_modes || occ.iter().any(|&m| m >= self.levels) {
            return None;
        }
        let idx = occ.iter().fold(0, |acc, &m| acc * self.levels + m);
        Some(self.amplitudes[idx])
    }

    fn stride(&self, k: usize) -> usize {
        self.levels.pow((self.n_modes - 1 - k) as u32)
    }

    fn inner(&self, other: &FockState) -> Complex64 {
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        for (a, b) in self.amplitudes.iter().zip(&other.amplitudes) {
            let z = a.conj() * b;
            re.add(z.re);
            im.add(z.im);
        }
        Complex64::new(re.value(), im.value())
    }
}

fn dimension(levels: usize, n: usize) -> Result<usize> {
    let dim = (levels as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if dim > MAX_DIMENSION {
        return Err(Error::FockDimension {
            dim,
            limit: MAX_DIMENSION,
        });
    }
    Ok(dim as usize)
}

/// Truncated single-mode coherent amplitudes `e^{-|a|^2/2} a^m / sqrt(m!)`
/// for `m < cutoff`, and the discarded probability.
fn coherent_coefficients(alpha: Complex64, cutoff: usize) -> (Vec<Complex64>, f64) {
    let mut c = Vec::with_capacity(cutoff);
    c.push(Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0));
    for m in 1..cutoff {
        let next = c[m - 1] * alpha / (m as f64).sqrt();
        c.push(next);
    }
    let kept = c.iter().map(|z| z.norm_sqr()).collect::<CompensatedSum>().value();
    (c, (1.0 - kept).max(0.0))
}

/// Product of truncated, renormalised coherent states `|alpha_1> ... |alpha_n>`.
pub fn prepare_coherent(alphas: &[Complex64], config: &FockConfig) -> Result<FockState> {
    config.check()?;
    let n = alphas.len();
    if n == 0 {
        return Err(Error::InvalidInput("no modes".into()));
    }
    let levels = config.cutoff + HEADROOM;
    let dim = dimension(levels, n)?;

    let mut kept_total = 1.0;
    let mut factors = Vec::with_capacity(n);
    for a in alphas {
        let (mut c, loss) = coherent_coefficients(*a, config.cutoff);
        if loss > MAX_TRUNCATION_LOSS {
            return Err(Error::Truncation {
                alpha_sq: a.norm_sqr(),
                cutoff: config.cutoff,
                loss,
            });
        }
        kept_total *= 1.0 - loss;
        let scale = (1.0 - loss).sqrt().recip();
        c.iter_mut().for_each(|z| *z *= scale);
        c.resize(levels, Complex64::new(0.0, 0.0));
        factors.push(c);
    }

    let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
    for (idx, amp) in amplitudes.iter_mut().enumerate() {
        let mut rest = idx;
        let mut z = Complex64::new(1.0, 0.0);
        for f in factors.iter().rev() {
            z *= f[rest % levels];
            rest /= levels;
        }
        *amp = z;
    }

    Ok(FockState {
        amplitudes,
        n_modes: n,
        levels,
        truncation_loss: 1.0 - kept_total,
        leaked: 0.0,
    })
}

/// Applies `sum_k coef_k L_k` where `L_k` lowers (`a_k`) or raises (`a_k^dag`).
fn apply_ladder_sum(state: &FockState, terms: &[(Complex64, Ladder)]) -> FockState {
    let levels = state.levels;
    let mut out = vec![Complex64::new(0.0, 0.0); state.amplitudes.len()];
    let mut leaked = state.leaked;
    for (k, &(coef, op)) in terms.iter().enumerate() {
        if coef == Complex64::new(0.0, 0.0) {
            continue;
        }
        let stride = state.stride(k);
        for (idx, &psi) in state.amplitudes.iter().enumerate() {
            if psi == Complex64::new(0.0, 0.0) {
                continue;
            }
            let occ = (idx / stride) % levels;
            match op {
                Ladder::Annihilation => {
                    if occ > 0 {
                        out[idx - stride] += coef * psi * (occ as f64).sqrt();
                    }
                }
                Ladder::Creation => {
                    let v = coef * psi * ((occ + 1) as f64).sqrt();
                    if occ + 1 < levels {
                        out[idx + stride] += v;
                    } else {
                        leaked += v.norm_sqr();
                    }
                }
            }
        }
    }
    FockState {
        amplitudes: out,
        leaked,
        ..*state
    }
}

fn flip(op: Ladder) -> Ladder {
    match op {
        Ladder::Annihilation => Ladder::Creation,
        Ladder::Creation => Ladder::Annihilation,
    }
}

/// Terms of `b_j` (or `b_j^dag` when `dagger`) in input ladder operators.
fn output_terms(m: &TransferMatrix, j0: usize, dagger: bool) -> Vec<(Complex64, Ladder)> {
    let tags = m.signature().tags();
    // row j is b_j for an annihilation tag and b_j^dag for a creation tag
    let conj = dagger ^ (tags[j0] == Ladder::Creation);
    m.row(j0)
        .iter()
        .zip(tags)
        .map(|(&mu, &t)| if conj { (mu.conj(), flip(t)) } else { (mu, t) })
        .collect()
}

fn check_state(m: &TransferMatrix, state: &FockState) -> Result<()> {
    if state.n_modes != m.n() {
        return Err(Error::DimensionMismatch {
            expected: m.n(),
            found: state.n_modes,
        });
    }
    Ok(())
}

/// `b_j |psi>` (unnormalised) for 1-based output mode `j`.
pub fn apply_output_mode(m: &TransferMatrix, j: usize, state: &FockState) -> Result<FockState> {
    let j0 = m.check_mode(j)?;
    check_state(m, state)?;
    Ok(apply_ladder_sum(state, &output_terms(m, j0, false)))
}

/// `b_j^dag |psi>` (unnormalised).
pub fn apply_output_mode_adjoint(m: &TransferMatrix, j: usize, state: &FockState) -> Result<FockState> {
    let j0 = m.check_mode(j)?;
    check_state(m, state)?;
    Ok(apply_ladder_sum(state, &output_terms(m, j0, true)))
}

/// Oracle moments with the cutoff that was finally accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub moments: MomentReport,
    pub cutoff: usize,
    pub truncation_loss: f64,
    pub leaked_weight: f64,
    /// Largest relative change against the next-lower cutoff.
    pub relative_change: f64,
}

/// Moments at a single fixed cutoff, no convergence check.
pub fn oracle_moments_fixed(m: &TransferMatrix, alphas: &[Complex64], config: &FockConfig) -> Result<OracleReport> {
    if alphas.len() != m.n() {
        return Err(Error::DimensionMismatch {
            expected: m.n(),
            found: alphas.len(),
        });
    }
    let psi = prepare_coherent(alphas, config)?;
    let norm = psi.norm_sqr();
    let mut leaked: f64 = 0.0;
    let mut modes = Vec::with_capacity(m.n());
    for j in 1..=m.n() {
        let phi = apply_output_mode(m, j, &psi)?;
        let chi = apply_output_mode_adjoint(m, j, &phi)?;
        leaked = leaked.max(chi.leaked);
        let mean = psi.inner(&chi);
        if mean.im.abs() > HERMITICITY_TOL * norm * mean.re.abs().max(1.0) {
            return Err(Error::Hermiticity {
                mode: j,
                residual: mean.im.abs(),
            });
        }
        let second = chi.norm_sqr();
        let mut var = CompensatedSum::new();
        var.add(second);
        var.add_product(-mean.re, mean.re);
        let a_sq = alphas[j - 1].norm_sqr();
        modes.push(ModeMoments {
            mean_in: a_sq,
            var_in: a_sq,
            mean_out: clamp_non_negative(mean.re, "oracle mean", j),
            var_out: clamp_non_negative(var.value(), "oracle variance", j),
        });
    }
    Ok(OracleReport {
        moments: MomentReport {
            modes,
            method: Method::Oracle,
        },
        cutoff: config.cutoff,
        truncation_loss: psi.truncation_loss,
        leaked_weight: leaked,
        relative_change: f64::NAN,
    })
}

fn relative_change(a: &MomentReport, b: &MomentReport) -> f64 {
    let rel = |x: f64, y: f64| {
        let d = (x - y).abs();
        if d <= 1e-12 {
            0.0
        } else {
            d / x.abs().max(y.abs())
        }
    };
    a.modes
        .iter()
        .zip(&b.modes)
        .map(|(p, q)| rel(p.mean_out, q.mean_out).max(rel(p.var_out, q.var_out)))
        .fold(0.0, f64::max)
}

fn top_occupation(alphas: &[Complex64], cutoff: usize) -> f64 {
    alphas
        .iter()
        .map(|a| coherent_coefficients(*a, cutoff).0[cutoff - 1].norm_sqr())
        .fold(0.0, f64::max)
}

/// Oracle moments with the cutoff raised until results stop changing.
///
/// Starting from `config.cutoff`, the cutoff is raised until the highest
/// populated level holds less than `convergence_factor` probability and the
/// truncation loss is acceptable; then results at `D` and `D + 2` must agree
/// to `rel_tol`, otherwise `D` grows by 2. The finer result is returned.
pub fn oracle_moments(m: &TransferMatrix, alphas: &[Complex64], config: &FockConfig) -> Result<OracleReport> {
    config.check()?;
    let mut d = config.cutoff;
    while d < config.max_cutoff && top_occupation(alphas, d) > config.convergence_factor {
        d += 1;
    }
    let mut coarse = loop {
        match oracle_moments_fixed(m, alphas, &FockConfig { cutoff: d, ..*config }) {
            Err(Error::Truncation { .. }) if d + 2 <= config.max_cutoff => d += 1,
            Err(Error::Truncation { loss, .. }) => {
                return Err(Error::NonConvergence { cutoff: d, change: loss });
            }
            other => break other?,
        }
    };
    loop {
        let next = d + 2;
        if next > config.max_cutoff {
            return Err(Error::NonConvergence {
                cutoff: d,
                change: coarse.relative_change,
            });
        }
        let mut fine = oracle_moments_fixed(m, alphas, &FockConfig { cutoff: next, ..*config })?;
        let change = relative_change(&coarse.moments, &fine.moments);
        fine.relative_change = change;
        log::debug!("oracle cutoff {d} -> {next}: relative change {change:.3e}");
        if change <= config.rel_tol {
            return Ok(fine);
        }
        coarse = fine;
        d = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode_algebra::LadderSignature;
    use crate::models::{build_two_mode, NonlinearPhase};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_is_a_basis_vector() {
        let s = prepare_coherent(&[c(0.0, 0.0), c(0.0, 0.0)], &FockConfig::with_cutoff(4)).unwrap();
        assert_eq!(s.norm_sqr(), 1.0);
        assert_eq!(s.amplitude(&[0, 0]), Some(c(1.0, 0.0)));
        assert_eq!(s.truncation_loss(), 0.0);
    }

    #[test]
    fn coherent_state_statistics() {
        let m = TransferMatrix::identity(LadderSignature::parse("a").unwrap());
        let r = oracle_moments_fixed(&m, &[c(0.5, 0.0)], &FockConfig::with_cutoff(12)).unwrap();
        let mm = r.moments.modes[0];
        assert!((mm.mean_out - 0.25).abs() < 1e-10);
        assert!((mm.var_out - 0.25).abs() < 1e-10);
    }

    #[test]
    fn identity_annihilates_vacuum() {
        let m = TransferMatrix::identity(LadderSignature::parse("ac").unwrap());
        let s = prepare_coherent(&[c(0.0, 0.0), c(0.0, 0.0)], &FockConfig::with_cutoff(4)).unwrap();
        let out = apply_output_mode(&m, 1, &s).unwrap();
        assert_eq!(out.norm_sqr(), 0.0);
    }

    #[test]
    fn coherent_state_is_an_eigenstate() {
        let m = TransferMatrix::identity(LadderSignature::parse("ac").unwrap());
        let alpha = c(0.3, -0.4);
        let s = prepare_coherent(&[alpha, c(0.1, 0.0)], &FockConfig::with_cutoff(14)).unwrap();
        let out = apply_output_mode(&m, 1, &s).unwrap();
        let diff: f64 = out
            .amplitudes()
            .iter()
            .zip(s.amplitudes())
            .map(|(b, p)| (b - alpha * p).norm_sqr())
            .sum();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn identity_moments() {
        let m = TransferMatrix::identity(LadderSignature::parse("ac").unwrap());
        let r = oracle_moments(&m, &[c(2.0, 0.0), c(0.0, 0.0)], &FockConfig::default()).unwrap();
        let (a, b) = (r.moments.modes[0], r.moments.modes[1]);
        assert!((a.mean_out - 4.0).abs() < 1e-8 && (a.var_out - 4.0).abs() < 1e-8);
        assert!(b.mean_out.abs() < 1e-12 && b.var_out.abs() < 1e-12);
        assert_eq!(r.leaked_weight, 0.0);
    }

    #[test]
    fn two_mode_vacuum_fluorescence() {
        let m = build_two_mode(NonlinearPhase::new(0.1).unwrap());
        let r = oracle_moments(&m, &[c(0.0, 0.0), c(0.0, 0.0)], &FockConfig::with_cutoff(4)).unwrap();
        let want = m.entry(1, 2).unwrap().norm_sqr();
        assert!((r.moments.modes[0].mean_out - want).abs() < 1e-8);
    }

    #[test]
    fn guards() {
        let too_big = FockConfig::with_cutoff(100);
        assert!(matches!(
            prepare_coherent(&[c(0.0, 0.0); 4], &too_big),
            Err(Error::FockDimension { .. })
        ));
        assert!(matches!(
            prepare_coherent(&[c(3.0, 0.0)], &FockConfig::with_cutoff(5)),
            Err(Error::Truncation { .. })
        ));
        assert!(prepare_coherent(&[c(0.0, 0.0)], &FockConfig::with_cutoff(1)).is_err());
    }

    #[test]
    fn non_convergence_reported() {
        let m = TransferMatrix::identity(LadderSignature::parse("a").unwrap());
        let cfg = FockConfig {
            cutoff: 4,
            max_cutoff: 6,
            ..FockConfig::default()
        };
        assert!(matches!(
            oracle_moments(&m, &[c(2.0, 0.0)], &cfg),
            Err(Error::NonConvergence { .. })
        ));
    }
}
