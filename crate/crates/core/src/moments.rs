//! Closed-form output photon-number means and variances for coherent or
//! vacuum inputs through an arbitrary linear mode transfer matrix.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode_algebra::{InputState, PairKind, TransferMatrix};
use crate::numeric::CompensatedSum;

/// Values this far below zero are treated as round-off and clamped.
const NEGATIVE_FLOOR: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Oracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed-form",
            Method::Oracle => "oracle",
        })
    }
}

/// Photon-number statistics of a single mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeMoments {
    /// Input mean photon number `|alpha_j|^2`; also the input variance.
    pub mean_in: f64,
    pub var_in: f64,
    pub mean_out: f64,
    pub var_out: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub modes: Vec<ModeMoments>,
    pub method: Method,
}

impl MomentReport {
    /// Statistics of 1-based mode `j`.
    pub fn mode(&self, j: usize) -> Result<&ModeMoments> {
        if j == 0 || j > self.modes.len() {
            return Err(Error::ModeOutOfRange {
                index: j,
                n: self.modes.len(),
            });
        }
        Ok(&self.modes[j - 1])
    }

    pub fn n(&self) -> usize {
        self.modes.len()
    }
}

pub(crate) fn clamp_non_negative(x: f64, what: &str, mode: usize) -> f64 {
    if x >= 0.0 {
        x
    } else if x >= NEGATIVE_FLOOR {
        log::warn!("clamping {what} of mode {mode} from {x:.3e} to zero");
        0.0
    } else {
        x
    }
}

/// Phase-sensitive contribution of the pair `(k, l)`, `k < l`, to the
/// output mean of a row with coefficients `mu_k`, `mu_l`.
fn pair_term(kind: PairKind, mu_k: Complex64, mu_l: Complex64, a_k: Complex64, a_l: Complex64) -> f64 {
    let z = match kind {
        PairKind::A => mu_k * mu_l.conj() * a_k * a_l,
        PairKind::B => mu_k.conj() * mu_l * a_k * a_l,
        PairKind::C => mu_k * mu_l.conj() * a_k * a_l.conj(),
        PairKind::D => mu_k * mu_l.conj() * a_k.conj() * a_l,
    };
    2.0 * z.re
}

/// Phase-insensitive operation: only the signal (mode 1) is injected.
///
/// `<N_j> = |mu_j1|^2 |a1|^2 + sum_k |mu_jk|^2 sigma_jk`
///
/// `<dN_j^2> = |mu_j1|^4 |a1|^2 + sum_{k>=2} |mu_j1 mu_jk|^2 |a1|^2
///            + sum_{k<l} |mu_jk mu_jl|^2 sigma_kl`
///
pub fn moments_pia(m: &TransferMatrix, alpha1: Complex64) -> Result<MomentReport> {
    let n = m.n();
    let sig = m.signature();
    let a_sq = alpha1.norm_sqr();
    let modes = (0..n)
        .map(|j| {
            let row = m.row(j);
            let w: Vec<f64> = row.iter().map(|z| z.norm_sqr()).collect();

            let mut mean = CompensatedSum::new();
            mean.add(w[0] * a_sq);
            for k in 0..n {
                mean.add(w[k] * sig.sigma0(j, k));
            }

            let mut var = CompensatedSum::new();
            var.add(w[0] * w[0] * a_sq);
            for &wk in &w[1..] {
                var.add(w[0] * wk * a_sq);
            }
            for k in 0..n {
                for l in k + 1..n {
                    var.add(w[k] * w[l] * sig.sigma0(k, l));
                }
            }

            let (mean_in, var_in) = if j == 0 { (a_sq, a_sq) } else { (0.0, 0.0) };
            ModeMoments {
                mean_in,
                var_in,
                mean_out: clamp_non_negative(mean.value(), "mean", j + 1),
                var_out: clamp_non_negative(var.value(), "variance", j + 1),
            }
        })
        .collect();
    Ok(MomentReport {
        modes,
        method: Method::ClosedForm,
    })
}

/// Arbitrary injection pattern.
///
/// The mean is
/// `sum_k |mu_jk|^2 (|a_k|^2 + sigma_jk) + sum_{k<l} P_kl`, where the
/// phase term `P_kl` takes one of four forms selected by the operator
/// types of modes `k` and `l`.
///
/// For the variance, split the row weights by operator type:
/// `n_j = sum_k |mu_jk|^2 sigma_jk` (the vacuum contribution to the mean) and
/// `m_j = sum_k |mu_jk|^2 (1 - sigma_jk)`, so `S_j = n_j + m_j` is the full
/// row sum. Then
///
/// `<dN_j^2> = S_j (sum_k |mu_jk|^2 |a_k|^2 + sum_{k<l} P_kl) + n_j m_j`.
///
/// Expanding the products gives the familiar layout
///
/// ```text
/// sum_k |mu_jk|^4 |a_k|^2
///     + sum_{k<l} |mu_jk mu_jl|^2 (|a_k|^2 + |a_l|^2 + sigma_kl)
///     + sum_{k<l} P_kl sum_m |mu_jm|^2
/// ```
///
/// which holds for any matrix, consistent or not.
pub fn moments_general(m: &TransferMatrix, input: &InputState) -> Result<MomentReport> {
    let n = m.n();
    input.check_dim(n)?;
    let sig = m.signature();
    let alphas = input.alphas();

    let modes = (0..n)
        .map(|j| {
            let row = m.row(j);

            let mut coherent = CompensatedSum::new();
            for (k, z) in row.iter().enumerate() {
                coherent.add(z.norm_sqr() * alphas[k].norm_sqr());
            }
            for k in 0..n {
                if alphas[k] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for l in k + 1..n {
                    coherent.add(pair_term(sig.kind0(k, l), row[k], row[l], alphas[k], alphas[l]));
                }
            }
            let coherent = coherent.value();

            let mut vacuum = CompensatedSum::new();
            let mut same = CompensatedSum::new();
            for (k, z) in row.iter().enumerate() {
                if sig.sigma0(j, k) == 1.0 {
                    vacuum.add(z.norm_sqr());
                } else {
                    same.add(z.norm_sqr());
                }
            }
            let (vacuum, same) = (vacuum.value(), same.value());

            let mut mean = CompensatedSum::new();
            mean.add(coherent);
            mean.add(vacuum);

            // (n_j + m_j) * coherent + n_j m_j
            let mut var = CompensatedSum::new();
            var.add_product(vacuum, coherent);
            var.add_product(same, coherent);
            var.add_product(vacuum, same);

            let a_sq = alphas[j].norm_sqr();
            ModeMoments {
                mean_in: a_sq,
                var_in: a_sq,
                mean_out: clamp_non_negative(mean.value(), "mean", j + 1),
                var_out: clamp_non_negative(var.value(), "variance", j + 1),
            }
        })
        .collect();

    Ok(MomentReport {
        modes,
        method: Method::ClosedForm,
    })
}
