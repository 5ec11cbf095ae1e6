//! Analytic transfer matrices of the dual-pump amplifier models and the
//! loader for user-supplied matrices.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode_algebra::{
    validate_symplectic, Ladder, LadderSignature, TransferMatrix, DEFAULT_TOLERANCE,
};

/// Nonlinear phase `xi = gamma * P * z` (dimensionless).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct NonlinearPhase(f64);

impl NonlinearPhase {
    pub fn new(xi: f64) -> Result<Self> {
        if !xi.is_finite() || xi < 0.0 {
            return Err(Error::InvalidPhase(xi));
        }
        Ok(Self(xi))
    }

    /// Product of fiber nonlinear coefficient, per-pump power and length.
    pub fn from_fiber(gamma: f64, power: f64, length: f64) -> Result<Self> {
        Self::new(gamma * power * length)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for NonlinearPhase {
    type Error = Error;
    fn try_from(xi: f64) -> Result<Self> {
        Self::new(xi)
    }
}

impl From<NonlinearPhase> for f64 {
    fn from(p: NonlinearPhase) -> f64 {
        p.0
    }
}

/// Amplifier model selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelId {
    TwoMode,
    FourMode,
    Custom(PathBuf),
}

impl ModelId {
    /// Transfer matrix of the model at nonlinear phase `phase`.
    /// Custom matrices do not depend on the phase.
    pub fn build(&self, phase: NonlinearPhase) -> Result<TransferMatrix> {
        match self {
            ModelId::TwoMode => Ok(build_two_mode(phase)),
            ModelId::FourMode => Ok(build_four_mode(phase)),
            ModelId::Custom(path) => load_custom(path),
        }
    }

    pub fn n_modes(&self) -> Option<usize> {
        match self {
            ModelId::TwoMode => Some(2),
            ModelId::FourMode => Some(4),
            ModelId::Custom(_) => None,
        }
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two" | "two-mode" | "2" => Ok(ModelId::TwoMode),
            "four" | "four-mode" | "4" => Ok(ModelId::FourMode),
            _ => match s.strip_prefix("custom:") {
                Some(path) if !path.is_empty() => Ok(ModelId::Custom(PathBuf::from(path))),
                _ => Err(Error::InvalidSpec(format!(
                    "unknown model {s:?} (expected two, four or custom:<path>)"
                ))),
            },
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelId::TwoMode => f.write_str("two"),
            ModelId::FourMode => f.write_str("four"),
            ModelId::Custom(p) => write!(f, "custom:{}", p.display()),
        }
    }
}

/// Signal/idler model without pump depletion, attenuation or dispersion.
///
/// With `r = sqrt(3) xi`:
/// `mu11 = cosh r + (i/sqrt3) sinh r`, `mu12 = (2i/sqrt3) sinh r`,
/// `mu21 = -mu12`, `mu22 = conj(mu11)`.
pub fn build_two_mode(phase: NonlinearPhase) -> TransferMatrix {
    let sqrt3 = 3f64.sqrt();
    let r = sqrt3 * phase.value();
    let (c, s) = (r.cosh(), r.sinh());
    let mu11 = Complex64::new(c, s / sqrt3);
    let mu12 = Complex64::new(0.0, 2.0 * s / sqrt3);
    let rows = vec![vec![mu11, mu12], vec![-mu12, mu11.conj()]];
    TransferMatrix::from_rows(
        rows,
        LadderSignature::new(vec![Ladder::Annihilation, Ladder::Creation]).unwrap(),
        format!("two-mode xi={}", phase.value()),
    )
    .unwrap()
}

/// Signal, idler and the two first cascaded sidebands; zero-dispersion
/// first-order solution. Mode order: signal, idler, sideband 1, sideband 2.
pub fn build_four_mode(phase: NonlinearPhase) -> TransferMatrix {
    let x = phase.value();
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let rows = vec![
        vec![c(1.0, x), c(0.0, 2.0 * x), c(0.0, 2.0 * x), c(0.0, x)],
        vec![c(0.0, -2.0 * x), c(1.0, -x), c(0.0, -x), c(0.0, -2.0 * x)],
        vec![c(0.0, 2.0 * x), c(0.0, x), c(1.0, x), c(0.0, 2.0 * x)],
        vec![c(0.0, -x), c(0.0, -2.0 * x), c(0.0, -2.0 * x), c(1.0, -x)],
    ];
    TransferMatrix::from_rows(
        rows,
        LadderSignature::alternating(4).unwrap(),
        format!("four-mode xi={x}"),
    )
    .unwrap()
}

/// On-disk representation of a transfer matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub signature: Vec<String>,
    pub entries: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl MatrixFile {
    pub fn from_matrix(m: &TransferMatrix) -> Self {
        Self {
            n: m.n(),
            signature: m
                .signature()
                .tags()
                .iter()
                .map(|t| match t {
                    Ladder::Annihilation => "a".to_string(),
                    Ladder::Creation => "c".to_string(),
                })
                .collect(),
            entries: m
                .rows()
                .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
            label: Some(m.label().to_string()),
        }
    }

    /// Converts to a matrix without checking quantum consistency.
    pub fn into_matrix(self) -> Result<TransferMatrix> {
        let tags = self
            .signature
            .iter()
            .map(|t| Ladder::parse(t))
            .collect::<Result<Vec<_>>>()?;
        let signature = LadderSignature::new(tags)?;
        if signature.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: signature.len(),
            });
        }
        let rows = self
            .entries
            .into_iter()
            .map(|row| row.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .collect();
        TransferMatrix::from_rows(rows, signature, self.label.unwrap_or_else(|| "custom".into()))
    }
}

/// Reads a matrix file without running the consistency checks.
pub fn read_matrix_file(path: &Path) -> Result<TransferMatrix> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: MatrixFile = serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    file.into_matrix()
}

pub fn write_matrix_file(path: &Path, m: &TransferMatrix) -> Result<()> {
    let text = serde_json::to_string_pretty(&MatrixFile::from_matrix(m))?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a user matrix, rejecting row-condition violations beyond the
/// default tolerance. Commutator failures between distinct rows are logged.
pub fn load_custom(path: &Path) -> Result<TransferMatrix> {
    load_custom_with_tolerance(path, DEFAULT_TOLERANCE)
}

pub fn load_custom_with_tolerance(path: &Path, tol: f64) -> Result<TransferMatrix> {
    let m = read_matrix_file(path)?;
    let report = validate_symplectic(&m, tol);
    if let Some(r) = report.failing_rows().next() {
        return Err(Error::RowCondition {
            row: r.row,
            residual: r.scaled,
            tol,
        });
    }
    for p in report.failing_pairs() {
        log::warn!(
            "{}: commutator of output modes {} and {} not preserved (residual {:.3e})",
            path.display(),
            p.j,
            p.l,
            p.scaled
        );
    }
    Ok(m)
}
