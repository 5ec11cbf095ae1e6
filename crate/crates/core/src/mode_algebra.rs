//! Mode transfer matrices, ladder signatures and the selector functions
//! derived from them.
//!
//! Row `j` of a transfer matrix gives the output operator of mode `j`
//! (annihilation or creation, per the signature) as a linear combination of
//! the input operators of every mode, with the same operator type pattern on
//! the input side. Public indices are 1-based.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{CompensatedComplexSum, CompensatedSum};

/// Default tolerance for [`validate_symplectic`] on user-supplied matrices.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Operator type occupying one slot of the mode vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ladder {
    #[serde(rename = "a")]
    Annihilation,
    #[serde(rename = "c")]
    Creation,
}

impl Ladder {
    /// Commutator sign `[c, c^dagger]` of an operator of this type.
    pub fn commutator_sign(self) -> f64 {
        match self {
            Ladder::Annihilation => 1.0,
            Ladder::Creation => -1.0,
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        match tag {
            "a" | "A" => Ok(Ladder::Annihilation),
            "c" | "C" => Ok(Ladder::Creation),
            other => Err(Error::InvalidTag(other.to_string())),
        }
    }
}

/// Kind of a mode pair `(k, l)`, `k < l`, selecting one of the four
/// phase-term families in the output moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    /// `k` annihilation, `l` creation.
    A,
    /// `k` creation, `l` annihilation.
    B,
    /// Both annihilation.
    C,
    /// Both creation.
    D,
}

impl PairKind {
    pub fn of(k: Ladder, l: Ladder) -> Self {
        use Ladder::*;
        match (k, l) {
            (Annihilation, Creation) => PairKind::A,
            (Creation, Annihilation) => PairKind::B,
            (Annihilation, Annihilation) => PairKind::C,
            (Creation, Creation) => PairKind::D,
        }
    }
}

/// Pattern of annihilation/creation slots in the mode vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Ladder>", into = "Vec<Ladder>")]
pub struct LadderSignature {
    tags: Vec<Ladder>,
}

impl TryFrom<Vec<Ladder>> for LadderSignature {
    type Error = Error;

    fn try_from(tags: Vec<Ladder>) -> Result<Self> {
        Self::new(tags)
    }
}

impl From<LadderSignature> for Vec<Ladder> {
    fn from(sig: LadderSignature) -> Self {
        sig.tags
    }
}

impl LadderSignature {
    pub fn new(tags: Vec<Ladder>) -> Result<Self> {
        if tags.is_empty() {
            return Err(Error::EmptySignature);
        }
        Ok(Self { tags })
    }

    /// Alternating signature starting with annihilation: `(a, c, a, c, ...)`.
    pub fn alternating(n: usize) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|i| if i % 2 == 0 { Ladder::Annihilation } else { Ladder::Creation })
                .collect(),
        )
    }

    /// Parses a compact string such as `"acac"`.
    pub fn parse(s: &str) -> Result<Self> {
        let tags = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| Ladder::parse(&c.to_string()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(tags)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tags(&self) -> &[Ladder] {
        &self.tags
    }

    /// Tag of 1-based mode `j`.
    pub fn tag(&self, j: usize) -> Result<Ladder> {
        Ok(self.tags[self.index(j)?])
    }

    /// Converts a 1-based mode label into a storage index.
    pub fn index(&self, j: usize) -> Result<usize> {
        if j == 0 || j > self.tags.len() {
            return Err(Error::ModeOutOfRange {
                index: j,
                n: self.tags.len(),
            });
        }
        Ok(j - 1)
    }

    pub(crate) fn same_type0(&self, j: usize, k: usize) -> bool {
        self.tags[j] == self.tags[k]
    }

    pub(crate) fn sigma0(&self, j: usize, k: usize) -> f64 {
        if self.same_type0(j, k) {
            0.0
        } else {
            1.0
        }
    }

    pub(crate) fn kind0(&self, k: usize, l: usize) -> PairKind {
        PairKind::of(self.tags[k], self.tags[l])
    }
}

impl fmt::Display for LadderSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.tags {
            f.write_str(match t {
                Ladder::Annihilation => "a",
                Ladder::Creation => "c",
            })?;
        }
        Ok(())
    }
}

/// `s_jk`: +1 when modes `j` and `k` carry the same operator type, -1 otherwise.
pub fn selector_s(signature: &LadderSignature, j: usize, k: usize) -> Result<i8> {
    let (j, k) = (signature.index(j)?, signature.index(k)?);
    Ok(if signature.same_type0(j, k) { 1 } else { -1 })
}

/// `sigma_jk`: 0 when modes `j` and `k` carry the same operator type, 1 otherwise.
pub fn selector_sigma(signature: &LadderSignature, j: usize, k: usize) -> Result<u8> {
    let (j, k) = (signature.index(j)?, signature.index(k)?);
    Ok(signature.sigma0(j, k) as u8)
}

/// `(A_kl, B_kl, C_kl, D_kl)` for `k < l`; exactly one entry is 1.
pub fn selector_abcd(signature: &LadderSignature, k: usize, l: usize) -> Result<(u8, u8, u8, u8)> {
    let (k0, l0) = (signature.index(k)?, signature.index(l)?);
    if k0 >= l0 {
        return Err(Error::PairOrder { k, l });
    }
    Ok(match signature.kind0(k0, l0) {
        PairKind::A => (1, 0, 0, 0),
        PairKind::B => (0, 1, 0, 0),
        PairKind::C => (0, 0, 1, 0),
        PairKind::D => (0, 0, 0, 1),
    })
}

/// Linear input–output map between mode operators.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    n: usize,
    entries: Vec<Complex64>,
    signature: LadderSignature,
    label: String,
}

impl TransferMatrix {
    /// Builds a matrix from rows; every row must have `signature.len()` entries.
    pub fn from_rows(
        rows: Vec<Vec<Complex64>>,
        signature: LadderSignature,
        label: impl Into<String>,
    ) -> Result<Self> {
        let n = signature.len();
        if rows.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rows.len(),
            });
        }
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(Self {
            n,
            entries,
            signature,
            label: label.into(),
        })
    }

    pub fn identity(signature: LadderSignature) -> Self {
        let n = signature.len();
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            entries[j * n + j] = Complex64::new(1.0, 0.0);
        }
        Self {
            n,
            entries,
            signature,
            label: "identity".into(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn signature(&self) -> &LadderSignature {
        &self.signature
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `mu_jk` for 1-based `j`, `k`.
    pub fn entry(&self, j: usize, k: usize) -> Result<Complex64> {
        let (j, k) = (self.signature.index(j)?, self.signature.index(k)?);
        Ok(self.entries[j * self.n + k])
    }

    /// `theta_jk = arg(mu_jk)`.
    pub fn phase(&self, j: usize, k: usize) -> Result<f64> {
        Ok(self.entry(j, k)?.arg())
    }

    /// Row of 0-based output mode `j`.
    pub(crate) fn row(&self, j: usize) -> &[Complex64] {
        &self.entries[j * self.n..(j + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.entries.chunks(self.n)
    }

    pub(crate) fn check_mode(&self, j: usize) -> Result<usize> {
        self.signature.index(j)
    }

    /// Applies `f` to every entry, keeping signature and label.
    pub fn map_entries(&self, mut f: impl FnMut(usize, usize, Complex64) -> Complex64) -> Self {
        let n = self.n;
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, &z)| f(i / n + 1, i % n + 1, z))
            .collect();
        Self {
            entries,
            ..self.clone()
        }
    }
}

/// Coherent input amplitudes with explicit injection flags.
#[derive(Debug, Clone, PartialEq)]
pub struct InputState {
    alphas: Vec<Complex64>,
    injected: Vec<bool>,
}

impl InputState {
    pub fn new(alphas: Vec<Complex64>, injected: Vec<bool>) -> Result<Self> {
        if alphas.len() != injected.len() {
            return Err(Error::DimensionMismatch {
                expected: alphas.len(),
                found: injected.len(),
            });
        }
        if alphas.is_empty() {
            return Err(Error::InvalidInput("no modes".into()));
        }
        for (j, (a, &y)) in alphas.iter().zip(&injected).enumerate() {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::InvalidInput(format!("mode {} amplitude is not finite", j + 1)));
            }
            if !y && *a != Complex64::new(0.0, 0.0) {
                return Err(Error::InvalidInput(format!(
                    "mode {} is not injected but has amplitude {a}",
                    j + 1
                )));
            }
        }
        Ok(Self { alphas, injected })
    }

    /// Injection flags follow from which amplitudes are non-zero.
    pub fn from_alphas(alphas: Vec<Complex64>) -> Result<Self> {
        let injected = alphas.iter().map(|a| a.norm_sqr() > 0.0).collect();
        Self::new(alphas, injected)
    }

    pub fn vacuum(n: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n], vec![false; n])
    }

    /// Only the signal (mode 1) carries a coherent field.
    pub fn signal_only(n: usize, alpha1: Complex64) -> Result<Self> {
        let mut alphas = vec![Complex64::new(0.0, 0.0); n];
        let mut injected = vec![false; n];
        alphas[0] = alpha1;
        injected[0] = true;
        Self::new(alphas, injected)
    }

    /// Leading `p` modes injected with amplitude `|alpha|` and the given phases.
    pub fn leading(n: usize, p: usize, amplitude: f64, phases: &[f64]) -> Result<Self> {
        if p == 0 || p > n {
            return Err(Error::InvalidInput(format!("injected count {p} not in 1..={n}")));
        }
        if phases.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: phases.len(),
            });
        }
        let alphas = (0..n)
            .map(|k| {
                if k < p {
                    Complex64::from_polar(amplitude, phases[k])
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let injected = (0..n).map(|k| k < p).collect();
        Self::new(alphas, injected)
    }

    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[Complex64] {
        &self.alphas
    }

    pub fn injected(&self) -> &[bool] {
        &self.injected
    }

    /// Input mean photon number of 1-based mode `j`; equals its variance.
    pub fn mean(&self, j: usize) -> Result<f64> {
        if j == 0 || j > self.n() {
            return Err(Error::ModeOutOfRange { index: j, n: self.n() });
        }
        Ok(self.alphas[j - 1].norm_sqr())
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.n(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowResidual {
    /// 1-based row.
    pub row: usize,
    /// `|sum_k |mu_jk|^2 s_jk - 1|`.
    pub absolute: f64,
    /// Absolute residual divided by `max(1, sum_k |mu_jk|^2)`.
    pub scaled: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairResidual {
    /// 1-based rows, `j < l`.
    pub j: usize,
    pub l: usize,
    /// Modulus of the output commutator that must vanish.
    pub absolute: f64,
    /// Absolute residual divided by `max(1, sum_k |mu_jk| |mu_lk|)`.
    pub scaled: f64,
}

/// Residuals of the quantum-consistency conditions of a transfer matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub rows: Vec<RowResidual>,
    pub pairs: Vec<PairResidual>,
    pub tol: f64,
}

impl ValidationReport {
    pub fn rows_pass(&self) -> bool {
        self.rows.iter().all(|r| r.scaled <= self.tol)
    }

    pub fn pairs_pass(&self) -> bool {
        self.pairs.iter().all(|p| p.scaled <= self.tol)
    }

    pub fn passed(&self) -> bool {
        self.rows_pass() && self.pairs_pass()
    }

    pub fn failing_rows(&self) -> impl Iterator<Item = &RowResidual> {
        self.rows.iter().filter(move |r| r.scaled > self.tol)
    }

    pub fn failing_pairs(&self) -> impl Iterator<Item = &PairResidual> {
        self.pairs.iter().filter(move |p| p.scaled > self.tol)
    }

    pub fn max_row_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.scaled).fold(0.0, f64::max)
    }

    pub fn max_pair_residual(&self) -> f64 {
        self.pairs.iter().map(|p| p.scaled).fold(0.0, f64::max)
    }
}

/// Checks the signed row-norm condition and output commutator preservation.
///
/// Writing `o_j` for the operator produced by row `j` and `e_k = [c_k, c_k^dagger]`,
/// the output commutators reduce to `K_jl = sum_k e_k mu_jk conj(mu_lk)`.
/// Consistency requires `K = diag(e)`: the diagonal is the row condition,
/// the off-diagonal entries must vanish. Sums are accumulated with
/// error-free products, so residuals reflect the stored entries rather
/// than summation round-off.
pub fn validate_symplectic(m: &TransferMatrix, tol: f64) -> ValidationReport {
    let n = m.n();
    let sig = m.signature();
    let eps: Vec<f64> = sig.tags().iter().map(|t| t.commutator_sign()).collect();

    let rows = (0..n)
        .map(|j| {
            let mut acc = CompensatedSum::new();
            let mut weight = CompensatedSum::new();
            for (k, z) in m.row(j).iter().enumerate() {
                let s = if sig.same_type0(j, k) { 1.0 } else { -1.0 };
                acc.add_product(s * z.re, z.re);
                acc.add_product(s * z.im, z.im);
                weight.add(z.norm_sqr());
            }
            acc.add(-1.0);
            let absolute = acc.value().abs();
            RowResidual {
                row: j + 1,
                absolute,
                scaled: absolute / weight.value().max(1.0),
            }
        })
        .collect();

    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for j in 0..n {
        for l in j + 1..n {
            let mut acc = CompensatedComplexSum::new();
            let mut weight = CompensatedSum::new();
            for k in 0..n {
                let (a, b) = (m.row(j)[k], m.row(l)[k]);
                acc.add_product(a, b.conj(), eps[k]);
                weight.add(a.norm() * b.norm());
            }
            let absolute = acc.value().norm();
            pairs.push(PairResidual {
                j: j + 1,
                l: l + 1,
                absolute,
                scaled: absolute / weight.value().max(1.0),
            });
        }
    }

    ValidationReport { rows, pairs, tol }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(s: &str) -> LadderSignature {
        LadderSignature::parse(s).unwrap()
    }

    #[test]
    fn selector_s_examples() {
        assert_eq!(selector_s(&sig("ac"), 1, 1).unwrap(), 1);
        assert_eq!(selector_s(&sig("ac"), 1, 2).unwrap(), -1);
        assert_eq!(selector_s(&sig("acac"), 3, 1).unwrap(), 1);
    }

    #[test]
    fn selector_sigma_examples() {
        assert_eq!(selector_sigma(&sig("ac"), 1, 2).unwrap(), 1);
        assert_eq!(selector_sigma(&sig("ac"), 2, 2).unwrap(), 0);
        assert_eq!(selector_sigma(&sig("acac"), 2, 3).unwrap(), 1);
    }

    #[test]
    fn selector_abcd_examples() {
        assert_eq!(selector_abcd(&sig("ac"), 1, 2).unwrap(), (1, 0, 0, 0));
        assert_eq!(selector_abcd(&sig("aa"), 1, 2).unwrap(), (0, 0, 1, 0));
        assert_eq!(selector_abcd(&sig("cc"), 1, 2).unwrap(), (0, 0, 0, 1));
        assert_eq!(selector_abcd(&sig("ca"), 1, 2).unwrap(), (0, 1, 0, 0));
    }

    #[test]
    fn selector_errors_use_one_based_labels() {
        let s = sig("ac");
        match selector_s(&s, 3, 1) {
            Err(Error::ModeOutOfRange { index: 3, n: 2 }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(selector_sigma(&s, 0, 1).is_err());
        assert!(matches!(
            selector_abcd(&s, 2, 1),
            Err(Error::PairOrder { k: 2, l: 1 })
        ));
        assert!(selector_abcd(&s, 1, 1).is_err());
    }

    #[test]
    fn signature_parsing() {
        assert_eq!(sig("acac"), LadderSignature::alternating(4).unwrap());
        assert_eq!(sig("a,c,a").to_string(), "aca");
        assert!(LadderSignature::parse("").is_err());
        assert!(LadderSignature::parse("ax").is_err());
    }

    #[test]
    fn identity_is_consistent() {
        let m = TransferMatrix::identity(sig("acca"));
        let report = validate_symplectic(&m, 1e-15);
        assert!(report.passed());
        assert_eq!(report.max_row_residual(), 0.0);
    }

    #[test]
    fn generic_matrix_fails_validation() {
        let rows = vec![
            vec![Complex64::new(0.3, 0.1), Complex64::new(-0.7, 0.4)],
            vec![Complex64::new(1.2, -0.5), Complex64::new(0.2, 0.9)],
        ];
        let m = TransferMatrix::from_rows(rows, sig("ac"), "random").unwrap();
        let report = validate_symplectic(&m, DEFAULT_TOLERANCE);
        assert!(!report.passed());
        assert!(report.rows.iter().all(|r| r.absolute > 0.1));
        assert!(report.pairs[0].absolute > 0.1);
    }

    #[test]
    fn dimension_checks() {
        let rows = vec![vec![Complex64::new(1.0, 0.0)]; 2];
        assert!(matches!(
            TransferMatrix::from_rows(rows, sig("ac"), ""),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn input_state_requires_zero_amplitude_when_not_injected() {
        let alphas = vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)];
        assert!(InputState::new(alphas.clone(), vec![true, false]).is_err());
        assert!(InputState::new(alphas, vec![true, true]).is_ok());
        let s = InputState::signal_only(3, Complex64::new(0.0, 2.0)).unwrap();
        assert_eq!(s.mean(1).unwrap(), 4.0);
        assert_eq!(s.injected(), &[true, false, false]);
    }

    #[test]
    fn pair_kind_table() {
        use Ladder::*;
        assert_eq!(PairKind::of(Annihilation, Creation), PairKind::A);
        assert_eq!(PairKind::of(Creation, Annihilation), PairKind::B);
        assert_eq!(PairKind::of(Annihilation, Annihilation), PairKind::C);
        assert_eq!(PairKind::of(Creation, Creation), PairKind::D);
    }
}
