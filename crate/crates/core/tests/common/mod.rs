//! Reference evaluators written independently of the library internals.
#![allow(dead_code)]

use std::path::PathBuf;

use fopa_noise::{Ladder, LadderSignature, TransferMatrix};
use num_complex::Complex64;
use rand::Rng;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn rel(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / a.abs().max(b.abs())
    }
}

/// `max(rel, abs)` agreement as used throughout the oracle checks.
pub fn close(a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> bool {
    (a - b).abs() <= abs_tol || rel(a, b) <= rel_tol
}

pub fn entries(m: &TransferMatrix) -> Vec<Vec<C>> {
    m.rows().map(|r| r.to_vec()).collect()
}

pub fn is_creation(m: &TransferMatrix) -> Vec<bool> {
    m.signature().tags().iter().map(|t| *t == Ladder::Creation).collect()
}

/// Mean and variance of `N_j` from the displacement `beta_j` and the vacuum
/// second moments of the fluctuation operator.
///
/// Writing the output as `b = beta + d` with `d` linear in vacuum-state
/// operators: `<d^dag d> = n` collects inputs that enter `b` as creation
/// operators, `<d d^dag> = m` those entering as annihilation operators, and
/// `<d d> = 0`. Wick's theorem then gives `mean = |beta|^2 + n` and
/// `var = |beta|^2 (n + m) + n m`.
pub fn wick_moments(m: &TransferMatrix, alphas: &[C]) -> Vec<(f64, f64)> {
    let mu = entries(m);
    let cr = is_creation(m);
    let n = mu.len();
    (0..n)
        .map(|j| {
            // row j is b_j when mode j is an annihilation mode, else b_j^dag
            let conj_row = cr[j];
            let mut beta = c(0.0, 0.0);
            let (mut nv, mut mv) = (0.0, 0.0);
            for k in 0..n {
                let (coef, creation) = if conj_row { (mu[j][k].conj(), !cr[k]) } else { (mu[j][k], cr[k]) };
                let mean_k = if creation { alphas[k].conj() } else { alphas[k] };
                beta += coef * mean_k;
                if creation {
                    nv += coef.norm_sqr();
                } else {
                    mv += coef.norm_sqr();
                }
            }
            let b2 = beta.norm_sqr();
            (b2 + nv, b2 * (nv + mv) + nv * mv)
        })
        .collect()
}

fn pair_phase_term(ck: bool, cl: bool, mk: C, ml: C, ak: C, al: C) -> C {
    match (ck, cl) {
        (false, true) => mk * ml.conj() * ak * al + mk.conj() * ml * ak.conj() * al.conj(),
        (true, false) => mk.conj() * ml * ak * al + mk * ml.conj() * ak.conj() * al.conj(),
        (false, false) => mk * ml.conj() * ak * al.conj() + mk.conj() * ml * ak.conj() * al,
        (true, true) => mk * ml.conj() * ak.conj() * al + mk.conj() * ml * ak * al.conj(),
    }
}

/// Expanded mean/variance with the pair factor restricted to
/// `|mu_jk|^2 + |mu_jl|^2 + sum_{m>l} |mu_jm|^2`.
pub fn partial_pair_factor_moments(m: &TransferMatrix, alphas: &[C]) -> Vec<(f64, f64)> {
    expanded_moments(m, alphas, |row, k, l| {
        row.iter()
            .enumerate()
            .filter(|&(i, _)| i == k || i >= l)
            .map(|(_, z)| z.norm_sqr())
            .sum()
    })
}

/// Expanded mean/variance with the full row sum as pair factor.
pub fn full_row_factor_moments(m: &TransferMatrix, alphas: &[C]) -> Vec<(f64, f64)> {
    expanded_moments(m, alphas, |row, _, _| row.iter().map(|z| z.norm_sqr()).sum())
}

fn expanded_moments(m: &TransferMatrix, alphas: &[C], factor: impl Fn(&[C], usize, usize) -> f64) -> Vec<(f64, f64)> {
    let mu = entries(m);
    let cr = is_creation(m);
    let n = mu.len();
    (0..n)
        .map(|j| {
            let row = &mu[j];
            let w: Vec<f64> = row.iter().map(|z| z.norm_sqr()).collect();
            let a2: Vec<f64> = alphas.iter().map(|a| a.norm_sqr()).collect();
            let sigma = |x: usize, y: usize| if cr[x] != cr[y] { 1.0 } else { 0.0 };
            let mut mean = 0.0;
            let mut var = 0.0;
            for k in 0..n {
                mean += w[k] * (a2[k] + sigma(j, k));
                var += w[k] * w[k] * a2[k];
            }
            for k in 0..n {
                for l in k + 1..n {
                    let p = pair_phase_term(cr[k], cr[l], row[k], row[l], alphas[k], alphas[l]).re;
                    mean += p;
                    var += w[k] * w[l] * (a2[k] + a2[l] + sigma(k, l));
                    var += p * factor(row, k, l);
                }
            }
            (mean, var)
        })
        .collect()
}

pub fn random_signature<R: Rng>(rng: &mut R, n: usize) -> LadderSignature {
    let tags = (0..n)
        .map(|_| if rng.gen_bool(0.5) { Ladder::Annihilation } else { Ladder::Creation })
        .collect();
    LadderSignature::new(tags).unwrap()
}

/// Arbitrary complex matrix; no consistency condition.
pub fn random_matrix<R: Rng>(rng: &mut R, n: usize, scale: f64) -> TransferMatrix {
    let sig = random_signature(rng, n);
    let rows = (0..n)
        .map(|_| (0..n).map(|_| c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))).collect())
        .collect();
    TransferMatrix::from_rows(rows, sig, "random").unwrap()
}

/// Random matrix rescaled so every row satisfies the row condition.
pub fn random_row_normalized<R: Rng>(rng: &mut R, n: usize, scale: f64) -> TransferMatrix {
    let m = random_matrix(rng, n, scale);
    let cr = is_creation(&m);
    let mu = entries(&m);
    let factors: Vec<f64> = (0..n)
        .map(|j| {
            let same: f64 = (0..n).filter(|&k| cr[k] == cr[j]).map(|k| mu[j][k].norm_sqr()).sum();
            let other: f64 = (0..n).filter(|&k| cr[k] != cr[j]).map(|k| mu[j][k].norm_sqr()).sum();
            ((1.0 + other) / same).sqrt()
        })
        .collect();
    m.map_entries(|j, k, z| if cr[k - 1] == cr[j - 1] { z * factors[j - 1] } else { z })
}

/// Consistent three-mode example (signature a, c, a): squeezer on (1,2) then a beam
/// splitter on (1,3).
pub fn toy_three_mode() -> TransferMatrix {
    fopa_noise::models::read_matrix_file(&data("three_mode.json")).unwrap()
}
