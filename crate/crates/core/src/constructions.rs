//! Concrete scheme families.
//!
//! * [`shamir_msp`] — Vandermonde threshold schemes: player i's row is
//!   (1, x_i, …, x_i^t), one row per player, so any t+1 players
//!   interpolate the secret (the polynomial's value at 0) and any t
//!   players see a uniform mask.
//! * [`reed_muller_lsss`] — binary schemes from evaluations of
//!   multilinear polynomials of bounded degree at all nonzero points of
//!   F_2^m; λ-multiplicative whenever m > λr, with the all-ones vector
//!   as a witness.
//! * [`fixture`] — two hand-pinned six-player schemes over F_2 that
//!   exercise the interesting boundary: the same access structure
//!   realized once without strong multiplicativity and once with it
//!   (but without 3-multiplicativity).

use thiserror::Error;

use crate::gf::PrimeField;
use crate::linalg::Matrix;
use crate::msp::Msp;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("field GF({q}) is too small: need q > {min}")]
    FieldTooSmall { q: u64, min: u64 },
    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),
}

/// Threshold scheme: degree t, n players, evaluation points defaulting
/// to 1..n. Any t+1 shares determine the secret; any t reveal nothing.
pub fn shamir_msp(
    t: usize,
    n: usize,
    q: u64,
    points: Option<&[u64]>,
) -> Result<Msp, ConstructionError> {
    let field = PrimeField::new(q)
        .map_err(|_| ConstructionError::DegenerateParameters(format!("{q} is not a usable prime modulus")))?;
    if n == 0 {
        return Err(ConstructionError::DegenerateParameters("no players".into()));
    }
    if t >= n {
        return Err(ConstructionError::DegenerateParameters(format!(
            "degree {t} needs more than {n} players to reconstruct"
        )));
    }
    if q <= n as u64 {
        return Err(ConstructionError::FieldTooSmall { q, min: n as u64 });
    }
    let xs: Vec<u64> = match points {
        None => (1..=n as u64).collect(),
        Some(given) => {
            if given.len() != n {
                return Err(ConstructionError::DegenerateParameters(format!(
                    "expected {n} evaluation points, got {}",
                    given.len()
                )));
            }
            let mut seen = std::collections::HashSet::new();
            for &x in given {
                if x == 0 || x >= q {
                    return Err(ConstructionError::DegenerateParameters(format!(
                        "evaluation point {x} outside 1..{q}"
                    )));
                }
                if !seen.insert(x) {
                    return Err(ConstructionError::DegenerateParameters(format!(
                        "duplicate evaluation point {x}"
                    )));
                }
            }
            given.to_vec()
        }
    };
    let rows: Vec<Vec<u64>> = xs
        .iter()
        .map(|&x| (0..=t as u64).map(|e| field.pow_raw(x, e)).collect())
        .collect();
    let labels: Vec<usize> = (1..=n).collect();
    Ok(Msp::new(Matrix::from_rows(field, &rows), labels).expect("valid by construction"))
}

/// Monomials x_S = Π_{j∈S} x_j for |S| ≤ r over m variables: constant
/// first, then graded by degree, lexicographic within a degree.
fn monomials(r: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for size in 1..=r {
        let mut combo: Vec<usize> = (1..=size).collect();
        loop {
            out.push(combo.clone());
            // next lexicographic size-combination of 1..=m
            let mut i = size;
            while i > 0 && combo[i - 1] == m - (size - i) {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            combo[i - 1] += 1;
            for j in i..size {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    out
}

/// Binary scheme on n = 2^m - 1 players: player i's single row holds
/// the evaluations of all degree-≤r monomials at the point whose binary
/// expansion is i (bit 1 = x_1). The secret sits at the constant
/// monomial, i.e. the polynomial's value at 0, so the target is e1.
pub fn reed_muller_lsss(r: usize, m: usize) -> Result<Msp, ConstructionError> {
    if m == 0 || r >= m {
        return Err(ConstructionError::DegenerateParameters(format!(
            "need 0 <= r < m, got r={r}, m={m}"
        )));
    }
    if m > 12 {
        return Err(ConstructionError::DegenerateParameters(format!(
            "m={m} exceeds the size cap of 12"
        )));
    }
    let field = PrimeField::new(2).unwrap();
    let mons = monomials(r, m);
    let n = (1usize << m) - 1;
    let rows: Vec<Vec<u64>> = (1..=n)
        .map(|i| {
            mons.iter()
                .map(|s| {
                    let hit = s.iter().all(|&j| (i >> (j - 1)) & 1 == 1);
                    hit as u64
                })
                .collect()
        })
        .collect();
    let labels: Vec<usize> = (1..=n).collect();
    Ok(Msp::new(Matrix::from_rows(field, &rows), labels).expect("valid by construction"))
}

/// The two pinned six-player schemes over F_2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    /// 14×5; realizes the nine-pair access structure below but fails
    /// strong 2-multiplicativity on exactly {(1,3),(1,4)}.
    M,
    /// 23×9; same access structure, strongly 2-multiplicative, not
    /// 3-multiplicative.
    MPrime,
}

const FIXTURE_M_ROWS: [[u64; 5]; 14] = [
    [1, 0, 1, 0, 0],
    [0, 0, 0, 1, 0],
    [0, 0, 0, 0, 1],
    [0, 0, 1, 0, 0],
    [0, 0, 0, 1, 0],
    [0, 0, 0, 0, 1],
    [1, 1, 0, 0, 0],
    [0, 0, 0, 0, 1],
    [0, 1, 0, 0, 0],
    [0, 0, 0, 1, 0],
    [1, 1, 1, 0, 0],
    [1, 0, 0, 1, 0],
    [0, 1, 1, 0, 0],
    [1, 0, 0, 0, 1],
];

const FIXTURE_M_LABELS: [usize; 14] = [1, 1, 1, 2, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6];

const FIXTURE_M_PRIME_ROWS: [[u64; 9]; 23] = [
    [1, 0, 1, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 1, 1, 1],
    [0, 0, 0, 0, 0, 1, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 1],
    [1, 1, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 1, 1, 1],
    [0, 0, 0, 0, 0, 1, 0, 0, 0],
    [1, 1, 1, 0, 0, 0, 0, 0, 0],
    [1, 0, 0, 1, 0, 0, 0, 0, 0],
    [1, 0, 0, 0, 0, 0, 1, 0, 1],
    [0, 0, 0, 0, 0, 0, 1, 0, 0],
    [0, 1, 1, 0, 0, 0, 0, 0, 0],
    [1, 0, 0, 0, 1, 0, 0, 0, 0],
    [1, 0, 0, 0, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 1],
];

const FIXTURE_M_PRIME_LABELS: [usize; 23] = [
    1, 1, 1, 2, 2, 2, 2, 2, 2, 3, 3, 4, 4, 4, 4, 5, 5, 5, 5, 6, 6, 6, 6,
];

/// Returns the pinned scheme. Infallible: the data is constant.
pub fn fixture(which: Fixture) -> Msp {
    let field = PrimeField::new(2).unwrap();
    let (rows, labels): (Vec<Vec<u64>>, Vec<usize>) = match which {
        Fixture::M => (
            FIXTURE_M_ROWS.iter().map(|r| r.to_vec()).collect(),
            FIXTURE_M_LABELS.to_vec(),
        ),
        Fixture::MPrime => (
            FIXTURE_M_PRIME_ROWS.iter().map(|r| r.to_vec()).collect(),
            FIXTURE_M_PRIME_LABELS.to_vec(),
        ),
    };
    Msp::new(Matrix::from_rows(field, &rows), labels).expect("pinned data is valid")
}
