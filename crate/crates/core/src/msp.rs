//! Monotone span programs as linear secret sharing schemes.
//!
//! A scheme is a d×l matrix M over GF(q) together with a surjective
//! labeling of rows by players 1..n and the implicit target row
//! e1 = (1, 0, …, 0). A share of a secret s under randomness ρ is
//! M·(s,ρ)^τ, handed out row-wise by label. A player set A is qualified
//! exactly when e1 lies in the row span of M_A (the rows labeled in A);
//! the same coefficients then reconstruct the secret from A's shares.
//! Unqualified sets admit a blinding vector ρ with M_A·(1,ρ)^τ = 0,
//! which is the linear-algebra face of privacy and the raw material for
//! vanishing diamond products.
//!
//! Row order within a player's block is the matrix row order and is
//! canonical: diamond entry layouts and witness indexing depend on it.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use thiserror::Error;

use crate::gf::{FieldElement, PrimeField};
use crate::linalg::{self, Matrix};

/// Hard cap for exhaustive access-structure enumeration.
pub const MAX_ENUMERATION_PLAYERS: usize = 24;

/// Widest player index addressable by a `PlayerSet` (u32 bitmask).
/// Schemes may have more players (large code-based families do); only
/// the subset-based operations are limited to this width.
pub const MAX_PLAYERS: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MspError {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("field mismatch: scheme over GF({scheme}), operand over GF({operand})")]
    FieldMismatch { scheme: u64, operand: u64 },
    #[error("player set {0} is not qualified")]
    UnqualifiedSet(PlayerSet),
    #[error("player set {0} is qualified; no blinding vector exists")]
    QualifiedSet(PlayerSet),
    #[error("{0} players exceed the exhaustive enumeration cap of {MAX_ENUMERATION_PLAYERS}")]
    TooManyPlayers(usize),
    #[error("invalid labels: {0}")]
    InvalidLabels(String),
}

/// A set of players out of 1..n, stored as a bitmask (player p is bit p-1).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlayerSet(u32);

impl fmt::Debug for PlayerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl PlayerSet {
    pub const EMPTY: PlayerSet = PlayerSet(0);

    pub fn full(n: usize) -> PlayerSet {
        assert!(n <= MAX_PLAYERS);
        if n == 32 {
            PlayerSet(u32::MAX)
        } else {
            PlayerSet((1u32 << n) - 1)
        }
    }

    pub fn singleton(player: usize) -> PlayerSet {
        PlayerSet::EMPTY.with(player)
    }

    pub fn from_players(players: &[usize]) -> PlayerSet {
        players.iter().fold(PlayerSet::EMPTY, |s, &p| s.with(p))
    }

    pub fn from_bits(bits: u32) -> PlayerSet {
        PlayerSet(bits)
    }

    pub fn bits(&self) -> u32 {
        self.0
    }

    pub fn with(&self, player: usize) -> PlayerSet {
        assert!((1..=MAX_PLAYERS).contains(&player), "player out of range");
        PlayerSet(self.0 | 1u32 << (player - 1))
    }

    pub fn without(&self, player: usize) -> PlayerSet {
        assert!((1..=MAX_PLAYERS).contains(&player), "player out of range");
        PlayerSet(self.0 & !(1u32 << (player - 1)))
    }

    pub fn contains(&self, player: usize) -> bool {
        player >= 1 && player <= MAX_PLAYERS && self.0 & (1u32 << (player - 1)) != 0
    }

    pub fn union(&self, other: PlayerSet) -> PlayerSet {
        PlayerSet(self.0 | other.0)
    }

    pub fn intersect(&self, other: PlayerSet) -> PlayerSet {
        PlayerSet(self.0 & other.0)
    }

    pub fn is_subset_of(&self, other: PlayerSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn complement(&self, n: usize) -> PlayerSet {
        PlayerSet(!self.0 & PlayerSet::full(n).0)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    /// Players in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let bits = self.0;
        (1..=MAX_PLAYERS).filter(move |p| bits & (1u32 << (p - 1)) != 0)
    }
}

impl fmt::Display for PlayerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, p) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("bad player set: {0}")]
pub struct ParseSetError(pub String);

impl FromStr for PlayerSet {
    type Err = ParseSetError;

    /// Accepts "1,3,5" or "(1,3,5)"; "()" is the empty set.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut set = PlayerSet::EMPTY;
        for part in inner.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let p: usize = part
                .parse()
                .map_err(|_| ParseSetError(format!("not a player index: {part:?}")))?;
            if !(1..=MAX_PLAYERS).contains(&p) {
                return Err(ParseSetError(format!("player {p} out of range 1..{MAX_PLAYERS}")));
            }
            set = set.with(p);
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    MinimalAccess,
    MaximalAdversary,
}

/// An antichain of player subsets, sorted ascending by bitmask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetFamily {
    players: usize,
    kind: FamilyKind,
    sets: Vec<PlayerSet>,
}

impl SubsetFamily {
    pub fn new(players: usize, kind: FamilyKind, mut sets: Vec<PlayerSet>) -> SubsetFamily {
        sets.sort();
        sets.dedup();
        for (i, a) in sets.iter().enumerate() {
            for b in sets[i + 1..].iter() {
                assert!(
                    !a.is_subset_of(*b) && !b.is_subset_of(*a),
                    "family must be an antichain"
                );
            }
        }
        SubsetFamily {
            players,
            kind,
            sets,
        }
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn sets(&self) -> &[PlayerSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn contains(&self, set: PlayerSet) -> bool {
        self.sets.contains(&set)
    }

    /// True when no λ members (repetition allowed) cover all players.
    /// Meaningful for maximal-adversary families; checking the maximal
    /// sets alone is sound because unions only grow under supersets.
    pub fn is_q_lambda(&self, lambda: usize) -> bool {
        assert!(lambda >= 2, "Q^lambda is defined for lambda >= 2");
        let full = PlayerSet::full(self.players);
        fn covers(sets: &[PlayerSet], full: PlayerSet, start: usize, left: usize, acc: PlayerSet) -> bool {
            if acc == full {
                return true;
            }
            if left == 0 {
                return false;
            }
            for i in start..sets.len() {
                if covers(sets, full, i, left - 1, acc.union(sets[i])) {
                    return true;
                }
            }
            false
        }
        !covers(&self.sets, full, 0, lambda, PlayerSet::EMPTY)
    }
}

/// One dealt secret: the vector M·(s,ρ)^τ, both in matrix row order and
/// partitioned per player. Entries are raw reduced residues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareBundle {
    field: PrimeField,
    labels: Vec<usize>,
    by_row: Vec<u64>,
    per_player: Vec<Vec<u64>>,
}

impl ShareBundle {
    fn new(field: PrimeField, labels: Vec<usize>, by_row: Vec<u64>, players: usize) -> ShareBundle {
        let mut per_player = vec![Vec::new(); players];
        for (row, &lab) in labels.iter().enumerate() {
            per_player[lab - 1].push(by_row[row]);
        }
        ShareBundle {
            field,
            labels,
            by_row,
            per_player,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn players(&self) -> usize {
        self.per_player.len()
    }

    /// Total entry count d.
    pub fn total(&self) -> usize {
        self.by_row.len()
    }

    /// Player p's d_p entries, in row order.
    pub fn player(&self, p: usize) -> &[u64] {
        &self.per_player[p - 1]
    }

    /// The full vector M·(s,ρ)^τ in matrix row order.
    pub fn by_row(&self) -> &[u64] {
        &self.by_row
    }

    /// The entries held by the given set, in M_A row order (ascending
    /// global row index). This is the order `Msp::reconstruct` expects.
    pub fn restrict(&self, set: PlayerSet) -> Vec<u64> {
        self.by_row
            .iter()
            .zip(&self.labels)
            .filter(|(_, &lab)| set.contains(lab))
            .map(|(&v, _)| v)
            .collect()
    }
}

/// A monotone span program with target e1, acting as a secret sharing
/// scheme. Immutable after construction; the coefficient memo table is
/// interior-mutable and never affects results.
#[derive(Debug)]
pub struct Msp {
    matrix: Matrix,
    labels: Vec<usize>,
    players: usize,
    block_rows: Vec<Vec<usize>>,
    coeff_cache: Mutex<HashMap<u32, Option<Vec<u64>>>>,
}

impl PartialEq for Msp {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix && self.labels == other.labels
    }
}

impl Eq for Msp {}

impl Clone for Msp {
    fn clone(&self) -> Self {
        Msp {
            matrix: self.matrix.clone(),
            labels: self.labels.clone(),
            players: self.players,
            block_rows: self.block_rows.clone(),
            coeff_cache: Mutex::new(HashMap::new()),
        }
    }
}

impl Msp {
    /// Validates the labeling: d ≥ 1 rows, each label in 1..=n for
    /// n = max(labels) ≤ 32, every player owning at least one row.
    pub fn new(matrix: Matrix, labels: Vec<usize>) -> Result<Msp, MspError> {
        if labels.len() != matrix.rows() {
            return Err(MspError::DimensionMismatch {
                expected: matrix.rows(),
                got: labels.len(),
            });
        }
        if labels.is_empty() {
            return Err(MspError::InvalidLabels("a scheme needs at least one row".into()));
        }
        if matrix.cols() == 0 {
            return Err(MspError::InvalidLabels("a scheme needs at least one column".into()));
        }
        if labels.iter().any(|&p| p == 0) {
            return Err(MspError::InvalidLabels("player indices are 1-based".into()));
        }
        let players = *labels.iter().max().unwrap();
        let mut block_rows = vec![Vec::new(); players];
        for (row, &p) in labels.iter().enumerate() {
            block_rows[p - 1].push(row);
        }
        if let Some(p) = block_rows.iter().position(|b| b.is_empty()) {
            return Err(MspError::InvalidLabels(format!(
                "labeling is not surjective: player {} owns no row",
                p + 1
            )));
        }
        Ok(Msp {
            matrix,
            labels,
            players,
            block_rows,
            coeff_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn field(&self) -> PrimeField {
        self.matrix.field()
    }

    pub fn full_set(&self) -> PlayerSet {
        PlayerSet::full(self.players)
    }

    /// d_p for each player p (index p-1).
    pub fn block_sizes(&self) -> Vec<usize> {
        self.block_rows.iter().map(|b| b.len()).collect()
    }

    /// Global row indices owned by player p, ascending.
    pub fn rows_of_player(&self, p: usize) -> &[usize] {
        &self.block_rows[p - 1]
    }

    /// Global row indices owned by the set, ascending. This is the row
    /// order of M_A everywhere in this crate.
    pub fn rows_for_set(&self, set: PlayerSet) -> Vec<usize> {
        (0..self.rows()).filter(|&r| set.contains(self.labels[r])).collect()
    }

    /// The submatrix M_A.
    pub fn submatrix(&self, set: PlayerSet) -> Matrix {
        self.matrix.select_rows(&self.rows_for_set(set))
    }

    /// The target row e1 of length l.
    pub fn target(&self) -> Vec<u64> {
        let mut t = vec![0u64; self.cols()];
        t[0] = 1;
        t
    }

    /// Shares a secret under explicit randomness of length l-1.
    pub fn share(&self, secret: &FieldElement, randomness: &[FieldElement]) -> Result<ShareBundle, MspError> {
        let q = self.field().modulus();
        if secret.modulus() != q {
            return Err(MspError::FieldMismatch {
                scheme: q,
                operand: secret.modulus(),
            });
        }
        if let Some(r) = randomness.iter().find(|r| r.modulus() != q) {
            return Err(MspError::FieldMismatch {
                scheme: q,
                operand: r.modulus(),
            });
        }
        if randomness.len() != self.cols() - 1 {
            return Err(MspError::DimensionMismatch {
                expected: self.cols() - 1,
                got: randomness.len(),
            });
        }
        let mut u = Vec::with_capacity(self.cols());
        u.push(secret.value());
        u.extend(randomness.iter().map(|r| r.value()));
        Ok(self.share_raw(&u))
    }

    /// Shares from a full coefficient vector (s, ρ) of raw residues.
    pub fn share_raw(&self, u: &[u64]) -> ShareBundle {
        assert_eq!(u.len(), self.cols());
        let by_row = self.matrix.mul_vec(u);
        ShareBundle::new(self.field(), self.labels.clone(), by_row, self.players)
    }

    /// Wraps already-computed share values (in matrix row order) as a
    /// bundle of this scheme — e.g. the sum of reshared contributions.
    pub fn bundle_from_rows(&self, by_row: Vec<u64>) -> ShareBundle {
        assert_eq!(by_row.len(), self.rows());
        let q = self.field().modulus();
        let by_row = by_row.into_iter().map(|v| v % q).collect();
        ShareBundle::new(self.field(), self.labels.clone(), by_row, self.players)
    }

    /// True iff e1 lies in the row span of M_A.
    pub fn is_qualified(&self, set: PlayerSet) -> bool {
        linalg::in_row_span(&self.submatrix(set), &self.target())
    }

    /// Coefficients z with z·M_A = e1, in M_A row order; None when A is
    /// unqualified. Memoized per set: the simulator reopens many values
    /// against the same sets.
    pub fn reconstruction_coefficients(&self, set: PlayerSet) -> Option<Vec<u64>> {
        if let Some(hit) = self.coeff_cache.lock().unwrap().get(&set.bits()) {
            return hit.clone();
        }
        let coeffs = linalg::row_combination(&self.submatrix(set), &self.target())
            .expect("target length always matches");
        self.coeff_cache.lock().unwrap().insert(set.bits(), coeffs.clone());
        coeffs
    }

    /// Recovers the secret from the set's shares (in M_A row order, as
    /// produced by `ShareBundle::restrict`).
    pub fn reconstruct(&self, set: PlayerSet, shares: &[u64]) -> Result<FieldElement, MspError> {
        let coeffs = self
            .reconstruction_coefficients(set)
            .ok_or(MspError::UnqualifiedSet(set))?;
        if shares.len() != coeffs.len() {
            return Err(MspError::DimensionMismatch {
                expected: coeffs.len(),
                got: shares.len(),
            });
        }
        let f = self.field();
        let mut acc = 0u64;
        for (z, &s) in coeffs.iter().zip(shares) {
            acc = f.add_raw(acc, f.mul_raw(*z, s % f.modulus()));
        }
        Ok(f.element(acc))
    }

    fn enumerate_qualified(&self) -> Result<Vec<bool>, MspError> {
        if self.players > MAX_ENUMERATION_PLAYERS {
            return Err(MspError::TooManyPlayers(self.players));
        }
        let total = 1usize << self.players;
        Ok((0..total)
            .map(|mask| self.is_qualified(PlayerSet::from_bits(mask as u32)))
            .collect())
    }

    /// The inclusion-minimal qualified sets, by exhaustive enumeration.
    pub fn minimal_access_structure(&self) -> Result<SubsetFamily, MspError> {
        let qualified = self.enumerate_qualified()?;
        let mut sets = Vec::new();
        for mask in 1..qualified.len() {
            if !qualified[mask] {
                continue;
            }
            let minimal = (0..self.players)
                .all(|b| mask & (1 << b) == 0 || !qualified[mask & !(1 << b)]);
            if minimal {
                sets.push(PlayerSet::from_bits(mask as u32));
            }
        }
        Ok(SubsetFamily::new(self.players, FamilyKind::MinimalAccess, sets))
    }

    /// The inclusion-maximal unqualified sets (complete situation: the
    /// adversary structure is everything outside the access structure).
    pub fn maximal_adversary_structure(&self) -> Result<SubsetFamily, MspError> {
        let qualified = self.enumerate_qualified()?;
        let mut sets = Vec::new();
        for mask in 0..qualified.len() {
            if qualified[mask] {
                continue;
            }
            let maximal = (0..self.players)
                .all(|b| mask & (1 << b) != 0 || qualified[mask | (1 << b)]);
            if maximal {
                sets.push(PlayerSet::from_bits(mask as u32));
            }
        }
        Ok(SubsetFamily::new(
            self.players,
            FamilyKind::MaximalAdversary,
            sets,
        ))
    }

    /// A deterministic ρ with M_A·(1,ρ)^τ = 0. Exists iff A is
    /// unqualified; the qualified case is reported as an error.
    pub fn blinding_vector(&self, set: PlayerSet) -> Result<Vec<u64>, MspError> {
        let m_a = self.submatrix(set);
        if self.cols() == 1 {
            // No randomness columns: blinding demands M_A's column be zero.
            if m_a.column(0).iter().all(|&v| v == 0) {
                return Ok(Vec::new());
            }
            return Err(MspError::QualifiedSet(set));
        }
        let rest = m_a.drop_column(0);
        let f = self.field();
        let rhs: Vec<u64> = m_a.column(0).iter().map(|&v| f.neg_raw(v)).collect();
        match linalg::solve(&rest, &rhs).expect("rhs length matches rows") {
            Some(rho) => {
                debug_assert!({
                    let mut u = vec![1u64];
                    u.extend_from_slice(&rho);
                    m_a.mul_vec(&u).iter().all(|&v| v == 0)
                });
                Ok(rho)
            }
            None => Err(MspError::QualifiedSet(set)),
        }
    }

    /// The scheme restricted to the kept players, with players renumbered
    /// 1..m in ascending original order and rows kept in original order.
    pub fn constrict(&self, keep: PlayerSet) -> Constriction {
        assert!(!keep.is_empty(), "constriction to the empty set is degenerate");
        assert!(keep.is_subset_of(self.full_set()), "kept players out of range");
        let kept_players: Vec<usize> = keep.iter().collect();
        let mut renumber = vec![0usize; self.players + 1];
        for (new0, &old) in kept_players.iter().enumerate() {
            renumber[old] = new0 + 1;
        }
        let row_map = self.rows_for_set(keep);
        let labels: Vec<usize> = row_map.iter().map(|&r| renumber[self.labels[r]]).collect();
        let matrix = self.matrix.select_rows(&row_map);
        let msp = Msp::new(matrix, labels).expect("constriction preserves scheme invariants");
        Constriction {
            msp,
            kept: keep,
            player_map: kept_players,
            row_map,
        }
    }
}

/// A scheme restricted to a player subset, with the renumbering maps
/// back to the original scheme.
#[derive(Debug)]
pub struct Constriction {
    pub msp: Msp,
    pub kept: PlayerSet,
    /// New player p (at index p-1) is this original player.
    pub player_map: Vec<usize>,
    /// New row r is this original row.
    pub row_map: Vec<usize>,
}
