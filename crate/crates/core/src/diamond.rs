//! λ-fold share products and recombination witnesses.
//!
//! The diamond product of λ share vectors keeps only the products a
//! single player can form locally: for each player with d_i rows it
//! holds all d_i^λ per-player cross products, ordered by player and
//! then lexicographically by the row tuple (j_1, …, j_λ). A scheme is
//! λ-multiplicative when some fixed vector z recombines these local
//! products into the product of the λ secrets for every choice of
//! sharings; z is a *witness*, and algebraically it is exactly a
//! solution of z · M_◇ = e_1 where M_◇ is the [`diamond_matrix`].
//! Strong λ-multiplicativity asks for such a witness on the scheme
//! constricted to the complement of every adversary set.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::gf::PrimeField;
use crate::linalg::{row_combination, Matrix};
use crate::msp::{Msp, MspError, PlayerSet, ShareBundle};

/// Largest entry count (rows × cols) a materialized diamond matrix may
/// have. Checks happen before allocation.
pub const SIZE_CAP: u128 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiamondError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("diamond matrix of {rows} x {cols} entries exceeds the size cap")]
    SizeCapExceeded { rows: u128, cols: u128 },
    #[error("too many players for subset enumeration: {0}")]
    TooManyPlayers(usize),
    #[error("set {0} is qualified, so it admits no blinding vector")]
    QualifiedSet(PlayerSet),
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
}

impl From<MspError> for DiamondError {
    fn from(err: MspError) -> Self {
        match err {
            MspError::TooManyPlayers(n) => DiamondError::TooManyPlayers(n),
            MspError::QualifiedSet(set) => DiamondError::QualifiedSet(set),
            MspError::DimensionMismatch { expected, got } => {
                DiamondError::DimensionMismatch { expected, got }
            }
            other => DiamondError::InvalidWitness(other.to_string()),
        }
    }
}

/// Addressing for diamond-product coordinates: positions run over
/// players in ascending order, and within player i over the d_i^λ row
/// tuples (j_1, …, j_λ) in lexicographic order (j_1 most significant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiamondIndex {
    lambda: usize,
    block_sizes: Vec<usize>,
    offsets: Vec<usize>,
    len: usize,
}

impl DiamondIndex {
    /// Builds the index for players with the given row counts.
    pub fn new(lambda: usize, block_sizes: Vec<usize>) -> Self {
        assert!(lambda >= 1, "fold count must be positive");
        assert!(!block_sizes.is_empty(), "need at least one player");
        let mut offsets = Vec::with_capacity(block_sizes.len());
        let mut total: u128 = 0;
        for &d in &block_sizes {
            assert!(d >= 1, "every player needs at least one row");
            offsets.push(usize::try_from(total).expect("diamond index too large"));
            total += (d as u128).pow(lambda as u32);
        }
        let len = usize::try_from(total).expect("diamond index too large");
        DiamondIndex {
            lambda,
            block_sizes,
            offsets,
            len,
        }
    }

    /// Index matching a scheme's player blocks.
    pub fn for_scheme(scheme: &Msp, lambda: usize) -> Self {
        DiamondIndex::new(lambda, scheme.block_sizes())
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn players(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    /// Position of player `player` (1-based) and 0-based row tuple.
    pub fn position(&self, player: usize, tuple: &[usize]) -> usize {
        assert_eq!(tuple.len(), self.lambda, "tuple arity mismatch");
        let d = self.block_sizes[player - 1];
        let mut value = 0usize;
        for &j in tuple {
            assert!(j < d, "row index {j} out of range for player {player}");
            value = value * d + j;
        }
        self.offsets[player - 1] + value
    }

    /// Inverse of [`position`](Self::position).
    pub fn entry(&self, pos: usize) -> (usize, Vec<usize>) {
        let player = self.player_of(pos);
        let d = self.block_sizes[player - 1];
        let mut value = pos - self.offsets[player - 1];
        let mut tuple = vec![0usize; self.lambda];
        for slot in tuple.iter_mut().rev() {
            *slot = value % d;
            value /= d;
        }
        (player, tuple)
    }

    /// Player owning the given position (1-based).
    pub fn player_of(&self, pos: usize) -> usize {
        assert!(pos < self.len, "position {pos} out of range");
        match self.offsets.binary_search(&pos) {
            Ok(i) => i + 1,
            Err(i) => i,
        }
    }

    /// Positions belonging to one player.
    pub fn player_range(&self, player: usize) -> Range<usize> {
        let start = self.offsets[player - 1];
        let end = if player == self.block_sizes.len() {
            self.len
        } else {
            self.offsets[player]
        };
        start..end
    }
}

fn block_sizes_of(labels: &[usize]) -> Vec<usize> {
    let players = *labels.iter().max().expect("nonempty labels");
    let mut sizes = vec![0usize; players];
    for &p in labels {
        sizes[p - 1] += 1;
    }
    sizes
}

fn rows_by_player(labels: &[usize]) -> Vec<Vec<usize>> {
    let players = *labels.iter().max().expect("nonempty labels");
    let mut rows = vec![Vec::new(); players];
    for (r, &p) in labels.iter().enumerate() {
        rows[p - 1].push(r);
    }
    rows
}

/// λ-fold diamond product of share-length vectors under a labeling:
/// the entry at (i, (j_1, …, j_λ)) is Π_k vectors[k][row j_k of player i].
pub fn diamond_vectors(
    field: PrimeField,
    labels: &[usize],
    vectors: &[&[u64]],
) -> Result<(DiamondIndex, Vec<u64>), DiamondError> {
    assert!(!vectors.is_empty(), "need at least one factor");
    for v in vectors {
        if v.len() != labels.len() {
            return Err(DiamondError::DimensionMismatch {
                expected: labels.len(),
                got: v.len(),
            });
        }
    }
    let lambda = vectors.len();
    let index = DiamondIndex::new(lambda, block_sizes_of(labels));
    let rows = rows_by_player(labels);
    let mut out = vec![0u64; index.len()];
    for (pi, player_rows) in rows.iter().enumerate() {
        let d = player_rows.len();
        let mut tuple = vec![0usize; lambda];
        loop {
            let mut prod = 1u64;
            for (k, &j) in tuple.iter().enumerate() {
                prod = field.mul_raw(prod, vectors[k][player_rows[j]]);
            }
            out[index.position(pi + 1, &tuple)] = prod;
            // advance the mixed-radix tuple; stop after wrapping
            let mut k = lambda;
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                tuple[k] += 1;
                if tuple[k] < d {
                    break;
                }
                tuple[k] = 0;
            }
            if tuple.iter().all(|&j| j == 0) {
                break;
            }
        }
    }
    Ok((index, out))
}

/// Materializes M_◇λ: rows indexed by [`DiamondIndex`], columns by
/// column tuples (c_1, …, c_λ) in lexicographic order (so the secret
/// column tuple (0, …, 0) comes first and the recombination target
/// stays e_1). Entry ((i, j⃗), c⃗) = Π_k M[row j_k of player i][c_k].
pub fn diamond_matrix(scheme: &Msp, lambda: usize) -> Result<(Matrix, DiamondIndex), DiamondError> {
    assert!(lambda >= 1, "fold count must be positive");
    let l = scheme.cols();
    let row_count: u128 = scheme
        .block_sizes()
        .iter()
        .map(|&d| (d as u128).pow(lambda as u32))
        .sum();
    let col_count = (l as u128).pow(lambda as u32);
    if row_count * col_count > SIZE_CAP {
        return Err(DiamondError::SizeCapExceeded {
            rows: row_count,
            cols: col_count,
        });
    }
    let index = DiamondIndex::for_scheme(scheme, lambda);
    let cols = col_count as usize;
    let field = scheme.field();
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(index.len());
    for pos in 0..index.len() {
        let (player, tuple) = index.entry(pos);
        let player_rows = scheme.rows_of_player(player);
        let factor_rows: Vec<&[u64]> = tuple
            .iter()
            .map(|&j| scheme.matrix().row(player_rows[j]))
            .collect();
        let mut row = vec![0u64; cols];
        for (c, slot) in row.iter_mut().enumerate() {
            let mut rem = c;
            let mut prod = 1u64;
            // decode c into (c_1, …, c_λ), most significant first
            for k in (0..lambda).rev() {
                let ck = rem % l;
                rem /= l;
                prod = field.mul_raw(prod, factor_rows[k][ck]);
                if prod == 0 {
                    break;
                }
            }
            *slot = prod;
        }
        rows.push(row);
    }
    Ok((Matrix::from_rows(field, &rows), index))
}

/// A recombination vector: coefficients over diamond positions that
/// collapse λ-fold local share products to the product of the secrets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecombinationVector {
    field: PrimeField,
    index: DiamondIndex,
    coeffs: Vec<u64>,
}

impl RecombinationVector {
    pub fn new(
        field: PrimeField,
        index: DiamondIndex,
        coeffs: Vec<u64>,
    ) -> Result<Self, DiamondError> {
        if coeffs.len() != index.len() {
            return Err(DiamondError::DimensionMismatch {
                expected: index.len(),
                got: coeffs.len(),
            });
        }
        let coeffs = coeffs.iter().map(|&c| c % field.modulus()).collect();
        Ok(RecombinationVector {
            field,
            index,
            coeffs,
        })
    }

    pub fn lambda(&self) -> usize {
        self.index.lambda()
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn index(&self) -> &DiamondIndex {
        &self.index
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Canonical text form: a header line followed by the coefficients
    /// in position order.
    pub fn serialize(&self) -> String {
        let mut out = format!("witness lambda={} len={}\n", self.lambda(), self.len());
        let body: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        out.push_str(&body.join(" "));
        out.push('\n');
        out
    }

    /// Whether this vector addresses the scheme's blocks and field.
    pub fn matches_scheme(&self, scheme: &Msp) -> bool {
        self.field == scheme.field() && self.index.block_sizes() == scheme.block_sizes()
    }

    /// Checks z · M_◇λ = e_1 column by column without materializing the
    /// diamond matrix. By multilinearity of sharing this is equivalent
    /// to correctness on every tuple of instances.
    pub fn satisfies_matrix_identity(&self, scheme: &Msp) -> bool {
        assert!(self.matches_scheme(scheme), "witness does not fit scheme");
        let field = self.field;
        let lambda = self.lambda();
        let l = scheme.cols();
        // nonzero support, with row tuples resolved to global rows
        let mut support: Vec<(u64, Vec<usize>)> = Vec::new();
        for (pos, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let (player, tuple) = self.index.entry(pos);
            let player_rows = scheme.rows_of_player(player);
            let global: Vec<usize> = tuple.iter().map(|&j| player_rows[j]).collect();
            support.push((c, global));
        }
        let col_total = (l as u128).pow(lambda as u32);
        let col_total = usize::try_from(col_total).expect("column space too large");
        let mut digits = vec![0usize; lambda];
        for col in 0..col_total {
            let mut rem = col;
            for k in (0..lambda).rev() {
                digits[k] = rem % l;
                rem /= l;
            }
            let mut acc = 0u64;
            for (c, global) in &support {
                let mut prod = *c;
                for (k, &row) in global.iter().enumerate() {
                    prod = field.mul_raw(prod, scheme.matrix().get(row, digits[k]));
                    if prod == 0 {
                        break;
                    }
                }
                acc = field.add_raw(acc, prod);
            }
            let expected = u64::from(col == 0);
            if acc != expected {
                return false;
            }
        }
        true
    }

    /// Spot-checks recombination on random sharings.
    pub fn satisfies_on_samples(&self, scheme: &Msp, trials: usize, rng: &mut ChaCha20Rng) -> bool {
        assert!(self.matches_scheme(scheme), "witness does not fit scheme");
        let q = self.field.modulus();
        let l = scheme.cols();
        for _ in 0..trials {
            let mut bundles = Vec::with_capacity(self.lambda());
            let mut product = 1u64;
            for _ in 0..self.lambda() {
                let coords: Vec<u64> = (0..l).map(|_| rng.gen_range(0..q)).collect();
                product = self.field.mul_raw(product, coords[0]);
                bundles.push(scheme.share_raw(&coords));
            }
            let refs: Vec<&ShareBundle> = bundles.iter().collect();
            if self.apply(&refs) != product {
                return false;
            }
        }
        true
    }

    /// Literal enumeration of every tuple of instances, when feasible:
    /// returns None if q^(lλ) exceeds the iteration budget.
    pub fn satisfies_exhaustive(&self, scheme: &Msp) -> Option<bool> {
        assert!(self.matches_scheme(scheme), "witness does not fit scheme");
        const BUDGET: u128 = 2_000_000;
        let q = self.field.modulus() as u128;
        let l = scheme.cols() as u32;
        let lambda = self.lambda() as u32;
        let mut total: u128 = 1;
        for _ in 0..lambda {
            let per_instance = q.checked_pow(l)?;
            total = total.checked_mul(per_instance)?;
            if total > BUDGET {
                return None;
            }
        }
        let q = self.field.modulus();
        let per_instance = (q as u128).pow(l) as u64;
        let mut counters = vec![0u64; lambda as usize];
        loop {
            let mut bundles = Vec::with_capacity(lambda as usize);
            let mut product = 1u64;
            for &code in &counters {
                let mut rem = code;
                let coords: Vec<u64> = (0..l)
                    .map(|_| {
                        let digit = rem % q;
                        rem /= q;
                        digit
                    })
                    .collect();
                product = self.field.mul_raw(product, coords[0]);
                bundles.push(scheme.share_raw(&coords));
            }
            let refs: Vec<&ShareBundle> = bundles.iter().collect();
            if self.apply(&refs) != product {
                return Some(false);
            }
            let mut k = counters.len();
            loop {
                if k == 0 {
                    return Some(true);
                }
                k -= 1;
                counters[k] += 1;
                if counters[k] < per_instance {
                    break;
                }
                counters[k] = 0;
            }
        }
    }

    /// Recombines λ share bundles into a single field value.
    pub fn apply(&self, bundles: &[&ShareBundle]) -> u64 {
        assert_eq!(bundles.len(), self.lambda(), "need one bundle per fold");
        let mut acc = 0u64;
        for player in 1..=self.index.players() {
            acc = self
                .field
                .add_raw(acc, self.player_contribution(player, bundles));
        }
        acc
    }

    /// One player's share of the recombination sum: what that player
    /// can compute locally from its own shares.
    pub fn player_contribution(&self, player: usize, bundles: &[&ShareBundle]) -> u64 {
        assert_eq!(bundles.len(), self.lambda(), "need one bundle per fold");
        let mut acc = 0u64;
        for pos in self.index.player_range(player) {
            let c = self.coeffs[pos];
            if c == 0 {
                continue;
            }
            let (_, tuple) = self.index.entry(pos);
            let mut prod = c;
            for (k, &j) in tuple.iter().enumerate() {
                prod = self.field.mul_raw(prod, bundles[k].player(player)[j]);
                if prod == 0 {
                    break;
                }
            }
            acc = self.field.add_raw(acc, prod);
        }
        acc
    }
}

fn verify_witness(scheme: &Msp, witness: &RecombinationVector) {
    assert!(
        witness.satisfies_matrix_identity(scheme),
        "computed witness fails the matrix identity"
    );
    let mut rng = ChaCha20Rng::seed_from_u64(0xD1A);
    assert!(
        witness.satisfies_on_samples(scheme, 32, &mut rng),
        "computed witness fails sampled recombination"
    );
}

/// Searches for a λ-fold recombination witness by solving
/// z · M_◇λ = e_1. Returns None when the scheme is not λ-multiplicative.
pub fn multiplicativity_witness(
    scheme: &Msp,
    lambda: usize,
) -> Result<Option<RecombinationVector>, DiamondError> {
    let (matrix, index) = diamond_matrix(scheme, lambda)?;
    let mut target = vec![0u64; matrix.cols()];
    target[0] = 1;
    match row_combination(&matrix, &target).expect("target length always matches") {
        None => Ok(None),
        Some(coeffs) => {
            let witness = RecombinationVector::new(scheme.field(), index, coeffs)?;
            verify_witness(scheme, &witness);
            Ok(Some(witness))
        }
    }
}

/// Outcome of a strong λ-multiplicativity check: one witness search per
/// maximal adversary set, on the scheme constricted to its complement.
#[derive(Debug, Clone)]
pub struct StrongMultiplicativity {
    lambda: usize,
    verdict: bool,
    per_set: Vec<(PlayerSet, Option<RecombinationVector>)>,
}

impl StrongMultiplicativity {
    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn holds(&self) -> bool {
        self.verdict
    }

    /// Per maximal adversary set, the witness found for the complement
    /// (over the constriction's own indexing), in ascending set order.
    pub fn per_set(&self) -> &[(PlayerSet, Option<RecombinationVector>)] {
        &self.per_set
    }

    pub fn failing_sets(&self) -> Vec<PlayerSet> {
        self.per_set
            .iter()
            .filter(|(_, w)| w.is_none())
            .map(|(s, _)| *s)
            .collect()
    }
}

/// Checks strong λ-multiplicativity. Only maximal adversary sets need
/// checking: a witness avoiding a superset also avoids the subset.
pub fn strong_multiplicativity_check(
    scheme: &Msp,
    lambda: usize,
) -> Result<StrongMultiplicativity, DiamondError> {
    let adversary = scheme.maximal_adversary_structure()?;
    let full = scheme.full_set();
    let mut per_set = Vec::with_capacity(adversary.len());
    for &a in adversary.sets() {
        let keep = full.intersect(a.complement(scheme.players()));
        if keep.is_empty() {
            per_set.push((a, None));
            continue;
        }
        let constriction = scheme.constrict(keep);
        let witness = multiplicativity_witness(&constriction.msp, lambda)?;
        per_set.push((a, witness));
    }
    let verdict = per_set.iter().all(|(_, w)| w.is_some());
    Ok(StrongMultiplicativity {
        lambda,
        verdict,
        per_set,
    })
}

/// Folds a (λ+1)-witness down to a strong-λ witness for the complement
/// of an unqualified set A: fixing the last factor to a sharing of 1
/// under A's blinding vector zeroes every A-row, leaving coefficients
/// z'_(i,j⃗) = Σ_m z_(i,(j⃗,m)) · w_(i,m) supported on P − A.
pub fn strong_witness_from_higher(
    scheme: &Msp,
    witness: &RecombinationVector,
    adversary: PlayerSet,
) -> Result<RecombinationVector, DiamondError> {
    let hi = witness.lambda();
    if hi < 3 {
        return Err(DiamondError::InvalidWitness(format!(
            "fold-down needs a witness of fold at least 3, got {hi}"
        )));
    }
    if !witness.matches_scheme(scheme) {
        return Err(DiamondError::InvalidWitness(
            "witness does not address this scheme's blocks".into(),
        ));
    }
    if !witness.satisfies_matrix_identity(scheme) {
        return Err(DiamondError::InvalidWitness(
            "witness fails the recombination identity".into(),
        ));
    }
    let blinding = scheme.blinding_vector(adversary)?;
    let mut coords = Vec::with_capacity(scheme.cols());
    coords.push(1);
    coords.extend_from_slice(&blinding);
    let fixed = scheme.share_raw(&coords);

    let keep = scheme
        .full_set()
        .intersect(adversary.complement(scheme.players()));
    assert!(
        !keep.is_empty(),
        "a valid witness makes the full set qualified, so A cannot be everyone"
    );
    let constriction = scheme.constrict(keep);
    let sub = &constriction.msp;
    let field = scheme.field();
    let lo = hi - 1;
    let sub_index = DiamondIndex::for_scheme(sub, lo);
    let mut coeffs = vec![0u64; sub_index.len()];
    let src_index = witness.index();
    for (ordinal, old_player) in keep.iter().enumerate() {
        let new_player = ordinal + 1;
        let d = scheme.block_sizes()[old_player - 1];
        for pos in sub_index.player_range(new_player) {
            let (_, tuple) = sub_index.entry(pos);
            let mut sum = 0u64;
            let mut big = Vec::with_capacity(hi);
            big.extend_from_slice(&tuple);
            big.push(0);
            for m in 0..d {
                big[lo] = m;
                let z = witness.coefficients()[src_index.position(old_player, &big)];
                let w = fixed.player(old_player)[m];
                sum = field.add_raw(sum, field.mul_raw(z, w));
            }
            coeffs[pos] = sum;
        }
    }
    let folded = RecombinationVector::new(field, sub_index, coeffs)?;
    verify_witness(sub, &folded);
    Ok(folded)
}
