//! Lifting a strongly λ-multiplicative scheme to a (λ+1)-multiplicative
//! one of the same access structure.
//!
//! The lift appends, below the original d rows, one new row per
//! diamond position: a recombination vector v_0 for the secret column
//! and a basis v_1, …, v_k of the left kernel of M_◇λ spread over k
//! fresh randomness columns. Each new row belongs to the player owning
//! its diamond position. The new rows carry exactly the λ-fold products
//! of the old shares in disguised form, so pairing λ old rows with one
//! matching new row yields a sparse (λ+1)-fold witness, returned
//! alongside the scheme.

use thiserror::Error;

use crate::diamond::{
    diamond_matrix, strong_multiplicativity_check, DiamondError, DiamondIndex,
    RecombinationVector,
};
use crate::linalg::{kernel_basis, row_combination, Matrix};
use crate::msp::{Msp, PlayerSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("scheme is not strongly {lambda}-multiplicative (failing sets: {failing_sets:?})")]
    NotStronglyMultiplicative {
        lambda: usize,
        failing_sets: Vec<PlayerSet>,
    },
    #[error("too many players for subset enumeration: {0}")]
    TooManyPlayers(usize),
    #[error("diamond matrix of {rows} x {cols} entries exceeds the size cap")]
    SizeCapExceeded { rows: u128, cols: u128 },
}

impl From<DiamondError> for TransformError {
    fn from(err: DiamondError) -> Self {
        match err {
            DiamondError::TooManyPlayers(n) => TransformError::TooManyPlayers(n),
            DiamondError::SizeCapExceeded { rows, cols } => {
                TransformError::SizeCapExceeded { rows, cols }
            }
            other => panic!("unexpected diamond failure during lift: {other}"),
        }
    }
}

/// A lifted scheme together with its constructive (λ+1)-witness.
#[derive(Debug, Clone)]
pub struct Lift {
    scheme: Msp,
    witness: RecombinationVector,
}

impl Lift {
    pub fn scheme(&self) -> &Msp {
        &self.scheme
    }

    pub fn witness(&self) -> &RecombinationVector {
        &self.witness
    }

    pub fn into_parts(self) -> (Msp, RecombinationVector) {
        (self.scheme, self.witness)
    }
}

/// Lifts a strongly λ-multiplicative scheme to a (λ+1)-multiplicative
/// scheme computing the same access structure, with d + Σ d_i^λ rows.
pub fn lift_multiplicativity(scheme: &Msp, lambda: usize) -> Result<Lift, TransformError> {
    let strong = strong_multiplicativity_check(scheme, lambda)?;
    if !strong.holds() {
        return Err(TransformError::NotStronglyMultiplicative {
            lambda,
            failing_sets: strong.failing_sets(),
        });
    }
    let (dm, index) = diamond_matrix(scheme, lambda)?;
    let mut target = vec![0u64; dm.cols()];
    target[0] = 1;
    // strong multiplicativity covers the empty adversary set by
    // monotonicity, so a full-scheme recombination vector must exist
    let v0 = row_combination(&dm, &target)
        .expect("target length always matches")
        .expect("strongly multiplicative scheme recombines on the full player set");
    let kernel = kernel_basis(&dm.transpose());
    let k = kernel.len();

    let d = scheme.rows();
    let big_d = index.len();
    let l = scheme.cols();
    let field = scheme.field();
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(d + big_d);
    for r in 0..d {
        let mut row = scheme.matrix().row(r).to_vec();
        row.resize(l + k, 0);
        rows.push(row);
    }
    for pos in 0..big_d {
        let mut row = vec![0u64; l + k];
        row[0] = v0[pos];
        for (j, basis_vec) in kernel.iter().enumerate() {
            row[l + j] = basis_vec[pos];
        }
        rows.push(row);
    }
    let mut labels = scheme.labels().to_vec();
    labels.extend((0..big_d).map(|pos| index.player_of(pos)));
    let lifted = Msp::new(Matrix::from_rows(field, &rows), labels).expect("lifted layout is valid");
    assert_eq!(lifted.rows(), d + big_d);

    // sparse (λ+1)-witness: for each player pair every λ-tuple of its
    // original rows with the new row at that tuple's diamond position
    let lifted_index = DiamondIndex::for_scheme(&lifted, lambda + 1);
    let mut coeffs = vec![0u64; lifted_index.len()];
    for player in 1..=scheme.players() {
        let d_i = scheme.block_sizes()[player - 1];
        let mut tuple = vec![0usize; lambda];
        loop {
            let lexpos: usize = tuple.iter().fold(0, |acc, &j| acc * d_i + j);
            let mut full = Vec::with_capacity(lambda + 1);
            full.extend_from_slice(&tuple);
            full.push(d_i + lexpos);
            coeffs[lifted_index.position(player, &full)] = 1;
            let mut k = lambda;
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                tuple[k] += 1;
                if tuple[k] < d_i {
                    break;
                }
                tuple[k] = 0;
            }
            if tuple.iter().all(|&j| j == 0) {
                break;
            }
        }
    }
    let witness = RecombinationVector::new(field, lifted_index, coeffs)
        .expect("witness length matches its index");
    assert!(
        witness.satisfies_matrix_identity(&lifted),
        "constructed witness must recombine on the lifted scheme"
    );
    assert_eq!(
        lifted.minimal_access_structure().expect("small enough to enumerate"),
        scheme.minimal_access_structure().expect("small enough to enumerate"),
        "lift must preserve the access structure"
    );
    Ok(Lift {
        scheme: lifted,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{fixture, shamir_msp, Fixture};
    use crate::diamond::multiplicativity_witness;
    use crate::format::serialize_msp;
    use crate::gf::PrimeField;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn lifting_the_pinned_wide_scheme_gains_a_fold() {
        let base = fixture(Fixture::MPrime);
        assert!(multiplicativity_witness(&base, 3).unwrap().is_none());
        let lift = lift_multiplicativity(&base, 2).unwrap();
        let lifted = lift.scheme();
        assert_eq!(lifted.rows(), 120);
        assert_eq!(lifted.cols(), 33);
        assert_eq!(lifted.block_sizes(), vec![12, 42, 6, 20, 20, 20]);
        assert_eq!(lift.witness().lambda(), 3);
        assert!(lift.witness().satisfies_matrix_identity(lifted));
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        assert!(lift.witness().satisfies_on_samples(lifted, 16, &mut rng));
        assert_eq!(
            lifted.minimal_access_structure().unwrap(),
            base.minimal_access_structure().unwrap()
        );
    }

    #[test]
    fn lifted_witness_recombines_concrete_share_triples() {
        let lift = lift_multiplicativity(&fixture(Fixture::MPrime), 2).unwrap();
        let lifted = lift.scheme();
        let field = lifted.field();
        let l = lifted.cols();
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        use rand::Rng;
        for _ in 0..8 {
            let mut bundles = Vec::new();
            let mut product = 1u64;
            for _ in 0..3 {
                let coords: Vec<u64> = (0..l).map(|_| rng.gen_range(0..2)).collect();
                product = field.mul_raw(product, coords[0]);
                bundles.push(lifted.share_raw(&coords));
            }
            let refs: Vec<_> = bundles.iter().collect();
            assert_eq!(lift.witness().apply(&refs), product);
        }
    }

    #[test]
    fn lifting_a_threshold_scheme_doubles_the_rows() {
        let base = shamir_msp(1, 4, 11, None).unwrap();
        let lift = lift_multiplicativity(&base, 2).unwrap();
        let lifted = lift.scheme();
        assert_eq!(lifted.rows(), 8);
        assert_eq!(lifted.block_sizes(), vec![2, 2, 2, 2]);
        // left kernel of the 4x4 fold matrix (1, x, x, x^2) has rank 1
        assert_eq!(lifted.cols(), 3);
        assert!(lift.witness().satisfies_matrix_identity(lifted));
        assert_eq!(
            lifted.minimal_access_structure().unwrap(),
            base.minimal_access_structure().unwrap()
        );
    }

    #[test]
    fn lifting_a_trivial_scheme_keeps_it_trivial() {
        let field = PrimeField::new(5).unwrap();
        let base = Msp::new(Matrix::from_rows(field, &[vec![1]]), vec![1]).unwrap();
        let lift = lift_multiplicativity(&base, 2).unwrap();
        assert_eq!(lift.scheme().rows(), 2);
        assert_eq!(lift.scheme().cols(), 1);
        assert_eq!(lift.scheme().matrix().row(0), &[1]);
        assert_eq!(lift.scheme().matrix().row(1), &[1]);
        assert!(lift.witness().satisfies_matrix_identity(lift.scheme()));
    }

    #[test]
    fn non_strong_schemes_are_rejected_with_their_failing_sets() {
        let err = lift_multiplicativity(&fixture(Fixture::M), 2).unwrap_err();
        assert_eq!(
            err,
            TransformError::NotStronglyMultiplicative {
                lambda: 2,
                failing_sets: vec![
                    PlayerSet::from_players(&[1, 3]),
                    PlayerSet::from_players(&[1, 4]),
                ],
            }
        );

        let minimal = shamir_msp(1, 3, 7, None).unwrap();
        match lift_multiplicativity(&minimal, 2).unwrap_err() {
            TransformError::NotStronglyMultiplicative {
                lambda: 2,
                failing_sets,
            } => assert_eq!(failing_sets.len(), 3),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn lift_is_deterministic() {
        let a = lift_multiplicativity(&fixture(Fixture::MPrime), 2).unwrap();
        let b = lift_multiplicativity(&fixture(Fixture::MPrime), 2).unwrap();
        assert_eq!(serialize_msp(a.scheme()), serialize_msp(b.scheme()));
        assert_eq!(a.witness().serialize(), b.witness().serialize());
    }
}
