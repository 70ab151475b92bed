//! Linear secret sharing over prime fields, built on monotone span programs.
//!
//! The crate is organised bottom-up:
//!
//! * [`gf`] — arithmetic in GF(q) for word-sized primes q.
//! * [`linalg`] — exact matrices over GF(q): RREF, kernels, row combinations.
//! * [`msp`] — monotone span programs as secret sharing schemes: sharing,
//!   reconstruction, access structures, blinding vectors, constrictions.
//! * [`diamond`] — the local product of share vectors, its matrix, and
//!   recombination witnesses for (strong) lambda-multiplicativity.
//! * [`transform`] — lifting a strongly lambda-multiplicative scheme to a
//!   (lambda+1)-multiplicative one for the same access structure.
//! * [`constructions`] — Shamir and Reed-Muller scheme families plus two
//!   hand-pinned six-player example schemes.
//! * [`mpcsim`] — an honest-but-curious protocol simulator that multiplies
//!   many shared factors in a constant number of rounds, with a privacy
//!   auditor.
//! * [`format`] — the textual scheme file format and witness serialization.
//! * [`cli`] — the `mspmul` command line tool.

pub mod cli;
pub mod constructions;
pub mod diamond;
pub mod format;
pub mod gf;
pub mod linalg;
pub mod mpcsim;
pub mod msp;
pub mod transform;
