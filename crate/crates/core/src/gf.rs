//! Arithmetic in GF(q) for prime moduli q with 2 <= q < 2^31.
//!
//! Residues are kept reduced in [0, q). The modulus bound keeps every
//! product of two residues inside u64, so all arithmetic is exact and
//! allocation-free. [`PrimeField`] offers raw operations on reduced u64
//! residues for inner loops; [`FieldElement`] wraps a residue together
//! with its modulus and checks operand compatibility on every operation.

use std::fmt;

use thiserror::Error;

/// Exclusive upper bound on accepted moduli.
pub const MAX_MODULUS: u64 = 1 << 31;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("modulus {0} is not a prime in [2, 2^31)")]
    BadModulus(u64),
    #[error("mixed moduli: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("division by zero in GF({0})")]
    DivisionByZero(u64),
}

/// Returns true when q is prime. Deterministic trial division; the
/// modulus bound keeps the cost at most ~46000 divisions.
fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    if q % 2 == 0 {
        return q == 2;
    }
    let mut d = 3;
    while d * d <= q {
        if q % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// The prime field GF(q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    modulus: u64,
}

impl PrimeField {
    /// Validates that q is a prime below 2^31.
    pub fn new(modulus: u64) -> Result<Self, FieldError> {
        if modulus >= MAX_MODULUS || !is_prime(modulus) {
            return Err(FieldError::BadModulus(modulus));
        }
        Ok(PrimeField { modulus })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Embeds an arbitrary u64 by reduction mod q.
    pub fn element(&self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.modulus,
            modulus: self.modulus,
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.element(0)
    }

    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    /// a + b for reduced residues.
    #[inline]
    pub fn add_raw(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    /// a - b for reduced residues.
    #[inline]
    pub fn sub_raw(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    /// a * b for reduced residues. Safe: both factors are < 2^31.
    #[inline]
    pub fn mul_raw(&self, a: u64, b: u64) -> u64 {
        a * b % self.modulus
    }

    /// -a for a reduced residue.
    #[inline]
    pub fn neg_raw(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    /// Multiplicative inverse of a reduced residue, None for zero.
    /// Extended Euclid on signed i64; the modulus fits comfortably.
    pub fn inv_raw(&self, a: u64) -> Option<u64> {
        if a == 0 {
            return None;
        }
        let (mut r0, mut r1) = (self.modulus as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1, "gcd(a, q) must be 1 for prime q");
        let m = self.modulus as i64;
        Some(((t0 % m + m) % m) as u64)
    }

    /// a^e by square-and-multiply on reduced residues.
    pub fn pow_raw(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a % self.modulus;
        let mut acc = 1 % self.modulus;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            e >>= 1;
        }
        acc
    }
}

/// A residue paired with its modulus. All binary operations insist that
/// both operands come from the same field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    modulus: u64,
}

impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn field(&self) -> PrimeField {
        PrimeField {
            modulus: self.modulus,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &FieldElement) -> Result<PrimeField, FieldError> {
        if self.modulus != other.modulus {
            return Err(FieldError::ModulusMismatch(self.modulus, other.modulus));
        }
        Ok(self.field())
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        let f = self.same_field(other)?;
        Ok(f.element(f.add_raw(self.value, other.value)))
    }

    pub fn sub(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        let f = self.same_field(other)?;
        Ok(f.element(f.sub_raw(self.value, other.value)))
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        let f = self.same_field(other)?;
        Ok(f.element(f.mul_raw(self.value, other.value)))
    }

    pub fn neg(&self) -> FieldElement {
        let f = self.field();
        f.element(f.neg_raw(self.value))
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        let f = self.field();
        match f.inv_raw(self.value) {
            Some(v) => Ok(f.element(v)),
            None => Err(FieldError::DivisionByZero(self.modulus)),
        }
    }

    pub fn div(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.same_field(other)?;
        self.mul(&other.inv()?)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_composite_and_out_of_range_moduli() {
        for q in [0, 1, 4, 6, 9, 15, 2147483649] {
            assert_eq!(PrimeField::new(q), Err(FieldError::BadModulus(q)));
        }
        // 2147483659 is the first prime past 2^31; the bound still rejects it.
        assert_eq!(
            PrimeField::new(2147483659),
            Err(FieldError::BadModulus(2147483659))
        );
        // 2^31 - 1 is prime and in range.
        assert!(PrimeField::new(2147483647).is_ok());
        assert!(PrimeField::new(2).is_ok());
    }

    #[test]
    fn small_field_examples() {
        let f7 = PrimeField::new(7).unwrap();
        let three = f7.element(3);
        let four = f7.element(4);
        assert_eq!(three.add(&four).unwrap(), f7.zero());
        assert_eq!(three.inv().unwrap(), f7.element(5));

        let f2 = PrimeField::new(2).unwrap();
        assert_eq!(f2.one().add(&f2.one()).unwrap(), f2.zero());
    }

    #[test]
    fn inverse_matches_search_oracle_mod_7() {
        // Independent oracle: exhaustive search for the inverse.
        let f7 = PrimeField::new(7).unwrap();
        let inv3 = (1..7).find(|b| 3 * b % 7 == 1).unwrap();
        assert_eq!(inv3, 5);
        assert_eq!(f7.element(3).inv().unwrap().value(), inv3);
    }

    #[test]
    fn inverse_round_trip_all_small_primes() {
        for q in 2..=257u64 {
            if !is_prime(q) {
                continue;
            }
            let f = PrimeField::new(q).unwrap();
            for a in 1..q {
                let inv = f.inv_raw(a).unwrap();
                assert_eq!(f.mul_raw(a, inv), 1, "a={a} q={q}");
                assert_eq!(f.element(a).inv().unwrap().inv().unwrap().value(), a);
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive_tiny_fields() {
        for q in [2u64, 3, 5, 7] {
            let f = PrimeField::new(q).unwrap();
            for a in 0..q {
                for b in 0..q {
                    assert_eq!(f.add_raw(a, b), f.add_raw(b, a));
                    assert_eq!(f.mul_raw(a, b), f.mul_raw(b, a));
                    assert_eq!(f.sub_raw(f.add_raw(a, b), b), a);
                    for c in 0..q {
                        assert_eq!(
                            f.add_raw(f.add_raw(a, b), c),
                            f.add_raw(a, f.add_raw(b, c))
                        );
                        assert_eq!(
                            f.mul_raw(f.mul_raw(a, b), c),
                            f.mul_raw(a, f.mul_raw(b, c))
                        );
                        assert_eq!(
                            f.mul_raw(a, f.add_raw(b, c)),
                            f.add_raw(f.mul_raw(a, b), f.mul_raw(a, c))
                        );
                    }
                }
                assert_eq!(f.add_raw(a, 0), a);
                assert_eq!(f.mul_raw(a, 1 % q), a);
                assert_eq!(f.add_raw(a, f.neg_raw(a)), 0);
            }
        }
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let f = PrimeField::new(11).unwrap();
        for a in 0..11 {
            let mut acc = 1u64;
            for e in 0..12u64 {
                assert_eq!(f.pow_raw(a, e), acc);
                acc = f.mul_raw(acc, a);
            }
        }
    }

    #[test]
    fn mixed_modulus_and_zero_division_errors() {
        let f2 = PrimeField::new(2).unwrap();
        let f3 = PrimeField::new(3).unwrap();
        assert_eq!(
            f2.one().add(&f3.one()),
            Err(FieldError::ModulusMismatch(2, 3))
        );
        assert_eq!(f3.zero().inv(), Err(FieldError::DivisionByZero(3)));
        assert_eq!(
            f3.one().div(&f3.zero()),
            Err(FieldError::DivisionByZero(3))
        );
    }

    #[test]
    fn element_reduces_on_construction() {
        let f7 = PrimeField::new(7).unwrap();
        assert_eq!(f7.element(30).value(), 2);
        assert_eq!(format!("{}", f7.element(30)), "2");
    }
}
