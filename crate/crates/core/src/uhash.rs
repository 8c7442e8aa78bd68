//! The polynomial hash family over GF(2^n).
//!
//! A coefficient vector `db = (a_0, ..., a_{k-1})` selects the function
//! `h_db(x) = trunc_m(a_0 + a_1 x + ... + a_{k-1} x^{k-1})`. Drawing `db`
//! uniformly gives a strongly k-universal family: any `k` distinct inputs
//! hash to any `k` outputs with probability `2^(-m k)`.

use rand::RngCore;
use thiserror::Error;

use crate::gf2field::{truncate, FieldElem, FieldError, FieldSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HashError {
    #[error("a hash database needs at least one coefficient")]
    Empty,
    #[error("output width {m} must be below the item width {n}")]
    OutputTooWide { m: u16, n: u16 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// The public database `db`: `k` coefficients of width `n`, `db[i]` being the
/// coefficient of `x^i`.
#[derive(Clone, PartialEq, Eq)]
pub struct CoeffVector {
    field: FieldSpec,
    coeffs: Vec<FieldElem>,
}

/// An item after hashing: exactly `m` bits, read as an element of GF(2^m).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HashedItem(pub FieldElem);

impl HashedItem {
    pub fn value(&self) -> &FieldElem {
        &self.0
    }
}

impl CoeffVector {
    /// Draws `k` independent uniform `n`-bit coefficients.
    ///
    /// The output depends only on `(n, k)` and the state of `rng`.
    pub fn sample<R: RngCore + ?Sized>(n: u16, k: usize, rng: &mut R) -> Result<Self, HashError> {
        if k == 0 {
            return Err(HashError::Empty);
        }
        let field = FieldSpec::standard(n)?;
        let coeffs = (0..k).map(|_| FieldElem::random(n, rng)).collect();
        Ok(Self { field, coeffs })
    }

    pub fn from_coeffs(n: u16, coeffs: Vec<FieldElem>) -> Result<Self, HashError> {
        Self::with_field(FieldSpec::standard(n)?, coeffs)
    }

    /// Like [`from_coeffs`](Self::from_coeffs) with an explicit field.
    pub fn with_field(field: FieldSpec, coeffs: Vec<FieldElem>) -> Result<Self, HashError> {
        if coeffs.is_empty() {
            return Err(HashError::Empty);
        }
        if let Some(c) = coeffs.iter().find(|c| c.width() != field.width()) {
            return Err(FieldError::WidthMismatch {
                expected: field.width(),
                found: c.width(),
            }
            .into());
        }
        Ok(Self { field, coeffs })
    }

    pub fn n(&self) -> u16 {
        self.field.width()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    /// Concatenated big-endian coefficients, `a_0` first.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.coeffs.iter().flat_map(|c| c.to_be_bytes()).collect()
    }

    /// `h_db(x)`: the polynomial at `x`, truncated to its `m` low bits.
    pub fn eval(&self, m: u16, x: &FieldElem) -> Result<HashedItem, HashError> {
        if m >= self.n() {
            return Err(HashError::OutputTooWide { m, n: self.n() });
        }
        let y = self.field.eval_poly(&self.coeffs, x)?;
        Ok(HashedItem(truncate(&y, m)?))
    }
}

impl std::fmt::Debug for CoeffVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoeffVector")
            .field("n", &self.n())
            .field("k", &self.len())
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn e(v: u64, w: u16) -> FieldElem {
        FieldElem::from_u64(v, w).unwrap()
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let a = CoeffVector::sample(8, 3, &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        let b = CoeffVector::sample(8, 3, &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        let c = CoeffVector::sample(8, 3, &mut ChaCha20Rng::seed_from_u64(2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 3);
    }

    #[test]
    fn zero_coefficients_are_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        assert_eq!(CoeffVector::sample(8, 0, &mut rng), Err(HashError::Empty));
        assert_eq!(CoeffVector::from_coeffs(8, vec![]), Err(HashError::Empty));
    }

    #[test]
    fn sampled_bits_are_balanced() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let db = CoeffVector::sample(8, 100_000, &mut rng).unwrap();
        let ones: u64 = db.coeffs().iter().map(|c| u64::from(c.count_ones())).sum();
        let freq = ones as f64 / (8.0 * 100_000.0);
        assert!((0.49..=0.51).contains(&freq), "{freq}");
    }

    #[test]
    fn zero_database_hashes_to_zero() {
        let db = CoeffVector::from_coeffs(8, vec![e(0, 8); 4]).unwrap();
        for x in 0..256 {
            assert!(db.eval(3, &e(x, 8)).unwrap().value().is_zero());
        }
    }

    #[test]
    fn constant_polynomial_truncates_its_coefficient() {
        let db = CoeffVector::from_coeffs(8, vec![e(0b1011_0110, 8)]).unwrap();
        assert_eq!(db.eval(3, &e(77, 8)).unwrap(), HashedItem(e(0b110, 3)));
    }

    #[test]
    fn worked_example_in_gf16() {
        // GF(16) mod x^4 + x + 1: 0b0011 + 0b0001 * 0b0010 = 0b0001, low 2 bits 0b01
        let db = CoeffVector::from_coeffs(4, vec![e(0b0011, 4), e(0b0001, 4)]).unwrap();
        assert_eq!(db.field().reduction(), &[0, 1, 4]);
        assert_eq!(db.eval(2, &e(0b0010, 4)).unwrap(), HashedItem(e(0b01, 2)));
    }

    #[test]
    fn contract_violations() {
        let db = CoeffVector::from_coeffs(8, vec![e(1, 8)]).unwrap();
        assert_eq!(db.eval(8, &e(0, 8)), Err(HashError::OutputTooWide { m: 8, n: 8 }));
        assert!(matches!(db.eval(3, &e(0, 9)), Err(HashError::Field(_))));
        assert!(CoeffVector::from_coeffs(8, vec![e(1, 9)]).is_err());
    }
}
