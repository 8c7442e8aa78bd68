//! Arithmetic in binary extension fields GF(2^w).
//!
//! Elements are bit strings of exactly `w` bits; bit `i` is the coefficient of
//! `x^i`. Addition is XOR, multiplication is a carry-less product reduced by a
//! sparse irreducible polynomial (a trinomial or pentanomial). Only the widths
//! the recognizer needs are supported: every `w` in `2..=32` and `w = 256`.
//!
//! ```
//! use onion_recognizer::gf2field::{FieldElem, FieldSpec};
//!
//! let f = FieldSpec::new(3, &[0, 1, 3]).unwrap();
//! let a = FieldElem::from_u64(0b010, 3).unwrap();
//! let b = FieldElem::from_u64(0b100, 3).unwrap();
//! assert_eq!(f.mul(&a, &b).unwrap().low_u64(), 0b011);
//! ```

use std::fmt;

use rand::RngCore;
use thiserror::Error;

/// Largest supported field width in bits.
pub const MAX_WIDTH: u16 = 256;

const LIMBS: usize = 4;
const MAX_TERMS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("width mismatch: expected {expected} bits, found {found}")]
    WidthMismatch { expected: u16, found: u16 },
    #[error("zero has no inverse")]
    ZeroInverse,
    #[error("polynomial has no coefficients")]
    EmptyPolynomial,
    #[error("cannot truncate a {width}-bit value to {m} bits")]
    TruncationTooWide { m: u16, width: u16 },
    #[error("unsupported field width {0}")]
    UnsupportedWidth(u16),
    #[error("invalid reduction polynomial: {0}")]
    InvalidReduction(&'static str),
    #[error("value does not fit in {width} bits")]
    ValueTooWide { width: u16 },
}

pub type Result<T, E = FieldError> = std::result::Result<T, E>;

/// Exponents of the lowest-weight irreducible polynomial for each width in
/// `2..=32`, excluding the constant and leading terms.
///
/// Trinomials where one exists, otherwise the lexicographically smallest
/// pentanomial. Irreducibility is checked by exhaustive factor search in the
/// test suite.
const SMALL_FIELD_TAPS: [&[u16]; 31] = [
    &[1],          // 2
    &[1],          // 3
    &[1],          // 4
    &[2],          // 5
    &[1],          // 6
    &[1],          // 7
    &[1, 3, 4],    // 8
    &[1],          // 9
    &[3],          // 10
    &[2],          // 11
    &[3],          // 12
    &[1, 3, 4],    // 13
    &[5],          // 14
    &[1],          // 15
    &[1, 3, 5],    // 16
    &[3],          // 17
    &[3],          // 18
    &[1, 2, 5],    // 19
    &[3],          // 20
    &[2],          // 21
    &[1],          // 22
    &[5],          // 23
    &[1, 3, 4],    // 24
    &[3],          // 25
    &[1, 3, 4],    // 26
    &[1, 2, 5],    // 27
    &[1],          // 28
    &[2],          // 29
    &[1],          // 30
    &[3],          // 31
    &[2, 3, 7],    // 32
];

/// Middle exponents of `1 + x^121 + x^178 + x^241 + x^256`.
const GF256_TAPS: [u16; 3] = [121, 178, 241];

/// A binary field: its width and the exponents of its reduction polynomial.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    width: u16,
    terms: [u16; MAX_TERMS],
    n_terms: u8,
}

impl FieldSpec {
    /// Builds a field from the exponents of its reduction polynomial.
    ///
    /// The exponent list must contain both `0` and `width` and have three or
    /// five terms. Irreducibility is the caller's responsibility; the
    /// [`standard`](Self::standard) fields are verified by the test suite.
    pub fn new(width: u16, exponents: &[u16]) -> Result<Self> {
        if !(2..=MAX_WIDTH).contains(&width) {
            return Err(FieldError::UnsupportedWidth(width));
        }
        let mut terms = [0u16; MAX_TERMS];
        if exponents.len() > MAX_TERMS || exponents.len() < 2 {
            return Err(FieldError::InvalidReduction("expected 2 to 5 terms"));
        }
        terms[..exponents.len()].copy_from_slice(exponents);
        let sorted = &mut terms[..exponents.len()];
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(FieldError::InvalidReduction("repeated exponent"));
        }
        if sorted[0] != 0 {
            return Err(FieldError::InvalidReduction("missing constant term"));
        }
        if sorted[sorted.len() - 1] != width {
            return Err(FieldError::InvalidReduction("leading exponent must equal the width"));
        }
        Ok(Self {
            width,
            terms,
            n_terms: exponents.len() as u8,
        })
    }

    /// The built-in field for `width`.
    pub fn standard(width: u16) -> Result<Self> {
        let taps: &[u16] = match width {
            2..=32 => SMALL_FIELD_TAPS[usize::from(width) - 2],
            256 => &GF256_TAPS,
            _ => return Err(FieldError::UnsupportedWidth(width)),
        };
        let mut exps = Vec::with_capacity(taps.len() + 2);
        exps.push(0);
        exps.extend_from_slice(taps);
        exps.push(width);
        Self::new(width, &exps)
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    /// Exponents of the reduction polynomial in ascending order.
    pub fn reduction(&self) -> &[u16] {
        &self.terms[..usize::from(self.n_terms)]
    }

    /// Number of bytes in the big-endian serialization of an element.
    pub fn byte_len(&self) -> usize {
        usize::from(self.width).div_ceil(8)
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem::zero(self.width)
    }

    pub fn one(&self) -> FieldElem {
        FieldElem::one(self.width)
    }

    fn check(&self, a: &FieldElem) -> Result<()> {
        if a.width != self.width {
            return Err(FieldError::WidthMismatch {
                expected: self.width,
                found: a.width,
            });
        }
        Ok(())
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> Result<FieldElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(a.xor(b))
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> Result<FieldElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    pub fn square(&self, a: &FieldElem) -> Result<FieldElem> {
        self.mul(a, a)
    }

    /// Raises `a` to a 64-bit exponent by square-and-multiply.
    pub fn pow(&self, a: &FieldElem, mut exp: u64) -> Result<FieldElem> {
        self.check(a)?;
        let mut base = *a;
        let mut acc = self.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_unchecked(&acc, &base);
            }
            base = self.mul_unchecked(&base, &base);
            exp >>= 1;
        }
        Ok(acc)
    }

    /// Multiplicative inverse, computed as `a^(2^w - 2)`.
    pub fn inv(&self, a: &FieldElem) -> Result<FieldElem> {
        self.check(a)?;
        if a.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        // r = a^(2^k - 1) after k-1 steps
        let mut r = *a;
        for _ in 1..self.width - 1 {
            r = self.mul_unchecked(&r, &r);
            r = self.mul_unchecked(&r, a);
        }
        Ok(self.mul_unchecked(&r, &r))
    }

    /// Evaluates `coeffs[0] + coeffs[1] x + ... + coeffs[k-1] x^(k-1)` by
    /// Horner's rule.
    pub fn eval_poly(&self, coeffs: &[FieldElem], x: &FieldElem) -> Result<FieldElem> {
        let (last, rest) = coeffs.split_last().ok_or(FieldError::EmptyPolynomial)?;
        self.check(x)?;
        self.check(last)?;
        let mut acc = *last;
        for c in rest.iter().rev() {
            self.check(c)?;
            acc = self.mul_unchecked(&acc, x).xor(c);
        }
        Ok(acc)
    }

    pub(crate) fn mul_unchecked(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let nl = usize::from(self.width).div_ceil(64);
        let mut prod = [0u64; 2 * LIMBS];
        for i in 0..nl {
            if a.limbs[i] == 0 {
                continue;
            }
            for j in 0..nl {
                let (lo, hi) = clmul64(a.limbs[i], b.limbs[j]);
                prod[i + j] ^= lo;
                prod[i + j + 1] ^= hi;
            }
        }
        self.reduce(prod)
    }

    fn reduce(&self, mut prod: [u64; 2 * LIMBS]) -> FieldElem {
        let w = usize::from(self.width);
        let terms = self.reduction();
        while let Some(deg) = degree(&prod) {
            if deg < w {
                break;
            }
            let shift = deg - w;
            for &e in terms {
                let bit = shift + usize::from(e);
                prod[bit / 64] ^= 1 << (bit % 64);
            }
        }
        let mut limbs = [0u64; LIMBS];
        limbs.copy_from_slice(&prod[..LIMBS]);
        FieldElem {
            limbs,
            width: self.width,
        }
    }
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:?}", self.width, self.reduction())
    }
}

fn degree(p: &[u64]) -> Option<usize> {
    p.iter()
        .enumerate()
        .rev()
        .find(|(_, &l)| l != 0)
        .map(|(i, l)| i * 64 + 63 - l.leading_zeros() as usize)
}

/// Carry-less 64x64 -> 128 bit product, returned as `(low, high)`.
fn clmul64(a: u64, b: u64) -> (u64, u64) {
    let mut table = [0u128; 16];
    let a = u128::from(a);
    for i in 1..16 {
        table[i] = if i & 1 == 1 {
            table[i - 1] ^ a
        } else {
            table[i / 2] << 1
        };
    }
    let mut r = 0u128;
    for k in (0..16).rev() {
        r = (r << 4) ^ table[((b >> (4 * k)) & 0xf) as usize];
    }
    (r as u64, (r >> 64) as u64)
}

/// An element of GF(2^w), stored as up to 256 little-endian bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem {
    limbs: [u64; LIMBS],
    width: u16,
}

impl FieldElem {
    pub fn zero(width: u16) -> Self {
        Self {
            limbs: [0; LIMBS],
            width,
        }
    }

    pub fn one(width: u16) -> Self {
        Self::from_limbs_masked([1, 0, 0, 0], width)
    }

    pub fn from_u64(value: u64, width: u16) -> Result<Self> {
        if width < 64 && value >> width != 0 {
            return Err(FieldError::ValueTooWide { width });
        }
        Self::from_limbs([value, 0, 0, 0], width)
    }

    pub fn from_u128(value: u128, width: u16) -> Result<Self> {
        if width < 128 && value >> width != 0 {
            return Err(FieldError::ValueTooWide { width });
        }
        Self::from_limbs([value as u64, (value >> 64) as u64, 0, 0], width)
    }

    fn from_limbs(limbs: [u64; LIMBS], width: u16) -> Result<Self> {
        if width == 0 || width > MAX_WIDTH {
            return Err(FieldError::UnsupportedWidth(width));
        }
        let elem = Self::from_limbs_masked(limbs, width);
        if elem.limbs != limbs {
            return Err(FieldError::ValueTooWide { width });
        }
        Ok(elem)
    }

    fn from_limbs_masked(mut limbs: [u64; LIMBS], width: u16) -> Self {
        let w = usize::from(width);
        for (i, limb) in limbs.iter_mut().enumerate() {
            let lo = i * 64;
            if lo >= w {
                *limb = 0;
            } else if w - lo < 64 {
                *limb &= (1u64 << (w - lo)) - 1;
            }
        }
        Self { limbs, width }
    }

    /// Parses the big-endian serialization of exactly `ceil(width/8)` bytes.
    pub fn from_be_bytes(bytes: &[u8], width: u16) -> Result<Self> {
        if width == 0 || width > MAX_WIDTH {
            return Err(FieldError::UnsupportedWidth(width));
        }
        let len = usize::from(width).div_ceil(8);
        if bytes.len() != len {
            return Err(FieldError::WidthMismatch {
                expected: width,
                found: (bytes.len() * 8).min(usize::from(u16::MAX)) as u16,
            });
        }
        let mut limbs = [0u64; LIMBS];
        for (i, &b) in bytes.iter().rev().enumerate() {
            limbs[i / 8] |= u64::from(b) << (8 * (i % 8));
        }
        Self::from_limbs(limbs, width)
    }

    pub fn to_be_bytes(&self) -> Vec<u8> {
        let len = usize::from(self.width).div_ceil(8);
        (0..len)
            .rev()
            .map(|i| (self.limbs[i / 8] >> (8 * (i % 8))) as u8)
            .collect()
    }

    /// Draws a uniform element from `rng` by filling its byte serialization
    /// and masking the unused high bits.
    pub fn random<R: RngCore + ?Sized>(width: u16, rng: &mut R) -> Self {
        let mut buf = vec![0u8; usize::from(width).div_ceil(8)];
        rng.fill_bytes(&mut buf);
        let excess = buf.len() * 8 - usize::from(width);
        buf[0] &= 0xff >> excess;
        Self::from_be_bytes(&buf, width).expect("masked to width")
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    pub fn bit(&self, i: usize) -> bool {
        i < usize::from(self.width) && (self.limbs[i / 64] >> (i % 64)) & 1 == 1
    }

    /// The low 64 bits.
    pub fn low_u64(&self) -> u64 {
        self.limbs[0]
    }

    pub fn low_u128(&self) -> u128 {
        u128::from(self.limbs[0]) | (u128::from(self.limbs[1]) << 64)
    }

    pub fn count_ones(&self) -> u32 {
        self.limbs.iter().map(|l| l.count_ones()).sum()
    }

    /// Copy with bit `i` inverted.
    pub fn flip_bit(&self, i: usize) -> Self {
        assert!(i < usize::from(self.width), "bit index out of range");
        let mut out = *self;
        out.limbs[i / 64] ^= 1 << (i % 64);
        out
    }

    fn xor(&self, other: &Self) -> Self {
        let mut limbs = self.limbs;
        for (l, o) in limbs.iter_mut().zip(other.limbs) {
            *l ^= o;
        }
        Self {
            limbs,
            width: self.width,
        }
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_be_bytes())
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}/{}", self.to_hex(), self.width)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Keeps the `m` least significant bits of `y`.
pub fn truncate(y: &FieldElem, m: u16) -> Result<FieldElem> {
    if m == 0 || m > y.width {
        return Err(FieldError::TruncationTooWide { m, width: y.width });
    }
    Ok(FieldElem::from_limbs_masked(y.limbs, m))
}
