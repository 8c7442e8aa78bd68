//! The polynomial recognizer.
//!
//! `init` draws the public database `db` (a universal hash with `q + N`
//! coefficients over GF(2^n)), hashes every stored item down to `m` bits and
//! builds the monic polynomial
//!
//! ```text
//! p(x) = (x - h_1)(x - h_2)...(x - h_N) + h_1 h_2 ... h_N
//!      = x^N + a_{N-1} x^{N-1} + ... + a_1 x
//! ```
//!
//! over GF(2^m). The key is `(a_{N-1}, ..., a_1)`; the fingerprint is
//! `h_1 h_2 ... h_N`, which is the value `p` takes at every stored hash and
//! nowhere else. `test` recomputes `p(h_db(x))` from the key.

use rand::RngCore;
use std::collections::HashSet;
use std::fmt;
use thiserror::Error;

use crate::gf2field::{FieldElem, FieldError, FieldSpec};
use crate::uhash::{CoeffVector, HashError, HashedItem};

/// How many times `init` redraws `db` when two stored items hash to the same
/// `m`-bit value.
pub const MAX_INIT_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecognizerError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("item {index} is a duplicate")]
    DuplicateItem { index: usize },
    #[error("hashed items are not distinct")]
    DuplicateHash,
    #[error("expected {expected} items, got {found}")]
    ItemCount { expected: usize, found: usize },
    #[error("could not draw a collision-free database in {attempts} attempts")]
    InitFailed { attempts: usize },
    #[error("key does not match the parameters")]
    KeyShape,
    #[error("target probability must lie strictly between 0 and 1")]
    InvalidEpsilon,
    #[error(transparent)]
    Hash(#[from] HashError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub type Result<T, E = RecognizerError> = std::result::Result<T, E>;

/// `(n, N, q, m)`: item width, stored-item count, phishing-attempt budget
/// and fingerprint width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RecognizerParams {
    n: u16,
    items: usize,
    q: usize,
    m: u16,
}

impl RecognizerParams {
    /// Checks `q >= 1`, `m < n` and `1 < N < 2^m`, and that both widths
    /// have a built-in field.
    pub fn new(n: u16, items: usize, q: usize, m: u16) -> Result<Self> {
        if q < 1 {
            return Err(RecognizerError::InvalidParams("q must be at least 1".into()));
        }
        if m >= n {
            return Err(RecognizerError::InvalidParams(format!(
                "fingerprint width {m} must be below item width {n}"
            )));
        }
        if items < 2 || !fits_below_pow2(items, m) {
            return Err(RecognizerError::InvalidParams(format!(
                "need 1 < N < 2^m, got N = {items}, m = {m}"
            )));
        }
        FieldSpec::standard(n)?;
        FieldSpec::standard(m)?;
        Ok(Self { n, items, q, m })
    }

    pub fn n(&self) -> u16 {
        self.n
    }

    /// `N`, the number of stored items.
    pub fn items(&self) -> usize {
        self.items
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn m(&self) -> u16 {
        self.m
    }

    /// Length of `db`: `q + N`.
    pub fn db_len(&self) -> usize {
        self.q + self.items
    }

    /// Key length in bits: `(N - 1) m`.
    pub fn key_bits(&self) -> u32 {
        (self.items as u32 - 1) * u32::from(self.m)
    }

    pub fn security(&self) -> SecurityLevel {
        SecurityLevel {
            epsilon: compute_epsilon(self.items as u64, self.q as u64, self.m)
                .expect("validated N < 2^m"),
            time: TimeBound::Unbounded,
        }
    }
}

fn fits_below_pow2(value: usize, m: u16) -> bool {
    m >= 64 || (value as u64) < (1u64 << m)
}

/// Adversary running-time bound. The construction is information-theoretic,
/// so the only bound ever used is `Unbounded`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeBound {
    Unbounded,
}

/// `(epsilon, t)`: collision-game success bound for adversaries of time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityLevel {
    pub epsilon: f64,
    pub time: TimeBound,
}

/// A set of distinct `n`-bit items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemSet {
    items: Vec<FieldElem>,
}

impl ItemSet {
    pub fn new(items: Vec<FieldElem>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(items.len());
        for (index, item) in items.iter().enumerate() {
            if item.width() != items[0].width() {
                return Err(FieldError::WidthMismatch {
                    expected: items[0].width(),
                    found: item.width(),
                }
                .into());
            }
            if !seen.insert(*item) {
                return Err(RecognizerError::DuplicateItem { index });
            }
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[FieldElem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, x: &FieldElem) -> bool {
        self.items.contains(x)
    }
}

/// The secret key `(a_{N-1}, ..., a_1)`, stored here as `a_1..a_{N-1}`.
///
/// Keys have no file form. The only way out of the process is the word
/// passphrase shown to the user.
#[derive(Clone, PartialEq, Eq)]
pub struct Key {
    m: u16,
    coeffs: Vec<FieldElem>,
}

impl Key {
    /// Builds a key from `a_1..a_{N-1}`, each `m` bits wide.
    pub fn from_coeffs(m: u16, coeffs: Vec<FieldElem>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| c.width() != m) {
            return Err(RecognizerError::KeyShape);
        }
        Ok(Self { m, coeffs })
    }

    /// Unpacks `bits` as `a_{N-1} || ... || a_1`, `a_{N-1}` most significant.
    pub fn from_bits(bits: u128, items: usize, m: u16) -> Result<Self> {
        let len = items.checked_sub(1).filter(|&l| l > 0).ok_or(RecognizerError::KeyShape)?;
        let total = len * usize::from(m);
        if m == 0 || total > 128 || (total < 128 && bits >> total != 0) {
            return Err(RecognizerError::KeyShape);
        }
        let mask = (1u128 << m) - 1;
        let coeffs = (0..len)
            .map(|i| FieldElem::from_u128((bits >> (i * usize::from(m))) & mask, m))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { m, coeffs })
    }

    /// Packs the key as `a_{N-1} || ... || a_1` into the low `bit_len` bits.
    pub fn to_bits(&self) -> u128 {
        self.coeffs
            .iter()
            .rev()
            .fold(0u128, |acc, c| (acc << self.m) | c.low_u128())
    }

    pub fn bit_len(&self) -> u32 {
        self.coeffs.len() as u32 * u32::from(self.m)
    }

    pub fn m(&self) -> u16 {
        self.m
    }

    /// `a_1..a_{N-1}`.
    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    /// Number of items the key was built for.
    pub fn items(&self) -> usize {
        self.coeffs.len() + 1
    }

    /// `p(x) = x^N + a_{N-1} x^{N-1} + ... + a_1 x` at `x`.
    pub fn eval(&self, x: &FieldElem) -> Result<FieldElem> {
        let field = FieldSpec::standard(self.m)?;
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 2);
        coeffs.push(field.zero());
        coeffs.extend_from_slice(&self.coeffs);
        coeffs.push(field.one());
        Ok(field.eval_poly(&coeffs, x)?)
    }
}

impl fmt::Debug for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Key({} bits, redacted)", self.bit_len())
    }
}

/// The `m`-bit value every stored item maps to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fingerprint(pub FieldElem);

impl Fingerprint {
    pub fn value(&self) -> &FieldElem {
        &self.0
    }

    pub fn m(&self) -> u16 {
        self.0.width()
    }

    pub fn to_hex(&self) -> String {
        self.0.to_hex()
    }
}

/// Output of [`init`]: the public `db`, and the secret key and fingerprint.
#[derive(Debug, Clone)]
pub struct RecognizerInstance {
    params: RecognizerParams,
    db: CoeffVector,
    key: Key,
    fingerprint: Fingerprint,
}

impl RecognizerInstance {
    pub fn params(&self) -> &RecognizerParams {
        &self.params
    }

    pub fn db(&self) -> &CoeffVector {
        &self.db
    }

    pub fn key(&self) -> &Key {
        &self.key
    }

    pub fn fingerprint(&self) -> &Fingerprint {
        &self.fingerprint
    }

    pub fn test(&self, x: &FieldElem) -> Result<Fingerprint> {
        test(&self.db, &self.key, x, &self.params)
    }
}

/// Expands `prod (x - h_i) + prod h_i` over GF(2^m).
///
/// Returns the key `a_1..a_{N-1}` and the fingerprint `prod h_i`.
pub fn build_key(hashed: &[HashedItem], m: u16) -> Result<(Key, Fingerprint)> {
    let field = FieldSpec::standard(m)?;
    let n = hashed.len();
    if n < 2 || !fits_below_pow2(n, m) {
        return Err(RecognizerError::InvalidParams(format!(
            "need 1 < N < 2^m, got N = {n}, m = {m}"
        )));
    }
    let mut seen = HashSet::with_capacity(n);
    for h in hashed {
        if h.value().width() != m {
            return Err(FieldError::WidthMismatch {
                expected: m,
                found: h.value().width(),
            }
            .into());
        }
        if !seen.insert(*h) {
            return Err(RecognizerError::DuplicateHash);
        }
    }

    // coeffs[i] is the coefficient of x^i; subtraction is addition here
    let mut coeffs = vec![field.one()];
    let mut product = field.one();
    for h in hashed {
        let root = h.value();
        let mut next = vec![field.zero(); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i + 1] = field.add(&next[i + 1], c)?;
            next[i] = field.add(&next[i], &field.mul(c, root)?)?;
        }
        coeffs = next;
        product = field.mul(&product, root)?;
    }
    coeffs[0] = field.add(&coeffs[0], &product)?;
    debug_assert!(coeffs[0].is_zero());
    debug_assert_eq!(coeffs[n], field.one());

    let key = Key {
        m,
        coeffs: coeffs[1..n].to_vec(),
    };
    Ok((key, Fingerprint(product)))
}

/// Creates a recognizer for `items`.
///
/// `db` is drawn from `rng` before the items are looked at. If two items
/// hash to the same value, `db` is redrawn, up to [`MAX_INIT_ATTEMPTS`] times.
pub fn init<R: RngCore + ?Sized>(
    items: &ItemSet,
    params: &RecognizerParams,
    rng: &mut R,
) -> Result<RecognizerInstance> {
    if items.len() != params.items() {
        return Err(RecognizerError::ItemCount {
            expected: params.items(),
            found: items.len(),
        });
    }
    if let Some(x) = items.items().iter().find(|x| x.width() != params.n()) {
        return Err(FieldError::WidthMismatch {
            expected: params.n(),
            found: x.width(),
        }
        .into());
    }
    for _ in 0..MAX_INIT_ATTEMPTS {
        let db = CoeffVector::sample(params.n(), params.db_len(), rng)?;
        let hashed = items
            .items()
            .iter()
            .map(|x| db.eval(params.m(), x))
            .collect::<Result<Vec<_>, _>>()?;
        match build_key(&hashed, params.m()) {
            Ok((key, fingerprint)) => {
                return Ok(RecognizerInstance {
                    params: *params,
                    db,
                    key,
                    fingerprint,
                })
            }
            Err(RecognizerError::DuplicateHash) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(RecognizerError::InitFailed {
        attempts: MAX_INIT_ATTEMPTS,
    })
}

/// Picks `m` with [`select_m`] for the item count and `q`, then runs [`init`].
pub fn init_with_target<R: RngCore + ?Sized>(
    items: &ItemSet,
    q: usize,
    target: f64,
    rng: &mut R,
) -> Result<RecognizerInstance> {
    let n = items
        .items()
        .first()
        .map(FieldElem::width)
        .ok_or_else(|| RecognizerError::InvalidParams("no items".into()))?;
    let m = select_m(items.len() as u64, q as u64, target)?;
    let params = RecognizerParams::new(n, items.len(), q, m)?;
    init(items, &params, rng)
}

/// Computes `p(h_db(x))` from the key.
pub fn test(db: &CoeffVector, key: &Key, x: &FieldElem, params: &RecognizerParams) -> Result<Fingerprint> {
    if db.n() != params.n() || db.len() != params.db_len() {
        return Err(RecognizerError::InvalidParams(format!(
            "database has {} coefficients of {} bits, parameters need {} of {}",
            db.len(),
            db.n(),
            params.db_len(),
            params.n()
        )));
    }
    if key.m() != params.m() || key.items() != params.items() {
        return Err(RecognizerError::KeyShape);
    }
    let hashed = db.eval(params.m(), x)?;
    Ok(Fingerprint(key.eval(hashed.value())?))
}

/// `1 - (1 - N/2^m)^q`, the collision-game bound, evaluated as
/// `-expm1(q * ln_1p(-N/2^m))` to stay accurate when `N/2^m` is tiny.
pub fn compute_epsilon(items: u64, q: u64, m: u16) -> Result<f64> {
    let space = 2f64.powi(i32::from(m));
    if items as f64 >= space {
        return Err(RecognizerError::InvalidParams(format!(
            "need N < 2^m, got N = {items}, m = {m}"
        )));
    }
    let p = items as f64 / space;
    Ok(-(q as f64 * (-p).ln_1p()).exp_m1())
}

/// Smallest `m` with `2^m > N` whose collision bound is at most `target`.
pub fn select_m(items: u64, q: u64, target: f64) -> Result<u16> {
    if !(target > 0.0 && target < 1.0) {
        return Err(RecognizerError::InvalidEpsilon);
    }
    (1u16..1000)
        .filter(|&m| m >= 64 || items < 1u64 << m)
        .find(|&m| compute_epsilon(items, q, m).is_ok_and(|eps| eps <= target))
        .ok_or(RecognizerError::InvalidEpsilon)
}

/// One row of the parameter table.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ParameterRow {
    pub items: usize,
    pub q: usize,
    pub m: u16,
    pub epsilon: f64,
    pub key_bits: u32,
    pub fingerprint_bits: u16,
    pub words: usize,
}

/// Parameter rows for each `N` in `items`, all sharing the smallest `m` that
/// meets `target` for the largest `N`.
pub fn parameter_table(items: &[usize], q: usize, target: f64) -> Result<Vec<ParameterRow>> {
    let max_items = items.iter().copied().max().ok_or_else(|| {
        RecognizerError::InvalidParams("no item counts given".into())
    })?;
    let m = select_m(max_items as u64, q as u64, target)?;
    items
        .iter()
        .map(|&n| {
            if n < 2 {
                return Err(RecognizerError::InvalidParams(format!("N = {n} must exceed 1")));
            }
            let key_bits = (n as u32 - 1) * u32::from(m);
            Ok(ParameterRow {
                items: n,
                q,
                m,
                epsilon: compute_epsilon(n as u64, q as u64, m)?,
                key_bits,
                fingerprint_bits: m,
                words: crate::passcode::words_for_bits(key_bits),
            })
        })
        .collect()
}

/// Formats a positive probability with two significant digits, truncating
/// rather than rounding: `2.384e-4` becomes `"2.3e-4"`.
pub fn format_two_digits(p: f64) -> String {
    if p == 0.0 {
        return "0".into();
    }
    let mut exp = p.log10().floor() as i32;
    let mut tenths = (p / 10f64.powi(exp) * 10.0 + 1e-9).floor() as i64;
    if tenths >= 100 {
        exp += 1;
        tenths /= 10;
    }
    format!("{}.{}e{}", tenths / 10, tenths % 10, exp)
}
