//! Word passphrases for recognizer keys.
//!
//! A key of `L` bits is read as an unsigned integer and written in base 1449,
//! least significant digit first, one word per digit, words joined by
//! hyphens. Any two words of the list are at Levenshtein distance three or
//! more, so a word with one or two typos is never another valid word, and a
//! single typo always has exactly one nearest list word to suggest.

use std::collections::HashMap;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::recognizer::Key;

/// The list shipped with the crate: 1449 words, pairwise distance >= 3.
pub const SHIPPED_WORDLIST: &str = include_str!("../data/wordlist.txt");
/// EFF short wordlist 2.0, the base of the shipped list.
pub const EFF_SHORT_2_0: &str = include_str!("../data/eff_short_wordlist_2_0.txt");
/// EFF large wordlist, the pool the supplement is drawn from.
pub const EFF_LARGE: &str = include_str!("../data/eff_large_wordlist.txt");

pub const WORDLIST_SIZE: usize = 1449;
/// Seed used to draw the shipped supplement from the surviving pool.
pub const WORDLIST_SEED: u64 = 0x5245_434f_474e_495a;
/// Longest supplement word admitted when building the shipped list.
pub const WORDLIST_MAX_LEN: usize = 7;
/// Minimum pairwise Levenshtein distance the list guarantees.
pub const MIN_DISTANCE: usize = 3;
/// Largest supported key: `N = 5` items at `m = 21` bits.
pub const MAX_KEY_BITS: u32 = 84;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PasscodeError {
    #[error("unknown word {word:?} at position {position}")]
    UnknownWord { position: usize, word: String },
    #[error("expected {expected} words, got {found}")]
    WordCount { expected: usize, found: usize },
    #[error("passphrase encodes a value outside the {bits}-bit key space")]
    OutOfRange { bits: u32 },
    #[error("{0}-bit keys are not supported (at most {MAX_KEY_BITS} bits)")]
    Unsupported(u32),
    #[error("only {available} candidate words survive, {needed} needed")]
    InsufficientPool { available: usize, needed: usize },
    #[error("invalid wordlist: {0}")]
    InvalidList(String),
}

pub type Result<T, E = PasscodeError> = std::result::Result<T, E>;

/// An ordered list of unique lowercase words.
#[derive(Debug, Clone)]
pub struct Wordlist {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Wordlist {
    pub fn new(words: Vec<String>) -> Result<Self> {
        if words.len() < 2 {
            return Err(PasscodeError::InvalidList("need at least two words".into()));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if w.is_empty() || w.contains('-') || w.chars().any(|c| c.is_whitespace()) {
                return Err(PasscodeError::InvalidList(format!("bad word {w:?}")));
            }
            index.entry(w.clone()).or_insert(i);
        }
        Ok(Self { words, index })
    }

    /// One word per line; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_owned)
                .collect(),
        )
    }

    pub fn shipped() -> &'static Wordlist {
        static LIST: OnceLock<Wordlist> = OnceLock::new();
        LIST.get_or_init(|| Wordlist::parse(SHIPPED_WORDLIST).expect("shipped wordlist is well formed"))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// The file form: one word per line, newline-terminated.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.words.len() * 7);
        for w in &self.words {
            out.push_str(w);
            out.push('\n');
        }
        out
    }

    /// The nearest word, if it is within distance two and no other word is
    /// equally near.
    pub fn suggest(&self, word: &str) -> Option<&str> {
        let mut best: Option<(usize, &str)> = None;
        let mut tied = false;
        for w in &self.words {
            let limit = best.map_or(2, |(d, _)| d);
            match levenshtein_within(word, w, limit) {
                Some(d) if best.is_none_or(|(b, _)| d < b) => {
                    best = Some((d, w));
                    tied = false;
                }
                Some(_) => tied = true,
                None => {}
            }
        }
        best.filter(|_| !tied).map(|(_, w)| w)
    }
}

/// Number of base-`radix` digits needed to cover `2^bits` values.
pub fn words_needed(radix: usize, bits: u32) -> usize {
    let target = 1u128.checked_shl(bits);
    let mut space: u128 = 1;
    let mut words = 0;
    loop {
        match target {
            Some(t) if space >= t => return words,
            _ => {}
        }
        match space.checked_mul(radix as u128) {
            Some(s) => space = s,
            None => return words + 1,
        }
        words += 1;
    }
}

/// Words needed for a `bits`-bit key with the shipped list size.
pub fn words_for_bits(bits: u32) -> usize {
    words_needed(WORDLIST_SIZE, bits)
}

/// Writes the low `bits` bits of `value` as hyphen-joined words.
pub fn encode_bits(value: u128, bits: u32, list: &Wordlist) -> Result<String> {
    if bits == 0 || bits > MAX_KEY_BITS {
        return Err(PasscodeError::Unsupported(bits));
    }
    if value >> bits != 0 {
        return Err(PasscodeError::OutOfRange { bits });
    }
    let radix = list.len() as u128;
    let mut rest = value;
    let words: Vec<&str> = (0..words_needed(list.len(), bits))
        .map(|_| {
            let digit = (rest % radix) as usize;
            rest /= radix;
            list.word(digit)
        })
        .collect();
    Ok(words.join("-"))
}

pub fn encode_key(key: &Key, list: &Wordlist) -> Result<String> {
    encode_bits(key.to_bits(), key.bit_len(), list)
}

/// Splits a passphrase into lowercase words. Surrounding whitespace is ignored.
fn split_words(passphrase: &str) -> Vec<String> {
    passphrase
        .trim()
        .split('-')
        .map(|w| w.trim().to_lowercase())
        .collect()
}

/// Reads a passphrase back into the `bits`-bit integer it encodes.
pub fn decode_words(passphrase: &str, bits: u32, list: &Wordlist) -> Result<u128> {
    if bits == 0 || bits > MAX_KEY_BITS {
        return Err(PasscodeError::Unsupported(bits));
    }
    let words = split_words(passphrase);
    let mut digits = Vec::with_capacity(words.len());
    for (position, word) in words.iter().enumerate() {
        let digit = list
            .index_of(word)
            .ok_or_else(|| PasscodeError::UnknownWord {
                position: position + 1,
                word: word.clone(),
            })?;
        digits.push(digit as u128);
    }
    let expected = words_needed(list.len(), bits);
    if digits.len() != expected {
        return Err(PasscodeError::WordCount {
            expected,
            found: digits.len(),
        });
    }
    let radix = list.len() as u128;
    let value = digits.iter().rev().fold(0u128, |acc, &d| acc * radix + d);
    if value >> bits != 0 {
        return Err(PasscodeError::OutOfRange { bits });
    }
    Ok(value)
}

/// Decodes a passphrase into a key for `items` stored items of `m` bits.
pub fn decode_key(passphrase: &str, items: usize, m: u16, list: &Wordlist) -> Result<Key> {
    let bits = (items.saturating_sub(1) as u32) * u32::from(m);
    let value = decode_words(passphrase, bits, list)?;
    Key::from_bits(value, items, m).map_err(|_| PasscodeError::Unsupported(bits))
}

/// Verdict on one completed word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum WordVerdict {
    Accepted,
    UnknownWithSuggestion { suggestion: String },
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordStatus {
    pub position: usize,
    pub word: String,
    #[serde(flatten)]
    pub verdict: WordVerdict,
}

/// Live validation state of a passphrase being typed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntryStatus {
    pub words: Vec<WordStatus>,
    /// The trailing word still being typed, not yet judged.
    pub pending: Option<String>,
    /// Every word judged and accepted, nothing pending.
    pub complete: bool,
}

impl EntryStatus {
    pub fn first_error(&self) -> Option<&WordStatus> {
        self.words.iter().find(|w| w.verdict != WordVerdict::Accepted)
    }
}

fn judge(word: &str, list: &Wordlist) -> WordVerdict {
    if list.index_of(word).is_some() {
        WordVerdict::Accepted
    } else if let Some(s) = list.suggest(word) {
        WordVerdict::UnknownWithSuggestion {
            suggestion: s.to_owned(),
        }
    } else {
        WordVerdict::Unknown
    }
}

fn validate(entry: &str, list: &Wordlist, finished: bool) -> EntryStatus {
    let mut parts = split_words(entry);
    let pending = if finished { None } else { parts.pop() }.filter(|p| !p.is_empty());
    if entry.trim().is_empty() {
        parts.clear();
    }
    let words: Vec<WordStatus> = parts
        .into_iter()
        .enumerate()
        .map(|(i, word)| WordStatus {
            position: i + 1,
            verdict: judge(&word, list),
            word,
        })
        .collect();
    let complete = pending.is_none()
        && !words.is_empty()
        && words.iter().all(|w| w.verdict == WordVerdict::Accepted);
    EntryStatus {
        words,
        pending,
        complete,
    }
}

/// Checks every hyphen-terminated word of a passphrase still being typed.
pub fn validate_entry(partial: &str, list: &Wordlist) -> EntryStatus {
    validate(partial, list, false)
}

/// Checks a fully entered passphrase, including its final word.
pub fn validate_complete(entry: &str, list: &Wordlist) -> EntryStatus {
    validate(entry, list, true)
}

/// Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    strsim::levenshtein(a, b)
}

/// `Some(d)` if `levenshtein(a, b) = d <= limit`, else `None`.
pub fn levenshtein_within(a: &str, b: &str, limit: usize) -> Option<usize> {
    if a.chars().count().abs_diff(b.chars().count()) > limit {
        return None;
    }
    Some(levenshtein(a, b)).filter(|&d| d <= limit)
}

/// Edit distance used when filtering candidate words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EditMetric {
    /// Insertions, deletions and substitutions, each of cost one.
    Levenshtein,
    /// Insertions and deletions only; a substitution costs two.
    Indel,
}

impl EditMetric {
    pub fn distance(self, a: &str, b: &str) -> usize {
        match self {
            EditMetric::Levenshtein => levenshtein(a, b),
            EditMetric::Indel => indel_distance(a, b),
        }
    }
}

/// Insertion/deletion distance: `|a| + |b| - 2 LCS(a, b)`.
pub fn indel_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for ca in &a {
        for (j, cb) in b.iter().enumerate() {
            cur[j + 1] = if ca == cb {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    a.len() + b.len() - 2 * prev[b.len()]
}

/// True if some word of `set` other than `x` is closer than `MIN_DISTANCE`.
fn has_near_word(x: &str, set: &[&str], metric: EditMetric, skip_self: bool) -> bool {
    let len = x.chars().count();
    set.iter().any(|&s| {
        (!skip_self || s != x)
            && len.abs_diff(s.chars().count()) < MIN_DISTANCE
            && metric.distance(x, s) < MIN_DISTANCE
    })
}

/// Pool words far from the base, then far from every other remaining pool
/// word.
///
/// The second filter runs against the pool left after the first one. Both
/// sets of survivors are pairwise far apart and far from the base, so
/// `base ∪ survivors` has minimum distance `MIN_DISTANCE`.
pub fn surviving_pool<'a>(base: &[&str], pool: &[&'a str], metric: EditMetric) -> Vec<&'a str> {
    let far_from_base: Vec<&str> = pool
        .par_iter()
        .copied()
        .filter(|x| !has_near_word(x, base, metric, false))
        .collect();
    far_from_base
        .par_iter()
        .copied()
        .filter(|x| !has_near_word(x, &far_from_base, metric, true))
        .collect()
}

/// Extends `base` to `target` words with a seeded sample of the surviving
/// pool words no longer than `max_len`. The result is sorted.
pub fn build_wordlist<R: RngCore + ?Sized>(
    base: &[&str],
    pool: &[&str],
    max_len: usize,
    target: usize,
    metric: EditMetric,
    rng: &mut R,
) -> Result<Wordlist> {
    let needed = target.checked_sub(base.len()).ok_or_else(|| {
        PasscodeError::InvalidList(format!("base already has {} > {target} words", base.len()))
    })?;
    let mut candidates: Vec<&str> = surviving_pool(base, pool, metric)
        .into_iter()
        .filter(|w| w.chars().count() <= max_len)
        .collect();
    candidates.sort_unstable();
    candidates.dedup();
    if candidates.len() < needed {
        return Err(PasscodeError::InsufficientPool {
            available: candidates.len(),
            needed,
        });
    }
    let mut words: Vec<String> = base.iter().map(|w| w.to_string()).collect();
    words.extend(candidates.choose_multiple(rng, needed).map(|w| w.to_string()));
    words.sort_unstable();
    Wordlist::new(words)
}

/// Rebuilds the shipped list from the EFF sources with the published seed.
pub fn build_shipped_wordlist() -> Result<Wordlist> {
    let (base, pool) = eff_sources();
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(WORDLIST_SEED);
    build_wordlist(
        &base,
        &pool,
        WORDLIST_MAX_LEN,
        WORDLIST_SIZE,
        EditMetric::Levenshtein,
        &mut rng,
    )
}

/// Base and pool for the shipped list: EFF short 2.0 without `yo-yo`, and
/// the EFF large list.
pub fn eff_sources() -> (Vec<&'static str>, Vec<&'static str>) {
    let base = EFF_SHORT_2_0.split_whitespace().filter(|w| *w != "yo-yo").collect();
    let pool = EFF_LARGE.split_whitespace().collect();
    (base, pool)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordlistReport {
    pub size: usize,
    pub duplicates: usize,
    pub min_distance: usize,
    pub closest_pair: Option<(String, String)>,
    pub max_word_len: usize,
    pub passed: bool,
}

/// Full pairwise scan of a list.
pub fn verify_wordlist(list: &Wordlist) -> WordlistReport {
    let words = list.words();
    let duplicates = words.len() - list.index.len();
    let (min_distance, closest_pair) = (0..words.len())
        .into_par_iter()
        .filter_map(|i| {
            words[i + 1..]
                .iter()
                .map(|w| (levenshtein(&words[i], w), w))
                .min_by_key(|(d, _)| *d)
                .map(|(d, w)| (d, Some((words[i].clone(), w.clone()))))
        })
        .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
        .unwrap_or((usize::MAX, None));
    let max_word_len = words.iter().map(|w| w.chars().count()).max().unwrap_or(0);
    WordlistReport {
        size: words.len(),
        duplicates,
        min_distance,
        closest_pair,
        max_word_len,
        passed: words.len() == WORDLIST_SIZE && duplicates == 0 && min_distance >= MIN_DISTANCE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2field::FieldElem;
    use rand::Rng;
    use rand_chacha::ChaCha20Rng;
    use std::collections::HashMap;

    fn list() -> &'static Wordlist {
        Wordlist::shipped()
    }

    /// Plain recursive definition, memoized on suffix positions.
    fn lev_oracle(a: &[char], b: &[char], memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if a.is_empty() {
            return b.len();
        }
        if b.is_empty() {
            return a.len();
        }
        if let Some(&d) = memo.get(&(a.len(), b.len())) {
            return d;
        }
        let d = if a[0] == b[0] {
            lev_oracle(&a[1..], &b[1..], memo)
        } else {
            1 + lev_oracle(&a[1..], b, memo)
                .min(lev_oracle(a, &b[1..], memo))
                .min(lev_oracle(&a[1..], &b[1..], memo))
        };
        memo.insert((a.len(), b.len()), d);
        d
    }

    fn oracle(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        lev_oracle(&a, &b, &mut HashMap::new())
    }

    #[test]
    fn levenshtein_matches_recursive_oracle() {
        let short: Vec<&str> = list().words().iter().map(String::as_str).filter(|w| w.len() <= 6).collect();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let sample: Vec<&str> = short.choose_multiple(&mut rng, 250).copied().collect();
        for a in &sample {
            for b in &sample {
                assert_eq!(levenshtein(a, b), oracle(a, b), "{a} {b}");
            }
        }
        for (a, b, d) in [("", "abc", 3), ("kitten", "sitting", 3), ("flaw", "lawn", 2), ("same", "same", 0)] {
            assert_eq!(levenshtein(a, b), d);
            assert_eq!(oracle(a, b), d);
        }
    }

    #[test]
    fn words_needed_matches_table() {
        assert_eq!(words_for_bits(21), 2);
        assert_eq!(words_for_bits(42), 4);
        assert_eq!(words_for_bits(63), 6);
        assert_eq!(words_for_bits(84), 8);
        assert_eq!(words_for_bits(20), 2);
        assert_eq!(words_needed(2, 8), 8);
    }

    #[test]
    fn encode_small_values() {
        let l = list();
        let w = |i: usize| l.word(i).to_owned();
        assert_eq!(encode_bits(0, 21, l).unwrap(), format!("{}-{}", w(0), w(0)));
        assert_eq!(encode_bits(1448, 21, l).unwrap(), format!("{}-{}", w(1448), w(0)));
        assert_eq!(encode_bits(1449, 21, l).unwrap(), format!("{}-{}", w(0), w(1)));
        let zero = Key::from_coeffs(21, vec![FieldElem::zero(21)]).unwrap();
        assert_eq!(encode_key(&zero, l).unwrap(), format!("{}-{}", w(0), w(0)));
    }

    #[test]
    fn oversized_keys_are_unsupported() {
        assert_eq!(encode_bits(0, 85, list()), Err(PasscodeError::Unsupported(85)));
        assert_eq!(decode_words("a", 105, list()), Err(PasscodeError::Unsupported(105)));
    }

    #[test]
    fn decode_errors() {
        let l = list();
        let phrase = format!("notaword-{}", l.word(0));
        assert_eq!(
            decode_words(&phrase, 21, l),
            Err(PasscodeError::UnknownWord {
                position: 1,
                word: "notaword".into()
            })
        );
        // 1448 + 1448 * 1449 = 2_099_600 >= 2^21
        assert_eq!(1448 + 1448 * 1449, 2_099_600);
        let top = format!("{0}-{0}", l.word(1448));
        assert_eq!(decode_words(&top, 21, l), Err(PasscodeError::OutOfRange { bits: 21 }));
        let three = format!("{0}-{0}-{0}", l.word(3));
        assert_eq!(
            decode_words(&three, 21, l),
            Err(PasscodeError::WordCount { expected: 2, found: 3 })
        );
    }

    #[test]
    fn decode_tolerates_case_and_spaces() {
        let l = list();
        let phrase = encode_bits(123_456, 21, l).unwrap();
        assert_eq!(decode_words(&format!("  {}\n", phrase.to_uppercase()), 21, l).unwrap(), 123_456);
    }

    #[test]
    fn random_round_trips_for_larger_keys() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        for bits in [42u32, 63, 84] {
            for _ in 0..100_000 {
                let v: u128 = rng.gen::<u128>() >> (128 - bits);
                let phrase = encode_bits(v, bits, list()).unwrap();
                assert_eq!(phrase.split('-').count(), words_for_bits(bits));
                assert_eq!(decode_words(&phrase, bits, list()).unwrap(), v);
            }
        }
    }

    #[test]
    fn key_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let coeffs = (0..4).map(|_| FieldElem::random(21, &mut rng)).collect();
        let key = Key::from_coeffs(21, coeffs).unwrap();
        let phrase = encode_key(&key, list()).unwrap();
        assert_eq!(decode_key(&phrase, 5, 21, list()).unwrap(), key);
    }

    #[test]
    fn entry_validation() {
        let l = list();
        let w0 = l.word(10).to_owned();
        let status = validate_complete(&w0, l);
        assert!(status.complete);
        assert_eq!(status.words[0].verdict, WordVerdict::Accepted);

        let mut typo: Vec<char> = w0.chars().collect();
        typo[0] = if typo[0] == 'q' { 'x' } else { 'q' };
        let typo: String = typo.into_iter().collect();
        let status = validate_entry(&format!("{typo}-{w0}-"), l);
        assert_eq!(
            status.words[0].verdict,
            WordVerdict::UnknownWithSuggestion { suggestion: w0.clone() }
        );
        assert_eq!(status.words[1].verdict, WordVerdict::Accepted);
        assert!(!status.complete);

        assert_eq!(validate_complete("zzzzzz", l).words[0].verdict, WordVerdict::Unknown);
        assert!(l.words().iter().all(|w| levenshtein_within("zzzzzz", w, 2).is_none()));
    }

    #[test]
    fn pending_word_is_not_judged() {
        let l = list();
        let status = validate_entry(&format!("{}-ab", l.word(0)), l);
        assert_eq!(status.words.len(), 1);
        assert_eq!(status.pending.as_deref(), Some("ab"));
        assert!(!status.complete);
        assert!(validate_entry("", l).words.is_empty());
    }

    fn corrupt(word: &str, rng: &mut ChaCha20Rng) -> String {
        let mut chars: Vec<char> = word.chars().collect();
        for _ in 0..rng.gen_range(1..=2) {
            let c = (b'a' + rng.gen_range(0..26)) as char;
            match rng.gen_range(0..3) {
                0 if !chars.is_empty() => {
                    let i = rng.gen_range(0..chars.len());
                    chars[i] = c;
                }
                1 if chars.len() > 1 => {
                    chars.remove(rng.gen_range(0..chars.len()));
                }
                _ => chars.insert(rng.gen_range(0..=chars.len()), c),
            }
        }
        chars.into_iter().collect()
    }

    #[test]
    fn two_edit_corruptions_never_hit_another_word() {
        let l = list();
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        for _ in 0..10_000 {
            let i = rng.gen_range(0..l.len());
            let bad = corrupt(l.word(i), &mut rng);
            match l.index_of(&bad) {
                None => {}
                Some(j) => assert_eq!(i, j, "{} -> {bad}", l.word(i)),
            }
        }
    }

    #[test]
    fn build_with_empty_pool_returns_base() {
        let base = ["apple", "zebra", "mango"];
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let out = build_wordlist(&base, &[], 5, 3, EditMetric::Levenshtein, &mut rng).unwrap();
        assert_eq!(out.words(), &["apple", "mango", "zebra"]);
        assert!(matches!(
            build_wordlist(&base, &[], 5, 4, EditMetric::Levenshtein, &mut rng),
            Err(PasscodeError::InsufficientPool { available: 0, needed: 1 })
        ));
    }

    #[test]
    fn build_filters_near_words() {
        let base = ["apple", "zebra"];
        // "apply" is 1 from "apple", "zebu" 2 from "zebra", "grape"/"grate" 1 apart
        let pool = ["apply", "zebu", "grape", "grate", "kiwi", "melon"];
        let survivors = surviving_pool(&base, &pool, EditMetric::Levenshtein);
        assert_eq!(survivors, vec!["kiwi", "melon"]);
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let out = build_wordlist(&base, &pool, 4, 3, EditMetric::Levenshtein, &mut rng).unwrap();
        assert_eq!(out.words(), &["apple", "kiwi", "zebra"]);
    }

    #[test]
    fn single_typo_suggests_original() {
        let l = list();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..2_000 {
            let i = rng.gen_range(0..l.len());
            let mut chars: Vec<char> = l.word(i).chars().collect();
            let c = (b'a' + rng.gen_range(0..26)) as char;
            let j = rng.gen_range(0..chars.len());
            if chars[j] == c {
                continue;
            }
            chars[j] = c;
            let typo: String = chars.into_iter().collect();
            assert_eq!(l.suggest(&typo), Some(l.word(i)), "{typo}");
        }
    }

    #[test]
    fn indel_distance_counts_substitution_twice() {
        assert_eq!(indel_distance("cat", "cut"), 2);
        assert_eq!(indel_distance("cat", "cats"), 1);
        assert_eq!(indel_distance("", "abc"), 3);
        assert_eq!(indel_distance("abc", "cab"), 2);
        assert_eq!(EditMetric::Levenshtein.distance("cat", "cut"), 1);
    }

    #[test]
    fn indel_filter_on_short_words_leaves_214() {
        let (base, pool) = eff_sources();
        assert_eq!(base.len(), 1295);
        assert_eq!(pool.len(), 7776);
        let short: Vec<&str> = surviving_pool(&base, &pool, EditMetric::Indel)
            .into_iter()
            .filter(|w| w.len() <= 5)
            .collect();
        assert_eq!(short.len(), 214);
        for w in ["afoot", "album", "banjo", "cocoa", "kebab", "xbox", "zesty", "zoom"] {
            assert!(short.contains(&w), "{w}");
        }
    }

    #[test]
    fn shipped_list_is_reproducible() {
        let rebuilt = build_shipped_wordlist().unwrap();
        assert_eq!(rebuilt.to_text(), SHIPPED_WORDLIST);
        let (base, _) = eff_sources();
        assert!(base.iter().all(|w| list().index_of(w).is_some()));
        let supplement = list().words().iter().filter(|w| !base.contains(&w.as_str()));
        assert!(supplement.clone().all(|w| w.len() <= WORDLIST_MAX_LEN));
        assert_eq!(supplement.count(), WORDLIST_SIZE - base.len());
    }

    #[test]
    fn verify_flags_problems() {
        let mut words = list().words().to_vec();
        let ok = verify_wordlist(list());
        assert!(ok.passed, "{ok:?}");

        words.push(words[5].clone());
        let dup = verify_wordlist(&Wordlist::new(words.clone()).unwrap());
        assert_eq!(dup.duplicates, 1);
        assert!(!dup.passed);

        words.pop();
        let mut near = words[5].clone();
        near.push('q');
        words.push(near);
        let close = verify_wordlist(&Wordlist::new(words).unwrap());
        assert_eq!(close.min_distance, 1);
        assert!(!close.passed);
    }
}
