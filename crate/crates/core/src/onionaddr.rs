//! Onion service (v3) addresses and the 256-bit items they map to.
//!
//! An address label is the base32 encoding of `pubkey || checksum || version`
//! where `checksum = SHA3-256(".onion checksum" || pubkey || version)[..2]`
//! and `version = 3`. The recognizer stores the raw 32-byte public key, so
//! different spellings of one address (case, scheme, subdomains) are one item.

use std::fmt;
use std::str::FromStr;

use data_encoding::BASE32_NOPAD;
use sha3::{Digest, Sha3_256};
use thiserror::Error;

use crate::gf2field::FieldElem;

pub const LABEL_LEN: usize = 56;
pub const PUBKEY_LEN: usize = 32;
pub const VERSION: u8 = 3;
/// Item width in bits: one public key.
pub const ITEM_BITS: u16 = 256;

const CHECKSUM_PREFIX: &[u8] = b".onion checksum";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OnionError {
    #[error("onion label must be {LABEL_LEN} characters, found {0}")]
    Length(usize),
    #[error("character {0:?} is not in the base32 alphabet")]
    Alphabet(char),
    #[error("unsupported onion address version {0}")]
    Version(u8),
    #[error("onion address checksum mismatch")]
    Checksum,
    #[error("public key must be {PUBKEY_LEN} bytes, found {0}")]
    KeyLength(usize),
}

/// A v3 onion service address, held as its public key.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct OnionAddress {
    pubkey: [u8; PUBKEY_LEN],
}

fn checksum(pubkey: &[u8; PUBKEY_LEN]) -> [u8; 2] {
    let mut h = Sha3_256::new();
    h.update(CHECKSUM_PREFIX);
    h.update(pubkey);
    h.update([VERSION]);
    let digest = h.finalize();
    [digest[0], digest[1]]
}

/// Reduces a domain, URL or bare label to its 56-character onion label.
fn extract_label(text: &str) -> String {
    let mut s = text.trim().to_ascii_lowercase();
    if let Some(i) = s.find("://") {
        s.drain(..i + 3);
    }
    if let Some(i) = s.find(['/', '?', '#']) {
        s.truncate(i);
    }
    if let Some(i) = s.rfind('@') {
        s.drain(..=i);
    }
    if let Some(i) = s.find(':') {
        s.truncate(i);
    }
    let s = s.trim_end_matches('.');
    let s = s.strip_suffix(".onion").unwrap_or(s);
    s.rsplit('.').next().unwrap_or("").to_owned()
}

impl OnionAddress {
    pub fn from_pubkey(pubkey: [u8; PUBKEY_LEN]) -> Self {
        Self { pubkey }
    }

    pub fn from_pubkey_slice(pubkey: &[u8]) -> Result<Self, OnionError> {
        let pubkey: [u8; PUBKEY_LEN] = pubkey
            .try_into()
            .map_err(|_| OnionError::KeyLength(pubkey.len()))?;
        Ok(Self { pubkey })
    }

    /// Parses a bare label, a domain (with subdomains) or a URL.
    pub fn parse(text: &str) -> Result<Self, OnionError> {
        let label = extract_label(text);
        let len = label.chars().count();
        if len != LABEL_LEN {
            return Err(OnionError::Length(len));
        }
        if let Some(c) = label.chars().find(|c| !matches!(c, 'a'..='z' | '2'..='7')) {
            return Err(OnionError::Alphabet(c));
        }
        let raw = BASE32_NOPAD
            .decode(label.to_ascii_uppercase().as_bytes())
            .map_err(|_| OnionError::Length(len))?;
        debug_assert_eq!(raw.len(), PUBKEY_LEN + 3);
        if raw[34] != VERSION {
            return Err(OnionError::Version(raw[34]));
        }
        let pubkey: [u8; PUBKEY_LEN] = raw[..PUBKEY_LEN].try_into().expect("35-byte payload");
        if raw[32..34] != checksum(&pubkey) {
            return Err(OnionError::Checksum);
        }
        Ok(Self { pubkey })
    }

    pub fn pubkey(&self) -> &[u8; PUBKEY_LEN] {
        &self.pubkey
    }

    /// The lowercase 56-character label, without `.onion`.
    pub fn label(&self) -> String {
        let mut raw = [0u8; PUBKEY_LEN + 3];
        raw[..PUBKEY_LEN].copy_from_slice(&self.pubkey);
        raw[32..34].copy_from_slice(&checksum(&self.pubkey));
        raw[34] = VERSION;
        BASE32_NOPAD.encode(&raw).to_ascii_lowercase()
    }

    /// The 256-bit recognizer item: the public key read big-endian.
    pub fn item(&self) -> FieldElem {
        FieldElem::from_be_bytes(&self.pubkey, ITEM_BITS).expect("32 bytes is 256 bits")
    }
}

impl fmt::Display for OnionAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.onion", self.label())
    }
}

impl fmt::Debug for OnionAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OnionAddress({self})")
    }
}

impl FromStr for OnionAddress {
    type Err = OnionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// Parses any accepted spelling of an address into its 256-bit item.
pub fn parse_onion(text: &str) -> Result<FieldElem, OnionError> {
    OnionAddress::parse(text).map(|a| a.item())
}

/// Canonical `<label>.onion` domain for a 32-byte public key.
pub fn encode_onion(pubkey: &[u8]) -> Result<String, OnionError> {
    OnionAddress::from_pubkey_slice(pubkey).map(|a| a.to_string())
}
