//! Recognizers: password-keyed fingerprints over a hidden set of onion
//! service addresses.
//!
//! A recognizer stores a public, random database `db` of field elements and
//! hands the user a short key (as a word passphrase) and an `m`-bit
//! fingerprint (as a picture). Every stored address maps to the same
//! fingerprint under the key; any other address maps to it only with small
//! probability; and `db` is drawn independently of the stored set, so it
//! reveals nothing about which addresses were stored.
//!
//! The pipeline is `address -> 256-bit item -> universal hash -> m-bit value
//! -> fingerprint polynomial -> fingerprint -> visual hash`.

pub mod bridge;
pub mod gamebench;
pub mod gf2field;
pub mod onionaddr;
pub mod passcode;
pub mod recognizer;
pub mod store;
pub mod uhash;
pub mod visualhash;

pub use gf2field::{FieldElem, FieldSpec};
pub use recognizer::{Fingerprint, ItemSet, Key, RecognizerInstance, RecognizerParams};
pub use uhash::CoeffVector;
