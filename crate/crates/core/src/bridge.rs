//! JSON messages for a user interface talking to the recognizer.
//!
//! Every request is an object with a `kind` and an optional `id`; the
//! response carries the same `id`. Responses are canonical JSON (sorted
//! keys, no whitespace) and never contain the passphrase or the words the
//! user typed.
//!
//! ```text
//! {"kind":"init","domains":[...],"q":100,"eps":0.0003}
//! {"kind":"check","dbBase64":"...","passphrase":"...","domain":"..."}
//! {"kind":"validate","partial":"word-word-wo"}
//! ```

use std::collections::HashSet;

use data_encoding::BASE64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::onionaddr::parse_onion;
use crate::passcode::{decode_key, encode_key, validate_complete, validate_entry, PasscodeError, WordVerdict, Wordlist};
use crate::recognizer::{init_with_target, ItemSet, RecognizerError, RecognizerInstance};
use crate::store::{decode_db, encode_db, StoreError};
use crate::visualhash::{scene_of, svg_of, Scene};

pub const DEFAULT_Q: usize = 100;
pub const DEFAULT_EPS: f64 = 3e-4;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Request {
    Init {
        domains: Vec<String>,
        q: Option<usize>,
        eps: Option<f64>,
        /// Fixed seed as hex. For tests only.
        seed: Option<String>,
    },
    Check {
        db_base64: String,
        passphrase: String,
        domain: String,
    },
    Validate {
        partial: String,
    },
}

/// Verdict on one typed word, without the word itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WordReport {
    pub position: usize,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suggestion: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Response {
    InitResult {
        db_base64: String,
        passphrase_words: Vec<String>,
        fingerprint_hex: String,
        scene_json: Value,
        svg: String,
    },
    CheckResult {
        fingerprint_hex: String,
        scene_json: Value,
        svg: String,
        word_status: Vec<WordReport>,
    },
    ValidateResult {
        words: Vec<WordReport>,
        pending: bool,
        complete: bool,
    },
    Error {
        code: String,
        message: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        position: Option<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        suggestion: Option<String>,
    },
}

impl Response {
    fn error(code: &str, message: impl Into<String>) -> Self {
        Response::Error {
            code: code.into(),
            message: message.into(),
            position: None,
            suggestion: None,
        }
    }

    fn error_at(code: &str, message: impl Into<String>, position: usize) -> Self {
        Response::Error {
            code: code.into(),
            message: message.into(),
            position: Some(position),
            suggestion: None,
        }
    }
}

/// Parses a hex seed such as `"0x2a"` or `"2a"`.
pub fn parse_seed(text: &str) -> Option<u64> {
    let t = text.trim();
    let t = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")).unwrap_or(t);
    u64::from_str_radix(t, 16).ok()
}

/// Generator for `init`: seeded when a seed is given, else from the OS.
pub fn init_rng(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    }
}

/// The passphrase, scene and picture for a freshly built recognizer.
pub struct Setup {
    pub instance: RecognizerInstance,
    pub passphrase: String,
    pub scene: Scene,
    pub svg: String,
}

/// Builds a recognizer for `domains`, shared by the command line and the
/// bridge so both give the same output for the same seed.
pub fn setup(domains: &[String], q: usize, eps: f64, seed: Option<u64>) -> Result<Setup, Response> {
    let mut seen = HashSet::new();
    let mut items = Vec::with_capacity(domains.len());
    for (i, d) in domains.iter().enumerate() {
        let item = parse_onion(d).map_err(|e| Response::error_at("invalid-domain", e.to_string(), i + 1))?;
        if !seen.insert(item) {
            return Err(Response::error_at("duplicate-domain", format!("domain {} repeats an earlier one", i + 1), i + 1));
        }
        items.push(item);
    }
    if items.len() < 2 {
        return Err(Response::error("invalid-params", "at least two domains are needed"));
    }
    let set = ItemSet::new(items).map_err(|e| Response::error("invalid-params", e.to_string()))?;
    let instance = init_with_target(&set, q, eps, &mut init_rng(seed)).map_err(recognizer_error)?;
    let passphrase = encode_key(instance.key(), Wordlist::shipped())
        .map_err(|e| Response::error("invalid-params", e.to_string()))?;
    let scene = scene_of(instance.fingerprint()).map_err(|e| Response::error("invalid-params", e.to_string()))?;
    let svg = svg_of(&scene);
    Ok(Setup {
        instance,
        passphrase,
        scene,
        svg,
    })
}

fn recognizer_error(e: RecognizerError) -> Response {
    match e {
        RecognizerError::InitFailed { .. } => Response::error("init-failed", e.to_string()),
        _ => Response::error("invalid-params", e.to_string()),
    }
}

fn store_error(e: StoreError) -> Response {
    match e {
        StoreError::NotADatabase => Response::error("not-a-database", e.to_string()),
        StoreError::InvalidParams(_) => Response::error("invalid-params", e.to_string()),
        _ => Response::error("corrupt-database", e.to_string()),
    }
}

fn passcode_error(e: PasscodeError) -> Response {
    match e {
        PasscodeError::UnknownWord { position, .. } => {
            Response::error_at("unknown-word", format!("word {position} is not in the wordlist"), position)
        }
        PasscodeError::WordCount { .. } => Response::error("word-count", e.to_string()),
        PasscodeError::OutOfRange { .. } => Response::error("out-of-range", e.to_string()),
        _ => Response::error("invalid-params", e.to_string()),
    }
}

fn word_reports(statuses: &[crate::passcode::WordStatus]) -> Vec<WordReport> {
    statuses
        .iter()
        .map(|w| match &w.verdict {
            WordVerdict::Accepted => WordReport {
                position: w.position,
                status: "accepted",
                suggestion: None,
            },
            WordVerdict::UnknownWithSuggestion { suggestion } => WordReport {
                position: w.position,
                status: "unknown-with-suggestion",
                suggestion: Some(suggestion.clone()),
            },
            WordVerdict::Unknown => WordReport {
                position: w.position,
                status: "unknown",
                suggestion: None,
            },
        })
        .collect()
}

fn init(domains: &[String], q: Option<usize>, eps: Option<f64>, seed: Option<&str>) -> Response {
    let seed = match seed.map(|s| parse_seed(s).ok_or(s)) {
        None => None,
        Some(Ok(s)) => Some(s),
        Some(Err(s)) => return Response::error("bad-request", format!("seed {s:?} is not hex")),
    };
    let setup = match setup(domains, q.unwrap_or(DEFAULT_Q), eps.unwrap_or(DEFAULT_EPS), seed) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let db = match encode_db(setup.instance.params(), setup.instance.db()) {
        Ok(b) => b,
        Err(e) => return store_error(e),
    };
    Response::InitResult {
        db_base64: BASE64.encode(&db),
        passphrase_words: setup.passphrase.split('-').map(str::to_owned).collect(),
        fingerprint_hex: setup.instance.fingerprint().to_hex(),
        scene_json: serde_json::to_value(&setup.scene).expect("scene serializes"),
        svg: setup.svg,
    }
}

fn check(db_base64: &str, passphrase: &str, domain: &str) -> Response {
    let bytes = match BASE64.decode(db_base64.trim().as_bytes()) {
        Ok(b) => b,
        Err(e) => return Response::error("corrupt-database", format!("bad base64: {e}")),
    };
    let (params, db) = match decode_db(&bytes) {
        Ok(v) => v,
        Err(e) => return store_error(e),
    };
    let x = match parse_onion(domain) {
        Ok(x) => x,
        Err(e) => return Response::error("invalid-domain", e.to_string()),
    };
    let list = Wordlist::shipped();
    let status = validate_complete(passphrase, list);
    if let Some(bad) = status.first_error() {
        let suggestion = match &bad.verdict {
            WordVerdict::UnknownWithSuggestion { suggestion } => Some(suggestion.clone()),
            _ => None,
        };
        return Response::Error {
            code: "unknown-word".into(),
            message: format!("word {} is not in the wordlist", bad.position),
            position: Some(bad.position),
            suggestion,
        };
    }
    let key = match decode_key(passphrase, params.items(), params.m(), list) {
        Ok(k) => k,
        Err(e) => return passcode_error(e),
    };
    let fp = match crate::recognizer::test(&db, &key, &x, &params) {
        Ok(fp) => fp,
        Err(e) => return recognizer_error(e),
    };
    let scene = match scene_of(&fp) {
        Ok(s) => s,
        Err(e) => return Response::error("invalid-params", e.to_string()),
    };
    Response::CheckResult {
        fingerprint_hex: fp.to_hex(),
        svg: svg_of(&scene),
        scene_json: serde_json::to_value(&scene).expect("scene serializes"),
        word_status: word_reports(&status.words),
    }
}

fn validate(partial: &str) -> Response {
    let status = validate_entry(partial, Wordlist::shipped());
    Response::ValidateResult {
        words: word_reports(&status.words),
        pending: status.pending.is_some(),
        complete: status.complete,
    }
}

pub fn handle(request: &Request) -> Response {
    match request {
        Request::Init { domains, q, eps, seed } => init(domains, *q, *eps, seed.as_deref()),
        Request::Check {
            db_base64,
            passphrase,
            domain,
        } => check(db_base64, passphrase, domain),
        Request::Validate { partial } => validate(partial),
    }
}

/// Handles one JSON request and returns the canonical JSON response.
pub fn handle_json(text: &str) -> String {
    let parsed: Result<Value, _> = serde_json::from_str(text);
    let (id, response) = match parsed {
        Err(e) => (None, Response::error("bad-request", e.to_string())),
        Ok(value) => {
            let id = value.get("id").cloned();
            let response = match serde_json::from_value::<Request>(value) {
                Ok(req) => handle(&req),
                // serde messages quote offending values; keep them out
                Err(_) => Response::error("bad-request", "unrecognized request"),
            };
            (id, response)
        }
    };
    let mut out = serde_json::to_value(&response).expect("response serializes");
    if let (Some(id), Value::Object(map)) = (id, &mut out) {
        map.insert("id".into(), id);
    }
    serde_json::to_string(&out).expect("value serializes")
}
