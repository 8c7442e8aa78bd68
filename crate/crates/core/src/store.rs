//! On-disk form of the public database.
//!
//! ```text
//! "RCGZ" | version u8 = 1 | n u16 | m u8 | N u8 | q u16 | a_0 .. a_{q+N-1} | crc32
//! ```
//!
//! Integers are big-endian, each coefficient takes `ceil(n/8)` bytes and the
//! CRC-32 covers every byte before it. Only `db` and the parameters are ever
//! written: never the key, the fingerprint or a stored item.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::gf2field::FieldElem;
use crate::recognizer::{RecognizerError, RecognizerInstance, RecognizerParams};
use crate::uhash::CoeffVector;

pub const MAGIC: &[u8; 4] = b"RCGZ";
pub const FORMAT_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 11;
pub const CRC_LEN: usize = 4;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("not a recognizer database")]
    NotADatabase,
    #[error("database is corrupt: {0}")]
    Corrupt(String),
    #[error("unsupported database format version {0}")]
    UnsupportedVersion(u8),
    #[error("invalid parameters: {0}")]
    InvalidParams(#[source] RecognizerError),
    #[error("parameters do not fit the file format: {0}")]
    Unencodable(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

/// File size for the given parameters.
pub fn file_len(params: &RecognizerParams) -> usize {
    HEADER_LEN + params.db_len() * usize::from(params.n()).div_ceil(8) + CRC_LEN
}

/// Serializes `db` with its parameters.
pub fn encode_db(params: &RecognizerParams, db: &CoeffVector) -> Result<Vec<u8>> {
    let m = u8::try_from(params.m()).map_err(|_| StoreError::Unencodable(format!("m = {}", params.m())))?;
    let items = u8::try_from(params.items())
        .map_err(|_| StoreError::Unencodable(format!("N = {}", params.items())))?;
    let q = u16::try_from(params.q()).map_err(|_| StoreError::Unencodable(format!("q = {}", params.q())))?;
    if db.n() != params.n() || db.len() != params.db_len() {
        return Err(StoreError::Unencodable("database does not match its parameters".into()));
    }
    let mut out = Vec::with_capacity(file_len(params));
    out.extend_from_slice(MAGIC);
    out.push(FORMAT_VERSION);
    out.extend_from_slice(&params.n().to_be_bytes());
    out.push(m);
    out.push(items);
    out.extend_from_slice(&q.to_be_bytes());
    out.extend_from_slice(&db.to_bytes());
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_be_bytes());
    Ok(out)
}

/// Parses and validates a database file's bytes.
pub fn decode_db(bytes: &[u8]) -> Result<(RecognizerParams, CoeffVector)> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(StoreError::NotADatabase);
    }
    if bytes.len() < HEADER_LEN + CRC_LEN {
        return Err(StoreError::Corrupt(format!("truncated at {} bytes", bytes.len())));
    }
    let (body, crc) = bytes.split_at(bytes.len() - CRC_LEN);
    let stored = u32::from_be_bytes(crc.try_into().expect("four bytes"));
    if crc32fast::hash(body) != stored {
        return Err(StoreError::Corrupt("checksum mismatch".into()));
    }
    if body[4] != FORMAT_VERSION {
        return Err(StoreError::UnsupportedVersion(body[4]));
    }
    let n = u16::from_be_bytes([body[5], body[6]]);
    let m = u16::from(body[7]);
    let items = usize::from(body[8]);
    let q = usize::from(u16::from_be_bytes([body[9], body[10]]));
    let params = RecognizerParams::new(n, items, q, m).map_err(StoreError::InvalidParams)?;
    if bytes.len() != file_len(&params) {
        return Err(StoreError::Corrupt(format!(
            "expected {} bytes, found {}",
            file_len(&params),
            bytes.len()
        )));
    }
    let width = usize::from(n).div_ceil(8);
    let coeffs = body[HEADER_LEN..]
        .chunks_exact(width)
        .map(|c| FieldElem::from_be_bytes(c, n))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| StoreError::Corrupt(e.to_string()))?;
    let db = CoeffVector::from_coeffs(n, coeffs).map_err(|e| StoreError::Corrupt(e.to_string()))?;
    Ok((params, db))
}

/// Writes the instance's public part to `path`, atomically.
pub fn save_db(inst: &RecognizerInstance, path: &Path) -> Result<()> {
    write_atomic(path, &encode_db(inst.params(), inst.db())?)
}

/// Reads and validates a database file.
pub fn load_db(path: &Path) -> Result<(RecognizerParams, CoeffVector)> {
    let bytes = fs::read(path).map_err(|source| StoreError::Io {
        path: path.to_owned(),
        source,
    })?;
    decode_db(&bytes)
}

/// Writes through a temporary file in the target directory, then renames it
/// over `path`, so readers see the old or the new file and never a mix.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| StoreError::Io {
        path: path.to_owned(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
