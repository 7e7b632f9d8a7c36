//! Binary index cache holding a loaded knowledge base and its reference lists.
//!
//! Layout: 8-byte magic, little-endian `u32` format version, then the
//! bincode-encoded payload. Readers reject any other version so a stale
//! cache is rebuilt instead of misread.

use std::io::{self, Write};

use thiserror::Error;

use crate::kb::{KnowledgeBase, ReferenceLists};

pub const MAGIC: &[u8; 8] = b"KBLXIDX\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("not an index file (bad magic header)")]
    BadMagic,
    #[error("index format version {found} is not supported (expected {expected}); rebuild the index")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt index payload: {0}")]
    Corrupt(#[from] bincode::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn write_index<W: Write>(kb: &KnowledgeBase, lists: &ReferenceLists, mut out: W) -> Result<(), IndexError> {
    out.write_all(MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    bincode::serialize_into(&mut out, &(kb, lists))?;
    out.flush()?;
    Ok(())
}

pub fn encode_index(kb: &KnowledgeBase, lists: &ReferenceLists) -> Vec<u8> {
    let mut buf = Vec::new();
    write_index(kb, lists, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

pub fn read_index(bytes: &[u8]) -> Result<(KnowledgeBase, ReferenceLists), IndexError> {
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err(IndexError::BadMagic);
    }
    let found = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if found != FORMAT_VERSION {
        return Err(IndexError::VersionMismatch { found, expected: FORMAT_VERSION });
    }
    Ok(bincode::deserialize(&bytes[12..])?)
}
