//! On-disk cache of `w`-windows.
//!
//! One file per window, named `<fingerprint>-<lo>-<hi>-v<version>.wwin`.
//! Layout, little-endian:
//!
//! | bytes  | field                         |
//! |--------|-------------------------------|
//! | 0..2   | magic `b"WW"`                 |
//! | 2..4   | format version (u16)          |
//! | 4..10  | `lo` (u48)                    |
//! | 10..16 | `hi` (u48)                    |
//! | 16..   | `hi - lo` cells of `w(n)`, u8 |

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::window::WWindow;
use crate::error::{Error, Result};

pub const CACHE_MAGIC: [u8; 2] = *b"WW";
pub const CACHE_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;

#[derive(Clone, Debug)]
pub struct WindowCache {
    dir: PathBuf,
}

fn put_u48(buf: &mut [u8], v: u64) {
    buf.copy_from_slice(&v.to_le_bytes()[..6]);
}

fn get_u48(buf: &[u8]) -> u64 {
    let mut b = [0u8; 8];
    b[..6].copy_from_slice(buf);
    u64::from_le_bytes(b)
}

pub fn encode(window: &WWindow) -> Vec<u8> {
    let mut out = vec![0u8; HEADER_LEN + window.values.len()];
    out[0..2].copy_from_slice(&CACHE_MAGIC);
    out[2..4].copy_from_slice(&CACHE_VERSION.to_le_bytes());
    put_u48(&mut out[4..10], window.lo);
    put_u48(&mut out[10..16], window.hi);
    out[HEADER_LEN..].copy_from_slice(&window.values);
    out
}

/// Returns `(lo, hi, values)`.
pub fn decode(bytes: &[u8]) -> std::result::Result<(u64, u64, Vec<u8>), String> {
    if bytes.len() < HEADER_LEN {
        return Err("truncated header".into());
    }
    if bytes[0..2] != CACHE_MAGIC {
        return Err("bad magic".into());
    }
    let version = u16::from_le_bytes([bytes[2], bytes[3]]);
    if version != CACHE_VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let lo = get_u48(&bytes[4..10]);
    let hi = get_u48(&bytes[10..16]);
    if hi < lo || (hi - lo) as usize != bytes.len() - HEADER_LEN {
        return Err(format!("payload length does not match [{lo}, {hi})"));
    }
    Ok((lo, hi, bytes[HEADER_LEN..].to_vec()))
}

impl WindowCache {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, fingerprint: u64, lo: u64, hi: u64) -> PathBuf {
        self.dir.join(format!("{fingerprint:016x}-{lo}-{hi}-v{CACHE_VERSION}.wwin"))
    }

    pub fn load(&self, fingerprint: u64, lo: u64, hi: u64) -> Result<Option<Vec<u8>>> {
        let path = self.path_for(fingerprint, lo, hi);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let (flo, fhi, values) = decode(&bytes).map_err(|reason| Error::Cache { path: path.clone(), reason })?;
        if (flo, fhi) != (lo, hi) {
            return Err(Error::Cache { path, reason: format!("header says [{flo}, {fhi})") });
        }
        Ok(Some(values))
    }

    /// Writes through a temporary file and renames, so an interrupted run never
    /// leaves a partial window behind.
    pub fn store(&self, window: &WWindow) -> Result<()> {
        let path = self.path_for(window.rule_fingerprint, window.lo, window.hi);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&encode(window))?;
        }
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// Number of cached window files.
    pub fn entries(&self) -> Result<usize> {
        let mut count = 0;
        for entry in fs::read_dir(&self.dir)? {
            if entry?.path().extension().is_some_and(|e| e == "wwin") {
                count += 1;
            }
        }
        Ok(count)
    }
}
