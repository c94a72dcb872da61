//! On-disk cache of sieved tables, keyed by bound and totient orders.

use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gcdstat::ArithTable;
use sha2::{Digest, Sha256};

pub struct Cached {
    pub table: ArithTable,
    pub path: PathBuf,
    pub hit: bool,
    pub sha256: String,
}

pub fn file_name(n_max: u64, orders: &[u32]) -> String {
    let orders: Vec<String> = orders.iter().map(|s| s.to_string()).collect();
    format!("arith-n{n_max}-s{}.bin", orders.join("_"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn normalized(orders: &[u32]) -> Vec<u32> {
    let mut v: Vec<u32> = orders.iter().copied().filter(|&s| s >= 1).collect();
    v.push(1);
    v.sort_unstable();
    v.dedup();
    v
}

/// Finds a cached table covering `n_max` and `orders`, or builds one and
/// stores it under `dir`.
pub fn obtain(dir: &Path, n_max: u64, orders: &[u32]) -> Result<Cached> {
    let orders = normalized(orders);
    if let Some(found) = find_covering(dir, n_max, &orders)? {
        let bytes = fs::read(&found).with_context(|| format!("reading {}", found.display()))?;
        let table = ArithTable::load(&bytes[..]).with_context(|| format!("loading {}", found.display()))?;
        return Ok(Cached {
            table,
            path: found,
            hit: true,
            sha256: sha256_hex(&bytes),
        });
    }
    let table = ArithTable::build(n_max, &orders)?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(file_name(n_max, &orders));
    let tmp = path.with_extension("tmp");
    table.dump(BufWriter::new(fs::File::create(&tmp)?))?;
    fs::rename(&tmp, &path)?;
    let sha256 = sha256_hex(&fs::read(&path)?);
    Ok(Cached {
        table,
        path,
        hit: false,
        sha256,
    })
}

fn find_covering(dir: &Path, n_max: u64, orders: &[u32]) -> Result<Option<PathBuf>> {
    let Ok(entries) = fs::read_dir(dir) else {
        return Ok(None);
    };
    let mut best: Option<(u64, PathBuf)> = None;
    for entry in entries {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("bin") {
            continue;
        }
        let Ok(file) = fs::File::open(&path) else { continue };
        let Ok((n, have)) = ArithTable::read_header(BufReader::new(file)) else {
            continue;
        };
        if n >= n_max && orders.iter().all(|s| have.contains(s)) && best.as_ref().is_none_or(|(b, _)| n < *b) {
            best = Some((n, path));
        }
    }
    Ok(best.map(|(_, p)| p))
}

/// Either a cached table or a fresh in-memory build.
pub fn table_for(cache: Option<&Path>, n_max: u64, orders: &[u32]) -> Result<ArithTable> {
    match cache {
        Some(dir) => Ok(obtain(dir, n_max, orders)?.table),
        None => Ok(ArithTable::build(n_max, &normalized(orders))?),
    }
}
