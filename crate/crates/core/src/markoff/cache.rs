//! In-memory and on-disk trace caches.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use rug::float::Round;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::farey::{primitive_of, PrimitiveClass};
use crate::precision::Interval;

/// Environment variable overriding the configured cache directory.
pub const CACHE_DIR_ENV: &str = "MRBALL_CACHE_DIR";

/// The environment override wins over the configured directory.
pub fn resolve_cache_dir(configured: Option<&Path>) -> Option<PathBuf> {
    match std::env::var_os(CACHE_DIR_ENV) {
        Some(v) if !v.is_empty() => Some(PathBuf::from(v)),
        _ => configured.map(Path::to_path_buf),
    }
}

/// Concurrent trace cache. Writes are idempotent: a class always maps to
/// the same value at a given precision.
#[derive(Debug, Default)]
pub struct TraceCache {
    exact: RwLock<HashMap<PrimitiveClass, Integer>>,
    approx: RwLock<HashMap<(u32, PrimitiveClass), Interval>>,
}

impl TraceCache {
    pub fn get_exact(&self, c: &PrimitiveClass) -> Option<Integer> {
        self.exact.read().expect("cache lock").get(c).cloned()
    }

    pub fn put_exact(&self, c: PrimitiveClass, t: Integer) {
        self.exact.write().expect("cache lock").insert(c, t);
    }

    pub fn get_approx(&self, bits: u32, c: &PrimitiveClass) -> Option<Interval> {
        self.approx.read().expect("cache lock").get(&(bits, *c)).cloned()
    }

    pub fn put_approx(&self, bits: u32, c: PrimitiveClass, t: Interval) {
        self.approx.write().expect("cache lock").insert((bits, c), t);
    }

    pub fn len(&self) -> usize {
        self.exact.read().expect("cache lock").len() + self.approx.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.exact.write().expect("cache lock").clear();
        self.approx.write().expect("cache lock").clear();
    }
}

/// One line of the trace cache file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub p: i64,
    pub q: i64,
    /// Zero for exact integer traces.
    pub prec_bits: u32,
    pub trace: String,
}

/// JSON Lines trace store for one surface.
#[derive(Clone, Debug)]
pub struct TraceStore {
    path: PathBuf,
}

/// Relative radius assumed for a stored approximation made at `bits`.
fn stored_radius(mid: &Float, bits: u32) -> Float {
    let r = Float::with_val(bits, mid.clone().abs());
    r >> (bits / 2)
}

impl TraceStore {
    pub fn open(dir: &Path, fingerprint: &str) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let digest = Sha256::digest(fingerprint.as_bytes());
        let name = format!("traces-{}.jsonl", &hex::encode(digest)[..16]);
        Ok(Self { path: dir.join(name) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Loads records into `cache`; returns the number loaded.
    pub fn load_into(&self, cache: &TraceCache, modular: bool) -> Result<usize> {
        let file = match File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(0),
            Err(e) => return Err(e.into()),
        };
        let mut n = 0;
        for line in BufReader::new(file).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: TraceRecord = serde_json::from_str(&line)?;
            let c = primitive_of(rec.p, rec.q)?;
            if rec.prec_bits == 0 {
                if !modular {
                    continue;
                }
                let t = Integer::from_str_radix(&rec.trace, 10)
                    .map_err(|_| Error::InvalidInput(format!("bad cached trace {:?}", rec.trace)))?;
                cache.put_exact(c, t);
            } else {
                let bits = rec.prec_bits;
                let mid = Float::parse(&rec.trace)
                    .map(|p| Float::with_val(bits, p))
                    .map_err(|_| Error::InvalidInput(format!("bad cached trace {:?}", rec.trace)))?;
                let rad = stored_radius(&mid, bits);
                cache.put_approx(bits, c, Interval::around(&mid, &rad));
            }
            n += 1;
        }
        Ok(n)
    }

    /// Writes every cache entry, sorted for byte-stable output. Float
    /// entries are only kept when their enclosure is at least as tight as
    /// the radius assumed on reload.
    pub fn save_from(&self, cache: &TraceCache) -> Result<()> {
        let mut recs = Vec::new();
        for (c, t) in cache.exact.read().expect("cache lock").iter() {
            recs.push(TraceRecord {
                p: c.p(),
                q: c.q(),
                prec_bits: 0,
                trace: t.to_string(),
            });
        }
        for ((bits, c), iv) in cache.approx.read().expect("cache lock").iter() {
            let mid = Float::with_val_round(*bits, iv.mid(), Round::Nearest).0;
            let allowed = stored_radius(&mid, *bits) >> 1u32;
            if iv.rad() > allowed {
                continue;
            }
            let digits = (*bits as f64 * std::f64::consts::LOG10_2) as usize + 3;
            recs.push(TraceRecord {
                p: c.p(),
                q: c.q(),
                prec_bits: *bits,
                trace: mid.to_string_radix(10, Some(digits)),
            });
        }
        recs.sort_by_key(|r| (r.prec_bits, r.p, r.q));
        let tmp = self.path.with_extension("jsonl.tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            for r in &recs {
                serde_json::to_writer(&mut w, r)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        fs::rename(&tmp, &self.path)?;
        Ok(())
    }
}
