//! Run directory layout, the run manifest and output bookkeeping.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tapelab::tape::{read_directory, read_tape};
use tapelab::{SipId, SymbolDirectory, TapeRecord};

use crate::exit::{not_found, usage};

pub const MANIFEST: &str = "manifest.json";
pub const SYMBOLS: &str = "symbols.csv";
pub const SCENARIO: &str = "scenario.toml";
pub const TRUTH_TAPE: &str = "truth.tape";

pub fn sip_tape_name(sip: SipId) -> String {
    format!("sip_{}.tape", sip.as_str().to_ascii_lowercase())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TapeEntry {
    /// `sip_a`, `sip_b`, `sip_c` or `truth`.
    pub name: String,
    /// Relative to the run directory.
    pub path: String,
    pub sip: Option<SipId>,
    pub records: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub path: String,
    /// Data rows, excluding any header.
    pub rows: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario_name: String,
    pub scenario_hash: String,
    pub seed: u64,
    pub tool_version: String,
    pub tapes: Vec<TapeEntry>,
    pub outputs: BTreeMap<String, OutputEntry>,
    /// Wall-clock milliseconds per stage.
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn load(run_dir: &Path) -> Result<Self> {
        let path = run_dir.join(MANIFEST);
        if !path.is_file() {
            return Err(not_found(format!("no run manifest at {}", path.display())));
        }
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("malformed manifest {}: {e}", path.display())))
    }
}

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut hasher = Sha256::new();
    io::copy(&mut BufReader::with_capacity(1 << 20, File::open(path)?), &mut hasher)?;
    Ok(hex::encode(hasher.finalize()))
}

/// Writes a finished CSV body and returns its manifest entry.
pub fn write_output(dir: &Path, name: &str, bytes: &[u8]) -> Result<OutputEntry> {
    let path = dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    let lines = bytes.iter().filter(|&&b| b == b'\n').count() as u64;
    Ok(OutputEntry { path: name.to_string(), rows: lines.saturating_sub(1) })
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Reads a tape, logging any validation findings.
pub fn load_tape(path: &Path) -> Result<Vec<TapeRecord>> {
    if !path.is_file() {
        return Err(not_found(format!("tape not found: {}", path.display())));
    }
    let tape = read_tape(path).with_context(|| format!("reading tape {}", path.display()))?;
    if !tape.report.is_clean() {
        log::warn!("{}: {} validation issue(s)", path.display(), tape.report.issues.len());
    }
    log::info!("{}: {} records", path.display(), tape.records.len());
    Ok(tape.records)
}

pub fn load_directory(path: &Path) -> Result<SymbolDirectory> {
    if !path.is_file() {
        return Err(not_found(format!("symbol directory not found: {}", path.display())));
    }
    read_directory(path).with_context(|| format!("reading symbol directory {}", path.display()))
}

/// Expands `--tape` arguments: a file is taken as is; a run directory
/// contributes its SIP tapes, or only `only`'s tape when given.
pub fn resolve_tapes(inputs: &[PathBuf], only: Option<SipId>) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            for sip in SipId::ALL.into_iter().filter(|s| only.is_none_or(|o| o == *s)) {
                out.push(input.join(sip_tape_name(sip)));
            }
        } else {
            out.push(input.clone());
        }
    }
    out
}

/// The symbol directory beside the first tape argument.
pub fn default_symbols(inputs: &[PathBuf]) -> Option<PathBuf> {
    let first = inputs.first()?;
    let dir = if first.is_dir() { first.as_path() } else { first.parent().unwrap_or(Path::new(".")) };
    Some(dir.join(SYMBOLS))
}
