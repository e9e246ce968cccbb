use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use tapelab::sim::{consolidate, generate_events, scenario_preset, SimConfig};
use tapelab::tape::{write_directory, write_tape};
use tapelab::SipId;

use crate::exit::usage;
use crate::files::{self, OutputEntry, RunManifest, TapeEntry};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario TOML file.
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in scenario: typical_day or stress_open.
    #[arg(long)]
    pub preset: Option<String>,
    /// Overrides the scenario seed (presets default to 42).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run directory to create or overwrite.
    #[arg(long)]
    pub out: PathBuf,
}

fn load_config(args: &SimulateArgs) -> Result<SimConfig> {
    let mut config = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            SimConfig::from_toml(&text)?
        }
        (None, Some(name)) => scenario_preset(name, args.seed.unwrap_or(42))?,
        (None, None) => return Err(usage("one of --config or --preset is required")),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn run(args: &SimulateArgs) -> Result<RunManifest> {
    let config = load_config(args)?;
    let directory = config.directory()?;
    let hash = config.scenario_hash();
    let out = args.out.as_path();
    files::create_dir(out)?;
    let mut timings = BTreeMap::new();

    log::info!("generating {} ({} symbols, seed {})", config.scenario_name, config.symbols.len(), config.seed);
    let t = Instant::now();
    let truth = generate_events(&config)?;
    timings.insert("generate".to_string(), millis(t));

    let t = Instant::now();
    let sips = consolidate(&truth, &directory, &config.latency, config.seed)?;
    timings.insert("consolidate".to_string(), millis(t));
    log::info!("{} events consolidated", truth.len());

    let t = Instant::now();
    let mut tapes = Vec::with_capacity(4);
    for sip in SipId::ALL {
        let name = files::sip_tape_name(sip);
        tapes.push(write_one(out, &name, Some(sip), &sips.tape(sip).records, &directory, hash)?);
    }
    tapes.push(write_one(out, files::TRUTH_TAPE, None, &truth, &directory, hash)?);

    let mut outputs = BTreeMap::new();
    let symbols_path = out.join(files::SYMBOLS);
    write_directory(&symbols_path, &directory).with_context(|| format!("writing {}", symbols_path.display()))?;
    outputs.insert("symbols".to_string(), OutputEntry { path: files::SYMBOLS.into(), rows: directory.len() as u64 });
    let scenario = config.to_toml();
    fs::write(out.join(files::SCENARIO), &scenario).with_context(|| format!("writing {}", files::SCENARIO))?;
    outputs.insert(
        "scenario".to_string(),
        OutputEntry { path: files::SCENARIO.into(), rows: scenario.lines().count() as u64 },
    );
    timings.insert("write".to_string(), millis(t));

    let manifest = RunManifest {
        scenario_name: config.scenario_name.clone(),
        scenario_hash: hex::encode(hash),
        seed: config.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        tapes,
        outputs,
        timings_ms: timings,
    };
    let path = out.join(files::MANIFEST);
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(manifest)
}

fn write_one(
    out: &Path,
    name: &str,
    sip: Option<SipId>,
    records: &[tapelab::TapeRecord],
    directory: &tapelab::SymbolDirectory,
    hash: [u8; 32],
) -> Result<TapeEntry> {
    let path = out.join(name);
    let n = write_tape(&path, records, directory, hash).with_context(|| format!("writing {}", path.display()))?;
    let digest = files::sha256_file(&path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(TapeEntry {
        name: name.trim_end_matches(".tape").to_string(),
        path: name.to_string(),
        sip,
        records: n,
        sha256: digest,
    })
}
