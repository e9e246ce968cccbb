use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;
use serde_json::{json, Value};
use tapelab::analytics::oos::symbol_trades;
use tapelab::analytics::{
    cross_lock_scatter, latency_stats, latency_window_events, oos_table, per_second_aggregate, spread_histogram,
    venue_spread_stats, GroupBy, Metric, OosRow, SeriesGrouping, WindowKinds,
};
use tapelab::nbbo::{count_states, stream_nbbo, TapeOrdering};
use tapelab::tape::read_header;
use tapelab::{Listing, Price, Registry, SymbolDirectory, SymbolInfo, TapeRecord, Timestamp};

use crate::analyze::{scatter_summary, trend_summary};
use crate::exit::{not_found, usage};
use crate::figures::{csv_bytes, latency_histogram_by_exchange, nbbo_per_second, price_per_second, trade_delay_rows};
use crate::files::{self, OutputEntry, RunManifest};

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory written by `simulate`.
    pub run_dir: PathBuf,
    /// Report directory (default: RUN_DIR/report).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Spread histogram bin width in cents.
    #[arg(long, default_value_t = 1)]
    pub bin_width_cents: u32,
}

/// Below this many trades a symbol is too quiet to stand in for a lightly
/// traded stock.
const LIGHT_MIN_TRADES: u64 = 1000;

#[derive(Debug, Serialize)]
struct TableRow<'a> {
    ticker: &'a str,
    percent_out_of_sequence: f64,
    total_trades: u64,
    listing: Listing,
    oos_count: u64,
    ex_trf_percent_out_of_sequence: f64,
    ex_trf_total_trades: u64,
}

fn table_rows(rows: &[OosRow]) -> Vec<TableRow<'_>> {
    rows.iter()
        .map(|r| TableRow {
            ticker: &r.ticker,
            percent_out_of_sequence: r.oos_percent * 100.0,
            total_trades: r.total_trades,
            listing: r.listing,
            oos_count: r.oos_count,
            ex_trf_percent_out_of_sequence: r.ex_trf_oos_percent * 100.0,
            ex_trf_total_trades: r.ex_trf_total_trades,
        })
        .collect()
}

fn table_text(rows: &[OosRow]) -> String {
    let mut s = format!("{:<8} {:>10} {:>12}  {}\n", "Ticker", "% OoS", "Trades", "Listing");
    for r in rows {
        let _ = writeln!(s, "{:<8} {:>10.1} {:>12}  {}", r.ticker, r.oos_percent * 100.0, r.total_trades, r.listing);
    }
    s
}

struct Bundle<'a> {
    dir: PathBuf,
    directory: &'a SymbolDirectory,
    outputs: BTreeMap<String, OutputEntry>,
}

impl Bundle<'_> {
    fn put(&mut self, key: &str, name: String, bytes: &[u8]) -> Result<()> {
        let entry = files::write_output(&self.dir, &name, bytes)?;
        log::info!("wrote {name} ({} rows)", entry.rows);
        self.outputs.insert(key.to_string(), entry);
        Ok(())
    }

    fn rows<T: Serialize>(&mut self, key: &str, name: String, rows: &[T]) -> Result<()> {
        self.put(key, name, &csv_bytes(rows)?)
    }

    fn series(
        &mut self,
        key: &str,
        name: String,
        records: &[&TapeRecord],
        metric: Metric,
        grouping: SeriesGrouping,
        running: bool,
    ) -> Result<()> {
        let session = (Timestamp(0), Timestamp::SESSION_END);
        let mut series = per_second_aggregate(records.iter().copied(), metric, grouping, self.directory, session)?;
        if running {
            series = series.cumulative();
        }
        let mut buf = Vec::new();
        series.write_csv(&mut buf)?;
        self.put(key, name, &buf)
    }
}

/// Loads the run's consolidated tapes after checking every tape the
/// manifest names.
fn load_run(args: &ReportArgs, manifest: &RunManifest) -> Result<Vec<TapeRecord>> {
    let mut records = Vec::new();
    for entry in &manifest.tapes {
        let path = args.run_dir.join(&entry.path);
        if !path.is_file() {
            return Err(not_found(format!("tape {} named in the manifest is missing", path.display())));
        }
        let header = read_header(&path).with_context(|| format!("reading {}", path.display()))?;
        if header.record_count != entry.records {
            return Err(usage(format!(
                "{} holds {} records but the manifest says {}",
                path.display(),
                header.record_count,
                entry.records
            )));
        }
        if entry.sip.is_some() {
            records.extend(files::load_tape(&path)?);
        }
    }
    Ok(records)
}

pub fn run(args: &ReportArgs) -> Result<Value> {
    if args.bin_width_cents == 0 {
        return Err(usage("--bin-width-cents must be at least 1"));
    }
    let manifest = RunManifest::load(&args.run_dir)?;
    let directory = files::load_directory(&args.run_dir.join(files::SYMBOLS))?;
    let records = load_run(args, &manifest)?;
    let registry = Registry::global();
    let out = args.out.clone().unwrap_or_else(|| args.run_dir.join("report"));
    files::create_dir(&out)?;
    let mut bundle = Bundle { dir: out, directory: &directory, outputs: BTreeMap::new() };

    let table = oos_table(&records, &directory)?;
    bundle.rows("table", "table.csv".into(), &table_rows(&table))?;
    bundle.put("table_text", "table.txt".into(), table_text(&table).as_bytes())?;

    let trades: Vec<&TapeRecord> = records.iter().filter(|r| r.is_trade()).collect();
    let latency = latency_stats(trades.iter().copied(), GroupBy::SipExchange, &directory)?;
    bundle.rows("latency_by_sip_exchange", "latency_by_sip_exchange.csv".into(), &latency)?;

    let scatter = cross_lock_scatter(&records, &directory, registry)?;
    bundle.rows("scatter", "scatter.csv".into(), &scatter)?;

    let lookup = |ticker: &str| directory.lookup(ticker).cloned();
    let top: Option<SymbolInfo> = table.first().filter(|r| r.total_trades > 0).and_then(|r| lookup(&r.ticker));
    let light: Option<SymbolInfo> = table
        .iter()
        .skip(1)
        .rev()
        .find(|r| r.total_trades >= LIGHT_MIN_TRADES)
        .or_else(|| table.iter().skip(1).rev().find(|r| r.total_trades > 0))
        .and_then(|r| lookup(&r.ticker));

    let mut top_summary = Value::Null;
    if let Some(sym) = &top {
        let t = &sym.ticker;
        let own: Vec<TapeRecord> = records.iter().filter(|r| r.symbol_id == sym.id).copied().collect();
        let own_refs: Vec<&TapeRecord> = own.iter().collect();
        let own_trades: Vec<&TapeRecord> = own.iter().filter(|r| r.is_trade()).collect();
        let quotes: Vec<&TapeRecord> = own.iter().filter(|r| r.is_quote()).collect();
        let sip_trades = symbol_trades(&own, sym.id, false);

        bundle.rows("price_per_second", format!("price_per_second_{t}.csv"), &price_per_second(&sip_trades))?;
        bundle.series(
            "trades_per_second",
            format!("trades_per_second_{t}.csv"),
            &own_trades,
            Metric::TradeCount,
            SeriesGrouping::None,
            false,
        )?;
        bundle.series(
            "dollars_per_second",
            format!("dollars_per_second_{t}.csv"),
            &own_trades,
            Metric::DollarVolume,
            SeriesGrouping::None,
            false,
        )?;
        bundle.series(
            "dollars_cumulative",
            format!("dollars_cumulative_{t}.csv"),
            &own_trades,
            Metric::DollarVolume,
            SeriesGrouping::None,
            true,
        )?;
        bundle.series(
            "volume_cumulative_by_exchange",
            format!("volume_cumulative_by_exchange_{t}.csv"),
            &own_trades,
            Metric::TradeVolume,
            SeriesGrouping::Exchange,
            true,
        )?;
        bundle.series(
            "quotes_per_second_by_sip",
            format!("quotes_per_second_by_sip_{t}.csv"),
            &quotes,
            Metric::MessageCount,
            SeriesGrouping::Sip,
            false,
        )?;
        bundle.rows(
            "latency_histogram",
            format!("latency_histogram_{t}.csv"),
            &latency_histogram_by_exchange(own_trades.iter().copied(), 100, 100_000),
        )?;

        let nbbo = stream_nbbo(&own, TapeOrdering::SipOrder, registry)?;
        let counts = count_states(&nbbo);
        bundle.rows("nbbo_per_second", format!("nbbo_per_second_{t}.csv"), &nbbo_per_second(&nbbo))?;
        let width = Price(i64::from(args.bin_width_cents) * 100);
        bundle.rows("spread_histogram", format!("spread_histogram_{t}.csv"), &spread_histogram(&nbbo, width))?;
        bundle.rows(
            "venue_spreads",
            format!("venue_spreads_{t}.csv"),
            &venue_spread_stats(&own, TapeOrdering::SipOrder, registry)?,
        )?;

        let mut by_sip = own_refs.clone();
        by_sip.sort_by_key(|r| (r.sip_ts, r.sip_seq));
        let ordered: Vec<TapeRecord> = by_sip.into_iter().copied().collect();
        let windows = latency_window_events(&ordered, WindowKinds::Both)?;
        bundle.rows("windows", format!("windows_{t}.csv"), &windows.histogram)?;
        bundle.rows("sip_vs_exchange_top", format!("sip_vs_exchange_{t}.csv"), &trade_delay_rows(&sip_trades))?;

        top_summary = json!({
            "ticker": t,
            "nbbo_crosses": counts.crosses,
            "nbbo_locks": counts.locks,
            "window_median": windows.median,
            "window_p90": windows.p90,
        });
    }
    if let Some(sym) = &light {
        let trades = symbol_trades(&records, sym.id, false);
        bundle.rows(
            "sip_vs_exchange_light",
            format!("sip_vs_exchange_{}.csv", sym.ticker),
            &trade_delay_rows(&trades),
        )?;
    }

    let trend = trend_summary(&table, false).ok();
    let trend_ex_trf = trend_summary(&table, true).ok();
    let summary = json!({
        "scenario_name": manifest.scenario_name,
        "scenario_hash": manifest.scenario_hash,
        "seed": manifest.seed,
        "symbols": directory.len(),
        "records": records.len(),
        "trend": trend,
        "trend_ex_trf": trend_ex_trf,
        "scatter": scatter_summary(&scatter),
        "top_symbol": top_summary,
        "light_symbol": light.as_ref().map(|s| &s.ticker),
        "outputs": bundle.outputs,
    });
    let text = serde_json::to_string_pretty(&summary)?;
    let path = bundle.dir.join("summary.json");
    std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(summary)
}
