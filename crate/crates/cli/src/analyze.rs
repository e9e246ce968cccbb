use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::{Args, Subcommand, ValueEnum};
use serde_json::{json, Value};
use tapelab::analytics::latency::summarize;
use tapelab::analytics::oos::symbol_trades;
use tapelab::analytics::{
    cross_lock_scatter, detect_out_of_sequence, fit_trend, latency_stats, latency_window_events, oos_table,
    per_second_aggregate, returns_compare, spearman, spread_histogram, venue_spread_stats, GroupBy, Metric,
    SeriesGrouping, WindowKinds,
};
use tapelab::nbbo::{count_states, stream_nbbo, write_nbbo_csv, TapeOrdering};
use tapelab::{Price, Registry, SymbolDirectory, SymbolInfo, TapeRecord, Timestamp};

use crate::exit::{not_found, usage};
use crate::figures::{csv_bytes, latency_histogram_by_exchange, trade_delay_rows};
use crate::files::{self, OutputEntry};

#[derive(Debug, Args)]
pub struct Input {
    /// Tape file or run directory; repeatable.
    #[arg(long = "tape", required = true)]
    pub tapes: Vec<PathBuf>,
    /// Symbol directory CSV (default: symbols.csv beside the first tape).
    #[arg(long)]
    pub symbols: Option<PathBuf>,
    /// Directory for CSV outputs.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Exchange-to-SIP latency summaries.
    Latency(LatencyArgs),
    /// Trades reported out of exchange-time sequence for one symbol.
    Oos(OosArgs),
    /// NBBO replay, crosses, locks and spreads for one symbol.
    Nbbo(NbboArgs),
    /// Reports arriving inside each message's latency window.
    Windows(WindowsArgs),
    /// Per-second activity series.
    Descriptive(DescriptiveArgs),
    /// Linear fit of out-of-sequence trades against total trades.
    Trend(TrendArgs),
    /// Trade-to-trade returns in SIP order versus exchange order.
    Returns(ReturnsArgs),
    /// Crosses and locks against quote traffic for every symbol.
    Scatter(ScatterArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LatencyGrouping {
    Sip,
    Exchange,
    SipExchange,
}

#[derive(Debug, Args)]
pub struct LatencyArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long)]
    pub symbol: Option<String>,
    #[arg(long, value_enum, default_value_t = LatencyGrouping::SipExchange)]
    pub group_by: LatencyGrouping,
    /// Include quotes; trades only by default.
    #[arg(long)]
    pub include_quotes: bool,
    /// Exclude trade reporting facility prints.
    #[arg(long)]
    pub ex_trf: bool,
    /// Histogram bin width in microseconds.
    #[arg(long, default_value_t = 100)]
    pub bin_us: i64,
    /// Histogram truncation point in microseconds.
    #[arg(long, default_value_t = 100_000)]
    pub max_us: i64,
}

#[derive(Debug, Args)]
pub struct OosArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long)]
    pub symbol: String,
    #[arg(long)]
    pub ex_trf: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Ordering {
    Sip,
    Exchange,
}

impl From<Ordering> for TapeOrdering {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Sip => TapeOrdering::SipOrder,
            Ordering::Exchange => TapeOrdering::ExchangeOrder,
        }
    }
}

#[derive(Debug, Args)]
pub struct NbboArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long)]
    pub symbol: String,
    #[arg(long, value_enum, default_value_t = Ordering::Sip)]
    pub ordering: Ordering,
    /// Spread histogram bin width in cents.
    #[arg(long, default_value_t = 1)]
    pub bin_width_cents: u32,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kinds {
    Trades,
    Quotes,
    Both,
}

impl From<Kinds> for WindowKinds {
    fn from(k: Kinds) -> Self {
        match k {
            Kinds::Trades => WindowKinds::Trades,
            Kinds::Quotes => WindowKinds::Quotes,
            Kinds::Both => WindowKinds::Both,
        }
    }
}

#[derive(Debug, Args)]
pub struct WindowsArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long)]
    pub symbol: String,
    #[arg(long, value_enum, default_value_t = Kinds::Both)]
    pub kinds: Kinds,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    TradeCount,
    TradeVolume,
    DollarVolume,
    MessageCount,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SeriesGroupArg {
    None,
    Exchange,
    Sip,
}

#[derive(Debug, Args)]
pub struct DescriptiveArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long)]
    pub symbol: Option<String>,
    #[arg(long, value_enum, default_value_t = MetricArg::MessageCount)]
    pub metric: MetricArg,
    #[arg(long, value_enum, default_value_t = SeriesGroupArg::None)]
    pub group_by: SeriesGroupArg,
    /// Emit running totals instead of per-second values.
    #[arg(long)]
    pub cumulative: bool,
}

#[derive(Debug, Args)]
pub struct TrendArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long)]
    pub ex_trf: bool,
}

#[derive(Debug, Args)]
pub struct ReturnsArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long)]
    pub symbol: String,
    #[arg(long)]
    pub ex_trf: bool,
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    #[command(flatten)]
    pub input: Input,
}

struct Loaded {
    directory: SymbolDirectory,
    symbol: Option<SymbolInfo>,
    /// Restricted to `symbol` when one was requested.
    records: Vec<TapeRecord>,
}

fn load(input: &Input, ticker: Option<&str>) -> Result<Loaded> {
    let symbols_path = match &input.symbols {
        Some(p) => p.clone(),
        None => files::default_symbols(&input.tapes).ok_or_else(|| usage("--tape is required"))?,
    };
    let directory = files::load_directory(&symbols_path)?;
    let symbol = match ticker {
        Some(t) => Some(directory.lookup(t).cloned().ok_or_else(|| not_found(format!("unknown ticker {t:?}")))?),
        None => None,
    };
    let mut records = Vec::new();
    for path in files::resolve_tapes(&input.tapes, symbol.as_ref().map(SymbolInfo::sip)) {
        let tape = files::load_tape(&path)?;
        match &symbol {
            Some(s) => records.extend(tape.into_iter().filter(|r| r.symbol_id == s.id)),
            None if records.is_empty() => records = tape,
            None => records.extend(tape),
        }
    }
    Ok(Loaded { directory, symbol, records })
}

fn label(symbol: Option<&SymbolInfo>) -> &str {
    symbol.map_or("all", |s| s.ticker.as_str())
}

fn emit(out: &Path, name: String, bytes: &[u8]) -> Result<OutputEntry> {
    files::create_dir(out)?;
    let entry = files::write_output(out, &name, bytes)?;
    log::info!("wrote {} ({} rows)", out.join(&name).display(), entry.rows);
    Ok(entry)
}

/// Runs one analysis and returns its JSON summary.
pub fn run(cmd: &AnalyzeCommand) -> Result<Value> {
    match cmd {
        AnalyzeCommand::Latency(a) => latency(a),
        AnalyzeCommand::Oos(a) => oos(a),
        AnalyzeCommand::Nbbo(a) => nbbo(a),
        AnalyzeCommand::Windows(a) => windows(a),
        AnalyzeCommand::Descriptive(a) => descriptive(a),
        AnalyzeCommand::Trend(a) => trend(a),
        AnalyzeCommand::Returns(a) => returns(a),
        AnalyzeCommand::Scatter(a) => scatter(a),
    }
}

fn latency(a: &LatencyArgs) -> Result<Value> {
    let data = load(&a.input, a.symbol.as_deref())?;
    let registry = Registry::global();
    let selected: Vec<&TapeRecord> = data
        .records
        .iter()
        .filter(|r| r.is_trade() || a.include_quotes)
        .filter(|r| !(a.ex_trf && registry.is_trf(r.exchange_id)))
        .collect();
    let group_by = match a.group_by {
        LatencyGrouping::Sip => GroupBy::Sip,
        LatencyGrouping::Exchange => GroupBy::Exchange,
        LatencyGrouping::SipExchange => GroupBy::SipExchange,
    };
    let stats = latency_stats(selected.iter().copied(), group_by, &data.directory)?;
    let mut all: Vec<i64> = selected.iter().map(|r| r.latency_us()).collect();
    let overall = summarize(&mut all, None, None);
    let name = label(data.symbol.as_ref());
    let main = emit(&a.input.out, format!("latency_{name}.csv"), &csv_bytes(&stats)?)?;
    let hist = latency_histogram_by_exchange(selected.iter().copied(), a.bin_us, a.max_us);
    let hist_out = emit(&a.input.out, format!("latency_{name}_histogram.csv"), &csv_bytes(&hist)?)?;
    Ok(json!({
        "subcommand": "latency",
        "symbol": data.symbol.as_ref().map(|s| &s.ticker),
        "group_by": group_by,
        "include_quotes": a.include_quotes,
        "ex_trf": a.ex_trf,
        "records": selected.len(),
        "overall": overall,
        "groups": stats,
        "outputs": [main.path, hist_out.path],
    }))
}

fn oos(a: &OosArgs) -> Result<Value> {
    let data = load(&a.input, Some(&a.symbol))?;
    let sym = data.symbol.as_ref().expect("symbol requested");
    let trades = symbol_trades(&data.records, sym.id, a.ex_trf);
    let report = detect_out_of_sequence(&trades)?;
    let out = emit(&a.input.out, format!("oos_{}.csv", sym.ticker), &csv_bytes(&trade_delay_rows(&trades))?)?;
    Ok(json!({
        "subcommand": "oos",
        "symbol": sym.ticker,
        "listing": sym.listing,
        "ex_trf": a.ex_trf,
        "total_trades": report.total_trades,
        "oos_count": report.oos_count,
        "oos_percent": report.oos_percent,
        "max_reversal_us": report.max_reversal_us,
        "outputs": [out.path],
    }))
}

fn bin_width(cents: u32) -> Result<Price> {
    if cents == 0 {
        return Err(usage("--bin-width-cents must be at least 1"));
    }
    Ok(Price(i64::from(cents) * 100))
}

fn nbbo(a: &NbboArgs) -> Result<Value> {
    let width = bin_width(a.bin_width_cents)?;
    let data = load(&a.input, Some(&a.symbol))?;
    let sym = data.symbol.as_ref().expect("symbol requested");
    let registry = Registry::global();
    let ordering = TapeOrdering::from(a.ordering);
    let series = stream_nbbo(&data.records, ordering, registry)?;
    let counts = count_states(&series);
    let mut buf = Vec::new();
    write_nbbo_csv(&mut buf, &series)?;
    let main = emit(&a.input.out, format!("nbbo_{}.csv", sym.ticker), &buf)?;
    let bins = spread_histogram(&series, width);
    let spread_out = emit(&a.input.out, format!("nbbo_{}_spread_histogram.csv", sym.ticker), &csv_bytes(&bins)?)?;
    let venues = venue_spread_stats(&data.records, ordering, registry)?;
    let venue_out = emit(&a.input.out, format!("nbbo_{}_venues.csv", sym.ticker), &csv_bytes(&venues)?)?;
    Ok(json!({
        "subcommand": "nbbo",
        "symbol": sym.ticker,
        "ordering": ordering,
        "bin_width_cents": a.bin_width_cents,
        "quotes": series.len(),
        "crosses": counts.crosses,
        "locks": counts.locks,
        "crossed_records": counts.records_in(tapelab::nbbo::MarketState::Crossed),
        "locked_records": counts.records_in(tapelab::nbbo::MarketState::Locked),
        "time_in_state_us": counts.time_in_state,
        "outputs": [main.path, spread_out.path, venue_out.path],
    }))
}

fn windows(a: &WindowsArgs) -> Result<Value> {
    let data = load(&a.input, Some(&a.symbol))?;
    let sym = data.symbol.as_ref().expect("symbol requested");
    let mut records = data.records;
    records.sort_by_key(|r| (r.sip_ts, r.sip_seq));
    let report = latency_window_events(&records, a.kinds.into())?;
    let out = emit(&a.input.out, format!("windows_{}.csv", sym.ticker), &csv_bytes(&report.histogram)?)?;
    Ok(json!({
        "subcommand": "windows",
        "symbol": sym.ticker,
        "kinds": report.kinds,
        "messages": report.messages,
        "median": report.median,
        "p90": report.p90,
        "max": report.max,
        "modal_bin_lo": report.modal_bin_lo,
        "outputs": [out.path],
    }))
}

fn descriptive(a: &DescriptiveArgs) -> Result<Value> {
    let data = load(&a.input, a.symbol.as_deref())?;
    let metric = match a.metric {
        MetricArg::TradeCount => Metric::TradeCount,
        MetricArg::TradeVolume => Metric::TradeVolume,
        MetricArg::DollarVolume => Metric::DollarVolume,
        MetricArg::MessageCount => Metric::MessageCount,
    };
    let grouping = match a.group_by {
        SeriesGroupArg::None => SeriesGrouping::None,
        SeriesGroupArg::Exchange => SeriesGrouping::Exchange,
        SeriesGroupArg::Sip => SeriesGrouping::Sip,
    };
    let session = (Timestamp(0), Timestamp::SESSION_END);
    let series = per_second_aggregate(&data.records, metric, grouping, &data.directory, session)?;
    let totals: serde_json::Map<String, Value> =
        series.groups.keys().map(|g| (g.clone(), json!(series.total(g)))).collect();
    let peaks: serde_json::Map<String, Value> = series
        .groups
        .iter()
        .map(|(g, v)| {
            let (i, peak) = v.iter().enumerate().fold((0, 0.0), |best, (i, &x)| if x > best.1 { (i, x) } else { best });
            (g.clone(), json!({ "second": series.first_second + i as u64, "value": peak }))
        })
        .collect();
    let written = if a.cumulative { series.cumulative() } else { series.clone() };
    let mut buf = Vec::new();
    written.write_csv(&mut buf)?;
    let out = emit(&a.input.out, format!("descriptive_{}.csv", label(data.symbol.as_ref())), &buf)?;
    Ok(json!({
        "subcommand": "descriptive",
        "symbol": data.symbol.as_ref().map(|s| &s.ticker),
        "metric": metric,
        "group_by": grouping,
        "cumulative": a.cumulative,
        "seconds": series.len(),
        "totals": totals,
        "peaks": peaks,
        "outputs": [out.path],
    }))
}

/// Fit and rank correlation over the out-of-sequence table.
pub fn trend_summary(rows: &[tapelab::analytics::OosRow], ex_trf: bool) -> Result<Value> {
    let (totals, pcts): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .map(|r| {
            if ex_trf {
                (r.ex_trf_total_trades as f64, r.ex_trf_oos_percent)
            } else {
                (r.total_trades as f64, r.oos_percent)
            }
        })
        .unzip();
    let points: Vec<(f64, f64)> = totals.iter().zip(&pcts).map(|(&n, &p)| (n, (n * p).round())).collect();
    let fit = fit_trend(&points)?;
    Ok(json!({
        "ex_trf": ex_trf,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "n_points": fit.n_points,
        "spearman_total_vs_percent": spearman(&totals, &pcts),
    }))
}

fn trend(a: &TrendArgs) -> Result<Value> {
    let data = load(&a.input, None)?;
    let rows = oos_table(&data.records, &data.directory)?;
    let out = emit(&a.input.out, "trend_all.csv".into(), &csv_bytes(&rows)?)?;
    let mut summary = trend_summary(&rows, a.ex_trf)?;
    summary["subcommand"] = json!("trend");
    summary["outputs"] = json!([out.path]);
    Ok(summary)
}

fn returns(a: &ReturnsArgs) -> Result<Value> {
    let data = load(&a.input, Some(&a.symbol))?;
    let sym = data.symbol.as_ref().expect("symbol requested");
    let trades = symbol_trades(&data.records, sym.id, a.ex_trf);
    let report = returns_compare(&trades)?;
    let out = emit(&a.input.out, format!("returns_{}.csv", sym.ticker), &csv_bytes(&[report])?)?;
    Ok(json!({
        "subcommand": "returns",
        "symbol": sym.ticker,
        "ex_trf": a.ex_trf,
        "n_returns": report.n_returns,
        "mismatch_count": report.mismatch_count,
        "sign_flip_count": report.sign_flip_count,
        "sum_abs_diff": report.sum_abs_diff,
        "outputs": [out.path],
    }))
}

/// Rank correlations of quote traffic with crosses and locks, penny
/// stocks excluded.
pub fn scatter_summary(rows: &[tapelab::analytics::ScatterRow]) -> Value {
    let kept: Vec<_> = rows.iter().filter(|r| !r.penny_flag).collect();
    let msgs: Vec<f64> = kept.iter().map(|r| r.message_count as f64).collect();
    let crosses: Vec<f64> = kept.iter().map(|r| r.cross_count as f64).collect();
    let locks: Vec<f64> = kept.iter().map(|r| r.lock_count as f64).collect();
    json!({
        "symbols": rows.len(),
        "total_crosses": rows.iter().map(|r| r.cross_count).sum::<u64>(),
        "total_locks": rows.iter().map(|r| r.lock_count).sum::<u64>(),
        "spearman_messages_vs_crosses": spearman(&msgs, &crosses),
        "spearman_messages_vs_locks": spearman(&msgs, &locks),
    })
}

fn scatter(a: &ScatterArgs) -> Result<Value> {
    let data = load(&a.input, None)?;
    let rows = cross_lock_scatter(&data.records, &data.directory, Registry::global())?;
    let out = emit(&a.input.out, "scatter_all.csv".into(), &csv_bytes(&rows)?)?;
    let mut summary = scatter_summary(&rows);
    summary["subcommand"] = json!("scatter");
    summary["outputs"] = json!([out.path]);
    Ok(summary)
}
