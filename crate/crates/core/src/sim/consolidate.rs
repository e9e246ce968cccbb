//! Applying link latency and building the three SIP tapes.

use rayon::prelude::*;

use super::config::SimConfig;
use super::generate::generate_events;
use super::latency::{LatencyModel, LinkSampler};
use super::SimError;
use crate::registry::{Registry, SymbolDirectory};
use crate::types::{SipId, TapeRecord, Timestamp};

/// One SIP's consolidated tape. `event_ids[i]` is the ground-truth event
/// behind `records[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SipTape {
    pub sip: SipId,
    pub records: Vec<TapeRecord>,
    pub event_ids: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Consolidated {
    /// Indexed by `SipId::index`.
    pub tapes: [SipTape; 3],
}

impl Consolidated {
    pub fn tape(&self, sip: SipId) -> &SipTape {
        &self.tapes[sip.index()]
    }

    pub fn total_records(&self) -> usize {
        self.tapes.iter().map(|t| t.records.len()).sum()
    }
}

/// Sends every event over its (venue, SIP) link and orders each SIP's tape
/// by arrival. Ties break on exchange time, then venue, then event id.
pub fn consolidate(
    events: &[TapeRecord],
    directory: &SymbolDirectory,
    latency: &LatencyModel,
    seed: u64,
) -> Result<Consolidated, SimError> {
    let registry = Registry::global();
    let mut links: Vec<Option<LinkSampler>> = (0..registry.len() * 3).map(|_| None).collect();
    let mut per_sip: [Vec<TapeRecord>; 3] = Default::default();
    let mut prev = Timestamp(0);
    for (i, ev) in events.iter().enumerate() {
        if ev.exchange_ts < prev {
            return Err(SimError::NotTimeOrdered { event: i });
        }
        prev = ev.exchange_ts;
        let sip = directory.sip_of(ev.symbol_id).ok_or(SimError::UnknownSymbol { event: i, symbol: ev.symbol_id })?;
        if registry.get(ev.exchange_id).is_none() {
            return Err(SimError::UnknownVenue { event: i, exchange: ev.exchange_id });
        }
        let link = &mut links[ev.exchange_id.index() * 3 + sip.index()];
        let sampler = link.get_or_insert_with(|| LinkSampler::new(latency, ev.exchange_id, sip, seed));
        let mut rec = *ev;
        rec.sip_ts = sampler.arrival(ev.exchange_ts);
        rec.sip_seq = i as u64;
        per_sip[sip.index()].push(rec);
    }
    let tapes: Vec<SipTape> = per_sip
        .into_par_iter()
        .zip(SipId::ALL)
        .map(|(mut records, sip)| {
            records.sort_unstable_by_key(|r| (r.sip_ts, r.exchange_ts, r.exchange_id, r.sip_seq));
            let event_ids = records.iter().map(|r| r.sip_seq).collect();
            for (seq, r) in records.iter_mut().enumerate() {
                r.sip_seq = seq as u64;
            }
            SipTape { sip, records, event_ids }
        })
        .collect();
    let tapes: [SipTape; 3] = tapes.try_into().expect("three SIPs");
    Ok(Consolidated { tapes })
}

/// Everything one scenario run produces.
#[derive(Clone, Debug)]
pub struct SimOutput {
    pub directory: SymbolDirectory,
    /// Exchange-time view; record `i` is event `i`.
    pub truth: Vec<TapeRecord>,
    pub sips: Consolidated,
    pub scenario_hash: [u8; 32],
}

pub fn simulate(config: &SimConfig) -> Result<SimOutput, SimError> {
    let truth = generate_events(config)?;
    let directory = config.directory()?;
    let sips = consolidate(&truth, &directory, &config.latency, config.seed)?;
    Ok(SimOutput { directory, truth, sips, scenario_hash: config.scenario_hash() })
}
