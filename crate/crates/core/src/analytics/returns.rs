//! Trade-to-trade returns under SIP order versus exchange order.

use serde::Serialize;

use super::{check_single_symbol, AnalyticsError};
use crate::nbbo::{replay_order, TapeOrdering};
use crate::types::TapeRecord;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReturnsReport {
    pub n_returns: u64,
    pub mismatch_count: u64,
    /// Positions where both returns are nonzero and of opposite sign.
    pub sign_flip_count: u64,
    pub sum_abs_diff: f64,
}

fn simple_returns(trades: &[TapeRecord], order: &[usize]) -> Vec<f64> {
    order.windows(2).map(|w| trades[w[1]].price.ticks() as f64 / trades[w[0]].price.ticks() as f64 - 1.0).collect()
}

/// Compares simple returns of one symbol's trades replayed in SIP order and
/// in exchange order, position by position.
pub fn returns_compare(trades: &[TapeRecord]) -> Result<ReturnsReport, AnalyticsError> {
    check_single_symbol(trades)?;
    if let Some(index) = trades.iter().position(|r| !r.is_trade()) {
        return Err(AnalyticsError::NotATrade { index });
    }
    if trades.len() < 2 {
        return Err(AnalyticsError::TooFewPoints { needed: 2, got: trades.len() });
    }
    let sip = simple_returns(trades, &replay_order(trades, TapeOrdering::SipOrder));
    let truth = simple_returns(trades, &replay_order(trades, TapeOrdering::ExchangeOrder));
    let mut report =
        ReturnsReport { n_returns: sip.len() as u64, mismatch_count: 0, sign_flip_count: 0, sum_abs_diff: 0.0 };
    for (a, b) in sip.iter().zip(&truth) {
        if a != b {
            report.mismatch_count += 1;
            report.sum_abs_diff += (a - b).abs();
        }
        if *a != 0.0 && *b != 0.0 && a.signum() != b.signum() {
            report.sign_flip_count += 1;
        }
    }
    Ok(report)
}
