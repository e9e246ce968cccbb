use proptest::prelude::*;
use tapelab::analytics::latency::summarize;
use tapelab::analytics::{
    detect_out_of_sequence, fit_trend, per_second_aggregate, returns_compare, spearman, Metric, SeriesGrouping,
};
use tapelab::registry::venue;
use tapelab::{Listing, MsgKind, Price, SymbolDirectory, SymbolId, TapeRecord, Timestamp};

/// Published 14-symbol sample: (ticker, percent out of sequence, total trades).
const PUBLISHED_SAMPLE: [(&str, f64, f64); 14] = [
    ("AAPL", 66.2, 482_578.0),
    ("BAC", 50.1, 97_303.0),
    ("XOM", 43.0, 86_834.0),
    ("GOOG", 56.3, 69_085.0),
    ("DNR", 43.3, 51_185.0),
    ("IBM", 26.4, 29_960.0),
    ("SHAK", 27.9, 16_349.0),
    ("KLIC", 30.3, 3_304.0),
    ("GBX", 20.6, 2_804.0),
    ("WBMD", 29.9, 2_428.0),
    ("EYES", 10.3, 1_653.0),
    ("BRKA", 0.3, 304.0),
    ("OHGI", 3.8, 286.0),
    ("ACU", 0.0, 1.0),
];

#[test]
fn published_table_regression() {
    let points: Vec<(f64, f64)> = PUBLISHED_SAMPLE.iter().map(|&(_, pct, n)| (n, n * pct / 100.0)).collect();
    let fit = fit_trend(&points).unwrap();
    // reference values from an independent normal-equation solve
    assert!((fit.slope - 0.6612).abs() < 5e-4, "{fit:?}");
    assert!((fit.r_squared - 0.9935).abs() < 5e-4, "{fit:?}");
    assert!((0.60..=0.72).contains(&fit.slope));
    assert!(fit.r_squared >= 0.95);
}

#[test]
fn published_table_is_volume_ordered() {
    let n: Vec<f64> = PUBLISHED_SAMPLE.iter().map(|r| r.2).collect();
    let pct: Vec<f64> = PUBLISHED_SAMPLE.iter().map(|r| r.1).collect();
    assert!(spearman(&n, &pct).unwrap() > 0.8);
}

fn trades(exchange_ts: &[u64], prices: &[i64]) -> Vec<TapeRecord> {
    exchange_ts
        .iter()
        .zip(prices)
        .enumerate()
        .map(|(i, (&ex, &px))| TapeRecord {
            symbol_id: SymbolId(0),
            msg_kind: MsgKind::Trade,
            exchange_id: venue::NASD,
            price: Price(px),
            size: 100,
            exchange_ts: Timestamp(ex),
            sip_ts: Timestamp(ex.max(i as u64) + 1_000),
            sip_seq: i as u64,
        })
        .map({
            let mut last = 0u64;
            move |mut r| {
                // SIP times non-decreasing in input order
                last = last.max(r.sip_ts.0);
                r.sip_ts = Timestamp(last);
                r
            }
        })
        .collect()
}

/// Adjacent pairs of the SIP-order sequence whose exchange-time ranks
/// decrease, ranks taken from a stable exchange-time sort.
fn oracle_oos(exchange_ts: &[u64]) -> u64 {
    let mut by_time: Vec<usize> = (0..exchange_ts.len()).collect();
    by_time.sort_by_key(|&i| exchange_ts[i]);
    let mut rank = vec![0usize; exchange_ts.len()];
    for (r, &i) in by_time.iter().enumerate() {
        rank[i] = r;
    }
    (1..exchange_ts.len()).filter(|&i| rank[i] < rank[i - 1] && exchange_ts[i] != exchange_ts[i - 1]).count() as u64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn oos_matches_rank_oracle(ex in prop::collection::vec(0u64..500, 0..400)) {
        let prices = vec![100; ex.len()];
        let rep = detect_out_of_sequence(&trades(&ex, &prices)).unwrap();
        prop_assert_eq!(rep.oos_count, oracle_oos(&ex));
        prop_assert!(rep.oos_count as usize <= ex.len().saturating_sub(1));
        prop_assert!((0.0..=1.0).contains(&rep.oos_percent));
    }

    #[test]
    fn collinear_fit_is_exact(slope in -50i32..50, intercept in -1000i32..1000, xs in prop::collection::btree_set(-500i32..500, 2..40)) {
        let (m, b) = (slope as f64 / 4.0, intercept as f64 / 2.0);
        let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x as f64, m * x as f64 + b)).collect();
        let fit = fit_trend(&pts).unwrap();
        prop_assert!((fit.slope - m).abs() <= 1e-12 * m.abs().max(1.0));
        prop_assert!((fit.intercept - b).abs() <= 1e-9 * b.abs().max(1.0));
        prop_assert!(fit.r_squared == 1.0 || m == 0.0 || (1.0 - fit.r_squared) < 1e-12);
    }

    #[test]
    fn odd_median_is_middle_order_statistic(mut v in prop::collection::vec(-10_000i64..10_000, 1..200)) {
        if v.len() % 2 == 0 {
            v.pop();
        }
        let mut sorted = v.clone();
        sorted.sort();
        let s = summarize(&mut v, None, None).unwrap();
        prop_assert_eq!(s.median_us, sorted[sorted.len() / 2]);
        prop_assert!(s.q1_us <= s.median_us && s.median_us <= s.q3_us);
        prop_assert!(s.whisker_lo >= s.min_us && s.whisker_hi <= s.max_us);
    }

    #[test]
    fn per_second_totals_conserved(ts in prop::collection::vec(0u64..57_600_000_000, 0..300)) {
        let mut dir = SymbolDirectory::new();
        dir.insert("X", Listing::Nyse, false).unwrap();
        let mut sorted = ts.clone();
        sorted.sort();
        let recs = trades(&sorted, &vec![12_345; sorted.len()]);
        let session = (Timestamp(0), Timestamp::SESSION_END);
        let count = per_second_aggregate(&recs, Metric::TradeCount, SeriesGrouping::None, &dir, session).unwrap();
        prop_assert_eq!(count.total("all"), recs.len() as f64);
        let vol = per_second_aggregate(&recs, Metric::TradeVolume, SeriesGrouping::Exchange, &dir, session).unwrap();
        let by_venue: f64 = vol.cumulative().groups.values().map(|c| c.last().copied().unwrap_or(0.0)).sum();
        prop_assert_eq!(by_venue, 100.0 * recs.len() as f64);
    }

    #[test]
    fn in_sequence_returns_are_identical(prices in prop::collection::vec(1i64..1_000_000, 2..200)) {
        let ex: Vec<u64> = (0..prices.len() as u64).map(|i| i * 10).collect();
        let t = trades(&ex, &prices);
        prop_assert_eq!(detect_out_of_sequence(&t).unwrap().oos_count, 0);
        let r = returns_compare(&t).unwrap();
        prop_assert_eq!((r.mismatch_count, r.sign_flip_count), (0, 0));
        prop_assert_eq!(r.sum_abs_diff, 0.0);
    }
}
