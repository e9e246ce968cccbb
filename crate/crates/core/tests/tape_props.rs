use proptest::prelude::*;
use tapelab::tape::{
    expected_file_size, export_csv_to, import_csv_from, read_tape, read_tape_bytes, write_tape, write_tape_to,
};
use tapelab::{ExchangeId, Listing, MsgKind, Price, SymbolDirectory, SymbolId, TapeRecord, Timestamp};

fn directory() -> SymbolDirectory {
    let mut d = SymbolDirectory::new();
    d.insert("AAPL", Listing::Nasdaq, false).unwrap();
    d.insert("IBM", Listing::Nyse, false).unwrap();
    d.insert("SPY", Listing::NyseArcaMktBatsRegional, false).unwrap();
    d.insert("OHGI", Listing::Nasdaq, true).unwrap();
    d
}

type Row = (u32, u8, u8, i64, u32, u64, u64);

fn arb_rows() -> impl Strategy<Value = Vec<Row>> {
    let end = Timestamp::SESSION_END.0;
    prop::collection::vec((0u32..4, 0u8..3, 0u8..13, 0i64..10_000_000_000, any::<u32>(), 0..end, 0..end), 0..300)
}

/// Rows with sequence numbers counted per SIP in row order, which is how
/// CSV import numbers them.
fn records(rows: &[Row], dir: &SymbolDirectory) -> Vec<TapeRecord> {
    let mut next = [0u64; 3];
    rows.iter()
        .map(|&(sym, kind, ex, px, size, ets, sts)| {
            let symbol_id = SymbolId(sym);
            let seq = &mut next[dir.sip_of(symbol_id).unwrap().index()];
            *seq += 1;
            TapeRecord {
                symbol_id,
                msg_kind: MsgKind::from_u8(kind).unwrap(),
                exchange_id: ExchangeId(ex),
                price: Price(px),
                size,
                exchange_ts: Timestamp(ets),
                sip_ts: Timestamp(sts),
                sip_seq: *seq - 1,
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn binary_and_csv_round_trip(rows in arb_rows(), hash in any::<[u8; 32]>()) {
        let dir = directory();
        let recs = records(&rows, &dir);

        let mut bytes = Vec::new();
        write_tape_to(&mut bytes, &recs, &dir, hash).unwrap();
        prop_assert_eq!(bytes.len() as u64, expected_file_size(recs.len() as u64));
        prop_assert_eq!(bytes.len(), 64 + 48 * recs.len());
        let tape = read_tape_bytes(&bytes).unwrap();
        prop_assert_eq!(&tape.records, &recs);
        prop_assert_eq!(tape.header.scenario_hash, hash);
        prop_assert_eq!(tape.header.record_count, recs.len() as u64);

        let mut csv = Vec::new();
        export_csv_to(&mut csv, &recs, &dir).unwrap();
        let back = import_csv_from(csv.as_slice(), &dir).unwrap();
        prop_assert_eq!(back, recs);
    }
}

#[test]
fn file_round_trip_on_disk() {
    let dir = directory();
    let rows: Vec<Row> = (0..1000u64)
        .map(|i| ((i % 4) as u32, (i % 3) as u8, (i % 11) as u8, 1_160_000 + i as i64, 100, i * 7, i * 7 + 450))
        .collect();
    let recs = records(&rows, &dir);
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("t.tape");
    assert_eq!(write_tape(&path, &recs, &dir, [7; 32]).unwrap(), 1000);
    assert_eq!(std::fs::metadata(&path).unwrap().len(), expected_file_size(1000));
    let tape = read_tape(&path).unwrap();
    assert_eq!(tape.records, recs);
    assert!(tape.report.is_clean(), "{:?}", tape.report);
}
