use proptest::prelude::*;
use tapelab::nbbo::{compute_nbbo, count_states, MarketState, NbboEngine, NbboRecord, TopOfBookState};
use tapelab::{ExchangeId, MsgKind, Price, Registry, SymbolId, TapeRecord, Timestamp};

fn quoting_venues() -> Vec<ExchangeId> {
    Registry::global().iter().filter(|e| e.quotes_allowed).map(|e| e.id).collect()
}

fn arb_quote() -> impl Strategy<Value = TapeRecord> {
    let venues = quoting_venues();
    (0..venues.len(), any::<bool>(), 99_990i64..100_010, prop_oneof![Just(0u32), 1u32..500]).prop_map(
        move |(v, is_bid, px, size)| TapeRecord {
            symbol_id: SymbolId(0),
            msg_kind: if is_bid { MsgKind::BidQuote } else { MsgKind::AskQuote },
            exchange_id: venues[v],
            price: Price(px),
            size,
            exchange_ts: Timestamp(0),
            sip_ts: Timestamp(0),
            sip_seq: 0,
        },
    )
}

fn brute_state(nbbo: &[NbboRecord]) -> (u64, u64) {
    let mut crosses = 0;
    let mut locks = 0;
    for (i, r) in nbbo.iter().enumerate() {
        let entered = i == 0 || nbbo[i - 1].state != r.state;
        if entered && r.state == MarketState::Crossed {
            crosses += 1;
        }
        if entered && r.state == MarketState::Locked {
            locks += 1;
        }
    }
    (crosses, locks)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn incremental_matches_full_scan(quotes in prop::collection::vec(arb_quote(), 1..400)) {
        let reg = Registry::standard();
        let mut engine = NbboEngine::new(&reg);
        let mut book = TopOfBookState::new(&reg);
        let mut stream = Vec::new();
        for (i, q) in quotes.iter().enumerate() {
            let ts = Timestamp(i as u64);
            let inc = engine.apply(q, ts).unwrap();
            tapelab::nbbo::apply_quote(&mut book, q).unwrap();
            prop_assert_eq!(inc, compute_nbbo(&book, ts));
            stream.push(inc);
        }
        let counts = count_states(&stream);
        prop_assert_eq!((counts.crosses, counts.locks), brute_state(&stream));
        let total: u64 = counts.records.iter().sum();
        prop_assert_eq!(total, stream.len() as u64);
    }
}
