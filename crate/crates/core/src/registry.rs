//! Venue registry and symbol directory.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::types::{route_to_sip, ExchangeId, Listing, Price, SipId, SymbolId, TICKS_PER_DOLLAR};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Bats,
    Chicago,
    Nasdaq,
    Nyse,
    Trf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Datacenter {
    Secaucus,
    Carteret,
    Mahwah,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExchangeInfo {
    pub id: ExchangeId,
    pub name: String,
    /// Primary abbreviation, as used in CSV interchange and configs.
    pub abbreviation: String,
    /// Alternative codes accepted on input.
    pub aliases: Vec<String>,
    pub family: Family,
    pub datacenter: Datacenter,
    /// False for the trade reporting facilities.
    pub quotes_allowed: bool,
}

impl ExchangeInfo {
    pub fn is_trf(&self) -> bool {
        self.family == Family::Trf
    }
}

/// Well-known registry ids.
pub mod venue {
    use crate::types::ExchangeId;

    pub const BATS: ExchangeId = ExchangeId(0);
    pub const BATY: ExchangeId = ExchangeId(1);
    pub const EDGA: ExchangeId = ExchangeId(2);
    pub const EDGX: ExchangeId = ExchangeId(3);
    pub const CHX: ExchangeId = ExchangeId(4);
    pub const NASD: ExchangeId = ExchangeId(5);
    pub const NQBS: ExchangeId = ExchangeId(6);
    pub const NQPH: ExchangeId = ExchangeId(7);
    pub const NYSE: ExchangeId = ExchangeId(8);
    pub const ARCA: ExchangeId = ExchangeId(9);
    pub const AMEX: ExchangeId = ExchangeId(10);
    pub const NTRF: ExchangeId = ExchangeId(11);
    pub const QTRF: ExchangeId = ExchangeId(12);
}

/// The set of venues that send messages to the SIPs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Registry {
    exchanges: Vec<ExchangeInfo>,
    by_code: HashMap<String, ExchangeId>,
}

impl Registry {
    pub fn new(exchanges: Vec<ExchangeInfo>) -> Self {
        let mut by_code = HashMap::new();
        for (i, info) in exchanges.iter().enumerate() {
            debug_assert_eq!(info.id.index(), i);
            by_code.insert(info.abbreviation.to_ascii_uppercase(), info.id);
            for alias in &info.aliases {
                by_code.insert(alias.to_ascii_uppercase(), info.id);
            }
        }
        Registry { exchanges, by_code }
    }

    /// The thirteen exchanges and reporting facilities of the national market system.
    pub fn standard() -> Self {
        use Datacenter::*;
        use Family::*;
        let rows: [(&str, &str, &[&str], Family, Datacenter); 13] = [
            ("BATS", "BATS", &["BZX"], Bats, Secaucus),
            ("BATS-Y", "BATY", &["BYX"], Bats, Secaucus),
            ("Direct Edge A", "EDGA", &[], Bats, Secaucus),
            ("Direct Edge X", "EDGX", &[], Bats, Secaucus),
            ("Chicago Stock Exchange", "CHX", &[], Chicago, Secaucus),
            ("NASDAQ", "NASD", &[], Nasdaq, Carteret),
            ("NASDAQ-Boston", "NQBS", &[], Nasdaq, Carteret),
            ("NASDAQ-Philadelphia", "NQPH", &[], Nasdaq, Carteret),
            ("New York Stock Exchange", "NYSE", &[], Nyse, Mahwah),
            ("New York Stock Exchange - ARCA", "ARCA", &[], Nyse, Mahwah),
            ("New York Stock Exchange - Market", "AMEX", &["NY-MKT"], Nyse, Mahwah),
            ("NYSE Trade Reporting Facility", "NTRF", &[], Trf, Mahwah),
            ("NASDAQ Trade Reporting Facility", "QTRF", &[], Trf, Carteret),
        ];
        let exchanges = rows
            .iter()
            .enumerate()
            .map(|(i, (name, abbr, aliases, family, dc))| ExchangeInfo {
                id: ExchangeId(i as u8),
                name: name.to_string(),
                abbreviation: abbr.to_string(),
                aliases: aliases.iter().map(|a| a.to_string()).collect(),
                family: *family,
                datacenter: *dc,
                quotes_allowed: *family != Trf,
            })
            .collect();
        Registry::new(exchanges)
    }

    /// Shared instance of [`Registry::standard`].
    pub fn global() -> &'static Registry {
        static REGISTRY: OnceLock<Registry> = OnceLock::new();
        REGISTRY.get_or_init(Registry::standard)
    }

    pub fn len(&self) -> usize {
        self.exchanges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exchanges.is_empty()
    }

    pub fn get(&self, id: ExchangeId) -> Option<&ExchangeInfo> {
        self.exchanges.get(id.index())
    }

    pub fn iter(&self) -> impl Iterator<Item = &ExchangeInfo> {
        self.exchanges.iter()
    }

    /// Looks up a venue by abbreviation or alias, case-insensitively.
    pub fn by_code(&self, code: &str) -> Option<ExchangeId> {
        self.by_code.get(&code.trim().to_ascii_uppercase()).copied()
    }

    pub fn abbreviation(&self, id: ExchangeId) -> &str {
        self.get(id).map(|e| e.abbreviation.as_str()).unwrap_or("?")
    }

    pub fn quotes_allowed(&self, id: ExchangeId) -> bool {
        self.get(id).is_some_and(|e| e.quotes_allowed)
    }

    pub fn is_trf(&self, id: ExchangeId) -> bool {
        self.get(id).is_some_and(ExchangeInfo::is_trf)
    }

    /// Trade reporting facility that carries off-exchange prints for a listing.
    pub fn trf_for(&self, listing: Listing) -> ExchangeId {
        match listing {
            Listing::Nasdaq => venue::QTRF,
            Listing::Nyse | Listing::NyseArcaMktBatsRegional => venue::NTRF,
        }
    }
}

impl Default for Registry {
    fn default() -> Self {
        Registry::standard()
    }
}

impl fmt::Display for ExchangeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(Registry::global().abbreviation(*self))
    }
}

// Configs name venues by abbreviation.
impl Serialize for ExchangeId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match Registry::global().get(*self) {
            Some(info) => serializer.serialize_str(&info.abbreviation),
            None => Err(serde::ser::Error::custom(format!("unknown exchange id {}", self.0))),
        }
    }
}

impl<'de> Deserialize<'de> for ExchangeId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let code = String::deserialize(deserializer)?;
        Registry::global().by_code(&code).ok_or_else(|| serde::de::Error::custom(format!("unknown exchange {code:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolInfo {
    pub id: SymbolId,
    pub ticker: String,
    pub listing: Listing,
    /// Reference price under one dollar.
    pub penny_flag: bool,
}

impl SymbolInfo {
    pub fn sip(&self) -> SipId {
        route_to_sip(self.listing)
    }
}

pub fn is_penny(reference: Price) -> bool {
    reference.ticks() < TICKS_PER_DOLLAR
}

/// Dense id → symbol mapping; tickers are resolved only at I/O boundaries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolDirectory {
    symbols: Vec<SymbolInfo>,
    by_ticker: HashMap<String, SymbolId>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DirectoryError {
    #[error("duplicate ticker {0:?}")]
    DuplicateTicker(String),
    #[error("symbol ids must be dense: expected {expected}, found {found} for {ticker:?}")]
    SparseId { ticker: String, expected: u32, found: u32 },
}

impl SymbolDirectory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a directory from entries sorted by id; ids must be `0..n`.
    pub fn from_symbols(mut symbols: Vec<SymbolInfo>) -> Result<Self, DirectoryError> {
        symbols.sort_by_key(|s| s.id);
        let mut dir = SymbolDirectory::new();
        for (i, sym) in symbols.into_iter().enumerate() {
            if sym.id.0 != i as u32 {
                return Err(DirectoryError::SparseId { ticker: sym.ticker, expected: i as u32, found: sym.id.0 });
            }
            if dir.by_ticker.contains_key(&sym.ticker) {
                return Err(DirectoryError::DuplicateTicker(sym.ticker));
            }
            dir.by_ticker.insert(sym.ticker.clone(), sym.id);
            dir.symbols.push(sym);
        }
        Ok(dir)
    }

    /// Appends a symbol, assigning the next dense id.
    pub fn insert(&mut self, ticker: &str, listing: Listing, penny_flag: bool) -> Result<SymbolId, DirectoryError> {
        if self.by_ticker.contains_key(ticker) {
            return Err(DirectoryError::DuplicateTicker(ticker.to_string()));
        }
        let id = SymbolId(self.symbols.len() as u32);
        self.symbols.push(SymbolInfo { id, ticker: ticker.to_string(), listing, penny_flag });
        self.by_ticker.insert(ticker.to_string(), id);
        Ok(id)
    }

    pub fn get(&self, id: SymbolId) -> Option<&SymbolInfo> {
        self.symbols.get(id.index())
    }

    pub fn lookup(&self, ticker: &str) -> Option<&SymbolInfo> {
        self.by_ticker.get(ticker).and_then(|id| self.get(*id))
    }

    pub fn sip_of(&self, id: SymbolId) -> Option<SipId> {
        self.get(id).map(SymbolInfo::sip)
    }

    pub fn ticker(&self, id: SymbolId) -> &str {
        self.get(id).map(|s| s.ticker.as_str()).unwrap_or("?")
    }

    pub fn iter(&self) -> impl Iterator<Item = &SymbolInfo> {
        self.symbols.iter()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}
