//! Per-link delay model between exchanges and SIPs.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::rng::{stream, Purpose};
use crate::registry::{venue, Registry};
use crate::types::{ExchangeId, SipId, Timestamp};

/// Lognormal delay: `median_us * exp(sigma * Z)`, rounded, never below `floor_us`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkDist {
    pub median_us: f64,
    pub sigma: f64,
    #[serde(default)]
    pub floor_us: u64,
}

impl LinkDist {
    pub const fn new(median_us: f64, sigma: f64) -> Self {
        LinkDist { median_us, sigma, floor_us: 0 }
    }

    pub fn delay(&self, z: f64) -> u64 {
        let raw = (self.median_us * (self.sigma * z).exp()).round();
        (raw as u64).max(self.floor_us)
    }
}

impl Default for LinkDist {
    fn default() -> Self {
        LinkDist::new(450.0, 0.25)
    }
}

/// Replaces selected fields of the default link for one venue, optionally
/// only toward one SIP.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkOverride {
    pub exchange: ExchangeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sip: Option<SipId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor_us: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencyModel {
    pub default_link: LinkDist,
    #[serde(default)]
    pub overrides: Vec<LinkOverride>,
    /// Time constant of the per-link delay process. Consecutive messages on
    /// one link see similar delays; `None` draws every delay independently.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation_us: Option<f64>,
    /// A link delivers in send order: no message overtakes an earlier one
    /// from the same venue to the same SIP.
    #[serde(default = "yes")]
    pub fifo: bool,
}

fn yes() -> bool {
    true
}

impl Default for LatencyModel {
    fn default() -> Self {
        LatencyModel {
            default_link: LinkDist::default(),
            overrides: vec![
                LinkOverride { exchange: venue::CHX, sip: None, median_us: Some(2250.0), sigma: None, floor_us: None },
                LinkOverride { exchange: venue::QTRF, sip: None, median_us: None, sigma: Some(0.75), floor_us: None },
            ],
            correlation_us: Some(1_000_000.0),
            fifo: true,
        }
    }
}

impl LatencyModel {
    /// Every link delivers instantly.
    pub fn zero() -> Self {
        LatencyModel { default_link: LinkDist::new(0.0, 0.0), overrides: Vec::new(), correlation_us: None, fifo: true }
    }

    /// Same distribution on every link.
    pub fn uniform(dist: LinkDist) -> Self {
        LatencyModel { default_link: dist, overrides: Vec::new(), correlation_us: None, fifo: true }
    }

    pub fn link(&self, exchange: ExchangeId, sip: SipId) -> LinkDist {
        let mut dist = self.default_link;
        for o in &self.overrides {
            if o.exchange == exchange && o.sip.is_none_or(|s| s == sip) {
                dist.median_us = o.median_us.unwrap_or(dist.median_us);
                dist.sigma = o.sigma.unwrap_or(dist.sigma);
                dist.floor_us = o.floor_us.unwrap_or(dist.floor_us);
            }
        }
        dist
    }

    /// Multiplies every configured median by `factor`.
    pub fn scale_medians(&mut self, factor: f64) {
        self.default_link.median_us *= factor;
        for o in &mut self.overrides {
            if let Some(m) = &mut o.median_us {
                *m *= factor;
            }
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let registry = Registry::global();
        let check = |what: &str, d: &LinkDist| {
            if !(d.median_us.is_finite() && d.median_us >= 0.0) {
                return Err(format!("{what}: median_us must be finite and >= 0"));
            }
            if !(d.sigma.is_finite() && d.sigma >= 0.0) {
                return Err(format!("{what}: sigma must be finite and >= 0"));
            }
            Ok(())
        };
        check("latency.default_link", &self.default_link)?;
        for ex in registry.iter() {
            for sip in SipId::ALL {
                check(&format!("latency link {}->{}", ex.abbreviation, sip), &self.link(ex.id, sip))?;
            }
        }
        if let Some(c) = self.correlation_us {
            if !(c.is_finite() && c > 0.0) {
                return Err("latency.correlation_us must be positive".into());
            }
        }
        Ok(())
    }
}

/// Mutable delay state for one (venue, SIP) link.
pub struct LinkSampler {
    dist: LinkDist,
    correlation_us: Option<f64>,
    fifo: bool,
    rng: ChaCha8Rng,
    state: f64,
    last_sent: Option<Timestamp>,
    last_arrival: Timestamp,
}

impl LinkSampler {
    pub fn new(model: &LatencyModel, exchange: ExchangeId, sip: SipId, seed: u64) -> Self {
        let owner = exchange.0 as u64 * 3 + sip.index() as u64;
        LinkSampler {
            dist: model.link(exchange, sip),
            correlation_us: model.correlation_us,
            fifo: model.fifo,
            rng: stream(seed, owner, Purpose::Latency),
            state: 0.0,
            last_sent: None,
            last_arrival: Timestamp(0),
        }
    }

    /// SIP arrival time of a message sent at `sent`. Sends must not go back in time.
    pub fn arrival(&mut self, sent: Timestamp) -> Timestamp {
        let z: f64 = self.rng.sample(StandardNormal);
        // Ornstein-Uhlenbeck step in log-delay space; stationary N(0, 1).
        let x = match (self.correlation_us, self.last_sent) {
            (Some(tau), Some(prev)) => {
                let a = (-((sent.0 - prev.0) as f64) / tau).exp();
                a * self.state + (1.0 - a * a).sqrt() * z
            }
            _ => z,
        };
        self.state = x;
        self.last_sent = Some(sent);
        let mut at = Timestamp(sent.0 + self.dist.delay(x));
        if self.fifo {
            at = at.max(self.last_arrival);
            self.last_arrival = at;
        }
        at
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_profile_links() {
        let m = LatencyModel::default();
        assert_eq!(m.link(venue::NASD, SipId::C), LinkDist::new(450.0, 0.25));
        assert_eq!(m.link(venue::CHX, SipId::A).median_us, 2250.0);
        assert_eq!(m.link(venue::QTRF, SipId::C).sigma, 0.75);
        assert_eq!(m.link(venue::QTRF, SipId::C).median_us, 450.0);
        m.validate().unwrap();
    }

    #[test]
    fn sip_specific_override() {
        let mut m = LatencyModel::uniform(LinkDist::new(100.0, 0.0));
        m.overrides.push(LinkOverride {
            exchange: venue::ARCA,
            sip: Some(SipId::B),
            median_us: Some(900.0),
            sigma: None,
            floor_us: Some(950),
        });
        assert_eq!(m.link(venue::ARCA, SipId::A).median_us, 100.0);
        let b = m.link(venue::ARCA, SipId::B);
        assert_eq!((b.median_us, b.floor_us), (900.0, 950));
        assert_eq!(b.delay(0.0), 950);
    }

    #[test]
    fn zero_model_is_instant() {
        let m = LatencyModel::zero();
        let mut s = LinkSampler::new(&m, venue::NASD, SipId::C, 1);
        for t in [0u64, 5, 5, 90] {
            assert_eq!(s.arrival(Timestamp(t)), Timestamp(t));
        }
    }

    #[test]
    fn fifo_never_reorders_a_link() {
        let m = LatencyModel { correlation_us: None, ..LatencyModel::default() };
        let mut s = LinkSampler::new(&m, venue::QTRF, SipId::C, 3);
        let mut last = Timestamp(0);
        for t in 0..10_000u64 {
            let at = s.arrival(Timestamp(t * 3));
            assert!(at >= last && at.0 >= t * 3);
            last = at;
        }
    }

    #[test]
    fn bad_parameters_rejected() {
        let mut m = LatencyModel::default();
        m.default_link.sigma = -1.0;
        assert!(m.validate().is_err());
    }
}
