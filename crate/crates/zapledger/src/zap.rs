//! The Zap record: per-token energy metadata, its canonical byte
//! serialization, hashing, and capped-history mutation.
//!
//! Canonical bytes are minified UTF-8 JSON with a fixed key order and
//! fixed-point decimal strings for fractional quantities, so the digest of a
//! Zap is identical across implementations and runs. The digest algorithm is
//! SHA-256 and is part of the external contract.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::account::AccountId;
use crate::ledger::TokenId;

/// Maximum entries retained in each Zap history. Older entries are dropped
/// ring-style once the cap is reached.
pub const HISTORY_CAP: usize = 5;

/// Minting windows are five minutes, so average power over the window is
/// energy x 12 (energy over 1/12 h).
pub const WINDOWS_PER_HOUR: u64 = 12;

/// Energy source behind a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergySource {
    Photovoltaic,
    Wind,
    Biodiesel,
    Hydro,
    Fossil,
    Other,
}

impl EnergySource {
    pub fn name(&self) -> &'static str {
        match self {
            EnergySource::Photovoltaic => "photovoltaic",
            EnergySource::Wind => "wind",
            EnergySource::Biodiesel => "biodiesel",
            EnergySource::Hydro => "hydro",
            EnergySource::Fossil => "fossil",
            EnergySource::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "photovoltaic" => EnergySource::Photovoltaic,
            "wind" => EnergySource::Wind,
            "biodiesel" => EnergySource::Biodiesel,
            "hydro" => EnergySource::Hydro,
            "fossil" => EnergySource::Fossil,
            "other" => EnergySource::Other,
            _ => return None,
        })
    }
}

/// A geographical point in fixed-point degrees with 6 decimal places.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeoPoint {
    /// Latitude in microdegrees, -90_000_000..=90_000_000.
    pub lat_udeg: i32,
    /// Longitude in microdegrees, -180_000_000..=180_000_000.
    pub lon_udeg: i32,
}

impl GeoPoint {
    pub fn new(lat_udeg: i32, lon_udeg: i32) -> Result<Self, ZapError> {
        if lat_udeg.abs() > 90_000_000 || lon_udeg.abs() > 180_000_000 {
            return Err(ZapError::InvalidLocation { lat_udeg, lon_udeg });
        }
        Ok(GeoPoint { lat_udeg, lon_udeg })
    }
}

/// The per-token energy metadata record.
///
/// Both histories run oldest-first, are never empty, never exceed
/// [`HISTORY_CAP`] entries, and always have equal length: every ownership
/// change appends one owner and one location.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Zap {
    pub token_id: TokenId,
    /// Unix seconds.
    pub created_at: u64,
    /// Energy represented, in milli-kWh (fixed point, 3 decimals).
    pub energy_mkwh: u64,
    /// Average power over the minting window, in milli-kW.
    pub power_mkw: u64,
    /// Estimated monetary value in US cents.
    pub value_usd_cents: u64,
    pub generator_id: u64,
    pub source: EnergySource,
    pub owner_history: Vec<AccountId>,
    pub location_history: Vec<GeoPoint>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ZapError {
    #[error("energy must be positive")]
    NonPositiveEnergy,
    #[error("location out of range: lat {lat_udeg} udeg, lon {lon_udeg} udeg")]
    InvalidLocation { lat_udeg: i32, lon_udeg: i32 },
    #[error("zap invariant violated: {0}")]
    InvariantViolation(String),
    #[error("canonical bytes did not parse: {0}")]
    Parse(String),
}

impl Zap {
    /// Build a fresh Zap for one five-minute generation window.
    ///
    /// `unit_price_usd_cents_per_kwh` fixes the monetary value at mint time;
    /// the value is round-half-up to whole cents.
    pub fn new(
        generator_id: u64,
        created_at: u64,
        energy_mkwh: u64,
        source: EnergySource,
        owner: AccountId,
        location: GeoPoint,
        unit_price_usd_cents_per_kwh: u64,
    ) -> Result<Self, ZapError> {
        if energy_mkwh == 0 {
            return Err(ZapError::NonPositiveEnergy);
        }
        Ok(Zap {
            token_id: TokenId::UNASSIGNED,
            created_at,
            energy_mkwh,
            power_mkw: energy_mkwh * WINDOWS_PER_HOUR,
            value_usd_cents: (energy_mkwh * unit_price_usd_cents_per_kwh + 500) / 1000,
            generator_id,
            source,
            owner_history: vec![owner],
            location_history: vec![location],
        })
    }

    pub fn current_owner(&self) -> AccountId {
        *self.owner_history.last().expect("history is never empty")
    }

    /// Append a new owner and location to the histories. When the cap is
    /// reached the oldest entry of each is dropped (ring semantics).
    pub fn append_history(&mut self, new_owner: AccountId, new_location: GeoPoint) {
        if self.owner_history.len() == HISTORY_CAP {
            self.owner_history.remove(0);
            self.location_history.remove(0);
        }
        self.owner_history.push(new_owner);
        self.location_history.push(new_location);
    }

    pub fn check_invariants(&self) -> Result<(), ZapError> {
        let violation = |msg: &str| Err(ZapError::InvariantViolation(msg.to_string()));
        if self.owner_history.is_empty() {
            return violation("empty owner history");
        }
        if self.owner_history.len() != self.location_history.len() {
            return violation("owner and location histories differ in length");
        }
        if self.owner_history.len() > HISTORY_CAP {
            return violation("history exceeds cap");
        }
        if self.energy_mkwh == 0 || self.power_mkw == 0 {
            return violation("non-positive energy or power");
        }
        for loc in &self.location_history {
            if loc.lat_udeg.abs() > 90_000_000 || loc.lon_udeg.abs() > 180_000_000 {
                return violation("location out of range");
            }
        }
        Ok(())
    }

    /// Canonical byte serialization: minified JSON, keys in a fixed order,
    /// fractional quantities as fixed-decimal strings (3 places for kWh/kW,
    /// 6 for degrees).
    pub fn canonical_bytes(&self) -> Result<Vec<u8>, ZapError> {
        self.check_invariants()?;
        let mut out = String::with_capacity(256);
        out.push_str("{\"version\":1");
        out.push_str(&format!(",\"token_id\":{}", self.token_id.value()));
        out.push_str(&format!(",\"created_at\":{}", self.created_at));
        out.push_str(&format!(
            ",\"energy_kwh\":\"{}\"",
            format_milli(self.energy_mkwh)
        ));
        out.push_str(&format!(
            ",\"power_kw\":\"{}\"",
            format_milli(self.power_mkw)
        ));
        out.push_str(&format!(",\"value_usd_cents\":{}", self.value_usd_cents));
        out.push_str(&format!(",\"generator_id\":{}", self.generator_id));
        out.push_str(&format!(",\"source\":\"{}\"", self.source.name()));
        out.push_str(",\"owner_history\":[");
        for (i, owner) in self.owner_history.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("\"{owner}\""));
        }
        out.push_str("],\"location_history\":[");
        for (i, loc) in self.location_history.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "{{\"lat\":\"{}\",\"lon\":\"{}\"}}",
                format_micro(loc.lat_udeg),
                format_micro(loc.lon_udeg)
            ));
        }
        out.push_str("]}");
        Ok(out.into_bytes())
    }

    /// Parse canonical bytes back into a Zap. Inverse of
    /// [`Zap::canonical_bytes`] for every valid record.
    pub fn from_canonical_bytes(bytes: &[u8]) -> Result<Self, ZapError> {
        let raw: RawZap =
            serde_json::from_slice(bytes).map_err(|e| ZapError::Parse(e.to_string()))?;
        if raw.version != 1 {
            return Err(ZapError::Parse(format!(
                "unsupported version {}",
                raw.version
            )));
        }
        let source = EnergySource::parse(&raw.source)
            .ok_or_else(|| ZapError::Parse(format!("unknown source {:?}", raw.source)))?;
        let mut locations = Vec::with_capacity(raw.location_history.len());
        for loc in &raw.location_history {
            locations.push(GeoPoint {
                lat_udeg: parse_micro(&loc.lat)?,
                lon_udeg: parse_micro(&loc.lon)?,
            });
        }
        let mut owners = Vec::with_capacity(raw.owner_history.len());
        for o in &raw.owner_history {
            owners.push(AccountId::parse(o).map_err(|e| ZapError::Parse(e.to_string()))?);
        }
        let zap = Zap {
            token_id: TokenId::new(raw.token_id),
            created_at: raw.created_at,
            energy_mkwh: parse_milli(&raw.energy_kwh)?,
            power_mkw: parse_milli(&raw.power_kw)?,
            value_usd_cents: raw.value_usd_cents,
            generator_id: raw.generator_id,
            source,
            owner_history: owners,
            location_history: locations,
        };
        zap.check_invariants()?;
        Ok(zap)
    }
}

#[derive(Deserialize)]
struct RawZap {
    version: u64,
    token_id: u64,
    created_at: u64,
    energy_kwh: String,
    power_kw: String,
    value_usd_cents: u64,
    generator_id: u64,
    source: String,
    owner_history: Vec<String>,
    location_history: Vec<RawGeo>,
}

#[derive(Deserialize)]
struct RawGeo {
    lat: String,
    lon: String,
}

/// Render milli-units as a 3-decimal fixed-point string ("0.250").
pub fn format_milli(v: u64) -> String {
    format!("{}.{:03}", v / 1000, v % 1000)
}

/// Render microdegrees as a 6-decimal fixed-point string ("-79.383200").
pub fn format_micro(v: i32) -> String {
    let sign = if v < 0 { "-" } else { "" };
    let a = v.unsigned_abs();
    format!("{sign}{}.{:06}", a / 1_000_000, a % 1_000_000)
}

/// Parse a 3-decimal fixed-point string into milli-units.
pub fn parse_milli(s: &str) -> Result<u64, ZapError> {
    parse_fixed(s, 3).and_then(|v| {
        u64::try_from(v).map_err(|_| ZapError::Parse(format!("negative quantity {s:?}")))
    })
}

/// Parse a signed 6-decimal fixed-point string into microdegrees.
pub fn parse_micro(s: &str) -> Result<i32, ZapError> {
    parse_fixed(s, 6).and_then(|v| {
        i32::try_from(v).map_err(|_| ZapError::Parse(format!("coordinate out of range {s:?}")))
    })
}

/// Parse a fixed-point decimal string with exactly `places` fractional
/// digits into scaled integer units.
fn parse_fixed(s: &str, places: usize) -> Result<i64, ZapError> {
    let bad = || ZapError::Parse(format!("bad fixed-point literal {s:?}"));
    let (sign, rest) = match s.strip_prefix('-') {
        Some(r) => (-1i64, r),
        None => (1i64, s),
    };
    let (int_part, frac_part) = rest.split_once('.').ok_or_else(bad)?;
    if int_part.is_empty()
        || frac_part.len() != places
        || !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let scale = 10i64.pow(places as u32);
    let int: i64 = int_part.parse().map_err(|_| bad())?;
    let frac: i64 = frac_part.parse().map_err(|_| bad())?;
    Ok(sign * (int * scale + frac))
}

/// SHA-256 digest of a Zap's canonical bytes.
#[derive(Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataHash(pub [u8; 32]);

impl MetadataHash {
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(64);
        for b in &self.0 {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }
}

impl fmt::Debug for MetadataHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MetadataHash({})", self.to_hex())
    }
}

/// Hash arbitrary metadata bytes. SHA-256 over the exact bytes given.
pub fn metadata_hash(bytes: &[u8]) -> MetadataHash {
    let digest = Sha256::digest(bytes);
    MetadataHash(digest.into())
}
