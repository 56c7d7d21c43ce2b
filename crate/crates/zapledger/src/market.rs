//! Neighborhood energy-market simulation driving the token ledger.
//!
//! Time advances in fixed ticks. Each tick every generating household mints
//! one Zap for that tick's output, every consuming household drains its
//! wallet oldest-Zap-first, and households left with a deficit buy whole
//! surplus Zaps from peers. At the end of each billing cycle the residual
//! deficit is charged at the utility rate and covered by utility-minted
//! Zaps. The engine is fully deterministic: the seed only feeds the
//! confirmation-latency sampling in [`schedule_feasibility`].

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::account::{AccountId, UTILITY_ACCOUNT};
use crate::ledger::TokenId;
use crate::meter::MoneyAmount;
use crate::profile::ChainProfile;
use crate::strategy::{OpReceipt, StrategyError, StrategyKind, StrategyLedger};
use crate::zap::{
    format_milli, metadata_hash, parse_milli, EnergySource, GeoPoint, Zap, ZapError,
    WINDOWS_PER_HOUR,
};

/// Wall-clock start of every simulation run.
pub const SIM_EPOCH: u64 = 1_600_000_000;

pub const SECONDS_PER_DAY: u64 = 86_400;

/// Serialize milli-kWh quantities as 3-decimal strings ("0.250").
mod kwh_text {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_milli(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let text = String::deserialize(d)?;
        super::parse_milli(&text).map_err(serde::de::Error::custom)
    }
}

/// Serialize a [`GeoPoint`] as `{"lat": "43.653200", "lon": "-79.383200"}`.
mod geo_text {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::zap::{format_micro, parse_micro, GeoPoint};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        lat: String,
        lon: String,
    }

    pub fn serialize<S: Serializer>(p: &GeoPoint, s: S) -> Result<S::Ok, S::Error> {
        Repr {
            lat: format_micro(p.lat_udeg),
            lon: format_micro(p.lon_udeg),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<GeoPoint, D::Error> {
        let repr = Repr::deserialize(d)?;
        let lat = parse_micro(&repr.lat).map_err(serde::de::Error::custom)?;
        let lon = parse_micro(&repr.lon).map_err(serde::de::Error::custom)?;
        GeoPoint::new(lat, lon).map_err(serde::de::Error::custom)
    }
}

/// One participant on the neighborhood grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Household {
    pub account: AccountId,
    #[serde(with = "geo_text")]
    pub location: GeoPoint,
    /// 0 when the household has no generator.
    pub generator_id: u64,
    pub source: EnergySource,
    #[serde(rename = "generation_kwh_per_tick", with = "kwh_text")]
    pub generation_mkwh: u64,
    #[serde(rename = "consumption_kwh_per_tick", with = "kwh_text")]
    pub consumption_mkwh: u64,
}

/// A complete simulation input: the neighborhood plus the time grid and
/// billing parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridScenario {
    pub name: String,
    pub households: Vec<Household>,
    pub tick_seconds: u64,
    pub ticks_per_day: u64,
    pub days: u64,
    pub cycle_days: u64,
    pub utility_rate_usd_cents_per_kwh: u64,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario document malformed: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("ticks_per_day x tick_seconds must equal 86400, got {0}")]
    BadTickGrid(u64),
    #[error("cycle_days must be positive and divide days")]
    BadCycle,
    #[error("household {0} must have generator_id > 0 exactly when it generates")]
    GeneratorMismatch(AccountId),
    #[error("duplicate household account {0}")]
    DuplicateAccount(AccountId),
    #[error("account {0} is reserved for the utility")]
    ReservedAccount(AccountId),
}

impl GridScenario {
    pub fn from_json_str(text: &str) -> Result<GridScenario, ScenarioError> {
        let scenario: GridScenario = serde_json::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json_string(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("scenario serializes");
        out.push('\n');
        out
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let grid = self.ticks_per_day * self.tick_seconds;
        if grid != SECONDS_PER_DAY {
            return Err(ScenarioError::BadTickGrid(grid));
        }
        if self.cycle_days == 0 || !self.days.is_multiple_of(self.cycle_days) {
            return Err(ScenarioError::BadCycle);
        }
        let mut seen = std::collections::BTreeSet::new();
        for hh in &self.households {
            if hh.account == UTILITY_ACCOUNT {
                return Err(ScenarioError::ReservedAccount(hh.account));
            }
            if !seen.insert(hh.account) {
                return Err(ScenarioError::DuplicateAccount(hh.account));
            }
            if (hh.generator_id == 0) != (hh.generation_mkwh == 0) {
                return Err(ScenarioError::GeneratorMismatch(hh.account));
            }
        }
        Ok(())
    }

    pub fn total_ticks(&self) -> u64 {
        self.days * self.ticks_per_day
    }
}

/// One token position in a household's wallet. Wallets stay sorted by
/// (created_at, token_id), which is the drain order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Holding {
    pub token_id: TokenId,
    pub created_at: u64,
    /// The account that minted the token. A Zap is sellable only while it
    /// is untouched and still held by its producer, so resale is impossible.
    pub producer: AccountId,
    pub face_mkwh: u64,
    pub remaining_mkwh: u64,
    pub value_usd_cents: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConsumeOutcome {
    pub drained_mkwh: u64,
    pub deficit_mkwh: u64,
}

/// Drain `demand_mkwh` from the holdings oldest-first. Fully drained
/// entries stay in place with zero remaining; the unmet remainder comes
/// back as the deficit.
pub fn consume_step(holdings: &mut [Holding], demand_mkwh: u64) -> ConsumeOutcome {
    let mut need = demand_mkwh;
    for holding in holdings.iter_mut() {
        if need == 0 {
            break;
        }
        let take = holding.remaining_mkwh.min(need);
        holding.remaining_mkwh -= take;
        need -= take;
    }
    ConsumeOutcome {
        drained_mkwh: demand_mkwh - need,
        deficit_mkwh: need,
    }
}

/// Per-household totals accumulated over one billing cycle, the input to
/// [`settle_cycle`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleTotals {
    pub account: AccountId,
    pub produced_mkwh: u64,
    pub consumed_mkwh: u64,
    pub revenue_usd_cents: u64,
    pub purchases_usd_cents: u64,
    /// Consumption not covered by own or purchased Zaps.
    pub deficit_mkwh: u64,
}

/// One household's bill for one cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BillingStatement {
    pub account: AccountId,
    pub cycle_index: u64,
    #[serde(rename = "produced_kwh", with = "kwh_text")]
    pub produced_mkwh: u64,
    #[serde(rename = "consumed_kwh", with = "kwh_text")]
    pub consumed_mkwh: u64,
    pub revenue_usd_cents: u64,
    pub purchases_usd_cents: u64,
    pub utility_charge_usd_cents: u64,
    pub zaps_received_from_utility: u64,
}

/// Charge the residual deficits at the utility rate and turn cycle totals
/// into statements. Pure arithmetic; the utility's covering mints and
/// transfers happen around this in [`run`].
pub fn settle_cycle(
    totals: &[CycleTotals],
    cycle_index: u64,
    utility_rate_usd_cents_per_kwh: u64,
) -> Vec<BillingStatement> {
    totals
        .iter()
        .map(|t| BillingStatement {
            account: t.account,
            cycle_index,
            produced_mkwh: t.produced_mkwh,
            consumed_mkwh: t.consumed_mkwh,
            revenue_usd_cents: t.revenue_usd_cents,
            purchases_usd_cents: t.purchases_usd_cents,
            utility_charge_usd_cents: charge_for(t.deficit_mkwh, utility_rate_usd_cents_per_kwh),
            zaps_received_from_utility: u64::from(t.deficit_mkwh > 0),
        })
        .collect()
}

/// Round-half-up milli-kWh x cents/kWh, the same rounding Zap values use.
fn charge_for(energy_mkwh: u64, rate_usd_cents_per_kwh: u64) -> u64 {
    (energy_mkwh * rate_usd_cents_per_kwh + 500) / 1000
}

/// One record in the simulation event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimEvent {
    pub seq: u64,
    pub timestamp: u64,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventBody {
    Mint {
        account: AccountId,
        token_id: TokenId,
        #[serde(with = "kwh_text")]
        energy_kwh: u64,
        value_usd_cents: u64,
    },
    /// A market purchase: the buyer pays the value fixed at mint time.
    Transfer {
        seller: AccountId,
        buyer: AccountId,
        token_id: TokenId,
        #[serde(with = "kwh_text")]
        energy_kwh: u64,
        value_usd_cents: u64,
    },
    /// Demand applied to one wallet. The deficit here is pre-market; the
    /// market phase may still cover it with purchased Zaps.
    Consume {
        account: AccountId,
        #[serde(with = "kwh_text")]
        demand_kwh: u64,
        #[serde(with = "kwh_text")]
        drained_kwh: u64,
        #[serde(with = "kwh_text")]
        deficit_kwh: u64,
    },
    /// End-of-cycle bill. Utility covering mints and transfers are folded
    /// into this record via its attached receipts.
    Settle {
        account: AccountId,
        cycle_index: u64,
        #[serde(with = "kwh_text")]
        produced_kwh: u64,
        #[serde(with = "kwh_text")]
        consumed_kwh: u64,
        revenue_usd_cents: u64,
        purchases_usd_cents: u64,
        utility_charge_usd_cents: u64,
        utility_token_id: Option<TokenId>,
        #[serde(with = "kwh_text")]
        utility_kwh: u64,
    },
}

/// A priced operation tied to the event that caused it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiptRecord {
    pub event_seq: u64,
    pub receipt: OpReceipt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub strategy: StrategyKind,
    pub seed: u64,
    pub events: Vec<SimEvent>,
    pub receipts: Vec<ReceiptRecord>,
    pub statements: Vec<BillingStatement>,
    /// Remaining un-drained milli-kWh per token, over every token minted.
    pub spent_registry: BTreeMap<TokenId, u64>,
    /// Final authoritative metadata records.
    pub zaps: BTreeMap<TokenId, Zap>,
}

impl SimResult {
    pub fn events_jsonl(&self) -> String {
        jsonl(&self.events)
    }

    pub fn receipts_jsonl(&self) -> String {
        jsonl(&self.receipts)
    }

    pub fn statements_csv(&self) -> String {
        statements_csv(&self.statements)
    }
}

fn jsonl<T: Serialize>(rows: &[T]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&serde_json::to_string(row).expect("row serializes"));
        out.push('\n');
    }
    out
}

pub fn statements_csv(statements: &[BillingStatement]) -> String {
    let mut out = String::from(
        "account,cycle_index,produced_kwh,consumed_kwh,revenue_usd_cents,\
         purchases_usd_cents,utility_charge_usd_cents,zaps_received_from_utility\n",
    );
    for st in statements {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            st.account,
            st.cycle_index,
            format_milli(st.produced_mkwh),
            format_milli(st.consumed_mkwh),
            st.revenue_usd_cents,
            st.purchases_usd_cents,
            st.utility_charge_usd_cents,
            st.zaps_received_from_utility,
        ));
    }
    out
}

#[derive(Debug, Error)]
pub enum MarketError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Metadata(#[from] ZapError),
}

struct HouseState {
    spec: Household,
    /// Holdings with remaining energy, in drain order.
    active: Vec<Holding>,
    /// Fully drained holdings, kept for the spent registry.
    drained: Vec<Holding>,
    totals: CycleTotals,
}

struct Engine {
    kind: StrategyKind,
    ledger: StrategyLedger,
    rate: u64,
    houses: Vec<HouseState>,
    /// House indexes sorted by account id; matching order.
    by_account: Vec<usize>,
    zaps: BTreeMap<TokenId, Zap>,
    bytes: BTreeMap<TokenId, Vec<u8>>,
    events: Vec<SimEvent>,
    receipts: Vec<ReceiptRecord>,
    statements: Vec<BillingStatement>,
}

fn insert_fifo(list: &mut Vec<Holding>, holding: Holding) {
    let key = (holding.created_at, holding.token_id);
    let pos = list.partition_point(|h| (h.created_at, h.token_id) <= key);
    list.insert(pos, holding);
}

impl Engine {
    fn log(&mut self, timestamp: u64, body: EventBody) -> u64 {
        let seq = self.events.len() as u64;
        self.events.push(SimEvent {
            seq,
            timestamp,
            body,
        });
        seq
    }

    fn attach(&mut self, event_seq: u64, receipts: Vec<OpReceipt>) {
        for receipt in receipts {
            self.receipts.push(ReceiptRecord { event_seq, receipt });
        }
    }

    fn register_zap(&mut self, zap: Zap) -> Result<(), MarketError> {
        let bytes = zap.canonical_bytes()?;
        self.bytes.insert(zap.token_id, bytes);
        self.zaps.insert(zap.token_id, zap);
        Ok(())
    }

    fn mint_house(&mut self, house: usize, ts: u64) -> Result<(), MarketError> {
        let spec = self.houses[house].spec.clone();
        let mut zap = Zap::new(
            spec.generator_id,
            ts,
            spec.generation_mkwh,
            spec.source,
            spec.account,
            spec.location,
            self.rate,
        )?;
        let (ids, receipt) = self.ledger.mint_zaps(spec.account, vec![zap.clone()])?;
        zap.token_id = ids[0];
        let seq = self.log(
            ts,
            EventBody::Mint {
                account: spec.account,
                token_id: zap.token_id,
                energy_kwh: zap.energy_mkwh,
                value_usd_cents: zap.value_usd_cents,
            },
        );
        self.attach(seq, vec![receipt]);
        let holding = Holding {
            token_id: zap.token_id,
            created_at: zap.created_at,
            producer: spec.account,
            face_mkwh: zap.energy_mkwh,
            remaining_mkwh: zap.energy_mkwh,
            value_usd_cents: zap.value_usd_cents,
        };
        self.register_zap(zap)?;
        let state = &mut self.houses[house];
        insert_fifo(&mut state.active, holding);
        state.totals.produced_mkwh += spec.generation_mkwh;
        Ok(())
    }

    /// Move the ledger token and keep the off-chain record in lockstep.
    /// Returns the receipts of every chain operation involved.
    fn transfer_token(
        &mut self,
        from: AccountId,
        to: AccountId,
        id: TokenId,
        new_location: GeoPoint,
    ) -> Result<Vec<OpReceipt>, MarketError> {
        let mut receipts = Vec::new();
        let payload_pre;
        let payload: Option<&[Vec<u8>]> = match self.kind {
            StrategyKind::Lightweight => {
                payload_pre = vec![self.bytes[&id].clone()];
                Some(&payload_pre)
            }
            _ => None,
        };
        let (receipt, updated) =
            self.ledger
                .transfer_zaps(from, from, to, &[id], new_location, payload)?;
        receipts.push(receipt);

        let zap = self
            .zaps
            .get_mut(&id)
            .expect("transferred token is registered");
        zap.append_history(to, new_location);
        let new_bytes = zap.canonical_bytes()?;
        if let Some(updated) = updated {
            debug_assert_eq!(updated[0], new_bytes);
        }
        if self.kind == StrategyKind::Featherweight {
            let digest = metadata_hash(&new_bytes);
            receipts.push(self.ledger.fw_modify_zap(to, id, digest)?);
        }
        self.bytes.insert(id, new_bytes);
        Ok(receipts)
    }

    /// Find the next sellable Zap: the oldest untouched self-produced
    /// holding of the seller with the lowest account id. Returns house and
    /// wallet positions.
    fn pick_seller(&self, buyer: usize) -> Option<(usize, usize)> {
        for &house in &self.by_account {
            if house == buyer {
                continue;
            }
            let state = &self.houses[house];
            let pos = state
                .active
                .iter()
                .position(|h| h.producer == state.spec.account && h.remaining_mkwh == h.face_mkwh);
            if let Some(pos) = pos {
                return Some((house, pos));
            }
        }
        None
    }

    /// Round-robin market phase: buyers in account order each take one
    /// whole Zap per round while they still have a deficit and any seller
    /// has surplus.
    fn match_market(&mut self, ts: u64, deficits: &mut [u64]) -> Result<(), MarketError> {
        loop {
            let mut any = false;
            for i in 0..self.by_account.len() {
                let buyer = self.by_account[i];
                if deficits[buyer] == 0 {
                    continue;
                }
                let Some((seller, pos)) = self.pick_seller(buyer) else {
                    continue;
                };
                let mut holding = self.houses[seller].active.remove(pos);
                let seller_acct = self.houses[seller].spec.account;
                let buyer_acct = self.houses[buyer].spec.account;
                let buyer_loc = self.houses[buyer].spec.location;
                let chain =
                    self.transfer_token(seller_acct, buyer_acct, holding.token_id, buyer_loc)?;
                let seq = self.log(
                    ts,
                    EventBody::Transfer {
                        seller: seller_acct,
                        buyer: buyer_acct,
                        token_id: holding.token_id,
                        energy_kwh: holding.face_mkwh,
                        value_usd_cents: holding.value_usd_cents,
                    },
                );
                self.attach(seq, chain);
                self.houses[seller].totals.revenue_usd_cents += holding.value_usd_cents;
                self.houses[buyer].totals.purchases_usd_cents += holding.value_usd_cents;

                // The purchase immediately serves the open deficit; any
                // leftover stays in the buyer's wallet for later ticks.
                let take = holding.remaining_mkwh.min(deficits[buyer]);
                holding.remaining_mkwh -= take;
                deficits[buyer] -= take;
                let buyer_state = &mut self.houses[buyer];
                if holding.remaining_mkwh == 0 {
                    buyer_state.drained.push(holding);
                } else {
                    insert_fifo(&mut buyer_state.active, holding);
                }
                any = true;
            }
            if !any {
                return Ok(());
            }
        }
    }

    fn settle(&mut self, cycle_index: u64, ts: u64) -> Result<(), MarketError> {
        let totals: Vec<CycleTotals> = self.houses.iter().map(|h| h.totals).collect();
        let statements = settle_cycle(&totals, cycle_index, self.rate);
        for (house, statement) in statements.into_iter().enumerate() {
            let deficit = totals[house].deficit_mkwh;
            let mut chain = Vec::new();
            let mut utility_token = None;
            if deficit > 0 {
                let location = self.houses[house].spec.location;
                let account = self.houses[house].spec.account;
                let mut zap = Zap::new(
                    0,
                    ts,
                    deficit,
                    EnergySource::Hydro,
                    UTILITY_ACCOUNT,
                    location,
                    self.rate,
                )?;
                let (ids, mint_receipt) =
                    self.ledger.mint_zaps(UTILITY_ACCOUNT, vec![zap.clone()])?;
                zap.token_id = ids[0];
                chain.push(mint_receipt);
                self.register_zap(zap)?;
                chain.extend(self.transfer_token(UTILITY_ACCOUNT, account, ids[0], location)?);
                // The covering Zap arrives fully spent: it stands in for
                // energy the grid already delivered this cycle.
                let record = &self.zaps[&ids[0]];
                self.houses[house].drained.push(Holding {
                    token_id: ids[0],
                    created_at: record.created_at,
                    producer: UTILITY_ACCOUNT,
                    face_mkwh: deficit,
                    remaining_mkwh: 0,
                    value_usd_cents: record.value_usd_cents,
                });
                utility_token = Some(ids[0]);
            }
            let seq = self.log(
                ts,
                EventBody::Settle {
                    account: statement.account,
                    cycle_index,
                    produced_kwh: statement.produced_mkwh,
                    consumed_kwh: statement.consumed_mkwh,
                    revenue_usd_cents: statement.revenue_usd_cents,
                    purchases_usd_cents: statement.purchases_usd_cents,
                    utility_charge_usd_cents: statement.utility_charge_usd_cents,
                    utility_token_id: utility_token,
                    utility_kwh: deficit,
                },
            );
            self.attach(seq, chain);
            self.statements.push(statement);
            let state = &mut self.houses[house];
            state.totals = CycleTotals {
                account: state.spec.account,
                produced_mkwh: 0,
                consumed_mkwh: 0,
                revenue_usd_cents: 0,
                purchases_usd_cents: 0,
                deficit_mkwh: 0,
            };
        }
        Ok(())
    }
}

/// Run the full simulation. Deterministic: identical inputs give identical
/// results, byte for byte; `seed` is carried through for the feasibility
/// sampling and has no effect on the event log.
pub fn run(
    scenario: &GridScenario,
    kind: StrategyKind,
    profile: &ChainProfile,
    seed: u64,
) -> Result<SimResult, MarketError> {
    scenario.validate()?;
    let (ledger, _deploy) = StrategyLedger::deploy(kind, profile.clone());
    let mut by_account: Vec<usize> = (0..scenario.households.len()).collect();
    by_account.sort_by_key(|&i| scenario.households[i].account);
    let mut engine = Engine {
        kind,
        ledger,
        rate: scenario.utility_rate_usd_cents_per_kwh,
        houses: scenario
            .households
            .iter()
            .map(|spec| HouseState {
                spec: spec.clone(),
                active: Vec::new(),
                drained: Vec::new(),
                totals: CycleTotals {
                    account: spec.account,
                    produced_mkwh: 0,
                    consumed_mkwh: 0,
                    revenue_usd_cents: 0,
                    purchases_usd_cents: 0,
                    deficit_mkwh: 0,
                },
            })
            .collect(),
        by_account,
        zaps: BTreeMap::new(),
        bytes: BTreeMap::new(),
        events: Vec::new(),
        receipts: Vec::new(),
        statements: Vec::new(),
    };

    for day in 0..scenario.days {
        for tick in 0..scenario.ticks_per_day {
            let ts = SIM_EPOCH + (day * scenario.ticks_per_day + tick) * scenario.tick_seconds;
            for house in 0..engine.houses.len() {
                if engine.houses[house].spec.generation_mkwh > 0 {
                    engine.mint_house(house, ts)?;
                }
            }
            let mut deficits = vec![0u64; engine.houses.len()];
            for (house, deficit) in deficits.iter_mut().enumerate() {
                let demand = engine.houses[house].spec.consumption_mkwh;
                if demand == 0 {
                    continue;
                }
                let state = &mut engine.houses[house];
                let outcome = consume_step(&mut state.active, demand);
                state.totals.consumed_mkwh += demand;
                let first_live = state
                    .active
                    .iter()
                    .position(|h| h.remaining_mkwh > 0)
                    .unwrap_or(state.active.len());
                let mut rest = state.active.split_off(first_live);
                std::mem::swap(&mut state.active, &mut rest);
                state.drained.extend(rest);
                *deficit = outcome.deficit_mkwh;
                let account = state.spec.account;
                engine.log(
                    ts,
                    EventBody::Consume {
                        account,
                        demand_kwh: demand,
                        drained_kwh: outcome.drained_mkwh,
                        deficit_kwh: outcome.deficit_mkwh,
                    },
                );
            }
            engine.match_market(ts, &mut deficits)?;
            for (house, residual) in deficits.iter().enumerate() {
                engine.houses[house].totals.deficit_mkwh += residual;
            }
        }
        if (day + 1) % scenario.cycle_days == 0 {
            let cycle_index = day / scenario.cycle_days;
            engine.settle(cycle_index, SIM_EPOCH + (day + 1) * SECONDS_PER_DAY)?;
        }
    }

    let mut spent_registry = BTreeMap::new();
    for state in &engine.houses {
        for holding in state.active.iter().chain(state.drained.iter()) {
            spent_registry.insert(holding.token_id, holding.remaining_mkwh);
        }
    }
    Ok(SimResult {
        strategy: kind,
        seed,
        events: engine.events,
        receipts: engine.receipts,
        statements: engine.statements,
        spent_registry,
        zaps: engine.zaps,
    })
}

/// Projected cost of running `houses` households for `days` days at one
/// mint and one transfer per five-minute window per house, at the given
/// per-operation currency costs. Currency-only: the gwei leg is zero.
pub fn viability_report(
    houses: u64,
    mint_usd_cents: u64,
    transfer_usd_cents: u64,
    days: u64,
) -> MoneyAmount {
    let windows = houses * days * 24 * WINDOWS_PER_HOUR;
    MoneyAmount {
        gwei: 0,
        usd_cents: windows * (mint_usd_cents + transfer_usd_cents),
    }
}

/// Worst observed latency per operation type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityRow {
    pub op_name: String,
    pub count: u64,
    pub worst_processing_seconds: f64,
    pub worst_confirmation_seconds: f64,
    pub worst_total_seconds: f64,
    /// Whether execution alone meets the window.
    pub processing_fits: bool,
    /// Whether execution plus confirmation meets the window.
    pub fits: bool,
}

/// Check every simulated operation against a completion window.
/// Processing time is gas over profile throughput; confirmation latency is
/// sampled per operation from the result's seed, so reruns reproduce the
/// same report.
pub fn schedule_feasibility(
    result: &SimResult,
    profile: &ChainProfile,
    window_seconds: f64,
) -> Vec<FeasibilityRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(result.seed);
    let mut rows: BTreeMap<String, FeasibilityRow> = BTreeMap::new();
    for record in &result.receipts {
        let processing = record.receipt.gas_units as f64 / profile.throughput_gas_per_sec as f64;
        let confirmation = profile.confirmation_latency.sample(&mut rng);
        let row = rows
            .entry(record.receipt.op_name.clone())
            .or_insert_with(|| FeasibilityRow {
                op_name: record.receipt.op_name.clone(),
                count: 0,
                worst_processing_seconds: 0.0,
                worst_confirmation_seconds: 0.0,
                worst_total_seconds: 0.0,
                processing_fits: true,
                fits: true,
            });
        row.count += 1;
        row.worst_processing_seconds = row.worst_processing_seconds.max(processing);
        row.worst_confirmation_seconds = row.worst_confirmation_seconds.max(confirmation);
        row.worst_total_seconds = row.worst_total_seconds.max(processing + confirmation);
    }
    let mut report: Vec<FeasibilityRow> = rows.into_values().collect();
    for row in &mut report {
        row.processing_fits = row.worst_processing_seconds <= window_seconds;
        row.fits = row.worst_total_seconds <= window_seconds;
    }
    report
}
