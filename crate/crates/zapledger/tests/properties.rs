//! Property suite: serialization laws, ledger conservation and atomicity,
//! wallet draining against a naive oracle, and pricing algebra.

use proptest::prelude::*;
use zapledger::market::{consume_step, Holding};
use zapledger::meter::{gas_to_money, price_trace, Rate};
use zapledger::profile::ChainProfile;
use zapledger::zap::{metadata_hash, EnergySource, GeoPoint, Zap, HISTORY_CAP};
use zapledger::{AccountId, LedgerState, ResourceKind, ResourceTrace, TokenId};

fn account_strategy() -> impl Strategy<Value = AccountId> {
    proptest::array::uniform20(any::<u8>()).prop_map(AccountId::from_bytes)
}

fn location_strategy() -> impl Strategy<Value = GeoPoint> {
    (-90_000_000i32..=90_000_000, -180_000_000i32..=180_000_000)
        .prop_map(|(lat, lon)| GeoPoint::new(lat, lon).unwrap())
}

fn source_strategy() -> impl Strategy<Value = EnergySource> {
    prop_oneof![
        Just(EnergySource::Photovoltaic),
        Just(EnergySource::Wind),
        Just(EnergySource::Biodiesel),
        Just(EnergySource::Hydro),
        Just(EnergySource::Fossil),
        Just(EnergySource::Other),
    ]
}

prop_compose! {
    fn zap_strategy()(
        token_id in 0u64..1_000_000,
        created_at in 0u64..4_000_000_000,
        energy_mkwh in 1u64..10_000_000,
        power_mkw in 0u64..100_000_000,
        value_usd_cents in 0u64..10_000_000,
        generator_id in 0u64..1_000_000,
        source in source_strategy(),
        hops in proptest::collection::vec(
            (account_strategy(), location_strategy()),
            1..=HISTORY_CAP,
        ),
    ) -> Zap {
        let (owner_history, location_history) = hops.into_iter().unzip();
        Zap {
            token_id: TokenId::new(token_id),
            created_at,
            energy_mkwh,
            power_mkw,
            value_usd_cents,
            generator_id,
            source,
            owner_history,
            location_history,
        }
    }
}

proptest! {
    /// Canonical bytes parse back to the identical record.
    #[test]
    fn canonical_bytes_round_trip(zap in zap_strategy()) {
        let bytes = zap.canonical_bytes().unwrap();
        let back = Zap::from_canonical_bytes(&bytes).unwrap();
        prop_assert_eq!(back, zap);
    }

    /// Any single-field change gives different bytes and a different digest.
    #[test]
    fn field_changes_move_the_digest(zap in zap_strategy(), bump in 1u64..1000) {
        let baseline = zap.canonical_bytes().unwrap();
        let mut variants = Vec::new();
        for field in 0..5u8 {
            let mut v = zap.clone();
            match field {
                0 => v.token_id = TokenId::new(v.token_id.value() + bump),
                1 => v.created_at += bump,
                2 => v.energy_mkwh += bump,
                3 => v.value_usd_cents += bump,
                _ => v.generator_id += bump,
            }
            variants.push(v.canonical_bytes().unwrap());
        }
        for bytes in variants {
            prop_assert_ne!(&bytes, &baseline);
            prop_assert_ne!(metadata_hash(&bytes), metadata_hash(&baseline));
        }
    }

    /// History appends behave like a sliding window over the full hop list.
    #[test]
    fn history_cap_matches_slice_oracle(
        zap in zap_strategy(),
        extra in proptest::collection::vec(
            (account_strategy(), location_strategy()),
            0..12,
        ),
    ) {
        let mut all_owners = zap.owner_history.clone();
        let mut all_locs = zap.location_history.clone();
        let mut grown = zap;
        for (owner, loc) in extra {
            grown.append_history(owner, loc);
            all_owners.push(owner);
            all_locs.push(loc);
        }
        let keep = all_owners.len().saturating_sub(HISTORY_CAP);
        prop_assert_eq!(&grown.owner_history[..], &all_owners[keep..]);
        prop_assert_eq!(&grown.location_history[..], &all_locs[keep..]);
        grown.check_invariants().unwrap();
    }
}

proptest! {
    /// Minting then shuffling tokens around never changes any token's
    /// total supply, and every token always has exactly one holder.
    #[test]
    fn ledger_conserves_supply(
        minted in 1u64..20,
        moves in proptest::collection::vec((0usize..4, 0usize..4, 0u64..20), 0..30),
    ) {
        let accounts: Vec<AccountId> = (1u8..=4).map(AccountId::tagged).collect();
        let mut state = LedgerState::new();
        let (ids, _) = state.mint_balances(accounts[0], minted).unwrap();
        for (from, to, pick) in moves {
            let id = ids[(pick % minted) as usize];
            let from = accounts[from];
            let to = accounts[to];
            if from != to && state.balance_of(from, id) == 1 {
                state
                    .transfer_balances(from, from, to, &[id], &[1])
                    .unwrap();
            }
        }
        for id in &ids {
            prop_assert_eq!(state.total_supply(*id), 1);
            let holders = accounts
                .iter()
                .filter(|a| state.balance_of(**a, *id) == 1)
                .count();
            prop_assert_eq!(holders, 1);
        }
    }

    /// A batch with any bad token leaves the state untouched.
    #[test]
    fn failed_batch_is_atomic(
        minted in 2u64..10,
        good in 1usize..5,
    ) {
        let owner = AccountId::tagged(0x0a);
        let other = AccountId::tagged(0x0b);
        let mut state = LedgerState::new();
        let (ids, _) = state.mint_balances(owner, minted).unwrap();
        let before = state.clone();
        // Keep the prefix valid, then ask for a token the owner lacks.
        let mut batch: Vec<TokenId> =
            ids.iter().take(good.min(ids.len())).copied().collect();
        batch.push(TokenId::new(999_999));
        let amounts = vec![1u64; batch.len()];
        let result = state.transfer_balances(owner, owner, other, &batch, &amounts);
        prop_assert!(result.is_err());
        prop_assert_eq!(state, before);
    }
}

/// Reference drain: walk oldest-first over a copied list.
fn naive_drain(holdings: &[Holding], demand: u64) -> (Vec<u64>, u64, u64) {
    let mut remaining: Vec<u64> = holdings.iter().map(|h| h.remaining_mkwh).collect();
    let mut need = demand;
    let mut drained = 0;
    for slot in remaining.iter_mut() {
        let take = (*slot).min(need);
        *slot -= take;
        need -= take;
        drained += take;
    }
    (remaining, drained, need)
}

proptest! {
    /// consume_step agrees with the naive list walk on arbitrary wallets.
    #[test]
    fn consume_matches_naive_oracle(
        amounts in proptest::collection::vec(0u64..5_000, 0..25),
        demand in 0u64..50_000,
    ) {
        let mut holdings: Vec<Holding> = amounts
            .iter()
            .enumerate()
            .map(|(i, &rem)| Holding {
                token_id: TokenId::new(i as u64 + 1),
                created_at: 1_600_000_000 + i as u64,
                producer: AccountId::tagged(1),
                face_mkwh: rem.max(1),
                remaining_mkwh: rem,
                value_usd_cents: 0,
            })
            .collect();
        let total: u64 = amounts.iter().sum();
        let (expect_remaining, expect_drained, expect_deficit) =
            naive_drain(&holdings, demand);
        let outcome = consume_step(&mut holdings, demand);
        prop_assert_eq!(outcome.drained_mkwh, expect_drained);
        prop_assert_eq!(outcome.deficit_mkwh, expect_deficit);
        prop_assert_eq!(outcome.drained_mkwh + outcome.deficit_mkwh, demand);
        prop_assert!(outcome.drained_mkwh <= total);
        let got: Vec<u64> = holdings.iter().map(|h| h.remaining_mkwh).collect();
        prop_assert_eq!(got, expect_remaining);
    }
}

fn trace_strategy() -> impl Strategy<Value = ResourceTrace> {
    let kinds = [
        ResourceKind::TxBase,
        ResourceKind::ExecBase,
        ResourceKind::StorageWriteNew,
        ResourceKind::StorageWriteUpdate,
        ResourceKind::StorageRead,
        ResourceKind::HashWords,
        ResourceKind::CalldataBytes,
        ResourceKind::MemoryWords,
        ResourceKind::DeployBase,
        ResourceKind::DeployCodeBytes,
    ];
    proptest::collection::vec((0usize..kinds.len(), 1u64..2_000), 1..12).prop_map(move |events| {
        let mut trace = ResourceTrace::new();
        for (kind, count) in events {
            trace.push(kinds[kind], count);
        }
        trace
    })
}

proptest! {
    /// Pricing a concatenated trace equals the sum of pricing its halves:
    /// the quadratic memory term applies per event, so gas is additive
    /// over events.
    #[test]
    fn trace_pricing_is_additive(a in trace_strategy(), b in trace_strategy()) {
        let profile = ChainProfile::ethereum();
        let mut joined = a.clone();
        joined.extend(&b);
        let ga = price_trace(&a, &profile).unwrap().gas_units;
        let gb = price_trace(&b, &profile).unwrap().gas_units;
        let gj = price_trace(&joined, &profile).unwrap().gas_units;
        prop_assert_eq!(gj, ga + gb);
    }

    /// More gas never costs less, and the fast rate never costs less than
    /// the standard rate.
    #[test]
    fn money_is_monotone_in_gas(gas_a in 0u64..10_000_000, gas_b in 0u64..10_000_000) {
        let profile = ChainProfile::ethereum();
        let (lo, hi) = (gas_a.min(gas_b), gas_a.max(gas_b));
        for rate in [Rate::Fast, Rate::Standard] {
            let m_lo = gas_to_money(lo, rate, &profile);
            let m_hi = gas_to_money(hi, rate, &profile);
            prop_assert!(m_lo.gwei <= m_hi.gwei);
            prop_assert!(m_lo.usd_cents <= m_hi.usd_cents);
        }
        let fast = gas_to_money(hi, Rate::Fast, &profile);
        let standard = gas_to_money(hi, Rate::Standard, &profile);
        prop_assert!(fast.gwei >= standard.gwei);
        prop_assert!(fast.usd_cents >= standard.usd_cents);
    }
}
