//! Closed-form and brute-force oracles checked against the simulator.

mod support;

use std::collections::BTreeMap;

use frontrun_core::call::{Call, DexCall, Side};
use frontrun_core::chain::{select_miner, Transaction, Visibility};
use frontrun_core::dapps::BondingCurveDealer;
use frontrun_core::harness::catalog::{self, CURVE_M, CURVE_P0, CURVE_SLACK_UNITS, CURVE_UNITS, UNIT};
use frontrun_core::harness::run_scenario;
use frontrun_core::mitigations::batch::{clear, volume_at, BatchOrder};
use frontrun_core::ordering::grind_ctor_position;
use frontrun_core::rng;
use frontrun_core::types::{Address, Hash256, SimTime, Wei};
use support::sandwich;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn sandwich_profit_matches_brute_force_over_all_orderings() {
    let s = sandwich::sandwich();
    let outcomes = sandwich::all_orderings(&s);
    // Back before front is a nonce gap and cannot be mined.
    assert_eq!(outcomes.len(), 3);
    let best = outcomes.iter().map(|o| o.1).max().unwrap();
    assert_eq!(best, 50 * UNIT as i128);
    // The gas-price policy picks exactly the attacker's best ordering.
    assert_eq!(sandwich::gas_price_block(&s), Some(best));
    // And the end-to-end scenario realizes it.
    let r = run_scenario(&catalog::builtin("dex-sandwich").unwrap(), 0).unwrap();
    assert_eq!(r.attacker_gross_profit, best);
}

fn curve_sum(p0: Wei, m: Wei, s: u64, q: u64) -> Wei {
    (s..s + q).map(|i| p0 + m * i as Wei).sum()
}

proptest! {
    #[test]
    fn curve_cost_is_the_unit_price_sum(p0 in 0u128..1 << 60, m in 0u128..1 << 50, s in 0u64..5_000, q in 0u64..500) {
        prop_assert_eq!(BondingCurveDealer::new(p0, m).cost(s, q), curve_sum(p0, m, s, q));
    }
}

#[test]
fn curve_sandwich_profit_matches_closed_form() {
    let (front, units) = (CURVE_SLACK_UNITS, CURVE_UNITS);
    // Buy `front` first, the victim lifts the price, sell `front` back.
    let gross = curve_sum(CURVE_P0, CURVE_M, units, front) as i128 - curve_sum(CURVE_P0, CURVE_M, 0, front) as i128;
    assert_eq!(gross, (front as Wei * units as Wei * CURVE_M) as i128);
    let r = run_scenario(&catalog::builtin("curve-sandwich").unwrap(), 1).unwrap();
    assert_eq!(r.attacker_gross_profit, gross);
}

fn order(bid: bool, limit: u64, qty: u64, who: u8) -> BatchOrder {
    BatchOrder { side: if bid { Side::Bid } else { Side::Ask }, limit, qty, owner: Address::from_label(&format!("o{who}")) }
}

proptest! {
    #[test]
    fn batch_price_agrees_with_exhaustive_price_scan(
        raw in prop::collection::vec((any::<bool>(), 1u64..40, 1u64..20), 0..10)
    ) {
        let orders: Vec<BatchOrder> = raw.iter().enumerate().map(|(i, &(b, l, q))| order(b, l, q, i as u8)).collect();
        let vols: Vec<(u64, u64)> = (0..=41).map(|p| (p, volume_at(&orders, p))).collect();
        let best = vols.iter().map(|v| v.1).max().unwrap();
        match clear(&orders) {
            None => prop_assert_eq!(best, 0),
            Some(c) => {
                let argmax: Vec<u64> = vols.iter().filter(|v| v.1 == best).map(|v| v.0).collect();
                let (lo, hi) = (argmax[0], *argmax.last().unwrap());
                prop_assert_eq!(c.volume, best);
                prop_assert_eq!(c.price, lo + (hi - lo) / 2);
                let filled = |side| c.fills.iter().filter(|f| f.order.side == side).map(|f| f.filled).sum::<u64>();
                prop_assert_eq!(filled(Side::Bid), best);
                prop_assert_eq!(filled(Side::Ask), best);
                prop_assert!(c.fills.iter().all(|f| f.filled <= f.order.qty));
            }
        }
    }
}

#[test]
fn miner_selection_follows_hash_power() {
    let powers: Vec<(Address, f64)> =
        [0.23, 0.27, 0.25, 0.25].iter().enumerate().map(|(i, p)| (Address::from_label(&format!("m{i}")), *p)).collect();
    let mut r = rng::stream(7, rng::MINER_STREAM);
    let n = 100_000;
    let mut counts: BTreeMap<Address, u32> = BTreeMap::new();
    for _ in 0..n {
        *counts.entry(select_miner(&mut r, &powers).unwrap()).or_default() += 1;
    }
    for (m, p) in &powers {
        let f = counts[m] as f64 / n as f64;
        // Four binomial standard deviations.
        assert!((f - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt(), "{f} vs {p}");
    }
}

#[test]
fn ctor_grinding_success_matches_geometric_odds() {
    let mut r = rng::stream(11, rng::AGENT_STREAM_BASE);
    let (trials, k) = (500, 4u64);
    let (mut wins, mut expected) = (0u32, 0.0);
    for i in 0..trials {
        let victim = Hash256::of(&r.gen::<[u8; 32]>());
        let call = Call::Dex(DexCall::CancelOrder { id: i });
        let t = Transaction::new(Address::from_label("m"), 0, 1, 21_000, 0, call, SimTime::from_ticks(0), Visibility::Broadcast, r.gen());
        // Chance that a uniform hash sorts before the victim's.
        let p = victim.prefix_u64() as f64 / 2f64.powi(64);
        expected += 1.0 - (1.0 - p).powi(k as i32);
        wins += grind_ctor_position(&t, &victim, k).is_ok() as u32;
    }
    let (freq, expected) = (wins as f64 / trials as f64, expected / trials as f64);
    assert!((freq - expected).abs() < 0.05, "{freq} vs {expected}");
}
