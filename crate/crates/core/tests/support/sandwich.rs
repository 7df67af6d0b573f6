//! Exhaustive ordering oracle for the DEX sandwich.

use std::collections::BTreeSet;

use frontrun_core::call::{Call, DexCall, Side};
use frontrun_core::chain::exec::execute_tx;
use frontrun_core::chain::mempool::NodeView;
use frontrun_core::chain::{mine_block, Ledger, MinerBehavior, Transaction, Visibility};
use frontrun_core::dapps::{BlockContext, DappState, OrderBookDex};
use frontrun_core::harness::catalog::{ASK, LIMIT, QTY, UNIT};
use frontrun_core::harness::config::agent_address;
use frontrun_core::ordering::OrderingPolicy;
use frontrun_core::types::{fee, Address, SimTime, Wei};
use itertools::Itertools;

const ETH: Wei = 1_000_000_000_000_000_000;

pub struct Sandwich {
    ledger: Ledger,
    mallory: Address,
    front: Transaction,
    victim: Transaction,
    back: Transaction,
}

/// The dex-sandwich book: bob asks 10 at 100, alice market-buys 10 up to
/// 105, mallory buys bob's ask and re-offers at 105.
pub fn sandwich() -> Sandwich {
    let (alice, bob, mallory) = (agent_address("alice"), agent_address("bob"), agent_address("mallory"));
    let mut ledger = Ledger::new();
    for a in [alice, bob, mallory] {
        ledger.credit(a, 100 * ETH);
    }
    let mut dex = OrderBookDex::new(UNIT);
    dex.credit_units(bob, QTY);
    let ask = dex.place_resting(bob, Side::Ask, ASK, QTY);
    ledger.install(DappState::Dex(dex), None);
    let t = SimTime::from_ticks(1);
    let tx = |from, nonce, gp, value, call: DexCall| {
        let call = Call::Dex(call);
        Transaction::new(from, nonce, gp, call.gas_cost(), value, call, t, Visibility::Broadcast, 0)
    };
    let wei = |p: u64, q: u64| p as Wei * q as Wei * UNIT;
    Sandwich {
        front: tx(mallory, 0, 21, wei(ASK, QTY), DexCall::FillOrder { id: ask, qty: QTY }),
        back: tx(mallory, 1, 21, 0, DexCall::MakeOrder { side: Side::Ask, price: LIMIT, qty: QTY }),
        victim: tx(alice, 0, 20, wei(LIMIT, QTY), DexCall::MarketBuy { qty: QTY, limit: LIMIT }),
        ledger,
        mallory,
    }
}

/// Attacker wei gained before fees, with units marked at the ask price.
/// `None` if the ordering is not executable (nonce out of order).
pub fn gross_after(s: &Sandwich, order: &[&Transaction]) -> Option<i128> {
    let mut l = s.ledger.clone();
    l.height = 1;
    let ctx = BlockContext { height: 1, timestamp: SimTime::from_ticks(15), miner: Address::from_label("miner") };
    let before = l.balance(&s.mallory) as i128;
    let mut fees = 0;
    for tx in order {
        let r = execute_tx(&mut l, ctx, tx).ok()?;
        if tx.sender == s.mallory {
            fees += fee(r.gas_consumed, tx.gas_price) as i128;
        }
    }
    let DappState::Dex(dex) = l.dapp(frontrun_core::DappId::Dex).unwrap() else { unreachable!() };
    let units: u64 = dex.units_of(&s.mallory) + dex.book(Side::Ask).iter().filter(|o| o.owner == s.mallory).map(|o| o.qty).sum::<u64>();
    Some(l.balance(&s.mallory) as i128 - before + fees + units as i128 * (ASK as Wei * UNIT) as i128)
}

/// Attacker gross profit of every executable ordering of the three
/// transactions (indices: 0 front, 1 victim, 2 back).
pub fn all_orderings(s: &Sandwich) -> Vec<(Vec<usize>, i128)> {
    let txs = [&s.front, &s.victim, &s.back];
    (0..3)
        .permutations(3)
        .filter_map(|p| gross_after(s, &p.iter().map(|&i| txs[i]).collect::<Vec<_>>()).map(|g| (p, g)))
        .collect()
}

/// Attacker gross profit of the block an honest gas-price miner builds.
pub fn gas_price_block(s: &Sandwich) -> Option<i128> {
    let mut view = NodeView::new(Address::from_label("miner"));
    let txs = [&s.front, &s.victim, &s.back];
    for tx in txs {
        view.record(tx.hash, SimTime::from_ticks(1));
    }
    let block = mine_block(
        &s.ledger,
        1,
        Address::from_label("miner"),
        SimTime::from_ticks(15),
        8_000_000,
        &OrderingPolicy::GAS_PRICE,
        &view,
        txs.iter().map(|t| (*t).clone()).collect(),
        MinerBehavior::Honest,
        &BTreeSet::new(),
    );
    gross_after(s, &block.transactions.iter().collect::<Vec<_>>())
}
