//! Property checks shared by the `properties` suite and the acceptance
//! target. Each runs `cases` generated inputs and reports the first
//! minimized counterexample.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use frontrun_core::call::{commitment_digest, Call, CommittedAction, RegistryCall, Side, TokenCall};
use frontrun_core::chain::mempool::NodeView;
use frontrun_core::chain::{execute_block, mine_block, Ledger, MinerBehavior, Transaction, Visibility};
use frontrun_core::dapps::ens::pick_winner;
use frontrun_core::dapps::{DappState, NameRegistry};
use frontrun_core::harness::config::AgentKind;
use frontrun_core::harness::{catalog, run_scenario};
use frontrun_core::mitigations::batch::{clear, BatchOrder};
use frontrun_core::mitigations::Mitigation;
use frontrun_core::ordering::OrderingPolicy;
use frontrun_core::types::{Address, Hash256, SimTime, Wei};
use itertools::Itertools;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

pub type Check = fn(u32) -> Result<(), String>;

/// Every property with its default case count.
pub const ALL: [(&str, Check, u32); 7] = [
    ("ordering permutations", policies_permute_and_sort, 256),
    ("block gas bounds and nonce order", mined_blocks_respect_gas_and_nonces, 256),
    ("zero-sum reports", scenarios_conserve_value, 48),
    ("nonce monotonicity", nonces_never_decrease, 24),
    ("batch permutation invariance", batch_clearing_ignores_submission_order, 24),
    ("commitment binding", commitments_bind_action_and_nonce, 10_000),
    ("ENS argmax and tie-break", ens_winner_is_first_highest_reveal, 256),
];

fn check<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

const POLICIES: [&str; 6] = ["gas_price", "fifo", "ctor", "chained:gas_price", "chained:fifo", "chained:ctor"];

fn senders() -> Vec<Address> {
    (0..4).map(|i| Address::from_label(&format!("s{i}"))).collect()
}

/// (sender index, nonce, gas price, registered name, arrival tick, salt)
type RawTx = (usize, u64, u64, u8, u64, u64);

fn build(raw: &[RawTx]) -> (Vec<Transaction>, NodeView) {
    let ss = senders();
    let mut view = NodeView::new(Address::from_label("miner"));
    let mut seen = HashSet::new();
    let mut txs = Vec::new();
    for &(s, nonce, gp, name, at, salt) in raw {
        let call = Call::Registry(RegistryCall::Register { name: format!("n{name}.eth") });
        let tx = Transaction::new(ss[s], nonce, gp, call.gas_cost(), 1_000, call, SimTime::from_ticks(at), Visibility::Broadcast, salt);
        if seen.insert(tx.hash) {
            view.record(tx.hash, SimTime::from_ticks(at));
            txs.push(tx);
        }
    }
    (txs, view)
}

fn ledger() -> Ledger {
    let mut l = Ledger::new();
    for s in senders() {
        l.credit(s, 1 << 70);
    }
    l.install(DappState::Registry(NameRegistry::new(1_000)), None);
    l
}

fn raw_txs() -> impl Strategy<Value = Vec<RawTx>> {
    prop::collection::vec((0usize..4, 0u64..4, 1u64..50, 0u8..6, 0u64..10, any::<u64>()), 0..24)
}

pub fn policies_permute_and_sort(cases: u32) -> Result<(), String> {
    check(cases, (raw_txs(), 0usize..3), |(raw, p)| {
        let (txs, view) = build(&raw);
        let policy = OrderingPolicy::parse(POLICIES[p]).unwrap();
        let out = policy.order(txs.clone(), &view);
        let key = |v: &[Transaction]| v.iter().map(|t| t.hash).collect::<BTreeSet<_>>();
        prop_assert_eq!(out.len(), txs.len());
        prop_assert_eq!(key(&out), key(&txs));
        let at = |t: &Transaction| view.arrival(&t.hash).unwrap();
        for w in out.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            match POLICIES[p] {
                "gas_price" => prop_assert!(a.gas_price > b.gas_price || (a.gas_price == b.gas_price && at(a) <= at(b))),
                "fifo" => prop_assert!(at(a) <= at(b)),
                _ => prop_assert!(a.hash < b.hash),
            }
        }
        let mut rev = txs.clone();
        rev.reverse();
        prop_assert_eq!(policy.order(rev, &view), out);
        Ok(())
    })
}

pub fn mined_blocks_respect_gas_and_nonces(cases: u32) -> Result<(), String> {
    check(cases, (raw_txs(), 0usize..3, 21_000u64..400_000), |(raw, p, limit)| {
        let (txs, view) = build(&raw);
        let l = ledger();
        let policy = OrderingPolicy::parse(POLICIES[p]).unwrap();
        let miner = Address::from_label("miner");
        let block =
            mine_block(&l, 1, miner, SimTime::from_ticks(15), limit, &policy, &view, txs, MinerBehavior::Honest, &BTreeSet::new());
        prop_assert!(block.gas_used <= block.gas_limit);
        let mut next: BTreeMap<Address, u64> = BTreeMap::new();
        for tx in &block.transactions {
            let n = next.entry(tx.sender).or_insert(l.nonce(&tx.sender));
            prop_assert_eq!(tx.nonce, *n);
            *n += 1;
        }
        let mut after = l.clone();
        let before = after.total_supply();
        let (receipts, _) = execute_block(&mut after, &block).unwrap();
        prop_assert_eq!(receipts.iter().map(|r| r.gas_consumed).sum::<u64>(), block.gas_used);
        prop_assert_eq!(after.total_supply(), before);
        Ok(())
    })
}

fn scenario_case() -> impl Strategy<Value = (usize, u64, usize, u64)> {
    (0usize..catalog::BUILTINS.len(), any::<u64>(), 0usize..6, 1u64..5)
}

fn perturbed(which: usize, p: usize, premium: u64) -> frontrun_core::harness::ScenarioConfig {
    let mut c = catalog::builtin(catalog::BUILTINS[which].0).unwrap();
    if c.mitigation == Mitigation::None {
        c.ordering = OrderingPolicy::parse(POLICIES[p]).unwrap();
    }
    for a in &mut c.agents {
        if let AgentKind::Attacker { gas_premium, .. } = &mut a.kind {
            *gas_premium = premium;
        }
    }
    c
}

/// Every built-in, under every sequencing rule and attacker premium.
pub fn scenarios_conserve_value(cases: u32) -> Result<(), String> {
    check(cases, scenario_case(), |(which, seed, p, premium)| {
        let c = perturbed(which, p, premium);
        let r = run_scenario(&c, seed).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(r.zero_sum_residual(), 0);
        prop_assert!(r.blocks.iter().all(|b| b.gas_used <= b.gas_limit));
        prop_assert_eq!(r.blocks.len() as u64, c.run_blocks);
        if let Some(b) = r.bonds {
            prop_assert!(b.returned + b.slashed <= b.posted);
        }
        Ok(())
    })
}

/// The engine checks after every block that no confirmed nonce decreased
/// and fails the run otherwise.
pub fn nonces_never_decrease(cases: u32) -> Result<(), String> {
    check(cases, scenario_case(), |(which, seed, p, premium)| {
        let r = run_scenario(&perturbed(which, p, premium), seed);
        prop_assert!(r.is_ok(), "{:?}", r.err());
        Ok(())
    })
}

fn batch_order() -> impl Strategy<Value = BatchOrder> {
    (any::<bool>(), 1u64..30, 1u64..10, 0u8..4).prop_map(|(bid, limit, qty, who)| BatchOrder {
        side: if bid { Side::Bid } else { Side::Ask },
        limit,
        qty,
        owner: Address::from_label(&format!("o{who}")),
    })
}

/// Exhaustive over all orderings of up to eight orders.
pub fn batch_clearing_ignores_submission_order(cases: u32) -> Result<(), String> {
    check(cases, prop::collection::vec(batch_order(), 1..=8), |orders| {
        let reference = clear(&orders);
        for perm in orders.iter().cloned().permutations(orders.len()) {
            prop_assert_eq!(&clear(&perm), &reference);
        }
        Ok(())
    })
}

fn action() -> impl Strategy<Value = CommittedAction> {
    let call = prop_oneof![
        "[a-z]{1,12}".prop_map(|name| Call::Registry(RegistryCall::Register { name })),
        (any::<[u8; 20]>(), any::<u128>()).prop_map(|(s, amount)| Call::Token(TokenCall::Approve { spender: Address(s), amount })),
    ];
    (any::<[u8; 20]>(), call).prop_map(|(b, call)| CommittedAction { beneficiary: Address(b), call: Box::new(call) })
}

/// An opening that differs in any part does not match the commitment.
pub fn commitments_bind_action_and_nonce(cases: u32) -> Result<(), String> {
    check(cases, (action(), action(), any::<[u8; 32]>(), any::<[u8; 32]>()), |(a, b, n, m)| {
        let (n, m) = (Hash256(n), Hash256(m));
        prop_assert_eq!(commitment_digest(&a, &n) == commitment_digest(&b, &m), a == b && n == m);
        prop_assert_ne!(commitment_digest(&a, &n), commitment_digest(&a, &Hash256(m.0.map(|x| !x))));
        Ok(())
    })
}

pub fn ens_winner_is_first_highest_reveal(cases: u32) -> Result<(), String> {
    check(cases, prop::collection::vec((0u8..8, 0u128..6), 0..12), |bids| {
        let reveals: Vec<(Address, Wei)> = bids.iter().map(|&(w, v)| (Address::from_label(&format!("b{w}")), v)).collect();
        let expected = reveals.iter().enumerate().max_by_key(|(i, r)| (r.1, std::cmp::Reverse(*i))).map(|(_, r)| *r);
        prop_assert_eq!(pick_winner(&reveals), expected);
        Ok(())
    })
}
