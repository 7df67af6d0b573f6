//! Transaction and block execution. Each transaction runs against a
//! copy-on-write overlay of the ledger; a revert throws the overlay away and
//! keeps only the fee.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{Block, Ledger, Transaction};
use crate::call::{Call, DappId};
use crate::dapps::{require, BlockContext, CallInfo, CallResult, DappState, Env, Revert};
use crate::ordering::check_chain_precondition;
use crate::types::{fee, Address, Gas, Gwei, Wei};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Reverted(&'static str),
}

impl Status {
    pub fn is_success(&self) -> bool {
        matches!(self, Status::Success)
    }
}

pub type Event = (&'static str, String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Receipt {
    pub tx_hash: crate::types::Hash256,
    pub status: Status,
    pub gas_consumed: Gas,
    pub events: Vec<Event>,
}

/// Why a transaction cannot be included at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invalid {
    Nonce { expected: u64, got: u64 },
    Unaffordable,
}

/// A block that cannot be executed as given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fault {
    InvalidTx { index: usize, why: Invalid },
    GasOverflow { used: Gas, limit: Gas },
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fault::InvalidTx { index, why } => write!(f, "transaction {index} invalid: {why:?}"),
            Fault::GasOverflow { used, limit } => write!(f, "block gas {used} exceeds limit {limit}"),
        }
    }
}

#[derive(Clone, Default)]
struct Layer {
    balances: BTreeMap<Address, Wei>,
    funded: BTreeMap<Address, u64>,
    dapps: BTreeMap<DappId, DappState>,
    events: Vec<Event>,
}

struct Overlay<'a> {
    base: &'a Ledger,
    block: BlockContext,
    gas_price: Gwei,
    top: Layer,
    busy: BTreeSet<DappId>,
}

impl<'a> Overlay<'a> {
    fn new(base: &'a Ledger, block: BlockContext, gas_price: Gwei) -> Self {
        Overlay { base, block, gas_price, top: Layer::default(), busy: BTreeSet::new() }
    }

    fn bal(&self, a: Address) -> Wei {
        self.top.balances.get(&a).copied().unwrap_or_else(|| self.base.balance(&a))
    }

    fn add(&mut self, a: Address, v: Wei) {
        let b = self.bal(a) + v;
        self.top.balances.insert(a, b);
        if v > 0 && self.base.first_funded(&a).is_none() {
            let h = self.block.height;
            self.top.funded.entry(a).or_insert(h);
        }
    }

    fn sub(&mut self, a: Address, v: Wei, why: &'static str) -> CallResult {
        let b = self.bal(a).checked_sub(v).ok_or(Revert(why))?;
        self.top.balances.insert(a, b);
        Ok(())
    }

    fn transfer(&mut self, from: Address, to: Address, v: Wei, why: &'static str) -> CallResult {
        self.sub(from, v, why)?;
        self.add(to, v);
        Ok(())
    }

    fn take_state(&mut self, id: DappId) -> Result<DappState, Revert> {
        require(!self.busy.contains(&id), "reentrant call")?;
        match self.top.dapps.remove(&id) {
            Some(s) => Ok(s),
            None => Ok(self.base.dapp(id).ok_or(Revert("no such dapp"))?.clone()),
        }
    }

    fn current_state(&self, id: DappId) -> Option<&DappState> {
        self.top.dapps.get(&id).or_else(|| self.base.dapp(id))
    }

    fn dispatch(&mut self, target: DappId, caller: Address, value: Wei, call: &Call) -> CallResult {
        let mut state = self.take_state(target)?;
        let info = CallInfo { caller, value, gas_price: self.gas_price };
        self.busy.insert(target);
        let r = state.apply(call, &info, self);
        self.busy.remove(&target);
        self.top.dapps.insert(target, state);
        r
    }

    fn run(&mut self, tx: &Transaction) -> CallResult {
        require(tx.gas_limit >= tx.call.gas_cost(), "out of gas")?;
        let call = match &tx.call {
            Call::Chained { state_digest, inner } => {
                let target = inner.target().ok_or(Revert("chained call needs a dapp target"))?;
                let current = self.current_state(target).ok_or(Revert("no such dapp"))?.digest();
                check_chain_precondition(state_digest, &current)?;
                inner.as_ref()
            }
            c => c,
        };
        match call {
            Call::Transfer { to } => self.transfer(tx.sender, *to, tx.value, "insufficient balance"),
            Call::Filler { .. } => require(tx.value == 0, "filler carries no value"),
            Call::Chained { .. } => Err(Revert("nested chaining")),
            c => {
                let target = c.target().expect("dapp call");
                let slot = self.base.slot(target).ok_or(Revert("no such dapp"))?;
                require(slot.gate.is_none(), "dapp only reachable through its wrapper")?;
                self.transfer(tx.sender, target.address(), tx.value, "insufficient balance")?;
                self.dispatch(target, tx.sender, tx.value, c)
            }
        }
    }
}

impl Env for Overlay<'_> {
    fn block(&self) -> BlockContext {
        self.block
    }

    fn pay(&mut self, from: DappId, to: Address, amount: Wei) -> CallResult {
        self.transfer(from.address(), to, amount, "escrow underflow")
    }

    fn burn(&mut self, from: DappId, amount: Wei) -> CallResult {
        self.transfer(from.address(), Address::burn(), amount, "escrow underflow")
    }

    fn pull(&mut self, from: Address, into: DappId, amount: Wei) -> CallResult {
        self.transfer(from, into.address(), amount, "pull underflow")
    }

    fn balance_of(&self, account: Address) -> Wei {
        self.bal(account)
    }

    fn first_funded(&self, account: Address) -> Option<u64> {
        self.base.first_funded(&account).or_else(|| self.top.funded.get(&account).copied())
    }

    fn invoke(&mut self, from: DappId, target: DappId, caller: Address, value: Wei, call: &Call) -> CallResult {
        let slot = self.base.slot(target).ok_or(Revert("no such dapp"))?;
        if let Some(gate) = slot.gate {
            require(gate == from, "dapp only reachable through its wrapper")?;
        }
        require(call.target() == Some(target), "call does not match dapp")?;
        let saved = self.top.clone();
        let r = self
            .transfer(from.address(), target.address(), value, "escrow underflow")
            .and_then(|()| self.dispatch(target, caller, value, call));
        if r.is_err() {
            self.top = saved;
        }
        r
    }

    fn emit(&mut self, tag: &'static str, detail: String) {
        self.top.events.push((tag, detail));
    }
}

/// Execution result not yet written back to the ledger.
pub struct Staged {
    pub receipt: Receipt,
    sender: Address,
    layer: Layer,
}

/// Execute `tx` against `ledger` without modifying it.
pub fn stage_tx(ledger: &Ledger, ctx: BlockContext, tx: &Transaction) -> Result<Staged, Invalid> {
    let expected = ledger.nonce(&tx.sender);
    if tx.nonce != expected {
        return Err(Invalid::Nonce { expected, got: tx.nonce });
    }
    if ledger.balance(&tx.sender) < tx.max_cost() {
        return Err(Invalid::Unaffordable);
    }
    let mut ov = Overlay::new(ledger, ctx, tx.gas_price);
    let (status, gas) = match ov.run(tx) {
        Ok(()) => (Status::Success, tx.call.gas_cost()),
        Err(Revert(why)) => {
            ov.top = Layer::default();
            (Status::Reverted(why), tx.gas_limit)
        }
    };
    let f = fee(gas, tx.gas_price);
    ov.transfer(tx.sender, ctx.miner, f, "fee underflow").expect("affordability checked up front");
    let Overlay { top: mut layer, .. } = ov;
    let events = core::mem::take(&mut layer.events);
    Ok(Staged { receipt: Receipt { tx_hash: tx.hash, status, gas_consumed: gas, events }, sender: tx.sender, layer })
}

pub fn commit(ledger: &mut Ledger, staged: Staged) -> Receipt {
    let Staged { receipt, sender, layer } = staged;
    ledger.balances.extend(layer.balances);
    for (a, h) in layer.funded {
        ledger.first_funded.entry(a).or_insert(h);
    }
    for (id, state) in layer.dapps {
        ledger.dapps.get_mut(&id).expect("installed dapp").state = state;
    }
    *ledger.nonces.entry(sender).or_default() += 1;
    receipt
}

pub fn execute_tx(ledger: &mut Ledger, ctx: BlockContext, tx: &Transaction) -> Result<Receipt, Invalid> {
    let staged = stage_tx(ledger, ctx, tx)?;
    Ok(commit(ledger, staged))
}

/// Run every DApp's end-of-block hook, in DApp id order.
pub fn end_block(ledger: &mut Ledger, ctx: BlockContext) -> Vec<Event> {
    let ids: Vec<DappId> = ledger.dapp_ids().collect();
    let mut events = Vec::new();
    for id in ids {
        let mut ov = Overlay::new(ledger, ctx, 0);
        let Ok(mut state) = ov.take_state(id) else { continue };
        if state.end_block(&mut ov).is_err() {
            continue;
        }
        ov.top.dapps.insert(id, state);
        let Overlay { top: layer, .. } = ov;
        ledger.balances.extend(layer.balances);
        for (a, h) in layer.funded {
            ledger.first_funded.entry(a).or_insert(h);
        }
        for (id, state) in layer.dapps {
            ledger.dapps.get_mut(&id).expect("installed dapp").state = state;
        }
        events.extend(layer.events);
    }
    events
}

pub fn block_context(block: &Block) -> BlockContext {
    BlockContext { height: block.number, timestamp: block.timestamp, miner: block.miner }
}

/// Apply a block: its transactions in order, then the end-of-block hooks.
/// Advances the ledger height to the block number.
pub fn execute_block(ledger: &mut Ledger, block: &Block) -> Result<(Vec<Receipt>, Vec<Event>), Fault> {
    let ctx = block_context(block);
    let mut receipts = Vec::with_capacity(block.transactions.len());
    let mut used: Gas = 0;
    ledger.height = block.number;
    for (index, tx) in block.transactions.iter().enumerate() {
        let r = execute_tx(ledger, ctx, tx).map_err(|why| Fault::InvalidTx { index, why })?;
        used += r.gas_consumed;
        receipts.push(r);
    }
    if used > block.gas_limit || used != block.gas_used {
        return Err(Fault::GasOverflow { used, limit: block.gas_limit });
    }
    let events = end_block(ledger, ctx);
    Ok((receipts, events))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::call::{CommitRevealCall, CommittedAction, IcoCall, RegistryCall};
    use crate::chain::Visibility;
    use crate::dapps::{CappedIco, NameRegistry};
    use crate::mitigations::commit_reveal::CommitReveal;
    use crate::mitigations::Windows;
    use crate::types::{ether, Hash256, SimTime};
    use alloc::boxed::Box;
    use alloc::string::ToString;

    fn who(s: &str) -> Address {
        Address::from_label(s)
    }

    fn ctx(h: u64) -> BlockContext {
        BlockContext { height: h, timestamp: SimTime::from_ticks(15 * h), miner: who("miner") }
    }

    fn tx(from: &str, nonce: u64, gp: Gwei, value: Wei, call: Call) -> Transaction {
        Transaction::new(who(from), nonce, gp, 200_000, value, call, SimTime(0), Visibility::Broadcast, 0)
    }

    fn ledger() -> Ledger {
        let mut l = Ledger::new();
        l.credit(who("alice"), ether(100));
        l.credit(who("bob"), ether(100));
        l.install(DappState::Registry(NameRegistry::new(0)), None);
        l.install(DappState::Ico(CappedIco::new(alloc::vec![ether(10)], 50)), None);
        l
    }

    fn register(name: &str) -> Call {
        Call::Registry(RegistryCall::Register { name: name.to_string() })
    }

    #[test]
    fn revert_burns_full_gas_limit_and_nothing_else() {
        let mut l = ledger();
        let before = l.total_supply();
        let r = execute_tx(&mut l, ctx(1), &tx("alice", 0, 60, ether(1), Call::Ico(IcoCall::Deposit))).unwrap();
        assert_eq!(r.status, Status::Reverted("gas price above cap"));
        assert_eq!(r.gas_consumed, 200_000);
        assert_eq!(l.balance(&who("alice")), ether(100) - fee(200_000, 60));
        assert_eq!(l.balance(&who("miner")), fee(200_000, 60));
        assert_eq!(l.balance(&DappId::Ico.address()), 0);
        assert_eq!(l.nonce(&who("alice")), 1);
        assert_eq!(l.total_supply(), before);
    }

    #[test]
    fn success_charges_table_gas_and_moves_value() {
        let mut l = ledger();
        let r = execute_tx(&mut l, ctx(1), &tx("alice", 0, 10, ether(1), Call::Ico(IcoCall::Deposit))).unwrap();
        assert!(r.status.is_success());
        assert_eq!(r.gas_consumed, 50_000);
        assert_eq!(l.balance(&who("alice")), ether(99) - fee(50_000, 10));
        assert_eq!(l.balance(&DappId::Ico.address()), ether(1));
    }

    #[test]
    fn nonce_and_affordability_are_checked() {
        let mut l = ledger();
        assert_eq!(
            execute_tx(&mut l, ctx(1), &tx("alice", 1, 1, 0, register("a"))).unwrap_err(),
            Invalid::Nonce { expected: 0, got: 1 }
        );
        assert_eq!(execute_tx(&mut l, ctx(1), &tx("carol", 0, 1, 0, register("a"))).unwrap_err(), Invalid::Unaffordable);
    }

    #[test]
    fn chained_calls_only_run_on_the_named_state() {
        let mut l = ledger();
        let digest = l.dapp(DappId::Registry).unwrap().digest();
        let chained = |name: &str| Call::Chained { state_digest: digest, inner: Box::new(register(name)) };
        let a = execute_tx(&mut l, ctx(1), &tx("alice", 0, 1, 0, chained("a"))).unwrap();
        let b = execute_tx(&mut l, ctx(1), &tx("bob", 0, 1, 0, chained("b"))).unwrap();
        assert!(a.status.is_success());
        assert_eq!(b.status, Status::Reverted("stale state"));
    }

    #[test]
    fn gated_dapp_accepts_only_its_wrapper() {
        let mut l = Ledger::new();
        l.credit(who("alice"), ether(10));
        l.install(DappState::Registry(NameRegistry::new(0)), Some(DappId::CommitReveal));
        l.install(DappState::CommitReveal(CommitReveal::new(DappId::Registry, Windows::default(), 1)), None);
        let direct = execute_tx(&mut l, ctx(1), &tx("alice", 0, 1, 0, register("x"))).unwrap();
        assert_eq!(direct.status, Status::Reverted("dapp only reachable through its wrapper"));

        let action = CommittedAction { beneficiary: who("alice"), call: Box::new(register("x")) };
        let nonce = Hash256::of(b"n");
        let digest = crate::call::commitment_digest(&action, &nonce);
        let c = execute_tx(&mut l, ctx(1), &tx("alice", 1, 1, 5, Call::CommitReveal(CommitRevealCall::Commit { digest }))).unwrap();
        assert!(c.status.is_success());
        let r = execute_tx(&mut l, ctx(11), &tx("alice", 2, 1, 0, Call::CommitReveal(CommitRevealCall::Reveal { action, nonce })))
            .unwrap();
        assert!(r.status.is_success(), "{:?}", r.status);
        let DappState::Registry(reg) = l.dapp(DappId::Registry).unwrap() else { unreachable!() };
        assert_eq!(reg.owner("x"), Some(who("alice")));
        assert_eq!(l.balance(&DappId::CommitReveal.address()), 0);
    }
}
