//! DApp state machines. Each one is driven by the block executor through
//! [`DappState::apply`] and touches wei only through an [`Env`].

use alloc::string::String;

use crate::call::{Call, DappId};
use crate::mitigations::batch::BatchBook;
use crate::mitigations::commit_reveal::CommitReveal;
use crate::mitigations::submarine::SubmarineVault;
use crate::types::{Address, Encoder, Gwei, Hash256, SimTime, Wei};

pub mod curve;
pub mod dex;
pub mod ens;
pub mod ico;
pub mod kitty;
pub mod registry;
pub mod timer;
pub mod token;

pub use curve::BondingCurveDealer;
pub use dex::OrderBookDex;
pub use ens::EnsAuction;
pub use ico::CappedIco;
pub use kitty::KittyBirth;
pub use registry::NameRegistry;
pub use timer::TimerGame;
pub use token::AllowanceToken;

/// Why a call was rejected. Rejections roll back every effect of the call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Revert(pub &'static str);

pub type CallResult = Result<(), Revert>;

pub fn require(cond: bool, reason: &'static str) -> CallResult {
    if cond {
        Ok(())
    } else {
        Err(Revert(reason))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockContext {
    pub height: u64,
    pub timestamp: SimTime,
    pub miner: Address,
}

/// Per-call message data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CallInfo {
    pub caller: Address,
    pub value: Wei,
    pub gas_price: Gwei,
}

/// Host services a DApp may use while executing a call. Wei only moves
/// through these methods, which keeps the global balance sum fixed.
pub trait Env {
    fn block(&self) -> BlockContext;
    /// Pay out of `from`'s escrow.
    fn pay(&mut self, from: DappId, to: Address, amount: Wei) -> CallResult;
    /// Move escrowed wei to the burn sink.
    fn burn(&mut self, from: DappId, amount: Wei) -> CallResult;
    /// Move wei held by an external account into `into`'s escrow. Only the
    /// submarine vault uses this, after checking the address derivation.
    fn pull(&mut self, from: Address, into: DappId, amount: Wei) -> CallResult;
    fn balance_of(&self, account: Address) -> Wei;
    /// Height of the block that first credited `account`, if any.
    fn first_funded(&self, account: Address) -> Option<u64>;
    /// Nested call into another DApp; `value` is moved from `from`'s escrow
    /// to the target's. Atomic: on revert nothing of it survives.
    fn invoke(&mut self, from: DappId, target: DappId, caller: Address, value: Wei, call: &Call) -> CallResult;
    fn emit(&mut self, tag: &'static str, detail: String);
}

/// Every DApp kind a scenario can host.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DappState {
    Registry(NameRegistry),
    Dex(OrderBookDex),
    Curve(BondingCurveDealer),
    Ens(EnsAuction),
    Timer(TimerGame),
    Ico(CappedIco),
    Token(AllowanceToken),
    Kitty(KittyBirth),
    CommitReveal(CommitReveal),
    Submarine(SubmarineVault),
    Batch(BatchBook),
}

impl DappState {
    pub fn id(&self) -> DappId {
        match self {
            DappState::Registry(_) => DappId::Registry,
            DappState::Dex(_) => DappId::Dex,
            DappState::Curve(_) => DappId::Curve,
            DappState::Ens(_) => DappId::Ens,
            DappState::Timer(_) => DappId::Timer,
            DappState::Ico(_) => DappId::Ico,
            DappState::Token(_) => DappId::Token,
            DappState::Kitty(_) => DappId::Kitty,
            DappState::CommitReveal(_) => DappId::CommitReveal,
            DappState::Submarine(_) => DappId::Submarine,
            DappState::Batch(_) => DappId::Batch,
        }
    }

    /// Dispatch a call addressed to this DApp. Calls for another DApp revert.
    pub fn apply(&mut self, call: &Call, info: &CallInfo, env: &mut dyn Env) -> CallResult {
        match (self, call) {
            (DappState::Registry(s), Call::Registry(c)) => s.apply(c, info, env),
            (DappState::Dex(s), Call::Dex(c)) => s.apply(c, info, env),
            (DappState::Curve(s), Call::Curve(c)) => s.apply(c, info, env),
            (DappState::Ens(s), Call::Ens(c)) => s.apply(c, info, env),
            (DappState::Timer(s), Call::Timer(c)) => s.apply(c, info, env),
            (DappState::Ico(s), Call::Ico(c)) => s.apply(c, info, env),
            (DappState::Token(s), Call::Token(c)) => s.apply(c, info, env),
            (DappState::Kitty(s), Call::Kitty(c)) => s.apply(c, info, env),
            (DappState::CommitReveal(s), Call::CommitReveal(c)) => s.apply(c, info, env),
            (DappState::Submarine(s), Call::Submarine(c)) => s.apply(c, info, env),
            (DappState::Batch(s), Call::Batch(c)) => s.apply(c, info, env),
            _ => Err(Revert("call does not match dapp")),
        }
    }

    /// Hook run after the last transaction of every block.
    pub fn end_block(&mut self, env: &mut dyn Env) -> CallResult {
        match self {
            DappState::CommitReveal(s) => s.end_block(env),
            DappState::Batch(s) => s.end_block(env),
            _ => Ok(()),
        }
    }

    pub fn encode_state(&self, e: &mut Encoder) {
        e.u8(self.id() as u8);
        match self {
            DappState::Registry(s) => s.encode_state(e),
            DappState::Dex(s) => s.encode_state(e),
            DappState::Curve(s) => s.encode_state(e),
            DappState::Ens(s) => s.encode_state(e),
            DappState::Timer(s) => s.encode_state(e),
            DappState::Ico(s) => s.encode_state(e),
            DappState::Token(s) => s.encode_state(e),
            DappState::Kitty(s) => s.encode_state(e),
            DappState::CommitReveal(s) => s.encode_state(e),
            DappState::Submarine(s) => s.encode_state(e),
            DappState::Batch(s) => s.encode_state(e),
        }
    }

    /// Digest of the full state, as named by chained transactions.
    pub fn digest(&self) -> Hash256 {
        let mut e = Encoder::new();
        self.encode_state(&mut e);
        e.digest()
    }
}

/// A hosted DApp plus its access gate: when `gate` is set, only nested calls
/// from that DApp are accepted (the wrapped DApp of a commit/reveal or
/// submarine deployment).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DappSlot {
    pub state: DappState,
    pub gate: Option<DappId>,
}

#[cfg(test)]
pub(crate) mod testing {
    //! A minimal in-memory [`Env`] for unit tests of individual DApps.
    use super::*;
    use alloc::collections::BTreeMap;
    use alloc::vec::Vec;

    pub struct MockEnv {
        pub block: BlockContext,
        pub balances: BTreeMap<Address, Wei>,
        pub funded: BTreeMap<Address, u64>,
        pub events: Vec<(&'static str, String)>,
        pub burned: Wei,
    }

    impl MockEnv {
        pub fn new(height: u64) -> Self {
            MockEnv {
                block: BlockContext { height, timestamp: SimTime::from_ticks(height * 15), miner: Address::from_label("miner") },
                balances: BTreeMap::new(),
                funded: BTreeMap::new(),
                events: Vec::new(),
                burned: 0,
            }
        }

        pub fn at(mut self, height: u64, ticks: u64) -> Self {
            self.block.height = height;
            self.block.timestamp = SimTime::from_ticks(ticks);
            self
        }

        pub fn credit(&mut self, a: Address, v: Wei) {
            *self.balances.entry(a).or_default() += v;
        }

        pub fn bal(&self, a: Address) -> Wei {
            self.balances.get(&a).copied().unwrap_or(0)
        }

        /// Simulates the executor's value transfer into a DApp.
        pub fn deposit(&mut self, from: Address, to: DappId, v: Wei) {
            let b = self.balances.entry(from).or_default();
            *b = b.checked_sub(v).expect("mock sender underfunded");
            self.credit(to.address(), v);
        }
    }

    impl Env for MockEnv {
        fn block(&self) -> BlockContext {
            self.block
        }

        fn pay(&mut self, from: DappId, to: Address, amount: Wei) -> CallResult {
            let b = self.balances.entry(from.address()).or_default();
            *b = b.checked_sub(amount).ok_or(Revert("escrow underflow"))?;
            self.credit(to, amount);
            Ok(())
        }

        fn burn(&mut self, from: DappId, amount: Wei) -> CallResult {
            let b = self.balances.entry(from.address()).or_default();
            *b = b.checked_sub(amount).ok_or(Revert("escrow underflow"))?;
            self.burned += amount;
            Ok(())
        }

        fn pull(&mut self, from: Address, into: DappId, amount: Wei) -> CallResult {
            let b = self.balances.entry(from).or_default();
            *b = b.checked_sub(amount).ok_or(Revert("pull underflow"))?;
            self.credit(into.address(), amount);
            Ok(())
        }

        fn balance_of(&self, account: Address) -> Wei {
            self.bal(account)
        }

        fn first_funded(&self, account: Address) -> Option<u64> {
            self.funded.get(&account).copied()
        }

        fn invoke(&mut self, _from: DappId, _target: DappId, _caller: Address, _value: Wei, _call: &Call) -> CallResult {
            Err(Revert("mock env has no nested dapps"))
        }

        fn emit(&mut self, tag: &'static str, detail: String) {
            self.events.push((tag, detail));
        }
    }
}
