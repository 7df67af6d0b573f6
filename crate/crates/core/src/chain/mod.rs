//! Accounts, mempool, miners and block execution.

pub mod exec;
pub mod mempool;
pub mod miner;
pub mod tx;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::call::DappId;
use crate::dapps::{DappSlot, DappState};
use crate::types::{Address, Gas, SimTime, Wei};

pub use exec::{execute_block, execute_tx, Fault, Invalid, Receipt, Status};
pub use mempool::{Network, NodeView, Propagation, SubmitError};
pub use miner::{mine_block, select_miner, MinerBehavior, MinerError};
pub use tx::{canonical_serialize, Transaction, Visibility};

pub const DEFAULT_BLOCK_GAS_LIMIT: Gas = 8_000_000;
/// Ticks between blocks.
pub const BLOCK_INTERVAL_TICKS: u64 = 15;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub number: u64,
    pub miner: Address,
    pub timestamp: SimTime,
    pub transactions: Vec<Transaction>,
    pub gas_used: Gas,
    pub gas_limit: Gas,
}

/// World state: balances, confirmed nonces and hosted DApps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Ledger {
    pub height: u64,
    balances: BTreeMap<Address, Wei>,
    nonces: BTreeMap<Address, u64>,
    first_funded: BTreeMap<Address, u64>,
    dapps: BTreeMap<DappId, DappSlot>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Genesis allocation.
    pub fn credit(&mut self, a: Address, amount: Wei) {
        *self.balances.entry(a).or_default() += amount;
        if amount > 0 {
            self.first_funded.entry(a).or_insert(self.height);
        }
    }

    pub fn install(&mut self, state: DappState, gate: Option<DappId>) {
        self.dapps.insert(state.id(), DappSlot { state, gate });
    }

    pub fn balance(&self, a: &Address) -> Wei {
        self.balances.get(a).copied().unwrap_or(0)
    }

    pub fn balances(&self) -> &BTreeMap<Address, Wei> {
        &self.balances
    }

    pub fn nonce(&self, a: &Address) -> u64 {
        self.nonces.get(a).copied().unwrap_or(0)
    }

    pub fn first_funded(&self, a: &Address) -> Option<u64> {
        self.first_funded.get(a).copied()
    }

    pub fn slot(&self, id: DappId) -> Option<&DappSlot> {
        self.dapps.get(&id)
    }

    pub fn dapp(&self, id: DappId) -> Option<&DappState> {
        self.dapps.get(&id).map(|s| &s.state)
    }

    /// Direct state access for genesis setup.
    pub fn dapp_mut(&mut self, id: DappId) -> Option<&mut DappState> {
        self.dapps.get_mut(&id).map(|s| &mut s.state)
    }

    pub fn dapp_ids(&self) -> impl Iterator<Item = DappId> + '_ {
        self.dapps.keys().copied()
    }

    pub fn total_supply(&self) -> Wei {
        self.balances.values().sum()
    }

    pub fn burned(&self) -> Wei {
        self.balance(&Address::burn())
    }

    /// Accounts ever credited; used to tell fresh addresses from known ones.
    pub fn is_known(&self, a: &Address) -> bool {
        self.first_funded.contains_key(a) || self.nonces.contains_key(a)
    }
}
