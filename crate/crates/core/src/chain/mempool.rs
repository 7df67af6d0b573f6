//! Pending transactions and the per-node order in which they arrive.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Ledger, Transaction, Visibility};
use crate::types::{Address, Hash256, SimTime};

/// Gossip delay, uniform over `[min_millis, max_millis]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Propagation {
    pub min_millis: u64,
    pub max_millis: u64,
}

impl Default for Propagation {
    fn default() -> Self {
        Propagation { min_millis: 0, max_millis: 2000 }
    }
}

impl Propagation {
    pub const INSTANT: Propagation = Propagation { min_millis: 0, max_millis: 0 };

    fn draw(&self, rng: &mut ChaCha8Rng) -> u64 {
        if self.max_millis <= self.min_millis {
            self.min_millis
        } else {
            rng.gen_range(self.min_millis..=self.max_millis)
        }
    }
}

/// When each pending transaction reached one node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeView {
    pub node_id: Address,
    arrivals: BTreeMap<Hash256, SimTime>,
}

impl NodeView {
    pub fn new(node_id: Address) -> Self {
        NodeView { node_id, arrivals: BTreeMap::new() }
    }

    pub fn record(&mut self, h: Hash256, at: SimTime) {
        self.arrivals.insert(h, at);
    }

    pub fn arrival(&self, h: &Hash256) -> Option<SimTime> {
        self.arrivals.get(h).copied()
    }

    pub fn arrivals(&self) -> &BTreeMap<Hash256, SimTime> {
        &self.arrivals
    }

    /// View restricted to what had arrived by `now`.
    pub fn as_of(&self, now: SimTime) -> NodeView {
        NodeView { node_id: self.node_id, arrivals: self.arrivals.iter().filter(|(_, t)| **t <= now).map(|(h, t)| (*h, *t)).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubmitError {
    Duplicate,
    StaleNonce { next: u64, got: u64 },
    Unaffordable,
    UnknownNode,
}

/// The gossip network: one view per node plus the pool of pending
/// transactions.
#[derive(Debug, Clone)]
pub struct Network {
    propagation: Propagation,
    rng: ChaCha8Rng,
    views: BTreeMap<Address, NodeView>,
    pending: BTreeMap<Hash256, Transaction>,
    seen: BTreeSet<Hash256>,
}

impl Network {
    pub fn new(nodes: impl IntoIterator<Item = Address>, propagation: Propagation, rng: ChaCha8Rng) -> Self {
        let views = nodes.into_iter().map(|n| (n, NodeView::new(n))).collect();
        Network { propagation, rng, views, pending: BTreeMap::new(), seen: BTreeSet::new() }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Address> {
        self.views.keys()
    }

    pub fn view(&self, node: &Address) -> Option<&NodeView> {
        self.views.get(node)
    }

    pub fn pending(&self) -> impl Iterator<Item = &Transaction> {
        self.pending.values()
    }

    pub fn get(&self, h: &Hash256) -> Option<&Transaction> {
        self.pending.get(h)
    }

    /// Admit `tx` at time `at`. Broadcast transactions reach every node
    /// after an independent random delay; private ones reach only their
    /// miner, immediately.
    pub fn submit(&mut self, tx: Transaction, at: SimTime, ledger: &Ledger) -> Result<(), SubmitError> {
        if self.seen.contains(&tx.hash) {
            return Err(SubmitError::Duplicate);
        }
        let next = ledger.nonce(&tx.sender);
        if tx.nonce < next {
            return Err(SubmitError::StaleNonce { next, got: tx.nonce });
        }
        if ledger.balance(&tx.sender) < tx.max_cost() {
            return Err(SubmitError::Unaffordable);
        }
        let start = at.max(tx.created_at);
        match tx.visibility {
            Visibility::PrivateTo(miner) => {
                self.views.get_mut(&miner).ok_or(SubmitError::UnknownNode)?.record(tx.hash, start);
            }
            Visibility::Broadcast => {
                for view in self.views.values_mut() {
                    let delay = self.propagation.draw(&mut self.rng);
                    view.record(tx.hash, start.plus_millis(delay));
                }
            }
        }
        self.seen.insert(tx.hash);
        self.pending.insert(tx.hash, tx);
        Ok(())
    }

    /// Pending transactions that have reached `node` by `now`.
    pub fn visible(&self, node: &Address, now: SimTime) -> Vec<Transaction> {
        let Some(view) = self.views.get(node) else { return Vec::new() };
        view.arrivals
            .iter()
            .filter(|(_, t)| **t <= now)
            .filter_map(|(h, _)| self.pending.get(h))
            .cloned()
            .collect()
    }

    /// Drop mined transactions, and any whose nonce the chain has passed.
    pub fn prune(&mut self, ledger: &Ledger) {
        let gone: Vec<Hash256> = self.pending.values().filter(|t| t.nonce < ledger.nonce(&t.sender)).map(|t| t.hash).collect();
        for h in gone {
            self.pending.remove(&h);
            for v in self.views.values_mut() {
                v.arrivals.remove(&h);
            }
        }
    }
}
