//! Miner selection and block assembly.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::exec::{commit, stage_tx, Staged};
use super::{Block, Ledger, NodeView, Transaction, Visibility};
use crate::call::DappId;
use crate::dapps::BlockContext;
use crate::ordering::OrderingPolicy;
use crate::types::{Address, Gas, Hash256, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinerError {
    NoMiners,
    PowersDoNotSumToOne,
}

/// Pick a miner with probability equal to its hash-power share.
pub fn select_miner<R: Rng>(rng: &mut R, powers: &[(Address, f64)]) -> Result<Address, MinerError> {
    if powers.is_empty() {
        return Err(MinerError::NoMiners);
    }
    let total: f64 = powers.iter().map(|p| p.1).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(MinerError::PowersDoNotSumToOne);
    }
    let x: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (m, p) in powers {
        acc += p;
        if x < acc {
            return Ok(*m);
        }
    }
    Ok(powers.iter().rev().find(|p| p.1 > 0.0).map_or(powers[0].0, |p| p.0))
}

/// How a miner departs from plain policy ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum MinerBehavior {
    #[default]
    Honest,
    /// The operator's own transactions go first at any gas price.
    PrependOwn,
    /// Own transactions first, then whatever will revert (their whole gas
    /// limit is fee), then the rest, leaving out successful calls to
    /// `target`.
    BulkDisplace { target: DappId },
}

struct Packer {
    scratch: Ledger,
    ctx: BlockContext,
    gas_limit: Gas,
    used: Gas,
    txs: Vec<Transaction>,
    included: BTreeSet<Hash256>,
    blocked: BTreeSet<Address>,
    deferred: BTreeMap<Address, BTreeMap<u64, Transaction>>,
    full: bool,
}

type Accept<'a> = &'a dyn Fn(&Transaction, &Staged) -> bool;

impl Packer {
    fn pass(&mut self, ordered: &[Transaction], accept: Accept<'_>) {
        self.blocked.clear();
        self.deferred.clear();
        for tx in ordered {
            if self.full {
                return;
            }
            self.offer(tx.clone(), accept);
        }
    }

    fn offer(&mut self, tx: Transaction, accept: Accept<'_>) {
        if self.full || self.included.contains(&tx.hash) || self.blocked.contains(&tx.sender) {
            return;
        }
        let expected = self.scratch.nonce(&tx.sender);
        if tx.nonce > expected {
            self.deferred.entry(tx.sender).or_default().insert(tx.nonce, tx);
            return;
        }
        if tx.nonce < expected {
            return;
        }
        if self.used + tx.gas_limit > self.gas_limit {
            self.full = true;
            return;
        }
        let staged = match stage_tx(&self.scratch, self.ctx, &tx) {
            Ok(s) if accept(&tx, &s) => s,
            _ => {
                self.blocked.insert(tx.sender);
                return;
            }
        };
        let receipt = commit(&mut self.scratch, staged);
        self.used += receipt.gas_consumed;
        self.included.insert(tx.hash);
        let sender = tx.sender;
        self.txs.push(tx);
        let next = self.deferred.get_mut(&sender).and_then(|d| d.remove(&(expected + 1)));
        if let Some(next) = next {
            self.offer(next, accept);
        }
    }
}

/// Assemble a block from `candidates` (the miner's visible pending set).
/// Transactions are taken in policy order, each sender's in nonce order,
/// until the next one's gas limit would overflow the block.
#[allow(clippy::too_many_arguments)]
pub fn mine_block(
    ledger: &Ledger,
    number: u64,
    miner: Address,
    timestamp: SimTime,
    gas_limit: Gas,
    policy: &OrderingPolicy,
    view: &NodeView,
    candidates: Vec<Transaction>,
    behavior: MinerBehavior,
    own: &BTreeSet<Address>,
) -> Block {
    let mut scratch = ledger.clone();
    scratch.height = number;
    let ctx = BlockContext { height: number, timestamp, miner };
    let mut p = Packer {
        scratch,
        ctx,
        gas_limit,
        used: 0,
        txs: Vec::new(),
        included: BTreeSet::new(),
        blocked: BTreeSet::new(),
        deferred: BTreeMap::new(),
        full: false,
    };
    let ordered = policy.order(candidates, view);
    let is_own = |t: &Transaction| t.visibility == Visibility::PrivateTo(miner) || own.contains(&t.sender);
    let (mine, theirs): (Vec<_>, Vec<_>) = ordered.iter().cloned().partition(|t| is_own(t));
    let any: Accept<'_> = &|_, _| true;
    match behavior {
        MinerBehavior::Honest => p.pass(&ordered, any),
        MinerBehavior::PrependOwn => {
            p.pass(&mine, any);
            p.pass(&theirs, any);
        }
        MinerBehavior::BulkDisplace { target } => {
            p.pass(&mine, any);
            p.pass(&theirs, &|_, s| !s.receipt.status.is_success());
            p.pass(&theirs, &|t, s| !(s.receipt.status.is_success() && t.call.effective_target() == Some(target)));
        }
    }
    Block { number, miner, timestamp, transactions: p.txs, gas_used: p.used, gas_limit }
}
