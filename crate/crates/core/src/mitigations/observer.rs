//! What a mempool watcher can read from a pending transaction once
//! confidential fields are masked.

use crate::call::{Call, CommitRevealCall};
use crate::chain::tx::Transaction;
use crate::types::{Address, Gas, Gwei, Wei};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Counterparty {
    Known(Address),
    /// An address with no prior history; carries no linkable identity.
    Fresh,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObservedCall {
    Transfer { to: Counterparty },
    /// A commitment; the digest is uniformly random to the observer.
    Commitment,
    Clear(Call),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservedTx {
    pub sender: Address,
    pub nonce: u64,
    pub gas_price: Gwei,
    pub gas_limit: Gas,
    pub value: Wei,
    pub call: ObservedCall,
}

/// Project `tx` through the masking rules. `seen` tells whether an address
/// already has on-chain history.
pub fn project(tx: &Transaction, seen: &dyn Fn(&Address) -> bool) -> ObservedTx {
    let call = match &tx.call {
        Call::Transfer { to } if seen(to) => ObservedCall::Transfer { to: Counterparty::Known(*to) },
        Call::Transfer { .. } => ObservedCall::Transfer { to: Counterparty::Fresh },
        Call::CommitReveal(CommitRevealCall::Commit { .. }) => ObservedCall::Commitment,
        c => ObservedCall::Clear(c.clone()),
    };
    ObservedTx { sender: tx.sender, nonce: tx.nonce, gas_price: tx.gas_price, gas_limit: tx.gas_limit, value: tx.value, call }
}
