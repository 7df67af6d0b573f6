use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::{require, CallInfo, CallResult, Env, Revert};
use crate::call::{sealed_bid, DappId, EnsCall};
use crate::types::{Address, Encoder, Hash256, Wei};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Bidding,
    Reveal,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedBid {
    pub sealed: Hash256,
    /// Visible deposit; leaks an upper bound on the bid.
    pub deposit: Wei,
    pub revealed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Auction {
    pub started: u64,
    pub bids: BTreeMap<Address, SealedBid>,
    /// (bidder, amount) in reveal order.
    pub reveals: Vec<(Address, Wei)>,
    pub winner: Option<(Address, Wei)>,
    pub finalized: bool,
}

/// Sealed-bid first-price name auction. The first bid on a name opens it;
/// phases then advance by block height.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnsAuction {
    pub bidding_blocks: u64,
    pub reveal_blocks: u64,
    auctions: BTreeMap<Hash256, Auction>,
}

/// Highest amount wins; among equal amounts the earliest reveal.
pub fn pick_winner(reveals: &[(Address, Wei)]) -> Option<(Address, Wei)> {
    let mut best: Option<(Address, Wei)> = None;
    for &(who, amount) in reveals {
        if best.is_none_or(|(_, b)| amount > b) {
            best = Some((who, amount));
        }
    }
    best
}

impl EnsAuction {
    pub fn new(bidding_blocks: u64, reveal_blocks: u64) -> Self {
        EnsAuction { bidding_blocks, reveal_blocks, auctions: BTreeMap::new() }
    }

    pub fn auction(&self, name_hash: &Hash256) -> Option<&Auction> {
        self.auctions.get(name_hash)
    }

    pub fn phase(&self, name_hash: &Hash256, height: u64) -> Phase {
        match self.auctions.get(name_hash) {
            None => Phase::Bidding,
            Some(a) if height < a.started + self.bidding_blocks => Phase::Bidding,
            Some(a) if height < a.started + self.bidding_blocks + self.reveal_blocks => Phase::Reveal,
            Some(_) => Phase::Closed,
        }
    }

    pub fn owner(&self, name_hash: &Hash256) -> Option<Address> {
        self.auctions.get(name_hash).filter(|a| a.finalized).and_then(|a| a.winner.map(|w| w.0))
    }

    pub fn apply(&mut self, call: &EnsCall, info: &CallInfo, env: &mut dyn Env) -> CallResult {
        let height = env.block().height;
        match call {
            EnsCall::StartAuctionAndBid { name_hash, sealed } => {
                require(self.phase(name_hash, height) == Phase::Bidding, "bidding closed")?;
                require(info.value > 0, "bid needs a deposit")?;
                let a = self.auctions.entry(*name_hash).or_insert_with(|| Auction {
                    started: height,
                    bids: BTreeMap::new(),
                    reveals: Vec::new(),
                    winner: None,
                    finalized: false,
                });
                require(!a.bids.contains_key(&info.caller), "already bid")?;
                a.bids.insert(info.caller, SealedBid { sealed: *sealed, deposit: info.value, revealed: false });
                env.emit("bid", format!("{}", info.value));
                Ok(())
            }
            EnsCall::Reveal { name_hash, amount, salt } => {
                require(self.phase(name_hash, height) == Phase::Reveal, "not in reveal phase")?;
                require(info.value == 0, "reveal carries no value")?;
                let a = self.auctions.get_mut(name_hash).ok_or(Revert("no auction"))?;
                let bid = a.bids.get_mut(&info.caller).ok_or(Revert("no bid"))?;
                require(!bid.revealed, "already revealed")?;
                require(sealed_bid(name_hash, *amount, salt, &info.caller) == bid.sealed, "reveal mismatch")?;
                require(*amount <= bid.deposit, "bid exceeds deposit")?;
                bid.revealed = true;
                let excess = bid.deposit - amount;
                a.reveals.push((info.caller, *amount));
                env.pay(DappId::Ens, info.caller, excess)?;
                env.emit("revealed", format!("{amount}"));
                Ok(())
            }
            EnsCall::Finalize { name_hash } => {
                require(self.phase(name_hash, height) == Phase::Closed, "auction still open")?;
                let a = self.auctions.get_mut(name_hash).ok_or(Revert("no auction"))?;
                require(!a.finalized, "already finalized")?;
                a.finalized = true;
                a.winner = pick_winner(&a.reveals);
                // The winning amount stays locked as the deed; losers get
                // their revealed amount back; unrevealed deposits are lost.
                for &(who, amount) in &a.reveals {
                    if a.winner.map(|(w, _)| w) != Some(who) {
                        env.pay(DappId::Ens, who, amount)?;
                    }
                }
                let forfeited: Wei = a.bids.values().filter(|b| !b.revealed).map(|b| b.deposit).sum();
                env.burn(DappId::Ens, forfeited)?;
                env.emit("finalized", format!("{:?}", a.winner.map(|w| w.0)));
                Ok(())
            }
        }
    }

    pub fn encode_state(&self, e: &mut Encoder) {
        e.u64(self.bidding_blocks).u64(self.reveal_blocks).u64(self.auctions.len() as u64);
        for (h, a) in &self.auctions {
            e.hash(h).u64(a.started).u64(a.bids.len() as u64);
            for (who, b) in &a.bids {
                e.address(who).hash(&b.sealed).u128(b.deposit).bool(b.revealed);
            }
            e.u64(a.reveals.len() as u64);
            for (who, amount) in &a.reveals {
                e.address(who).u128(*amount);
            }
            e.bool(a.finalized);
        }
    }
}
