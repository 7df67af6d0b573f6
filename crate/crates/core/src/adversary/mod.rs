//! Attacker building blocks: watching the mempool and drafting the
//! displacement, insertion and suppression transactions.

use alloc::vec::Vec;

use crate::call::{BatchCall, Call, CurveCall, DappId, DexCall, Side};
use crate::chain::{Ledger, Network, Transaction};
use crate::dapps::DappState;
use crate::types::{fee, Address, Gas, Gwei, SimTime, Wei};

/// An attacker transaction before nonce assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Draft {
    pub call: Call,
    pub value: Wei,
    pub gas_price: Gwei,
    pub gas_limit: Gas,
}

impl Draft {
    pub fn new(call: Call, value: Wei, gas_price: Gwei) -> Self {
        let gas_limit = call.gas_cost();
        Draft { call, value, gas_price, gas_limit }
    }

    /// Most this draft can cost in fees.
    pub fn max_fee(&self) -> Wei {
        fee(self.gas_limit, self.gas_price)
    }
}

/// Spending cap on attacker fees. Attached value is capital, not spend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Budget {
    pub limit: Option<Wei>,
    pub spent: Wei,
}

impl Budget {
    pub fn new(limit: Option<Wei>) -> Self {
        Budget { limit, spent: 0 }
    }

    pub fn can_afford(&self, amount: Wei) -> bool {
        self.limit.is_none_or(|l| self.spent + amount <= l)
    }

    /// Reserve `amount`; false (and nothing reserved) if it would overrun.
    pub fn try_spend(&mut self, amount: Wei) -> bool {
        if !self.can_afford(amount) {
            return false;
        }
        self.spent += amount;
        true
    }
}

/// Pending broadcast transactions seen by `node` at `now` that match
/// `pred`, excluding those sent by `mine`, in local arrival order.
pub fn observe(
    net: &Network,
    node: &Address,
    now: SimTime,
    mine: &dyn Fn(&Address) -> bool,
    pred: &dyn Fn(&Call) -> bool,
) -> Vec<Transaction> {
    let Some(view) = net.view(node) else { return Vec::new() };
    let mut seen: Vec<(SimTime, Transaction)> = net
        .visible(node, now)
        .into_iter()
        .filter(|tx| !tx.is_private() && !mine(&tx.sender) && pred(&tx.call))
        .filter_map(|tx| view.arrival(&tx.hash).map(|t| (t, tx)))
        .collect();
    seen.sort_by_key(|(t, tx)| (*t, tx.hash));
    seen.into_iter().map(|(_, tx)| tx).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Displacement {
    /// Send the victim's own payload.
    Copy,
    /// Answer a pending cancellation by filling the order first.
    FillCancelled,
}

/// The displacing transaction for `victim`, priced `premium` above it.
pub fn displace(victim: &Transaction, mode: Displacement, premium: Gwei, ledger: &Ledger) -> Option<Draft> {
    let gas_price = victim.gas_price + premium;
    match mode {
        Displacement::Copy => {
            Some(Draft { call: victim.call.clone(), value: victim.value, gas_price, gas_limit: victim.gas_limit })
        }
        Displacement::FillCancelled => {
            let Call::Dex(DexCall::CancelOrder { id }) = victim.call.effective_call() else { return None };
            let Some(DappState::Dex(dex)) = ledger.dapp(DappId::Dex) else { return None };
            let order = dex.order(*id)?;
            let value = match order.side {
                Side::Ask => dex.wei(order.price, order.qty),
                Side::Bid => 0,
            };
            Some(Draft::new(Call::Dex(DexCall::FillOrder { id: *id, qty: order.qty }), value, gas_price))
        }
    }
}

/// Front and back legs around a pending buy. Both DEX legs must land before
/// the victim (the back leg is the ask the victim will hit), so both carry
/// the premium and go out with consecutive nonces. On the curve the back leg
/// sells after the victim and is priced `premium` below it.
pub fn insert(victim: &Transaction, premium: Gwei, ledger: &Ledger) -> Option<(Draft, Draft)> {
    let above = victim.gas_price + premium;
    let below = victim.gas_price.saturating_sub(premium).max(1);
    match victim.call.effective_call() {
        Call::Dex(DexCall::MarketBuy { qty, limit }) => {
            let Some(DappState::Dex(dex)) = ledger.dapp(DappId::Dex) else { return None };
            let ask = dex.best_ask().filter(|a| a.price < *limit)?;
            let q = (*qty).min(ask.qty);
            let front = Draft::new(Call::Dex(DexCall::FillOrder { id: ask.id, qty: q }), dex.wei(ask.price, q), above);
            let back = Draft::new(Call::Dex(DexCall::MakeOrder { side: Side::Ask, price: *limit, qty: q }), 0, above);
            Some((front, back))
        }
        Call::Curve(CurveCall::Buy { units }) => {
            let Some(DappState::Curve(curve)) = ledger.dapp(DappId::Curve) else { return None };
            let q = curve_front_size(curve.cost(curve.supply(), *units), victim.value, *units, curve.m);
            if q == 0 {
                return None;
            }
            let front = Draft::new(Call::Curve(CurveCall::Buy { units: q }), curve.cost(curve.supply(), q), above);
            let back = Draft::new(Call::Curve(CurveCall::Sell { units: q }), 0, below);
            Some((front, back))
        }
        Call::Batch(BatchCall::Submit { side: Side::Bid, limit, qty }) => {
            let Some(DappState::Batch(book)) = ledger.dapp(DappId::Batch) else { return None };
            let ask = book.pending().iter().filter(|o| o.side == Side::Ask && o.limit < *limit).min_by_key(|o| o.limit)?;
            let q = (*qty).min(ask.qty);
            let front = Draft::new(Call::Batch(BatchCall::Submit { side: Side::Bid, limit: ask.limit, qty: q }), book.wei(ask.limit, q), above);
            let back = Draft::new(Call::Batch(BatchCall::Submit { side: Side::Ask, limit: *limit, qty: q }), 0, above);
            Some((front, back))
        }
        _ => None,
    }
}

/// Largest front-run size `q` that still leaves the victim's buy of `units`
/// affordable: the victim's cost rises by `q * units * m`.
pub fn curve_front_size(fair_cost: Wei, victim_value: Wei, units: u64, m: Wei) -> u64 {
    if victim_value <= fair_cost || units == 0 || m == 0 {
        return 0;
    }
    let q = (victim_value - fair_cost) / (units as Wei * m);
    q.min(u64::MAX as Wei) as u64
}

/// Fillers needed to exhaust one block.
pub fn fillers_per_block(block_gas_limit: Gas, filler_gas: Gas) -> u64 {
    block_gas_limit.div_ceil(filler_gas)
}

/// Fee budget to stuff `blocks` consecutive blocks.
pub fn suppression_cost(blocks: u64, block_gas_limit: Gas, filler_gas: Gas, gas_price: Gwei) -> Wei {
    blocks as Wei * fillers_per_block(block_gas_limit, filler_gas) as Wei * fee(filler_gas, gas_price)
}
