use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::{require, CallInfo, CallResult, Env, Revert};
use crate::call::{DappId, DexCall, Side};
use crate::types::{Address, Encoder, Wei};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Order {
    pub id: u64,
    pub owner: Address,
    pub side: Side,
    pub price: u64,
    /// Remaining quantity.
    pub qty: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Closure {
    Filled,
    Cancelled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trade {
    pub order: u64,
    pub maker: Address,
    pub taker: Address,
    pub price: u64,
    pub qty: u64,
}

/// On-chain limit order book with price-time priority. Bids escrow wei,
/// asks escrow units; every trade executes at the resting order's price.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderBookDex {
    /// Wei per price unit.
    pub unit_wei: Wei,
    next_id: u64,
    open: BTreeMap<u64, Order>,
    closed: BTreeMap<u64, Closure>,
    units: BTreeMap<Address, u64>,
    trades: Vec<Trade>,
}

impl OrderBookDex {
    pub fn new(unit_wei: Wei) -> Self {
        OrderBookDex {
            unit_wei,
            next_id: 1,
            open: BTreeMap::new(),
            closed: BTreeMap::new(),
            units: BTreeMap::new(),
            trades: Vec::new(),
        }
    }

    pub fn wei(&self, price: u64, qty: u64) -> Wei {
        price as Wei * qty as Wei * self.unit_wei
    }

    pub fn credit_units(&mut self, owner: Address, qty: u64) {
        *self.units.entry(owner).or_default() += qty;
    }

    pub fn units_of(&self, owner: &Address) -> u64 {
        self.units.get(owner).copied().unwrap_or(0)
    }

    /// Rest an order without matching, for genesis books. Asks draw on the
    /// owner's unit balance; bids need `wei(price, qty)` funded into the DEX
    /// escrow by the caller.
    pub fn place_resting(&mut self, owner: Address, side: Side, price: u64, qty: u64) -> u64 {
        if side == Side::Ask {
            let u = self.units.entry(owner).or_default();
            assert!(*u >= qty, "genesis ask exceeds unit balance");
            *u -= qty;
        }
        let id = self.next_id;
        self.next_id += 1;
        self.open.insert(id, Order { id, owner, side, price, qty });
        id
    }

    pub fn order(&self, id: u64) -> Option<&Order> {
        self.open.get(&id)
    }

    pub fn closure(&self, id: u64) -> Option<Closure> {
        self.closed.get(&id).copied()
    }

    pub fn trades(&self) -> &[Trade] {
        &self.trades
    }

    /// Open orders of one side in priority order.
    pub fn book(&self, side: Side) -> Vec<Order> {
        let mut v: Vec<Order> = self.open.values().filter(|o| o.side == side).cloned().collect();
        match side {
            Side::Ask => v.sort_by_key(|o| (o.price, o.id)),
            Side::Bid => v.sort_by_key(|o| (core::cmp::Reverse(o.price), o.id)),
        }
        v
    }

    pub fn best_ask(&self) -> Option<Order> {
        self.book(Side::Ask).into_iter().next()
    }

    pub fn best_bid(&self) -> Option<Order> {
        self.book(Side::Bid).into_iter().next()
    }

    /// Wei committed by open bids; equals the DEX escrow balance.
    pub fn escrowed_wei(&self) -> Wei {
        self.open.values().filter(|o| o.side == Side::Bid).map(|o| self.wei(o.price, o.qty)).sum()
    }

    /// Free plus escrowed units.
    pub fn total_units(&self) -> u64 {
        self.units.values().sum::<u64>() + self.open.values().filter(|o| o.side == Side::Ask).map(|o| o.qty).sum::<u64>()
    }

    fn take_units(&mut self, owner: Address, qty: u64) -> CallResult {
        let u = self.units.entry(owner).or_default();
        require(*u >= qty, "insufficient units")?;
        *u -= qty;
        Ok(())
    }

    fn reduce(&mut self, id: u64, qty: u64) {
        let o = self.open.get_mut(&id).expect("order open");
        o.qty -= qty;
        if o.qty == 0 {
            self.open.remove(&id);
            self.closed.insert(id, Closure::Filled);
        }
    }

    fn open_order(&self, id: u64) -> Result<Order, Revert> {
        match (self.open.get(&id), self.closed.get(&id)) {
            (Some(o), _) => Ok(o.clone()),
            (None, Some(Closure::Filled)) => Err(Revert("order already filled")),
            (None, Some(Closure::Cancelled)) => Err(Revert("order already cancelled")),
            (None, None) => Err(Revert("unknown order")),
        }
    }

    /// Buyer takes `qty` from a resting ask; payment comes out of escrow.
    fn take_ask(&mut self, ask: &Order, buyer: Address, qty: u64, env: &mut dyn Env) -> CallResult {
        env.pay(DappId::Dex, ask.owner, self.wei(ask.price, qty))?;
        self.credit_units(buyer, qty);
        self.reduce(ask.id, qty);
        self.trades.push(Trade { order: ask.id, maker: ask.owner, taker: buyer, price: ask.price, qty });
        Ok(())
    }

    /// Seller hits a resting bid with units it has already given up.
    fn take_bid(&mut self, bid: &Order, seller: Address, qty: u64, env: &mut dyn Env) -> CallResult {
        env.pay(DappId::Dex, seller, self.wei(bid.price, qty))?;
        self.credit_units(bid.owner, qty);
        self.reduce(bid.id, qty);
        self.trades.push(Trade { order: bid.id, maker: bid.owner, taker: seller, price: bid.price, qty });
        Ok(())
    }

    pub fn apply(&mut self, call: &DexCall, info: &CallInfo, env: &mut dyn Env) -> CallResult {
        let caller = info.caller;
        match *call {
            DexCall::MakeOrder { side, price, qty } => {
                require(price > 0 && qty > 0, "empty order")?;
                let mut remaining = qty;
                match side {
                    Side::Bid => {
                        require(info.value == self.wei(price, qty), "bid escrow mismatch")?;
                        while remaining > 0 {
                            let Some(ask) = self.best_ask().filter(|a| a.price <= price) else { break };
                            let q = remaining.min(ask.qty);
                            self.take_ask(&ask, caller, q, env)?;
                            // Price improvement goes back to the bidder.
                            env.pay(DappId::Dex, caller, self.wei(price - ask.price, q))?;
                            remaining -= q;
                        }
                    }
                    Side::Ask => {
                        require(info.value == 0, "asks carry no value")?;
                        self.take_units(caller, qty)?;
                        while remaining > 0 {
                            let Some(bid) = self.best_bid().filter(|b| b.price >= price) else { break };
                            let q = remaining.min(bid.qty);
                            self.take_bid(&bid, caller, q, env)?;
                            remaining -= q;
                        }
                    }
                }
                let id = self.next_id;
                self.next_id += 1;
                if remaining > 0 {
                    self.open.insert(id, Order { id, owner: caller, side, price, qty: remaining });
                } else {
                    self.closed.insert(id, Closure::Filled);
                }
                env.emit("order", format!("{id}"));
                Ok(())
            }
            DexCall::CancelOrder { id } => {
                let o = self.open_order(id)?;
                require(o.owner == caller, "not order owner")?;
                require(info.value == 0, "cancel carries no value")?;
                match o.side {
                    Side::Bid => env.pay(DappId::Dex, o.owner, self.wei(o.price, o.qty))?,
                    Side::Ask => self.credit_units(o.owner, o.qty),
                }
                self.open.remove(&id);
                self.closed.insert(id, Closure::Cancelled);
                env.emit("cancelled", format!("{id}"));
                Ok(())
            }
            DexCall::FillOrder { id, qty } => {
                let o = self.open_order(id)?;
                require(qty > 0 && qty <= o.qty, "bad fill quantity")?;
                match o.side {
                    Side::Ask => {
                        require(info.value == self.wei(o.price, qty), "fill payment mismatch")?;
                        self.take_ask(&o, caller, qty, env)?;
                    }
                    Side::Bid => {
                        require(info.value == 0, "selling carries no value")?;
                        self.take_units(caller, qty)?;
                        self.take_bid(&o, caller, qty, env)?;
                    }
                }
                env.emit("filled", format!("{id}"));
                Ok(())
            }
            DexCall::MarketBuy { qty, limit } => {
                require(qty > 0, "empty order")?;
                require(info.value == self.wei(limit, qty), "market buy escrow mismatch")?;
                let mut remaining = qty;
                let mut spent: Wei = 0;
                for ask in self.book(Side::Ask) {
                    if remaining == 0 || ask.price > limit {
                        break;
                    }
                    let q = remaining.min(ask.qty);
                    spent += self.wei(ask.price, q);
                    self.take_ask(&ask, caller, q, env)?;
                    remaining -= q;
                }
                require(remaining < qty, "no liquidity within limit")?;
                env.pay(DappId::Dex, caller, info.value - spent)?;
                Ok(())
            }
        }
    }

    pub fn encode_state(&self, e: &mut Encoder) {
        e.u128(self.unit_wei).u64(self.next_id).u64(self.open.len() as u64);
        for o in self.open.values() {
            e.u64(o.id).address(&o.owner).u8(o.side as u8).u64(o.price).u64(o.qty);
        }
        e.u64(self.closed.len() as u64);
        for (id, c) in &self.closed {
            e.u64(*id).u8(*c as u8);
        }
        e.u64(self.units.len() as u64);
        for (a, u) in &self.units {
            e.address(a).u64(*u);
        }
        e.u64(self.trades.len() as u64);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dapps::testing::MockEnv;

    const U: Wei = 1;

    fn who(s: &str) -> Address {
        Address::from_label(s)
    }

    /// Book with one genesis ask of 10 @ 100 owned by `maker`.
    fn book_with_ask() -> (OrderBookDex, MockEnv, u64) {
        let mut dex = OrderBookDex::new(U);
        dex.credit_units(who("maker"), 10);
        let id = dex.place_resting(who("maker"), Side::Ask, 100, 10);
        (dex, MockEnv::new(1), id)
    }

    fn send(dex: &mut OrderBookDex, env: &mut MockEnv, from: &str, value: Wei, call: DexCall) -> CallResult {
        env.credit(who(from), value);
        env.deposit(who(from), DappId::Dex, value);
        let snapshot = (dex.clone(), env.balances.clone());
        let r = dex.apply(&call, &CallInfo { caller: who(from), value, gas_price: 1 }, env);
        if r.is_err() {
            // Mirror the executor: a revert restores state and returns the value.
            *dex = snapshot.0;
            env.balances = snapshot.1;
            env.pay(DappId::Dex, who(from), value).unwrap();
        }
        r
    }

    #[test]
    fn cancel_refunds_escrow() {
        let mut dex = OrderBookDex::new(U);
        let mut env = MockEnv::new(1);
        send(&mut dex, &mut env, "alice", 500, DexCall::MakeOrder { side: Side::Bid, price: 50, qty: 10 }).unwrap();
        assert_eq!(env.bal(DappId::Dex.address()), 500);
        let id = dex.best_bid().unwrap().id;
        send(&mut dex, &mut env, "alice", 0, DexCall::CancelOrder { id }).unwrap();
        assert_eq!(env.bal(who("alice")), 500);
        assert_eq!(env.bal(DappId::Dex.address()), 0);
        assert_eq!(dex.closure(id), Some(Closure::Cancelled));
    }

    #[test]
    fn fill_before_cancel_griefs_the_maker() {
        let (mut dex, mut env, id) = book_with_ask();
        send(&mut dex, &mut env, "mallory", 1000, DexCall::FillOrder { id, qty: 10 }).unwrap();
        assert_eq!(send(&mut dex, &mut env, "maker", 0, DexCall::CancelOrder { id }), Err(Revert("order already filled")));
        assert_eq!(dex.units_of(&who("mallory")), 10);
        assert_eq!(env.bal(who("maker")), 1000);
    }

    #[test]
    fn fill_after_cancel_reverts() {
        let (mut dex, mut env, id) = book_with_ask();
        send(&mut dex, &mut env, "maker", 0, DexCall::CancelOrder { id }).unwrap();
        assert_eq!(
            send(&mut dex, &mut env, "mallory", 1000, DexCall::FillOrder { id, qty: 10 }),
            Err(Revert("order already cancelled"))
        );
        assert_eq!(dex.units_of(&who("maker")), 10);
    }

    #[test]
    fn market_buy_walks_asks_and_refunds() {
        let (mut dex, mut env, _) = book_with_ask();
        dex.credit_units(who("m2"), 5);
        dex.place_resting(who("m2"), Side::Ask, 104, 5);
        send(&mut dex, &mut env, "bob", 105 * 12, DexCall::MarketBuy { qty: 12, limit: 105 }).unwrap();
        assert_eq!(dex.units_of(&who("bob")), 12);
        // 10 @ 100 + 2 @ 104 = 1208, refund 52.
        assert_eq!(env.bal(who("bob")), 1260 - 1208);
        assert_eq!(dex.best_ask().unwrap().qty, 3);
    }

    #[test]
    fn market_buy_without_liquidity_reverts() {
        let (mut dex, mut env, _) = book_with_ask();
        assert!(send(&mut dex, &mut env, "bob", 99 * 10, DexCall::MarketBuy { qty: 10, limit: 99 }).is_err());
        assert_eq!(env.bal(who("bob")), 990);
    }

    #[test]
    fn crossing_bid_matches_then_rests() {
        let (mut dex, mut env, _) = book_with_ask();
        send(&mut dex, &mut env, "bob", 102 * 15, DexCall::MakeOrder { side: Side::Bid, price: 102, qty: 15 }).unwrap();
        assert_eq!(dex.units_of(&who("bob")), 10);
        let rest = dex.best_bid().unwrap();
        assert_eq!((rest.price, rest.qty), (102, 5));
        assert!(dex.best_ask().is_none());
        // Escrow holds exactly the resting bid.
        assert_eq!(env.bal(DappId::Dex.address()), dex.escrowed_wei());
    }
}
