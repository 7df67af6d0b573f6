use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::call::{BatchCall, DappId, Side};
use crate::dapps::{require, CallInfo, CallResult, Env};
use crate::types::{Address, Encoder, Wei};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BatchOrder {
    pub side: Side,
    pub limit: u64,
    pub qty: u64,
    pub owner: Address,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fill {
    pub order: BatchOrder,
    pub filled: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clearing {
    pub price: u64,
    pub volume: u64,
    /// One entry per order, in canonical (sorted) order.
    pub fills: Vec<Fill>,
}

fn demand(orders: &[BatchOrder], p: u64) -> u64 {
    orders.iter().filter(|o| o.side == Side::Bid && o.limit >= p).map(|o| o.qty).sum()
}

fn supply(orders: &[BatchOrder], p: u64) -> u64 {
    orders.iter().filter(|o| o.side == Side::Ask && o.limit <= p).map(|o| o.qty).sum()
}

/// Volume tradable at `p`.
pub fn volume_at(orders: &[BatchOrder], p: u64) -> u64 {
    demand(orders, p).min(supply(orders, p))
}

/// Uniform-price clearing. The price maximizes executable volume; among
/// maximizing prices the midpoint of their range, rounded down. The short
/// side fills completely; the long side is rationed pro rata with leftover
/// units going by largest remainder, ties in canonical order. The result
/// does not depend on the order of `orders`.
pub fn clear(orders: &[BatchOrder]) -> Option<Clearing> {
    let mut sorted = orders.to_vec();
    sorted.sort();
    let mut limits: Vec<u64> = sorted.iter().map(|o| o.limit).collect();
    limits.sort_unstable();
    limits.dedup();
    // Volume is constant on each limit and on each open gap between
    // consecutive limits, so these probes cover every price.
    let mut probes: Vec<(u64, u64)> = Vec::new();
    for (i, &l) in limits.iter().enumerate() {
        probes.push((l, l));
        if let Some(&next) = limits.get(i + 1) {
            if next > l + 1 {
                probes.push((l + 1, next - 1));
            }
        }
    }
    let best = probes.iter().map(|&(lo, _)| volume_at(&sorted, lo)).max()?;
    if best == 0 {
        return None;
    }
    let lo = probes.iter().find(|&&(lo, _)| volume_at(&sorted, lo) == best)?.0;
    let hi = probes.iter().rev().find(|&&(lo, _)| volume_at(&sorted, lo) == best)?.1;
    let price = lo + (hi - lo) / 2;
    let volume = volume_at(&sorted, price);

    let eligible = |o: &BatchOrder| match o.side {
        Side::Bid => o.limit >= price,
        Side::Ask => o.limit <= price,
    };
    let mut filled = alloc::vec![0u64; sorted.len()];
    for side in [Side::Bid, Side::Ask] {
        let idx: Vec<usize> = (0..sorted.len()).filter(|&i| sorted[i].side == side && eligible(&sorted[i])).collect();
        let total: u64 = idx.iter().map(|&i| sorted[i].qty).sum();
        if total == volume {
            for &i in &idx {
                filled[i] = sorted[i].qty;
            }
            continue;
        }
        let mut rem: Vec<(u128, usize)> = Vec::new();
        let mut given = 0u64;
        for &i in &idx {
            let num = sorted[i].qty as u128 * volume as u128;
            filled[i] = (num / total as u128) as u64;
            given += filled[i];
            rem.push((num % total as u128, i));
        }
        rem.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, i) in rem.iter().take((volume - given) as usize) {
            filled[i] += 1;
        }
    }
    let fills = sorted.into_iter().zip(filled).map(|(order, filled)| Fill { order, filled }).collect();
    Some(Clearing { price, volume, fills })
}

/// Call market: orders collect for `interval` blocks, then all clear at
/// one price. Bids escrow `limit * qty` wei; asks escrow units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchBook {
    pub unit_wei: Wei,
    pub interval: u64,
    orders: Vec<BatchOrder>,
    units: BTreeMap<Address, u64>,
    history: Vec<(u64, u64, u64)>,
}

impl BatchBook {
    pub fn new(unit_wei: Wei, interval: u64) -> Self {
        BatchBook { unit_wei, interval: interval.max(1), orders: Vec::new(), units: BTreeMap::new(), history: Vec::new() }
    }

    pub fn wei(&self, price: u64, qty: u64) -> Wei {
        price as Wei * qty as Wei * self.unit_wei
    }

    pub fn credit_units(&mut self, owner: Address, qty: u64) {
        *self.units.entry(owner).or_default() += qty;
    }

    pub fn units_of(&self, a: &Address) -> u64 {
        self.units.get(a).copied().unwrap_or(0)
    }

    pub fn pending(&self) -> &[BatchOrder] {
        &self.orders
    }

    /// (height, price, volume) of every batch that traded.
    pub fn history(&self) -> &[(u64, u64, u64)] {
        &self.history
    }

    /// Queue an order without a transaction, for genesis books. Bids need
    /// their escrow funded by the caller.
    pub fn place_genesis(&mut self, owner: Address, side: Side, limit: u64, qty: u64) {
        if side == Side::Ask {
            let u = self.units.entry(owner).or_default();
            assert!(*u >= qty, "genesis ask exceeds unit balance");
            *u -= qty;
        }
        self.orders.push(BatchOrder { side, limit, qty, owner });
    }

    pub fn apply(&mut self, call: &BatchCall, info: &CallInfo, env: &mut dyn Env) -> CallResult {
        let BatchCall::Submit { side, limit, qty } = *call;
        require(limit > 0 && qty > 0, "empty order")?;
        match side {
            Side::Bid => require(info.value == self.wei(limit, qty), "bid escrow mismatch")?,
            Side::Ask => {
                require(info.value == 0, "asks carry no value")?;
                let u = self.units.entry(info.caller).or_default();
                require(*u >= qty, "insufficient units")?;
                *u -= qty;
            }
        }
        self.orders.push(BatchOrder { side, limit, qty, owner: info.caller });
        env.emit("queued", format!("{limit}x{qty}"));
        Ok(())
    }

    pub fn end_block(&mut self, env: &mut dyn Env) -> CallResult {
        let height = env.block().height;
        if !height.is_multiple_of(self.interval) || self.orders.is_empty() {
            return Ok(());
        }
        let orders = core::mem::take(&mut self.orders);
        let clearing = clear(&orders);
        let price = clearing.as_ref().map_or(0, |c| c.price);
        let fills: Vec<Fill> = match clearing {
            Some(c) => {
                self.history.push((height, c.price, c.volume));
                env.emit("cleared", format!("{}@{}", c.volume, c.price));
                c.fills
            }
            None => orders.into_iter().map(|order| Fill { order, filled: 0 }).collect(),
        };
        for f in fills {
            let o = &f.order;
            match o.side {
                Side::Bid => {
                    self.credit_units(o.owner, f.filled);
                    let refund = self.wei(o.limit, o.qty) - self.wei(price, f.filled);
                    env.pay(DappId::Batch, o.owner, refund)?;
                }
                Side::Ask => {
                    self.credit_units(o.owner, o.qty - f.filled);
                    env.pay(DappId::Batch, o.owner, self.wei(price, f.filled))?;
                }
            }
        }
        Ok(())
    }

    pub fn encode_state(&self, e: &mut Encoder) {
        e.u128(self.unit_wei).u64(self.interval).u64(self.orders.len() as u64);
        for o in &self.orders {
            e.u8(o.side as u8).u64(o.limit).u64(o.qty).address(&o.owner);
        }
        e.u64(self.units.len() as u64);
        for (a, u) in &self.units {
            e.address(a).u64(*u);
        }
        e.u64(self.history.len() as u64);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dapps::testing::MockEnv;

    fn o(side: Side, limit: u64, qty: u64, owner: &str) -> BatchOrder {
        BatchOrder { side, limit, qty, owner: Address::from_label(owner) }
    }

    /// Scan every integer price; volume-maximizing range midpoint.
    fn brute_price(orders: &[BatchOrder]) -> Option<(u64, u64)> {
        let vols: Vec<(u64, u64)> = (0..=300).map(|p| (p, volume_at(orders, p))).collect();
        let best = vols.iter().map(|v| v.1).max()?;
        if best == 0 {
            return None;
        }
        let lo = vols.iter().find(|v| v.1 == best)?.0;
        let hi = vols.iter().rev().find(|v| v.1 == best)?.0;
        Some((lo + (hi - lo) / 2, best))
    }

    #[test]
    fn single_cross_clears_at_midpoint() {
        let book = [o(Side::Bid, 105, 10, "b"), o(Side::Ask, 100, 10, "s")];
        let c = clear(&book).unwrap();
        assert_eq!((c.price, c.volume), (102, 10));
        assert_eq!(brute_price(&book), Some((102, 10)));
    }

    #[test]
    fn empty_or_uncrossed_book_does_not_trade() {
        assert_eq!(clear(&[]), None);
        assert_eq!(clear(&[o(Side::Bid, 99, 1, "b"), o(Side::Ask, 100, 1, "s")]), None);
    }

    #[test]
    fn price_agrees_with_brute_force() {
        let books = [
            alloc::vec![o(Side::Bid, 105, 10, "v"), o(Side::Bid, 100, 10, "m"), o(Side::Ask, 100, 10, "k"), o(Side::Ask, 105, 10, "m")],
            alloc::vec![o(Side::Bid, 120, 3, "a"), o(Side::Bid, 110, 5, "b"), o(Side::Ask, 90, 4, "c"), o(Side::Ask, 115, 9, "d")],
            alloc::vec![o(Side::Bid, 50, 7, "a"), o(Side::Ask, 40, 2, "b"), o(Side::Ask, 45, 2, "c"), o(Side::Ask, 60, 2, "d")],
        ];
        for b in &books {
            let c = clear(b).unwrap();
            assert_eq!(Some((c.price, c.volume)), brute_price(b));
        }
    }

    #[test]
    fn long_side_is_prorated() {
        let c = clear(&[o(Side::Bid, 10, 2, "a"), o(Side::Bid, 10, 1, "b"), o(Side::Ask, 10, 2, "s")]).unwrap();
        let bid_fill: u64 = c.fills.iter().filter(|f| f.order.side == Side::Bid).map(|f| f.filled).sum();
        assert_eq!(bid_fill, 2);
        let a = c.fills.iter().find(|f| f.order.owner == Address::from_label("a")).unwrap();
        assert!(a.filled >= 1);
    }

    #[test]
    fn settlement_moves_units_and_wei() {
        let mut b = BatchBook::new(1, 2);
        let mut env = MockEnv::new(1);
        b.credit_units(Address::from_label("s"), 10);
        b.place_genesis(Address::from_label("s"), Side::Ask, 100, 10);
        let buyer = Address::from_label("b");
        env.credit(buyer, 1050);
        env.deposit(buyer, DappId::Batch, 1050);
        b.apply(&BatchCall::Submit { side: Side::Bid, limit: 105, qty: 10 }, &CallInfo { caller: buyer, value: 1050, gas_price: 1 }, &mut env)
            .unwrap();
        b.end_block(&mut env).unwrap();
        assert_eq!(b.pending().len(), 2);
        env.block.height = 2;
        b.end_block(&mut env).unwrap();
        assert_eq!(b.units_of(&buyer), 10);
        assert_eq!(env.bal(buyer), 1050 - 1020);
        assert_eq!(env.bal(Address::from_label("s")), 1020);
        assert_eq!(env.bal(DappId::Batch.address()), 0);
    }
}
