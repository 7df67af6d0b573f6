//! Intra-block sequencing policies and the hash-grinding counter to CTOR.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::chain::{NodeView, Transaction};
use crate::dapps::{CallResult, Revert};
use crate::types::{Hash256, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    GasPrice,
    Fifo,
    Ctor,
}

/// A sequencing rule. `chained` means honest clients pin every DApp call to
/// the state they observed; the sequencing itself is that of `kind`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrderingPolicy {
    pub kind: PolicyKind,
    pub chained: bool,
}

impl OrderingPolicy {
    pub const GAS_PRICE: OrderingPolicy = OrderingPolicy { kind: PolicyKind::GasPrice, chained: false };
    pub const FIFO: OrderingPolicy = OrderingPolicy { kind: PolicyKind::Fifo, chained: false };
    pub const CTOR: OrderingPolicy = OrderingPolicy { kind: PolicyKind::Ctor, chained: false };

    pub fn parse(s: &str) -> Option<Self> {
        let (chained, inner) = match s.strip_prefix("chained:") {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let kind = match inner {
            "gas_price" => PolicyKind::GasPrice,
            "fifo" => PolicyKind::Fifo,
            "ctor" => PolicyKind::Ctor,
            _ => return None,
        };
        Some(OrderingPolicy { kind, chained })
    }

    pub fn order(&self, pending: Vec<Transaction>, view: &NodeView) -> Vec<Transaction> {
        match self.kind {
            PolicyKind::GasPrice => order_by_gas_price(pending, view),
            PolicyKind::Fifo => order_fifo(pending, view),
            PolicyKind::Ctor => order_ctor(pending),
        }
    }
}

impl fmt::Display for OrderingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.chained {
            f.write_str("chained:")?;
        }
        f.write_str(match self.kind {
            PolicyKind::GasPrice => "gas_price",
            PolicyKind::Fifo => "fifo",
            PolicyKind::Ctor => "ctor",
        })
    }
}

impl Serialize for OrderingPolicy {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OrderingPolicy {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        OrderingPolicy::parse(&s).ok_or_else(|| {
            serde::de::Error::custom(format!("unknown ordering policy `{s}`; expected gas_price, fifo, ctor or chained:<inner>"))
        })
    }
}

fn arrival(view: &NodeView, tx: &Transaction) -> SimTime {
    view.arrival(&tx.hash).unwrap_or(SimTime(u64::MAX))
}

/// Highest gas price first; ties by local arrival, then hash. Per-sender
/// nonce order is enforced by the block packer, which holds back a
/// transaction until its predecessor is in.
pub fn order_by_gas_price(mut pending: Vec<Transaction>, view: &NodeView) -> Vec<Transaction> {
    pending.sort_by(|a, b| {
        b.gas_price.cmp(&a.gas_price).then(arrival(view, a).cmp(&arrival(view, b))).then(a.hash.cmp(&b.hash))
    });
    pending
}

/// Local arrival order; ties by hash.
pub fn order_fifo(mut pending: Vec<Transaction>, view: &NodeView) -> Vec<Transaction> {
    pending.sort_by(|a, b| arrival(view, a).cmp(&arrival(view, b)).then(a.hash.cmp(&b.hash)));
    pending
}

/// Ascending hash.
pub fn order_ctor(mut pending: Vec<Transaction>) -> Vec<Transaction> {
    pending.sort_by_key(|t| t.hash);
    pending
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ground {
    pub tx: Transaction,
    pub tries: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrindFailed {
    pub tries: u64,
}

/// Try salts `template.salt, template.salt + 1, ...` until the hash sorts
/// before `victim`.
pub fn grind_ctor_position(template: &Transaction, victim: &Hash256, max_tries: u64) -> Result<Ground, GrindFailed> {
    for i in 0..max_tries {
        let tx = template.with_salt(template.salt.wrapping_add(i));
        if tx.hash < *victim {
            return Ok(Ground { tx, tries: i + 1 });
        }
    }
    Err(GrindFailed { tries: max_tries })
}

/// A chained call runs only on the exact state it names.
pub fn check_chain_precondition(expected: &Hash256, current: &Hash256) -> CallResult {
    if expected == current {
        Ok(())
    } else {
        Err(Revert("stale state"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::call::{Call, TimerCall};
    use crate::chain::Visibility;
    use alloc::string::ToString;
    use crate::types::Address;

    fn tx(label: &str, gp: u64, salt: u64) -> Transaction {
        Transaction::new(
            Address::from_label(label),
            0,
            gp,
            100_000,
            0,
            Call::Timer(TimerCall::BuyTicket),
            SimTime(0),
            Visibility::Broadcast,
            salt,
        )
    }

    fn view(arrivals: &[(&Transaction, u64)]) -> NodeView {
        let mut v = NodeView::new(Address::from_label("node"));
        for (t, at) in arrivals {
            v.record(t.hash, SimTime(*at));
        }
        v
    }

    #[test]
    fn gas_price_ties_fall_back_to_arrival() {
        let (a, b, c) = (tx("A", 40, 0), tx("B", 41, 0), tx("C", 41, 0));
        let v = view(&[(&a, 0), (&b, 20), (&c, 10)]);
        let order: Vec<_> = order_by_gas_price(alloc::vec![a.clone(), b.clone(), c.clone()], &v).into_iter().map(|t| t.sender).collect();
        assert_eq!(order, alloc::vec![c.sender, b.sender, a.sender]);
    }

    #[test]
    fn fifo_depends_on_the_node() {
        let (x, y) = (tx("X", 1, 0), tx("Y", 1, 0));
        let one = order_fifo(alloc::vec![x.clone(), y.clone()], &view(&[(&x, 5), (&y, 9)]));
        let two = order_fifo(alloc::vec![x.clone(), y.clone()], &view(&[(&x, 9), (&y, 5)]));
        assert_ne!(one, two);
    }

    #[test]
    fn ctor_sorts_by_hash() {
        let txs: Vec<_> = (0..20).map(|i| tx("s", i, i)).collect();
        let out = order_ctor(txs);
        assert!(out.windows(2).all(|w| w[0].hash < w[1].hash));
    }

    #[test]
    fn grinding_edge_cases() {
        let t = tx("m", 1, 0);
        assert_eq!(grind_ctor_position(&t, &Hash256::MAX, 0), Err(GrindFailed { tries: 0 }));
        let g = grind_ctor_position(&t, &Hash256::MAX, 10).unwrap();
        assert_eq!(g.tries, 1);
        assert_eq!(grind_ctor_position(&t, &Hash256::ZERO, 50), Err(GrindFailed { tries: 50 }));
        let g = grind_ctor_position(&t, &Hash256([0x40; 32]), 1000).unwrap();
        assert!(g.tx.hash < Hash256([0x40; 32]));
        assert_eq!(Transaction { salt: 0, hash: t.hash, ..g.tx.clone() }, t);
    }

    #[test]
    fn policy_names_round_trip() {
        for s in ["gas_price", "fifo", "ctor", "chained:gas_price", "chained:ctor"] {
            assert_eq!(OrderingPolicy::parse(s).unwrap().to_string(), s);
        }
        assert!(OrderingPolicy::parse("lifo").is_none());
    }
}
