use alloc::collections::BTreeMap;
use alloc::format;

use super::{require, CallInfo, CallResult, Env};
use crate::call::{CurveCall, DappId};
use crate::types::{Address, Encoder, Wei};

/// Dealer quoting unit `s` (zero-based) at `p0 + m*s`. Buys mint at the
/// curve, sells burn back down it, so the reserve always equals the area
/// under the curve up to the current supply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BondingCurveDealer {
    pub p0: Wei,
    pub m: Wei,
    supply: u64,
    reserve: Wei,
    holdings: BTreeMap<Address, u64>,
}

impl BondingCurveDealer {
    pub fn new(p0: Wei, m: Wei) -> Self {
        BondingCurveDealer { p0, m, supply: 0, reserve: 0, holdings: BTreeMap::new() }
    }

    /// Price of minting `q` units on top of supply `s`.
    pub fn cost(&self, s: u64, q: u64) -> Wei {
        let (s, q) = (s as Wei, q as Wei);
        self.p0 * q + self.m * (s * q + q * q.saturating_sub(1) / 2)
    }

    pub fn supply(&self) -> u64 {
        self.supply
    }

    pub fn reserve(&self) -> Wei {
        self.reserve
    }

    pub fn units_of(&self, a: &Address) -> u64 {
        self.holdings.get(a).copied().unwrap_or(0)
    }

    /// Current marginal price, i.e. the cost of the next unit.
    pub fn spot(&self) -> Wei {
        self.p0 + self.m * self.supply as Wei
    }

    pub fn apply(&mut self, call: &CurveCall, info: &CallInfo, env: &mut dyn Env) -> CallResult {
        match *call {
            CurveCall::Buy { units } => {
                let cost = self.cost(self.supply, units);
                require(info.value >= cost, "slippage: cost exceeds payment")?;
                self.supply += units;
                self.reserve += cost;
                *self.holdings.entry(info.caller).or_default() += units;
                env.pay(DappId::Curve, info.caller, info.value - cost)?;
                env.emit("bought", format!("{units}"));
                Ok(())
            }
            CurveCall::Sell { units } => {
                require(info.value == 0, "sell carries no value")?;
                require(units <= self.supply, "sell exceeds supply")?;
                let held = self.holdings.entry(info.caller).or_default();
                require(*held >= units, "insufficient units")?;
                *held -= units;
                self.supply -= units;
                let proceeds = self.cost(self.supply, units);
                self.reserve -= proceeds;
                env.pay(DappId::Curve, info.caller, proceeds)?;
                env.emit("sold", format!("{units}"));
                Ok(())
            }
        }
    }

    pub fn encode_state(&self, e: &mut Encoder) {
        e.u128(self.p0).u128(self.m).u64(self.supply).u128(self.reserve).u64(self.holdings.len() as u64);
        for (a, u) in &self.holdings {
            e.address(a).u64(*u);
        }
    }
}
