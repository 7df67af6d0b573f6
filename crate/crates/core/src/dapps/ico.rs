use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::{require, CallInfo, CallResult, Env};
use crate::call::{DappId, IcoCall};
use crate::types::{Address, Encoder, Gwei, Wei};

/// Token sale with a ladder of ceilings. A deposit is accepted up to what is
/// left of the current ceiling and the excess refunded; a full ceiling opens
/// the next one. Tokens are issued one per accepted wei.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CappedIco {
    pub caps: Vec<Wei>,
    pub gas_price_cap: Gwei,
    current: usize,
    in_current: Wei,
    accepted: Wei,
    tokens: BTreeMap<Address, Wei>,
}

/// `count` caps halving from `first`.
pub fn geometric_caps(first: Wei, count: usize) -> Vec<Wei> {
    (0..count).map(|i| first >> i).collect()
}

impl CappedIco {
    pub fn new(caps: Vec<Wei>, gas_price_cap: Gwei) -> Self {
        CappedIco { caps, gas_price_cap, current: 0, in_current: 0, accepted: 0, tokens: BTreeMap::new() }
    }

    pub fn is_open(&self) -> bool {
        self.current < self.caps.len()
    }

    pub fn accepted(&self) -> Wei {
        self.accepted
    }

    pub fn ceiling_index(&self) -> usize {
        self.current
    }

    pub fn remaining_in_ceiling(&self) -> Wei {
        self.caps.get(self.current).map_or(0, |c| c - self.in_current)
    }

    pub fn tokens_of(&self, a: &Address) -> Wei {
        self.tokens.get(a).copied().unwrap_or(0)
    }

    pub fn apply(&mut self, call: &IcoCall, info: &CallInfo, env: &mut dyn Env) -> CallResult {
        let IcoCall::Deposit = call;
        require(info.gas_price <= self.gas_price_cap, "gas price above cap")?;
        require(self.is_open(), "sale closed")?;
        require(info.value > 0, "empty deposit")?;
        let take = info.value.min(self.remaining_in_ceiling());
        self.in_current += take;
        self.accepted += take;
        *self.tokens.entry(info.caller).or_default() += take;
        if self.remaining_in_ceiling() == 0 {
            self.current += 1;
            self.in_current = 0;
        }
        env.pay(DappId::Ico, info.caller, info.value - take)?;
        env.emit("deposit", format!("{take}"));
        Ok(())
    }

    pub fn encode_state(&self, e: &mut Encoder) {
        e.u64(self.caps.len() as u64);
        for c in &self.caps {
            e.u128(*c);
        }
        e.u64(self.gas_price_cap).u64(self.current as u64).u128(self.in_current).u128(self.accepted);
        e.u64(self.tokens.len() as u64);
        for (a, t) in &self.tokens {
            e.address(a).u128(*t);
        }
    }
}
