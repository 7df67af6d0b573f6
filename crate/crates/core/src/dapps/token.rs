use alloc::collections::BTreeMap;
use alloc::format;

use super::{require, CallInfo, CallResult, Env};
use crate::call::TokenCall;
use crate::types::{Address, Encoder};

/// ERC20-style balances and allowances.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AllowanceToken {
    balances: BTreeMap<Address, u128>,
    allowances: BTreeMap<(Address, Address), u128>,
}

impl AllowanceToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mint(&mut self, to: Address, amount: u128) {
        *self.balances.entry(to).or_default() += amount;
    }

    pub fn balance_of(&self, a: &Address) -> u128 {
        self.balances.get(a).copied().unwrap_or(0)
    }

    pub fn allowance(&self, owner: &Address, spender: &Address) -> u128 {
        self.allowances.get(&(*owner, *spender)).copied().unwrap_or(0)
    }

    pub fn total_supply(&self) -> u128 {
        self.balances.values().sum()
    }

    pub fn apply(&mut self, call: &TokenCall, info: &CallInfo, env: &mut dyn Env) -> CallResult {
        require(info.value == 0, "token calls carry no value")?;
        let me = info.caller;
        match *call {
            TokenCall::Approve { spender, amount } => {
                self.allowances.insert((me, spender), amount);
                env.emit("approval", format!("{amount}"));
            }
            TokenCall::IncreaseApproval { spender, amount } => {
                let a = self.allowances.entry((me, spender)).or_default();
                *a = a.saturating_add(amount);
                env.emit("approval", format!("{a}"));
            }
            TokenCall::DecreaseApproval { spender, amount } => {
                let a = self.allowances.entry((me, spender)).or_default();
                *a = a.saturating_sub(amount);
                env.emit("approval", format!("{a}"));
            }
            TokenCall::TransferFrom { owner, to, amount } => {
                let allowed = self.allowance(&owner, &me);
                require(allowed >= amount, "allowance exceeded")?;
                require(self.balance_of(&owner) >= amount, "insufficient balance")?;
                self.allowances.insert((owner, me), allowed - amount);
                *self.balances.entry(owner).or_default() -= amount;
                *self.balances.entry(to).or_default() += amount;
                env.emit("transfer", format!("{amount}"));
            }
        }
        Ok(())
    }

    pub fn encode_state(&self, e: &mut Encoder) {
        e.u64(self.balances.len() as u64);
        for (a, b) in &self.balances {
            e.address(a).u128(*b);
        }
        e.u64(self.allowances.len() as u64);
        for ((o, s), v) in &self.allowances {
            e.address(o).address(s).u128(*v);
        }
    }
}
