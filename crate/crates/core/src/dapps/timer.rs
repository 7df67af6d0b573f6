use alloc::format;

use super::{require, CallInfo, CallResult, Env, Revert};
use crate::call::{DappId, TimerCall};
use crate::types::{Address, Encoder, SimTime, Wei};

/// Last-buyer-wins countdown game. Each ticket pushes the deadline back
/// from where it was, not from the purchase time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimerGame {
    pub deadline: SimTime,
    pub pot: Wei,
    pub last_buyer: Option<Address>,
    pub ticket_price: Wei,
    pub extension_ticks: u64,
    pub claimed: bool,
}

impl TimerGame {
    pub fn new(deadline: SimTime, ticket_price: Wei) -> Self {
        TimerGame { deadline, pot: 0, last_buyer: None, ticket_price, extension_ticks: 30, claimed: false }
    }

    pub fn expired(&self, now: SimTime) -> bool {
        now >= self.deadline
    }

    pub fn apply(&mut self, call: &TimerCall, info: &CallInfo, env: &mut dyn Env) -> CallResult {
        let now = env.block().timestamp;
        match call {
            TimerCall::BuyTicket => {
                require(!self.expired(now), "round over")?;
                require(info.value == self.ticket_price, "wrong ticket price")?;
                self.pot += info.value;
                self.last_buyer = Some(info.caller);
                self.deadline = self.deadline.plus_ticks(self.extension_ticks);
                env.emit("ticket", format!("{}", self.deadline.ticks()));
                Ok(())
            }
            TimerCall::ClaimPot => {
                require(!self.claimed, "pot already claimed")?;
                require(self.expired(now), "timer still running")?;
                require(info.value == 0, "claim carries no value")?;
                let winner = self.last_buyer.ok_or(Revert("no tickets sold"))?;
                require(winner == info.caller, "not the last buyer")?;
                self.claimed = true;
                env.pay(DappId::Timer, winner, self.pot)?;
                env.emit("claimed", format!("{}", self.pot));
                Ok(())
            }
        }
    }

    pub fn encode_state(&self, e: &mut Encoder) {
        e.u64(self.deadline.millis()).u128(self.pot).bool(self.last_buyer.is_some());
        if let Some(a) = &self.last_buyer {
            e.address(a);
        }
        e.u128(self.ticket_price).u64(self.extension_ticks).bool(self.claimed);
    }
}
