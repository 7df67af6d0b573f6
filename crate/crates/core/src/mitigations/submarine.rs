use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::Windows;
use crate::call::{DappId, SubmarineCall, SubmarinePayload};
use crate::dapps::{require, CallInfo, CallResult, Env, Revert};
use crate::types::{Address, Encoder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SubPhase {
    Committed,
    Revealed,
    Unlocked,
    Finalized,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Submarine {
    pub payload: SubmarinePayload,
    pub funded_height: u64,
    pub reveal_seq: u64,
    pub phase: SubPhase,
    /// Whether the wrapped call succeeded at finalization.
    pub delivered: bool,
}

/// Submarine-send vault. Funding is a plain transfer to an address derived
/// from the payload, so it leaves no trace here until the reveal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmarineVault {
    pub target: DappId,
    pub windows: Windows,
    subs: BTreeMap<Address, Submarine>,
    next_seq: u64,
}

impl SubmarineVault {
    pub fn new(target: DappId, windows: Windows) -> Self {
        SubmarineVault { target, windows, subs: BTreeMap::new(), next_seq: 0 }
    }

    pub fn get(&self, commitment: &Address) -> Option<&Submarine> {
        self.subs.get(commitment)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Address, &Submarine)> {
        self.subs.iter()
    }

    /// Phase as seen from the outside; unknown addresses are still committed.
    pub fn phase(&self, commitment: &Address) -> SubPhase {
        self.subs.get(commitment).map_or(SubPhase::Committed, |s| s.phase)
    }

    pub fn apply(&mut self, call: &SubmarineCall, info: &CallInfo, env: &mut dyn Env) -> CallResult {
        let height = env.block().height;
        require(info.value == 0, "submarine calls carry no value")?;
        match call {
            SubmarineCall::Reveal { payload } => {
                require(self.windows.in_reveal(height), "reveal window closed")?;
                require(payload.call.target() == Some(self.target), "payload targets another dapp")?;
                let addr = payload.commitment_address();
                require(!self.subs.contains_key(&addr), "already revealed")?;
                let funded = env.first_funded(addr).ok_or(Revert("commitment never funded"))?;
                require(self.windows.in_commit(funded), "funded outside commit window")?;
                require(env.balance_of(addr) >= payload.amount, "under-collateralized")?;
                let seq = self.next_seq;
                self.next_seq += 1;
                self.subs.insert(
                    addr,
                    Submarine { payload: payload.clone(), funded_height: funded, reveal_seq: seq, phase: SubPhase::Revealed, delivered: false },
                );
                env.emit("sub_revealed", format!("{addr}"));
                Ok(())
            }
            SubmarineCall::Unlock { commitment } => {
                require(height < self.windows.reveal_end(), "unlock window closed")?;
                let s = self.subs.get_mut(commitment).ok_or(Revert("not revealed"))?;
                require(s.phase == SubPhase::Revealed, "not revealed")?;
                s.phase = SubPhase::Unlocked;
                let amount = s.payload.amount;
                env.pull(*commitment, DappId::Submarine, amount)?;
                env.emit("sub_unlocked", format!("{commitment}"));
                Ok(())
            }
            SubmarineCall::Finalize => {
                require(height >= self.windows.reveal_end(), "reveal window still open")?;
                let mut ready: Vec<(u64, u64, Address)> = self
                    .subs
                    .iter()
                    .filter(|(_, s)| s.phase == SubPhase::Unlocked)
                    .map(|(a, s)| (s.funded_height, s.reveal_seq, *a))
                    .collect();
                require(!ready.is_empty(), "nothing to finalize")?;
                ready.sort();
                for (_, _, addr) in ready {
                    let s = self.subs.get_mut(&addr).expect("listed above");
                    s.phase = SubPhase::Finalized;
                    let p = &s.payload;
                    let r = env.invoke(DappId::Submarine, self.target, p.beneficiary, p.amount, &p.call);
                    s.delivered = r.is_ok();
                    if r.is_err() {
                        env.pay(DappId::Submarine, p.beneficiary, p.amount)?;
                    }
                }
                env.emit("sub_finalized", format!("{height}"));
                Ok(())
            }
        }
    }

    pub fn encode_state(&self, e: &mut Encoder) {
        e.u8(self.target as u8).u64(self.windows.open).u64(self.windows.commit_blocks).u64(self.windows.reveal_blocks);
        e.u64(self.subs.len() as u64);
        for (a, s) in &self.subs {
            e.address(a).bytes(&s.payload.to_bytes()).u64(s.funded_height).u64(s.reveal_seq).u8(s.phase as u8).bool(s.delivered);
        }
        e.u64(self.next_seq);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::call::{Call, KittyCall};
    use crate::dapps::testing::MockEnv;
    use crate::types::Hash256;
    use alloc::boxed::Box;

    fn payload() -> SubmarinePayload {
        SubmarinePayload {
            beneficiary: Address::from_label("alice"),
            amount: 10,
            call: Box::new(Call::Kitty(KittyCall::GiveBirth { kitty: 1 })),
            secret: Hash256::of(b"s"),
        }
    }

    fn run(v: &mut SubmarineVault, env: &mut MockEnv, call: SubmarineCall) -> CallResult {
        v.apply(&call, &CallInfo { caller: Address::from_label("alice"), value: 0, gas_price: 1 }, env)
    }

    fn funded_env(height: u64) -> MockEnv {
        let mut env = MockEnv::new(height);
        let addr = payload().commitment_address();
        env.credit(addr, 10);
        env.funded.insert(addr, 2);
        env
    }

    #[test]
    fn steps_must_come_in_order() {
        let mut v = SubmarineVault::new(DappId::Kitty, Windows::default());
        let mut env = funded_env(11);
        let commitment = payload().commitment_address();
        assert_eq!(run(&mut v, &mut env, SubmarineCall::Unlock { commitment }), Err(Revert("not revealed")));
        run(&mut v, &mut env, SubmarineCall::Reveal { payload: payload() }).unwrap();
        assert_eq!(v.phase(&commitment), SubPhase::Revealed);
        assert_eq!(run(&mut v, &mut env, SubmarineCall::Finalize), Err(Revert("reveal window still open")));
        run(&mut v, &mut env, SubmarineCall::Unlock { commitment }).unwrap();
        assert_eq!(env.bal(DappId::Submarine.address()), 10);
        assert_eq!(env.bal(commitment), 0);
    }

    #[test]
    fn reveal_checks_derivation_and_collateral() {
        let mut v = SubmarineVault::new(DappId::Kitty, Windows::default());
        let mut env = funded_env(11);
        let mut forged = payload();
        forged.amount = 11;
        assert_eq!(run(&mut v, &mut env, SubmarineCall::Reveal { payload: forged }), Err(Revert("commitment never funded")));
        let mut late = funded_env(11);
        late.funded.insert(payload().commitment_address(), 11);
        assert_eq!(run(&mut v, &mut late, SubmarineCall::Reveal { payload: payload() }), Err(Revert("funded outside commit window")));
    }

    #[test]
    fn failed_delivery_refunds_the_beneficiary() {
        // The mock env cannot run nested calls, so the wrapped call fails.
        let mut v = SubmarineVault::new(DappId::Kitty, Windows::default());
        let mut env = funded_env(11);
        let commitment = payload().commitment_address();
        run(&mut v, &mut env, SubmarineCall::Reveal { payload: payload() }).unwrap();
        run(&mut v, &mut env, SubmarineCall::Unlock { commitment }).unwrap();
        env.block.height = 21;
        run(&mut v, &mut env, SubmarineCall::Finalize).unwrap();
        assert_eq!(env.bal(Address::from_label("alice")), 10);
        assert_eq!(v.phase(&commitment), SubPhase::Finalized);
        assert_eq!(run(&mut v, &mut env, SubmarineCall::Finalize), Err(Revert("nothing to finalize")));
    }
}
