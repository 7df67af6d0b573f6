use alloc::collections::BTreeMap;
use alloc::format;

use super::Windows;
use crate::call::{commitment_digest, CommitRevealCall, DappId};
use crate::dapps::{require, CallInfo, CallResult, Env, Revert};
use crate::types::{Address, Encoder, Hash256, Wei};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commitment {
    pub digest: Hash256,
    pub committer: Address,
    pub bond: Wei,
    pub height: u64,
    pub revealed: bool,
    pub slashed: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BondStats {
    pub posted: Wei,
    pub returned: Wei,
    pub slashed: Wei,
}

/// Commit/reveal front end for one wrapped DApp. Revealed actions run in
/// reveal confirmation order; bonds not redeemed by the end of the reveal
/// window are burned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitReveal {
    pub target: DappId,
    pub windows: Windows,
    pub min_bond: Wei,
    commitments: BTreeMap<(Address, Hash256), Commitment>,
    stats: BondStats,
    reveals: u64,
}

impl CommitReveal {
    pub fn new(target: DappId, windows: Windows, min_bond: Wei) -> Self {
        CommitReveal { target, windows, min_bond, commitments: BTreeMap::new(), stats: BondStats::default(), reveals: 0 }
    }

    pub fn stats(&self) -> BondStats {
        self.stats
    }

    pub fn commitment(&self, committer: &Address, digest: &Hash256) -> Option<&Commitment> {
        self.commitments.get(&(*committer, *digest))
    }

    pub fn commitments(&self) -> impl Iterator<Item = &Commitment> {
        self.commitments.values()
    }

    /// Bonds still held: posted and neither returned nor slashed.
    pub fn outstanding(&self) -> Wei {
        self.stats.posted - self.stats.returned - self.stats.slashed
    }

    pub fn apply(&mut self, call: &CommitRevealCall, info: &CallInfo, env: &mut dyn Env) -> CallResult {
        let height = env.block().height;
        match call {
            CommitRevealCall::Commit { digest } => {
                require(self.windows.in_commit(height), "commit window closed")?;
                require(info.value >= self.min_bond, "bond below minimum")?;
                let key = (info.caller, *digest);
                require(!self.commitments.contains_key(&key), "duplicate commitment")?;
                self.commitments.insert(
                    key,
                    Commitment { digest: *digest, committer: info.caller, bond: info.value, height, revealed: false, slashed: false },
                );
                self.stats.posted += info.value;
                env.emit("committed", format!("{}", info.value));
                Ok(())
            }
            CommitRevealCall::Reveal { action, nonce } => {
                require(self.windows.in_reveal(height), "reveal window closed")?;
                let digest = commitment_digest(action, nonce);
                let c = self.commitments.get_mut(&(info.caller, digest)).ok_or(Revert("no matching commitment"))?;
                require(!c.revealed, "already revealed")?;
                require(c.height < height, "commit not yet confirmed")?;
                require(action.call.target() == Some(self.target), "action targets another dapp")?;
                c.revealed = true;
                let bond = c.bond;
                self.stats.returned += bond;
                self.reveals += 1;
                // The action's own failure does not forfeit the bond.
                let inner = env.invoke(DappId::CommitReveal, self.target, action.beneficiary, info.value, &action.call);
                let refund = if inner.is_ok() { bond } else { bond + info.value };
                env.pay(DappId::CommitReveal, info.caller, refund)?;
                match inner {
                    Ok(()) => env.emit("revealed", format!("{}", self.reveals)),
                    Err(Revert(why)) => env.emit("action_reverted", why.into()),
                }
                Ok(())
            }
        }
    }

    /// Slash every bond left unrevealed once the reveal window has passed.
    pub fn end_block(&mut self, env: &mut dyn Env) -> CallResult {
        if env.block().height + 1 < self.windows.reveal_end() {
            return Ok(());
        }
        let mut burned = 0;
        for c in self.commitments.values_mut().filter(|c| !c.revealed && !c.slashed) {
            c.slashed = true;
            burned += c.bond;
        }
        if burned > 0 {
            self.stats.slashed += burned;
            env.burn(DappId::CommitReveal, burned)?;
            env.emit("slashed", format!("{burned}"));
        }
        Ok(())
    }

    pub fn encode_state(&self, e: &mut Encoder) {
        e.u8(self.target as u8).u64(self.windows.open).u64(self.windows.commit_blocks).u64(self.windows.reveal_blocks);
        e.u128(self.min_bond).u64(self.commitments.len() as u64);
        for c in self.commitments.values() {
            e.hash(&c.digest).address(&c.committer).u128(c.bond).u64(c.height).bool(c.revealed).bool(c.slashed);
        }
        e.u128(self.stats.posted).u128(self.stats.returned).u128(self.stats.slashed).u64(self.reveals);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::call::{Call, CommittedAction, RegistryCall};
    use crate::dapps::testing::MockEnv;
    use alloc::boxed::Box;
    use alloc::string::ToString;

    fn who(s: &str) -> Address {
        Address::from_label(s)
    }

    fn action(name: &str, beneficiary: &str) -> CommittedAction {
        CommittedAction {
            beneficiary: who(beneficiary),
            call: Box::new(Call::Registry(RegistryCall::Register { name: name.to_string() })),
        }
    }

    fn send(cr: &mut CommitReveal, env: &mut MockEnv, from: &str, value: Wei, call: CommitRevealCall) -> CallResult {
        env.credit(who(from), value);
        env.deposit(who(from), DappId::CommitReveal, value);
        cr.apply(&call, &CallInfo { caller: who(from), value, gas_price: 1 }, env)
    }

    fn fresh() -> CommitReveal {
        CommitReveal::new(DappId::Registry, Windows::default(), 100)
    }

    #[test]
    fn commit_checks_bond_and_window() {
        let mut cr = fresh();
        let mut env = MockEnv::new(1);
        let digest = Hash256::of(b"d");
        assert_eq!(send(&mut cr, &mut env, "a", 0, CommitRevealCall::Commit { digest }), Err(Revert("bond below minimum")));
        send(&mut cr, &mut env, "a", 100, CommitRevealCall::Commit { digest }).unwrap();
        assert_eq!(env.bal(DappId::CommitReveal.address()), 100);
        env.block.height = 11;
        assert_eq!(send(&mut cr, &mut env, "a", 100, CommitRevealCall::Commit { digest }), Err(Revert("commit window closed")));
    }

    #[test]
    fn wrong_nonce_finds_no_commitment() {
        let mut cr = fresh();
        let mut env = MockEnv::new(1);
        let a = action("x.eth", "alice");
        let digest = commitment_digest(&a, &Hash256::of(b"n1"));
        send(&mut cr, &mut env, "alice", 100, CommitRevealCall::Commit { digest }).unwrap();
        env.block.height = 11;
        let bad = CommitRevealCall::Reveal { action: a, nonce: Hash256::of(b"n2") };
        assert_eq!(send(&mut cr, &mut env, "alice", 0, bad), Err(Revert("no matching commitment")));
    }

    #[test]
    fn unrevealed_bonds_are_slashed_once() {
        let mut cr = fresh();
        let mut env = MockEnv::new(1);
        for i in 0..3u8 {
            send(&mut cr, &mut env, "s", 100, CommitRevealCall::Commit { digest: Hash256::of(&[i]) }).unwrap();
        }
        env.block.height = 19;
        cr.end_block(&mut env).unwrap();
        assert_eq!(env.burned, 0);
        env.block.height = 20;
        cr.end_block(&mut env).unwrap();
        env.block.height = 21;
        cr.end_block(&mut env).unwrap();
        assert_eq!(env.burned, 300);
        let s = cr.stats();
        assert_eq!(s.posted, s.returned + s.slashed);
    }
}
