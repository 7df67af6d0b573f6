use alloc::collections::BTreeMap;
use alloc::format;

use super::{require, CallInfo, CallResult, Env, Revert};
use crate::call::{DappId, KittyCall};
use crate::types::{Address, Encoder, Wei};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pregnancy {
    pub birth_height: u64,
    pub reward: Wei,
    pub midwife: Option<Address>,
}

/// Pregnancies anyone may complete once due, for an escrowed reward.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KittyBirth {
    pregnancies: BTreeMap<u64, Pregnancy>,
}

impl KittyBirth {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a pregnancy; the caller must fund `reward` into the escrow.
    pub fn add_pregnancy(&mut self, kitty: u64, birth_height: u64, reward: Wei) {
        self.pregnancies.insert(kitty, Pregnancy { birth_height, reward, midwife: None });
    }

    pub fn pregnancy(&self, kitty: u64) -> Option<&Pregnancy> {
        self.pregnancies.get(&kitty)
    }

    pub fn apply(&mut self, call: &KittyCall, info: &CallInfo, env: &mut dyn Env) -> CallResult {
        let KittyCall::GiveBirth { kitty } = *call;
        let height = env.block().height;
        let p = self.pregnancies.get_mut(&kitty).ok_or(Revert("not pregnant"))?;
        require(p.midwife.is_none(), "already born")?;
        require(height >= p.birth_height, "too early")?;
        require(info.value == 0, "birth carries no value")?;
        p.midwife = Some(info.caller);
        env.pay(DappId::Kitty, info.caller, p.reward)?;
        env.emit("born", format!("{kitty}"));
        Ok(())
    }

    pub fn encode_state(&self, e: &mut Encoder) {
        e.u64(self.pregnancies.len() as u64);
        for (k, p) in &self.pregnancies {
            e.u64(*k).u64(p.birth_height).u128(p.reward).bool(p.midwife.is_some());
            if let Some(m) = &p.midwife {
                e.address(m);
            }
        }
    }
}
