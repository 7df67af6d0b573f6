use alloc::collections::BTreeMap;
use alloc::string::String;

use super::{require, CallInfo, CallResult, Env};
use crate::call::RegistryCall;
use crate::types::{Address, Encoder, Wei};

/// First-writer-wins name registry.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NameRegistry {
    pub fee: Wei,
    owners: BTreeMap<String, Address>,
}

impl NameRegistry {
    pub fn new(fee: Wei) -> Self {
        NameRegistry { fee, owners: BTreeMap::new() }
    }

    pub fn owner(&self, name: &str) -> Option<Address> {
        self.owners.get(name).copied()
    }

    pub fn apply(&mut self, call: &RegistryCall, info: &CallInfo, env: &mut dyn Env) -> CallResult {
        match call {
            RegistryCall::Register { name } => {
                require(!self.owners.contains_key(name), "name taken")?;
                require(info.value == self.fee, "wrong registration fee")?;
                self.owners.insert(name.clone(), info.caller);
                env.emit("registered", name.clone());
                Ok(())
            }
        }
    }

    pub fn encode_state(&self, e: &mut Encoder) {
        e.u128(self.fee).u64(self.owners.len() as u64);
        for (name, owner) in &self.owners {
            e.str(name).address(owner);
        }
    }
}
