use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::call::Call;
use crate::types::{Address, Encoder, Gas, Gwei, Hash256, SimTime, Wei};

/// Who may see a transaction before it is mined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Visibility {
    Broadcast,
    /// Handed straight to one miner, never gossiped.
    PrivateTo(Address),
}

/// A signed intent. `hash` is always the digest of [`canonical_serialize`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub hash: Hash256,
    pub sender: Address,
    pub nonce: u64,
    pub gas_price: Gwei,
    pub gas_limit: Gas,
    pub value: Wei,
    pub call: Call,
    pub created_at: SimTime,
    pub visibility: Visibility,
    pub salt: u64,
}

/// Fixed field order, big-endian fixed-width integers. Visibility is routing
/// metadata and is not part of the signed bytes.
pub fn canonical_serialize(tx: &Transaction) -> Vec<u8> {
    let mut e = Encoder::new();
    e.address(&tx.sender)
        .u64(tx.nonce)
        .u64(tx.gas_price)
        .u64(tx.gas_limit)
        .u128(tx.value);
    tx.call.encode(&mut e);
    e.u64(tx.created_at.millis()).u64(tx.salt);
    e.finish()
}

impl Transaction {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        sender: Address,
        nonce: u64,
        gas_price: Gwei,
        gas_limit: Gas,
        value: Wei,
        call: Call,
        created_at: SimTime,
        visibility: Visibility,
        salt: u64,
    ) -> Self {
        let mut tx = Transaction {
            hash: Hash256::ZERO,
            sender,
            nonce,
            gas_price,
            gas_limit,
            value,
            call,
            created_at,
            visibility,
            salt,
        };
        tx.rehash();
        tx
    }

    pub fn compute_hash(&self) -> Hash256 {
        Hash256::of(&canonical_serialize(self))
    }

    pub fn rehash(&mut self) {
        self.hash = self.compute_hash();
    }

    /// Copy with a different salt (and therefore a different hash).
    pub fn with_salt(&self, salt: u64) -> Self {
        let mut tx = self.clone();
        tx.salt = salt;
        tx.rehash();
        tx
    }

    pub fn is_private(&self) -> bool {
        matches!(self.visibility, Visibility::PrivateTo(_))
    }

    /// Worst-case debit: value plus the whole gas allowance.
    pub fn max_cost(&self) -> Wei {
        self.value + crate::types::fee(self.gas_limit, self.gas_price)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::call::{RegistryCall, TimerCall};
    use alloc::string::ToString;

    fn sample(salt: u64) -> Transaction {
        Transaction::new(
            Address::from_label("alice"),
            3,
            40,
            100_000,
            7,
            Call::Registry(RegistryCall::Register { name: "x.eth".to_string() }),
            SimTime::from_ticks(10),
            Visibility::Broadcast,
            salt,
        )
    }

    #[test]
    fn serialization_is_deterministic() {
        assert_eq!(canonical_serialize(&sample(0)), canonical_serialize(&sample(0)));
        assert_eq!(sample(0).hash, sample(0).hash);
    }

    #[test]
    fn salt_changes_bytes_and_hash() {
        let (a, b) = (sample(0), sample(1));
        assert_ne!(canonical_serialize(&a), canonical_serialize(&b));
        assert_ne!(a.hash, b.hash);
        // Same digests recomputed independently with SHA-256 over the bytes.
        assert_eq!(a.hash, Hash256::of(&canonical_serialize(&a)));
        let differing_bits: u32 = a.hash.0.iter().zip(b.hash.0.iter()).map(|(x, y)| (x ^ y).count_ones()).sum();
        assert!(differing_bits >= 1);
    }

    #[test]
    fn layout_starts_with_sender_and_nonce() {
        let tx = sample(9);
        let bytes = canonical_serialize(&tx);
        assert_eq!(&bytes[..20], &tx.sender.0);
        assert_eq!(&bytes[20..28], &3u64.to_be_bytes());
        assert_eq!(&bytes[28..36], &40u64.to_be_bytes());
        assert_eq!(&bytes[bytes.len() - 8..], &9u64.to_be_bytes());
    }

    #[test]
    fn visibility_is_not_signed() {
        let a = sample(0);
        let mut b = a.clone();
        b.visibility = Visibility::PrivateTo(Address::from_label("pool"));
        b.rehash();
        assert_eq!(a.hash, b.hash);
        let c = Transaction { call: Call::Timer(TimerCall::BuyTicket), ..a.clone() };
        assert_ne!(c.compute_hash(), a.hash);
    }
}
