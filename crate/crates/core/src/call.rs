//! Call payloads: a tagged union over every DApp entry point, plus plain
//! transfers and the gas-burning filler used for block stuffing.

use alloc::boxed::Box;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::types::{Address, Encoder, Gas, Hash256, Wei};

/// Flat gas cost of every DApp entry point.
pub const SIMPLE_CALL_GAS: Gas = 50_000;
/// Gas cost of a plain value transfer.
pub const TRANSFER_GAS: Gas = 21_000;

/// The DApp instances a scenario can host. Each kind has at most one instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DappId {
    Registry,
    Dex,
    Curve,
    Ens,
    Timer,
    Ico,
    Token,
    Kitty,
    CommitReveal,
    Submarine,
    Batch,
}

impl DappId {
    pub const ALL: [DappId; 11] = [
        DappId::Registry,
        DappId::Dex,
        DappId::Curve,
        DappId::Ens,
        DappId::Timer,
        DappId::Ico,
        DappId::Token,
        DappId::Kitty,
        DappId::CommitReveal,
        DappId::Submarine,
        DappId::Batch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DappId::Registry => "registry",
            DappId::Dex => "dex",
            DappId::Curve => "curve",
            DappId::Ens => "ens",
            DappId::Timer => "timer",
            DappId::Ico => "ico",
            DappId::Token => "token",
            DappId::Kitty => "kitty",
            DappId::CommitReveal => "commit_reveal",
            DappId::Submarine => "submarine",
            DappId::Batch => "batch",
        }
    }

    /// Escrow account holding the DApp's wei.
    pub fn address(self) -> Address {
        let mut label = String::from("dapp:");
        label.push_str(self.name());
        Address::from_label(&label)
    }

    fn tag(self) -> u8 {
        0x10 + self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Bid,
    Ask,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegistryCall {
    Register { name: String },
}

/// Prices are integer price units; quantities are asset units.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DexCall {
    MakeOrder { side: Side, price: u64, qty: u64 },
    CancelOrder { id: u64 },
    FillOrder { id: u64, qty: u64 },
    MarketBuy { qty: u64, limit: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveCall {
    /// Mint `units`; the attached value caps the cost and any excess is refunded.
    Buy { units: u64 },
    Sell { units: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsCall {
    /// The attached value is the (publicly visible) deposit.
    StartAuctionAndBid { name_hash: Hash256, sealed: Hash256 },
    Reveal { name_hash: Hash256, amount: Wei, salt: Hash256 },
    Finalize { name_hash: Hash256 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimerCall {
    BuyTicket,
    ClaimPot,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IcoCall {
    Deposit,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenCall {
    Approve { spender: Address, amount: u128 },
    TransferFrom { owner: Address, to: Address, amount: u128 },
    IncreaseApproval { spender: Address, amount: u128 },
    DecreaseApproval { spender: Address, amount: u128 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KittyCall {
    GiveBirth { kitty: u64 },
}

/// The hidden action behind a commitment. The beneficiary is part of the
/// committed bytes, so replaying someone else's opening cannot redirect it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CommittedAction {
    pub beneficiary: Address,
    pub call: Box<Call>,
}

impl CommittedAction {
    pub fn encode(&self, e: &mut Encoder) {
        e.address(&self.beneficiary);
        self.call.encode(e);
    }

    pub fn to_bytes(&self) -> alloc::vec::Vec<u8> {
        let mut e = Encoder::new();
        self.encode(&mut e);
        e.finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommitRevealCall {
    /// The attached value is the fidelity bond.
    Commit { digest: Hash256 },
    Reveal { action: CommittedAction, nonce: Hash256 },
}

/// Unlock payload of a submarine send; its digest determines the
/// commitment address.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubmarinePayload {
    pub beneficiary: Address,
    pub amount: Wei,
    pub call: Box<Call>,
    pub secret: Hash256,
}

impl SubmarinePayload {
    pub fn to_bytes(&self) -> alloc::vec::Vec<u8> {
        let mut e = Encoder::new();
        e.address(&self.beneficiary).u128(self.amount);
        self.call.encode(&mut e);
        e.hash(&self.secret);
        e.finish()
    }

    pub fn commitment_address(&self) -> Address {
        Address::truncate(&Hash256::of(&self.to_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubmarineCall {
    Reveal { payload: SubmarinePayload },
    Unlock { commitment: Address },
    /// Executes every unlocked submarine whose reveal window has closed.
    Finalize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchCall {
    Submit { side: Side, limit: u64, qty: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Call {
    Transfer { to: Address },
    Filler { gas: Gas },
    /// Executes `inner` only if the target DApp's state digest still equals
    /// `state_digest`.
    Chained { state_digest: Hash256, inner: Box<Call> },
    Registry(RegistryCall),
    Dex(DexCall),
    Curve(CurveCall),
    Ens(EnsCall),
    Timer(TimerCall),
    Ico(IcoCall),
    Token(TokenCall),
    Kitty(KittyCall),
    CommitReveal(CommitRevealCall),
    Submarine(SubmarineCall),
    Batch(BatchCall),
}

impl Call {
    /// DApp the call is addressed to; `None` for transfers and fillers.
    pub fn target(&self) -> Option<DappId> {
        Some(match self {
            Call::Transfer { .. } | Call::Filler { .. } => return None,
            Call::Chained { inner, .. } => return inner.target(),
            Call::Registry(_) => DappId::Registry,
            Call::Dex(_) => DappId::Dex,
            Call::Curve(_) => DappId::Curve,
            Call::Ens(_) => DappId::Ens,
            Call::Timer(_) => DappId::Timer,
            Call::Ico(_) => DappId::Ico,
            Call::Token(_) => DappId::Token,
            Call::Kitty(_) => DappId::Kitty,
            Call::CommitReveal(_) => DappId::CommitReveal,
            Call::Submarine(_) => DappId::Submarine,
            Call::Batch(_) => DappId::Batch,
        })
    }

    /// The call with any chaining wrappers removed.
    pub fn unwrapped(&self) -> &Call {
        match self {
            Call::Chained { inner, .. } => inner.unwrapped(),
            c => c,
        }
    }

    /// DApp that ultimately executes the call, looking through chaining,
    /// commit/reveal openings and submarine reveals.
    pub fn effective_target(&self) -> Option<DappId> {
        match self.unwrapped() {
            Call::CommitReveal(CommitRevealCall::Reveal { action, .. }) => action.call.effective_target(),
            Call::Submarine(SubmarineCall::Reveal { payload }) => payload.call.effective_target(),
            c => c.target(),
        }
    }

    /// The call that finally runs against a DApp, looking through chaining
    /// and through commit/reveal and submarine openings.
    pub fn effective_call(&self) -> &Call {
        match self {
            Call::Chained { inner, .. } => inner.effective_call(),
            Call::CommitReveal(CommitRevealCall::Reveal { action, .. }) => action.call.effective_call(),
            Call::Submarine(SubmarineCall::Reveal { payload }) => payload.call.effective_call(),
            c => c,
        }
    }

    pub fn gas_cost(&self) -> Gas {
        match self {
            Call::Transfer { .. } => TRANSFER_GAS,
            Call::Filler { gas } => *gas,
            Call::Chained { inner, .. } => inner.gas_cost(),
            _ => SIMPLE_CALL_GAS,
        }
    }

    /// `"<dapp>.<function>"`, used by target predicates and reports.
    pub fn function(&self) -> &'static str {
        match self {
            Call::Transfer { .. } => "transfer",
            Call::Filler { .. } => "filler",
            Call::Chained { inner, .. } => inner.function(),
            Call::Registry(RegistryCall::Register { .. }) => "registry.register",
            Call::Dex(c) => match c {
                DexCall::MakeOrder { .. } => "dex.make_order",
                DexCall::CancelOrder { .. } => "dex.cancel_order",
                DexCall::FillOrder { .. } => "dex.fill_order",
                DexCall::MarketBuy { .. } => "dex.market_buy",
            },
            Call::Curve(c) => match c {
                CurveCall::Buy { .. } => "curve.buy",
                CurveCall::Sell { .. } => "curve.sell",
            },
            Call::Ens(c) => match c {
                EnsCall::StartAuctionAndBid { .. } => "ens.start_auction_and_bid",
                EnsCall::Reveal { .. } => "ens.reveal",
                EnsCall::Finalize { .. } => "ens.finalize",
            },
            Call::Timer(TimerCall::BuyTicket) => "timer.buy_ticket",
            Call::Timer(TimerCall::ClaimPot) => "timer.claim_pot",
            Call::Ico(IcoCall::Deposit) => "ico.deposit",
            Call::Token(c) => match c {
                TokenCall::Approve { .. } => "token.approve",
                TokenCall::TransferFrom { .. } => "token.transfer_from",
                TokenCall::IncreaseApproval { .. } => "token.increase_approval",
                TokenCall::DecreaseApproval { .. } => "token.decrease_approval",
            },
            Call::Kitty(KittyCall::GiveBirth { .. }) => "kitty.give_birth",
            Call::CommitReveal(CommitRevealCall::Commit { .. }) => "commit_reveal.commit",
            Call::CommitReveal(CommitRevealCall::Reveal { .. }) => "commit_reveal.reveal",
            Call::Submarine(c) => match c {
                SubmarineCall::Reveal { .. } => "submarine.reveal",
                SubmarineCall::Unlock { .. } => "submarine.unlock",
                SubmarineCall::Finalize => "submarine.finalize",
            },
            Call::Batch(BatchCall::Submit { .. }) => "batch.submit",
        }
    }

    /// Canonical encoding: one tag byte for the family, one for the entry
    /// point, then the arguments as fixed-width big-endian integers
    /// (strings length-prefixed).
    pub fn encode(&self, e: &mut Encoder) {
        match self {
            Call::Transfer { to } => {
                e.u8(0x01).address(to);
            }
            Call::Filler { gas } => {
                e.u8(0x02).u64(*gas);
            }
            Call::Chained { state_digest, inner } => {
                e.u8(0x03).hash(state_digest);
                inner.encode(e);
            }
            Call::Registry(RegistryCall::Register { name }) => {
                e.u8(DappId::Registry.tag()).u8(0).str(name);
            }
            Call::Dex(c) => {
                e.u8(DappId::Dex.tag());
                match c {
                    DexCall::MakeOrder { side, price, qty } => {
                        e.u8(0).u8(*side as u8).u64(*price).u64(*qty);
                    }
                    DexCall::CancelOrder { id } => {
                        e.u8(1).u64(*id);
                    }
                    DexCall::FillOrder { id, qty } => {
                        e.u8(2).u64(*id).u64(*qty);
                    }
                    DexCall::MarketBuy { qty, limit } => {
                        e.u8(3).u64(*qty).u64(*limit);
                    }
                }
            }
            Call::Curve(c) => {
                e.u8(DappId::Curve.tag());
                match c {
                    CurveCall::Buy { units } => e.u8(0).u64(*units),
                    CurveCall::Sell { units } => e.u8(1).u64(*units),
                };
            }
            Call::Ens(c) => {
                e.u8(DappId::Ens.tag());
                match c {
                    EnsCall::StartAuctionAndBid { name_hash, sealed } => e.u8(0).hash(name_hash).hash(sealed),
                    EnsCall::Reveal { name_hash, amount, salt } => e.u8(1).hash(name_hash).u128(*amount).hash(salt),
                    EnsCall::Finalize { name_hash } => e.u8(2).hash(name_hash),
                };
            }
            Call::Timer(c) => {
                e.u8(DappId::Timer.tag()).u8(match c {
                    TimerCall::BuyTicket => 0,
                    TimerCall::ClaimPot => 1,
                });
            }
            Call::Ico(IcoCall::Deposit) => {
                e.u8(DappId::Ico.tag()).u8(0);
            }
            Call::Token(c) => {
                e.u8(DappId::Token.tag());
                match c {
                    TokenCall::Approve { spender, amount } => e.u8(0).address(spender).u128(*amount),
                    TokenCall::TransferFrom { owner, to, amount } => e.u8(1).address(owner).address(to).u128(*amount),
                    TokenCall::IncreaseApproval { spender, amount } => e.u8(2).address(spender).u128(*amount),
                    TokenCall::DecreaseApproval { spender, amount } => e.u8(3).address(spender).u128(*amount),
                };
            }
            Call::Kitty(KittyCall::GiveBirth { kitty }) => {
                e.u8(DappId::Kitty.tag()).u8(0).u64(*kitty);
            }
            Call::CommitReveal(c) => {
                e.u8(DappId::CommitReveal.tag());
                match c {
                    CommitRevealCall::Commit { digest } => {
                        e.u8(0).hash(digest);
                    }
                    CommitRevealCall::Reveal { action, nonce } => {
                        e.u8(1);
                        action.encode(e);
                        e.hash(nonce);
                    }
                }
            }
            Call::Submarine(c) => {
                e.u8(DappId::Submarine.tag());
                match c {
                    SubmarineCall::Reveal { payload } => {
                        e.u8(0).bytes(&payload.to_bytes());
                    }
                    SubmarineCall::Unlock { commitment } => {
                        e.u8(1).address(commitment);
                    }
                    SubmarineCall::Finalize => {
                        e.u8(2);
                    }
                }
            }
            Call::Batch(BatchCall::Submit { side, limit, qty }) => {
                e.u8(DappId::Batch.tag()).u8(0).u8(*side as u8).u64(*limit).u64(*qty);
            }
        }
    }

    pub fn to_bytes(&self) -> alloc::vec::Vec<u8> {
        let mut e = Encoder::new();
        self.encode(&mut e);
        e.finish()
    }
}

/// Digest binding a committed action to a nonce: `H(action ‖ nonce)`.
pub fn commitment_digest(action: &CommittedAction, nonce: &Hash256) -> Hash256 {
    Hash256::of_parts(&[&action.to_bytes(), &nonce.0])
}

/// Name hash used by the auction registrar.
pub fn name_hash(name: &str) -> Hash256 {
    Hash256::of_parts(&[b"name:", name.as_bytes()])
}

/// Sealed auction bid: `H(name_hash ‖ amount ‖ salt ‖ bidder)`.
pub fn sealed_bid(name_hash: &Hash256, amount: Wei, salt: &Hash256, bidder: &Address) -> Hash256 {
    let mut e = Encoder::new();
    e.hash(name_hash).u128(amount).hash(salt).address(bidder);
    e.digest()
}
