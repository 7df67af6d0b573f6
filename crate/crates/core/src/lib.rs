//! Deterministic simulator of a gas-priced blockchain mempool, the
//! front-running attacks it enables (displacement, insertion, suppression)
//! and the countermeasures proposed against them.
//!
//! The crate is `no_std` + `alloc`; file formats, the CLI and parallel
//! sweeps live in the `frontrun-sim` companion crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod adversary;
pub mod call;
pub mod chain;
pub mod dapps;
pub mod harness;
pub mod mitigations;
pub mod ordering;
pub mod rng;
pub mod types;

pub use call::{Call, DappId};
pub use chain::{Block, Ledger, Receipt, Status, Transaction, Visibility};
pub use ordering::OrderingPolicy;
pub use types::{Address, Hash256, SimTime, Wei};
