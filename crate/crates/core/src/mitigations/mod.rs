//! Countermeasures that wrap or replace a DApp: commit/reveal with fidelity
//! bonds, submarine sends, and a uniform-price batch auction. Sequencing
//! countermeasures live in [`crate::ordering`].

pub mod batch;
pub mod commit_reveal;
pub mod observer;
pub mod submarine;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mitigation {
    None,
    CommitReveal,
    Submarine,
    BatchAuction,
}

impl Mitigation {
    pub fn name(self) -> &'static str {
        match self {
            Mitigation::None => "none",
            Mitigation::CommitReveal => "commit_reveal",
            Mitigation::Submarine => "submarine",
            Mitigation::BatchAuction => "batch_auction",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Mitigation::None, Mitigation::CommitReveal, Mitigation::Submarine, Mitigation::BatchAuction]
            .into_iter()
            .find(|m| m.name() == s)
    }
}

/// Block-height schedule shared by the two-phase protocols: commits in
/// `[open, open+commit)`, reveals in `[open+commit, open+commit+reveal)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Windows {
    pub open: u64,
    pub commit_blocks: u64,
    pub reveal_blocks: u64,
}

impl Default for Windows {
    fn default() -> Self {
        Windows { open: 1, commit_blocks: 10, reveal_blocks: 10 }
    }
}

impl Windows {
    pub fn reveal_start(&self) -> u64 {
        self.open + self.commit_blocks
    }

    pub fn reveal_end(&self) -> u64 {
        self.reveal_start() + self.reveal_blocks
    }

    pub fn in_commit(&self, h: u64) -> bool {
        (self.open..self.reveal_start()).contains(&h)
    }

    pub fn in_reveal(&self, h: u64) -> bool {
        (self.reveal_start()..self.reveal_end()).contains(&h)
    }
}
