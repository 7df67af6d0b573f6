//! Run results. Every field is an integer or a string so that a report
//! serializes byte-identically for a given (config, seed).

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::agents::Role;
use crate::types::{Gas, Wei};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Succeeded,
    Failed,
    NotAttempted,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Succeeded => "succeeded",
            Outcome::Failed => "failed",
            Outcome::NotAttempted => "not_attempted",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mined {
    pub success: u64,
    pub failed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentReport {
    pub name: String,
    pub role: Role,
    pub sent: u64,
    pub mined: Mined,
    /// Mined transactions by the name of the miner that included them.
    pub mined_by: BTreeMap<String, Mined>,
    pub gas_used: Gas,
    pub fees_paid: Wei,
    /// Change in wei balance over all the agent's addresses, fees included.
    pub wei_delta: i128,
    /// Change in marked-to-market value of non-wei holdings.
    pub holdings_delta: i128,
    /// `wei_delta + holdings_delta`.
    pub net_profit: i128,
    /// Net profit before fees.
    pub gross_profit: i128,
    pub goal_met: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinerReport {
    pub name: String,
    pub power_ppm: u64,
    pub blocks: u64,
    /// Mined calls to the scenario's DApp that succeeded / reverted.
    pub target_success: u64,
    pub target_failed: u64,
    pub fee_revenue: Wei,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRow {
    pub number: u64,
    pub miner: String,
    pub txs: u64,
    pub gas_used: Gas,
    pub gas_limit: Gas,
    pub target_success: u64,
    pub target_failed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BondReport {
    pub posted: Wei,
    pub returned: Wei,
    pub slashed: Wei,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    /// SHA-256 of the canonical config bytes, hex.
    pub config_digest: String,
    pub ordering: String,
    pub mitigation: String,
    pub outcome: Outcome,
    pub victim_succeeded: Option<bool>,
    pub attacker_net_profit: i128,
    pub attacker_gross_profit: i128,
    pub agents: Vec<AgentReport>,
    pub miners: Vec<MinerReport>,
    pub blocks: Vec<BlockRow>,
    pub fee_total: Wei,
    pub burned: Wei,
    /// Wei change of every account outside agents, miners and the burn
    /// sink (DApp escrows mostly).
    pub other_delta: i128,
    pub bonds: Option<BondReport>,
    pub extras: BTreeMap<String, i128>,
}

impl Report {
    /// Sum of all wei movements; zero in a closed economy.
    pub fn zero_sum_residual(&self) -> i128 {
        self.agents.iter().map(|a| a.wei_delta).sum::<i128>() + self.other_delta + self.fee_total as i128 + self.burned as i128
    }

    pub fn agent(&self, name: &str) -> Option<&AgentReport> {
        self.agents.iter().find(|a| a.name == name)
    }

    pub fn miner(&self, name: &str) -> Option<&MinerReport> {
        self.miners.iter().find(|m| m.name == name)
    }

    pub fn attackers(&self) -> impl Iterator<Item = &AgentReport> {
        self.agents.iter().filter(|a| a.role == Role::Attacker)
    }
}
