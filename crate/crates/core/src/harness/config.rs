//! Declarative scenario description and its validation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::call::{Call, DappId, Side};
use crate::chain::{MinerBehavior, Propagation, DEFAULT_BLOCK_GAS_LIMIT};
use crate::mitigations::{Mitigation, Windows};
use crate::ordering::OrderingPolicy;
use crate::types::{Address, Gas, Gwei, Wei};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    pub dapp: DappConfig,
    pub ordering: OrderingPolicy,
    #[serde(default = "no_mitigation")]
    pub mitigation: Mitigation,
    #[serde(default)]
    pub mitigation_params: MitigationParams,
    pub miners: Vec<MinerConfig>,
    pub agents: Vec<AgentConfig>,
    pub run_blocks: u64,
    #[serde(default = "default_gas_limit")]
    pub block_gas_limit: Gas,
    #[serde(default)]
    pub propagation: Propagation,
    #[serde(default)]
    pub valuation: Valuation,
    /// Seed used when none is given on the command line.
    #[serde(default)]
    pub seed: u64,
}

fn no_mitigation() -> Mitigation {
    Mitigation::None
}

fn default_gas_limit() -> Gas {
    DEFAULT_BLOCK_GAS_LIMIT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitigationParams {
    #[serde(default)]
    pub windows: Windows,
    #[serde(default)]
    pub min_bond: Wei,
    #[serde(default = "default_batch_interval")]
    pub batch_interval: u64,
}

fn default_batch_interval() -> u64 {
    2
}

impl Default for MitigationParams {
    fn default() -> Self {
        MitigationParams { windows: Windows::default(), min_bond: 0, batch_interval: default_batch_interval() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Holding {
    pub owner: String,
    pub qty: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestingOrder {
    pub owner: String,
    pub side: Side,
    pub price: u64,
    pub qty: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PregnancyConfig {
    pub kitty: u64,
    pub birth_height: u64,
    pub reward: Wei,
}

/// The primary DApp and its genesis state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DappConfig {
    Registry {
        fee: Wei,
    },
    Dex {
        unit_wei: Wei,
        #[serde(default)]
        units: Vec<Holding>,
        #[serde(default)]
        resting: Vec<RestingOrder>,
    },
    Curve {
        p0: Wei,
        m: Wei,
    },
    Ens {
        bidding_blocks: u64,
        reveal_blocks: u64,
    },
    Timer {
        deadline_ticks: u64,
        ticket_price: Wei,
        #[serde(default)]
        initial_pot: Wei,
        #[serde(default)]
        last_buyer: Option<String>,
    },
    Ico {
        first_cap: Wei,
        cap_count: u32,
        gas_price_cap: Gwei,
    },
    Token {
        #[serde(default)]
        balances: Vec<Holding>,
    },
    Kitty {
        pregnancies: Vec<PregnancyConfig>,
    },
}

impl DappConfig {
    pub fn id(&self) -> DappId {
        match self {
            DappConfig::Registry { .. } => DappId::Registry,
            DappConfig::Dex { .. } => DappId::Dex,
            DappConfig::Curve { .. } => DappId::Curve,
            DappConfig::Ens { .. } => DappId::Ens,
            DappConfig::Timer { .. } => DappId::Timer,
            DappConfig::Ico { .. } => DappId::Ico,
            DappConfig::Token { .. } => DappId::Token,
            DappConfig::Kitty { .. } => DappId::Kitty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinerConfig {
    pub name: String,
    pub power: f64,
    #[serde(default)]
    pub behavior: MinerBehavior,
    /// Agent that runs this miner; its addresses count as the miner's own.
    #[serde(default)]
    pub operator: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub name: String,
    #[serde(default)]
    pub balance: Wei,
    pub kind: AgentKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum When {
    /// At this tick.
    Tick(u64),
    /// As soon as the next block to be mined has this height.
    Height(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    pub when: When,
    pub call: Call,
    #[serde(default)]
    pub value: Wei,
    pub gas_price: Gwei,
    #[serde(default)]
    pub gas_limit: Option<Gas>,
}

/// What a victim wants; checked on the final state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Goal {
    /// Owns `name` in the registry.
    OwnsName { name: String },
    /// Won the auction for `name`.
    WinsAuction { name: String },
    /// Its DEX order `id` ended cancelled.
    OrderCancelled { id: u64 },
    /// Delivered kitty `kitty` and took the reward.
    Midwife { kitty: u64 },
    /// Claimed the timer pot.
    ClaimedPot,
    /// Holds at least `units` more than at genesis, having spent at most
    /// `max_cost` wei on them.
    BoughtUnits { units: u64, max_cost: Wei },
    /// `spender` moved at most `amount` of its tokens.
    SpendAtMost { spender: String, amount: u128 },
    /// Holds at least `min` sale tokens.
    SaleTokens { min: Wei },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisplaceMode {
    /// Resend the victim's call as our own.
    Copy,
    /// Answer a cancellation by filling the order being cancelled.
    FillCancelled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Strategy {
    Displace {
        /// Function names (as in `Call::function`) worth front-running.
        watch: Vec<String>,
        mode: DisplaceMode,
        /// Salt variants tried to sort before the victim under hash ordering.
        #[serde(default)]
        grind_tries: u64,
    },
    /// Sandwich a market buy between a buy and a sell.
    Insert,
    /// Buy a ticket, then keep every block full of filler until the pot is
    /// ours.
    Suppress {
        filler_gas: Gas,
        gas_price: Gwei,
    },
    /// Mine our own sale deposits privately, ahead of everyone.
    MinerBulk {
        miner: String,
        extra_addresses: u32,
        deposit: Wei,
        gas_price: Gwei,
    },
    /// Copy the leaked bid, then reveal ahead of the victim.
    EnsRace,
    /// Commit to several candidate names, reveal only the one the victim
    /// turns out to want.
    Spray {
        candidates: Vec<String>,
        commitments: u32,
    },
    /// Spend the old allowance before a pending re-approval, then the new.
    AllowanceDrain {
        owner: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AgentKind {
    Victim {
        steps: Vec<Step>,
        goal: Goal,
        /// If set, registry names in `steps` are replaced by one drawn from
        /// this list.
        #[serde(default)]
        choose_name_from: Vec<String>,
    },
    /// Holds genesis balances and never sends anything.
    Passive,
    /// Keeps buying timer tickets whenever someone else is last, and claims
    /// the pot when it can.
    TimerPlayer {
        gas_price: Gwei,
    },
    /// A stream of sale deposits from fresh addresses; some priced over the
    /// sale's gas-price cap.
    IcoCrowd {
        valid_per_block: u32,
        invalid_per_block: u32,
        amount: Wei,
        valid_gas_price: (Gwei, Gwei),
        invalid_gas_price: (Gwei, Gwei),
        gas_limit: Gas,
    },
    Attacker {
        strategy: Strategy,
        #[serde(default = "one")]
        gas_premium: Gwei,
        #[serde(default = "one")]
        latency_ticks: u64,
        #[serde(default)]
        budget: Option<Wei>,
    },
}

fn one() -> u64 {
    1
}

impl AgentKind {
    pub fn is_attacker(&self) -> bool {
        matches!(self, AgentKind::Attacker { .. })
    }
}

/// Marks end-of-run holdings to wei.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Valuation {
    #[serde(default)]
    pub names: BTreeMap<String, Wei>,
    /// Per DEX, batch or curve unit.
    #[serde(default)]
    pub unit_wei: Wei,
    /// Sale tokens, in millionths of a wei per token.
    #[serde(default = "par")]
    pub ico_token_ppm: u64,
    #[serde(default)]
    pub token_unit_wei: Wei,
}

fn par() -> u64 {
    1_000_000
}

impl Default for Valuation {
    fn default() -> Self {
        Valuation { names: BTreeMap::new(), unit_wei: 0, ico_token_ppm: par(), token_unit_wei: 0 }
    }
}

pub fn agent_address(name: &str) -> Address {
    Address::from_label(&format!("agent:{name}"))
}

pub fn miner_address(name: &str) -> Address {
    Address::from_label(&format!("miner:{name}"))
}

/// Invalid configuration, with the path of the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

fn err(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError { path: path.into(), message: message.into() }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(err("schema_version", format!("expected {SCHEMA_VERSION}, found {}", self.schema_version)));
        }
        if self.run_blocks == 0 {
            return Err(err("run_blocks", "must be at least 1"));
        }
        if self.block_gas_limit == 0 {
            return Err(err("block_gas_limit", "must be positive"));
        }
        if self.miners.is_empty() {
            return Err(err("miners", "at least one miner is required"));
        }
        let mut total = 0.0;
        let mut names = BTreeSet::new();
        for (i, m) in self.miners.iter().enumerate() {
            if !(m.power >= 0.0 && m.power.is_finite()) {
                return Err(err(format!("miners[{i}].power"), "must be a non-negative number"));
            }
            total += m.power;
            if !names.insert(m.name.clone()) {
                return Err(err(format!("miners[{i}].name"), format!("duplicate miner `{}`", m.name)));
            }
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(err("miners", format!("hash powers sum to {total}, not 1")));
        }
        let mut agents = BTreeSet::new();
        for (i, a) in self.agents.iter().enumerate() {
            if !agents.insert(a.name.as_str()) {
                return Err(err(format!("agents[{i}].name"), format!("duplicate agent `{}`", a.name)));
            }
        }
        let agent = |path: String, name: &str| -> Result<(), ConfigError> {
            if agents.contains(name) {
                Ok(())
            } else {
                Err(err(path, format!("unknown agent `{name}`")))
            }
        };
        for (i, m) in self.miners.iter().enumerate() {
            if let Some(op) = &m.operator {
                agent(format!("miners[{i}].operator"), op)?;
            }
        }
        match &self.dapp {
            DappConfig::Dex { units, resting, unit_wei } => {
                if *unit_wei == 0 {
                    return Err(err("dapp.unit_wei", "must be positive"));
                }
                for (i, h) in units.iter().enumerate() {
                    agent(format!("dapp.units[{i}].owner"), &h.owner)?;
                }
                for (i, o) in resting.iter().enumerate() {
                    agent(format!("dapp.resting[{i}].owner"), &o.owner)?;
                    if o.price == 0 || o.qty == 0 {
                        return Err(err(format!("dapp.resting[{i}]"), "price and qty must be positive"));
                    }
                }
            }
            DappConfig::Timer { last_buyer: Some(b), .. } => agent("dapp.last_buyer".into(), b)?,
            DappConfig::Token { balances } => {
                for (i, h) in balances.iter().enumerate() {
                    agent(format!("dapp.balances[{i}].owner"), &h.owner)?;
                }
            }
            DappConfig::Ico { cap_count: 0, .. } => return Err(err("dapp.cap_count", "must be at least 1")),
            DappConfig::Ens { bidding_blocks: 0, .. } => return Err(err("dapp.bidding_blocks", "must be at least 1")),
            _ => {}
        }
        let target = self.dapp.id();
        match self.mitigation {
            Mitigation::BatchAuction if target != DappId::Dex => {
                return Err(err("mitigation", "batch_auction replaces an order-book dapp; use dapp.kind = \"dex\""));
            }
            Mitigation::CommitReveal | Mitigation::Submarine => {
                if !matches!(target, DappId::Registry | DappId::Kitty | DappId::Curve | DappId::Timer) {
                    return Err(err("mitigation", format!("{} cannot wrap the {} dapp", self.mitigation.name(), target.name())));
                }
                let w = &self.mitigation_params.windows;
                if w.commit_blocks == 0 || w.reveal_blocks == 0 {
                    return Err(err("mitigation_params.windows", "commit and reveal windows must be at least one block"));
                }
            }
            _ => {}
        }
        for (i, a) in self.agents.iter().enumerate() {
            let path = |f: &str| format!("agents[{i}].kind.{f}");
            match &a.kind {
                AgentKind::Victim { steps, goal, .. } => {
                    if steps.is_empty() {
                        return Err(err(path("steps"), "a victim needs at least one step"));
                    }
                    if let Goal::SpendAtMost { spender, .. } = goal {
                        agent(path("goal.spender"), spender)?;
                    }
                }
                AgentKind::IcoCrowd { valid_gas_price, invalid_gas_price, .. } => {
                    if valid_gas_price.0 > valid_gas_price.1 || invalid_gas_price.0 > invalid_gas_price.1 {
                        return Err(err(path("valid_gas_price"), "ranges must be (low, high)"));
                    }
                }
                AgentKind::Attacker { strategy, .. } => match strategy {
                    Strategy::MinerBulk { miner, .. } => {
                        if !self.miners.iter().any(|m| &m.name == miner) {
                            return Err(err(path("strategy.miner"), format!("unknown miner `{miner}`")));
                        }
                    }
                    Strategy::AllowanceDrain { owner } => agent(path("strategy.owner"), owner)?,
                    Strategy::Spray { candidates, commitments } => {
                        if *commitments as usize > candidates.len() {
                            return Err(err(path("strategy.commitments"), "more commitments than candidates"));
                        }
                    }
                    Strategy::Suppress { filler_gas, .. } if *filler_gas == 0 || *filler_gas > self.block_gas_limit => {
                        return Err(err(path("strategy.filler_gas"), "must be in (0, block_gas_limit]"));
                    }
                    _ => {}
                },
                AgentKind::TimerPlayer { .. } | AgentKind::Passive => {}
            }
        }
        Ok(())
    }

    /// The same scenario with every attacker made passive (the control
    /// run). Attackers keep their balances so references still resolve.
    pub fn without_attackers(&self) -> ScenarioConfig {
        let mut c = self.clone();
        let attackers: BTreeSet<String> = c.agents.iter().filter(|a| a.kind.is_attacker()).map(|a| a.name.clone()).collect();
        for a in &mut c.agents {
            if a.kind.is_attacker() {
                a.kind = AgentKind::Passive;
            }
        }
        for m in &mut c.miners {
            if m.operator.as_ref().is_some_and(|o| attackers.contains(o)) {
                m.operator = None;
                m.behavior = MinerBehavior::Honest;
            }
        }
        c.name = format!("{}/control", c.name);
        c
    }

    /// Canonical bytes of the configuration, for the report digest.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        postcard::to_allocvec(self).expect("config serializes")
    }

    pub fn attacker_names(&self) -> Vec<String> {
        self.agents.iter().filter(|a| a.kind.is_attacker()).map(|a| a.name.to_string()).collect()
    }
}
