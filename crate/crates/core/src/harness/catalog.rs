//! Built-in scenarios: one per attack case study, plus variants under each
//! applicable sequencing rule or countermeasure.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::config::*;
use crate::adversary::suppression_cost;
use crate::call::{name_hash, sealed_bid, Call, DappId, DexCall, CurveCall, EnsCall, KittyCall, RegistryCall, Side, TokenCall};
use crate::chain::{MinerBehavior, Propagation, DEFAULT_BLOCK_GAS_LIMIT};
use crate::dapps::BondingCurveDealer;
use crate::mitigations::Mitigation;
use crate::ordering::OrderingPolicy;
use crate::types::{ether, finney, Hash256, Wei};

/// Wei per DEX price unit.
pub const UNIT: Wei = finney(1);

pub const NAME: &str = "x.eth";
pub const REGISTRY_FEE: Wei = finney(10);
pub const NAME_VALUE: Wei = ether(1);

/// Every built-in scenario: (name, one-line description).
pub const BUILTINS: &[(&str, &str)] = &[
    ("namereg-displacement", "copy a pending name registration at a higher gas price"),
    ("namereg-displacement/fifo", "same, sequenced first-come first-served"),
    ("namereg-displacement/ctor", "same, sequenced by transaction hash"),
    ("namereg-displacement/ctor-grind", "same, attacker grinds its hash up to 64 times"),
    ("namereg-displacement/chained", "same, honest calls pinned to observed state"),
    ("namereg-displacement/commit_reveal", "same, behind commit/reveal"),
    ("namereg-displacement/submarine", "same, behind submarine sends"),
    ("kitty-givebirth", "copy a pending birth call to steal the midwife reward"),
    ("dex-cancel-grief", "fill an order whose cancellation is pending"),
    ("dex-sandwich", "buy the best ask and re-offer it at the victim's limit"),
    ("dex-sandwich/batch_auction", "same, against a uniform-price call market"),
    ("curve-sandwich", "buy ahead of and sell behind a bonding-curve purchase"),
    ("curve-sandwich/chained", "same, victim pinned to observed state"),
    ("fomo3d-suppression", "buy the last ticket, then stuff blocks until the timer runs out"),
    ("fomo3d-suppression/budget6", "same, with budget for only six blocks of stuffing"),
    ("ens-reveal-race", "match a leaked deposit and reveal first to win the tie"),
    ("ico-f2pool", "miner mines its own private deposits first, censoring valid rivals"),
    ("allowance-race", "spend the old allowance before a re-approval lands"),
    ("allowance-race/decrease", "same, owner lowers the allowance with a decrease"),
    ("namereg-spray", "commit to every candidate name, reveal the victim's"),
];

/// The nine attack case studies.
pub const ATTACKS: [&str; 9] = [
    "namereg-displacement",
    "dex-cancel-grief",
    "dex-sandwich",
    "curve-sandwich",
    "kitty-givebirth",
    "fomo3d-suppression",
    "ens-reveal-race",
    "ico-f2pool",
    "allowance-race",
];

pub fn names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|b| b.0)
}

pub fn builtin(name: &str) -> Option<ScenarioConfig> {
    let (base, variant) = match name.split_once('/') {
        Some((b, v)) => (b, Some(v)),
        None => (name, None),
    };
    if !BUILTINS.iter().any(|b| b.0 == name) {
        return None;
    }
    let mut c = match base {
        "namereg-displacement" => namereg(),
        "kitty-givebirth" => kitty(),
        "dex-cancel-grief" => cancel_grief(),
        "dex-sandwich" => dex_sandwich(),
        "curve-sandwich" => curve_sandwich(),
        "fomo3d-suppression" => fomo3d(12),
        "ens-reveal-race" => ens_race(),
        "ico-f2pool" => f2pool(),
        "allowance-race" => allowance(false),
        "namereg-spray" => spray(),
        _ => return None,
    };
    match variant {
        None => {}
        Some("fifo") => c.ordering = OrderingPolicy::FIFO,
        Some("ctor") => c.ordering = OrderingPolicy::CTOR,
        Some("ctor-grind") => {
            c.ordering = OrderingPolicy::CTOR;
            for a in &mut c.agents {
                if let AgentKind::Attacker { strategy: Strategy::Displace { grind_tries, .. }, .. } = &mut a.kind {
                    *grind_tries = 64;
                }
            }
        }
        Some("chained") => c.ordering.chained = true,
        Some("commit_reveal") => {
            c.mitigation = Mitigation::CommitReveal;
            c.run_blocks = 22;
        }
        Some("submarine") => {
            c.mitigation = Mitigation::Submarine;
            c.run_blocks = 23;
        }
        Some("batch_auction") => c.mitigation = Mitigation::BatchAuction,
        Some("budget6") => c = fomo3d(6),
        Some("decrease") => c = allowance(true),
        Some(_) => return None,
    }
    c.name = name.to_string();
    Some(c)
}

fn base(name: &str, dapp: DappConfig, run_blocks: u64) -> ScenarioConfig {
    ScenarioConfig {
        schema_version: SCHEMA_VERSION,
        name: name.to_string(),
        dapp,
        ordering: OrderingPolicy::GAS_PRICE,
        mitigation: Mitigation::None,
        mitigation_params: MitigationParams::default(),
        miners: ["pool-a", "pool-b", "pool-c", "pool-d"]
            .into_iter()
            .map(|n| MinerConfig { name: n.to_string(), power: 0.25, behavior: MinerBehavior::Honest, operator: None })
            .collect(),
        agents: Vec::new(),
        run_blocks,
        block_gas_limit: DEFAULT_BLOCK_GAS_LIMIT,
        propagation: Propagation::default(),
        valuation: Valuation::default(),
        seed: 0,
    }
}

fn step(when: When, call: Call, value: Wei, gas_price: u64) -> Step {
    Step { when, call, value, gas_price, gas_limit: None }
}

fn victim(name: &str, steps: Vec<Step>, goal: Goal) -> AgentConfig {
    AgentConfig { name: name.to_string(), balance: ether(100), kind: AgentKind::Victim { steps, goal, choose_name_from: Vec::new() } }
}

fn attacker(name: &str, strategy: Strategy) -> AgentConfig {
    AgentConfig {
        name: name.to_string(),
        balance: ether(100),
        kind: AgentKind::Attacker { strategy, gas_premium: 1, latency_ticks: 1, budget: None },
    }
}

fn copy(watch: &str) -> Strategy {
    Strategy::Displace { watch: vec![watch.to_string()], mode: DisplaceMode::Copy, grind_tries: 0 }
}

fn register(name: &str) -> Call {
    Call::Registry(RegistryCall::Register { name: name.to_string() })
}

fn namereg() -> ScenarioConfig {
    let mut c = base("namereg-displacement", DappConfig::Registry { fee: REGISTRY_FEE }, 3);
    c.agents = vec![
        victim("alice", vec![step(When::Tick(1), register(NAME), REGISTRY_FEE, 20)], Goal::OwnsName { name: NAME.to_string() }),
        attacker("mallory", copy("registry.register")),
    ];
    c.valuation.names = BTreeMap::from([(NAME.to_string(), NAME_VALUE)]);
    c
}

pub const KITTY: u64 = 7;
pub const KITTY_REWARD: Wei = finney(50);

fn kitty() -> ScenarioConfig {
    let mut c = base(
        "kitty-givebirth",
        DappConfig::Kitty { pregnancies: vec![PregnancyConfig { kitty: KITTY, birth_height: 3, reward: KITTY_REWARD }] },
        5,
    );
    c.agents = vec![
        victim("alice", vec![step(When::Height(3), Call::Kitty(KittyCall::GiveBirth { kitty: KITTY }), 0, 20)], Goal::Midwife { kitty: KITTY }),
        attacker("mallory", copy("kitty.give_birth")),
    ];
    c
}

fn cancel_grief() -> ScenarioConfig {
    let mut c = base(
        "dex-cancel-grief",
        DappConfig::Dex {
            unit_wei: UNIT,
            units: vec![Holding { owner: "alice".into(), qty: 10 }],
            resting: vec![RestingOrder { owner: "alice".into(), side: Side::Ask, price: 100, qty: 10 }],
        },
        3,
    );
    c.agents = vec![
        victim("alice", vec![step(When::Tick(1), Call::Dex(DexCall::CancelOrder { id: 1 }), 0, 20)], Goal::OrderCancelled { id: 1 }),
        attacker("mallory", Strategy::Displace { watch: vec!["dex.cancel_order".into()], mode: DisplaceMode::FillCancelled, grind_tries: 0 }),
    ];
    // The market has moved above the stale offer; that is why it is being
    // cancelled.
    c.valuation.unit_wei = 110 * UNIT;
    c
}

pub const ASK: u64 = 100;
pub const LIMIT: u64 = 105;
pub const QTY: u64 = 10;

fn dex_sandwich() -> ScenarioConfig {
    let mut c = base(
        "dex-sandwich",
        DappConfig::Dex {
            unit_wei: UNIT,
            units: vec![Holding { owner: "bob".into(), qty: QTY }, Holding { owner: "mallory".into(), qty: QTY }],
            resting: vec![RestingOrder { owner: "bob".into(), side: Side::Ask, price: ASK, qty: QTY }],
        },
        3,
    );
    let value = LIMIT as Wei * QTY as Wei * UNIT;
    c.agents = vec![
        victim(
            "alice",
            vec![step(When::Tick(1), Call::Dex(DexCall::MarketBuy { qty: QTY, limit: LIMIT }), value, 20)],
            Goal::BoughtUnits { units: QTY, max_cost: (ASK as Wei * QTY as Wei + 25) * UNIT },
        ),
        attacker("mallory", Strategy::Insert),
        AgentConfig { name: "bob".into(), balance: ether(1), kind: AgentKind::Passive },
    ];
    c.valuation.unit_wei = ASK as Wei * UNIT;
    c
}

pub const CURVE_P0: Wei = finney(1);
pub const CURVE_M: Wei = 100_000_000_000_000;
pub const CURVE_UNITS: u64 = 50;
/// Slippage allowance in units of `m * CURVE_UNITS`: room for a front-run
/// of exactly this many units.
pub const CURVE_SLACK_UNITS: u64 = 10;

fn curve_sandwich() -> ScenarioConfig {
    let mut c = base("curve-sandwich", DappConfig::Curve { p0: CURVE_P0, m: CURVE_M }, 3);
    let fair = BondingCurveDealer::new(CURVE_P0, CURVE_M).cost(0, CURVE_UNITS);
    let value = fair + CURVE_SLACK_UNITS as Wei * CURVE_UNITS as Wei * CURVE_M;
    c.agents = vec![
        victim(
            "alice",
            vec![step(When::Tick(1), Call::Curve(CurveCall::Buy { units: CURVE_UNITS }), value, 20)],
            Goal::BoughtUnits { units: CURVE_UNITS, max_cost: fair },
        ),
        attacker("mallory", Strategy::Insert),
    ];
    c
}

pub const FILLER_GAS: u64 = 2_000_000;
pub const STUFF_GAS_PRICE: u64 = 60;
pub const POT: Wei = ether(20);
pub const TICKET: Wei = finney(100);

fn fomo3d(stuff_blocks: u64) -> ScenarioConfig {
    let mut c = base(
        "fomo3d-suppression",
        DappConfig::Timer { deadline_ticks: 166, ticket_price: TICKET, initial_pot: POT, last_buyer: Some("bob".into()) },
        20,
    );
    let budget = suppression_cost(stuff_blocks, DEFAULT_BLOCK_GAS_LIMIT, FILLER_GAS, STUFF_GAS_PRICE);
    c.agents = vec![
        AgentConfig { name: "bob".into(), balance: ether(100), kind: AgentKind::TimerPlayer { gas_price: 50 } },
        AgentConfig {
            name: "mallory".into(),
            balance: ether(100),
            kind: AgentKind::Attacker {
                strategy: Strategy::Suppress { filler_gas: FILLER_GAS, gas_price: STUFF_GAS_PRICE },
                gas_premium: 1,
                latency_ticks: 1,
                budget: Some(budget),
            },
        },
    ];
    c
}

pub const ENS_NAME: &str = "alpha.eth";
pub const ENS_BID: Wei = ether(5);

fn ens_race() -> ScenarioConfig {
    let mut c = base("ens-reveal-race", DappConfig::Ens { bidding_blocks: 5, reveal_blocks: 5 }, 12);
    let nh = name_hash(ENS_NAME);
    let salt = Hash256::of(b"alice's salt");
    let sealed = sealed_bid(&nh, ENS_BID, &salt, &agent_address("alice"));
    c.agents = vec![
        victim(
            "alice",
            vec![
                step(When::Tick(1), Call::Ens(EnsCall::StartAuctionAndBid { name_hash: nh, sealed }), ENS_BID, 20),
                step(When::Height(6), Call::Ens(EnsCall::Reveal { name_hash: nh, amount: ENS_BID, salt }), 0, 20),
                step(When::Height(11), Call::Ens(EnsCall::Finalize { name_hash: nh }), 0, 20),
            ],
            Goal::WinsAuction { name: ENS_NAME.to_string() },
        ),
        attacker("mallory", Strategy::EnsRace),
    ];
    c.valuation.names = BTreeMap::from([(ENS_NAME.to_string(), ether(10))]);
    c
}

pub const F2POOL: &str = "f2pool";
pub const F2POOL_POWER: f64 = 0.23;
pub const PRIVATE_ADDRESSES: u32 = 30;
pub const ICO_GAS_CAP: u64 = 50;

fn f2pool() -> ScenarioConfig {
    let mut c = base(
        "ico-f2pool",
        DappConfig::Ico { first_cap: ether(3000), cap_count: 6, gas_price_cap: ICO_GAS_CAP },
        100,
    );
    c.miners = vec![
        MinerConfig {
            name: F2POOL.into(),
            power: F2POOL_POWER,
            behavior: MinerBehavior::BulkDisplace { target: DappId::Ico },
            operator: Some("mallory".into()),
        },
        MinerConfig { name: "pool-a".into(), power: 0.27, behavior: MinerBehavior::Honest, operator: None },
        MinerConfig { name: "pool-b".into(), power: 0.25, behavior: MinerBehavior::Honest, operator: None },
        MinerConfig { name: "pool-c".into(), power: 0.25, behavior: MinerBehavior::Honest, operator: None },
    ];
    c.agents = vec![
        victim(
            "alice",
            vec![step(When::Tick(1), Call::Ico(crate::call::IcoCall::Deposit), ether(5), 40)],
            Goal::SaleTokens { min: ether(5) },
        ),
        AgentConfig {
            name: "crowd".into(),
            balance: 0,
            kind: AgentKind::IcoCrowd {
                valid_per_block: 10,
                invalid_per_block: 13,
                amount: ether(1),
                valid_gas_price: (20, ICO_GAS_CAP),
                invalid_gas_price: (ICO_GAS_CAP + 1, 100),
                gas_limit: 200_000,
            },
        },
        AgentConfig {
            name: "mallory".into(),
            balance: ether(20),
            kind: AgentKind::Attacker {
                strategy: Strategy::MinerBulk { miner: F2POOL.into(), extra_addresses: PRIVATE_ADDRESSES, deposit: ether(10), gas_price: ICO_GAS_CAP },
                gas_premium: 1,
                latency_ticks: 1,
                budget: None,
            },
        },
    ];
    c.valuation.ico_token_ppm = 1_100_000;
    c
}

pub const FIRST_ALLOWANCE: u128 = 100;
pub const SECOND_ALLOWANCE: u128 = 50;

fn allowance(decrease: bool) -> ScenarioConfig {
    let mut c = base("allowance-race", DappConfig::Token { balances: vec![Holding { owner: "alice".into(), qty: 1000 }] }, 8);
    let spender = agent_address("mallory");
    let second = if decrease {
        TokenCall::DecreaseApproval { spender, amount: FIRST_ALLOWANCE - SECOND_ALLOWANCE }
    } else {
        TokenCall::Approve { spender, amount: SECOND_ALLOWANCE }
    };
    c.agents = vec![
        victim(
            "alice",
            vec![
                step(When::Tick(1), Call::Token(TokenCall::Approve { spender, amount: FIRST_ALLOWANCE }), 0, 20),
                step(When::Tick(46), Call::Token(second), 0, 20),
            ],
            Goal::SpendAtMost { spender: "mallory".into(), amount: FIRST_ALLOWANCE },
        ),
        attacker("mallory", Strategy::AllowanceDrain { owner: "alice".into() }),
    ];
    c.valuation.token_unit_wei = finney(1);
    c
}

pub const SPRAY_CANDIDATES: usize = 10;

pub fn spray_candidates() -> Vec<String> {
    (0..SPRAY_CANDIDATES).map(|i| format!("n{i}.eth")).collect()
}

fn spray() -> ScenarioConfig {
    let mut c = base("namereg-spray", DappConfig::Registry { fee: REGISTRY_FEE }, 22);
    c.mitigation = Mitigation::CommitReveal;
    // Bond set to the gain from one successful reveal.
    c.mitigation_params.min_bond = NAME_VALUE - REGISTRY_FEE;
    let names = spray_candidates();
    c.agents = vec![
        AgentConfig {
            name: "alice".into(),
            balance: ether(100),
            kind: AgentKind::Victim {
                steps: vec![step(When::Tick(1), register(&names[0]), REGISTRY_FEE, 20)],
                goal: Goal::OwnsName { name: names[0].clone() },
                choose_name_from: names.clone(),
            },
        },
        attacker("mallory", Strategy::Spray { candidates: names.clone(), commitments: SPRAY_CANDIDATES as u32 }),
    ];
    c.valuation.names = names.into_iter().map(|n| (n, NAME_VALUE)).collect();
    c
}
