//! The event loop: genesis, then one tick at a time, mining a block every
//! block interval and letting every agent act after it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use super::agents::{self, Cx, Intent, Role};
use super::config::{miner_address, ConfigError, DappConfig, Goal, ScenarioConfig, Strategy, Valuation, DisplaceMode};
use super::report::{AgentReport, BlockRow, BondReport, Mined, MinerReport, Outcome, Report, REPORT_SCHEMA_VERSION};
use crate::call::{name_hash, Call, DappId, Side};
use crate::chain::exec::execute_block;
use crate::chain::{mine_block, select_miner, Ledger, MinerBehavior, Network, Transaction, Visibility, BLOCK_INTERVAL_TICKS};
use crate::dapps::{
    AllowanceToken, BondingCurveDealer, CappedIco, DappState, EnsAuction, KittyBirth, NameRegistry, OrderBookDex, TimerGame,
};
use crate::dapps::dex::Closure;
use crate::dapps::ico::geometric_caps;
use crate::mitigations::batch::BatchBook;
use crate::mitigations::commit_reveal::CommitReveal;
use crate::mitigations::submarine::{SubPhase, SubmarineVault};
use crate::mitigations::Mitigation;
use crate::ordering::grind_ctor_position;
use crate::rng;
use crate::types::{fee, Address, Hash256, SimTime, Wei};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunError {
    Config(ConfigError),
    /// A safety property of the simulation itself failed.
    Invariant(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "invalid config: {e}"),
            RunError::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

struct MinerRt {
    name: String,
    addr: Address,
    power: f64,
    behavior: MinerBehavior,
    own: BTreeSet<Address>,
}

/// Install the scenario's DApp, its countermeasure wrapper and genesis
/// holdings.
fn install_dapp(config: &ScenarioConfig, ledger: &mut Ledger) {
    let who = super::config::agent_address;
    let target = config.dapp.id();
    let gate = match config.mitigation {
        Mitigation::CommitReveal => Some(DappId::CommitReveal),
        Mitigation::Submarine => Some(DappId::Submarine),
        _ => None,
    };
    let p = &config.mitigation_params;
    match config.mitigation {
        Mitigation::CommitReveal => {
            ledger.install(DappState::CommitReveal(CommitReveal::new(target, p.windows, p.min_bond)), None)
        }
        Mitigation::Submarine => ledger.install(DappState::Submarine(SubmarineVault::new(target, p.windows)), None),
        _ => {}
    }
    let state = match &config.dapp {
        DappConfig::Registry { fee } => DappState::Registry(NameRegistry::new(*fee)),
        DappConfig::Dex { unit_wei, units, resting } if config.mitigation == Mitigation::BatchAuction => {
            let mut book = BatchBook::new(*unit_wei, p.batch_interval);
            for h in units {
                book.credit_units(who(&h.owner), h.qty);
            }
            for o in resting {
                if o.side == Side::Bid {
                    ledger.credit(DappId::Batch.address(), book.wei(o.price, o.qty));
                }
                book.place_genesis(who(&o.owner), o.side, o.price, o.qty);
            }
            DappState::Batch(book)
        }
        DappConfig::Dex { unit_wei, units, resting } => {
            let mut dex = OrderBookDex::new(*unit_wei);
            for h in units {
                dex.credit_units(who(&h.owner), h.qty);
            }
            for o in resting {
                if o.side == Side::Bid {
                    ledger.credit(DappId::Dex.address(), dex.wei(o.price, o.qty));
                }
                dex.place_resting(who(&o.owner), o.side, o.price, o.qty);
            }
            DappState::Dex(dex)
        }
        DappConfig::Curve { p0, m } => DappState::Curve(BondingCurveDealer::new(*p0, *m)),
        DappConfig::Ens { bidding_blocks, reveal_blocks } => DappState::Ens(EnsAuction::new(*bidding_blocks, *reveal_blocks)),
        DappConfig::Timer { deadline_ticks, ticket_price, initial_pot, last_buyer } => {
            let mut t = TimerGame::new(SimTime::from_ticks(*deadline_ticks), *ticket_price);
            t.pot = *initial_pot;
            t.last_buyer = last_buyer.as_deref().map(who);
            ledger.credit(DappId::Timer.address(), *initial_pot);
            DappState::Timer(t)
        }
        DappConfig::Ico { first_cap, cap_count, gas_price_cap } => {
            DappState::Ico(CappedIco::new(geometric_caps(*first_cap, *cap_count as usize), *gas_price_cap))
        }
        DappConfig::Token { balances } => {
            let mut t = AllowanceToken::new();
            for h in balances {
                t.mint(who(&h.owner), h.qty as u128);
            }
            DappState::Token(t)
        }
        DappConfig::Kitty { pregnancies } => {
            let mut k = KittyBirth::new();
            for p in pregnancies {
                k.add_pregnancy(p.kitty, p.birth_height, p.reward);
                ledger.credit(DappId::Kitty.address(), p.reward);
            }
            DappState::Kitty(k)
        }
    };
    ledger.install(state, gate);
}

/// Marked-to-market value of everything `addrs` hold besides wei.
pub fn holdings_value(ledger: &Ledger, addrs: &BTreeSet<Address>, v: &Valuation) -> i128 {
    let mut total: i128 = 0;
    let units = |u: u64| u as i128 * v.unit_wei as i128;
    for id in ledger.dapp_ids() {
        match ledger.dapp(id).expect("listed") {
            DappState::Registry(r) => {
                total += v.names.iter().filter(|(n, _)| r.owner(n).is_some_and(|o| addrs.contains(&o))).map(|(_, w)| *w as i128).sum::<i128>();
            }
            DappState::Ens(e) => {
                total += v
                    .names
                    .iter()
                    .filter(|(n, _)| e.owner(&name_hash(n)).is_some_and(|o| addrs.contains(&o)))
                    .map(|(_, w)| *w as i128)
                    .sum::<i128>();
            }
            DappState::Dex(d) => {
                for a in addrs {
                    total += units(d.units_of(a));
                }
                for o in d.book(Side::Ask).into_iter().chain(d.book(Side::Bid)) {
                    if addrs.contains(&o.owner) {
                        total += match o.side {
                            Side::Ask => units(o.qty),
                            Side::Bid => d.wei(o.price, o.qty) as i128,
                        };
                    }
                }
            }
            DappState::Batch(b) => {
                for a in addrs {
                    total += units(b.units_of(a));
                }
                for o in b.pending().iter().filter(|o| addrs.contains(&o.owner)) {
                    total += match o.side {
                        Side::Ask => units(o.qty),
                        Side::Bid => b.wei(o.limit, o.qty) as i128,
                    };
                }
            }
            DappState::Curve(c) => {
                for a in addrs {
                    total += units(c.units_of(a));
                }
            }
            DappState::Ico(i) => {
                for a in addrs {
                    total += (i.tokens_of(a) * v.ico_token_ppm as Wei / 1_000_000) as i128;
                }
            }
            DappState::Token(t) => {
                for a in addrs {
                    total += (t.balance_of(a) * v.token_unit_wei) as i128;
                }
            }
            DappState::CommitReveal(cr) => {
                total += cr
                    .commitments()
                    .filter(|c| addrs.contains(&c.committer) && !c.revealed && !c.slashed)
                    .map(|c| c.bond as i128)
                    .sum::<i128>();
            }
            DappState::Submarine(s) => {
                total += s
                    .entries()
                    .filter(|(_, e)| e.phase == SubPhase::Unlocked && addrs.contains(&e.payload.beneficiary))
                    .map(|(_, e)| e.payload.amount as i128)
                    .sum::<i128>();
            }
            DappState::Timer(_) | DappState::Kitty(_) => {}
        }
    }
    total
}

/// Per-agent quantities the goals are judged on.
struct Tally {
    addrs: BTreeSet<Address>,
    wei_delta: i128,
    fees: Wei,
    units_delta: i128,
    tokens_delta: i128,
}

fn unit_count(ledger: &Ledger, addrs: &BTreeSet<Address>) -> i128 {
    let mut n: i128 = 0;
    for id in ledger.dapp_ids() {
        match ledger.dapp(id).expect("listed") {
            DappState::Dex(d) => {
                n += addrs.iter().map(|a| d.units_of(a) as i128).sum::<i128>();
                n += d.book(Side::Ask).iter().filter(|o| addrs.contains(&o.owner)).map(|o| o.qty as i128).sum::<i128>();
            }
            DappState::Batch(b) => {
                n += addrs.iter().map(|a| b.units_of(a) as i128).sum::<i128>();
                n += b.pending().iter().filter(|o| o.side == Side::Ask && addrs.contains(&o.owner)).map(|o| o.qty as i128).sum::<i128>();
            }
            DappState::Curve(c) => n += addrs.iter().map(|a| c.units_of(a) as i128).sum::<i128>(),
            _ => {}
        }
    }
    n
}

fn token_count(ledger: &Ledger, addrs: &BTreeSet<Address>) -> i128 {
    match ledger.dapp(DappId::Token) {
        Some(DappState::Token(t)) => addrs.iter().map(|a| t.balance_of(a) as i128).sum(),
        _ => 0,
    }
}

/// Whether `goal` holds with `who` as its subject.
fn goal_holds(goal: &Goal, ledger: &Ledger, who: &Tally) -> bool {
    let mine = |a: Option<Address>| a.is_some_and(|a| who.addrs.contains(&a));
    match goal {
        Goal::OwnsName { name } => match ledger.dapp(DappId::Registry) {
            Some(DappState::Registry(r)) => mine(r.owner(name)),
            _ => false,
        },
        Goal::WinsAuction { name } => match ledger.dapp(DappId::Ens) {
            Some(DappState::Ens(e)) => mine(e.owner(&name_hash(name))),
            _ => false,
        },
        Goal::OrderCancelled { id } => match ledger.dapp(DappId::Dex) {
            Some(DappState::Dex(d)) => d.closure(*id) == Some(Closure::Cancelled),
            _ => false,
        },
        Goal::Midwife { kitty } => match ledger.dapp(DappId::Kitty) {
            Some(DappState::Kitty(k)) => mine(k.pregnancy(*kitty).and_then(|p| p.midwife)),
            _ => false,
        },
        Goal::ClaimedPot => match ledger.dapp(DappId::Timer) {
            Some(DappState::Timer(t)) => t.claimed && mine(t.last_buyer),
            _ => false,
        },
        Goal::BoughtUnits { units, max_cost } => {
            let spent = -(who.wei_delta + who.fees as i128);
            who.units_delta >= *units as i128 && spent <= *max_cost as i128
        }
        Goal::SpendAtMost { amount, .. } => -who.tokens_delta <= *amount as i128,
        Goal::SaleTokens { min } => match ledger.dapp(DappId::Ico) {
            Some(DappState::Ico(i)) => who.addrs.iter().map(|a| i.tokens_of(a)).sum::<Wei>() >= *min,
            _ => false,
        },
    }
}

/// Whether a goal names something the attacker could hold in the victim's
/// place.
fn goal_is_capturable(goal: &Goal) -> bool {
    matches!(goal, Goal::OwnsName { .. } | Goal::WinsAuction { .. } | Goal::Midwife { .. } | Goal::ClaimedPot | Goal::SaleTokens { .. })
}

fn hex(h: &Hash256) -> String {
    h.0.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn run_scenario(config: &ScenarioConfig, seed: u64) -> Result<Report, RunError> {
    config.validate()?;
    let mut agents = agents::build(config);
    let miners: Vec<MinerRt> = config
        .miners
        .iter()
        .map(|m| {
            let own = m
                .operator
                .as_ref()
                .and_then(|op| agents.iter().find(|a| a.name() == op))
                .map(|a| a.addresses().into_iter().collect())
                .unwrap_or_default();
            MinerRt { name: m.name.clone(), addr: miner_address(&m.name), power: m.power, behavior: m.behavior, own }
        })
        .collect();
    let miner_names: BTreeMap<Address, usize> = miners.iter().enumerate().map(|(i, m)| (m.addr, i)).collect();

    let mut ledger = Ledger::new();
    install_dapp(config, &mut ledger);
    for a in &agents {
        for (addr, amount) in a.genesis() {
            ledger.credit(addr, amount);
        }
    }
    let supply = ledger.total_supply();
    let genesis = ledger.clone();

    let nodes: Vec<Address> = miners.iter().map(|m| m.addr).chain(agents.iter().map(|a| a.node())).collect();
    let mut net = Network::new(nodes, config.propagation, rng::stream(seed, rng::PROPAGATION_STREAM));
    let mut miner_rng = rng::stream(seed, rng::MINER_STREAM);
    let mut agent_rngs: Vec<_> = (0..agents.len()).map(|i| rng::stream(seed, rng::AGENT_STREAM_BASE + i as u64)).collect();
    let powers: Vec<(Address, f64)> = miners.iter().map(|m| (m.addr, m.power)).collect();
    let target = config.dapp.id();

    let owner_of: BTreeMap<Address, usize> = agents.iter().enumerate().flat_map(|(i, a)| a.genesis().into_iter().map(move |(addr, _)| (addr, i))).collect();
    let mut sent = alloc::vec![0u64; agents.len()];
    let mut mined = alloc::vec![Mined::default(); agents.len()];
    let mut mined_by: Vec<BTreeMap<String, Mined>> = alloc::vec![BTreeMap::new(); agents.len()];
    let mut gas_used = alloc::vec![0u64; agents.len()];
    let mut fees = alloc::vec![0 as Wei; agents.len()];
    let mut filler_fees = alloc::vec![0 as Wei; agents.len()];
    let mut miner_stats: Vec<MinerReport> = miners
        .iter()
        .map(|m| MinerReport {
            name: m.name.clone(),
            power_ppm: (m.power * 1_000_000.0 + 0.5) as u64,
            blocks: 0,
            target_success: 0,
            target_failed: 0,
            fee_revenue: 0,
        })
        .collect();
    let mut rows = Vec::new();
    let mut extras: BTreeMap<String, i128> = BTreeMap::new();
    let mut queue: Vec<(SimTime, u64, usize, Intent)> = Vec::new();
    let mut seq = 0u64;
    let mut next_nonce: BTreeMap<Address, u64> = BTreeMap::new();
    let mut grind_failures = 0i128;
    let mut rejected = 0i128;

    let last_tick = config.run_blocks * BLOCK_INTERVAL_TICKS;
    for tick in 0..=last_tick {
        let now = SimTime::from_ticks(tick);
        if tick > 0 && tick % BLOCK_INTERVAL_TICKS == 0 {
            let number = tick / BLOCK_INTERVAL_TICKS;
            let who = select_miner(&mut miner_rng, &powers).map_err(|e| RunError::Invariant(format!("{e:?}")))?;
            let mi = miner_names[&who];
            let m = &miners[mi];
            let view = net.view(&m.addr).expect("miner node").as_of(now);
            let candidates = net.visible(&m.addr, now);
            let block = mine_block(&ledger, number, m.addr, now, config.block_gas_limit, &config.ordering, &view, candidates, m.behavior, &m.own);
            if block.gas_used > block.gas_limit {
                return Err(RunError::Invariant(format!("block {number} uses {} gas over limit {}", block.gas_used, block.gas_limit)));
            }
            let before: BTreeMap<Address, u64> = block.transactions.iter().map(|t| (t.sender, ledger.nonce(&t.sender))).collect();
            let (receipts, _) = execute_block(&mut ledger, &block).map_err(|f| RunError::Invariant(format!("block {number}: {f}")))?;
            if ledger.total_supply() != supply {
                return Err(RunError::Invariant(format!("block {number}: total supply changed")));
            }
            for (a, n) in before {
                if ledger.nonce(&a) < n {
                    return Err(RunError::Invariant(format!("block {number}: nonce went backwards")));
                }
            }
            let stats = &mut miner_stats[mi];
            stats.blocks += 1;
            let mut row = BlockRow {
                number,
                miner: m.name.clone(),
                txs: block.transactions.len() as u64,
                gas_used: block.gas_used,
                gas_limit: block.gas_limit,
                target_success: 0,
                target_failed: 0,
            };
            for (tx, r) in block.transactions.iter().zip(&receipts) {
                let f = fee(r.gas_consumed, tx.gas_price);
                stats.fee_revenue += f;
                if tx.call.effective_target() == Some(target) {
                    if r.status.is_success() {
                        stats.target_success += 1;
                        row.target_success += 1;
                    } else {
                        stats.target_failed += 1;
                        row.target_failed += 1;
                    }
                }
                if let Some(&ai) = owner_of.get(&tx.sender) {
                    fees[ai] += f;
                    gas_used[ai] += r.gas_consumed;
                    if matches!(tx.call, Call::Filler { .. }) {
                        filler_fees[ai] += f;
                    }
                    let slot = mined_by[ai].entry(m.name.clone()).or_default();
                    if r.status.is_success() {
                        mined[ai].success += 1;
                        slot.success += 1;
                    } else {
                        mined[ai].failed += 1;
                        slot.failed += 1;
                    }
                }
            }
            rows.push(row);
            net.prune(&ledger);
        }

        let cx = Cx {
            now,
            ledger: &ledger,
            net: &net,
            policy: config.ordering,
            mitigation: config.mitigation,
            windows: config.mitigation_params.windows,
            min_bond: config.mitigation_params.min_bond,
            target,
            block_gas_limit: config.block_gas_limit,
        };
        for (i, a) in agents.iter_mut().enumerate() {
            let mut out = Vec::new();
            a.act(&cx, &mut agent_rngs[i], &mut out);
            for intent in out {
                queue.push((intent.at.max(now), seq, i, intent));
                seq += 1;
            }
        }
        queue.sort_by_key(|q| (q.0, q.1));
        let due = queue.iter().take_while(|q| q.0 <= now).count();
        for (at, _, i, intent) in queue.drain(..due).collect::<Vec<_>>() {
            let nonce = ledger.nonce(&intent.sender).max(next_nonce.get(&intent.sender).copied().unwrap_or(0));
            let visibility = intent.private_to.map_or(Visibility::Broadcast, Visibility::PrivateTo);
            // Wallet-level randomness: each signature gets a fresh salt.
            let salt: u64 = agent_rngs[i].gen();
            let mut tx = Transaction::new(intent.sender, nonce, intent.gas_price, intent.gas_limit, intent.value, intent.call, at, visibility, salt);
            if let Some((victim, tries)) = intent.grind {
                match grind_ctor_position(&tx, &victim, tries) {
                    Ok(g) => tx = g.tx,
                    Err(_) => grind_failures += 1,
                }
            }
            match net.submit(tx, at, &ledger) {
                Ok(()) => {
                    next_nonce.insert(intent.sender, nonce + 1);
                    sent[i] += 1;
                }
                Err(_) => rejected += 1,
            }
        }
    }

    if grind_failures > 0 {
        extras.insert("grind_failures".to_string(), grind_failures);
    }
    if rejected > 0 {
        extras.insert("rejected_submissions".to_string(), rejected);
    }

    let mut reports = Vec::with_capacity(agents.len());
    let mut tallies = Vec::with_capacity(agents.len());
    let mut agent_addrs = BTreeSet::new();
    for (i, a) in agents.iter().enumerate() {
        let addrs: BTreeSet<Address> = a.addresses().into_iter().collect();
        agent_addrs.extend(addrs.iter().copied());
        let wei_delta: i128 = addrs.iter().map(|x| ledger.balance(x) as i128 - genesis.balance(x) as i128).sum();
        let holdings_delta = holdings_value(&ledger, &addrs, &config.valuation) - holdings_value(&genesis, &addrs, &config.valuation);
        let units_delta = unit_count(&ledger, &addrs) - unit_count(&genesis, &addrs);
        let tokens_delta = token_count(&ledger, &addrs) - token_count(&genesis, &addrs);
        let tally = Tally { addrs, wei_delta, fees: fees[i], units_delta, tokens_delta };
        let goal_met = match a.role() {
            Role::Attacker => None,
            _ => a.goal().map(|g| goal_holds(&g, &ledger, &tally)),
        };
        let net_profit = wei_delta + holdings_delta;
        reports.push(AgentReport {
            name: a.name().to_string(),
            role: a.role(),
            sent: sent[i],
            mined: mined[i],
            mined_by: core::mem::take(&mut mined_by[i]),
            gas_used: gas_used[i],
            fees_paid: fees[i],
            wei_delta,
            holdings_delta,
            net_profit,
            gross_profit: net_profit + fees[i] as i128,
            goal_met,
        });
        for (k, v) in a.extras() {
            extras.insert(format!("{}.{k}", a.name()), v);
        }
        if ledger.dapp(DappId::Token).is_some() && tally.tokens_delta != 0 {
            extras.insert(format!("{}.tokens_delta", a.name()), tally.tokens_delta);
        }
        if filler_fees[i] > 0 {
            extras.insert(format!("{}.filler_fees", a.name()), filler_fees[i] as i128);
        }
        tallies.push(tally);
    }

    // Attack outcome, judged per attacker on the final state.
    let victim_goal = agents.iter().find(|a| a.role() == Role::Victim).and_then(|a| a.goal());
    let victim_tally = agents.iter().position(|a| a.role() == Role::Victim).map(|i| &tallies[i]);
    let victim_goal_met = victim_goal.as_ref().zip(victim_tally).map(|(g, t)| goal_holds(g, &ledger, t));
    let mut any_attempt = false;
    let mut any_success = false;
    for (i, a) in agents.iter().enumerate() {
        if a.role() != Role::Attacker || !a.attempted() {
            continue;
        }
        any_attempt = true;
        let t = &tallies[i];
        let r = &reports[i];
        let profit = r.net_profit > 0;
        let victim_lost = victim_goal_met == Some(false);
        let won = match a.strategy() {
            Some(Strategy::Suppress { .. }) => goal_holds(&Goal::ClaimedPot, &ledger, t),
            Some(Strategy::MinerBulk { .. }) => r.mined.success > 0 && r.mined.failed == 0 && r.mined.success == r.sent,
            Some(Strategy::Insert) => profit,
            Some(Strategy::Displace { mode: DisplaceMode::FillCancelled, .. }) | Some(Strategy::AllowanceDrain { .. }) => {
                victim_lost && profit
            }
            _ => match &victim_goal {
                Some(g) if goal_is_capturable(g) => goal_holds(g, &ledger, t),
                _ => victim_lost && profit,
            },
        };
        any_success |= won;
    }
    let outcome = match (any_attempt, any_success) {
        (false, _) => Outcome::NotAttempted,
        (true, true) => Outcome::Succeeded,
        (true, false) => Outcome::Failed,
    };
    let victims: Vec<bool> = reports.iter().filter(|r| r.role == Role::Victim).filter_map(|r| r.goal_met).collect();
    let victim_succeeded = if victims.is_empty() { None } else { Some(victims.iter().all(|v| *v)) };

    let miner_addrs: BTreeSet<Address> = miners.iter().map(|m| m.addr).collect();
    let burn = Address::burn();
    let other_delta: i128 = ledger
        .balances()
        .keys()
        .chain(genesis.balances().keys())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .filter(|a| !agent_addrs.contains(a) && !miner_addrs.contains(a) && **a != burn)
        .map(|a| ledger.balance(a) as i128 - genesis.balance(a) as i128)
        .sum();
    let fee_total: Wei = miner_addrs.iter().map(|a| ledger.balance(a) - genesis.balance(a)).sum();
    let bonds = match ledger.dapp(DappId::CommitReveal) {
        Some(DappState::CommitReveal(cr)) => {
            let s = cr.stats();
            Some(BondReport { posted: s.posted, returned: s.returned, slashed: s.slashed })
        }
        _ => None,
    };
    let attacker_net_profit = reports.iter().filter(|r| r.role == Role::Attacker).map(|r| r.net_profit).sum();
    let attacker_gross_profit = reports.iter().filter(|r| r.role == Role::Attacker).map(|r| r.gross_profit).sum();

    let report = Report {
        schema_version: REPORT_SCHEMA_VERSION,
        scenario: config.name.clone(),
        seed,
        config_digest: hex(&Hash256::of(&config.canonical_bytes())),
        ordering: config.ordering.to_string(),
        mitigation: config.mitigation.name().to_string(),
        outcome,
        victim_succeeded,
        attacker_net_profit,
        attacker_gross_profit,
        agents: reports,
        miners: miner_stats,
        blocks: rows,
        fee_total,
        burned: ledger.burned() - genesis.burned(),
        other_delta,
        bonds,
        extras,
    };
    if report.zero_sum_residual() != 0 {
        return Err(RunError::Invariant(format!("wei not conserved: residual {}", report.zero_sum_residual())));
    }
    if let (Some(b), Some(DappState::CommitReveal(cr))) = (report.bonds, ledger.dapp(DappId::CommitReveal)) {
        let sum = |f: &dyn Fn(&crate::mitigations::commit_reveal::Commitment) -> bool| cr.commitments().filter(|c| f(c)).map(|c| c.bond).sum::<Wei>();
        if sum(&|_| true) != b.posted || sum(&|c| c.revealed) != b.returned || sum(&|c| c.slashed) != b.slashed {
            return Err(RunError::Invariant("bond accounting does not balance".into()));
        }
    }
    Ok(report)
}
