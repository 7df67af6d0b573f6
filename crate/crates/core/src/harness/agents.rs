//! Scenario participants. Every agent is polled once per tick and answers
//! with intents; the engine assigns nonces and submits them.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{agent_address, miner_address, AgentConfig, AgentKind, DisplaceMode, Goal, ScenarioConfig, Step, Strategy, When};
use crate::adversary::{self, Budget, Displacement, Draft};
use crate::call::{
    commitment_digest, sealed_bid, BatchCall, Call, CommitRevealCall, CommittedAction, DappId, DexCall, EnsCall,
    IcoCall, RegistryCall, Side, SubmarineCall, SubmarinePayload, TimerCall, TokenCall,
};
use crate::chain::{Ledger, Network, BLOCK_INTERVAL_TICKS};
use crate::dapps::DappState;
use crate::mitigations::{Mitigation, Windows};
use crate::ordering::OrderingPolicy;
use crate::types::{fee, Address, Gas, Gwei, Hash256, SimTime, Wei};

/// A transaction an agent wants sent at `at`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Intent {
    pub sender: Address,
    pub call: Call,
    pub value: Wei,
    pub gas_price: Gwei,
    pub gas_limit: Gas,
    pub at: SimTime,
    pub private_to: Option<Address>,
    /// Grind the salt to sort below this hash, with at most this many tries.
    pub grind: Option<(Hash256, u64)>,
}

impl Intent {
    fn from_draft(sender: Address, d: Draft, at: SimTime) -> Self {
        Intent { sender, call: d.call, value: d.value, gas_price: d.gas_price, gas_limit: d.gas_limit, at, private_to: None, grind: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Victim,
    Attacker,
    Bystander,
}

/// What an agent may look at when it acts.
pub struct Cx<'a> {
    pub now: SimTime,
    pub ledger: &'a Ledger,
    pub net: &'a Network,
    pub policy: OrderingPolicy,
    pub mitigation: Mitigation,
    pub windows: Windows,
    pub min_bond: Wei,
    /// The scenario's primary DApp.
    pub target: DappId,
    pub block_gas_limit: Gas,
}

impl Cx<'_> {
    pub fn next_height(&self) -> u64 {
        self.ledger.height + 1
    }

    pub fn next_block_time(&self) -> SimTime {
        SimTime::from_ticks(self.next_height() * BLOCK_INTERVAL_TICKS)
    }

    fn digest_of(&self, id: DappId) -> Hash256 {
        self.ledger.dapp(id).map_or(Hash256::ZERO, |d| d.digest())
    }
}

pub trait Agent {
    fn name(&self) -> &str;
    fn role(&self) -> Role;
    /// Address of the node this agent watches the mempool from.
    fn node(&self) -> Address;
    fn genesis(&self) -> Vec<(Address, Wei)>;
    /// Every address whose balance belongs to this agent.
    fn addresses(&self) -> Vec<Address>;
    fn act(&mut self, cx: &Cx<'_>, rng: &mut ChaCha8Rng, out: &mut Vec<Intent>);
    /// What the agent is trying to achieve, once resolved.
    fn goal(&self) -> Option<Goal> {
        None
    }
    fn strategy(&self) -> Option<&Strategy> {
        None
    }
    fn attempted(&self) -> bool {
        false
    }
    fn extras(&self) -> Vec<(String, i128)> {
        Vec::new()
    }
}

pub fn build(config: &ScenarioConfig) -> Vec<Box<dyn Agent>> {
    config.agents.iter().map(|a| build_one(config, a)).collect()
}

fn build_one(config: &ScenarioConfig, a: &AgentConfig) -> Box<dyn Agent> {
    let addr = agent_address(&a.name);
    match &a.kind {
        AgentKind::Victim { steps, goal, choose_name_from } => Box::new(Victim {
            name: a.name.clone(),
            addr,
            balance: a.balance,
            steps: steps.clone(),
            fired: alloc::vec![false; steps.len()],
            goal: goal.clone(),
            choose_name_from: choose_name_from.clone(),
            chosen: None,
            followups: Vec::new(),
            commitment_addrs: Vec::new(),
        }),
        AgentKind::Passive => Box::new(Passive { name: a.name.clone(), addr, balance: a.balance }),
        AgentKind::TimerPlayer { gas_price } => {
            Box::new(TimerPlayer { name: a.name.clone(), addr, balance: a.balance, gas_price: *gas_price, waiting_for: None })
        }
        AgentKind::IcoCrowd { valid_per_block, invalid_per_block, amount, valid_gas_price, invalid_gas_price, gas_limit } => {
            let per_block = (*valid_per_block + *invalid_per_block) as u64;
            let pool = (0..per_block * config.run_blocks).map(|i| Address::from_label(&format!("agent:{}/{i}", a.name))).collect();
            Box::new(IcoCrowd {
                name: a.name.clone(),
                addr,
                balance: a.balance,
                valid: *valid_per_block,
                invalid: *invalid_per_block,
                amount: *amount,
                valid_gp: *valid_gas_price,
                invalid_gp: *invalid_gas_price,
                gas_limit: *gas_limit,
                pool,
                used: 0,
                last_height: None,
            })
        }
        AgentKind::Attacker { strategy, gas_premium, latency_ticks, budget } => {
            let victim_goal = config.agents.iter().find_map(|o| match &o.kind {
                AgentKind::Victim { goal, .. } => Some(goal.clone()),
                _ => None,
            });
            let extra = match strategy {
                Strategy::MinerBulk { extra_addresses, .. } => {
                    (0..*extra_addresses).map(|i| Address::from_label(&format!("agent:{}/{i}", a.name))).collect()
                }
                _ => Vec::new(),
            };
            Box::new(Attacker {
                name: a.name.clone(),
                addr,
                balance: a.balance,
                extra,
                strategy: strategy.clone(),
                premium: *gas_premium,
                latency: *latency_ticks,
                budget: Budget::new(*budget),
                victim_goal,
                answered: BTreeSet::new(),
                sent: 0,
                st: AttackState::default(),
            })
        }
    }
}

fn random_hash(rng: &mut ChaCha8Rng) -> Hash256 {
    Hash256(rng.gen())
}

/// Honest client wrapper: the form a plain DApp call takes under the
/// scenario's sequencing rule and countermeasure.
enum Wrapped {
    Plain(Call, Wei),
    Commit { commit: Call, bond: Wei, reveal: Call, value: Wei },
    Submarine { fund: Address, fund_value: Wei, payload: SubmarinePayload },
}

fn wrap(cx: &Cx<'_>, me: Address, call: Call, value: Wei, rng: &mut ChaCha8Rng) -> Wrapped {
    let Some(target) = call.target() else { return Wrapped::Plain(call, value) };
    let guarded = target == cx.target;
    match cx.mitigation {
        Mitigation::CommitReveal if guarded => {
            let action = CommittedAction { beneficiary: me, call: Box::new(call) };
            let nonce = random_hash(rng);
            let digest = commitment_digest(&action, &nonce);
            Wrapped::Commit {
                commit: Call::CommitReveal(CommitRevealCall::Commit { digest }),
                bond: cx.min_bond,
                reveal: Call::CommitReveal(CommitRevealCall::Reveal { action, nonce }),
                value,
            }
        }
        Mitigation::Submarine if guarded => {
            let payload = SubmarinePayload { beneficiary: me, amount: value, call: Box::new(call), secret: random_hash(rng) };
            Wrapped::Submarine { fund: payload.commitment_address(), fund_value: value.max(1), payload }
        }
        Mitigation::BatchAuction if target == DappId::Dex => match call {
            Call::Dex(DexCall::MarketBuy { qty, limit }) => {
                Wrapped::Plain(Call::Batch(BatchCall::Submit { side: Side::Bid, limit, qty }), value)
            }
            Call::Dex(DexCall::MakeOrder { side, price, qty }) => {
                Wrapped::Plain(Call::Batch(BatchCall::Submit { side, limit: price, qty }), value)
            }
            other => Wrapped::Plain(other, value),
        },
        _ if cx.policy.chained => {
            let state_digest = cx.digest_of(target);
            Wrapped::Plain(Call::Chained { state_digest, inner: Box::new(call) }, value)
        }
        _ => Wrapped::Plain(call, value),
    }
}

enum Followup {
    Reveal { height: u64, call: Call, value: Wei, gas_price: Gwei },
    SubReveal { height: u64, payload: SubmarinePayload, gas_price: Gwei },
    SubFinalize { height: u64, gas_price: Gwei },
}

impl Followup {
    fn height(&self) -> u64 {
        match self {
            Followup::Reveal { height, .. } | Followup::SubReveal { height, .. } | Followup::SubFinalize { height, .. } => *height,
        }
    }
}

/// Runs a fixed script of calls through the honest client wrapper.
struct Victim {
    name: String,
    addr: Address,
    balance: Wei,
    steps: Vec<Step>,
    fired: Vec<bool>,
    goal: Goal,
    choose_name_from: Vec<String>,
    chosen: Option<String>,
    followups: Vec<Followup>,
    commitment_addrs: Vec<Address>,
}

impl Victim {
    fn rename(&self, call: Call) -> Call {
        match (&self.chosen, call) {
            (Some(n), Call::Registry(RegistryCall::Register { .. })) => Call::Registry(RegistryCall::Register { name: n.clone() }),
            (_, c) => c,
        }
    }

    fn send(&self, out: &mut Vec<Intent>, at: SimTime, call: Call, value: Wei, gas_price: Gwei, gas_limit: Option<Gas>) {
        let gas_limit = gas_limit.unwrap_or_else(|| call.gas_cost());
        out.push(Intent { sender: self.addr, call, value, gas_price, gas_limit, at, private_to: None, grind: None });
    }
}

impl Agent for Victim {
    fn name(&self) -> &str {
        &self.name
    }

    fn role(&self) -> Role {
        Role::Victim
    }

    fn node(&self) -> Address {
        self.addr
    }

    fn genesis(&self) -> Vec<(Address, Wei)> {
        alloc::vec![(self.addr, self.balance)]
    }

    fn addresses(&self) -> Vec<Address> {
        let mut v = alloc::vec![self.addr];
        v.extend(self.commitment_addrs.iter().copied());
        v
    }

    fn goal(&self) -> Option<Goal> {
        Some(match (&self.goal, &self.chosen) {
            (Goal::OwnsName { .. }, Some(n)) => Goal::OwnsName { name: n.clone() },
            (g, _) => g.clone(),
        })
    }

    fn act(&mut self, cx: &Cx<'_>, rng: &mut ChaCha8Rng, out: &mut Vec<Intent>) {
        if self.chosen.is_none() && !self.choose_name_from.is_empty() {
            self.chosen = self.choose_name_from.choose(rng).cloned();
        }
        let now = cx.now;
        for i in 0..self.steps.len() {
            let due = match self.steps[i].when {
                When::Tick(t) => now.ticks() >= t,
                When::Height(h) => cx.next_height() >= h,
            };
            if self.fired[i] || !due {
                continue;
            }
            self.fired[i] = true;
            let step = self.steps[i].clone();
            let call = self.rename(step.call);
            match wrap(cx, self.addr, call, step.value, rng) {
                Wrapped::Plain(call, value) => self.send(out, now, call, value, step.gas_price, step.gas_limit),
                Wrapped::Commit { commit, bond, reveal, value } => {
                    self.send(out, now, commit, bond, step.gas_price, None);
                    let height = cx.windows.reveal_start().max(cx.next_height() + 1);
                    self.followups.push(Followup::Reveal { height, call: reveal, value, gas_price: step.gas_price });
                }
                Wrapped::Submarine { fund, fund_value, payload } => {
                    self.commitment_addrs.push(fund);
                    self.send(out, now, Call::Transfer { to: fund }, fund_value, step.gas_price, None);
                    let height = cx.windows.reveal_start().max(cx.next_height() + 1);
                    self.followups.push(Followup::SubReveal { height, payload, gas_price: step.gas_price });
                    self.followups.push(Followup::SubFinalize { height: cx.windows.reveal_end(), gas_price: step.gas_price });
                }
            }
        }
        let (due, later): (Vec<Followup>, Vec<Followup>) =
            core::mem::take(&mut self.followups).into_iter().partition(|f| cx.next_height() >= f.height());
        self.followups = later;
        for f in due {
            match f {
                Followup::Reveal { call, value, gas_price, .. } => self.send(out, now, call, value, gas_price, None),
                Followup::SubReveal { payload, gas_price, .. } => {
                    let commitment = payload.commitment_address();
                    self.send(out, now, Call::Submarine(SubmarineCall::Reveal { payload }), 0, gas_price, None);
                    self.send(out, now, Call::Submarine(SubmarineCall::Unlock { commitment }), 0, gas_price, None);
                }
                Followup::SubFinalize { gas_price, .. } => {
                    self.send(out, now, Call::Submarine(SubmarineCall::Finalize), 0, gas_price, None)
                }
            }
        }
    }
}

struct Passive {
    name: String,
    addr: Address,
    balance: Wei,
}

impl Agent for Passive {
    fn name(&self) -> &str {
        &self.name
    }

    fn role(&self) -> Role {
        Role::Bystander
    }

    fn node(&self) -> Address {
        self.addr
    }

    fn genesis(&self) -> Vec<(Address, Wei)> {
        alloc::vec![(self.addr, self.balance)]
    }

    fn addresses(&self) -> Vec<Address> {
        alloc::vec![self.addr]
    }

    fn act(&mut self, _cx: &Cx<'_>, _rng: &mut ChaCha8Rng, _out: &mut Vec<Intent>) {}
}

/// Timer-game regular: buys a ticket whenever someone else holds the lead
/// and claims the pot once the round is over.
struct TimerPlayer {
    name: String,
    addr: Address,
    balance: Wei,
    gas_price: Gwei,
    /// Height after which our last transaction should have been mined.
    waiting_for: Option<u64>,
}

impl Agent for TimerPlayer {
    fn name(&self) -> &str {
        &self.name
    }

    fn role(&self) -> Role {
        Role::Victim
    }

    fn node(&self) -> Address {
        self.addr
    }

    fn genesis(&self) -> Vec<(Address, Wei)> {
        alloc::vec![(self.addr, self.balance)]
    }

    fn addresses(&self) -> Vec<Address> {
        alloc::vec![self.addr]
    }

    fn goal(&self) -> Option<Goal> {
        Some(Goal::ClaimedPot)
    }

    fn act(&mut self, cx: &Cx<'_>, _rng: &mut ChaCha8Rng, out: &mut Vec<Intent>) {
        let Some(DappState::Timer(game)) = cx.ledger.dapp(DappId::Timer) else { return };
        if game.claimed {
            return;
        }
        if self.waiting_for.is_some_and(|h| cx.ledger.height < h) {
            return;
        }
        // Anything still pending from us keeps its place; do not stack more.
        if cx.net.pending().any(|t| t.sender == self.addr) {
            return;
        }
        let ours = game.last_buyer == Some(self.addr);
        let over = game.expired(cx.next_block_time());
        let (call, value) = match (ours, over) {
            (true, true) => (Call::Timer(TimerCall::ClaimPot), 0),
            (false, false) => (Call::Timer(TimerCall::BuyTicket), game.ticket_price),
            _ => return,
        };
        let call = if cx.policy.chained {
            Call::Chained { state_digest: cx.digest_of(DappId::Timer), inner: Box::new(call) }
        } else {
            call
        };
        self.waiting_for = Some(cx.next_height());
        out.push(Intent {
            sender: self.addr,
            gas_limit: call.gas_cost(),
            call,
            value,
            gas_price: self.gas_price,
            at: cx.now,
            private_to: None,
            grind: None,
        });
    }
}

/// Background sale traffic: every block, fresh addresses send deposits,
/// some priced under the sale's gas-price cap and some over it.
struct IcoCrowd {
    name: String,
    addr: Address,
    balance: Wei,
    valid: u32,
    invalid: u32,
    amount: Wei,
    valid_gp: (Gwei, Gwei),
    invalid_gp: (Gwei, Gwei),
    gas_limit: Gas,
    pool: Vec<Address>,
    used: usize,
    last_height: Option<u64>,
}

impl Agent for IcoCrowd {
    fn name(&self) -> &str {
        &self.name
    }

    fn role(&self) -> Role {
        Role::Bystander
    }

    fn node(&self) -> Address {
        self.addr
    }

    fn genesis(&self) -> Vec<(Address, Wei)> {
        let each = self.amount + fee(self.gas_limit, self.valid_gp.1.max(self.invalid_gp.1));
        let mut v = alloc::vec![(self.addr, self.balance)];
        v.extend(self.pool.iter().map(|a| (*a, each)));
        v
    }

    fn addresses(&self) -> Vec<Address> {
        let mut v = alloc::vec![self.addr];
        v.extend(self.pool.iter().copied());
        v
    }

    fn act(&mut self, cx: &Cx<'_>, rng: &mut ChaCha8Rng, out: &mut Vec<Intent>) {
        let h = cx.next_height();
        if self.last_height == Some(h) {
            return;
        }
        self.last_height = Some(h);
        let n = (self.valid + self.invalid) as usize;
        if self.used + n > self.pool.len() {
            return;
        }
        for i in 0..n {
            let (lo, hi) = if i < self.valid as usize { self.valid_gp } else { self.invalid_gp };
            let gas_price = rng.gen_range(lo..=hi);
            let offset = rng.gen_range(0..BLOCK_INTERVAL_TICKS - 2);
            out.push(Intent {
                sender: self.pool[self.used],
                call: Call::Ico(IcoCall::Deposit),
                value: self.amount,
                gas_price,
                gas_limit: self.gas_limit,
                at: cx.now.plus_ticks(offset),
                private_to: None,
                grind: None,
            });
            self.used += 1;
        }
    }
}

#[derive(Default)]
struct AttackState {
    /// Suppression: ticket bought, and the last height we stuffed.
    ticket_sent: bool,
    stuffed_through: u64,
    claim_sent: bool,
    filler_blocks: u64,
    /// Bulk: deposits sent.
    bulk_sent: bool,
    /// ENS: our sealed bid per name, and whether we revealed/finalized.
    ens_bids: BTreeMap<Hash256, (Wei, Hash256)>,
    ens_revealed: BTreeSet<Hash256>,
    ens_finalized: BTreeSet<Hash256>,
    /// Spray: committed actions by name.
    spray: BTreeMap<String, (CommittedAction, Hash256)>,
    spray_committed: bool,
    /// Allowance drain: a re-approval was front-run and the new allowance
    /// is still to be spent; last height we sent at.
    drain_armed: bool,
    drain_sent_at: Option<u64>,
}

struct Attacker {
    name: String,
    addr: Address,
    balance: Wei,
    extra: Vec<Address>,
    strategy: Strategy,
    premium: Gwei,
    latency: u64,
    budget: Budget,
    victim_goal: Option<Goal>,
    answered: BTreeSet<Hash256>,
    sent: u64,
    st: AttackState,
}

impl Attacker {
    fn mine(&self) -> impl Fn(&Address) -> bool + '_ {
        move |a: &Address| *a == self.addr || self.extra.contains(a)
    }

    fn later(&self, cx: &Cx<'_>) -> SimTime {
        cx.now.plus_ticks(self.latency)
    }

    /// Queue `d` if the budget covers its fee.
    fn emit(&mut self, out: &mut Vec<Intent>, d: Draft, at: SimTime) -> bool {
        if !self.budget.try_spend(d.max_fee()) {
            return false;
        }
        self.sent += 1;
        out.push(Intent::from_draft(self.addr, d, at));
        true
    }

    /// Fresh pending transactions from others whose effective call matches.
    fn fresh(&self, cx: &Cx<'_>, pred: &dyn Fn(&Call) -> bool) -> Vec<crate::chain::Transaction> {
        let mine = self.mine();
        adversary::observe(cx.net, &self.addr, cx.now, &mine, &|c: &Call| pred(c.effective_call()))
            .into_iter()
            .filter(|t| !self.answered.contains(&t.hash))
            .collect()
    }

    fn displace(&mut self, cx: &Cx<'_>, out: &mut Vec<Intent>, watch: &[String], mode: DisplaceMode, grind: u64) {
        let ctor = cx.policy.kind == crate::ordering::PolicyKind::Ctor;
        for victim in self.fresh(cx, &|c| watch.iter().any(|w| w == c.function())) {
            self.answered.insert(victim.hash);
            let mode = match mode {
                DisplaceMode::Copy => Displacement::Copy,
                DisplaceMode::FillCancelled => Displacement::FillCancelled,
            };
            let Some(d) = adversary::displace(&victim, mode, self.premium, cx.ledger) else { continue };
            let at = self.later(cx);
            if self.emit(out, d, at) && ctor && grind > 0 {
                out.last_mut().expect("just pushed").grind = Some((victim.hash, grind));
            }
        }
    }

    fn insert(&mut self, cx: &Cx<'_>, out: &mut Vec<Intent>) {
        let buys = |c: &Call| {
            matches!(
                c,
                Call::Dex(DexCall::MarketBuy { .. })
                    | Call::Curve(crate::call::CurveCall::Buy { .. })
                    | Call::Batch(BatchCall::Submit { side: Side::Bid, .. })
            )
        };
        for victim in self.fresh(cx, &buys) {
            self.answered.insert(victim.hash);
            let Some((front, back)) = adversary::insert(&victim, self.premium, cx.ledger) else { continue };
            if !self.budget.can_afford(front.max_fee() + back.max_fee()) {
                continue;
            }
            let at = self.later(cx);
            self.emit(out, front, at);
            self.emit(out, back, at);
        }
    }

    fn suppress(&mut self, cx: &Cx<'_>, out: &mut Vec<Intent>, filler_gas: Gas, gas_price: Gwei) {
        let Some(DappState::Timer(game)) = cx.ledger.dapp(DappId::Timer) else { return };
        if game.claimed {
            return;
        }
        let at = cx.now;
        if !self.st.ticket_sent {
            if game.expired(cx.next_block_time()) {
                return;
            }
            self.st.ticket_sent = true;
            self.sent += 1;
            let d = Draft::new(Call::Timer(TimerCall::BuyTicket), game.ticket_price, gas_price);
            out.push(Intent::from_draft(self.addr, d, at));
            self.st.stuffed_through = cx.next_height();
            return;
        }
        if game.last_buyer != Some(self.addr) {
            return;
        }
        let h = cx.next_height();
        if game.expired(cx.next_block_time()) {
            if !self.st.claim_sent {
                self.st.claim_sent = true;
                self.sent += 1;
                let d = Draft::new(Call::Timer(TimerCall::ClaimPot), 0, gas_price);
                out.push(Intent::from_draft(self.addr, d, at));
            }
            return;
        }
        if self.st.stuffed_through >= h {
            return;
        }
        let n = adversary::fillers_per_block(cx.block_gas_limit, filler_gas);
        if !self.budget.can_afford(n as Wei * fee(filler_gas, gas_price)) {
            return;
        }
        self.st.stuffed_through = h;
        self.st.filler_blocks += 1;
        for _ in 0..n {
            let d = Draft { call: Call::Filler { gas: filler_gas }, value: 0, gas_price, gas_limit: filler_gas };
            self.emit(out, d, at);
        }
    }

    fn bulk(&mut self, cx: &Cx<'_>, out: &mut Vec<Intent>, miner: &str, deposit: Wei, gas_price: Gwei) {
        if self.st.bulk_sent {
            return;
        }
        self.st.bulk_sent = true;
        let pool = miner_address(miner);
        let senders: Vec<Address> = core::iter::once(self.addr).chain(self.extra.iter().copied()).collect();
        for sender in senders {
            let d = Draft::new(Call::Ico(IcoCall::Deposit), deposit, gas_price);
            self.sent += 1;
            let mut i = Intent::from_draft(sender, d, cx.now);
            i.private_to = Some(pool);
            out.push(i);
        }
    }

    fn ens_race(&mut self, cx: &Cx<'_>, rng: &mut ChaCha8Rng, out: &mut Vec<Intent>) {
        let at = self.later(cx);
        let is_ens = |c: &Call| matches!(c, Call::Ens(_));
        for victim in self.fresh(cx, &is_ens) {
            self.answered.insert(victim.hash);
            match victim.call.effective_call().clone() {
                Call::Ens(EnsCall::StartAuctionAndBid { name_hash, .. }) if !self.st.ens_bids.contains_key(&name_hash) => {
                    // The deposit leaks an upper bound on the sealed amount;
                    // bid exactly that.
                    let amount = victim.value;
                    let salt = random_hash(rng);
                    let sealed = sealed_bid(&name_hash, amount, &salt, &self.addr);
                    let d = Draft::new(Call::Ens(EnsCall::StartAuctionAndBid { name_hash, sealed }), amount, victim.gas_price + self.premium);
                    if self.emit(out, d, at) {
                        self.st.ens_bids.insert(name_hash, (amount, salt));
                    }
                }
                Call::Ens(EnsCall::Reveal { name_hash, .. }) => {
                    let Some(&(amount, salt)) = self.st.ens_bids.get(&name_hash) else { continue };
                    if self.st.ens_revealed.insert(name_hash) {
                        let d = Draft::new(Call::Ens(EnsCall::Reveal { name_hash, amount, salt }), 0, victim.gas_price + self.premium);
                        self.emit(out, d, at);
                    }
                }
                _ => {}
            }
        }
        let Some(DappState::Ens(ens)) = cx.ledger.dapp(DappId::Ens) else { return };
        let bids: Vec<Hash256> = self.st.ens_bids.keys().copied().collect();
        for h in bids {
            if ens.phase(&h, cx.next_height()) == crate::dapps::ens::Phase::Closed
                && ens.auction(&h).is_some_and(|a| !a.finalized)
                && self.st.ens_finalized.insert(h)
            {
                let d = Draft::new(Call::Ens(EnsCall::Finalize { name_hash: h }), 0, 1 + self.premium);
                self.emit(out, d, cx.now);
            }
        }
    }

    fn spray(&mut self, cx: &Cx<'_>, rng: &mut ChaCha8Rng, out: &mut Vec<Intent>, candidates: &[String], m: u32) {
        if !self.st.spray_committed && cx.windows.in_commit(cx.next_height()) {
            self.st.spray_committed = true;
            let mut pick: Vec<String> = candidates.to_vec();
            pick.shuffle(rng);
            pick.truncate(m as usize);
            pick.sort();
            for name in pick {
                let action = CommittedAction { beneficiary: self.addr, call: Box::new(Call::Registry(RegistryCall::Register { name: name.clone() })) };
                let nonce = random_hash(rng);
                let digest = commitment_digest(&action, &nonce);
                let d = Draft::new(Call::CommitReveal(CommitRevealCall::Commit { digest }), cx.min_bond, 1 + self.premium);
                if self.emit(out, d, cx.now) {
                    self.st.spray.insert(name, (action, nonce));
                }
            }
        }
        let reveals = |c: &Call| matches!(c, Call::Registry(RegistryCall::Register { .. }));
        for victim in self.fresh(cx, &reveals) {
            self.answered.insert(victim.hash);
            let Call::Registry(RegistryCall::Register { name }) = victim.call.effective_call() else { continue };
            let Some((action, nonce)) = self.st.spray.remove(name) else { continue };
            let value = match cx.ledger.dapp(DappId::Registry) {
                Some(DappState::Registry(r)) => r.fee,
                _ => 0,
            };
            let d = Draft::new(Call::CommitReveal(CommitRevealCall::Reveal { action, nonce }), value, victim.gas_price + self.premium);
            let at = self.later(cx);
            self.emit(out, d, at);
        }
    }

    fn drain(&mut self, cx: &Cx<'_>, out: &mut Vec<Intent>, owner: Address) {
        let Some(DappState::Token(token)) = cx.ledger.dapp(DappId::Token) else { return };
        let me = self.addr;
        let allowance = token.allowance(&owner, &me);
        let resets = |c: &Call| {
            matches!(c, Call::Token(TokenCall::Approve { spender, .. } | TokenCall::DecreaseApproval { spender, .. }) if *spender == me)
        };
        let at = self.later(cx);
        for victim in self.fresh(cx, &resets) {
            self.answered.insert(victim.hash);
            if victim.sender != owner || allowance == 0 {
                continue;
            }
            let d = Draft::new(Call::Token(TokenCall::TransferFrom { owner, to: me, amount: allowance }), 0, victim.gas_price + self.premium);
            if self.emit(out, d, at) {
                self.st.drain_armed = true;
                self.st.drain_sent_at = Some(cx.next_height());
            }
        }
        let settled = self.st.drain_sent_at.is_some_and(|h| cx.ledger.height >= h);
        if self.st.drain_armed && settled && allowance > 0 {
            let d = Draft::new(Call::Token(TokenCall::TransferFrom { owner, to: me, amount: allowance }), 0, 1 + self.premium);
            if self.emit(out, d, cx.now) {
                self.st.drain_armed = false;
            }
        }
    }
}

impl Agent for Attacker {
    fn name(&self) -> &str {
        &self.name
    }

    fn role(&self) -> Role {
        Role::Attacker
    }

    fn node(&self) -> Address {
        self.addr
    }

    fn genesis(&self) -> Vec<(Address, Wei)> {
        let mut v = alloc::vec![(self.addr, self.balance)];
        if let Strategy::MinerBulk { deposit, gas_price, .. } = &self.strategy {
            let each = deposit + fee(crate::call::SIMPLE_CALL_GAS, *gas_price);
            v.extend(self.extra.iter().map(|a| (*a, each)));
        }
        v
    }

    fn addresses(&self) -> Vec<Address> {
        let mut v = alloc::vec![self.addr];
        v.extend(self.extra.iter().copied());
        v
    }

    fn goal(&self) -> Option<Goal> {
        self.victim_goal.clone()
    }

    fn strategy(&self) -> Option<&Strategy> {
        Some(&self.strategy)
    }

    fn attempted(&self) -> bool {
        self.sent > 0
    }

    fn extras(&self) -> Vec<(String, i128)> {
        let mut v = alloc::vec![("sent".to_string(), self.sent as i128), ("budget_spent".to_string(), self.budget.spent as i128)];
        if let Strategy::Suppress { .. } = self.strategy {
            v.push(("stuffed_blocks".to_string(), self.st.filler_blocks as i128));
        }
        v
    }

    fn act(&mut self, cx: &Cx<'_>, rng: &mut ChaCha8Rng, out: &mut Vec<Intent>) {
        match self.strategy.clone() {
            Strategy::Displace { watch, mode, grind_tries } => self.displace(cx, out, &watch, mode, grind_tries),
            Strategy::Insert => self.insert(cx, out),
            Strategy::Suppress { filler_gas, gas_price } => self.suppress(cx, out, filler_gas, gas_price),
            Strategy::MinerBulk { miner, deposit, gas_price, .. } => self.bulk(cx, out, &miner, deposit, gas_price),
            Strategy::EnsRace => self.ens_race(cx, rng, out),
            Strategy::Spray { candidates, commitments } => self.spray(cx, rng, out, &candidates, commitments),
            Strategy::AllowanceDrain { owner } => self.drain(cx, out, agent_address(&owner)),
        }
    }
}
