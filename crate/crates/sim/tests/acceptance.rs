//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use frontrun_core::harness::catalog::{self, ATTACKS, NAME_VALUE, REGISTRY_FEE, UNIT};
use frontrun_core::harness::config::AgentKind;
use frontrun_core::harness::{run_scenario, Outcome, Report, ScenarioConfig};
use frontrun_core::mitigations::Mitigation;
use frontrun_core::ordering::OrderingPolicy;
use frontrun_sim::sweep::{self, Aggregate};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use support::{props, sandwich};

type Verdict = Result<String, String>;

fn builtin(name: &str) -> ScenarioConfig {
    catalog::builtin(name).unwrap()
}

fn runs(name: &str, seeds: std::ops::Range<u64>) -> Result<Vec<Report>, String> {
    sweep::run(&builtin(name), seeds).map_err(|e| format!("{name}: {e}"))
}

fn agg(name: &str, seeds: std::ops::Range<u64>) -> Result<Aggregate, String> {
    Ok(sweep::aggregate(name, &runs(name, seeds)?))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, started: Instant) -> Result<(), String> {
    let took = started.elapsed();
    ensure(took < limit, || format!("took {took:.1?}, limit {limit:?}"))
}

fn determinism() -> Verdict {
    let t = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let policies = ["gas_price", "fifo", "ctor", "chained:gas_price"];
    for _ in 0..20 {
        let (name, _) = catalog::BUILTINS[rng.gen_range(0..catalog::BUILTINS.len())];
        let mut c = builtin(name);
        if c.mitigation == Mitigation::None {
            c.ordering = OrderingPolicy::parse(policies[rng.gen_range(0..policies.len())]).unwrap();
        }
        let seed = rng.gen();
        let once = |c: &ScenarioConfig| serde_json::to_vec(&run_scenario(c, seed).unwrap()).unwrap();
        ensure(once(&c) == once(&c), || format!("{name} seed {seed} differs between replays"))?;
    }
    within(Duration::from_secs(60), t)?;
    Ok(format!("20 replayed pairs byte-identical in {:.1?}", t.elapsed()))
}

fn taxonomy() -> Verdict {
    let t = Instant::now();
    let seeds = 0..20;
    for name in ATTACKS {
        for r in runs(name, seeds.clone())? {
            ensure(r.outcome == Outcome::Succeeded && r.attacker_net_profit > 0, || {
                format!("{name} seed {}: {} with profit {}", r.seed, r.outcome.name(), r.attacker_net_profit)
            })?;
        }
        let control = sweep::run(&builtin(name).without_attackers(), seeds.clone()).map_err(|e| e.to_string())?;
        for r in control {
            ensure(r.outcome == Outcome::NotAttempted && r.victim_succeeded == Some(true), || {
                format!("{name} control seed {}: {} victim {:?}", r.seed, r.outcome.name(), r.victim_succeeded)
            })?;
        }
    }
    within(Duration::from_secs(60), t)?;
    Ok(format!("9 attacks x 20 seeds succeed with profit; controls not attempted, victims succeed ({:.1?})", t.elapsed()))
}

fn sandwich_oracle() -> Verdict {
    let s = sandwich::sandwich();
    let all = sandwich::all_orderings(&s);
    let best = all.iter().map(|o| o.1).max().ok_or("no executable ordering")?;
    ensure(best == 50 * UNIT as i128, || format!("brute-force best {best}"))?;
    ensure(sandwich::gas_price_block(&s) == Some(best), || "gas-price block is not the attacker's best ordering".into())?;
    for r in runs("dex-sandwich", 0..20)? {
        ensure(r.attacker_gross_profit == best, || format!("seed {} gross {}", r.seed, r.attacker_gross_profit))?;
    }
    let table: Vec<String> = all.iter().map(|(p, g)| format!("{p:?}={}", g / UNIT as i128)).collect();
    Ok(format!("gross 50 units; orderings {}", table.join(" ")))
}

fn suppression() -> Verdict {
    let full = agg("fomo3d-suppression", 0..100)?;
    ensure(full.success_rate == 1.0, || format!("12-block window success {}", full.success_rate))?;
    for r in runs("fomo3d-suppression/budget6", 0..100)? {
        let bob = r.agent("bob").ok_or("no bob")?;
        ensure(r.outcome == Outcome::Failed && bob.goal_met == Some(true), || {
            format!("6-block budget seed {}: {} bob {:?}", r.seed, r.outcome.name(), bob.goal_met)
        })?;
    }
    Ok("12-block stuffing wins 100/100; 6-block budget loses 100/100 to the rival ticket".into())
}

fn f2pool() -> Verdict {
    let t = Instant::now();
    let reports = runs("ico-f2pool", 0..100)?;
    let mut tally: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for r in &reports {
        let m = r.agent("mallory").ok_or("no mallory")?;
        ensure(m.mined.success == 31 && m.mined.failed == 0, || format!("seed {}: mallory mined {:?}", r.seed, m.mined))?;
        ensure(m.mined_by.keys().all(|k| k == "f2pool"), || format!("seed {}: private deposit outside own blocks", r.seed))?;
        for mr in &r.miners {
            let e = tally.entry(mr.name.clone()).or_default();
            e.0 += mr.target_success;
            e.1 += mr.target_failed;
        }
    }
    let ratio = |m: &str| tally[m].0 as f64 / tally[m].1 as f64;
    ensure(ratio("f2pool") <= 0.15, || format!("adversary ratio {:.3}", ratio("f2pool")))?;
    let honest: Vec<String> = tally.keys().filter(|m| *m != "f2pool").cloned().collect();
    for m in &honest {
        ensure((0.8..=1.25).contains(&ratio(m)), || format!("{m} ratio {:.3}", ratio(m)))?;
    }
    within(Duration::from_secs(120), t)?;
    let hs: Vec<String> = honest.iter().map(|m| format!("{m} {:.3}", ratio(m))).collect();
    Ok(format!("31/31 private deposits in own blocks every seed; success:fail f2pool {:.3}, {} ({:.1?})", ratio("f2pool"), hs.join(", "), t.elapsed()))
}

fn matrix() -> Verdict {
    let t = Instant::now();
    let n = 0..500;
    let gas = agg("namereg-displacement", n.clone())?;
    let ctor = agg("namereg-displacement/ctor", n.clone())?;
    let grind = agg("namereg-displacement/ctor-grind", n.clone())?;
    let cr = agg("namereg-displacement/commit_reveal", n.clone())?;
    let sw = agg("dex-sandwich", n.clone())?;
    let batch = agg("dex-sandwich/batch_auction", n.clone())?;
    ensure(gas.success_rate == 1.0, || format!("gas-price {}", gas.success_rate))?;
    ensure((ctor.success_rate - 0.5).abs() <= 0.05, || format!("ctor {}", ctor.success_rate))?;
    ensure(grind.success_rate >= 0.9, || format!("ctor grind {}", grind.success_rate))?;
    ensure(cr.success_rate <= 0.05, || format!("commit/reveal {}", cr.success_rate))?;
    ensure(sw.mean_profit > 0.0, || format!("sandwich mean {}", sw.mean_profit))?;
    ensure(batch.mean_profit <= 0.0, || format!("batch mean {}", batch.mean_profit))?;
    for r in runs("curve-sandwich/chained", n)? {
        let alice = r.agent("alice").ok_or("no alice")?;
        ensure(r.attacker_gross_profit == 0 && alice.mined.failed == 1 && alice.mined.success == 0, || {
            format!("chained seed {}: gross {} victim {:?}", r.seed, r.attacker_gross_profit, alice.mined)
        })?;
    }
    within(Duration::from_secs(300), t)?;
    Ok(format!(
        "displacement gas {:.2}, ctor {:.3} [{:.3}, {:.3}], grind {:.3}, commit/reveal {:.3}; sandwich mean {:.1} vs batch {:.1} units; chained victim reverts, gross 0 ({:.1?})",
        gas.success_rate,
        ctor.success_rate,
        ctor.success_ci95.0,
        ctor.success_ci95.1,
        grind.success_rate,
        cr.success_rate,
        sw.mean_profit / UNIT as f64,
        batch.mean_profit / UNIT as f64,
        t.elapsed()
    ))
}

fn spray() -> Verdict {
    let c = builtin("namereg-spray");
    ensure(c.mitigation_params.min_bond == NAME_VALUE - REGISTRY_FEE, || "bond is not the single-reveal gain".into())?;
    let m = c.agents.iter().find_map(|a| match &a.kind {
        AgentKind::Attacker { strategy: frontrun_core::harness::config::Strategy::Spray { commitments, .. }, .. } => Some(*commitments),
        _ => None,
    });
    ensure(m == Some(10), || format!("m = {m:?}"))?;
    let reports = runs("namereg-spray", 0..500)?;
    for r in &reports {
        let b = r.bonds.ok_or("no bond report")?;
        ensure(b.posted == b.returned + b.slashed, || format!("seed {}: {b:?}", r.seed))?;
        ensure(r.zero_sum_residual() == 0, || format!("seed {}: residual", r.seed))?;
    }
    let a = sweep::aggregate("namereg-spray", &reports);
    ensure(a.mean_profit <= 0.0, || format!("mean profit {}", a.mean_profit))?;
    Ok(format!("m = 10, mean profit {:.3} ETH; posted = returned + slashed in 500/500 runs", a.mean_profit / 1e18))
}

fn properties() -> Verdict {
    let mut names = Vec::new();
    for (name, check, cases) in props::ALL {
        check(cases).map_err(|e| format!("{name}: {e}"))?;
        names.push(format!("{name} ({cases})"));
    }
    Ok(names.join(", "))
}

fn allowance() -> Verdict {
    for r in runs("allowance-race", 0..20)? {
        let spent = r.extras.get("mallory.tokens_delta").copied();
        ensure(spent == Some(150), || format!("seed {}: spent {spent:?}", r.seed))?;
    }
    Ok("attacker spends 100 + 50 = 150 in 20/20 seeds".into())
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("determinism", determinism),
        ("taxonomy coverage", taxonomy),
        ("sandwich oracle", sandwich_oracle),
        ("suppression arithmetic", suppression),
        ("F2Pool replication", f2pool),
        ("mitigation efficacy matrix", matrix),
        ("commit/reveal economics", spray),
        ("property suites", properties),
        ("ERC20 allowance race", allowance),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
