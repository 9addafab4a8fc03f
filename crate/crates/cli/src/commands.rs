//! One function per subcommand. Each validates its config keys, runs the
//! core routine, writes artifacts plus a config.snapshot into the run
//! directory, and prints a summary. Artifact files never contain wall-clock
//! values, so a rerun with the same inputs reproduces them byte for byte.

use std::time::Instant;

use serde_json::json;

use cayleycomm::graph::{baselines, bfs_distances, moore_min_diameter};
use cayleycomm::rl::history_to_csv;
use cayleycomm::search::DEFAULT_SEARCH_CAP;
use cayleycomm::sim::{
    broadcast_load_series, comm_load_sim, dissemination_stats, robustness_eval, FailureConfig,
    GossipConfig, LoadConfig, SimGraph,
};
use cayleycomm::{
    exhaustive_best, propagation_score, train, CandidatePool, Diameter, Error, GeneratorSet,
    PoolMode, Result, TrainConfig,
};

use crate::run::{self, resolve_topology, Kind, Settings};

pub fn optimize(s: &Settings) -> Result<()> {
    let mut known: Vec<&str> = Vec::new();
    known.extend_from_slice(run::COMMON_KEYS);
    known.extend_from_slice(run::POOL_KEYS);
    known.extend_from_slice(TrainConfig::KEYS);
    s.kv.reject_unknown(&known)?;
    if s.kv.get("budget").is_some() {
        return Err(Error::Config(
            "the offset budget is derived as floor(dmax / 2); set dmax instead of budget".into(),
        ));
    }

    let n = s.n()?;
    let mut cfg = TrainConfig::default();
    cfg.apply_kv(&s.kv)?;
    cfg.budget = s.budget()?;
    cfg.seed = s.seed()?;
    let mode = s.pool_mode()?;
    let pool = CandidatePool::build(n, &mode)?;

    println!(
        "optimize: n={n} dmax={} budget={} pool={}({}) seed={}",
        s.dmax()?,
        cfg.budget,
        pool_label(&mode),
        pool.len(),
        cfg.seed
    );
    let started = Instant::now();
    let result = train(n, &pool, &cfg)?;
    let elapsed = started.elapsed().as_secs_f64();

    let out = s.outdir("optimize")?;
    out.write("best.json", &(result.best.to_json() + "\n"))?;
    out.write("history.csv", &history_to_csv(&result.history))?;
    out.write("pool.csv", &pool.to_csv())?;
    out.write(
        "summary.json",
        &pretty(&json!({
            "command": "optimize",
            "n": n,
            "dmax": s.dmax()?,
            "budget": cfg.budget,
            "seed": cfg.seed,
            "pool": pool_label(&mode),
            "pool_size": pool.len(),
            "episodes_run": result.episodes_run,
            "best": set_report(&result.best),
        })),
    )?;

    let mut pairs = s.common_pairs()?;
    pairs.push(("pool".into(), pool_label(&mode).into()));
    if let Some(file) = s.kv.get("pool_file") {
        pairs.push(("pool_file".into(), file.into()));
    }
    // budget is derived input, not a key the command accepts back.
    pairs.extend(cfg.to_kv().into_iter().filter(|(k, _)| k != "budget"));
    out.write_snapshot(&pairs)?;

    println!(
        "best {} degree={} diameter={} avg_path_length={:.6} ({} episodes, {:.2}s)",
        result.best,
        result.best.degree(),
        result.diameter,
        result.avg_path_length,
        result.episodes_run,
        elapsed
    );
    println!("wrote {}", out.path.display());
    Ok(())
}

pub fn evaluate(s: &Settings, topology: &str) -> Result<()> {
    let named = resolve_topology(s, topology)?;
    // The broadcast channel reaches everyone in one hop; its graph-metric
    // stand-in is the complete graph.
    let gs = match &named.kind {
        Kind::Set(gs) => gs.clone(),
        Kind::Broadcast => baselines::complete_generators(s.n()?)?,
    };
    let n = gs.modulus();
    let profile = bfs_distances(&gs);
    let diameter = profile.diameter();
    let apl = profile.avg_path_length();
    let score = propagation_score(&gs);
    let moore = moore_min_diameter(n as u64, gs.degree() as u64)?;
    let gap = diameter.finite().map(|d| i64::from(d) - i64::from(moore));

    println!("topology: {}", named.name);
    println!("set: {gs}");
    println!("n: {n}");
    println!("degree: {}", gs.degree());
    println!("edges: {}", gs.edge_count());
    println!("connected: {}", gs.is_connected());
    println!("diameter: {diameter}");
    println!("avg_path_length: {apl}");
    println!("propagation_score: {score}");
    println!("moore_bound: {moore}");
    match gap {
        Some(gap) => println!("moore_gap: {gap}"),
        None => println!("moore_gap: inf"),
    }

    let out = s.outdir("evaluate")?;
    out.write(
        "evaluation.json",
        &pretty(&json!({
            "command": "evaluate",
            "topology": named.name,
            "n": n,
            "set": gs.to_string(),
            "offsets": gs.offsets(),
            "degree": gs.degree(),
            "edges": gs.edge_count(),
            "connected": gs.is_connected(),
            "diameter": diameter_value(diameter),
            "avg_path_length": apl,
            "propagation_score": score,
            "moore_bound": moore,
            "moore_gap": gap.map_or(json!("inf"), |g| json!(g)),
        })),
    )?;
    out.write("distances.csv", &profile.to_csv())?;

    let mut pairs = s.common_pairs()?;
    pairs.push(("topology".into(), topology.into()));
    out.write_snapshot(&pairs)?;
    println!("wrote {}", out.path.display());
    Ok(())
}

pub fn bruteforce(s: &Settings) -> Result<()> {
    let mut known: Vec<&str> = Vec::new();
    known.extend_from_slice(run::COMMON_KEYS);
    known.extend_from_slice(run::POOL_KEYS);
    known.push("cap");
    s.kv.reject_unknown(&known)?;

    let n = s.n()?;
    let budget = s.budget()?;
    let cap = s
        .kv
        .get_u64("cap")?
        .map_or(DEFAULT_SEARCH_CAP, u128::from);
    let mode = s.pool_mode()?;
    let pool = CandidatePool::build(n, &mode)?;

    println!(
        "bruteforce: n={n} dmax={} budget={budget} pool={}({}) cap={cap}",
        s.dmax()?,
        pool_label(&mode),
        pool.len()
    );
    let started = Instant::now();
    let outcome = exhaustive_best(n, &pool, budget, cap)?;
    let elapsed = started.elapsed().as_secs_f64();

    let out = s.outdir("bruteforce")?;
    out.write("best.json", &(outcome.best.to_json() + "\n"))?;
    out.write("pool.csv", &pool.to_csv())?;
    out.write(
        "summary.json",
        &pretty(&json!({
            "command": "bruteforce",
            "n": n,
            "dmax": s.dmax()?,
            "budget": budget,
            "pool": pool_label(&mode),
            "pool_size": pool.len(),
            "cap": cap as u64,
            "evaluated": outcome.evaluated,
            "best": set_report(&outcome.best),
        })),
    )?;

    let mut pairs = s.common_pairs()?;
    pairs.push(("pool".into(), pool_label(&mode).into()));
    if let Some(file) = s.kv.get("pool_file") {
        pairs.push(("pool_file".into(), file.into()));
    }
    pairs.push(("cap".into(), cap.to_string()));
    out.write_snapshot(&pairs)?;

    println!(
        "best {} diameter={} avg_path_length={:.6} ({} sets evaluated, {:.2}s)",
        outcome.best, outcome.diameter, outcome.avg_path_length, outcome.evaluated, elapsed
    );
    println!("wrote {}", out.path.display());
    Ok(())
}

pub fn gossip(s: &Settings) -> Result<()> {
    let mut known: Vec<&str> = Vec::new();
    known.extend_from_slice(run::COMMON_KEYS);
    known.extend_from_slice(run::TOPOLOGY_KEYS);
    known.extend_from_slice(GossipConfig::KEYS);
    s.kv.reject_unknown(&known)?;

    let mut cfg = GossipConfig::default();
    cfg.apply_kv(&s.kv)?;
    if let Some(trials) = s.trials()? {
        cfg.trials = trials;
    }
    cfg.validate()?;
    let seed = s.seed()?;
    let names = s.topology_names(&["expo", "fibonacci", "prime"]);

    println!(
        "gossip: p={} trials={} cap={} seed={seed}",
        cfg.link_success, cfg.trials, cfg.max_rounds
    );
    let mut csv = String::from("topology,trial,source,rounds_run,informed,transmissions");
    for t in &cfg.thresholds {
        csv.push(',');
        csv.push_str(&threshold_label(*t));
    }
    csv.push('\n');
    let mut summary_csv =
        String::from("topology,n,threshold,mean_rounds,censored,trials,mean_transmissions\n");
    let mut entries = Vec::new();

    for name in &names {
        let named = resolve_topology(s, name)?;
        let n = named.n(s)?;
        let topology = named.gossip_topology(s)?;
        let stats = dissemination_stats(&topology, &cfg, seed)?;

        let mut parts: Vec<String> = stats
            .thresholds
            .iter()
            .enumerate()
            .map(|(i, t)| {
                format!(
                    "{} mean {:.3} ({}/{} censored)",
                    threshold_label(*t),
                    stats.mean_rounds[i],
                    stats.censored[i],
                    cfg.trials
                )
            })
            .collect();
        parts.push(format!("tx/trial {:.1}", stats.mean_transmissions));
        println!("{} (n={n}): {}", named.name, parts.join(", "));

        for (trial, record) in stats.trials.iter().enumerate() {
            csv.push_str(&format!(
                "{},{},{},{},{},{}",
                named.name,
                trial,
                record.source,
                record.rounds_run,
                record.informed,
                record.transmissions
            ));
            for round in &record.rounds_to_threshold {
                csv.push(',');
                csv.push_str(&opt_u32(*round));
            }
            csv.push('\n');
        }
        for (i, t) in stats.thresholds.iter().enumerate() {
            summary_csv.push_str(&format!(
                "{},{n},{t},{},{},{},{}\n",
                named.name, stats.mean_rounds[i], stats.censored[i], cfg.trials,
                stats.mean_transmissions
            ));
        }

        entries.push(json!({
            "topology": named.name,
            "n": n,
            "offsets": named.generator_set().map(|gs| json!(gs.offsets())).unwrap_or(json!("broadcast")),
            "thresholds": stats.thresholds,
            "mean_rounds": stats.mean_rounds,
            "censored": stats.censored,
            "mean_transmissions": stats.mean_transmissions,
        }));
    }

    let out = s.outdir("gossip")?;
    out.write(
        "gossip.json",
        &pretty(&json!({
            "command": "gossip",
            "seed": seed,
            "p": cfg.link_success,
            "max_rounds": cfg.max_rounds,
            "trials": cfg.trials,
            "topologies": entries,
        })),
    )?;
    out.write("trials.csv", &csv)?;
    out.write("summary.csv", &summary_csv)?;

    let mut pairs = s.common_pairs()?;
    pairs.extend(cfg.to_kv());
    pairs.push(("topologies".into(), names.join(",")));
    out.write_snapshot(&pairs)?;
    println!("wrote {}", out.path.display());
    Ok(())
}

pub fn robustness(s: &Settings) -> Result<()> {
    let mut known: Vec<&str> = Vec::new();
    known.extend_from_slice(run::COMMON_KEYS);
    known.extend_from_slice(run::TOPOLOGY_KEYS);
    known.extend_from_slice(FailureConfig::KEYS);
    known.extend_from_slice(&["p", "max_rounds"]);
    s.kv.reject_unknown(&known)?;

    let mut fail = FailureConfig::default();
    fail.apply_kv(&s.kv)?;
    if let Some(rates) = s.rates()? {
        fail.rates = rates;
    }
    fail.validate()?;
    let mut gossip_cfg = GossipConfig {
        trials: 1,
        ..GossipConfig::default()
    };
    if let Some(p) = s.kv.get_f64("p")? {
        gossip_cfg.link_success = p;
    }
    if let Some(rounds) = s.kv.get_u32("max_rounds")? {
        gossip_cfg.max_rounds = rounds;
    }
    let seed = s.seed()?;
    let names = s.topology_names(&["expo", "fibonacci", "prime"]);

    println!(
        "robustness: rates={:?} realizations={} bias={} p={} seed={seed}",
        fail.rates,
        fail.realizations,
        fail.bias.label(),
        gossip_cfg.link_success
    );
    let mut csv = String::from("topology,rate,mode,index,lcc_fraction,source,t90,censored\n");
    let mut rates_csv = String::from(
        "topology,rate,mean_lcc,mean_t90,t90_censored,pr80_random,pr80_biased\n",
    );
    let mut entries = Vec::new();

    for name in &names {
        let named = resolve_topology(s, name)?;
        let gs = named.generator_set().ok_or_else(|| {
            Error::Config("robustness removes explicit links; broadcast has none".into())
        })?;
        let graph = SimGraph::from_generator_set(gs);
        let (records, realizations) = robustness_eval(&graph, &fail, &gossip_cfg, seed)?;

        for r in &records {
            println!(
                "{} @ {:.2}: mean lcc {:.3}, t90 mean {:.2} ({}/{} censored), pr{:.0} random {:.3} biased {:.3}",
                named.name,
                r.rate,
                r.mean_lcc,
                r.mean_t90,
                r.t90_censored,
                fail.realizations,
                fail.lcc_threshold * 100.0,
                r.pr80_random,
                r.pr80_biased
            );
        }
        for r in &records {
            rates_csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                named.name,
                r.rate,
                r.mean_lcc,
                r.mean_t90,
                r.t90_censored,
                r.pr80_random,
                r.pr80_biased
            ));
        }
        for rz in &realizations {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                named.name,
                rz.rate,
                rz.mode.label(),
                rz.index,
                rz.lcc_fraction,
                rz.source.map_or(String::new(), |v| v.to_string()),
                if rz.source.is_some() { opt_u32(rz.t90) } else { String::new() },
                rz.censored
            ));
        }
        entries.push(json!({
            "topology": named.name,
            "n": gs.modulus(),
            "offsets": gs.offsets(),
            "records": records.iter().map(|r| json!({
                "rate": r.rate,
                "mean_t90": r.mean_t90,
                "t90_censored": r.t90_censored,
                "mean_lcc": r.mean_lcc,
                "pr80_random": r.pr80_random,
                "pr80_biased": r.pr80_biased,
            })).collect::<Vec<_>>(),
        }));
    }

    let out = s.outdir("robustness")?;
    out.write(
        "robustness.json",
        &pretty(&json!({
            "command": "robustness",
            "seed": seed,
            "rates": fail.rates,
            "realizations": fail.realizations,
            "bias": fail.bias.label(),
            "lcc_threshold": fail.lcc_threshold,
            "p": gossip_cfg.link_success,
            "max_rounds": gossip_cfg.max_rounds,
            "topologies": entries,
        })),
    )?;
    out.write("realizations.csv", &csv)?;
    out.write("rates.csv", &rates_csv)?;

    let mut pairs = s.common_pairs()?;
    pairs.extend(fail.to_kv());
    pairs.push(("p".into(), gossip_cfg.link_success.to_string()));
    pairs.push(("max_rounds".into(), gossip_cfg.max_rounds.to_string()));
    pairs.push(("topologies".into(), names.join(",")));
    out.write_snapshot(&pairs)?;
    println!("wrote {}", out.path.display());
    Ok(())
}

pub fn load(s: &Settings) -> Result<()> {
    let mut known: Vec<&str> = Vec::new();
    known.extend_from_slice(run::COMMON_KEYS);
    known.extend_from_slice(run::TOPOLOGY_KEYS);
    known.extend_from_slice(LoadConfig::KEYS);
    s.kv.reject_unknown(&known)?;

    let mut cfg = LoadConfig::default();
    cfg.apply_kv(&s.kv)?;
    if let Some(steps) = s.steps()? {
        cfg.steps = steps;
    }
    cfg.validate()?;
    let seed = s.seed()?;
    let names = s.topology_names(&["expo", "fibonacci", "prime", "broadcast"]);

    println!(
        "load: steps={} injection_fraction={} one_shot={} seed={seed}",
        cfg.steps, cfg.injection_fraction, cfg.one_shot
    );
    let mut csv = String::from("topology,step,transmissions,cumulative\n");
    let mut entries = Vec::new();

    for name in &names {
        let named = resolve_topology(s, name)?;
        let n = named.n(s)?;
        let series = match &named.kind {
            Kind::Set(gs) => comm_load_sim(&SimGraph::from_generator_set(gs), &cfg, seed)?,
            Kind::Broadcast => broadcast_load_series(n as usize, &cfg)?,
        };

        println!(
            "{} (n={n}): avg {:.1} tx/step (std {:.1}), total {}, delivered {}/{}",
            named.name,
            series.average(),
            series.std_dev(),
            series.cumulative,
            series.delivered,
            series.injected
        );
        let mut cumulative = 0u64;
        for (step, tx) in series.per_step.iter().enumerate() {
            cumulative += tx;
            csv.push_str(&format!("{},{step},{tx},{cumulative}\n", named.name));
        }
        entries.push(json!({
            "topology": named.name,
            "n": n,
            "per_step": series.per_step,
            "cumulative": series.cumulative,
            "average": series.average(),
            "std_dev": series.std_dev(),
            "injected": series.injected,
            "delivered": series.delivered,
        }));
    }

    let out = s.outdir("load")?;
    out.write(
        "load.json",
        &pretty(&json!({
            "command": "load",
            "seed": seed,
            "steps": cfg.steps,
            "injection_fraction": cfg.injection_fraction,
            "one_shot": cfg.one_shot,
            "topologies": entries,
        })),
    )?;
    out.write("series.csv", &csv)?;

    let mut pairs = s.common_pairs()?;
    pairs.extend(cfg.to_kv());
    pairs.push(("topologies".into(), names.join(",")));
    out.write_snapshot(&pairs)?;
    println!("wrote {}", out.path.display());
    Ok(())
}

pub fn moore(s: &Settings) -> Result<()> {
    let mut known: Vec<&str> = Vec::new();
    known.extend_from_slice(run::COMMON_KEYS);
    known.extend_from_slice(run::TOPOLOGY_KEYS);
    s.kv.reject_unknown(&known)?;

    let n = s.n()?;
    let names = s.topology_names(&[]);
    let dmax = s.opt_dmax()?;
    if dmax.is_none() && names.is_empty() {
        return Err(Error::Config(
            "moore needs --dmax for a headline bound or a topologies key for per-set gaps".into(),
        ));
    }

    let mut report = json!({ "command": "moore", "n": n });
    if let Some(d) = dmax {
        let bound = moore_min_diameter(u64::from(n), u64::from(d))?;
        println!("moore bound: n={n} degree={d} -> diameter >= {bound}");
        report["degree"] = json!(d);
        report["bound"] = json!(bound);
    }

    let mut rows = Vec::new();
    let mut csv = String::from("topology,n,degree,diameter,moore_bound,gap\n");
    for name in &names {
        let named = resolve_topology(s, name)?;
        let gs = match &named.kind {
            Kind::Set(gs) => gs.clone(),
            Kind::Broadcast => baselines::complete_generators(s.n()?)?,
        };
        let diameter = cayleycomm::graph::diameter(&gs);
        let bound = moore_min_diameter(u64::from(gs.modulus()), u64::from(gs.degree()))?;
        let gap = diameter.finite().map(|d| i64::from(d) - i64::from(bound));
        println!(
            "{}: degree={} diameter={} bound={} gap={}",
            named.name,
            gs.degree(),
            diameter,
            bound,
            gap.map_or("inf".to_string(), |g| g.to_string())
        );
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            named.name,
            gs.modulus(),
            gs.degree(),
            diameter,
            bound,
            gap.map_or("inf".to_string(), |g| g.to_string())
        ));
        rows.push(json!({
            "topology": named.name,
            "n": gs.modulus(),
            "degree": gs.degree(),
            "diameter": diameter_value(diameter),
            "moore_bound": bound,
            "gap": gap.map_or(json!("inf"), |g| json!(g)),
        }));
    }
    if !rows.is_empty() {
        report["topologies"] = json!(rows);
    }

    let out = s.outdir("moore")?;
    out.write("moore.json", &pretty(&report))?;
    if !names.is_empty() {
        out.write("moore.csv", &csv)?;
    }
    let mut pairs = s.common_pairs()?;
    if !names.is_empty() {
        pairs.push(("topologies".into(), names.join(",")));
    }
    out.write_snapshot(&pairs)?;
    println!("wrote {}", out.path.display());
    Ok(())
}

fn set_report(gs: &GeneratorSet) -> serde_json::Value {
    let profile = bfs_distances(gs);
    json!({
        "set": gs.to_string(),
        "offsets": gs.offsets(),
        "degree": gs.degree(),
        "edges": gs.edge_count(),
        "diameter": diameter_value(profile.diameter()),
        "avg_path_length": profile.avg_path_length(),
        "propagation_score": propagation_score(gs),
    })
}

fn pretty(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("json serialization");
    text.push('\n');
    text
}

fn diameter_value(d: Diameter) -> serde_json::Value {
    match d {
        Diameter::Finite(v) => json!(v),
        Diameter::Infinite => json!("inf"),
    }
}

fn opt_u32(v: Option<u32>) -> String {
    v.map_or("inf".to_string(), |v| v.to_string())
}

fn threshold_label(threshold: f64) -> String {
    let pct = threshold * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("t{}", pct.round() as u32)
    } else {
        format!("t{pct}")
    }
}

fn pool_label(mode: &PoolMode) -> &'static str {
    match mode {
        PoolMode::AllCoprime => "all",
        PoolMode::PrimesCoprime => "primes",
        PoolMode::Explicit(_) => "file",
    }
}
