use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use akaprime_core::entities::provision as provision_store;
use akaprime_core::federation::{authenticate_federated, AccessRequest, LocalCore, PolicyTable};
use akaprime_core::harness::trace::{read_jsonl, to_jsonl};
use akaprime_core::harness::{replay_verdict, run_scenario, Scenario, ScenarioResult, TraceEvent};
use akaprime_core::{AuthMethod, ProtectionScheme, SubscriberStore};

use crate::Status;

pub fn provision(count: usize, seed: u64, mcc: &str, mnc: &str, conceal: bool, out: &Path) -> Result<Status> {
    let scheme = if conceal { ProtectionScheme::SymTest } else { ProtectionScheme::Null };
    let store = provision_store(count, seed, mcc, mnc, scheme)?;
    store.save(out)?;
    println!("provisioned {} subscribers into {}", store.len(), out.display());
    Ok(Status::Match)
}

fn format_event(e: &TraceEvent) -> String {
    let via = e.interface.map_or_else(|| "-".to_string(), |i| i.to_string());
    let mut flags = Vec::new();
    if e.flags.dropped {
        flags.push("dropped".to_string());
    }
    if e.flags.mutated {
        flags.push("mutated".to_string());
    }
    if e.flags.replayed {
        flags.push("replayed".to_string());
    }
    if let Some(err) = &e.flags.error {
        flags.push(format!("error={err}"));
    }
    if let Some(s) = &e.flags.ue_state {
        flags.push(format!("ue={s}"));
    }
    format!(
        "t={:<4} {:>8} -> {:<8} {:<12} {:<18} {}",
        e.tick,
        e.from.to_string(),
        e.to.to_string(),
        via,
        e.event,
        flags.join(" ")
    )
    .trim_end()
    .to_string()
}

/// Loads a scenario and its subscribers, applying CLI overrides.
fn prepare(path: &Path, subscribers: Option<&Path>, seed: Option<u64>) -> Result<(Scenario, SubscriberStore)> {
    let mut sc = Scenario::load(path)?;
    if let Some(s) = seed {
        sc.rng_seed = s;
    }
    if let Some(p) = subscribers {
        sc.subscribers = p.to_path_buf();
    }
    let store = SubscriberStore::load(&sc.subscribers)?;
    Ok((sc, store))
}

fn run_one(path: &Path, subscribers: Option<&Path>, seed: Option<u64>) -> Result<(Scenario, ScenarioResult)> {
    let (sc, store) = prepare(path, subscribers, seed)?;
    let result = run_scenario(&sc, &store).with_context(|| format!("scenario {}", path.display()))?;
    Ok((sc, result))
}

fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no *.json scenarios in {}", dir.display());
    }
    Ok(files)
}

pub fn run(
    scenario: &Path,
    subscribers: Option<&Path>,
    trace_out: Option<&Path>,
    seed: Option<u64>,
    verbose: bool,
) -> Result<Status> {
    if !scenario.is_dir() {
        let (sc, r) = run_one(scenario, subscribers, seed)?;
        if let Some(out) = trace_out {
            fs::write(out, to_jsonl(&r.trace)).with_context(|| format!("cannot write {}", out.display()))?;
        }
        return Ok(report(&sc, &r, verbose));
    }

    let files = scenario_files(scenario)?;
    if let Some(dir) = trace_out {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    // One event loop per scenario; nothing is shared between them.
    let results: Vec<Result<(Scenario, ScenarioResult)>> = std::thread::scope(|s| {
        let handles: Vec<_> = files.iter().map(|f| s.spawn(move || run_one(f, subscribers, seed))).collect();
        handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
    });

    let mut status = Status::Match;
    let mut config_error = None;
    for (file, res) in files.iter().zip(results) {
        match res {
            Ok((sc, r)) => {
                if let Some(dir) = trace_out {
                    let name = file.file_stem().expect("file name").to_string_lossy();
                    let out = dir.join(format!("{name}.jsonl"));
                    fs::write(&out, to_jsonl(&r.trace)).with_context(|| format!("cannot write {}", out.display()))?;
                }
                if report(&sc, &r, verbose) == Status::Mismatch {
                    status = Status::Mismatch;
                }
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                config_error.get_or_insert(e);
            }
        }
    }
    match config_error {
        Some(e) => Err(e.context("one or more scenarios could not run")),
        None => Ok(status),
    }
}

fn report(sc: &Scenario, r: &ScenarioResult, verbose: bool) -> Status {
    if verbose {
        for e in &r.trace {
            println!("  {}", format_event(e));
        }
    }
    let ok = r.outcome == sc.expected_outcome;
    println!(
        "{}: outcome={} expected={} ticks={} messages={} bytes={}{}",
        sc.name,
        r.outcome,
        sc.expected_outcome,
        r.stats.ticks,
        r.stats.messages,
        r.stats.bytes,
        if ok { "" } else { " MISMATCH" }
    );
    if ok {
        Status::Match
    } else {
        Status::Mismatch
    }
}

fn fingerprint(bytes: Option<&[u8]>) -> String {
    bytes.map_or_else(|| "-".to_string(), |b| hex::encode(&b[..4]))
}

pub fn compare(scenario: &Path, subscribers: Option<&Path>, seed: Option<u64>) -> Result<Status> {
    let (sc, store) = prepare(scenario, subscribers, seed)?;
    let rec = match &sc.subscriber {
        Some(imsi) => store.get(imsi).with_context(|| format!("subscriber {imsi} is not provisioned"))?,
        None => store.records().first().context("subscriber store is empty")?,
    };
    for m in [AuthMethod::EapAkaPrime, AuthMethod::FiveGAka] {
        if !rec.allowed_methods.contains(&m) {
            bail!("subscriber {} does not allow {m}", rec.supi.imsi());
        }
    }

    println!(
        "{:<8} {:<8} {:>8} {:>6}  {:<8} {:<8} {:<8} {:<8}",
        "method", "outcome", "messages", "bytes", "rand", "autn", "k_ausf", "k_seaf"
    );
    let mut status = Status::Match;
    for m in [AuthMethod::EapAkaPrime, AuthMethod::FiveGAka] {
        let mut run = sc.clone();
        run.method = Some(m);
        let r = run_scenario(&run, &store)?;
        if r.outcome != sc.expected_outcome {
            status = Status::Mismatch;
        }
        let av = r.av.as_ref();
        println!(
            "{:<8} {:<8} {:>8} {:>6}  {:<8} {:<8} {:<8} {:<8}",
            m.to_string(),
            r.outcome.to_string(),
            r.stats.messages,
            r.stats.bytes,
            fingerprint(av.map(|a| &a.rand[..])),
            fingerprint(av.map(|a| &a.autn[..])),
            fingerprint(r.evidence.ausf_k_ausf.as_ref().map(|k| &k[..])),
            fingerprint(r.evidence.amf_k_seaf.as_ref().map(|k| &k[..])),
        );
    }
    Ok(status)
}

pub fn replay(trace: &Path, scenario: Option<&Path>, verbose: bool) -> Result<Status> {
    let file = fs::File::open(trace).with_context(|| format!("cannot open {}", trace.display()))?;
    let events = read_jsonl(BufReader::new(file))?;
    if verbose {
        for e in &events {
            println!("  {}", format_event(e));
        }
    }
    let verdict = replay_verdict(&events)?;
    let expected = scenario.map(Scenario::load).transpose()?.map(|s| s.expected_outcome);
    match expected {
        Some(exp) => {
            let ok = exp == verdict;
            println!("verdict={verdict} expected={exp} events={}{}", events.len(), if ok { "" } else { " MISMATCH" });
            Ok(if ok { Status::Match } else { Status::Mismatch })
        }
        None => {
            println!("verdict={verdict} events={}", events.len());
            Ok(Status::Match)
        }
    }
}

pub fn federate(
    policy: &Path,
    requests: &Path,
    subscribers: Option<&Path>,
    seed: u64,
    verbose: bool,
) -> Result<Status> {
    let table = PolicyTable::load(policy)?;
    let text = fs::read_to_string(requests).with_context(|| format!("cannot read {}", requests.display()))?;
    let reqs: Vec<AccessRequest> =
        serde_json::from_str(&text).with_context(|| format!("malformed requests in {}", requests.display()))?;
    let store = match subscribers {
        Some(p) => SubscriberStore::load(p)?,
        None => SubscriberStore::new(),
    };
    let core = LocalCore::new(store, seed);
    for req in &reqs {
        let d = authenticate_federated(req, &table, &core);
        println!("{}", d.log_line);
        if verbose {
            if let Some(run) = &d.backend {
                for e in &run.trace {
                    println!("  {}", format_event(e));
                }
            }
        }
    }
    Ok(Status::Match)
}
