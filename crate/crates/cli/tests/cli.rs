use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn akaprime(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_akaprime")).args(args).env_remove("AKAPRIME_SEED").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn provision_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let o = akaprime(&["provision", "-n", "40", "--seed", "5", "--out", arg(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());

    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let imsis: BTreeSet<String> = doc["subscribers"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            let s = &r["supi"];
            format!("{}{}{}", s["mcc"].as_str().unwrap(), s["mnc"].as_str().unwrap(), s["msin"].as_str().unwrap())
        })
        .collect();
    assert_eq!(imsis.len(), 40);
    assert!(imsis.iter().all(|i| i.len() == 15 && i.bytes().all(|b| b.is_ascii_digit())));
}

#[test]
fn provisioned_store_runs() {
    let dir = tempfile::tempdir().unwrap();
    let subs = dir.path().join("subs.json");
    assert!(akaprime(&["provision", "-n", "3", "--seed", "1", "--conceal", "--out", arg(&subs)]).status.success());
    let o = akaprime(&["run", "--scenario", arg(&scenarios().join("faultless.json")), "--subscribers", arg(&subs)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("outcome=SUCCESS expected=SUCCESS"));
}

#[test]
fn run_directory_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let traces = dir.path().join("traces");
    let o = akaprime(&["run", "--scenario", arg(&scenarios()), "--trace-out", arg(&traces)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).lines().any(|l| l.ends_with(" MISMATCH")));

    let o = akaprime(&[
        "replay",
        "--trace",
        arg(&traces.join("replay.jsonl")),
        "--scenario",
        arg(&scenarios().join("replay.json")),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("verdict=SQN_FAILURE expected=SQN_FAILURE"));

    // A trace checked against the wrong expectation is a mismatch.
    let o = akaprime(&[
        "replay",
        "--trace",
        arg(&traces.join("replay.jsonl")),
        "--scenario",
        arg(&scenarios().join("faultless.json")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn run_traces_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    for out in [&a, &b] {
        let o =
            akaprime(&["run", "--scenario", arg(&scenarios().join("lossy_reordering.json")), "--trace-out", arg(out)]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("wrong.json");
    std::fs::write(
        &sc,
        format!(
            r#"{{"name":"wrong","subscribers":{:?},"rng_seed":1,"method":"EAP_TLS","expected_outcome":"SUCCESS"}}"#,
            scenarios().join("subscribers/default.json")
        ),
    )
    .unwrap();
    let o = akaprime(&["run", "--scenario", arg(&sc)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("outcome=METHOD_REJECTED expected=SUCCESS"));
    assert!(stdout(&o).ends_with("MISMATCH\n"));

    let missing = dir.path().join("missing.json");
    let o = akaprime(&["run", "--scenario", arg(&scenarios().join("faultless.json")), "--subscribers", arg(&missing)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.json"));

    std::fs::write(&sc, r#"{"name":"x","subscribers":"s.json","rng_seed":1,"colour":"red"}"#).unwrap();
    assert_eq!(akaprime(&["run", "--scenario", arg(&sc)]).status.code(), Some(2));
}

#[test]
fn seed_env_overrides_scenario_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: Option<&str>, name: &str| {
        let out = dir.path().join(name);
        let mut c = Command::new(env!("CARGO_BIN_EXE_akaprime"));
        c.args(["run", "--scenario", arg(&scenarios().join("faultless.json")), "--trace-out", arg(&out)]);
        match seed {
            Some(s) => c.env("AKAPRIME_SEED", s),
            None => c.env_remove("AKAPRIME_SEED"),
        };
        assert!(c.status().unwrap().success());
        std::fs::read(out).unwrap()
    };
    assert_eq!(run(Some("99"), "a"), run(Some("99"), "b"));
    assert_ne!(run(Some("99"), "c"), run(None, "d"));
}

#[test]
fn compare_methods() {
    let a = akaprime(&["compare", "--scenario", arg(&scenarios().join("faultless.json"))]);
    let b = akaprime(&["compare", "--scenario", arg(&scenarios().join("faultless.json"))]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(rows.len(), 2);
    let (eap, fiveg) = (&rows[0], &rows[1]);
    assert_eq!(eap[0], "EAP-AKA'");
    assert_eq!(fiveg[0], "5G-AKA");
    let bytes = |r: &Vec<&str>| r[3].parse::<u64>().unwrap();
    assert!(bytes(eap) > bytes(fiveg));
    // Same AV, different anchor keys.
    assert_eq!(eap[4..6], fiveg[4..6]);
    assert_ne!(eap[6], fiveg[6]);
}

#[test]
fn federate_eduroam_request() {
    let fed = scenarios().join("federation");
    let run = |policy: &str| {
        let o = akaprime(&[
            "federate",
            "--policy",
            arg(&fed.join(policy)),
            "--requests",
            arg(&fed.join("requests.json")),
            "--subscribers",
            arg(&fed.join("subscribers.json")),
        ]);
        assert_eq!(o.status.code(), Some(0));
        stdout(&o)
    };
    let reject = run("policy_reject.json");
    assert!(reject.lines().next().unwrap().contains("Access-Reject for user 6724313930974708@"));
    assert!(reject.contains("(Misconfigured client: Unsupported 3G EAP-AKA' client! Rejected by org.)"));
    let accept = run("policy_accept.json");
    assert!(accept.lines().next().unwrap().starts_with("Sun May 22 00:03:13 2022: Access-Accept for user"));
    assert!(accept.lines().nth(1).unwrap().contains("(malformed identity)"));
}
