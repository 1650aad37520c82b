use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn geewe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geewe"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const P3: &str = r#"{"n":3,"s":0,"t":2,"edges":[
    {"a":0,"b":1,"lower":"1","upper":"2","actual":"1"},
    {"a":1,"b":2,"lower":"1","upper":"2","actual":"1"}]}"#;

#[test]
fn generate_recursive_has_eight_vertices() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rec.json");
    let o = geewe(&[
        "generate",
        "recursive",
        "--k",
        "2",
        "--depth",
        "1",
        "--alpha",
        "2",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["family"], "recursive");
    assert_eq!(doc["instance"]["n"], 8);
    let o = geewe(&["validate", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn generate_random_is_reproducible() {
    let a = geewe(&["generate", "random", "--n", "9", "--seed", "7"]);
    let b = geewe(&["generate", "random", "--n", "9", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let doc = json(&a);
    assert!(doc["edges"].as_array().unwrap().iter().all(|e| e["actual"].is_string()));
}

#[test]
fn run_path_of_three_has_ratio_one() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("p3.json");
    fs::write(&inst, P3).unwrap();
    let o = geewe(&["run", path_str(&inst), "--explorer", "adaptive"]);
    assert!(o.status.success());
    let r = json(&o);
    assert_eq!(r["ratio"], "1/1");
    assert_eq!(r["offline_kind"], "exact");
}

#[test]
fn run_complete_adversary_k4() {
    let o = geewe(&[
        "run",
        "--family",
        "complete",
        "--k",
        "4",
        "--alpha",
        "2",
        "--explorer",
        "adaptive",
    ]);
    assert!(o.status.success());
    let r = json(&o);
    assert_eq!(r["online_cost"], "10/1");
    assert_eq!(r["offline_cost"], "7/1");
}

#[test]
fn run_recursive_precompute_within_alpha() {
    let o = geewe(&[
        "run",
        "--family",
        "recursive",
        "--k",
        "2",
        "--depth",
        "2",
        "--alpha",
        "2",
        "--explorer",
        "precompute",
    ]);
    assert!(o.status.success());
    let r = json(&o);
    let ratio = geewe::rational::parse(r["ratio"].as_str().unwrap()).unwrap();
    assert!(ratio <= geewe::rational::int(2));
}

#[test]
fn oracle_on_small_instances() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("p3.json");
    fs::write(&inst, P3).unwrap();
    let o = geewe(&["oracle", path_str(&inst)]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("cost 2/1\nwalk 0 1 2"), "{}", stdout(&o));

    let mut edges = Vec::new();
    for a in 0..4 {
        for b in a + 1..4 {
            edges.push(format!(r#"{{"a":{a},"b":{b},"lower":"1","upper":"1","actual":"1"}}"#));
        }
    }
    let k4 = format!(r#"{{"n":4,"s":0,"t":3,"edges":[{}]}}"#, edges.join(","));
    fs::write(&inst, k4).unwrap();
    let o = geewe(&["oracle", path_str(&inst), "--format", "json"]);
    assert_eq!(json(&o)["cost"], "3/1");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("x.json");

    // unknown flag and unknown explorer are invalid input
    assert_eq!(geewe(&["run", "--bogus"]).status.code(), Some(1));
    fs::write(&inst, P3).unwrap();
    assert_eq!(
        geewe(&["run", path_str(&inst), "--explorer", "greedy"]).status.code(),
        Some(1)
    );

    // actual outside its interval
    fs::write(&inst, P3.replace(r#""actual":"1"}]"#, r#""actual":"3"}]"#)).unwrap();
    assert_eq!(geewe(&["validate", path_str(&inst)]).status.code(), Some(1));
    assert_eq!(geewe(&["oracle", path_str(&inst)]).status.code(), Some(1));

    // missing actuals
    fs::write(&inst, P3.replace(r#","actual":"1""#, "")).unwrap();
    assert_eq!(geewe(&["oracle", path_str(&inst)]).status.code(), Some(1));
    assert_eq!(geewe(&["validate", path_str(&inst)]).status.code(), Some(0));

    // a path on 140 vertices exceeds every exact solver
    let edges: Vec<String> = (0..139)
        .map(|i| format!(r#"{{"a":{i},"b":{},"lower":"1","upper":"1","actual":"1"}}"#, i + 1))
        .collect();
    fs::write(
        &inst,
        format!(r#"{{"n":140,"s":0,"t":139,"edges":[{}]}}"#, edges.join(",")),
    )
    .unwrap();
    assert_eq!(geewe(&["oracle", path_str(&inst)]).status.code(), Some(2));

    // disconnected graph
    fs::write(
        &inst,
        r#"{"n":3,"s":0,"t":2,"edges":[{"a":0,"b":1,"lower":"1","upper":"1"}]}"#,
    )
    .unwrap();
    assert_eq!(geewe(&["validate", path_str(&inst)]).status.code(), Some(1));
}

#[test]
fn sweep_csv_and_json_agree_and_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    fs::write(
        &cfg,
        r#"{"family":"random","n":[5,6],"alpha":["3/2"],"mixed":true,
            "explorers":["precompute","adaptive","nn"],"seeds":[1,2,3]}"#,
    )
    .unwrap();
    let csv1 = geewe(&["sweep", path_str(&cfg)]);
    let csv2 = geewe(&["sweep", path_str(&cfg)]);
    assert!(csv1.status.success(), "{}", String::from_utf8_lossy(&csv1.stderr));
    assert_eq!(csv1.stdout, csv2.stdout);
    let text = stdout(&csv1);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "family,k,depth,alpha,m,n,seed,explorer,online_cost,offline_cost,offline_kind,ratio,theoretical_bound,bound_satisfied"
    );
    assert_eq!(lines.count(), 2 * 3 * 3);

    let out = dir.path().join("rows.json");
    let o = geewe(&["sweep", path_str(&cfg), "--format", "json", "--out", path_str(&out)]);
    assert!(o.status.success());
    let from_json = geewe::report::rows_from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    let from_csv = geewe::report::rows_from_csv(&text).unwrap();
    assert_eq!(from_json, from_csv);
    for row in &from_csv {
        if row.explorer == geewe::ExplorerKind::Precompute {
            assert!(row.bound_satisfied);
        }
        if row.offline_kind == geewe::engine::OfflineKind::Exact {
            assert!(row.ratio >= geewe::rational::int(1));
        }
    }
}

#[test]
fn sweep_failures_set_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    fs::write(
        &cfg,
        r#"{"family":"recursive","k":[1,2],"depth":[0],"alpha":["2"],"explorers":["nn"]}"#,
    )
    .unwrap();
    let o = geewe(&["sweep", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).lines().count(), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid_input"));
}
