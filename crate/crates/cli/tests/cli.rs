use std::path::Path;
use std::process::{Command, Output};

use lifted_tfhe::netlist::{format_bits, Netlist};
use lifted_tfhe::rng::DetRng;
use lifted_tfhe::ParameterSet;
use lifted_tfhe_cli::PRESET_ENV;
use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lifted-tfhe")).args(args).env_remove(PRESET_ENV).output().unwrap()
}

fn ok_json(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn put(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const ADDER: &str = "\
INPUT a, b, cin
OUTPUT sum, cout
t = XOR(a, b)
sum = XOR(t, cin)
u = AND(a, b)
v = AND(t, cin)
cout = OR(u, v)
";

#[test]
fn nand_gate_of_ones_is_zero() {
    let d = tempfile::tempdir().unwrap();
    let net = put(d.path(), "nand.net", "INPUT a, b\nOUTPUT y\ny = NAND(a, b)\n");
    let bits = put(d.path(), "in.bits", "1 1\n");
    let r = ok_json(&cli(&["eval", "--netlist", &net, "--inputs", &bits, "--seed", "3"]));
    assert_eq!(r["output_bits"], serde_json::json!([[0]]));
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["seed"], 3);
    assert_eq!(r["preset"], "default");
    assert_eq!(r["counters"]["bootstraps"], 1);
    assert_eq!(r["gate_counters"][0]["kind"], "NAND");
}

#[test]
fn full_adder_over_all_inputs() {
    let d = tempfile::tempdir().unwrap();
    let net = put(d.path(), "adder.net", ADDER);
    let rows: Vec<Vec<u8>> = (0..8u8).map(|x| vec![x & 1, x >> 1 & 1, x >> 2 & 1]).collect();
    let bits = put(d.path(), "in.bits", &format_bits(&rows));
    let r = ok_json(&cli(&["eval", "--netlist", &net, "--inputs", &bits, "--mode", "pipelined"]));
    let want: Vec<Vec<u8>> = rows
        .iter()
        .map(|r| {
            let total = r[0] + r[1] + r[2];
            vec![total % 2, total / 2]
        })
        .collect();
    assert_eq!(r["output_bits"], serde_json::json!(want));
    assert_eq!(r["counters"]["bootstraps"], 8 * 5);
}

#[test]
fn netlist_errors_exit_with_data_status() {
    let d = tempfile::tempdir().unwrap();
    let bits = put(d.path(), "in.bits", "1\n");
    let cyc = put(d.path(), "cyc.net", "INPUT a\nx = AND(a, z)\ny = NOT(x)\nz = OR(y, a)\n");
    let out = cli(&["eval", "--netlist", &cyc, "--inputs", &bits]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("cycle") && err.contains("x -> y -> z -> x"), "{err}");
    let arity = put(d.path(), "arity.net", "INPUT a\ny = NAND(a)\n");
    let out = cli(&["eval", "--netlist", &arity, "--inputs", &bits]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("input"));
    let wide = put(d.path(), "wide.bits", "1 0\n");
    let one = put(d.path(), "one.net", "INPUT a\ny = NOT(a)\n");
    assert_eq!(cli(&["eval", "--netlist", &one, "--inputs", &wide]).status.code(), Some(3));
}

#[test]
fn usage_errors_exit_with_status_two() {
    assert_eq!(cli(&["keygen"]).status.code(), Some(2));
    assert_eq!(cli(&["keygen", "--out", "/tmp/x", "--m", "9"]).status.code(), Some(2));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cli(&["failures", "--beta", "1"]).status.code(), Some(2));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
}

#[test]
fn keygen_is_deterministic_and_counts_keys() {
    let d = tempfile::tempdir().unwrap();
    let (a, b, c) = (d.path().join("a"), d.path().join("b"), d.path().join("c"));
    let ra = ok_json(&cli(&["keygen", "--out", s(&a), "--seed", "7"]));
    ok_json(&cli(&["keygen", "--out", s(&b), "--seed", "7"]));
    let rc = ok_json(&cli(&["keygen", "--out", s(&c), "--seed", "7", "--m", "1"]));
    let p = ParameterSet::default();
    assert_eq!(ra["tgsw_count"], p.lwe_dimension.div_ceil(2) * 3);
    assert_eq!(ra["keys_per_group"], 3);
    assert_eq!(rc["tgsw_count"], p.lwe_dimension);
    for f in ["secret.key", "cloud.key"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
    assert_eq!(ra["cloud_key_bytes"], std::fs::metadata(a.join("cloud.key")).unwrap().len());
}

#[test]
fn preset_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let text = ParameterSet::default().with_unroll(3).unwrap().to_text();
    let preset = put(d.path(), "m3.params", &text);
    let out = Command::new(env!("CARGO_BIN_EXE_lifted-tfhe"))
        .args(["keygen", "--out", s(&d.path().join("k"))])
        .env(PRESET_ENV, &preset)
        .output()
        .unwrap();
    let r = ok_json(&out);
    assert_eq!(r["keys_per_group"], 7);
    assert_eq!(r["preset"], preset.as_str());
    let bad = put(d.path(), "bad.params", "version = 1\nring_degree = 3\n");
    assert_eq!(cli(&["keygen", "--out", s(&d.path().join("j")), "--preset", &bad]).status.code(), Some(3));
}

#[test]
fn file_chain_and_echo_check() {
    let d = tempfile::tempdir().unwrap();
    let keys = d.path().join("keys");
    let other = d.path().join("other");
    ok_json(&cli(&["keygen", "--out", s(&keys), "--seed", "5"]));
    ok_json(&cli(&["keygen", "--out", s(&other), "--seed", "5", "--m", "1"]));
    let net = put(d.path(), "adder.net", ADDER);
    let bits = put(d.path(), "in.bits", "1 1 0\n0 1 1\n");
    let ct = d.path().join("in.ct");
    let out_ct = d.path().join("out.ct");
    let r = ok_json(&cli(&["encrypt", "--keys", s(&keys), "--inputs", &bits, "--out", s(&ct)]));
    assert_eq!(r["ciphertexts"], 6);
    let dec = cli(&["decrypt", "--keys", s(&keys), "--in", s(&ct), "--width", "3"]);
    assert_eq!(String::from_utf8_lossy(&dec.stdout), "1 1 0\n0 1 1\n");
    let r = ok_json(&cli(&["eval", "--netlist", &net, "--ciphertexts", s(&ct), "--keys", s(&keys), "--out", s(&out_ct)]));
    assert_eq!(r["ciphertexts"], 4);
    let dec = cli(&["decrypt", "--keys", s(&keys), "--in", s(&out_ct), "--width", "2"]);
    assert_eq!(dec.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&dec.stdout), "0 1\n0 1\n");
    let refused = cli(&["decrypt", "--keys", s(&other), "--in", s(&out_ct)]);
    assert_eq!(refused.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("parameter echo mismatch"));
    std::fs::write(&ct, b"TGLW").unwrap();
    assert_eq!(cli(&["decrypt", "--keys", s(&keys), "--in", s(&ct)]).status.code(), Some(3));
}

#[test]
fn random_netlists_round_trip() {
    let d = tempfile::tempdir().unwrap();
    let keys = d.path().join("keys");
    ok_json(&cli(&["keygen", "--out", s(&keys), "--seed", "11"]));
    let mut rng = DetRng::new(12);
    for i in 0..100 {
        let inputs = 1 + rng.below(4) as usize;
        let gates = 1 + rng.below(16) as usize;
        let netlist = Netlist::random(&mut rng, inputs, gates);
        let row: Vec<u8> = (0..inputs).map(|_| rng.bit()).collect();
        let net = put(d.path(), "r.net", &netlist.to_text());
        let bits = put(d.path(), "r.bits", &format_bits(std::slice::from_ref(&row)));
        let r = ok_json(&cli(&["eval", "--netlist", &net, "--inputs", &bits, "--keys", s(&keys), "--seed", &i.to_string()]));
        assert_eq!(r["output_bits"], serde_json::json!([netlist.eval_plain(&row).unwrap()]), "netlist {i}:\n{}", netlist.to_text());
    }
}

#[test]
fn failures_command_and_expect_zero() {
    let out = cli(&["failures", "--trials", "40", "--expect-zero"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let rec = reader.records().next().unwrap().unwrap();
    let col = |name: &str| &rec[headers.iter().position(|h| h == name).unwrap()];
    assert_eq!(col("schema_version"), "1");
    assert_eq!(col("failures"), "0");
    assert_eq!(col("beta"), "64");
    let out = cli(&["failures", "--trials", "20", "--beta", "8", "--expect-zero"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn study_commands() {
    let out = cli(&["error-study", "--trials", "2"]);
    let text = String::from_utf8(ok_bytes(&out)).unwrap();
    assert_eq!(text.lines().count(), 7);
    let out = cli(&["noise-study", "--m", "1,2", "--trials", "4", "--format", "json"]);
    let r: Value = serde_json::from_slice(&ok_bytes(&out)).unwrap();
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["bk_key_count"], 1);
    assert_eq!(rows[1]["bk_key_count"], 3);
    let out = cli(&["noise-study", "--m", "3", "--trials", "2"]);
    let text = String::from_utf8(ok_bytes(&out)).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let rec = reader.records().next().unwrap().unwrap();
    assert_eq!(&rec[headers.iter().position(|h| h == "key_count").unwrap()], "7");
}

fn ok_bytes(out: &Output) -> Vec<u8> {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout.clone()
}

#[test]
fn bench_reports_transform_accounting() {
    let r = ok_json(&cli(&["bench", "--m", "1,2", "--trials", "2"]));
    let p = ParameterSet::default();
    let rows = r["rows"].as_array().unwrap();
    for (row, m) in rows.iter().zip([1usize, 2]) {
        let groups = p.lwe_dimension.div_ceil(m) as f64;
        assert_eq!(row["external_products_per_gate"].as_f64().unwrap(), groups);
        assert_eq!(row["transform_calls_per_gate"].as_f64().unwrap(), groups * (2.0 * 3.0 + 2.0));
        assert!(row["gates_per_second"].as_f64().unwrap() > 0.0);
    }
    assert_eq!(r["seed"], 1);
    assert_eq!(r["preset"], "default");
}
