use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};

use serde_json::{json, Value};

const DOMAIN_A: &str = "2gzyxa5ihm7nsggfxnu52rck2vv4rvmdlkiu3zzui5du4xyclen53wid.onion";
const DOMAIN_B: &str = "aaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaam2dqd.onion";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_recognizer"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_with_input(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, name: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(name))
        .map(|v| v.trim().to_owned())
        .unwrap_or_else(|| panic!("no {name} in {text}"))
}

fn cli_init(dir: &Path, seed: &str) -> (String, String) {
    let db = dir.join("r.db");
    let out = run(&[
        "init",
        "--domain",
        DOMAIN_A,
        "--domain",
        DOMAIN_B,
        "--db",
        db.to_str().unwrap(),
        "--seed",
        seed,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("WARNING"));
    let text = stdout(&out);
    (field(&text, "passphrase:"), field(&text, "fingerprint:"))
}

#[test]
fn init_writes_db_and_picture() {
    let dir = tempfile::tempdir().unwrap();
    let (phrase, fp) = cli_init(dir.path(), "2a");
    assert_eq!(phrase.split('-').count(), 2);
    // m = 20 bits, printed as three bytes
    assert_eq!(fp.len(), 6);
    let db = std::fs::read(dir.path().join("r.db")).unwrap();
    assert_eq!(&db[..4], b"RCGZ");
    assert_eq!(db.len(), 11 + 102 * 32 + 4);
    let svg = std::fs::read_to_string(dir.path().join("r.svg")).unwrap();
    assert!(svg.starts_with("<svg "));
    assert!(!String::from_utf8_lossy(&db).contains(&phrase));
}

#[test]
fn check_reproduces_fingerprint_for_each_member() {
    let dir = tempfile::tempdir().unwrap();
    let (phrase, fp) = cli_init(dir.path(), "7");
    let db = dir.path().join("r.db");
    for domain in [DOMAIN_A, &format!("http://{DOMAIN_B}/index.html")] {
        let out = run_with_input(&["check", domain, "--db", db.to_str().unwrap()], &format!("{phrase}\n"));
        assert!(out.status.success());
        assert_eq!(field(&stdout(&out), "fingerprint:"), fp);
    }
    let session = std::fs::read_to_string(dir.path().join("session.svg")).unwrap();
    assert_eq!(session, std::fs::read_to_string(dir.path().join("r.svg")).unwrap());
}

#[test]
fn check_reprompts_on_typo() {
    let dir = tempfile::tempdir().unwrap();
    let (phrase, fp) = cli_init(dir.path(), "8");
    let words: Vec<&str> = phrase.split('-').collect();
    let mut typo: Vec<char> = words[1].chars().collect();
    typo[0] = if typo[0] == 'q' { 'x' } else { 'q' };
    let typo: String = typo.into_iter().collect();
    let input = format!("{}-{typo}\n{phrase}\n", words[0]);
    let db = dir.path().join("r.db");
    let out = run_with_input(&["check", DOMAIN_A, "--db", db.to_str().unwrap()], &input);
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(&format!("word 2: not in the list, did you mean \"{}\"?", words[1])), "{err}");
    assert_eq!(field(&stdout(&out), "fingerprint:"), fp);
}

#[test]
fn check_without_passphrase_fails() {
    let dir = tempfile::tempdir().unwrap();
    cli_init(dir.path(), "9");
    let db = dir.path().join("r.db");
    let out = run_with_input(&["check", DOMAIN_A, "--db", db.to_str().unwrap()], "");
    assert!(!out.status.success());
}

#[test]
fn single_domain_needs_decoy() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("one.db");
    let out = run(&["init", "--domain", DOMAIN_A, "--db", db.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least two domains"));
    let out = run(&["init", "--domain", DOMAIN_A, "--decoy", "--db", db.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("decoy"));
}

#[test]
fn init_rejects_bad_domain() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("x.db");
    let out = run(&["init", "--domain", DOMAIN_A, "--domain", "example.com", "--db", db.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("domain 2"));
    assert!(!db.exists());
}

#[test]
fn params_json() {
    let out = run(&["params", "--json", "-N", "2,5"]);
    let rows: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(rows[0]["items"], 2);
    assert_eq!(rows[1]["words"], 8);
    assert_eq!(rows[1]["m"], 21);
}

#[test]
fn wordlist_verify_and_build() {
    let out = run(&["wordlist", "verify", "--json"]);
    assert!(out.status.success());
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["size"], 1449);
    assert_eq!(report["passed"], true);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("list.txt");
    assert!(run(&["wordlist", "build", "--out", path.to_str().unwrap()]).status.success());
    let built = std::fs::read_to_string(&path).unwrap();
    assert_eq!(built, onion_recognizer::passcode::SHIPPED_WORDLIST);

    std::fs::write(&path, "alpha\nalphb\n").unwrap();
    let out = run(&["wordlist", "verify", "--file", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn bench_commands() {
    let out = run(&["bench", "universality", "--json"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["max_deviation"], 0);

    let out = run(&["bench", "collision", "--trials", "2000", "--adversary", "near-miss", "--json"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["trials"], 2000);
    assert!(v["empirical"].as_f64().unwrap() <= 0.2);

    let out = run(&["bench", "lemma", "--instances", "50"]);
    assert!(stdout(&out).contains("passed     50"));

    assert!(!run(&["bench", "collision", "--adversary", "psychic"]).status.success());
    assert!(!run(&["bench", "universality", "--n", "8", "--k", "3"]).status.success());
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn post(addr: &str, body: &str) -> (u16, Value) {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(
        stream,
        "POST / HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    let status = response[9..12].parse().unwrap();
    let body = response.split("\r\n\r\n").nth(1).unwrap();
    (status, serde_json::from_str(body).unwrap())
}

#[test]
fn bridge_serves_init_check_and_validate() {
    let mut child = bin()
        .args(["bridge", "serve", "--port", "0"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let _server = Server(child);
    let addr = line.trim().strip_prefix("listening on http://").unwrap().to_owned();
    assert!(addr.starts_with("127.0.0.1:"));

    let (status, init) = post(&addr, &json!({"id": 1, "kind": "init", "domains": [DOMAIN_A, DOMAIN_B], "seed": "2a"}).to_string());
    assert_eq!(status, 200);
    assert_eq!(init["kind"], "initResult");
    assert_eq!(init["id"], 1);

    // same seed through the CLI gives the same passphrase and picture
    let dir = tempfile::tempdir().unwrap();
    let (phrase, fp) = cli_init(dir.path(), "2a");
    let words: Vec<String> = serde_json::from_value(init["passphraseWords"].clone()).unwrap();
    assert_eq!(words.join("-"), phrase);
    assert_eq!(init["fingerprintHex"], fp.as_str());
    assert_eq!(init["svg"], std::fs::read_to_string(dir.path().join("r.svg")).unwrap().as_str());

    let (_, check) = post(
        &addr,
        &json!({"id": 2, "kind": "check", "dbBase64": init["dbBase64"], "passphrase": phrase, "domain": DOMAIN_B}).to_string(),
    );
    assert_eq!(check["kind"], "checkResult");
    assert_eq!(check["fingerprintHex"], fp.as_str());

    let (_, v) = post(&addr, &json!({"id": 3, "kind": "validate", "partial": format!("{}-", words[0])}).to_string());
    assert_eq!(v["words"][0]["status"], "accepted");
    assert_eq!(v["id"], 3);

    let (_, bad) = post(&addr, "{");
    assert_eq!(bad["code"], "bad-request");
}
