use std::path::Path;
use std::process::{Child, Command, Output, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use facts::config::CredentialsFile;
use facts::sim::accuracy::read_csv;

const FACTS: &str = env!("CARGO_BIN_EXE_facts");
const SIM: &str = env!("CARGO_BIN_EXE_facts-sim");

fn run(bin: &str, args: &[&str]) -> Output {
    Command::new(bin).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn accuracy_csv_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("acc.csv");
    let csv_s = csv.to_str().unwrap();
    stdout(&run(
        SIM,
        &["accuracy", "--n", "100000", "--t", "100,1000", "--trials", "20", "--out", csv_s],
    ));
    let rows = read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 10);
    let out = dir.path().join("plots");
    let listed = stdout(&run(SIM, &["plot", "--in", csv_s, "--out", out.to_str().unwrap()]));
    assert_eq!(listed.lines().count(), 2);
    assert!(out.join("accuracy.dat").exists() && out.join("accuracy.gp").exists());
    assert!(!run(SIM, &["plot", "--in", "/nonexistent.csv", "--out", out.to_str().unwrap()]).status.success());
}

#[test]
fn tail_reports_both_arms() {
    let text = stdout(&run(SIM, &["tail", "--trials", "20"]));
    assert!(text.contains("at 33 complaints"), "{text}");
    assert!(text.contains("at 137 complaints"), "{text}");
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn serve(creds: &Path) -> Server {
    let child = Command::new(FACTS)
        .args(["serve", "--listen", "127.0.0.1:0", "--users", "3", "--n", "1000", "--t", "50"])
        .arg("--credentials")
        .arg(creds)
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let start = Instant::now();
    while CredentialsFile::load(creds).is_err() {
        assert!(start.elapsed() < Duration::from_secs(10), "server did not start");
        thread::sleep(Duration::from_millis(20));
    }
    Server(child)
}

#[test]
fn message_lifecycle_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let creds = dir.path().join("creds.json");
    let _server = serve(&creds);
    let c = creds.to_str().unwrap();
    let tag_file = dir.path().join("tag.bin");
    let tag_file_s = tag_file.to_str().unwrap();

    let tag = stdout(&run(
        FACTS,
        &["originate", "--credentials", c, "--user", "user-0", "--message", "hi", "--tag-out", tag_file_s],
    ));
    let tag = tag.trim();
    assert_eq!(hex::decode(tag).unwrap(), std::fs::read(&tag_file).unwrap());

    let fwd = stdout(&run(
        FACTS,
        &["forward", "--credentials", c, "--user", "user-1", "--message", "hi", "--tag", tag],
    ));
    assert_eq!(fwd.trim(), tag);

    let ok = run(FACTS, &["recv-verify", "--credentials", c, "--message", "hi", "--tag-file", tag_file_s]);
    assert_eq!(stdout(&ok).trim(), "accepted");
    let bad = run(FACTS, &["recv-verify", "--credentials", c, "--message", "ho", "--tag", tag]);
    assert!(!bad.status.success());
    assert_eq!(String::from_utf8_lossy(&bad.stdout).trim(), "discarded");

    let complained = stdout(&run(
        FACTS,
        &["complain", "--audit", "--credentials", c, "--user", "user-2", "--message", "hi", "--tag", tag],
    ));
    assert!(complained.starts_with("accepted"), "{complained}");
    assert!(complained.contains("below threshold"), "{complained}");
    let check = stdout(&run(FACTS, &["audit-check", "--credentials", c, "--message", "hi", "--tag", tag]));
    assert!(check.starts_with("below threshold: "), "{check}");

    let unknown = run(FACTS, &["originate", "--credentials", c, "--user", "nobody", "--message", "hi"]);
    assert!(!unknown.status.success());
}
