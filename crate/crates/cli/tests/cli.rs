use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::time::{Duration, Instant};

use arbor_core::process_tree::{parse_ptml, serialize_ptml, Node, Operator, ProcessTree};
use arbor_testkit::{write_xes, XesCase};
use tempfile::TempDir;

fn arbor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arbor"))
        .args(args)
        .env("NO_COLOR", "1")
        .output()
        .expect("run arbor")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn fragment() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/road_fines_fragment.xes")
}

/// Log with variants (by id) `a b c` x3, `a c b` x2, `a d` x1.
fn write_log(dir: &TempDir) -> PathBuf {
    let mut cases: Vec<XesCase> = Vec::new();
    let mut push = |n: usize, acts: &[&str]| {
        for _ in 0..n {
            let id = format!("c{}", cases.len());
            cases.push((id, acts.iter().map(|a| (a.to_string(), None)).collect()));
        }
    };
    push(3, &["a", "b", "c"]);
    push(2, &["a", "c", "b"]);
    push(1, &["a", "d"]);
    let path = dir.path().join("log.xes");
    std::fs::write(&path, write_xes(&cases)).unwrap();
    path
}

fn write_tree(dir: &TempDir, name: &str, tree: &ProcessTree) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, serialize_ptml(tree)).unwrap();
    path
}

fn read_tree(path: &Path) -> ProcessTree {
    parse_ptml(&std::fs::read(path).unwrap()).unwrap()
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn variants_lists_fragment_as_tsv_and_json() {
    let out = arbor(&["variants", s(&fragment())]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "id\tcount\tshare\tactivities");
    assert_eq!(lines.len(), 4);
    assert!(lines[1..].iter().all(|l| l.split('\t').nth(1) == Some("1")));
    assert!(text.contains("Create Fine,Send Fine,Insert Fine Notification,Add penalty,Send for Credit Collection"));

    let out = arbor(&["variants", s(&fragment()), "--format", "json"]);
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 3);
    assert_eq!(rows[0]["share"], "0.333333");
}

#[test]
fn variants_of_empty_log_is_header_only() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("empty.xes");
    std::fs::write(&path, write_xes(&[])).unwrap();
    let out = arbor(&["variants", s(&path)]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "id\tcount\tshare\tactivities\n");
}

#[test]
fn unreadable_inputs_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.xes");
    std::fs::write(&bad, "<log><trace>").unwrap();
    assert_eq!(arbor(&["variants", s(&bad)]).status.code(), Some(2));
    assert_eq!(arbor(&["variants", "/nonexistent/log.xes"]).status.code(), Some(2));
    let log = write_log(&dir);
    assert_eq!(arbor(&["discover", s(&log), "--select", "most:3"]).status.code(), Some(2));
}

#[test]
fn discover_accepts_selected_variants_deterministically() {
    let dir = TempDir::new().unwrap();
    let log = write_log(&dir);
    let first = dir.path().join("first.ptml");
    let second = dir.path().join("second.ptml");
    let a = arbor(&["discover", s(&log), "--select", "top:2", "-o", s(&first)]);
    let b = arbor(&["discover", s(&log), "--select", "top:2", "-o", s(&second)]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);

    let tree = read_tree(&first);
    assert!(tree.accepts(&["a", "b", "c"]).unwrap());
    assert!(tree.accepts(&["a", "c", "b"]).unwrap());
    assert!(!tree.accepts(&["a", "d"]).unwrap());

    let on_stdout = arbor(&["discover", s(&log), "--select", "share>=0.3"]);
    assert_eq!(on_stdout.stdout, std::fs::read(&first).unwrap());
}

#[test]
fn discover_rejects_empty_or_out_of_range_selection() {
    let dir = TempDir::new().unwrap();
    let log = write_log(&dir);
    assert_eq!(arbor(&["discover", s(&log), "--select", "ids:3"]).status.code(), Some(3));
    assert_eq!(arbor(&["discover", s(&log), "--select", "top:0"]).status.code(), Some(3));
    assert_eq!(arbor(&["discover", s(&log), "--select", "share>=0.9"]).status.code(), Some(3));
}

#[test]
fn extend_with_fitting_variant_echoes_tree() {
    let dir = TempDir::new().unwrap();
    let log = write_log(&dir);
    let tree: ProcessTree = "->(a, X(->(b, c), d))".parse().unwrap();
    let input = write_tree(&dir, "in.ptml", &tree);
    let output = dir.path().join("out.ptml");
    let out = arbor(&["extend", s(&log), s(&input), "--select", "ids:2", "--added", "ids:0", "-o", s(&output)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(&output).unwrap(), std::fs::read(&input).unwrap());
}

#[test]
fn extend_with_new_variant_keeps_added_ones() {
    let dir = TempDir::new().unwrap();
    let log = write_log(&dir);
    let tree: ProcessTree = "->(a, b, c)".parse().unwrap();
    let input = write_tree(&dir, "in.ptml", &tree);
    let output = dir.path().join("out.ptml");
    let out = arbor(&["extend", s(&log), s(&input), "--select", "ids:1,2", "--added", "ids:0", "-o", s(&output)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let extended = read_tree(&output);
    for trace in [&["a", "b", "c"][..], &["a", "c", "b"], &["a", "d"]] {
        assert!(extended.accepts(trace).unwrap(), "{extended} rejects {trace:?}");
    }
}

#[test]
fn extend_with_broken_precondition_exits_4() {
    let dir = TempDir::new().unwrap();
    let log = write_log(&dir);
    let tree: ProcessTree = "->(a, b, c)".parse().unwrap();
    let input = write_tree(&dir, "in.ptml", &tree);
    let out = arbor(&["extend", s(&log), s(&input), "--select", "ids:2", "--added", "ids:0,1"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(out.stdout.is_empty());
}

#[test]
fn check_reports_flags_and_case_share() {
    let dir = TempDir::new().unwrap();
    let log = write_log(&dir);
    let all = dir.path().join("all.ptml");
    assert!(arbor(&["discover", s(&log), "--select", "top:3", "-o", s(&all)]).status.success());
    let out = arbor(&["check", s(&log), s(&all)]);
    assert!(out.status.success());
    assert!(stdout(&out).ends_with("accepted cases: 6/6 (1.000000)\n"), "{}", stdout(&out));

    let leaf = write_tree(&dir, "leaf.ptml", &"a".parse().unwrap());
    let out = arbor(&["check", s(&log), s(&leaf), "--json"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["accepted_cases"], 0);
    assert_eq!(report["total_cases"], 6);
    assert_eq!(report["variants"][0]["conformance"], "rejected");

    let partial = write_tree(&dir, "partial.ptml", &"->(a, b, c)".parse().unwrap());
    let out = arbor(&["check", s(&log), s(&partial)]);
    let text = stdout(&out);
    assert!(text.contains("0\t3\taccepted\n1\t2\trejected\n2\t1\trejected\n"), "{text}");
    assert!(text.ends_with("accepted cases: 3/6 (0.500000)\n"));
}

#[test]
fn invalid_tree_exits_2() {
    let dir = TempDir::new().unwrap();
    let log = write_log(&dir);
    let loop3 = ProcessTree::new(Node::operator(
        Operator::Loop,
        vec![Node::activity("a"), Node::activity("b"), Node::activity("c")],
    ));
    let path = write_tree(&dir, "loop3.ptml", &loop3);
    assert_eq!(arbor(&["check", s(&log), s(&path)]).status.code(), Some(2));
    assert_eq!(arbor(&["convert", s(&path)]).status.code(), Some(2));
}

#[test]
fn convert_writes_pnml() {
    let dir = TempDir::new().unwrap();
    let tree = write_tree(&dir, "t.ptml", &"->(a, X(b, tau))".parse().unwrap());
    let output = dir.path().join("t.pnml");
    assert!(arbor(&["convert", s(&tree), "-o", s(&output)]).status.success());
    let pnml = std::fs::read_to_string(&output).unwrap();
    assert!(pnml.contains("<pnml"));
    assert_eq!(pnml.matches("<initialMarking>").count(), 1);
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn http(port: u16, method: &str, path: &str) -> Option<String> {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).ok()?;
    write!(stream, "{method} {path} HTTP/1.1\r\nHost: localhost\r\nContent-Length: 0\r\nConnection: close\r\n\r\n").ok()?;
    let mut response = String::new();
    stream.read_to_string(&mut response).ok()?;
    Some(response)
}

fn wait_for_health(port: u16, child: &mut Child) -> String {
    let deadline = Instant::now() + Duration::from_secs(30);
    loop {
        if let Some(response) = http(port, "GET", "/health") {
            return response;
        }
        assert!(child.try_wait().unwrap().is_none(), "server exited early");
        assert!(Instant::now() < deadline, "server did not come up");
        std::thread::sleep(Duration::from_millis(50));
    }
}

#[test]
fn serve_answers_health_serves_assets_and_flushes_state() {
    let dir = TempDir::new().unwrap();
    let assets = dir.path().join("ui");
    let state = dir.path().join("state");
    std::fs::create_dir_all(&assets).unwrap();
    std::fs::write(assets.join("index.html"), "<h1>ui</h1>").unwrap();
    let port = free_port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_arbor"))
        .args(["serve", "--port", &port.to_string(), "--static-dir", s(&assets), "--state-dir", s(&state)])
        .env("NO_COLOR", "1")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();

    let health = wait_for_health(port, &mut child);
    assert!(health.starts_with("HTTP/1.1 200"), "{health}");
    assert!(health.contains("\"ok\""));
    assert!(http(port, "GET", "/index.html").unwrap().contains("<h1>ui</h1>"));
    let created = http(port, "POST", "/sessions").unwrap();
    assert!(created.starts_with("HTTP/1.1 201"), "{created}");

    let killed = Command::new("kill").args(["-INT", &child.id().to_string()]).status().unwrap();
    assert!(killed.success());
    let status = child.wait().unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(std::fs::read_dir(&state).unwrap().count(), 1);
}

#[test]
fn serve_on_taken_port_exits_5() {
    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let out = arbor(&["serve", "--port", &port]);
    assert_eq!(out.status.code(), Some(5));
}
