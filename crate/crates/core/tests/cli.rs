use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const FOUR_GROUPS: &str = "4 4 1 4\n1 2\n1 2 3\n2 4\n3 4\n4 1 2 9\n";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_groupsparse")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn project_agrees_across_solvers() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "four_groups.txt", FOUR_GROUPS);
    for solver in ["dp", "benders", "brute"] {
        let o = run(&["project", &inst, "--solver", solver]);
        assert!(o.status.success(), "{solver}: {o:?}");
        assert_eq!(stdout(&o), "value 11\ngroups 4\nsupport 3 4\n", "{solver}");
    }
    let o = run(&["project", &inst, "--solver", "benders", "--G", "2", "--K", "2", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"], 13.0);
    assert_eq!(v["support"], serde_json::json!([1, 4]));
}

#[test]
fn project_with_decomposition_and_cut_log() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "four_groups.txt", FOUR_GROUPS);
    let td = write(dir.path(), "four_groups.td", "0 - 0 1 4 5 6\n1 0 1 2 5 6 7\n2 1 1 3 6 7\n");
    let o = run(&["project", &inst, "--decomposition", &td, "--G", "2"]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).starts_with("value 16\n"));

    let log = dir.path().join("cuts.csv");
    let o = run(&["project", &inst, "--solver", "benders", "--G", "2", "--K", "2", "--cut-log", log.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = fs::read_to_string(&log).unwrap();
    assert!(csv.starts_with("iteration,mu,violation\n"));
    assert!(csv.lines().count() >= 2);
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.txt", "4 2 1 4\n1 2\n3 9\n");
    assert_eq!(run(&["project", &bad]).status.code(), Some(2));
    assert_eq!(run(&["project", dir.path().join("missing").to_str().unwrap()]).status.code(), Some(2));
    let no_weights = write(dir.path(), "nw.txt", "2 1 1 2\n1 2\n");
    assert_eq!(run(&["project", &no_weights]).status.code(), Some(2));
    let inst = write(dir.path(), "four_groups.txt", FOUR_GROUPS);
    let wrong_td = write(dir.path(), "wrong.td", "0 - 0 1\n");
    assert_eq!(run(&["project", &inst, "--decomposition", &wrong_td]).status.code(), Some(2));
    assert_eq!(run(&["project", &inst, "--solver", "simplex"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest", "--instances", "60", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 5);
}

#[test]
fn recover_generated_then_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gen");
    let o = run(&["recover", "--variant", "meiht", "--N", "100", "--G", "3", "--m", "70", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    let generated = stdout(&o);
    for f in ["instance.txt", "matrix.bin", "y.txt", "x.txt", "x_hat.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let p = |f: &str| out.join(f).to_str().unwrap().to_string();
    let o = run(&[
        "recover", "--variant", "meiht", "--instance", &p("instance.txt"), "--matrix", &p("matrix.bin"),
        "--measurements", &p("y.txt"), "--truth", &p("x.txt"),
    ]);
    assert!(o.status.success(), "{o:?}");
    let lines = |s: &str| s.lines().filter(|l| l.starts_with("iterations")).map(String::from).collect::<Vec<_>>();
    assert_eq!(lines(&stdout(&o)), lines(&generated));

    // a Gaussian matrix file cannot drive an expander variant
    let g = dir.path().join("gauss");
    run(&["recover", "--N", "100", "--G", "3", "--m", "60", "--out-dir", g.to_str().unwrap()]);
    let q = |f: &str| g.join(f).to_str().unwrap().to_string();
    let o = run(&[
        "recover", "--variant", "am-eiht", "--instance", &q("instance.txt"), "--matrix", &q("matrix.bin"),
        "--measurements", &q("y.txt"),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_writes_csv_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = run(&[
        "sweep", "--N", "60", "--G", "2", "--trials", "3", "--variant", "am-eiht", "--json", "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("am-eiht"));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("N,m,algorithm,matrix,trial,rel_error,iterations,seconds\n"));
    assert!(csv.lines().skip(1).all(|l| l.starts_with("60,") && l.ends_with(",0")));
    let dats: Vec<_> = fs::read_dir(out.join("plotdata"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".dat"))
        .collect();
    assert!(dats.iter().any(|n| n.starts_with("error_vs_m_")), "{dats:?}");
    assert!(out.join("plotdata/plots.gp").exists());
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    assert!(json.is_array() || json.is_object());
}
