use std::path::PathBuf;
use std::process::{Command, Output};

fn winomem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_winomem")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("winomem-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn multiply_in_place_has_no_extra_memory() {
    let o = winomem(&["multiply", "--variant", "ip", "--n", "64", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("peak_extra=0"));
}

#[test]
fn multiply_acc2_peak() {
    let o = winomem(&["multiply", "--variant", "acc2", "--n", "32"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("peak_extra=682"), "{}", stdout(&o));
}

#[test]
fn multiply_rejects_unsupported_shape() {
    let o = winomem(&["multiply", "--variant", "ovl", "--m", "4", "--k", "8", "--n", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported"));
}

#[test]
fn multiply_reads_matrix_files() {
    let (a, b) = (scratch("a.txt"), scratch("b.txt"));
    std::fs::write(&a, "2 2 65521\n1 2\n3 4\n").unwrap();
    std::fs::write(&b, "2 2 65521\n5 6\n7 8\n").unwrap();
    let o = winomem(&["multiply", "--variant", "std2", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_sweeps_pass() {
    let o = winomem(&["verify", "--variants", "std2,acc3,ip,ovl,ovr,aclr,accr,acc2", "--max-n", "64"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = winomem(&["verify", "--variants", "ipmm", "--max-n", "32", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("variant,m,k,n,cutoff,mults,adds,peak_extra,total_alloc"));
    assert!(out.contains("ipmm,4,4,4,1,58,114,0,0,ok"), "{out}");
}

#[test]
fn verify_catches_a_corrupted_schedule() {
    let text = winomem_core_text("std2");
    // Flip the sign of the first subtraction.
    let bad = text.replacen(" - ", " + ", 1);
    assert_ne!(bad, text);
    let path = scratch("bad-std2.sched");
    std::fs::write(&path, bad).unwrap();
    let o = winomem(&["verify", "--variants", "", "--schedule-file", path.to_str().unwrap(), "--max-n", "8"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));

    let good = scratch("std2.sched");
    std::fs::write(&good, &text).unwrap();
    let o = winomem(&["verify", "--variants", "", "--schedule-file", good.to_str().unwrap(), "--max-n", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

fn winomem_core_text(name: &str) -> String {
    let id = winomem::schedule::ScheduleId::parse(name).unwrap();
    winomem::schedule::builtin_text(id).to_string()
}

#[test]
fn search_exit_codes() {
    let emit = scratch("found.sched");
    let o = winomem(&["search", "--graph", "builtin:winograd", "--pebbles", "0", "--overwrite", "both", "--emit", emit.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = winomem(&["multiply", "--schedule-file", emit.to_str().unwrap(), "--n", "16"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let o = winomem(&["search", "--graph", "builtin:winograd", "--pebbles", "0", "--overwrite", "A", "--copy-budget", "0"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    let o = winomem(&["search", "--graph", "builtin:winograd", "--pebbles", "0", "--overwrite", "A", "--state-cap", "100"]);
    assert_eq!(o.status.code(), Some(4));
    let bad = scratch("bad.graph");
    std::fs::write(&bad, "node X initial\nedge X Y +\n").unwrap();
    let o = winomem(&["search", "--graph", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn search_toy_graph_file() {
    let path = scratch("toy.graph");
    std::fs::write(&path, winomem::pebble::TaskGraph::classical_2x2().to_text()).unwrap();
    let emit = scratch("toy.sched");
    let o = winomem(&["search", "--graph", path.to_str().unwrap(), "--pebbles", "1", "--emit", emit.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let s = winomem::schedule::parse_schedule(&std::fs::read_to_string(&emit).unwrap()).unwrap();
    assert_eq!(s.instructions.len(), 12);
}

#[test]
fn bench_rows() {
    let o = winomem(&["bench", "--variants", "classic,std2,ipmm", "--sizes", "64,128", "--cutoff", "16", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[0], "variant,m,k,n,cutoff,mults,adds,peak_extra,total_alloc,seconds");
    let field = |row: &str, i: usize| row.split(',').nth(i).unwrap().parse::<u64>().unwrap();
    assert_eq!(field(lines[2], 5), 128 * 128 * 128);
    assert!(field(lines[4], 5) < 128 * 128 * 128);
    let o = winomem(&["bench", "--variants", "ovl", "--sizes", "96", "--cutoff", "1"]);
    assert_eq!(o.status.code(), Some(2));
}
