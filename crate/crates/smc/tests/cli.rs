use std::io::Write;
use std::process::{Command, Output, Stdio};

fn smc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smc")).args(args).env_remove("SMC_STEP_BUDGET").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const HEXAGON: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/hexagon.txt");

#[test]
fn normalize_prints_the_normal_form_first() {
    let o = smc(&["normalize", "--rules", "F", "s;s"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("id2"));
    assert!(stdout(&o).contains("ss@0"));
}

#[test]
fn equal_verdicts() {
    assert_eq!(smc(&["equal", "s;m", "m"]).status.code(), Some(0));
    assert_eq!(smc(&["equal", "m", "(id1*e);m;e"]).status.code(), Some(2));
    assert_eq!(smc(&["equal", "m", "s;s"]).status.code(), Some(1));
}

#[test]
fn termination_table() {
    let o = smc(&["termination-check", "--rules", "F"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 13);
    assert!(out.ends_with("12/12 rules decreasing\n"));
    assert_eq!(smc(&["termination-check", "--rules", "M"]).status.code(), Some(0));
    assert_eq!(smc(&["termination-check", "--rules", "GM"]).status.code(), Some(1));
}

#[test]
fn confluence_summary() {
    let o = smc(&["confluence", "--rules", "F"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "68 peaks, 5/5/12/18/28\n");
}

#[test]
fn confluence_failure_names_the_peak() {
    let o = smc(&["confluence", "--rules", "GM"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("failing peak (id1*s);(id1*m);s"));
}

#[test]
fn critical_peaks_one_line_each() {
    let o = smc(&["critical-peaks", "--rules", "F"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 69);
    assert!(out.lines().any(|l| l.starts_with("(e*e);m  l@0 r@1  kelly-3  kelly  join")));
}

#[test]
fn certify_writes_a_valid_script() {
    let o = smc(&["certify", "--terms", HEXAGON]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let f = smc_core::coherence::CellCatalog::symmetric();
    let script = smc_core::coherence::parse_certificate(&text, &f.rules).unwrap();
    script.check(&f).unwrap();
    assert_eq!(stdout(&smc(&["certify", "--terms", HEXAGON])), text);
}

#[test]
fn certify_to_a_file_prints_a_summary() {
    let dir = std::env::temp_dir().join(format!("smc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("hex.cert");
    let o = smc(&["certify", "--terms", HEXAGON, "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim_end(), "t1,a1,t2 = a2,t3,a3: 15 surgeries, cells g x1, exa2 x1");
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("# t1,a1,t2 = a2,t3,a3\nCERTIFICATE F\n"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn certify_input_errors() {
    assert_eq!(smc(&["certify", "--terms", "/no/such/file"]).status.code(), Some(2));
    let dir = std::env::temp_dir().join(format!("smc-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.txt");
    std::fs::write(&bad, "OBJECT A: (x#x)\nTERMINAL A\n").unwrap();
    assert_eq!(smc(&["certify", "--terms", bad.to_str().unwrap()]).status.code(), Some(2));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn expand_kelly_by_id_and_source() {
    let by_id = smc(&["expand-kelly", "kelly-3"]);
    assert_eq!(by_id.status.code(), Some(0));
    assert!(stdout(&by_id).starts_with("EXPANSION kelly-3\nCERTIFICATE F\n"));
    assert_eq!(stdout(&smc(&["expand-kelly", "(e*e);m"])), stdout(&by_id));
    assert_eq!(smc(&["expand-kelly", "coherence-1"]).status.code(), Some(2));
    let all = stdout(&smc(&["expand-kelly", "--all"]));
    assert_eq!(all.matches("EXPANSION ").count(), 17);
}

#[test]
fn expand_kelly_derivation_matches_the_table() {
    let shipped = smc(&["expand-kelly", "--all"]);
    let derived = smc(&["expand-kelly", "--all", "--derive"]);
    assert_eq!(derived.status.code(), Some(0));
    assert_eq!(stdout(&derived), stdout(&shipped));
}

#[test]
fn render_from_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_smc"))
        .args(["render", "--format", "ascii"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"(m*id1);m\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "|   |   |\n\\_/     |\n\\_/\n");
}

#[test]
fn render_tikz_from_file() {
    let dir = std::env::temp_dir().join(format!("smc-cli-render-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("d.txt");
    std::fs::write(&file, "# a comment\n(e*id1);m\n").unwrap();
    let o = smc(&["render", "--format", "tikz", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("\\documentclass[tikz]{standalone}"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn usage_and_input_errors_exit_2() {
    assert_eq!(smc(&[]).status.code(), Some(2));
    assert_eq!(smc(&["bogus"]).status.code(), Some(2));
    assert_eq!(smc(&["normalize", "--rules", "Q", "m"]).status.code(), Some(2));
    assert_eq!(smc(&["normalize", "m;m"]).status.code(), Some(2));
    assert_eq!(smc(&["render", "--format", "png"]).status.code(), Some(2));
    assert_eq!(smc(&["--fixtures", "/no/such/dir", "confluence"]).status.code(), Some(2));
}

#[test]
fn step_budget_from_environment() {
    let run = |budget: &str| {
        Command::new(env!("CARGO_BIN_EXE_smc"))
            .args(["normalize", "s;s"])
            .env("SMC_STEP_BUDGET", budget)
            .output()
            .unwrap()
    };
    assert_eq!(run("0").status.code(), Some(1));
    assert_eq!(run("1").status.code(), Some(0));
    assert_eq!(run("lots").status.code(), Some(2));
}

#[test]
fn fixtures_directory_overrides_the_listing() {
    let dir = std::env::temp_dir().join(format!("smc-cli-fix-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("peaks.txt"), "PEAK my-kelly: (e*e);m | l@0 | r@1\n").unwrap();
    let o = smc(&["--fixtures", dir.to_str().unwrap(), "critical-peaks", "--rules", "M"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("(e*e);m  l@0 r@1  my-kelly  kelly"));
    std::fs::write(dir.join("expansions.txt"), "EXPANSION kelly-3\nnonsense\n").unwrap();
    assert_eq!(smc(&["--fixtures", dir.to_str().unwrap(), "expand-kelly", "kelly-1"]).status.code(), Some(2));
    std::fs::remove_dir_all(dir).unwrap();
}
