use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use vecot::io::{digest, gen, load, recheck, run, GenSize, ProblemFile, RunOptions, GEN_KINDS};

fn vecot(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vecot"))
        .args(args)
        .current_dir(dir)
        .env_remove("VECOT_TOL")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn game_digest_is_frozen() {
    let p = gen("game", GenSize::parse("5").unwrap(), 1).unwrap();
    assert_eq!(digest(&p), "a7535f3e487287b00e9a1d8bc6fa9f594aa9da9b2734820b847027cdcec6fc34");
}

#[test]
fn generation_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let args = ["gen", "--kind", "dominance", "--size", "4,3,2", "--seed", "7"];
    let a = vecot(&args, dir.path());
    let b = vecot(&args, dir.path());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let other = vecot(&["gen", "--kind", "dominance", "--size", "4,3,2", "--seed", "8"], dir.path());
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn generated_files_round_trip_through_disk() {
    let dir = TempDir::new().unwrap();
    for kind in GEN_KINDS {
        let p = gen(kind, GenSize::parse("4,3,2").unwrap(), 3).unwrap();
        let path = dir.path().join(format!("{kind}.json"));
        vecot::io::save(&p, &path).unwrap();
        let back = load(&path).unwrap();
        assert_eq!(back, p, "{kind}");
        assert_eq!(digest(&back), digest(&p));
    }
}

#[test]
fn stored_results_recheck() {
    for kind in GEN_KINDS {
        let p = gen(kind, GenSize::parse("4,3,2").unwrap(), 11).unwrap();
        let out = run(&p, &RunOptions::default()).unwrap();
        let worst = recheck(&p, &out.result).unwrap();
        assert!(worst <= 1e-9, "{kind}: {worst}");
    }
}

#[test]
fn solve_writes_optimal_result() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "p.json",
        r#"{"kind":"scalar_ot","payload":{"mu":{"weights":[0.5,0.5]},"nu":{"weights":[0.5,0.5]},"cost":[[0,1],[1,0]]}}"#,
    );
    let o = vecot(&["--quiet", "--input", "p.json", "--output", "r.json", "solve-ot"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["status"], "optimal");
    assert!(r["value"].as_f64().unwrap().abs() <= 1e-12);
}

#[test]
fn schema_errors_exit_three_and_name_the_path() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "p.json",
        r#"{"kind":"scalar_ot","payload":{"mu":{"weights":[0.5,0.5,-1]},"nu":{"weights":[1]},"cost":[[0],[1],[2]]}}"#,
    );
    let o = vecot(&["--input", "p.json", "solve-ot"], dir.path());
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("payload.mu.weights[2]"));
}

#[test]
fn parse_errors_exit_three_with_position() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "p.json", "{\"kind\": \"game\",\n \"payload\": [}");
    let o = vecot(&["--input", "p.json", "game"], dir.path());
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn missing_input_file_exits_three() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&vecot(&["--input", "absent.json", "solve-ot"], dir.path())), 3);
}

#[test]
fn infeasible_dominance_exits_two() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "mu.json", r#"{"values":[[1,0.5],[0,0.5]]}"#);
    write(dir.path(), "nu.json", r#"{"values":[[0,0.9],[1,0.1]]}"#);
    let o = vecot(&["--quiet", "dominate", "--mu", "mu.json", "--nu", "nu.json"], dir.path());
    assert_eq!(code(&o), 2);
    let r = stdout_json(&o);
    assert_eq!(r["status"], "infeasible");
}

#[test]
fn dominated_pair_exits_zero() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "mu.json", r#"{"values":[[1,0.5],[0,0.5]]}"#);
    write(dir.path(), "nu.json", r#"{"values":[[0.6,0.5],[0.4,0.5]]}"#);
    let o = vecot(&["--quiet", "dominate", "--mu", "mu.json", "--nu", "nu.json"], dir.path());
    assert_eq!(code(&o), 0);
}

#[test]
fn matching_pennies_from_a_bare_matrix() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "g.json", "[[1,-1],[-1,1]]");
    let o = vecot(&["--quiet", "--input", "g.json", "game"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(stdout_json(&o)["value"].as_f64().unwrap().abs() <= 1e-10);
}

#[test]
fn verify_chain_group_passes() {
    let dir = TempDir::new().unwrap();
    let o = vecot(&["verify", "--only", "chain"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("chain/power_identity_p2"));
}

#[test]
fn verify_with_zero_tolerance_fails() {
    let dir = TempDir::new().unwrap();
    let o = vecot(&["--tol", "0", "verify", "--only", "semi_discrete"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn generated_problem_solves_from_cli() {
    let dir = TempDir::new().unwrap();
    let g = vecot(&["--output", "p.json", "gen", "--kind", "chain", "--size", "5", "--seed", "2"], dir.path());
    assert_eq!(code(&g), 0);
    let o = vecot(&["--quiet", "--input", "p.json", "chain"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let file: ProblemFile = load(&dir.path().join("p.json")).unwrap();
    assert!(recheck(&file, &stdout_json(&o)).unwrap() <= 1e-9);
}
