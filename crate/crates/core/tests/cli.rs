use addred::cli::run;
use addred::io::{report_to_json, scheme_to_json};
use addred::scheme::Scheme;
use addred::search::SearchReport;
use addred::slp::{count_operators, matches_scheme, stated_additions, StraightLineProgram};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["addred"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(dir: &tempfile::TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn write(dir: &tempfile::TempDir, name: &str, contents: &str) -> String {
    let p = path(dir, name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn verify_strassen() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(&dir, "s.json", &scheme_to_json(&Scheme::strassen()));
    let (code, out, _) = cli(&["verify", &s]);
    assert_eq!(code, 0);
    assert!(out.contains("valid: true"));
    assert!(out.contains("naive: u 5, v 5, w 8"));
    assert!(out.contains("total: 18"));
}

#[test]
fn verify_rejects_broken_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let mut broken = Scheme::strassen();
    broken.w[0][6] = -1;
    let s = write(&dir, "s.json", &scheme_to_json(&broken));
    let (code, out, err) = cli(&["verify", &s]);
    assert_eq!(code, 1);
    assert!(out.contains("valid: false"));
    assert!(err.starts_with("error: invalid:"));
}

#[test]
fn errors_are_single_lines() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(&dir, "bad.json", "{\"m\": 2, \"n\": 2, \"p\": 2, \"r\": 1, \"u\": [[2, 0, 0, 0]], \"v\": [[1, 0, 0, 0]], \"w\": [[1], [0], [0], [0]]}");
    let (code, _, err) = cli(&["verify", &bad]);
    assert_eq!(code, 1);
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("tensor u, row 0, position 0"), "{err}");

    let (code, _, err) = cli(&["verify", &path(&dir, "missing.json")]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error: io: cannot read"));

    let (code, _, err) = cli(&["reduce", &bad, "--no-such-flag"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error: usage:"));
    assert_eq!(err.lines().count(), 1);

    let (code, _, err) = cli(&["reduce", &bad, "--weights", "gi=0"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error: search: invalid configuration"), "{err}");
}

#[test]
fn reduce_writes_matching_program_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let scheme = Scheme::kronecker(&Scheme::strassen(), &Scheme::naive(1, 2, 1)).random_flip(&mut rng, 8, 16);
    let s = write(&dir, "s.json", &scheme_to_json(&scheme));
    let (report_path, slp_path) = (path(&dir, "r.json"), path(&dir, "r.slp"));
    let (code, out, err) = cli(&[
        "reduce", &s, "--seed", "3", "--processes", "16", "--iterations-patience", "2",
        "--out-report", &report_path, "--out-slp", &slp_path,
    ]);
    assert_eq!(code, 0, "{err}");
    let report: SearchReport = serde_json::from_slice(&std::fs::read(&report_path).unwrap()).unwrap();
    assert!(out.contains(&format!("total: {} (naive {})", report.total, report.naive_total)));
    assert_eq!(report.config.master_seed, 3);
    assert!(report.wall_ms.is_none());

    let text = std::fs::read_to_string(&slp_path).unwrap();
    assert_eq!(count_operators(&text), report.total);
    assert_eq!(stated_additions(&text), Some(report.total));
    assert!(matches_scheme(&StraightLineProgram::parse(&text).unwrap(), &scheme));

    // Rerunning from the report's own configuration reproduces it.
    let again = path(&dir, "again.json");
    let (code, _, err) = cli(&["reduce", &s, "--config", &report_path, "--out-report", &again]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(std::fs::read(&report_path).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn flip_mode_report_carries_its_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let scheme = Scheme::kronecker(&Scheme::strassen(), &Scheme::naive(1, 1, 2));
    let s = write(&dir, "s.json", &scheme_to_json(&scheme));
    let (report_path, slp_path) = (path(&dir, "r.json"), path(&dir, "r.slp"));
    let (code, _, err) = cli(&[
        "reduce", &s, "--flip-mode", "--flip-schemes", "4", "--processes", "16",
        "--iterations-patience", "2", "--out-report", &report_path, "--out-slp", &slp_path,
    ]);
    assert_eq!(code, 0, "{err}");
    let report: SearchReport = serde_json::from_slice(&std::fs::read(&report_path).unwrap()).unwrap();
    let carried = &report.flip.as_ref().unwrap().scheme;
    assert_eq!(carried.digest(), report.scheme_digest);
    let text = std::fs::read_to_string(&slp_path).unwrap();
    assert!(matches_scheme(&StraightLineProgram::parse(&text).unwrap(), carried));
    assert_eq!(count_operators(&text), report.total);
}

#[test]
fn reduce_and_oracle_on_expression_set() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write(&dir, "e.json", r#"{"n_x": 4, "expressions": [[1, 2, -3, 4], [1, -2, -4], [1, -2, -3, 4]]}"#);
    let slp_path = path(&dir, "e.slp");
    let (code, out, err) = cli(&["reduce", &sys, "--out-slp", &slp_path]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("total: 6 (naive 8)"));
    let text = std::fs::read_to_string(&slp_path).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 5);
    assert!(text.ends_with("# additions: 6\n"));

    let (code, out, _) = cli(&["oracle", &sys]);
    assert_eq!(code, 0);
    assert!(out.contains("cost: 6\n"));
    assert!(out.contains("exact: true\n"));
}

#[test]
fn combine_rejects_reports_on_different_schemes() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(&dir, "a.json", &scheme_to_json(&Scheme::strassen()));
    let b = write(&dir, "b.json", &scheme_to_json(&Scheme::naive(2, 2, 2)));
    let (ra, rb) = (path(&dir, "ra.json"), path(&dir, "rb.json"));
    assert_eq!(cli(&["reduce", &a, "--processes", "2", "--out-report", &ra]).0, 0);
    assert_eq!(cli(&["reduce", &b, "--processes", "2", "--out-report", &rb]).0, 0);
    let (code, _, err) = cli(&["combine", &ra, &rb]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error: search: reports refer to different schemes"), "{err}");

    let report: SearchReport = serde_json::from_slice(&std::fs::read(&ra).unwrap()).unwrap();
    let out_path = path(&dir, "c.json");
    let (code, _, _) = cli(&["combine", &ra, "--out-report", &out_path]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(&out_path).unwrap(), report_to_json(&report));
}
