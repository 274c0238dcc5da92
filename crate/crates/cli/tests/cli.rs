//! End-to-end tests of the `relbounds` binary: output records, CSV shape
//! and exit codes.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    run_with_env(args, &[])
}

fn run_with_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_relbounds"));
    cmd.args(args).env_remove("RELBOUNDS_WORKERS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    let prefix = format!("{key}: ");
    text.lines().find_map(|l| l.strip_prefix(prefix.as_str())).unwrap_or_else(|| panic!("no {key:?} in\n{text}"))
}

#[test]
fn bounds_worked_instance() {
    let out = run(&["bounds", "--n", "7", "--k", "4", "--mu", "1/2", "5/14", "2/7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(field(&text, "min"), "23/72 (0.319444444444)");
    assert_eq!(field(&text, "max"), "49/72 (0.680555555556)");
    assert_eq!(field(&text, "argmin"), "0:7/36 3:35/72 6:7/36 7:1/8");
    assert_eq!(field(&text, "argmax"), "0:1/8 1:7/36 4:35/72 7:7/36");
    assert_eq!(field(&text, "degenerate"), "false");
}

#[test]
fn bounds_accepts_every_moment_form() {
    let expected = ("23/72 (0.319444444444)", "49/72 (0.680555555556)");
    for form in [
        vec!["--raw", "7/2", "35/2", "98"],
        vec!["--mu", "0.5", "5/14", "2/7"],
        // w_j = E[S(S-1)..(S-j+1)] / (7 * 6 * ...) for the uniform law on {0..7}
        vec!["--w", "1/2", "1/3", "1/4"],
    ] {
        let mut args = vec!["bounds", "--n", "7", "--k", "4"];
        args.extend(&form);
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{form:?}: {}", stderr(&out));
        let text = stdout(&out);
        assert_eq!((field(&text, "min"), field(&text, "max")), expected, "{form:?}");
    }
    let out = run(&["bounds", "--n", "7", "--k", "4", "--bahadur", "0.3", "0.2", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("accurate to 1e-30"));
}

#[test]
fn bounds_k_zero_is_certain() {
    let out = run(&["bounds", "--n", "7", "--k", "0", "--mu", "1/2", "5/14", "2/7"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(field(&text, "min"), "1 (1)");
    assert_eq!(field(&text, "max"), "1 (1)");
}

#[test]
fn bounds_infeasible_moments_exit_3() {
    let out = run(&["bounds", "--n", "7", "--k", "4", "--mu", "1/2", "1/2", "1/3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).is_empty());
    assert!(stderr(&out).contains("facet"), "{}", stderr(&out));
}

#[test]
fn bounds_two_point_boundary_is_pinned() {
    // half the mass at 0 and half at n: feasible, on an edge of the polytope
    let out = run(&["bounds", "--n", "7", "--k", "4", "--mu", "1/2", "1/2", "1/2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(field(&text, "min"), "1/2 (0.5)");
    assert_eq!(field(&text, "max"), "1/2 (0.5)");
    assert_eq!(field(&text, "degenerate"), "true");
}

#[test]
fn bounds_argument_errors_exit_2() {
    for args in [
        vec!["bounds", "--n", "7", "--k", "8", "--mu", "1/2", "5/14", "2/7"],
        vec!["bounds", "--n", "7", "--k", "4", "--mu", "1/2", "x", "2/7"],
        vec!["bounds", "--n", "7", "--k", "4"],
        vec!["bounds", "--n", "7", "--k", "4", "--mu", "1/2", "5/14", "2/7", "--raw", "1", "1", "1"],
        vec!["bounds", "--n", "2", "--k", "1", "--mu", "1/2", "1/2", "1/2"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn region_csv_is_stable() {
    let args = ["region", "--n", "7", "--k", "4", "--rho2", "0.2", "--rho3", "0.1", "--steps", "11"];
    let first = run(&args);
    assert_eq!(first.status.code(), Some(0));
    let text = stdout(&first);
    assert_eq!(text, stdout(&run(&args)));
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "w1,min,max,feasible");
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[1], "0,,,false");
    assert_eq!(lines[6], "0.5,0.23125,0.634444444444,true");
    assert_eq!(lines[11], "1,,,false");
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 4);
    }
    assert!(stderr(&first).starts_with("feasible w1: [0.01085"), "{}", stderr(&first));
}

#[test]
fn region_without_correlations_uses_lower_moment_oracles() {
    let out = run(&["region", "--n", "7", "--k", "4", "--steps", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().nth(1), Some("0,0,0,true"));
    assert_eq!(text.lines().nth(3), Some("1,1,1,true"));

    let out = run(&["region", "--n", "7", "--k", "4", "--rho2", "0.2", "--steps", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().nth(2), Some("0.5,0.2,0.8,true"));
}

#[test]
fn region_argument_errors_exit_2() {
    for args in [
        vec!["region", "--n", "7", "--k", "4", "--rho3", "0.1"],
        vec!["region", "--n", "7", "--k", "4", "--steps", "1"],
        vec!["region", "--n", "7", "--k", "9"],
        vec!["region", "--n", "7", "--k", "4", "--rho2", "abc"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn convert_examples() {
    let cases: [(&[&str], &str); 3] = [
        (&["convert", "--from", "raw", "--to", "mu", "--n", "7", "7/2", "35/2", "98"], "1/2 5/14 2/7"),
        (&["convert", "--from", "w", "--to", "rho", "--n", "3", "1/2", "1/4", "1/8"], "1/2 0 0"),
        (&["convert", "--from", "bahadur", "--to", "w", "--n", "7", "1/2", "1/5", "1/10"], "1/2 3/10 17/80"),
    ];
    for (args, values) in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr(&out));
        let text = stdout(&out);
        assert_eq!(field(&text, "values"), values, "{args:?}");
        assert_eq!(field(&text, "exact"), "true");
    }
}

#[test]
fn convert_round_trip_through_factorial() {
    let out = run(&["convert", "--from", "mu", "--to", "factorial", "--n", "7", "1/2", "5/14", "2/7"]);
    let fm = field(&stdout(&out), "values").to_string();
    let parts: Vec<&str> = fm.split(' ').collect();
    let mut args = vec!["convert", "--from", "factorial", "--to", "raw", "--n", "7"];
    args.extend(&parts);
    assert_eq!(field(&stdout(&run(&args)), "values"), "7/2 35/2 98");
}

#[test]
fn convert_flags_irrational_results() {
    let out = run(&["convert", "--from", "bahadur", "--to", "mu", "--n", "7", "0.3", "0.2", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(field(&text, "exact"), "false");
    assert!(field(&text, "values").starts_with("0.3 0.156 0.1001775973220860800084703"));
}

#[test]
fn convert_out_of_domain_exit_3() {
    let out = run(&["convert", "--from", "bahadur", "--to", "w", "--n", "7", "0", "0.2", "0.1"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["convert", "--from", "w", "--to", "mu", "--n", "7", "1/2", "3/4", "1/8"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_single_case_passes() {
    let out = run(&["verify", "--n", "7", "--k", "4", "--seeds", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(field(&text, "cases"), "1");
    assert_eq!(field(&text, "failed"), "0");
    assert!(field(&text, "elapsed").ends_with('s'));
    assert_eq!(field(&text, "status"), "pass");
}

#[test]
fn verify_sweep_with_workers() {
    let out = run_with_env(&["verify", "--n-min", "3", "--n-max", "6", "--seeds", "10"], &[("RELBOUNDS_WORKERS", "2")]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert_eq!(field(&stdout(&out), "cases"), (10 * (3 + 4 + 5 + 6)).to_string());
}

#[test]
fn verify_injected_fault_exit_4() {
    let out = run(&["verify", "--n", "5", "--seeds", "2", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(4));
    let text = stdout(&out);
    assert_eq!(field(&text, "failed"), "10");
    assert!(text.contains("first_failure:"));
    assert!(text.contains("discrepancy: max"));
}

#[test]
fn verify_fault_flag_is_hidden() {
    let out = run(&["verify", "--help"]);
    assert!(!stdout(&out).contains("inject"));
}

#[test]
fn verify_argument_errors_exit_2() {
    for args in [
        vec!["verify", "--k", "1,x"],
        vec!["verify", "--n-min", "2"],
        vec!["verify", "--n-min", "8", "--n-max", "5"],
        vec!["verify", "--seeds", "0"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
    let out = run_with_env(&["verify", "--seeds", "1"], &[("RELBOUNDS_WORKERS", "0")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn facets_match_brute_force() {
    let out = run(&["facets", "--n", "7", "--k", "4", "--brute"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let upper: Vec<&str> = text.lines().filter(|l| l.starts_with("U ")).collect();
    let lower: Vec<&str> = text.lines().filter(|l| l.starts_with("L ")).collect();
    assert_eq!(upper.len(), 8);
    assert_eq!(lower.len(), 8);
    assert!(upper.contains(&"U 3 0 1 4 7"));
    assert!(lower.contains(&"L 2 0 3 6 7"));
    assert!(text.contains("# diff: identical"));
}

#[test]
fn facets_note_empty_blocks() {
    let out = run(&["facets", "--n", "3", "--k", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for note in ["# U block 1: empty", "# U block 3: empty", "# U block 4: empty", "# L block 1: empty"] {
        assert!(text.contains(note), "{note}");
    }
    assert!(text.contains("U 2 0 1 2 3"));
    assert!(text.contains("L 4 0 1 2 3"));
}

#[test]
fn facets_argument_errors_exit_2() {
    for args in [
        vec!["facets", "--n", "2", "--k", "1"],
        vec!["facets", "--n", "7", "--k", "8"],
        vec!["facets", "--n", "3", "--k", "1", "--brute"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}
