//! Acceptance suite of the CLI crate: criterion 9 (interface stability) and
//! the exit-code discipline, exercised end to end through the built binary.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use handlecalc::derivation::{check, fixtures, parse_derivation};
use handlecalc_cli::repl::ReplSession;

fn criterion<F>(label: &str, body: F)
where
    F: FnOnce() + std::panic::UnwindSafe,
{
    let outcome = std::panic::catch_unwind(body);
    let verdict = if outcome.is_ok() { "PASS" } else { "FAIL" };
    println!("[acceptance] criterion 9 ({label}): {verdict}");
    if let Err(cause) = outcome {
        std::panic::resume_unwind(cause);
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_handlecalc"))
}

fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("run handlecalc")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

#[test]
fn criterion_9a_parser_round_trips_on_all_fixtures() {
    criterion("derivation parser round-trips on every fixture", || {
        for (name, text) in fixtures::all() {
            let first = parse_derivation(text).unwrap();
            let second = parse_derivation(&first.to_string()).unwrap();
            assert_eq!(first, second, "{name}");
        }
    });
}

#[test]
fn criterion_9b_repl_export_verify_round_trip() {
    criterion("REPL export re-verifies to the same final word", || {
        // Drive a session twice: through the library for the expected state,
        // and through the binary to capture the exported text.
        let script = ["load (ab)^3", "apply 0", "apply 1", "mark 1, 3", "delete", "export", "quit"];
        let mut session = ReplSession::new();
        let mut final_word = String::new();
        for line in &script[..script.len() - 2] {
            let reply = session.handle(line);
            assert!(!reply.output.starts_with("error"), "{line}: {}", reply.output);
            if let Some(word) = reply.output.strip_prefix("word: ") {
                final_word = word.split(' ').next().unwrap().to_string();
            }
        }
        let export = session.handle("export").output;

        let mut child = bin()
            .arg("repl")
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .expect("spawn repl");
        child
            .stdin
            .take()
            .unwrap()
            .write_all((script.join("\n") + "\n").as_bytes())
            .unwrap();
        let output = child.wait_with_output().unwrap();
        let stdout = String::from_utf8(output.stdout).unwrap();
        assert!(
            stdout.contains(&export),
            "binary session must produce the same export;\nexpected:\n{export}\ngot:\n{stdout}"
        );

        // The export is a derivation that verify accepts and that replays to
        // the session's final word.
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("session.deriv");
        std::fs::write(&path, &export).unwrap();
        let verify = run(&["verify", path.to_str().unwrap(), "--n", "1..1"]);
        assert_eq!(exit_code(&verify), 0, "{}", stdout_of(&verify));
        assert!(stdout_of(&verify).contains(&format!("final-word: {final_word}")));

        // Library-level cross-check of the same text.
        let derivation = parse_derivation(&export).unwrap();
        let report = check(&derivation, 1).unwrap();
        assert!(report.passed());
        assert_eq!(report.final_word.to_string(), final_word);
    });
}

#[test]
fn criterion_9c_golden_files_byte_stable() {
    criterion("reports and claim lines are byte-stable", || {
        let cases: &[(&[&str], &str)] = &[
            (&["nf", "aba"], include_str!("golden/nf_aba.txt")),
            (&["nf", "aabaabbabbab"], include_str!("golden/nf_block.txt")),
            (&["equiv", "ababababab", "bbabbbabbb"], include_str!("golden/equiv_true.txt")),
            (&["claim", "--p", "5", "--n", "4"], include_str!("golden/claim_p5_n4.txt")),
            (&["claim", "--p", "9", "--n", "9"], include_str!("golden/claim_p9_n9.txt")),
            (
                &[
                    "search",
                    "--start",
                    "(ab)^5",
                    "--target",
                    "aaabaaabaa",
                    "--strategy",
                    "bfs",
                    "--max-depth",
                    "12",
                ],
                include_str!("golden/search_r3.txt"),
            ),
            (
                &[
                    "search",
                    "--start",
                    "(ab)^5",
                    "--target",
                    "bbabbbabbb",
                    "--strategy",
                    "bfs",
                    "--max-depth",
                    "12",
                ],
                include_str!("golden/search_r4.txt"),
            ),
        ];
        for (args, golden) in cases {
            let output = run(args);
            assert_eq!(&stdout_of(&output), golden, "stdout drifted for {args:?}");
        }

        let verify_cases: &[(&str, &str, &str)] = &[
            ("prop_3_1.deriv", "4..5", include_str!("golden/verify_prop_3_1_n4_5.txt")),
            ("prop_3_4.deriv", "23..23", include_str!("golden/verify_prop_3_4_n23.txt")),
        ];
        for (file, range, golden) in verify_cases {
            let path = fixture_path(file);
            let output = run(&["verify", path.to_str().unwrap(), "--n", range]);
            assert_eq!(&stdout_of(&output), golden, "verify output drifted for {file} {range}");
        }
    });
}

#[test]
fn exit_code_discipline() {
    criterion("exit codes: 0 pass, 1 failed check, 2 usage", || {
        let prop_3_1 = fixture_path("prop_3_1.deriv");
        let prop_3_4 = fixture_path("prop_3_4.deriv");
        let checks: &[(&[&str], i32)] = &[
            (&["verify", prop_3_1.to_str().unwrap(), "--n", "4..12"], 0),
            (&["verify", prop_3_4.to_str().unwrap(), "--n", "23..23"], 1),
            (&["verify", "missing.deriv"], 2),
            (&["verify", prop_3_1.to_str().unwrap(), "--n", "5..4"], 2),
            (&["nf", "aba"], 0),
            (&["nf", "abx"], 2),
            (&["equiv", "ababababab", "bbabbbabbb"], 0),
            (&["equiv", "ab", "ba"], 1),
            (&["search", "--start", "(ab)^5", "--target", "aaabaaabaa", "--max-depth", "12"], 0),
            (&["search", "--start", "ab", "--target", "ba", "--max-depth", "5"], 1),
            (&["search", "--start", "ab", "--target", "ba", "--strategy", "warp"], 2),
            (&["search", "--start", "(ab)^{6n}", "--target", "ab"], 2),
            (&["claim", "--p", "5", "--n", "4"], 0),
            (&["claim", "--p", "8", "--n", "23"], 1),
            (&["claim", "--p", "9", "--n", "9"], 1),
            (&["claim", "--p", "five", "--n", "4"], 2),
            (&["no-such-command"], 2),
        ];
        for (args, expected) in checks {
            let output = run(args);
            assert_eq!(exit_code(&output), *expected, "args {args:?}");
        }
    });
}

#[test]
fn verify_beam_pattern_search_never_usage_errors() {
    criterion("beam pattern search exits 0 or 1, never 2", || {
        let output = run(&[
            "search",
            "--start",
            "(ab)^{6n}",
            "--n",
            "4",
            "--pattern-p",
            "5",
            "--strategy",
            "beam",
            "--beam",
            "64",
            "--max-depth",
            "40",
        ]);
        assert!(matches!(exit_code(&output), 0 | 1));
    });
}

#[test]
fn search_output_is_pasteable_into_verify() {
    criterion("found paths replay as derivation files", || {
        let output = run(&[
            "search",
            "--start",
            "(ab)^5",
            "--target",
            "bbabbbabbb",
            "--strategy",
            "iddfs",
            "--max-depth",
            "8",
        ]);
        assert_eq!(exit_code(&output), 0);
        let text = format!(
            "derivation pasted\ninitial (ab)^5\n{}assert word bbabbbabbb\n",
            stdout_of(&output)
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pasted.deriv");
        std::fs::write(&path, &text).unwrap();
        let verify = run(&["verify", path.to_str().unwrap(), "--n", "1..1"]);
        assert_eq!(exit_code(&verify), 0, "{}", stdout_of(&verify));
    });
}
