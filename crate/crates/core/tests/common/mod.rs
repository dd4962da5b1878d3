//! Golden-file cases for the command-line front end.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use cconj::cli::run;

/// Placeholder for the per-run output directory in argv and stdout.
pub const OUT: &str = "{out}";

pub struct Case {
    pub name: &'static str,
    pub argv: &'static [&'static str],
    pub exit: i32,
    /// Name of a file written with `-o`, compared against its own golden.
    pub writes: Option<&'static str>,
}

pub const CASES: &[Case] = &[
    Case {
        name: "check_pair",
        argv: &["check", "tests/fixtures/u_pair.json"],
        exit: 0,
        writes: None,
    },
    Case {
        name: "check_not_selfdual",
        argv: &["check", "tests/fixtures/u_not_selfdual.json"],
        exit: 0,
        writes: None,
    },
    Case {
        name: "check_mixed",
        argv: &["check", "tests/fixtures/u_mixed.json"],
        exit: 0,
        writes: None,
    },
    Case {
        name: "canonical_pair",
        argv: &["canonical", "tests/fixtures/u_pair.json"],
        exit: 0,
        writes: None,
    },
    Case {
        name: "canonical_mixed",
        argv: &[
            "canonical",
            "tests/fixtures/u_mixed.json",
            "-o",
            "{out}/canonical_mixed.json",
        ],
        exit: 0,
        writes: Some("canonical_mixed.json"),
    },
    Case {
        name: "canonical_not_selfdual",
        argv: &["canonical", "tests/fixtures/u_not_selfdual.json"],
        exit: 3,
        writes: None,
    },
    Case {
        name: "sample_mixed",
        argv: &[
            "sample",
            "tests/fixtures/u_mixed.json",
            "--seed",
            "7",
            "-o",
            "{out}/sample_mixed.json",
        ],
        exit: 0,
        writes: Some("sample_mixed.json"),
    },
    Case {
        name: "sample_not_selfdual",
        argv: &[
            "sample",
            "tests/fixtures/u_not_selfdual.json",
            "--seed",
            "1",
        ],
        exit: 3,
        writes: None,
    },
    Case {
        name: "verify_standard_fails",
        argv: &[
            "verify",
            "tests/fixtures/u_pair.json",
            "tests/fixtures/c_standard.json",
        ],
        exit: 4,
        writes: None,
    },
    Case {
        name: "verify_not_conjugation",
        argv: &[
            "verify",
            "tests/fixtures/u_pair.json",
            "tests/fixtures/c_not_conjugation.json",
            "--tol",
            "1e-6",
        ],
        exit: 4,
        writes: None,
    },
    Case {
        name: "decompose_standard",
        argv: &[
            "decompose",
            "tests/fixtures/u_pair.json",
            "tests/fixtures/c_standard.json",
        ],
        exit: 4,
        writes: None,
    },
    Case {
        name: "decompose_not_conjugation",
        argv: &[
            "decompose",
            "tests/fixtures/u_pair.json",
            "tests/fixtures/c_not_conjugation.json",
        ],
        exit: 2,
        writes: None,
    },
    Case {
        name: "fourunit_general",
        argv: &["fourunit", "tests/fixtures/a_general.json"],
        exit: 0,
        writes: None,
    },
    Case {
        name: "measure_reflect",
        argv: &["measure", "reflect", "tests/fixtures/mu_paired.json"],
        exit: 0,
        writes: None,
    },
    Case {
        name: "measure_rn",
        argv: &["measure", "rn", "tests/fixtures/mu_paired.json"],
        exit: 0,
        writes: None,
    },
    Case {
        name: "measure_rn_unpaired",
        argv: &["measure", "rn", "tests/fixtures/mu_unpaired.json"],
        exit: 3,
        writes: None,
    },
    Case {
        name: "measure_meet",
        argv: &[
            "measure",
            "meet",
            "tests/fixtures/mu_paired.json",
            "tests/fixtures/mu_other.json",
        ],
        exit: 0,
        writes: None,
    },
    Case {
        name: "measure_join",
        argv: &[
            "measure",
            "join",
            "tests/fixtures/mu_paired.json",
            "tests/fixtures/mu_other.json",
        ],
        exit: 0,
        writes: None,
    },
    Case {
        name: "shift_demo_sincos",
        argv: &[
            "shift-demo",
            "--order",
            "64",
            "--degree",
            "2",
            "--preset",
            "sincos",
        ],
        exit: 0,
        writes: None,
    },
    Case {
        name: "shift_demo_lambda",
        argv: &[
            "shift-demo",
            "--order",
            "64",
            "--degree",
            "2",
            "--preset",
            "lambda",
        ],
        exit: 0,
        writes: None,
    },
    Case {
        name: "shift_demo_degree1",
        argv: &[
            "shift-demo",
            "--order",
            "32",
            "--degree",
            "1",
            "--preset",
            "sincos",
        ],
        exit: 0,
        writes: None,
    },
    Case {
        name: "shift_demo_odd_order",
        argv: &["shift-demo", "--order", "7", "--degree", "2"],
        exit: 2,
        writes: None,
    },
    Case {
        name: "fourier_demo",
        argv: &["fourier-demo", "--size", "8", "--seed", "3"],
        exit: 0,
        writes: None,
    },
    Case {
        name: "fourier_demo_ragged",
        argv: &["fourier-demo", "--size", "6", "--seed", "3"],
        exit: 2,
        writes: None,
    },
    Case {
        name: "hilbert_demo",
        argv: &["hilbert-demo", "--size", "6", "--seed", "3"],
        exit: 0,
        writes: None,
    },
    Case {
        name: "malformed_input",
        argv: &["check", "tests/fixtures/malformed.json"],
        exit: 2,
        writes: None,
    },
    Case {
        name: "missing_file",
        argv: &["check", "tests/fixtures/does_not_exist.json"],
        exit: 2,
        writes: None,
    },
];

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn out_dir(tag: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("golden-{tag}"));
    fs::create_dir_all(&dir).unwrap();
    dir
}

pub struct Observed {
    pub exit: i32,
    pub stdout: String,
    pub stderr: String,
    pub written: Option<String>,
}

/// Runs a case with `{out}` pointing at `out`, and maps the directory back
/// to the placeholder in stdout so the text is location-independent.
pub fn observe(case: &Case, out: &Path) -> Observed {
    let out_str = out.to_string_lossy().into_owned();
    let mut argv = vec!["cconj".to_string()];
    argv.extend(case.argv.iter().map(|a| a.replace(OUT, &out_str)));
    let (exit, stdout, stderr) = run(argv);
    let written = case
        .writes
        .map(|f| fs::read_to_string(out.join(f)).expect("output file written"));
    Observed {
        exit,
        stdout: stdout.replace(&out_str, OUT),
        stderr: stderr.replace(&out_str, OUT),
        written,
    }
}

/// Compares every case against its golden files; with `UPDATE_GOLDEN=1`
/// rewrites them instead. Returns a list of mismatches.
pub fn check_all(tag: &str) -> Vec<String> {
    let update = std::env::var("UPDATE_GOLDEN").is_ok_and(|v| v == "1");
    let dir = golden_dir();
    let out = out_dir(tag);
    let mut failures = Vec::new();
    for case in CASES {
        let obs = observe(case, &out);
        if obs.exit != case.exit {
            failures.push(format!(
                "{}: exit {} (expected {})",
                case.name, obs.exit, case.exit
            ));
        }
        let stdout_path = dir.join(format!("{}.stdout.json", case.name));
        let file_path = dir.join(format!("{}.file.json", case.name));
        if update {
            fs::write(&stdout_path, &obs.stdout).unwrap();
            if let Some(w) = &obs.written {
                fs::write(&file_path, w).unwrap();
            }
            continue;
        }
        match fs::read_to_string(&stdout_path) {
            Ok(expected) if expected == obs.stdout => {}
            Ok(_) => failures.push(format!("{}: stdout differs from golden", case.name)),
            Err(_) => failures.push(format!(
                "{}: missing golden {}",
                case.name,
                stdout_path.display()
            )),
        }
        if let Some(w) = &obs.written {
            match fs::read_to_string(&file_path) {
                Ok(expected) if &expected == w => {}
                _ => failures.push(format!("{}: written file differs from golden", case.name)),
            }
        }
        // Byte-identical reruns.
        let again = observe(case, &out);
        if again.stdout != obs.stdout || again.exit != obs.exit || again.written != obs.written {
            failures.push(format!("{}: rerun is not byte-identical", case.name));
        }
    }
    failures
}
