//! Acceptance criteria, one line each. Runs every criterion even when an earlier
//! one fails and exits nonzero if any failed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use jetcartan::dsl;
use jetcartan::verify::suite::{self, einstein_nonvacuum_check, Entry};
use jetcartan::verify::{mutate, run_check, CheckOutcome};

const SEED: u64 = 0;

struct Verdict {
    pass: bool,
    detail: String,
}

fn summary(outs: &[CheckOutcome]) -> Verdict {
    let failed: Vec<String> =
        outs.iter().filter(|o| !o.pass).map(|o| format!("{} worst {:.1e} > tol {:.0e}", o.id, o.worst_error, o.tol)).collect();
    let worst = outs.iter().map(|o| o.worst_error / o.tol).fold(0.0, f64::max);
    let detail = if failed.is_empty() {
        format!("{} checks, worst/tol {worst:.1e}", outs.len())
    } else {
        format!("{}/{} checks pass; failing: {}", outs.len() - failed.len(), outs.len(), failed.join(", "))
    };
    Verdict { pass: failed.is_empty(), detail }
}

fn registered(criterion: u8) -> Verdict {
    let entries: Vec<Entry> = suite::registry().into_iter().filter(|e| e.criterion == Some(criterion)).collect();
    assert!(!entries.is_empty(), "criterion {criterion} has no checks");
    summary(&suite::run_entries(&entries, SEED, false))
}

fn einstein_from_currents() -> Verdict {
    let mut v = registered(13);
    match einstein_nonvacuum_check(SEED) {
        Ok(c) => {
            let o = run_check(&c, SEED, false);
            if o.pass {
                v.pass = false;
                v.detail += "; non-vacuum check passed but must fail";
            } else {
                v.detail += &format!("; non-vacuum check fails as required (worst {:.1e})", o.worst_error);
            }
        }
        Err(e) => {
            v.pass = false;
            v.detail += &format!("; non-vacuum fixture: {e}");
        }
    }
    v
}

fn parser_totality() -> (bool, String) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/malformed");
    let mut files: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    let mut bad = Vec::new();
    for f in &files {
        let text = String::from_utf8_lossy(&std::fs::read(f).unwrap()).into_owned();
        let name = f.file_name().unwrap().to_string_lossy().into_owned();
        match catch_unwind(AssertUnwindSafe(|| dsl::parse(&text))) {
            Err(_) => bad.push(format!("{name} panicked")),
            Ok(Ok(_)) => bad.push(format!("{name} accepted")),
            Ok(Err(e)) if e.pos().is_none() => bad.push(format!("{name} unpositioned: {e}")),
            Ok(Err(_)) => {}
        }
    }
    let ok = files.len() >= 50 && bad.is_empty();
    (ok, format!("{} malformed files, {} positioned errors{}", files.len(), files.len() - bad.len(), listing(&bad)))
}

fn listing(bad: &[String]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!(" [{}]", bad.join("; "))
    }
}

fn reproducible_reports() -> (bool, String) {
    let exe = env!("CARGO_BIN_EXE_jetcartan");
    let model = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/models/random-metric.jc");
    let runs: Vec<Vec<String>> = [vec!["check", "suite", "all"], vec!["check", model.to_str().unwrap(), "all"]]
        .iter()
        .map(|args| {
            (0..2)
                .map(|_| {
                    let out = Command::new(exe).args(args).args(["--json", "--seed", "42"]).output().unwrap();
                    String::from_utf8(out.stdout).unwrap()
                })
                .collect()
        })
        .collect();
    let same = runs.iter().all(|r| !r[0].is_empty() && r[0] == r[1]);
    (same, format!("seed 42 JSON for the registry and random-metric.jc {}", if same { "byte-identical" } else { "differs" }))
}

fn mutants_fail() -> (bool, String) {
    let mut bad = Vec::new();
    let reg = suite::registry();
    for e in &reg {
        match e.check(SEED).map(|c| mutate(&c, SEED)) {
            Ok(Some(m)) if !run_check(&m, SEED, false).pass => {}
            Ok(Some(_)) => bad.push(format!("{} mutant passed", e.id)),
            Ok(None) => bad.push(format!("{} not mutable", e.id)),
            Err(err) => bad.push(format!("{}: {err}", e.id)),
        }
    }
    (bad.is_empty(), format!("{}/{} sign-flip mutants fail{}", reg.len() - bad.len(), reg.len(), listing(&bad)))
}

fn engineering() -> Verdict {
    let parts = [parser_totality(), reproducible_reports(), mutants_fail()];
    Verdict { pass: parts.iter().all(|p| p.0), detail: parts.map(|p| p.1).join("; ") }
}

type Criterion = (u8, &'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 14] = [
        (1, "projectability", || registered(1)),
        (2, "involution", || registered(2)),
        (3, "nabla-kappa and gamma independence", || registered(3)),
        (4, "gauge/linear consistency", || registered(4)),
        (5, "horizontal-lift current", || registered(5)),
        (6, "first variation", || registered(6)),
        (7, "energy-tensor relations", || registered(7)),
        (8, "maxwell limit", || registered(8)),
        (9, "bianchi and vacuum", || registered(9)),
        (10, "komar off-shell conservation", || registered(10)),
        (11, "komar lift", || registered(11)),
        (12, "total conservation", || registered(12)),
        (13, "einstein from currents", einstein_from_currents),
        (14, "engineering", engineering),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (n, name, f) in criteria {
        let t = Instant::now();
        let v = catch_unwind(f).unwrap_or_else(|_| Verdict { pass: false, detail: "panicked".into() });
        failed += usize::from(!v.pass);
        let mark = if v.pass { "PASS" } else { "FAIL" };
        println!("{mark} {n:>2} {name}: {} [{:.1}s]", v.detail, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {}/14 criteria pass in {:.1}s", 14 - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
