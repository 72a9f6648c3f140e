use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jetcartan::dsl::{self, Command, Document, Report, RunOptions};
use jetcartan::verify::suite;
use jetcartan::verify::{fit_oracle, OracleKind};

#[derive(Parser)]
#[command(name = "jetcartan", version, about = "Connections, energy tensors and Noether currents on jet bundles")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Opts {
    /// Emit the JSON report instead of text.
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample points per check (default: each check's own, 20 for most).
    #[arg(long)]
    trials: Option<usize>,
    /// Relative tolerance (default: each check's own, 1e-8 for most).
    #[arg(long)]
    tol: Option<f64>,
    /// Sign of ε_{0123} in the chart's coordinate order.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true, value_parser = parse_orientation)]
    orientation: i32,
    /// Record wall time per check (makes reports non-reproducible).
    #[arg(long)]
    timing: bool,
}

fn parse_orientation(s: &str) -> Result<i32, String> {
    match s {
        "1" | "+1" => Ok(1),
        "-1" => Ok(-1),
        _ => Err("orientation must be 1 or -1".into()),
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run checks: `all`, a check kind, or `kind:object`. With `suite` in place
    /// of a file, runs the built-in registry (`all`, a criterion number or an id).
    Check {
        file: PathBuf,
        #[arg(default_value = "all")]
        target: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Print components of an object, with their largest modulus on the sampling box.
    Compute {
        file: PathBuf,
        object: String,
        subject: Option<String>,
        #[command(flatten)]
        opts: Opts,
    },
    /// All checks of a document with statements and worst points.
    Report {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Total-current conservation for every scalar model of the document.
    EinsteinFromCurrents {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Print the document in canonical form.
    Print { file: PathBuf },
    /// Maintenance: refit an Euler–Lagrange residual template and write its fixture.
    Oracle {
        /// free-scalar, scalar, dirac, scalar-gauge or all
        kind: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "crates/core/fixtures/oracles")]
        out: PathBuf,
    },
}

impl Opts {
    fn run_options(&self) -> RunOptions {
        RunOptions { seed: self.seed, trials: self.trials, tol: self.tol, orientation: self.orientation, timing: self.timing }
    }
}

/// Exit statuses: 0 all checks pass, 1 a check failed, 2 unusable input.
const FAILED: u8 = 1;
const BAD_INPUT: u8 = 2;

/// Output sinks. Write errors are ignored so a closed pipe (`| head`) is not fatal.
struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn out(&mut self, text: &str) {
        let _ = self.out.write_all(text.as_bytes());
    }

    fn err(&mut self, text: &str) {
        let _ = writeln!(self.err, "{text}");
    }
}

fn load(path: &Path, io: &mut Io) -> Result<Document, u8> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        io.err(&format!("{}: {e}", path.display()));
        BAD_INPUT
    })?;
    dsl::parse(&text).map_err(|e| {
        io.err(&format!("{}:{e}", path.display()));
        BAD_INPUT
    })
}

fn emit(report: &Report, opts: &Opts, verbose: bool, io: &mut Io) -> u8 {
    if opts.json {
        io.out(&format!("{}\n", report.to_json()));
    } else {
        io.out(&report.human(verbose));
    }
    if report.pass {
        0
    } else {
        FAILED
    }
}

fn run_file(file: &Path, cmd: Command, opts: &Opts, verbose: bool, io: &mut Io) -> u8 {
    let doc = match load(file, io) {
        Ok(d) => d,
        Err(code) => return code,
    };
    match dsl::run(&doc, &cmd, &opts.run_options()) {
        Ok(r) => emit(&r, opts, verbose, io),
        Err(e) => {
            io.err(&format!("{}: {e}", file.display()));
            BAD_INPUT
        }
    }
}

fn run_suite(target: &str, opts: &Opts, io: &mut Io) -> u8 {
    let mut entries = match suite::select(target) {
        Ok(v) => v,
        Err(e) => {
            io.err(&e.to_string());
            return BAD_INPUT;
        }
    };
    for e in &mut entries {
        if let Some(t) = opts.trials {
            e.trials = t;
        }
        if let Some(t) = opts.tol {
            e.tol = t;
        }
    }
    let ro = opts.run_options();
    let mut r = Report::new(format!("check suite {target}"), &ro);
    r.checks = suite::run_entries(&entries, opts.seed, opts.timing);
    r.pass = r.checks.iter().all(|c| c.pass);
    emit(&r, opts, false, io)
}

fn oracle(kind: &str, seed: u64, out: &Path, io: &mut Io) -> u8 {
    let kinds: Vec<OracleKind> = if kind == "all" {
        OracleKind::ALL.to_vec()
    } else {
        match OracleKind::from_id(kind) {
            Some(k) => vec![k],
            None => {
                io.err(&format!("unknown oracle `{kind}`"));
                return BAD_INPUT;
            }
        }
    };
    let date = time::OffsetDateTime::now_utc().date().to_string();
    for k in kinds {
        match fit_oracle(k, seed, &date) {
            Ok(r) => {
                let path = out.join(format!("{}.txt", k.id()));
                if let Err(e) = std::fs::write(&path, r.to_text()) {
                    io.err(&format!("{}: {e}", path.display()));
                    return FAILED;
                }
                io.out(&r.to_text());
            }
            Err(e) => {
                io.err(&e.to_string());
                return FAILED;
            }
        }
    }
    0
}

fn execute(cli: Cli, io: &mut Io) -> u8 {
    match cli.cmd {
        Cmd::Check { file, target, opts } if file.as_os_str() == "suite" => run_suite(&target, &opts, io),
        Cmd::Check { file, target, opts } => run_file(&file, Command::Check(target), &opts, false, io),
        Cmd::Compute { file, object, subject, opts } => run_file(&file, Command::Compute(object, subject), &opts, false, io),
        Cmd::Report { file, opts } => run_file(&file, Command::Report, &opts, true, io),
        Cmd::EinsteinFromCurrents { file, opts } => run_file(&file, Command::EinsteinFromCurrents, &opts, false, io),
        Cmd::Print { file } => match load(&file, io) {
            Ok(doc) => {
                io.out(&doc.print());
                0
            }
            Err(code) => code,
        },
        Cmd::Oracle { kind, seed, out } => oracle(&kind, seed, &out, io),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr().lock());
    ExitCode::from(execute(cli, &mut Io { out: &mut out, err: &mut err }))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MODELS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/models");

    fn run(args: &[&str]) -> (u8, String, String) {
        let cli = Cli::try_parse_from(std::iter::once("jetcartan").chain(args.iter().copied())).unwrap();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = execute(cli, &mut Io { out: &mut out, err: &mut err });
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn model(name: &str) -> String {
        format!("{MODELS}/{name}")
    }

    fn json(text: &str) -> serde_json::Value {
        serde_json::from_str(text).unwrap()
    }

    #[test]
    fn schwarzschild_time_component_at_r_four() {
        let doc = dsl::parse(&std::fs::read_to_string(model("schwarzschild.jc")).unwrap()).unwrap();
        let dsl::Object::Metric(g) = doc.env.get("g").unwrap() else { panic!("g is not a metric") };
        let at = jetcartan::symexpr::Assignment::from_reals(&[("t", 0.0), ("r", 4.0), ("th", 1.0), ("ph", 0.0)]);
        let gtt = g.lower(0, 0).eval(&at).unwrap();
        assert!((gtt.re - 0.5).abs() < 1e-15 && gtt.im == 0.0, "{gtt}");
    }

    #[test]
    fn komar_offshell_passes_on_random_metric() {
        let (code, out, _) = run(&["check", &model("random-metric.jc"), "komar-offshell", "--json"]);
        assert_eq!(code, 0, "{out}");
        let v = json(&out);
        assert_eq!(v["schema"], 1);
        assert!(v["checks"].as_array().unwrap().iter().all(|c| c["id"] == "komar-offshell" && c["pass"] == true));
    }

    #[test]
    fn einstein_tensor_of_schwarzschild_vanishes() {
        let (code, out, _) = run(&["compute", &model("schwarzschild.jc"), "einstein", "--json"]);
        assert_eq!(code, 0);
        let comps = json(&out)["computed"][0]["components"].as_array().unwrap().clone();
        assert_eq!(comps.len(), 16);
        for c in comps {
            assert!(c["max_abs"].as_f64().unwrap() <= 1e-8, "{c}");
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(&["check", &model("su2.jc")]).0, 0);
        let (code, out, _) = run(&["einstein-from-currents", &model("random-metric.jc")]);
        assert_eq!(code, FAILED, "{out}");
        assert!(out.contains("FAIL"));
        let bad = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/malformed/metric-foreign-symbol.jc");
        let (code, _, err) = run(&["check", bad]);
        assert_eq!(code, BAD_INPUT);
        assert!(err.contains("metric-foreign-symbol.jc:2:18: unresolved name `z`"), "{err}");
        assert_eq!(run(&["check", &model("su2.jc"), "no-such-check"]).0, BAD_INPUT);
        assert_eq!(run(&["check", "/nonexistent.jc"]).0, BAD_INPUT);
        assert_eq!(run(&["check", "suite", "energy-dirac"]).0, FAILED);
        assert_eq!(run(&["check", "suite", "99"]).0, BAD_INPUT);
    }

    #[test]
    fn suite_reports_are_reproducible() {
        let a = run(&["check", "suite", "11", "--json", "--seed", "42"]);
        let b = run(&["check", "suite", "11", "--json", "--seed", "42"]);
        assert_eq!(a.0, 0);
        assert_eq!(a.1, b.1);
        assert!(!a.1.contains("wall_ms"));
        assert!(run(&["check", "suite", "11", "--json", "--timing"]).1.contains("wall_ms"));
    }

    #[test]
    fn print_is_a_fixed_point() {
        let (code, once, _) = run(&["print", &model("dirac.jc")]);
        assert_eq!(code, 0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dirac.jc");
        std::fs::write(&path, &once).unwrap();
        assert_eq!(run(&["print", path.to_str().unwrap()]).1, once);
    }

    #[test]
    fn orientation_flag() {
        assert!(Cli::try_parse_from(["jetcartan", "check", "x.jc", "--orientation", "-1"]).is_ok());
        assert!(Cli::try_parse_from(["jetcartan", "check", "x.jc", "--orientation", "2"]).is_err());
    }
}
