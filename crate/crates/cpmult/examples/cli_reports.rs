//! Driving the command-line interface in-process.
//!
//! Every subcommand of the `cpmult` binary is callable as a library
//! function returning the exit code and the JSON report it would print.
//! Reports are deterministic byte-for-byte for identical inputs, carry
//! residuals and certificates, and re-verify with `--verify`.
//!
//! Run with: cargo run --example cli_reports

use cpmult::cli::run_to_string;

fn run(args: &[&str]) -> (i32, String) {
    run_to_string(args.iter().map(|s| s.to_string()))
}

fn main() {
    // Verdict commands that need no input file.
    let (code, report) = run(&["loewner", "--fn", "sqrt", "--nodes", "0.5,1,2,4"]);
    println!("loewner sqrt — exit {}\n{}", code, report);

    let (code, report) = run(&["loewner", "--fn", "square", "--nodes", "1,2"]);
    println!("loewner square — exit {} (negative verdicts exit 3)\n{}", code, report);

    let (code, report) = run(&["cauchy", "--nodes", "0.1,1,10", "--quad", "40"]);
    println!("cauchy — exit {}\n{}", code, report);

    // File-based commands: write an input, point the subcommand at it.
    let dir = std::env::temp_dir().join("cpmult-cli-example");
    std::fs::create_dir_all(&dir).expect("create temp dir");
    let input = dir.join("kernel.json");
    std::fs::write(
        &input,
        r#"{"values": [[1.0,0],[0.5,0],[0.5,0],[1.0,0]]}"#,
    )
    .expect("write input");
    let input = input.to_str().unwrap();

    let (code, report) = run(&["gram", "--in", input]);
    println!("gram — exit {}\n{}", code, report);

    // Deterministic bytes: the same invocation twice gives the same report.
    let (_, again) = run(&["gram", "--in", input]);
    println!("byte-identical on repeat: {}", report == again);

    // Round trip: feed the report back for independent re-verification.
    let saved = dir.join("report.json");
    std::fs::write(&saved, &report).expect("save report");
    let (code, verify) = run(&["gram", "--in", input, "--verify", saved.to_str().unwrap()]);
    println!("verify — exit {}\n{}", code, verify);

    let _ = std::fs::remove_dir_all(&dir);
    let _ = code;
}
