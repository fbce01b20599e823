use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = dtgen_cli::run_from_args(std::env::args_os());
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    for m in &outcome.messages {
        eprintln!("{m}");
    }
    for line in &outcome.stdout {
        println!("{line}");
    }
    ExitCode::from(outcome.exit_code.clamp(0, 255) as u8)
}
