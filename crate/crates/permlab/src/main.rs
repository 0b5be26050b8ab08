use std::io::{self, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdin = io::stdin();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = permlab::cli::run(std::env::args_os(), &mut stdin.lock(), &mut out);
    let _ = out.flush();
    ExitCode::from(code)
}
