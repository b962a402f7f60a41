use std::process::ExitCode;

fn main() -> ExitCode {
    let code = kinetic_dec_cli::cli::run_cli(std::env::args_os(), &mut std::io::stdout());
    ExitCode::from(code as u8)
}
