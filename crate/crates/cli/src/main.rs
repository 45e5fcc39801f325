use std::io::Write;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("MCGSEQ_LOG")).init();
    let outcome = mcgseq_cli::run(std::env::args_os());
    let mut stdout = std::io::stdout().lock();
    // A closed pipe is not worth a panic.
    let _ = stdout.write_all(outcome.stdout.as_bytes());
    let _ = stdout.flush();
    std::process::exit(outcome.code);
}
