use std::io::Write;

fn main() {
    let env_repo = std::env::var("REMIS_REPO").ok();
    let out = remis_cli::run(std::env::args_os(), env_repo.as_deref());
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    std::process::exit(out.code);
}
