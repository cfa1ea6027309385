use std::io::Write;

fn main() {
    let cap = std::env::var(ergolab::cli::DIM_CAP_ENV).ok();
    let out = ergolab::cli::run(std::env::args_os(), cap.as_deref());
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    std::process::exit(out.code);
}
