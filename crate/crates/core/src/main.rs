use std::process::exit;

fn main() {
    let mut stdout = std::io::stdout();
    let code = mspmul::cli::run(std::env::args(), &mut stdout);
    exit(code);
}
