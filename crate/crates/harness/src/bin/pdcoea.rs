use std::io;

fn main() {
    let code = pdcoea_harness::cli::run(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
