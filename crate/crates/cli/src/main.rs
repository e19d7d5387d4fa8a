use clap::Parser;

fn main() {
    let cli = valuescope_cli::Cli::parse();
    if let Err(err) = valuescope_cli::run(cli) {
        let (class, code) = err.class();
        eprintln!("error[{class}]: {err}");
        std::process::exit(code);
    }
}
