use clap::Parser;

fn main() {
    let cli = sae_cli::Cli::parse();
    if let Err(e) = sae_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
