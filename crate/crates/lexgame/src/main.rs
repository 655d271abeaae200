use clap::Parser;

fn main() {
    let cli = lexgame::cli::Cli::parse();
    if let Err(e) = lexgame::cli::execute(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
