use clap::Parser;

fn main() {
    std::process::exit(oneworld::cli::main_with(oneworld::cli::Cli::parse()));
}
