use clap::Parser;

fn main() -> std::process::ExitCode {
    let cli = srgeo::cli::Cli::parse();
    std::process::ExitCode::from(srgeo::cli::run(&cli))
}
