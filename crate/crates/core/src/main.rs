use clap::Parser;

fn main() {
    let cli = telecluster::cli::Cli::parse();
    std::process::exit(telecluster::cli::run(cli));
}
