use clap::Parser;

fn main() {
    let cli = rischan::Cli::parse();
    if let Err(e) = rischan::run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
