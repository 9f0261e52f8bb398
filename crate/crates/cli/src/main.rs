use clap::Parser;
use gammalab::Cli;

fn main() {
    let cli = Cli::parse();
    match gammalab::run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
        }
        Err(e) => {
            eprintln!("gammalab: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
