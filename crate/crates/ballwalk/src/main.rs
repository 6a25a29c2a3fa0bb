use clap::Parser;

use ballwalk::cli::{main_with, Cli};

fn main() {
    let cli = Cli::parse();
    let env_seed = std::env::var("BALLWALK_SEED").ok();
    let code = main_with(
        &cli,
        env_seed.as_deref(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
