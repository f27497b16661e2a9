use clap::Parser;
use iel_cli::{execute, Cli, EXIT_INPUT};

fn main() {
    if let Some(n) = std::env::var("IEL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    if cli.command.is_none() && cli.replay.is_none() {
        eprintln!("error: a subcommand or --replay is required");
        std::process::exit(EXIT_INPUT);
    }
    std::process::exit(execute(&cli));
}
