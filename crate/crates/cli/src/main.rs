use clap::Parser;
use tvinesynth_cli::error::{exit_code, EXIT_OK, EXIT_USAGE};
use tvinesynth_cli::{run, Cli};

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("warning: could not size thread pool: {e}");
        }
    }
    if let Err(e) = run(&cli, &argv) {
        eprintln!("error: {e:#}");
        std::process::exit(exit_code(&e));
    }
}
