use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match exactme::cli::Cli::try_parse() {
        Ok(cli) => exactme::cli::execute(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                exactme::cli::EXIT_INVALID
            } else {
                0
            }
        }
    };
    std::process::exit(code);
}
