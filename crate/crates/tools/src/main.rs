use sphera_tools::cli;

fn main() {
    if let Err(err) = cli::run() {
        eprintln!("error: {}", err.message());
        std::process::exit(err.exit_code());
    }
}
