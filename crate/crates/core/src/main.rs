use sofic_lab::harness::cli::cli_dispatch;

fn main() {
    let code = cli_dispatch(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
