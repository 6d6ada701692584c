fn main() {
    let env = std::env::vars().collect();
    let code = tiltsurf::cli::main_with(
        std::env::args_os(),
        env,
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    std::process::exit(code);
}
