fn main() {
    std::process::exit(bogodiag::cli::main_entry(std::env::args_os()));
}
