fn main() {
    std::process::exit(label_audit::cli::main_exit_code());
}
